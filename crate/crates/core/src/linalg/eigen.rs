//! Smallest eigenvalue of the symmetric-definite pencil `(A, M)`.
//!
//! Spectrum slicing (band LDLᵀ inertia counts) brackets the smallest eigenvalue
//! from below, then shifted inverse iteration with the shift under the whole
//! spectrum converges to it. Small systems may use a dense Cholesky reduction.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::banded::{count_eigenvalues_below, BandedLu};
use super::sparse::{dot, CsrMatrix, TripletBuilder};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenMethod {
    /// Dense below `dense_threshold` unknowns, inverse iteration above.
    Auto,
    InverseIteration,
    Dense,
}

#[derive(Debug, Clone, Copy)]
pub struct EigenConfig {
    pub method: EigenMethod,
    pub dense_threshold: usize,
    pub max_iterations: usize,
    pub shift_retries: usize,
}

impl Default for EigenConfig {
    fn default() -> Self {
        Self {
            method: EigenMethod::Auto,
            dense_threshold: 600,
            max_iterations: 500,
            shift_retries: 6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    /// M-normalized eigenvector.
    pub vector: Vec<f64>,
    pub residual: f64,
}

/// Smallest generalized eigenvalue `λ` of `A v = λ M v` with the default config.
pub fn smallest_generalized_eigenvalue(
    a: &CsrMatrix,
    m: &CsrMatrix,
    shift_guess: f64,
    tol: f64,
) -> Result<EigenPair> {
    smallest_generalized_eigenvalue_with(a, m, shift_guess, tol, &EigenConfig::default())
}

pub fn smallest_generalized_eigenvalue_with(
    a: &CsrMatrix,
    m: &CsrMatrix,
    shift_guess: f64,
    tol: f64,
    cfg: &EigenConfig,
) -> Result<EigenPair> {
    let n = a.rows();
    if n == 0 || a.cols() != n || m.rows() != n || m.cols() != n {
        return Err(Error::invalid("eigenproblem needs square matrices of equal size"));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("eigen tolerance must be positive"));
    }
    let dense = match cfg.method {
        EigenMethod::Dense => true,
        EigenMethod::InverseIteration => false,
        EigenMethod::Auto => n < cfg.dense_threshold,
    };
    if dense {
        dense_smallest(a, m)
    } else {
        inverse_iteration(a, m, shift_guess, tol, cfg)
    }
}

fn rayleigh(a: &CsrMatrix, m: &CsrMatrix, v: &[f64]) -> (f64, f64) {
    (a.bilinear(v, v), m.bilinear(v, v))
}

/// `‖A v − λ M v‖ / (‖M v‖ (1 + |λ|))`.
pub fn eigen_residual(a: &CsrMatrix, m: &CsrMatrix, lambda: f64, v: &[f64]) -> f64 {
    let av = a.matvec(v);
    let mv = m.matvec(v);
    let r: f64 = av
        .iter()
        .zip(&mv)
        .map(|(p, q)| (p - lambda * q).powi(2))
        .sum::<f64>()
        .sqrt();
    r / (dot(&mv, &mv).sqrt() * (1.0 + lambda.abs()))
}

fn shifted(a: &CsrMatrix, m: &CsrMatrix, sigma: f64) -> CsrMatrix {
    let mut b = TripletBuilder::with_capacity(a.rows(), a.cols(), a.nnz() + m.nnz());
    for i in 0..a.rows() {
        for (j, v) in a.row(i) {
            b.push(i, j, v);
        }
        for (j, v) in m.row(i) {
            b.push(i, j, -sigma * v);
        }
    }
    b.build()
}

/// Inertia count with automatic perturbation when the shift hits an eigenvalue.
fn count_below(a: &CsrMatrix, m: &CsrMatrix, sigma: f64, retries: usize) -> Result<(f64, usize)> {
    let mut s = sigma;
    let mut delta = 1e-10 * (1.0 + sigma.abs());
    for _ in 0..=retries {
        if let Some(c) = count_eigenvalues_below(a, m, s) {
            return Ok((s, c));
        }
        s -= delta;
        delta *= 10.0;
    }
    Err(Error::EigenBreakdown(format!(
        "zero pivot in inertia count near shift {sigma}"
    )))
}

fn inverse_iteration(
    a: &CsrMatrix,
    m: &CsrMatrix,
    shift_guess: f64,
    tol: f64,
    cfg: &EigenConfig,
) -> Result<EigenPair> {
    let n = a.rows();
    // 1. lower bound: no eigenvalue below `lo`
    let mut step = 1.0f64.max(shift_guess.abs());
    let (mut lo, mut c) = count_below(a, m, shift_guess, cfg.shift_retries)?;
    let mut guard = 0;
    while c > 0 {
        lo -= step;
        step *= 2.0;
        let r = count_below(a, m, lo, cfg.shift_retries)?;
        lo = r.0;
        c = r.1;
        guard += 1;
        if guard > 200 {
            return Err(Error::EigenBreakdown("could not find a lower bound".into()));
        }
    }
    // 2. upper bound: at least one eigenvalue below `hi`
    let mut step = 1.0f64.max(lo.abs());
    let mut hi = lo + step;
    loop {
        let (h, c) = count_below(a, m, hi, cfg.shift_retries)?;
        hi = h;
        if c > 0 {
            break;
        }
        lo = hi;
        step *= 2.0;
        hi = lo + step;
        guard += 1;
        if guard > 400 {
            return Err(Error::EigenBreakdown("could not find an upper bound".into()));
        }
    }
    // 3. bisect until a single eigenvalue is isolated in a narrow bracket
    let mut isolated = false;
    let mut extra = 0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (mid, c) = count_below(a, m, mid, cfg.shift_retries)?;
        if c == 0 {
            lo = mid;
        } else {
            hi = mid;
            isolated = c == 1;
        }
        if isolated {
            extra += 1;
        }
        if (isolated && extra >= 12) || hi - lo <= 1e-12 * (1.0 + hi.abs()) {
            break;
        }
    }
    // 4. inverse iteration with shift below the spectrum
    let mut sigma = lo - 1e-8 * (1.0 + lo.abs());
    let mut lu = None;
    for _ in 0..=cfg.shift_retries {
        match BandedLu::factor(&shifted(a, m, sigma)) {
            Ok(f) => {
                lu = Some(f);
                break;
            }
            Err(_) => sigma -= 1e-6 * (1.0 + sigma.abs()),
        }
    }
    let lu = lu.ok_or_else(|| Error::EigenBreakdown("shifted operator is singular".into()))?;
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.1 * ((i as f64 + 1.0) * 0.7).sin())
        .collect();
    let norm = m.bilinear(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    let mut lambda = f64::NAN;
    let mut res = f64::INFINITY;
    for _ in 0..cfg.max_iterations {
        let mv = m.matvec(&v);
        let mut w = lu.solve(&mv);
        let wn = m.bilinear(&w, &w).sqrt();
        if !wn.is_finite() || wn == 0.0 {
            return Err(Error::EigenBreakdown("inverse iteration produced a zero vector".into()));
        }
        w.iter_mut().for_each(|x| *x /= wn);
        v = w;
        let (num, den) = rayleigh(a, m, &v);
        lambda = num / den;
        res = eigen_residual(a, m, lambda, &v);
        if res <= tol {
            return Ok(EigenPair {
                value: lambda,
                vector: v,
                residual: res,
            });
        }
    }
    Err(Error::EigenBreakdown(format!(
        "inverse iteration stalled at λ = {lambda}, residual {res:.3e}"
    )))
}

fn dense_smallest(a: &CsrMatrix, m: &CsrMatrix) -> Result<EigenPair> {
    let n = a.rows();
    let ad = DMatrix::from_fn(n, n, |i, j| a.get(i, j));
    let md = DMatrix::from_fn(n, n, |i, j| m.get(i, j));
    let chol = md
        .cholesky()
        .ok_or_else(|| Error::invalid("mass matrix is not positive definite"))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::EigenBreakdown("Cholesky factor not invertible".into()))?;
    let c = &linv * &ad * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let (idx, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .expect("non-empty spectrum");
    let y = eig.eigenvectors.column(idx).into_owned();
    // v = L⁻ᵀ y is M-orthonormal
    let v = linv.transpose() * y;
    let v: Vec<f64> = v.iter().copied().collect();
    let (num, den) = rayleigh(a, m, &v);
    let lambda = num / den;
    Ok(EigenPair {
        value: lambda,
        residual: eigen_residual(a, m, lambda, &v),
        vector: v,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_1d(n: usize) -> (CsrMatrix, CsrMatrix) {
        // P1 on (0,1) with n cells, interior dofs only
        let h = 1.0 / n as f64;
        let m = n - 1;
        let mut a = TripletBuilder::new(m, m);
        let mut b = TripletBuilder::new(m, m);
        for i in 0..m {
            a.push(i, i, 2.0 / h);
            b.push(i, i, 4.0 * h / 6.0);
            if i + 1 < m {
                a.push(i, i + 1, -1.0 / h);
                a.push(i + 1, i, -1.0 / h);
                b.push(i, i + 1, h / 6.0);
                b.push(i + 1, i, h / 6.0);
            }
        }
        (a.build(), b.build())
    }

    #[test]
    fn inverse_iteration_matches_dense() {
        let (a, m) = laplace_1d(40);
        let cfg = EigenConfig {
            method: EigenMethod::InverseIteration,
            ..Default::default()
        };
        let it = smallest_generalized_eigenvalue_with(&a, &m, 0.0, 1e-10, &cfg).unwrap();
        let cfg = EigenConfig {
            method: EigenMethod::Dense,
            ..Default::default()
        };
        let de = smallest_generalized_eigenvalue_with(&a, &m, 0.0, 1e-10, &cfg).unwrap();
        assert!((it.value - de.value).abs() < 1e-9 * de.value.abs());
        // far-away guesses still land on the smallest eigenvalue
        for guess in [-1e4, 50.0, 1e5] {
            let cfg = EigenConfig {
                method: EigenMethod::InverseIteration,
                ..Default::default()
            };
            let p = smallest_generalized_eigenvalue_with(&a, &m, guess, 1e-10, &cfg).unwrap();
            assert!((p.value - de.value).abs() < 1e-9 * de.value.abs(), "guess {guess}");
        }
    }
}
