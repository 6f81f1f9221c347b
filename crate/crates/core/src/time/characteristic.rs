//! Polynomial surrogates for the cutoff `χ_[0, t̂)` on the reference slab.
//!
//! `ρ ∈ P_k` with `ρ(0) = 1` and `∫₀¹ ρ q = ∫₀^t̂ q` for every `q ∈ P_{k−1}`.

use std::io::Write;

use serde::Serialize;

use super::basis::TimeBasis;
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::quadrature::{gauss_legendre, gauss_legendre_on};

#[derive(Debug, Clone, Serialize)]
pub struct CharacteristicPoly {
    pub degree_k: usize,
    pub t_hat: f64,
    /// Monomial coefficients `ρ(s) = Σ a_m s^m`.
    pub coefficients: Vec<f64>,
    pub sup_norm_estimate: f64,
}

impl CharacteristicPoly {
    pub fn eval(&self, s: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * s + c)
    }

    /// `∫₀¹ ρ(s) s^p ds − ∫₀^t̂ s^p ds`, zero for `p < k`.
    pub fn moment_defect(&self, p: usize) -> f64 {
        let lhs: f64 = self
            .coefficients
            .iter()
            .enumerate()
            .map(|(m, a)| a / (m + p + 1) as f64)
            .sum();
        lhs - self.t_hat.powi(p as i32 + 1) / (p + 1) as f64
    }
}

const SUP_SAMPLES: usize = 2000;

fn sup_norm(coeffs: &[f64]) -> f64 {
    (0..=SUP_SAMPLES)
        .map(|i| {
            let s = i as f64 / SUP_SAMPLES as f64;
            coeffs.iter().rev().fold(0.0, |acc, c| acc * s + c).abs()
        })
        .fold(0.0, f64::max)
}

fn check_t_hat(t_hat: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t_hat) {
        return Err(Error::invalid(format!("cut fraction must lie in [0, 1] (got {t_hat})")));
    }
    Ok(())
}

/// Solve the moment system for the monomial coefficients directly.
pub fn discrete_characteristic(k: usize, t_hat: f64) -> Result<CharacteristicPoly> {
    check_t_hat(t_hat)?;
    let mut coefficients = vec![0.0; k + 1];
    coefficients[0] = 1.0;
    if k > 0 {
        // Σ_{m≥1} a_m / (m+p+1) = (t̂^{p+1} − 1)/(p+1),  p = 0..k−1
        let a = DenseMatrix::from_fn(k, k, |p, m| 1.0 / (m + p + 2) as f64);
        let b: Vec<f64> = (0..k)
            .map(|p| (t_hat.powi(p as i32 + 1) - 1.0) / (p + 1) as f64)
            .collect();
        let x = a.solve(&b)?;
        coefficients[1..].copy_from_slice(&x);
    }
    Ok(CharacteristicPoly {
        degree_k: k,
        t_hat,
        sup_norm_estimate: sup_norm(&coefficients),
        coefficients,
    })
}

/// Monomial coefficients of the shifted Legendre polynomials `q_m(s) = P_m(2s − 1)`, `m < n`.
fn shifted_legendre_monomials(n: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(n);
    for m in 0..n {
        let mut c = vec![0.0; n.max(1)];
        match m {
            0 => c[0] = 1.0,
            1 => {
                c[0] = -1.0;
                c[1] = 2.0;
            }
            _ => {
                // m q_m = (2m − 1)(2s − 1) q_{m−1} − (m − 1) q_{m−2}
                let (a, b) = (&out[m - 1], &out[m - 2]);
                let mf = m as f64;
                for d in 0..n {
                    let mut v = -(2.0 * mf - 1.0) * a[d] - (mf - 1.0) * b[d];
                    if d > 0 {
                        v += 2.0 * (2.0 * mf - 1.0) * a[d - 1];
                    }
                    c[d] = v / mf;
                }
            }
        }
        out.push(c);
    }
    out
}

/// Weighted inner product `∫₀¹ s p q` of coefficient vectors in the shifted Legendre basis.
fn weighted_inner(p: &[f64], q: &[f64]) -> f64 {
    let n = p.len().max(q.len());
    let (x, w) = gauss_legendre(n + 1);
    let eval = |c: &[f64], s: f64| -> f64 {
        c.iter()
            .enumerate()
            .map(|(m, a)| a * crate::quadrature::legendre(m, 2.0 * s - 1.0).0)
            .sum()
    };
    x.iter().zip(&w).map(|(&s, wq)| wq * s * eval(p, s) * eval(q, s)).sum()
}

/// Orthonormal basis of `P_{k−1}` in `L²_w(0,1)`, `w(s) = s`, as shifted Legendre coefficients.
/// Modified Gram-Schmidt with one reorthogonalization pass.
pub fn weighted_orthonormal_basis(k: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(k);
    for i in 0..k {
        let mut v = vec![0.0; k];
        v[i] = 1.0;
        for _ in 0..2 {
            for e in &basis {
                let c = weighted_inner(&v, e);
                v.iter_mut().zip(e).for_each(|(x, y)| *x -= c * y);
            }
        }
        let n = weighted_inner(&v, &v).sqrt();
        v.iter_mut().for_each(|x| *x /= n);
        basis.push(v);
    }
    basis
}

/// `ρ(s) = 1 + s Σ c_i p̂_i(s)` with `c_i = −∫_t̂¹ p̂_i`, `p̂_i` the weighted orthonormal basis.
pub fn discrete_characteristic_explicit(k: usize, t_hat: f64) -> Result<CharacteristicPoly> {
    check_t_hat(t_hat)?;
    let basis = weighted_orthonormal_basis(k);
    let legendre_mono = shifted_legendre_monomials(k);
    // ∫_t̂¹ q_m = (δ_{m0} − ∫₀^t̂ q_m), integrated exactly by Gauss on [0, t̂]
    let (cs, cw) = gauss_legendre_on(k.max(1), 0.0, t_hat);
    let tail: Vec<f64> = (0..k)
        .map(|m| {
            let head: f64 = cs
                .iter()
                .zip(&cw)
                .map(|(&s, w)| w * crate::quadrature::legendre(m, 2.0 * s - 1.0).0)
                .sum();
            if m == 0 { 1.0 - head } else { -head }
        })
        .collect();
    let mut coefficients = vec![0.0; k + 1];
    coefficients[0] = 1.0;
    for p in &basis {
        let c: f64 = -p.iter().zip(&tail).map(|(a, b)| a * b).sum::<f64>();
        for (m, a) in p.iter().enumerate() {
            for (d, qd) in legendre_mono[m].iter().enumerate() {
                coefficients[d + 1] += c * a * qd;
            }
        }
    }
    Ok(CharacteristicPoly {
        degree_k: k,
        t_hat,
        sup_norm_estimate: sup_norm(&coefficients),
        coefficients,
    })
}

/// Discrete cutoff of a slab polynomial `u = Σ χ_i U_i`: returns `ũ = Σ p̃_i U_i` in the nodal basis,
/// where `p̃_i(0) = χ_i(0)` and `∫₀¹ p̃_i q = ∫₀^t̂ χ_i q` for `q ∈ P_{k−1}`.
pub fn characteristic_apply(basis: &TimeBasis, u_slab: &[Vec<f64>], t_hat: f64) -> Result<Vec<Vec<f64>>> {
    check_t_hat(t_hat)?;
    let k = basis.degree();
    if u_slab.len() != k + 1 {
        return Err(Error::invalid(format!(
            "slab has {} coefficient vectors, basis degree {k} needs {}",
            u_slab.len(),
            k + 1
        )));
    }
    let c = characteristic_matrix(basis, t_hat)?;
    // ũ_j = Σ_i C_ij U_i
    let n = u_slab[0].len();
    let mut out = vec![vec![0.0; n]; k + 1];
    for (j, oj) in out.iter_mut().enumerate() {
        for (i, ui) in u_slab.iter().enumerate() {
            let w = c[(i, j)];
            if w != 0.0 {
                oj.iter_mut().zip(ui).for_each(|(o, x)| *o += w * x);
            }
        }
    }
    Ok(out)
}

/// `C` with `p̃_i = Σ_j C_ij χ_j`.
pub fn characteristic_matrix(basis: &TimeBasis, t_hat: f64) -> Result<DenseMatrix> {
    let k = basis.degree();
    let np = k + 1;
    // moments against shifted Legendre polynomials q_m(s) = P_m(2s − 1)
    let q = |m: usize, s: f64| crate::quadrature::legendre(m, 2.0 * s - 1.0).0;
    let (fs, fw) = gauss_legendre(np + 1);
    let (cs, cw) = gauss_legendre_on(np + 1, 0.0, t_hat);
    let mut a = DenseMatrix::zeros(np, np);
    for j in 0..np {
        a[(0, j)] = basis.left_values()[j];
        for m in 1..np {
            a[(m, j)] = fs.iter().zip(&fw).map(|(&s, w)| w * basis.eval(j, s) * q(m - 1, s)).sum();
        }
    }
    let lu = a.lu()?;
    let mut c = DenseMatrix::zeros(np, np);
    for i in 0..np {
        let mut b = vec![0.0; np];
        b[0] = basis.left_values()[i];
        for m in 1..np {
            b[m] = cs.iter().zip(&cw).map(|(&s, w)| w * basis.eval(i, s) * q(m - 1, s)).sum();
        }
        let row = lu.solve(&b);
        for j in 0..np {
            c[(i, j)] = row[j];
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, Serialize)]
pub struct SupNormScan {
    pub degree_k: usize,
    pub t_hats: Vec<f64>,
    pub sup_norms: Vec<f64>,
    /// Empirical `C_k = max_t̂ ‖ρ(·; t̂)‖_∞`.
    pub c_k: f64,
}

impl SupNormScan {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "k,t_hat,sup_norm")?;
        for (t, s) in self.t_hats.iter().zip(&self.sup_norms) {
            writeln!(w, "{},{:.17e},{:.17e}", self.degree_k, t, s)?;
        }
        Ok(())
    }
}

/// Tabulate `‖ρ(·; t̂)‖_∞` for `t̂` on a uniform grid of `grid + 1` points in `[0, 1]`.
pub fn sup_norm_scan(k: usize, grid: usize) -> Result<SupNormScan> {
    if grid < 2 {
        return Err(Error::invalid("sup-norm scan needs a grid of at least 2"));
    }
    let mut t_hats = Vec::with_capacity(grid + 1);
    let mut sup_norms = Vec::with_capacity(grid + 1);
    for i in 0..=grid {
        let t = i as f64 / grid as f64;
        let rho = discrete_characteristic(k, t)?;
        t_hats.push(t);
        sup_norms.push(rho.sup_norm_estimate);
    }
    let c_k = sup_norms.iter().cloned().fold(0.0, f64::max);
    Ok(SupNormScan {
        degree_k: k,
        t_hats,
        sup_norms,
        c_k,
    })
}
