//! Sparse assembly targets, linear solvers and the generalized eigenvalue diagnostic.

pub mod banded;
pub mod dense;
pub mod eigen;
pub mod krylov;
pub mod sparse;

pub use banded::BandedLu;
pub use dense::{DenseLu, DenseMatrix};
pub use eigen::{smallest_generalized_eigenvalue, EigenConfig, EigenMethod, EigenPair};
pub use sparse::{dot, norm2, CsrMatrix, TripletBuilder};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearMethod {
    ConjugateGradient,
    Bicgstab,
    DenseLu,
    /// Band LU with partial pivoting; the default for slab systems, whose
    /// dof-interleaved ordering keeps the bandwidth small.
    BandedLu,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearSolveConfig {
    pub method: LinearMethod,
    pub rel_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for LinearSolveConfig {
    fn default() -> Self {
        Self {
            method: LinearMethod::BandedLu,
            rel_tolerance: 1e-13,
            max_iterations: 5000,
        }
    }
}

impl LinearSolveConfig {
    pub fn new(method: LinearMethod, rel_tolerance: f64, max_iterations: usize) -> Result<Self> {
        let cfg = Self {
            method,
            rel_tolerance,
            max_iterations,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tolerance > 0.0) {
            return Err(Error::invalid("rel_tolerance must be positive"));
        }
        Ok(())
    }
}

/// Solve `A x = b`. On success `‖Ax − b‖ ≤ rel_tolerance ‖b‖`; `b = 0` gives `x = 0`.
pub fn solve_linear(a: &CsrMatrix, b: &[f64], cfg: &LinearSolveConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    if a.rows() != a.cols() || a.rows() != b.len() {
        return Err(Error::invalid(format!(
            "dimension mismatch: {}x{} matrix, rhs of length {}",
            a.rows(),
            a.cols(),
            b.len()
        )));
    }
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok(vec![0.0; b.len()]);
    }
    match cfg.method {
        LinearMethod::ConjugateGradient => {
            krylov::conjugate_gradient(a, b, cfg.rel_tolerance, cfg.max_iterations)
        }
        LinearMethod::Bicgstab => krylov::bicgstab(a, b, cfg.rel_tolerance, cfg.max_iterations),
        LinearMethod::DenseLu => {
            let lu = DenseMatrix::from_rows(&a.to_dense()).lu()?;
            refine(a, b, cfg, "dense_lu", |r| lu.solve(r))
        }
        LinearMethod::BandedLu => {
            let lu = BandedLu::factor(a)?;
            refine(a, b, cfg, "banded_lu", |r| lu.solve(r))
        }
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Direct solve followed by a few steps of iterative refinement. Accepts either
/// `‖r‖ ≤ tol ‖b‖` or a normwise backward error `‖r‖∞ / (‖A‖∞‖x‖∞ + ‖b‖∞) ≤ tol`; the second
/// is what a backward-stable factorization can promise on ill-conditioned systems.
fn refine(
    a: &CsrMatrix,
    b: &[f64],
    cfg: &LinearSolveConfig,
    method: &'static str,
    solve: impl Fn(&[f64]) -> Vec<f64>,
) -> Result<Vec<f64>> {
    let bnorm = norm2(b);
    let mut x = solve(b);
    let mut res = f64::INFINITY;
    for _ in 0..3 {
        let ax = a.matvec(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
        res = norm2(&r) / bnorm;
        if !res.is_finite() {
            return Err(Error::NonFinite(method));
        }
        if res <= cfg.rel_tolerance {
            return Ok(x);
        }
        let dx = solve(&r);
        x.iter_mut().zip(&dx).for_each(|(xi, d)| *xi += d);
    }
    let final_res = krylov::residual_norm(a, &x, b) / bnorm;
    let r: Vec<f64> = b.iter().zip(a.matvec(&x)).map(|(p, q)| p - q).collect();
    let backward = inf_norm(&r) / (a.norm_inf() * inf_norm(&x) + inf_norm(b));
    if final_res <= cfg.rel_tolerance || backward <= cfg.rel_tolerance {
        Ok(x)
    } else {
        Err(Error::LinearNonConvergence {
            method,
            iterations: 3,
            residual: final_res.min(res),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize, h: f64) -> CsrMatrix {
        let mut b = TripletBuilder::new(n, n);
        for i in 0..n {
            b.push(i, i, 2.0 / h);
            if i > 0 {
                b.push(i, i - 1, -1.0 / h);
            }
            if i + 1 < n {
                b.push(i, i + 1, -1.0 / h);
            }
        }
        b.build()
    }

    #[test]
    fn identity_returns_rhs() {
        let a = CsrMatrix::identity(5);
        let b = vec![1.0, -2.0, 3.0, 0.5, 7.0];
        for method in [
            LinearMethod::ConjugateGradient,
            LinearMethod::Bicgstab,
            LinearMethod::DenseLu,
            LinearMethod::BandedLu,
        ] {
            let cfg = LinearSolveConfig::new(method, 1e-12, 100).unwrap();
            let x = solve_linear(&a, &b, &cfg).unwrap();
            assert_eq!(x, b);
        }
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let a = tridiag(3, 0.25);
        let x = solve_linear(&a, &[0.0; 3], &LinearSolveConfig::default()).unwrap();
        assert_eq!(x, vec![0.0; 3]);
    }

    #[test]
    fn stiffness_system_matches_hand_dense_lu() {
        // (1/h) tridiag(-1, 2, -1), h = 1/4, b = e_1; inverse of tridiag(2,-1) times h.
        let h = 0.25;
        let a = tridiag(3, h);
        let expected = [0.75 * h, 0.5 * h, 0.25 * h];
        for method in [
            LinearMethod::ConjugateGradient,
            LinearMethod::Bicgstab,
            LinearMethod::DenseLu,
            LinearMethod::BandedLu,
        ] {
            let cfg = LinearSolveConfig::new(method, 1e-14, 100).unwrap();
            let x = solve_linear(&a, &[1.0, 0.0, 0.0], &cfg).unwrap();
            for (p, q) in x.iter().zip(expected) {
                assert!((p - q).abs() < 1e-12, "{method:?}");
            }
        }
    }

    #[test]
    fn non_convergence_reports_residual() {
        let a = tridiag(200, 1.0);
        let b = vec![1.0; 200];
        let cfg = LinearSolveConfig::new(LinearMethod::ConjugateGradient, 1e-14, 3).unwrap();
        match solve_linear(&a, &b, &cfg) {
            Err(Error::LinearNonConvergence { residual, .. }) => assert!(residual > 1e-14),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert!(LinearSolveConfig::new(LinearMethod::Bicgstab, 0.0, 10).is_err());
    }
}
