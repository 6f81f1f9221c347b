use serde::Serialize;

use crate::error::{Error, Result};
use crate::forward::DgSolution;
use crate::linalg::eigen::{smallest_generalized_eigenvalue_with, EigenConfig};
use crate::linalg::CsrMatrix;
use crate::mesh::Point;
use crate::space::FeSpace;

pub const DIRICHLET_NOTE: &str =
    "lambda_min is the Rayleigh quotient minimum over the Dirichlet-constrained discrete space, not over H1";

/// The field whose linearization is examined.
pub enum SpectrumSource<'a> {
    Solution(&'a DgSolution),
    Function(&'a dyn Fn(f64, Point) -> f64),
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumTrace {
    pub epsilon: f64,
    pub times: Vec<f64>,
    pub lambda_min: Vec<f64>,
    pub eigen_residuals: Vec<f64>,
    /// `max(0, −min_t λ_min(t))`
    pub c_s: f64,
    pub note: String,
}

/// `A_t = A + ε⁻² M[3u² − 1]` for `u` given at the quadrature points of the space.
pub fn linearized_operator(space: &FeSpace, stiffness: &CsrMatrix, u_qp: &[f64], epsilon: f64) -> CsrMatrix {
    let inv = 1.0 / (epsilon * epsilon);
    let coef: Vec<f64> = u_qp.iter().map(|v| inv * (3.0 * v * v - 1.0)).collect();
    let mut a = space.weighted_mass(&coef);
    a.add_scaled_same_pattern(1.0, stiffness);
    a
}

/// `λ_min(A_t, M)` at each sample time.
pub fn spectrum_along_solution(
    source: SpectrumSource<'_>,
    space: &FeSpace,
    times: &[f64],
    epsilon: f64,
    cfg: &EigenConfig,
) -> Result<SpectrumTrace> {
    if !(epsilon > 0.0) {
        return Err(Error::invalid("epsilon must be positive"));
    }
    if let SpectrumSource::Solution(u) = &source {
        if u.space.free_count() != space.free_count() {
            return Err(Error::invalid("solution lives on a different space"));
        }
        let (a, b) = (u.partition.initial_time(), u.partition.final_time());
        if let Some(t) = times.iter().find(|&&t| t < a || t > b) {
            return Err(Error::invalid(format!("sample time {t} outside [{a}, {b}]")));
        }
    }
    let rule = space.rule();
    let pts = space.points_at(rule);
    let mass = space.mass();
    let stiffness = space.stiffness();
    let mut lambda_min = Vec::with_capacity(times.len());
    let mut eigen_residuals = Vec::with_capacity(times.len());
    let mut guess = 0.0;
    for &t in times {
        let uq = match &source {
            SpectrumSource::Solution(u) => space.values_at(rule, &u.value_at_time(t)),
            SpectrumSource::Function(f) => pts.iter().map(|&x| f(t, x)).collect(),
        };
        let a = linearized_operator(space, &stiffness, &uq, epsilon);
        let pair = smallest_generalized_eigenvalue_with(&a, &mass, guess, 1e-10, cfg)?;
        guess = pair.value;
        lambda_min.push(pair.value);
        eigen_residuals.push(pair.residual);
    }
    let c_s = lambda_min.iter().fold(0.0f64, |m, &l| m.max(-l));
    Ok(SpectrumTrace {
        epsilon,
        times: times.to_vec(),
        lambda_min,
        eigen_residuals,
        c_s,
        note: DIRICHLET_NOTE.to_string(),
    })
}
