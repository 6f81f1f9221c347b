use serde::Serialize;

use super::{backward_sweep, slab_l2_load, slab_qp_values};
use crate::diagnostics::IdentityReport;
use crate::error::{Error, Result};
use crate::forward::{DgSolution, Direction};
use crate::linalg::LinearSolveConfig;
use crate::problem::ProblemSpec;
use crate::slab::SlabContext;
use crate::time::basis::combine;
use crate::time::TimeBasis;

/// Backward dual problem driven by `u_h`, with reaction `ε⁻²(u_h² + 1)` and terminal data zero.
///
/// The time rule is always exact (`2k + 2` Gauss points), independent of the rule used for `u_h`.
pub fn solve_backward_dual(u_h: &DgSolution, problem: &ProblemSpec) -> Result<DgSolution> {
    solve_backward_dual_with(u_h, problem, &LinearSolveConfig::default())
}

pub fn solve_backward_dual_with(u_h: &DgSolution, problem: &ProblemSpec, linear: &LinearSolveConfig) -> Result<DgSolution> {
    if u_h.direction != Direction::Forward {
        return Err(Error::invalid("the dual problem is driven by a forward solution"));
    }
    problem.validate()?;
    let basis = TimeBasis::new(u_h.basis.degree());
    let ctx = SlabContext::new(u_h.space.clone(), basis.clone());
    let inv = 1.0 / (problem.epsilon * problem.epsilon);
    backward_sweep(
        u_h.space.clone(),
        &u_h.partition,
        &basis,
        linear,
        |n| {
            Ok(slab_qp_values(u_h, n, &basis)
                .into_iter()
                .map(|vq| vq.into_iter().map(|v| inv * (v * v + 1.0)).collect())
                .collect())
        },
        |n| Ok(slab_l2_load(&ctx, u_h.partition.tau(n), &u_h.slabs[n].coefficients)),
    )
}

/// `∫₀ᵀ (v, w)` for two solutions on the same discretization.
pub(crate) fn space_time_inner(ctx: &SlabContext, v: &DgSolution, w: &DgSolution) -> f64 {
    let mut total = 0.0;
    for n in 0..v.n_slabs() {
        let tau = v.partition.tau(n);
        let load = slab_l2_load(ctx, tau, &w.slabs[n].coefficients);
        for (vi, li) in v.slabs[n].coefficients.iter().zip(&load) {
            total += vi.iter().zip(li).map(|(a, b)| a * b).sum::<f64>();
        }
    }
    total
}

/// Both sides of `∫‖u_h‖² = (2/ε²)∫(φ_h, u_h) + ∫⟨f, φ_h⟩ + (u⁰, φ⁰_{+})`.
pub fn duality_identity_report(u_h: &DgSolution, phi: &DgSolution, problem: &ProblemSpec) -> Result<IdentityReport> {
    if phi.direction != Direction::Backward || phi.n_slabs() != u_h.n_slabs() {
        return Err(Error::invalid("dual solution does not match the forward solution"));
    }
    let ctx = SlabContext::new(u_h.space.clone(), TimeBasis::new(u_h.basis.degree()));
    let lhs = space_time_inner(&ctx, u_h, u_h);
    let inv = 1.0 / (problem.epsilon * problem.epsilon);
    let coupling = 2.0 * inv * space_time_inner(&ctx, phi, u_h);
    // forcing with the time rule of the forward solve
    let mut forcing = 0.0;
    if problem.has_forcing() {
        let fb = &u_h.basis;
        for n in 0..u_h.n_slabs() {
            let (t0, tau) = (u_h.partition.start(n), u_h.partition.tau(n));
            for (q, (&s, &w)) in fb.quad_points().iter().zip(fb.quad_weights()).enumerate() {
                let Some(f) = problem.load_at(&u_h.space, u_h.space.rule(), t0 + tau * s)? else {
                    continue;
                };
                let ph = combine(&phi.slabs[n].coefficients, &fb.values()[q]);
                forcing += tau * w * f.iter().zip(&ph).map(|(a, b)| a * b).sum::<f64>();
            }
        }
    }
    let initial = ctx.mass.bilinear(&u_h.initial, &phi.slabs[0].outgoing);
    let rhs = coupling + forcing + initial;
    Ok(IdentityReport::new("duality", lhs, rhs))
}

/// `|LHS − RHS| / (|LHS| + |RHS| + 1)` of the duality identity.
pub fn duality_identity_residual(u_h: &DgSolution, phi: &DgSolution, problem: &ProblemSpec) -> Result<f64> {
    Ok(duality_identity_report(u_h, phi, problem)?.residual)
}

/// Terms of the energy balance obtained by testing the dual problem with `φ_h`.
#[derive(Debug, Clone, Serialize)]
pub struct DualStability {
    /// `‖φ⁰_{+}‖²`
    pub phi0_sq: f64,
    /// `Σ_n ‖[φⁿ]‖²`
    pub jump_sq: f64,
    /// `‖∇φ_h‖²_{L²L²}`
    pub grad_sq: f64,
    /// `ε⁻² ‖u_h φ_h‖²_{L²L²}`
    pub weighted_sq: f64,
    /// `‖φ_h‖²_{L²L²}`
    pub phi_sq: f64,
    /// `‖u_h‖²_{L²L²}`
    pub u_sq: f64,
    /// `∫ (u_h, φ_h)`
    pub coupling: f64,
    /// relative defect of the exact balance
    /// `½‖φ⁰‖² + ½Σ‖[φ]‖² + ‖∇φ‖² + ε⁻²‖uφ‖² + ε⁻²‖φ‖² = ∫(u, φ)`
    pub balance_residual: f64,
    /// `(ε²/2)‖u‖² − (½‖φ⁰‖² + ‖∇φ‖² + ε⁻²‖uφ‖² + (1/2ε²)‖φ‖²)`, non-negative by Young's inequality
    pub slack: f64,
    /// the same slack with coefficient one on `‖φ⁰_{+}‖²`
    pub slack_unit_initial: f64,
}

pub fn dual_stability(u_h: &DgSolution, phi: &DgSolution, problem: &ProblemSpec) -> Result<DualStability> {
    let basis = TimeBasis::new(u_h.basis.degree());
    let ctx = SlabContext::new(u_h.space.clone(), basis.clone());
    let space = &u_h.space;
    let inv = 1.0 / (problem.epsilon * problem.epsilon);
    let phi0 = &phi.slabs[0].outgoing;
    let phi0_sq = ctx.mass.bilinear(phi0, phi0);
    let jump_sq: f64 = phi.slabs.iter().map(|s| ctx.mass.bilinear(&s.jump, &s.jump)).sum();
    let mut grad_sq = 0.0;
    let mut weighted_sq = 0.0;
    let weights = space.weights_at(space.rule());
    for n in 0..phi.n_slabs() {
        let tau = phi.partition.tau(n);
        let a_load = ctx.apply_time_space(&ctx.ops.theta, &ctx.stiffness, &phi.slabs[n].coefficients);
        for (pi, li) in phi.slabs[n].coefficients.iter().zip(&a_load) {
            grad_sq += tau * pi.iter().zip(li).map(|(a, b)| a * b).sum::<f64>();
        }
        let uq = slab_qp_values(u_h, n, &basis);
        let pq = slab_qp_values(phi, n, &basis);
        for q in 0..basis.n_quad() {
            let s: f64 = (0..weights.len())
                .map(|x| weights[x] * uq[q][x] * uq[q][x] * pq[q][x] * pq[q][x])
                .sum();
            weighted_sq += tau * basis.quad_weights()[q] * inv * s;
        }
    }
    let phi_sq = space_time_inner(&ctx, phi, phi);
    let u_sq = space_time_inner(&ctx, u_h, u_h);
    let coupling = space_time_inner(&ctx, u_h, phi);
    let lhs = 0.5 * phi0_sq + 0.5 * jump_sq + grad_sq + weighted_sq + inv * phi_sq;
    let balance_residual = (lhs - coupling).abs() / (lhs.abs() + coupling.abs() + 1.0);
    let bound = 0.5 * u_sq / inv;
    let core = grad_sq + weighted_sq + 0.5 * inv * phi_sq;
    Ok(DualStability {
        phi0_sq,
        jump_sq,
        grad_sq,
        weighted_sq,
        phi_sq,
        u_sq,
        coupling,
        balance_residual,
        slack: bound - (0.5 * phi0_sq + core),
        slack_unit_initial: bound - (phi0_sq + core),
    })
}
