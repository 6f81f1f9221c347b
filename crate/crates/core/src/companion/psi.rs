use std::sync::Arc;

use serde::Serialize;

use super::{backward_sweep, slab_l2_load, slab_qp_values, MassSolver};
use crate::error::{Error, Result};
use crate::forward::{DgSolution, Direction};
use crate::linalg::eigen::{smallest_generalized_eigenvalue_with, EigenConfig};
use crate::linalg::LinearSolveConfig;
use crate::problem::{ExactSolution, ProblemSpec};
use crate::slab::SlabContext;
use crate::time::basis::combine;
use crate::time::TimeBasis;

/// Where the linearization point `u` of the reaction `ε⁻²(3u² − 1)` comes from.
#[derive(Clone)]
pub enum ReactionSource<'a> {
    Exact(Arc<dyn ExactSolution>),
    Discrete(&'a DgSolution),
}

impl ReactionSource<'_> {
    /// `u` at the spatial quadrature points for each time point of `basis` on slab `n`.
    pub(crate) fn values(&self, target: &DgSolution, n: usize, basis: &TimeBasis) -> Vec<Vec<f64>> {
        match self {
            ReactionSource::Discrete(u) => slab_qp_values(u, n, basis),
            ReactionSource::Exact(u) => {
                let space = &target.space;
                let pts = space.points_at(space.rule());
                let (t0, tau) = (target.partition.start(n), target.partition.tau(n));
                basis
                    .quad_points()
                    .iter()
                    .map(|&s| pts.iter().map(|&x| u.value(t0 + tau * s, x)).collect())
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct PsiSolution {
    pub psi: DgSolution,
    /// `Δ_h ψ_h` per slab and time node, from `M d = A Ψ_j`.
    pub laplacian: Vec<Vec<Vec<f64>>>,
}

/// Backward linearized problem with reaction `ε⁻²(3u² − 1)`, right-hand side `e_h` and zero terminal data.
pub fn solve_backward_psi(rhs: &DgSolution, u_ref: ReactionSource<'_>, problem: &ProblemSpec) -> Result<PsiSolution> {
    solve_backward_psi_with(rhs, u_ref, problem, &LinearSolveConfig::default())
}

pub fn solve_backward_psi_with(
    rhs: &DgSolution,
    u_ref: ReactionSource<'_>,
    problem: &ProblemSpec,
    linear: &LinearSolveConfig,
) -> Result<PsiSolution> {
    problem.validate()?;
    if let ReactionSource::Discrete(u) = &u_ref {
        if u.n_slabs() != rhs.n_slabs() || u.space.free_count() != rhs.space.free_count() {
            return Err(Error::invalid("linearization point lives on a different discretization"));
        }
    }
    let basis = TimeBasis::new(rhs.basis.degree());
    let ctx = SlabContext::new(rhs.space.clone(), basis.clone());
    let inv = 1.0 / (problem.epsilon * problem.epsilon);
    let psi = backward_sweep(
        rhs.space.clone(),
        &rhs.partition,
        &basis,
        linear,
        |n| {
            Ok(u_ref
                .values(rhs, n, &basis)
                .into_iter()
                .map(|vq| vq.into_iter().map(|v| inv * (3.0 * v * v - 1.0)).collect())
                .collect())
        },
        |n| Ok(slab_l2_load(&ctx, rhs.partition.tau(n), &rhs.slabs[n].coefficients)),
    )?;
    let ms = MassSolver::new(&rhs.space)?;
    let laplacian = psi
        .slabs
        .iter()
        .map(|s| s.coefficients.iter().map(|c| ms.solve(&ctx.stiffness.matvec(c))).collect())
        .collect();
    Ok(PsiSolution { psi, laplacian })
}

/// One slab of the spectral stability chain
/// `½‖ψⁿ_{+}‖² − ½‖ψⁿ⁺¹_{+}‖² + ½‖[ψⁿ⁺¹]‖² + τ Σ_q w_q λ_min(t_q) ‖ψ(t_q)‖² ≤ ∫ (e_h, ψ_h)`.
#[derive(Debug, Clone, Serialize)]
pub struct PsiChainSlab {
    pub slab: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub lambda_min: Vec<f64>,
    pub holds: bool,
}

pub fn psi_stability_chain(
    sol: &PsiSolution,
    rhs: &DgSolution,
    u_ref: ReactionSource<'_>,
    problem: &ProblemSpec,
    tol: f64,
) -> Result<Vec<PsiChainSlab>> {
    let psi = &sol.psi;
    if psi.direction != Direction::Backward {
        return Err(Error::invalid("expected a backward solution"));
    }
    let basis = TimeBasis::new(psi.basis.degree());
    let ctx = SlabContext::new(psi.space.clone(), basis.clone());
    let space = &psi.space;
    let inv = 1.0 / (problem.epsilon * problem.epsilon);
    let eig_cfg = EigenConfig::default();
    let mut out = Vec::with_capacity(psi.n_slabs());
    for n in 0..psi.n_slabs() {
        let s = &psi.slabs[n];
        let tau = psi.partition.tau(n);
        let m = &ctx.mass;
        let mut lhs = 0.5 * m.bilinear(&s.outgoing, &s.outgoing) - 0.5 * m.bilinear(&s.incoming, &s.incoming)
            + 0.5 * m.bilinear(&s.jump, &s.jump);
        let uq = u_ref.values(psi, n, &basis);
        let mut lambdas = Vec::with_capacity(basis.n_quad());
        for q in 0..basis.n_quad() {
            let coef: Vec<f64> = uq[q].iter().map(|v| inv * (3.0 * v * v - 1.0)).collect();
            let mut a_t = space.weighted_mass(&coef);
            a_t.add_scaled_same_pattern(1.0, &ctx.stiffness);
            let pair = smallest_generalized_eigenvalue_with(&a_t, m, 0.0, 1e-10, &eig_cfg)?;
            let pv = combine(&s.coefficients, &basis.values()[q]);
            lhs += tau * basis.quad_weights()[q] * pair.value * m.bilinear(&pv, &pv);
            lambdas.push(pair.value);
        }
        let load = slab_l2_load(&ctx, tau, &rhs.slabs[n].coefficients);
        let rhs_val: f64 = s
            .coefficients
            .iter()
            .zip(&load)
            .map(|(p, l)| p.iter().zip(l).map(|(a, b)| a * b).sum::<f64>())
            .sum();
        out.push(PsiChainSlab {
            slab: n,
            lhs,
            rhs: rhs_val,
            lambda_min: lambdas,
            holds: lhs <= rhs_val + tol * (1.0 + lhs.abs() + rhs_val.abs()),
        });
    }
    Ok(out)
}
