//! Auxiliary discrete problems: the backward dual problem, the backward linearized problem,
//! the parabolic projection and the slab-local space-time projection.

pub mod dual;
pub mod projection;
pub mod psi;

pub use dual::{dual_stability, duality_identity_residual, duality_identity_report, solve_backward_dual, DualStability};
pub use projection::{local_projection, local_projection_solution, parabolic_orthogonality_residual, solve_parabolic_projection};
pub use psi::{psi_stability_chain, solve_backward_psi, PsiChainSlab, PsiSolution, ReactionSource};

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::forward::{DgSolution, Direction, SlabSolution};
use crate::linalg::{solve_linear, BandedLu, CsrMatrix, LinearSolveConfig};
use crate::slab::SlabContext;
use crate::space::FeSpace;
use crate::time::basis::combine;
use crate::time::{TimeBasis, TimePartition};

/// Factored mass matrix for repeated `M x = b` solves.
pub struct MassSolver {
    mass: CsrMatrix,
    lu: BandedLu,
}

impl MassSolver {
    pub fn new(space: &FeSpace) -> Result<Self> {
        let mass = space.mass();
        let lu = BandedLu::factor(&mass)?;
        Ok(MassSolver { mass, lu })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = self.lu.solve(b);
        // one refinement step
        let r: Vec<f64> = b.iter().zip(self.mass.matvec(&x)).map(|(p, q)| p - q).collect();
        let dx = self.lu.solve(&r);
        x.iter_mut().zip(dx).for_each(|(a, d)| *a += d);
        x
    }
}

/// Sweep `n = N−1, …, 0` solving
/// `Σ_j Gᵀ_ij M Φ_j + τ Θ_ij A Φ_j + τ Σ_q w_q χ_i χ_j M[c_q] Φ_j = χ_i(1) M φ^{n+1}_{+} + b_i`
/// with `c = reaction(n)` at the time quadrature points of `basis` and `b = rhs(n)`.
pub(crate) fn backward_sweep(
    space: Arc<FeSpace>,
    partition: &TimePartition,
    basis: &TimeBasis,
    linear: &LinearSolveConfig,
    mut reaction: impl FnMut(usize) -> Result<Vec<Vec<f64>>>,
    mut rhs: impl FnMut(usize) -> Result<Vec<Vec<f64>>>,
) -> Result<DgSolution> {
    let ctx = SlabContext::new(space.clone(), basis.clone());
    let gt = ctx.ops.g.transpose();
    let nf = ctx.nf();
    let nt = ctx.nt();
    let n_slabs = partition.n_slabs();
    let terminal = vec![0.0; nf];
    let mut incoming = terminal.clone();
    let mut slabs: Vec<Option<SlabSolution>> = vec![None; n_slabs];
    for n in (0..n_slabs).rev() {
        let tau = partition.tau(n);
        let coef = reaction(n)?;
        let blocks = ctx.reaction_blocks(basis.quad_weights(), basis.values(), &coef);
        let mat = ctx.assemble(&gt, tau, Some((&blocks, tau)));
        let mut b = rhs(n)?;
        let minc = ctx.mass.matvec(&incoming);
        for (i, bi) in b.iter_mut().enumerate() {
            let c = basis.right_values()[i];
            bi.iter_mut().zip(&minc).for_each(|(o, x)| *o += c * x);
        }
        let x = solve_linear(&mat, &ctx.pack(&b), linear).map_err(|e| Error::Slab {
            slab: n,
            source: Box::new(e),
        })?;
        let coeffs = ctx.unpack(&x);
        debug_assert_eq!(coeffs.len(), nt);
        let s = SlabSolution::backward(n, basis, coeffs, incoming);
        incoming = s.outgoing.clone();
        slabs[n] = Some(s);
    }
    Ok(DgSolution {
        direction: Direction::Backward,
        partition: partition.clone(),
        basis: basis.clone(),
        space,
        slabs: slabs.into_iter().map(|s| s.expect("every slab solved")).collect(),
        initial: terminal,
    })
}

/// `τ Σ_j Θ_ij M V_j` for every test index `i`: the load of `∫ (v, w)` for `v` in the slab basis.
pub(crate) fn slab_l2_load(ctx: &SlabContext, tau: f64, v: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = ctx.apply_time_space(&ctx.ops.theta, &ctx.mass, v);
    out.iter_mut().flatten().for_each(|x| *x *= tau);
    out
}

/// Field values at the time quadrature points of `basis` and the spatial rule of the space.
pub(crate) fn slab_qp_values(sol: &DgSolution, n: usize, basis: &TimeBasis) -> Vec<Vec<f64>> {
    let space = &sol.space;
    basis
        .quad_points()
        .iter()
        .map(|&s| space.values_at(space.rule(), &combine(&sol.slabs[n].coefficients, &sol.basis.eval_all(s))))
        .collect()
}
