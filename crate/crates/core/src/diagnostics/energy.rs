use serde::Serialize;

use super::IdentityReport;
use crate::error::{Error, Result};
use crate::forward::{DgSolution, Direction};
use crate::problem::ProblemSpec;
use crate::slab::SlabContext;
use crate::space::FeSpace;
use crate::time::basis::combine;
use crate::time::TimeBasis;

/// `E(v) = ½ a(v, v) + (1/4ε²) ∫ (v² − 1)²`, with the spatial rule of the space (exact for degree `4l`).
pub fn discrete_energy(space: &FeSpace, stiffness: &crate::linalg::CsrMatrix, v: &[f64], epsilon: f64) -> f64 {
    let rule = space.rule();
    let vals = space.values_at(rule, v);
    let wts = space.weights_at(rule);
    let pot: f64 = vals.iter().zip(&wts).map(|(x, w)| w * (x * x - 1.0).powi(2)).sum();
    0.5 * stiffness.bilinear(v, v) + pot / (4.0 * epsilon * epsilon)
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergySlab {
    pub slab: usize,
    /// `E(u^{n+1}_{−})`
    pub energy_right: f64,
    /// `∫_slab E(u_h) dt`
    pub energy_integral: f64,
    /// `∫_slab (t − t_n) ‖∂_t u_h‖² dt`
    pub dissipation: f64,
    /// `|τ E(u^{n+1}_{−}) − ∫ E + ∫ (t − t_n)‖u_t‖²|`
    pub residual: f64,
    /// `1e−10 (1 + τ E(u^{n+1}_{−}))`
    pub threshold: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyTrace {
    pub slabs: Vec<EnergySlab>,
}

impl EnergyTrace {
    /// Largest `residual / (1 + τ E(u^{n+1}_{−}))` over the slabs.
    pub fn max_scaled_residual(&self) -> f64 {
        self.slabs.iter().map(|s| s.residual * 1e-10 / s.threshold).fold(0.0, f64::max)
    }

    pub fn holds(&self) -> bool {
        self.slabs.iter().all(|s| s.residual <= s.threshold)
    }
}

fn check_energy_config(sol: &DgSolution, problem: &ProblemSpec) -> Result<()> {
    if sol.direction != Direction::Forward {
        return Err(Error::invalid("energy identity needs a forward solution"));
    }
    if sol.basis.degree() == 0 {
        return Err(Error::Unsupported("energy identity needs k ≥ 1 (the test function (t − tⁿ) u_t vanishes for k = 0)".into()));
    }
    if problem.has_forcing() {
        return Err(Error::Unsupported("energy identity holds for f = 0 only".into()));
    }
    Ok(())
}

fn energy_slab(sol: &DgSolution, ctx: &SlabContext, n: usize, epsilon: f64) -> EnergySlab {
    let basis = &ctx.basis;
    let tau = sol.partition.tau(n);
    let coeffs = &sol.slabs[n].coefficients;
    let energy_right = discrete_energy(&sol.space, &ctx.stiffness, &sol.slabs[n].outgoing, epsilon);
    let mut energy_integral = 0.0;
    let mut dissipation = 0.0;
    for (&s, &w) in basis.quad_points().iter().zip(basis.quad_weights()) {
        let v = combine(coeffs, &sol.basis.eval_all(s));
        let dv = combine(coeffs, &sol.basis.deriv_all(s));
        energy_integral += tau * w * discrete_energy(&sol.space, &ctx.stiffness, &v, epsilon);
        // (t − tⁿ)‖u_t‖² dt = s ‖U'(s)‖² ds
        dissipation += w * s * ctx.mass.bilinear(&dv, &dv);
    }
    let residual = (tau * energy_right - energy_integral + dissipation).abs();
    EnergySlab {
        slab: n,
        energy_right,
        energy_integral,
        dissipation,
        residual,
        threshold: 1e-10 * (1.0 + tau * energy_right),
    }
}

/// Absolute residual of `τ E(u^{n+1}_{−}) − ∫_slab E(u_h) + ∫_slab (t − t_n)‖∂_t u_h‖²` on slab `n`.
pub fn energy_identity(sol: &DgSolution, problem: &ProblemSpec, n: usize) -> Result<f64> {
    check_energy_config(sol, problem)?;
    if n >= sol.n_slabs() {
        return Err(Error::invalid(format!("slab {n} out of range")));
    }
    let ctx = SlabContext::new(sol.space.clone(), TimeBasis::new(sol.basis.degree()));
    Ok(energy_slab(sol, &ctx, n, problem.epsilon).residual)
}

pub fn energy_trace(sol: &DgSolution, problem: &ProblemSpec) -> Result<EnergyTrace> {
    check_energy_config(sol, problem)?;
    let ctx = SlabContext::new(sol.space.clone(), TimeBasis::new(sol.basis.degree()));
    Ok(EnergyTrace {
        slabs: (0..sol.n_slabs()).map(|n| energy_slab(sol, &ctx, n, problem.epsilon)).collect(),
    })
}

/// Per-slab balance from testing with `u_h` itself:
/// `½‖u^{n+1}_{−}‖² − ½‖u^n_{−}‖² + ½‖[u^n]‖² + ∫ a(u,u) + ε⁻² ∫ (‖u‖⁴_{L⁴} − ‖u‖²) = ∫ ⟨f, u⟩`.
///
/// The nonlinear and forcing terms use the time rule of the solve, so the balance is exact
/// algebra for the computed solution.
pub fn stability_balance(sol: &DgSolution, problem: &ProblemSpec) -> Result<Vec<IdentityReport>> {
    if sol.direction != Direction::Forward {
        return Err(Error::invalid("stability balance needs a forward solution"));
    }
    let space = &sol.space;
    let basis = &sol.basis;
    let ctx = SlabContext::new(space.clone(), basis.clone());
    let rule = space.rule();
    let wts = space.weights_at(rule);
    let inv = 1.0 / (problem.epsilon * problem.epsilon);
    let mut out = Vec::with_capacity(sol.n_slabs());
    for n in 0..sol.n_slabs() {
        let s = &sol.slabs[n];
        let (t0, tau) = (sol.partition.start(n), sol.partition.tau(n));
        let m = &ctx.mass;
        let mut lhs = 0.5 * m.bilinear(&s.outgoing, &s.outgoing) - 0.5 * m.bilinear(&s.incoming, &s.incoming)
            + 0.5 * m.bilinear(&s.jump, &s.jump);
        // ∫ a(u, u) is exact with the operator Θ
        let au = ctx.apply_time_space(&ctx.ops.theta, &ctx.stiffness, &s.coefficients);
        for (c, a) in s.coefficients.iter().zip(&au) {
            lhs += tau * c.iter().zip(a).map(|(x, y)| x * y).sum::<f64>();
        }
        let mut rhs = 0.0;
        for (q, (&sq, &w)) in basis.quad_points().iter().zip(basis.quad_weights()).enumerate() {
            let v = combine(&s.coefficients, &basis.values()[q]);
            let vals = space.values_at(rule, &v);
            let nl: f64 = vals.iter().zip(&wts).map(|(x, ww)| ww * (x.powi(4) - x * x)).sum();
            lhs += tau * w * inv * nl;
            if let Some(f) = problem.load_at(space, rule, t0 + tau * sq)? {
                rhs += tau * w * f.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>();
            }
        }
        out.push(IdentityReport::new(format!("stability_slab_{n}"), lhs, rhs));
    }
    Ok(out)
}
