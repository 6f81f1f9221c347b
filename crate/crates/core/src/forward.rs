//! The nonlinear forward dG(k)/P_l scheme, solved slab by slab with Newton's method.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{norm2, solve_linear, CsrMatrix, LinearSolveConfig};
use crate::problem::ProblemSpec;
use crate::slab::SlabContext;
use crate::space::FeSpace;
use crate::time::basis::combine;
use crate::time::{TimeBasis, TimePartition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Damping {
    None,
    /// Halve the step until the residual decreases, at most 8 times.
    Backtracking,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
    pub damping: Damping,
    pub linear: LinearSolveConfig,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_iter: 30,
            damping: Damping::Backtracking,
            linear: LinearSolveConfig::default(),
        }
    }
}

impl NewtonConfig {
    pub fn with_tolerances(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(Error::invalid("Newton tolerances must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("Newton needs at least one iteration"));
        }
        self.linear.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
}

/// Coefficients of one slab, `U[j][a]` for time node `j` and free dof `a`.
///
/// Forward problems: `incoming` is `u^{n}_{−}` from the left, `outgoing` the right trace and
/// `jump = u^{n}_{+} − u^{n}_{−}`. Backward problems: `incoming` is `φ^{n+1}_{+}` from the right,
/// `outgoing` the left trace `φ^{n}_{+}` and `jump = φ^{n+1}_{+} − φ^{n+1}_{−}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlabSolution {
    pub slab_index: usize,
    pub coefficients: Vec<Vec<f64>>,
    pub incoming: Vec<f64>,
    pub outgoing: Vec<f64>,
    pub jump: Vec<f64>,
    pub newton_history: Vec<f64>,
}

impl SlabSolution {
    pub(crate) fn forward(slab_index: usize, basis: &TimeBasis, coefficients: Vec<Vec<f64>>, incoming: Vec<f64>, history: Vec<f64>) -> Self {
        let outgoing = combine(&coefficients, basis.right_values());
        let left = combine(&coefficients, basis.left_values());
        let jump = left.iter().zip(&incoming).map(|(a, b)| a - b).collect();
        SlabSolution {
            slab_index,
            coefficients,
            incoming,
            outgoing,
            jump,
            newton_history: history,
        }
    }

    pub(crate) fn backward(slab_index: usize, basis: &TimeBasis, coefficients: Vec<Vec<f64>>, incoming: Vec<f64>) -> Self {
        let outgoing = combine(&coefficients, basis.left_values());
        let right = combine(&coefficients, basis.right_values());
        let jump = incoming.iter().zip(&right).map(|(a, b)| a - b).collect();
        SlabSolution {
            slab_index,
            coefficients,
            incoming,
            outgoing,
            jump,
            newton_history: Vec::new(),
        }
    }
}

/// A piecewise-polynomial-in-time, finite-element-in-space function.
#[derive(Debug, Clone)]
pub struct DgSolution {
    pub direction: Direction,
    pub partition: TimePartition,
    pub basis: TimeBasis,
    pub space: Arc<FeSpace>,
    pub slabs: Vec<SlabSolution>,
    /// `u⁰ = P_h u₀` for forward problems, the terminal datum for backward ones.
    pub initial: Vec<f64>,
}

impl DgSolution {
    pub fn n_slabs(&self) -> usize {
        self.slabs.len()
    }

    pub fn slab(&self, n: usize) -> &SlabSolution {
        &self.slabs[n]
    }

    /// Value at reference time `s ∈ [0, 1]` of slab `n` (the polynomial extended to the closed slab).
    pub fn value(&self, n: usize, s: f64) -> Vec<f64> {
        self.basis.evaluate(&self.slabs[n].coefficients, s)
    }

    /// Value at time `t`, left-continuous at partition points; `t = t⁰` gives `u⁰`.
    pub fn value_at_time(&self, t: f64) -> Vec<f64> {
        if t <= self.partition.initial_time() && self.direction == Direction::Forward {
            return self.initial.clone();
        }
        let n = self.partition.locate(t);
        let s = (t - self.partition.start(n)) / self.partition.tau(n);
        self.value(n, s.clamp(0.0, 1.0))
    }

    /// `u^{n+1}_{−}`, the right trace of slab `n`.
    pub fn right_trace(&self, n: usize) -> Vec<f64> {
        combine(&self.slabs[n].coefficients, self.basis.right_values())
    }

    /// `u^{n}_{+}`, the left trace of slab `n`.
    pub fn left_trace(&self, n: usize) -> Vec<f64> {
        combine(&self.slabs[n].coefficients, self.basis.left_values())
    }

    /// All coefficients, slab-major, for coefficient-wise comparisons.
    pub fn flat_coefficients(&self) -> Vec<f64> {
        self.slabs
            .iter()
            .flat_map(|s| s.coefficients.iter().flatten().copied())
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.flat_coefficients().iter().all(|v| v.is_finite())
    }
}

/// `P_h g`: solve `M c = (g, φ)`.
pub fn l2_project(space: &FeSpace, g: impl Fn(crate::mesh::Point) -> f64) -> Result<Vec<f64>> {
    let b = space.load(g)?;
    let cfg = LinearSolveConfig {
        rel_tolerance: 1e-14,
        ..LinearSolveConfig::default()
    };
    solve_linear(&space.mass(), &b, &cfg)
}

/// Precomputed data for the forward slab solves.
pub struct ForwardSolver {
    pub ctx: SlabContext,
    pub partition: TimePartition,
    pub problem: ProblemSpec,
    pub cfg: NewtonConfig,
}

impl ForwardSolver {
    pub fn new(
        problem: ProblemSpec,
        space: Arc<FeSpace>,
        partition: TimePartition,
        basis: TimeBasis,
        cfg: NewtonConfig,
    ) -> Result<Self> {
        problem.validate()?;
        cfg.validate()?;
        Ok(ForwardSolver {
            ctx: SlabContext::new(space, basis),
            partition,
            problem,
            cfg,
        })
    }

    fn inv_eps2(&self) -> f64 {
        1.0 / (self.problem.epsilon * self.problem.epsilon)
    }

    /// `τ Σ_q w_q χ_i(s_q) F(t_q)` for every test index `i`, or `None` for zero forcing.
    pub fn forcing_term(&self, n: usize) -> Result<Option<Vec<Vec<f64>>>> {
        if !self.problem.has_forcing() {
            return Ok(None);
        }
        let basis = &self.ctx.basis;
        let (t0, tau) = (self.partition.start(n), self.partition.tau(n));
        let nt = basis.n_nodes();
        let mut out = vec![vec![0.0; self.ctx.nf()]; nt];
        for (q, (&s, &w)) in basis.quad_points().iter().zip(basis.quad_weights()).enumerate() {
            let Some(f) = self.problem.load_at(&self.ctx.space, self.ctx.rule(), t0 + tau * s)? else {
                continue;
            };
            for (i, oi) in out.iter_mut().enumerate() {
                let c = tau * w * basis.values()[q][i];
                oi.iter_mut().zip(&f).for_each(|(o, x)| *o += c * x);
            }
        }
        Ok(Some(out))
    }

    /// Field values of the slab polynomial at every (time qp, space qp).
    fn values_at_qps(&self, u: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let basis = &self.ctx.basis;
        basis
            .values()
            .iter()
            .map(|chi| self.ctx.space.values_at(self.ctx.rule(), &combine(u, chi)))
            .collect()
    }

    fn residual(&self, n: usize, u: &[Vec<f64>], prev: &[f64], forcing: Option<&Vec<Vec<f64>>>) -> (Vec<f64>, Vec<Vec<f64>>) {
        let ctx = &self.ctx;
        let basis = &ctx.basis;
        let tau = self.partition.tau(n);
        let nt = ctx.nt();
        let mut r = ctx.apply_time_space(&ctx.ops.g, &ctx.mass, u);
        let au = ctx.apply_time_space(&ctx.ops.theta, &ctx.stiffness, u);
        let mprev = ctx.mass.matvec(prev);
        let vals = self.values_at_qps(u);
        let scale = tau * self.inv_eps2();
        for (q, vq) in vals.iter().enumerate() {
            let nl: Vec<f64> = vq.iter().map(|v| v * v * v - v).collect();
            let load = ctx.space.load_from_values(ctx.rule(), &nl);
            let w = basis.quad_weights()[q];
            for i in 0..nt {
                let c = scale * w * basis.values()[q][i];
                r[i].iter_mut().zip(&load).for_each(|(o, x)| *o += c * x);
            }
        }
        for i in 0..nt {
            let l = ctx.ops.left_load[i];
            for a in 0..ctx.nf() {
                r[i][a] += tau * au[i][a] - l * mprev[a];
                if let Some(f) = forcing {
                    r[i][a] -= f[i][a];
                }
            }
        }
        (ctx.pack(&r), vals)
    }

    fn jacobian(&self, n: usize, vals: &[Vec<f64>]) -> CsrMatrix {
        let ctx = &self.ctx;
        let tau = self.partition.tau(n);
        let coef: Vec<Vec<f64>> = vals
            .iter()
            .map(|vq| vq.iter().map(|v| 3.0 * v * v - 1.0).collect())
            .collect();
        let blocks = ctx.reaction_blocks(ctx.basis.quad_weights(), ctx.basis.values(), &coef);
        ctx.assemble(&ctx.ops.g, tau, Some((&blocks, tau * self.inv_eps2())))
    }

    /// Solve slab `n` given the incoming trace `u^{n}_{−}`.
    pub fn solve_slab(&self, prev: &[f64], n: usize) -> Result<SlabSolution> {
        let ctx = &self.ctx;
        if prev.len() != ctx.nf() {
            return Err(Error::invalid(format!(
                "incoming trace has length {}, expected {}",
                prev.len(),
                ctx.nf()
            )));
        }
        if prev.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("incoming trace"));
        }
        let forcing = self.forcing_term(n)?;
        let mut u: Vec<Vec<f64>> = vec![prev.to_vec(); ctx.nt()];
        let (mut r, mut vals) = self.residual(n, &u, prev, forcing.as_ref());
        let mut rn = norm2(&r);
        let target = self.cfg.abs_tol + self.cfg.rel_tol * rn;
        let mut history = vec![rn];
        let mut iter = 0;
        while rn > target {
            if iter == self.cfg.max_iter || !rn.is_finite() {
                return Err(Error::NewtonDivergence { slab: n, history });
            }
            iter += 1;
            let jac = self.jacobian(n, &vals);
            let neg: Vec<f64> = r.iter().map(|v| -v).collect();
            let delta = solve_linear(&jac, &neg, &self.cfg.linear)?;
            let x = ctx.pack(&u);
            let mut step = 1.0;
            let mut halvings = 0;
            loop {
                let trial: Vec<f64> = x.iter().zip(&delta).map(|(a, d)| a + step * d).collect();
                let tu = ctx.unpack(&trial);
                let (tr, tv) = self.residual(n, &tu, prev, forcing.as_ref());
                let tn = norm2(&tr);
                let accept = match self.cfg.damping {
                    Damping::None => true,
                    Damping::Backtracking => (tn.is_finite() && tn < rn) || tn <= target || halvings == 8,
                };
                if accept {
                    u = tu;
                    r = tr;
                    vals = tv;
                    rn = tn;
                    break;
                }
                step *= 0.5;
                halvings += 1;
            }
            history.push(rn);
        }
        Ok(SlabSolution::forward(n, &ctx.basis, u, prev.to_vec(), history))
    }

    pub fn solve(&self) -> Result<DgSolution> {
        let space = self.ctx.space.clone();
        let u0 = l2_project(&space, |x| (self.problem.initial)(x))?;
        let mut slabs = Vec::with_capacity(self.partition.n_slabs());
        let mut prev = u0.clone();
        for n in 0..self.partition.n_slabs() {
            let s = self.solve_slab(&prev, n).map_err(|e| match e {
                e @ Error::NewtonDivergence { .. } => e,
                e => Error::Slab {
                    slab: n,
                    source: Box::new(e),
                },
            })?;
            prev = s.outgoing.clone();
            slabs.push(s);
        }
        Ok(DgSolution {
            direction: Direction::Forward,
            partition: self.partition.clone(),
            basis: self.ctx.basis.clone(),
            space,
            slabs,
            initial: u0,
        })
    }
}

pub fn solve_forward(
    problem: &ProblemSpec,
    space: Arc<FeSpace>,
    partition: &TimePartition,
    basis: &TimeBasis,
    cfg: &NewtonConfig,
) -> Result<DgSolution> {
    ForwardSolver::new(problem.clone(), space, partition.clone(), basis.clone(), *cfg)?.solve()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_interval_mesh;
    use std::f64::consts::PI;

    fn space(n: usize, l: usize) -> Arc<FeSpace> {
        Arc::new(FeSpace::new(build_interval_mesh(0.0, 1.0, n).unwrap(), l).unwrap())
    }

    #[test]
    fn projection_of_one_is_orthogonal() {
        let s = space(8, 1);
        let c = l2_project(&s, |_| 1.0).unwrap();
        let r: Vec<f64> = s
            .load(|_| 1.0)
            .unwrap()
            .iter()
            .zip(s.mass().matvec(&c))
            .map(|(a, b)| a - b)
            .collect();
        assert!(r.iter().all(|v| v.abs() <= 1e-12));
    }

    #[test]
    fn projection_is_idempotent_on_space() {
        let s = space(6, 2);
        let v: Vec<f64> = (0..s.free_count()).map(|i| (i as f64 * 0.37).sin()).collect();
        let full = s.expand(&v);
        // evaluate the discrete function pointwise through its element
        let f = |x: crate::mesh::Point| {
            let e = ((x[0] * 6.0).floor() as usize).min(5);
            let g = s.geometry(e);
            let xi = (x[0] - g.origin[0]) / g.jac[0][0];
            let (phi, _) = crate::space::reference_basis(1, 2, [xi, 0.0]);
            s.element_dofs(e).iter().zip(&phi).map(|(&d, p)| full[d] * p).sum::<f64>()
        };
        let c = l2_project(&s, f).unwrap();
        for (a, b) in c.iter().zip(&v) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let p = ProblemSpec::zero(0.1, 1.0).unwrap();
        let part = TimePartition::uniform(1.0, 3).unwrap();
        let sol = solve_forward(&p, space(8, 1), &part, &TimeBasis::new(1), &NewtonConfig::default()).unwrap();
        assert!(sol.flat_coefficients().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn traces_chain_between_slabs() {
        let p = ProblemSpec::new(
            0.5,
            0.5,
            crate::problem::Forcing::Zero,
            Arc::new(|x| 0.1 * (PI * x[0]).sin()),
        )
        .unwrap();
        let part = TimePartition::uniform(0.5, 4).unwrap();
        let sol = solve_forward(&p, space(8, 1), &part, &TimeBasis::new(2), &NewtonConfig::default()).unwrap();
        for n in 1..4 {
            assert_eq!(sol.slab(n).incoming, sol.slab(n - 1).outgoing);
        }
        assert_eq!(sol.slab(0).incoming, sol.initial);
        for s in &sol.slabs {
            // right-Radau basis: last coefficient is the right trace
            assert_eq!(s.outgoing, *s.coefficients.last().unwrap());
        }
    }

    #[test]
    fn divergence_is_reported_with_history() {
        let p = ProblemSpec::new(0.5, 1.0, crate::problem::Forcing::Zero, Arc::new(|x| (PI * x[0]).sin())).unwrap();
        let part = TimePartition::uniform(1.0, 1).unwrap();
        let cfg = NewtonConfig {
            max_iter: 1,
            ..NewtonConfig::default()
        };
        match solve_forward(&p, space(8, 1), &part, &TimeBasis::new(0), &cfg) {
            Err(Error::NewtonDivergence { slab, history }) => {
                assert_eq!(slab, 0);
                assert_eq!(history.len(), 2);
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }
}
