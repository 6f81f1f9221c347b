use serde::Serialize;

use crate::error::{Error, Result};
use crate::forward::{DgSolution, Direction};
use crate::problem::ExactSolution;
use crate::quadrature::gauss_legendre_on;
use crate::time::basis::combine;

/// The L∞-in-time grid has `LINF_SAMPLES_PER_DEGREE·(k+1) + 1` equispaced points per slab,
/// both endpoints included, plus `u⁰`.
pub const LINF_SAMPLES_PER_DEGREE: usize = 4;

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SlabNorms {
    pub slab: usize,
    /// `∫_slab ‖e‖²`
    pub l2_sq: f64,
    /// `∫_slab ‖∇e‖²`
    pub h1_sq: f64,
    /// `∫_slab ‖e‖⁴_{L⁴}`
    pub l4_pow4: f64,
    /// max of `‖e(t)‖` over the sample grid
    pub linf_l2: f64,
    /// `‖[u^n]‖²`
    pub jump_sq: f64,
}

/// Space-time norms of `u_h` or of `u_h − u`. `L2H1` uses the gradient seminorm, a norm on `H¹_0`.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct NormReport {
    #[serde(rename = "L2L2")]
    pub l2l2: f64,
    #[serde(rename = "LinfL2")]
    pub linf_l2: f64,
    #[serde(rename = "L2H1")]
    pub l2h1: f64,
    #[serde(rename = "L4L4")]
    pub l4l4: f64,
    /// `(∫ ‖e‖⁴_{L²})^{1/4}`
    #[serde(rename = "L4L2")]
    pub l4l2: f64,
    pub jump_sum: f64,
    pub per_slab: Vec<SlabNorms>,
}

/// Norms of `sol`, or of `sol − reference` when a reference is given.
///
/// With a reference the integrals use a refined rule (more Gauss points in time and a spatial
/// rule four degrees higher) so the non-polynomial part of the error is resolved.
pub fn compute_norms(sol: &DgSolution, reference: Option<&dyn ExactSolution>) -> Result<NormReport> {
    if sol.direction != Direction::Forward {
        return Err(Error::invalid("norms are defined for forward solutions"));
    }
    let space = &sol.space;
    let k = sol.basis.degree();
    let l = space.degree();
    let (n_time, rule) = match reference {
        None => (2 * k + 2, space.rule().clone()),
        Some(_) => ((2 * k + 2).max(8), space.rule_of_degree(4 * l + 4)),
    };
    let (tq, tw) = gauss_legendre_on(n_time, 0.0, 1.0);
    let pts = space.points_at(&rule);
    let wts = space.weights_at(&rule);
    let nsamp = LINF_SAMPLES_PER_DEGREE * (k + 1) + 1;

    let errors_at = |coeff: &[f64], t: f64| -> (Vec<f64>, Vec<[f64; 2]>) {
        let mut v = space.values_at(&rule, coeff);
        let mut g = space.gradients_at(&rule, coeff);
        if let Some(u) = reference {
            for (i, x) in pts.iter().enumerate() {
                v[i] -= u.value(t, *x);
                let gu = u.gradient(t, *x);
                g[i][0] -= gu[0];
                g[i][1] -= gu[1];
            }
        }
        (v, g)
    };
    let l2_at = |v: &[f64]| -> f64 { v.iter().zip(&wts).map(|(a, w)| w * a * a).sum::<f64>() };

    let mut report = NormReport::default();
    let (v0, _) = errors_at(&sol.initial, sol.partition.initial_time());
    let mut linf = l2_at(&v0).sqrt();
    let mut l4l2_pow4 = 0.0;
    let mut mass = None;
    for n in 0..sol.n_slabs() {
        let slab = &sol.slabs[n];
        let (t0, tau) = (sol.partition.start(n), sol.partition.tau(n));
        let mut sn = SlabNorms {
            slab: n,
            ..SlabNorms::default()
        };
        for (&s, &w) in tq.iter().zip(&tw) {
            let c = combine(&slab.coefficients, &sol.basis.eval_all(s));
            let (v, g) = errors_at(&c, t0 + tau * s);
            let l2 = l2_at(&v);
            sn.l2_sq += tau * w * l2;
            sn.h1_sq += tau * w * g.iter().zip(&wts).map(|(d, q)| q * (d[0] * d[0] + d[1] * d[1])).sum::<f64>();
            sn.l4_pow4 += tau * w * v.iter().zip(&wts).map(|(a, q)| q * a.powi(4)).sum::<f64>();
            l4l2_pow4 += tau * w * l2 * l2;
        }
        for i in 0..nsamp {
            let s = i as f64 / (nsamp - 1) as f64;
            let c = combine(&slab.coefficients, &sol.basis.eval_all(s));
            let (v, _) = errors_at(&c, t0 + tau * s);
            sn.linf_l2 = sn.linf_l2.max(l2_at(&v).sqrt());
        }
        let m = mass.get_or_insert_with(|| space.mass());
        sn.jump_sq = m.bilinear(&slab.jump, &slab.jump);
        linf = linf.max(sn.linf_l2);
        report.l2l2 += sn.l2_sq;
        report.l2h1 += sn.h1_sq;
        report.l4l4 += sn.l4_pow4;
        report.jump_sum += sn.jump_sq;
        report.per_slab.push(sn);
    }
    report.l2l2 = report.l2l2.sqrt();
    report.l2h1 = report.l2h1.sqrt();
    report.l4l4 = report.l4l4.powf(0.25);
    report.l4l2 = l4l2_pow4.powf(0.25);
    report.linf_l2 = linf;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct BestApproximation {
    /// `‖u_h − u‖_{L²H¹} + ‖u_h − u‖_{L∞L²}`
    pub numerator: f64,
    /// `‖u_p − u‖_{L²H¹} + ‖u_p − u‖_{L∞L²}`
    pub denominator: f64,
    /// `None` when the denominator vanishes
    pub ratio: Option<f64>,
    /// both errors below `1e−9`: `u` lies in the discrete space
    pub exact_case: bool,
}

pub fn best_approximation_ratio(u_h: &DgSolution, u_p: &DgSolution, u_exact: &dyn ExactSolution) -> Result<BestApproximation> {
    if u_h.n_slabs() != u_p.n_slabs() || u_h.space.free_count() != u_p.space.free_count() {
        return Err(Error::invalid("solutions live on different discretizations"));
    }
    let a = compute_norms(u_h, Some(u_exact))?;
    let b = compute_norms(u_p, Some(u_exact))?;
    let numerator = a.l2h1 + a.linf_l2;
    let denominator = b.l2h1 + b.linf_l2;
    let exact_case = numerator <= 1e-9 && denominator <= 1e-9;
    let ratio = if denominator > 0.0 && !exact_case {
        Some(numerator / denominator)
    } else {
        None
    };
    Ok(BestApproximation {
        numerator,
        denominator,
        ratio,
        exact_case,
    })
}
