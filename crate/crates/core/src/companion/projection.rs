use std::sync::Arc;

use super::MassSolver;
use crate::error::{Error, Result};
use crate::forward::{DgSolution, Direction, SlabSolution};
use crate::linalg::{solve_linear, DenseMatrix, LinearSolveConfig};
use crate::problem::ExactSolution;
use crate::quadrature::gauss_legendre_on;
use crate::slab::SlabContext;
use crate::space::FeSpace;
use crate::time::basis::combine;
use crate::time::{TimeBasis, TimePartition};

/// `τ Σ_q w_q χ_i(s_q) [(u_t, φ) + a(u, φ)]` for every test index `i` on slab `n`.
fn heat_load(ctx: &SlabContext, partition: &TimePartition, n: usize, u: &dyn ExactSolution) -> Result<Vec<Vec<f64>>> {
    let basis = &ctx.basis;
    let space = &ctx.space;
    let (t0, tau) = (partition.start(n), partition.tau(n));
    let mut out = vec![vec![0.0; ctx.nf()]; ctx.nt()];
    for (q, (&s, &w)) in basis.quad_points().iter().zip(basis.quad_weights()).enumerate() {
        let t = t0 + tau * s;
        let mut f = space.load_with(ctx.rule(), |x| u.time_derivative(t, x))?;
        let g = space.grad_load_with(ctx.rule(), |x| u.gradient(t, x))?;
        f.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
        for (i, oi) in out.iter_mut().enumerate() {
            let c = tau * w * basis.values()[q][i];
            oi.iter_mut().zip(&f).for_each(|(o, x)| *o += c * x);
        }
    }
    Ok(out)
}

/// `u_p`: the dG solution of the heat equation with load `u_t − Δu` and `u_p(0) = P_h u(0)`.
pub fn solve_parabolic_projection(
    u_exact: &dyn ExactSolution,
    space: Arc<FeSpace>,
    partition: &TimePartition,
    basis: &TimeBasis,
) -> Result<DgSolution> {
    let ctx = SlabContext::new(space.clone(), basis.clone());
    let ms = MassSolver::new(&space)?;
    let initial = ms.solve(&space.load(|x| u_exact.value(partition.initial_time(), x))?);
    let linear = LinearSolveConfig {
        rel_tolerance: 1e-14,
        ..LinearSolveConfig::default()
    };
    let mat = if partition.n_slabs() > 0 && uniform(partition) {
        Some(ctx.assemble(&ctx.ops.g, partition.tau(0), None))
    } else {
        None
    };
    let mut prev = initial.clone();
    let mut slabs = Vec::with_capacity(partition.n_slabs());
    for n in 0..partition.n_slabs() {
        let mut b = heat_load(&ctx, partition, n, u_exact)?;
        let mprev = ctx.mass.matvec(&prev);
        for (i, bi) in b.iter_mut().enumerate() {
            let l = ctx.ops.left_load[i];
            bi.iter_mut().zip(&mprev).for_each(|(o, x)| *o += l * x);
        }
        let owned;
        let a = match &mat {
            Some(m) => m,
            None => {
                owned = ctx.assemble(&ctx.ops.g, partition.tau(n), None);
                &owned
            }
        };
        let x = solve_linear(a, &ctx.pack(&b), &linear).map_err(|e| Error::Slab {
            slab: n,
            source: Box::new(e),
        })?;
        let s = SlabSolution::forward(n, basis, ctx.unpack(&x), prev, Vec::new());
        prev = s.outgoing.clone();
        slabs.push(s);
    }
    Ok(DgSolution {
        direction: Direction::Forward,
        partition: partition.clone(),
        basis: basis.clone(),
        space,
        slabs,
        initial,
    })
}

fn uniform(p: &TimePartition) -> bool {
    let t0 = p.tau(0);
    (0..p.n_slabs()).all(|n| (p.tau(n) - t0).abs() <= 1e-14 * t0)
}

/// Largest slab-form residual of `e_p = u_p − u` against every slab basis function
/// `χ_i(s) φ_a(x)`, relative to the size of the load.
///
/// The slab form of `u_p` is evaluated pointwise at the time quadrature nodes, independent of
/// the block operators used in the solve.
pub fn parabolic_orthogonality_residual(u_p: &DgSolution, u_exact: &dyn ExactSolution) -> Result<f64> {
    let basis = TimeBasis::new(u_p.basis.degree());
    let ctx = SlabContext::new(u_p.space.clone(), basis.clone());
    let mut worst: f64 = 0.0;
    for n in 0..u_p.n_slabs() {
        let s = &u_p.slabs[n];
        let tau = u_p.partition.tau(n);
        let load = heat_load(&ctx, &u_p.partition, n, u_exact)?;
        let mut form = vec![vec![0.0; ctx.nf()]; ctx.nt()];
        // jump term tested with χ_i(0)
        let mj = ctx.mass.matvec(&s.jump);
        for (i, fi) in form.iter_mut().enumerate() {
            let l = basis.left_values()[i];
            fi.iter_mut().zip(&mj).for_each(|(o, x)| *o += l * x);
        }
        for (q, &w) in basis.quad_weights().iter().enumerate() {
            let sq = basis.quad_points()[q];
            let v = combine(&s.coefficients, &u_p.basis.eval_all(sq));
            let dv = combine(&s.coefficients, &u_p.basis.deriv_all(sq));
            // (u_t, φ) with d/dt = τ⁻¹ d/ds
            let mut r = ctx.mass.matvec(&dv);
            r.iter_mut().for_each(|x| *x /= tau);
            let av = ctx.stiffness.matvec(&v);
            r.iter_mut().zip(&av).for_each(|(a, b)| *a += b);
            for (i, fi) in form.iter_mut().enumerate() {
                let c = tau * w * basis.values()[q][i];
                fi.iter_mut().zip(&r).for_each(|(o, x)| *o += c * x);
            }
        }
        let scale = 1.0 + load.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
        for (fi, li) in form.iter().zip(&load) {
            for (a, b) in fi.iter().zip(li) {
                worst = worst.max((a - b).abs() / scale);
            }
        }
    }
    Ok(worst)
}

/// Gauss points for the time moments of `w`; enough to resolve smooth `w` to roundoff on a slab.
const MOMENT_POINTS: usize = 16;

/// Coefficients of `ℙ^loc w` on slab `n`: `(ℙ^loc w)(t_{n+1}) = P_h w(t_{n+1})` and
/// `∫ (w − ℙ^loc w, q) = 0` for every `q` of degree `< k` in time.
pub fn local_projection(
    w: &dyn Fn(f64, crate::mesh::Point) -> f64,
    n: usize,
    space: &FeSpace,
    basis: &TimeBasis,
    partition: &TimePartition,
) -> Result<Vec<Vec<f64>>> {
    let ms = MassSolver::new(space)?;
    local_projection_with(w, n, space, &ms, basis, partition)
}

fn local_projection_with(
    w: &dyn Fn(f64, crate::mesh::Point) -> f64,
    n: usize,
    space: &FeSpace,
    ms: &MassSolver,
    basis: &TimeBasis,
    partition: &TimePartition,
) -> Result<Vec<Vec<f64>>> {
    if basis.nodes().last().map_or(true, |&s| (s - 1.0).abs() > 1e-14) {
        return Err(Error::Unsupported("local projection needs a node at the right endpoint".into()));
    }
    if n >= partition.n_slabs() {
        return Err(Error::invalid(format!("slab {n} out of range")));
    }
    let k = basis.degree();
    let (t0, tau) = (partition.start(n), partition.tau(n));
    let project = |t: f64| -> Result<Vec<f64>> { Ok(ms.solve(&space.load(|x| w(t, x))?)) };
    let end = project(partition.end(n))?;
    let mut coeffs = vec![vec![0.0; space.free_count()]; k + 1];
    if k == 0 {
        coeffs[0] = end;
        return Ok(coeffs);
    }
    let (sp, sw) = gauss_legendre_on(MOMENT_POINTS.max(2 * k + 2), 0.0, 1.0);
    let (sp, sw) = (&sp[..], &sw[..]);
    // B_mj = ∫ s^m χ_j(s) ds, m < k
    let chi: Vec<Vec<f64>> = sp.iter().map(|&s| basis.eval_all(s)).collect();
    let b = DenseMatrix::from_fn(k, k, |m, j| {
        sp.iter()
            .zip(sw)
            .zip(&chi)
            .map(|((&s, &wq), c)| wq * s.powi(m as i32) * c[j])
            .sum()
    });
    let lu = b.lu()?;
    let mut moments = vec![vec![0.0; space.free_count()]; k];
    for (&s, &wq) in sp.iter().zip(sw) {
        let ph = project(t0 + tau * s)?;
        for (m, mm) in moments.iter_mut().enumerate() {
            let c = wq * s.powi(m as i32);
            mm.iter_mut().zip(&ph).for_each(|(o, x)| *o += c * x);
        }
    }
    // move the endpoint contribution to the right-hand side
    for (m, mm) in moments.iter_mut().enumerate() {
        let bmk: f64 = sp
            .iter()
            .zip(sw)
            .zip(&chi)
            .map(|((&s, &wq), c)| wq * s.powi(m as i32) * c[k])
            .sum();
        mm.iter_mut().zip(&end).for_each(|(o, x)| *o -= bmk * x);
    }
    let nf = space.free_count();
    let mut rhs = vec![0.0; k];
    for a in 0..nf {
        for m in 0..k {
            rhs[m] = moments[m][a];
        }
        let c = lu.solve(&rhs);
        for j in 0..k {
            coeffs[j][a] = c[j];
        }
    }
    coeffs[k] = end;
    Ok(coeffs)
}

/// `ℙ^loc w` on every slab, chained as a forward solution with `u⁰ = P_h w(0)`.
pub fn local_projection_solution(
    w: &dyn Fn(f64, crate::mesh::Point) -> f64,
    space: Arc<FeSpace>,
    basis: &TimeBasis,
    partition: &TimePartition,
) -> Result<DgSolution> {
    let ms = MassSolver::new(&space)?;
    let initial = ms.solve(&space.load(|x| w(partition.initial_time(), x))?);
    let mut prev = initial.clone();
    let mut slabs = Vec::with_capacity(partition.n_slabs());
    for n in 0..partition.n_slabs() {
        let c = local_projection_with(w, n, &space, &ms, basis, partition)?;
        let s = SlabSolution::forward(n, basis, c, prev, Vec::new());
        prev = s.outgoing.clone();
        slabs.push(s);
    }
    Ok(DgSolution {
        direction: Direction::Forward,
        partition: partition.clone(),
        basis: basis.clone(),
        space,
        slabs,
        initial,
    })
}
