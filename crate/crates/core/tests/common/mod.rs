//! Dense space-time oracles built from scratch: 1D P1 elements on a uniform grid, hand-written
//! Lagrange time bases on right Radau nodes and tabulated Gauss rules.
#![allow(dead_code)]

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use acdg::forward::DgSolution;
use acdg::problem::{ExactSolution, Forcing, ProblemSpec, TanhProfile};

pub fn gauss(n: usize) -> Vec<(f64, f64)> {
    // symmetric rules on [−1, 1], mapped to [0, 1]
    let half: &[(f64, f64)] = match n {
        2 => &[(0.5773502691896257, 1.0)],
        3 => &[(0.0, 0.8888888888888888), (0.7745966692414834, 0.5555555555555556)],
        4 => &[(0.3399810435848563, 0.6521451548625461), (0.8611363115940526, 0.3478548451374538)],
        6 => &[
            (0.2386191860831969, 0.4679139345726910),
            (0.6612093864662645, 0.3607615730481386),
            (0.9324695142031521, 0.1713244923791704),
        ],
        _ => unreachable!(),
    };
    let mut out = Vec::new();
    for &(x, w) in half {
        if x == 0.0 {
            out.push((0.5, 0.5 * w));
        } else {
            out.push((0.5 * (1.0 - x), 0.5 * w));
            out.push((0.5 * (1.0 + x), 0.5 * w));
        }
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

pub fn radau_nodes(k: usize) -> Vec<f64> {
    let r6 = 6f64.sqrt();
    match k {
        0 => vec![1.0],
        1 => vec![1.0 / 3.0, 1.0],
        2 => vec![(4.0 - r6) / 10.0, (4.0 + r6) / 10.0, 1.0],
        _ => unreachable!(),
    }
}

pub struct Lagrange {
    pub nodes: Vec<f64>,
}

impl Lagrange {
    pub fn eval(&self, i: usize, s: f64) -> f64 {
        let xi = self.nodes[i];
        self.nodes
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &xj)| (s - xj) / (xi - xj))
            .product()
    }

    pub fn deriv(&self, i: usize, s: f64) -> f64 {
        let n = self.nodes.len();
        if n == 1 {
            return 0.0;
        }
        let mut total = 0.0;
        let xi = self.nodes[i];
        for m in 0..n {
            if m == i {
                continue;
            }
            let mut p = 1.0 / (xi - self.nodes[m]);
            for j in 0..n {
                if j != i && j != m {
                    p *= (s - self.nodes[j]) / (xi - self.nodes[j]);
                }
            }
            total += p;
        }
        total
    }
}

/// Uniform P1 on (0, 1) with `n` cells and `n − 1` interior unknowns.
pub struct Fem1d {
    pub n: usize,
    pub h: f64,
}

impl Fem1d {
    pub fn dofs(&self) -> usize {
        self.n - 1
    }

    pub fn value(&self, u: &[f64], node: usize) -> f64 {
        if node == 0 || node == self.n {
            0.0
        } else {
            u[node - 1]
        }
    }

    /// `∫ c(u(x)) φ_b φ_a` with 3-point Gauss per cell.
    pub fn weighted(&self, u: &[f64], c: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let d = self.dofs();
        let mut m = DMatrix::zeros(d, d);
        for e in 0..self.n {
            let (ul, ur) = (self.value(u, e), self.value(u, e + 1));
            for &(s, w) in &gauss(3) {
                let phi = [1.0 - s, s];
                let ux = ul * phi[0] + ur * phi[1];
                let cw = c(ux) * w * self.h;
                for a in 0..2 {
                    for b in 0..2 {
                        let (ga, gb) = (e + a, e + b);
                        if ga == 0 || ga == self.n || gb == 0 || gb == self.n {
                            continue;
                        }
                        m[(ga - 1, gb - 1)] += cw * phi[a] * phi[b];
                    }
                }
            }
        }
        m
    }

    /// `∫ g(u(x)) φ_a`.
    pub fn load(&self, u: &[f64], g: impl Fn(f64) -> f64) -> DVector<f64> {
        let mut r = DVector::zeros(self.dofs());
        for e in 0..self.n {
            let (ul, ur) = (self.value(u, e), self.value(u, e + 1));
            for &(s, w) in &gauss(3) {
                let phi = [1.0 - s, s];
                let gx = g(ul * phi[0] + ur * phi[1]) * w * self.h;
                for a in 0..2 {
                    let ga = e + a;
                    if ga != 0 && ga != self.n {
                        r[ga - 1] += gx * phi[a];
                    }
                }
            }
        }
        r
    }

    pub fn mass(&self) -> DMatrix<f64> {
        let z = vec![0.0; self.dofs()];
        self.weighted(&z, |_| 1.0)
    }

    pub fn stiffness(&self) -> DMatrix<f64> {
        let d = self.dofs();
        DMatrix::from_fn(d, d, |i, j| match i.abs_diff(j) {
            0 => 2.0 / self.h,
            1 => -1.0 / self.h,
            _ => 0.0,
        })
    }
}

pub struct TimeOps {
    pub lag: Lagrange,
    pub quad: Vec<(f64, f64)>,
    pub g: DMatrix<f64>,
    pub theta: DMatrix<f64>,
}

impl TimeOps {
    pub fn new(k: usize) -> Self {
        let lag = Lagrange { nodes: radau_nodes(k) };
        let quad = gauss(2 * k + 2);
        let nt = k + 1;
        let g = DMatrix::from_fn(nt, nt, |i, j| {
            lag.eval(i, 1.0) * lag.eval(j, 1.0) - quad.iter().map(|&(s, w)| w * lag.eval(j, s) * lag.deriv(i, s)).sum::<f64>()
        });
        let theta = DMatrix::from_fn(nt, nt, |i, j| quad.iter().map(|&(s, w)| w * lag.eval(i, s) * lag.eval(j, s)).sum());
        TimeOps { lag, quad, g, theta }
    }

    pub fn nt(&self) -> usize {
        self.g.nrows()
    }

    /// Field at reference time `s` from node-major coefficients.
    pub fn at(&self, u: &DVector<f64>, d: usize, s: f64) -> Vec<f64> {
        (0..d).map(|a| (0..self.nt()).map(|j| self.lag.eval(j, s) * u[j * d + a]).sum()).collect()
    }
}

pub fn kron_add(out: &mut DMatrix<f64>, t: &DMatrix<f64>, s: &DMatrix<f64>, scale: f64) {
    let d = s.nrows();
    for i in 0..t.nrows() {
        for j in 0..t.ncols() {
            let c = scale * t[(i, j)];
            if c != 0.0 {
                for a in 0..d {
                    for b in 0..d {
                        out[(i * d + a, j * d + b)] += c * s[(a, b)];
                    }
                }
            }
        }
    }
}

/// One forward slab with `f = 0` by dense Newton.
pub fn oracle_forward_slab(fem: &Fem1d, ops: &TimeOps, prev: &[f64], tau: f64, eps: f64) -> DVector<f64> {
    let d = fem.dofs();
    let nt = ops.nt();
    let m = fem.mass();
    let a = fem.stiffness();
    let inv = 1.0 / (eps * eps);
    let mprev = &m * DVector::from_column_slice(prev);
    let mut lin = DMatrix::zeros(nt * d, nt * d);
    kron_add(&mut lin, &ops.g, &m, 1.0);
    kron_add(&mut lin, &ops.theta, &a, tau);
    let mut u = DVector::from_fn(nt * d, |i, _| prev[i % d]);
    for _ in 0..50 {
        let mut r = &lin * &u;
        let mut jac = lin.clone();
        for &(s, w) in &ops.quad {
            let us = ops.at(&u, d, s);
            let nl = fem.load(&us, |v| v * v * v - v);
            let dn = fem.weighted(&us, |v| 3.0 * v * v - 1.0);
            for i in 0..nt {
                let ci = tau * inv * w * ops.lag.eval(i, s);
                for x in 0..d {
                    r[i * d + x] += ci * nl[x];
                }
                for j in 0..nt {
                    let cij = ci * ops.lag.eval(j, s);
                    for x in 0..d {
                        for y in 0..d {
                            jac[(i * d + x, j * d + y)] += cij * dn[(x, y)];
                        }
                    }
                }
            }
        }
        for i in 0..nt {
            let l = ops.lag.eval(i, 0.0);
            for x in 0..d {
                r[i * d + x] -= l * mprev[x];
            }
        }
        let du = jac.lu().solve(&r).unwrap();
        u -= &du;
        if du.norm() < 1e-15 * (1.0 + u.norm()) {
            break;
        }
    }
    u
}

pub fn solver_slab_node_major(sol: &DgSolution, n: usize) -> Vec<f64> {
    sol.slabs[n].coefficients.iter().flatten().copied().collect()
}

pub fn interface_problem(eps: f64, t: f64) -> ProblemSpec {
    let p = TanhProfile { epsilon: eps };
    ProblemSpec::new(eps, t, Forcing::Zero, Arc::new(move |x| 0.8 * p.value(0.0, x))).unwrap()
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Backward sweep with reaction `c(u)` and right-hand side `τ Θ M E`, dense.
pub fn oracle_backward(
    fem: &Fem1d,
    ops: &TimeOps,
    taus: &[f64],
    u_slabs: &[DVector<f64>],
    e_slabs: &[DVector<f64>],
    c: impl Fn(f64) -> f64,
) -> Vec<DVector<f64>> {
    let d = fem.dofs();
    let nt = ops.nt();
    let m = fem.mass();
    let a = fem.stiffness();
    let mut out = vec![DVector::zeros(nt * d); taus.len()];
    let mut next = DVector::zeros(d);
    for n in (0..taus.len()).rev() {
        let tau = taus[n];
        let mut mat = DMatrix::zeros(nt * d, nt * d);
        kron_add(&mut mat, &ops.g.transpose(), &m, 1.0);
        kron_add(&mut mat, &ops.theta, &a, tau);
        for &(s, w) in &ops.quad {
            let us = ops.at(&u_slabs[n], d, s);
            let cm = fem.weighted(&us, &c);
            let t = DMatrix::from_fn(nt, nt, |i, j| w * ops.lag.eval(i, s) * ops.lag.eval(j, s));
            kron_add(&mut mat, &t, &cm, tau);
        }
        let mut rhs = DVector::zeros(nt * d);
        let mut tm = DMatrix::zeros(nt * d, nt * d);
        kron_add(&mut tm, &ops.theta, &m, tau);
        rhs += &tm * &e_slabs[n];
        let mnext = &m * &next;
        for i in 0..nt {
            let r = ops.lag.eval(i, 1.0);
            for x in 0..d {
                rhs[i * d + x] += r * mnext[x];
            }
        }
        let phi = mat.lu().solve(&rhs).unwrap();
        next = DVector::from_vec(ops.at(&phi, d, 0.0));
        out[n] = phi;
    }
    out
}


/// `M (U − Uⁿ)/τ + A U + ε⁻² (U³ − U, φ) = 0` by dense Newton.
pub fn implicit_euler_step(fem: &Fem1d, old: &DVector<f64>, tau: f64, eps: f64) -> DVector<f64> {
    let m = fem.mass();
    let a = fem.stiffness();
    let inv = 1.0 / (eps * eps);
    let mut u = old.clone();
    for _ in 0..50 {
        let nl = fem.load(u.as_slice(), |v| v * v * v - v);
        let r = &m * (&u - old) / tau + &a * &u + nl * inv;
        let jac = &m / tau + &a + fem.weighted(u.as_slice(), |v| 3.0 * v * v - 1.0) * inv;
        let du = jac.lu().solve(&r).unwrap();
        u -= &du;
        if du.norm() < 1e-15 {
            break;
        }
    }
    u
}
