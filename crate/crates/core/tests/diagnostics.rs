use std::f64::consts::PI;
use std::sync::Arc;

use acdg::diagnostics::{compute_norms, spectrum_along_solution, SpectrumSource};
use acdg::forward::{solve_forward, DgSolution, NewtonConfig};
use acdg::linalg::eigen::{EigenConfig, EigenMethod};
use acdg::mesh::{build_interval_mesh, build_square_mesh, Point};
use acdg::problem::{ExactSolution, ExpSine1d, ProblemSpec, TanhProfile};
use acdg::space::FeSpace;
use acdg::time::{TimeBasis, TimePartition};

fn interval(n: usize, l: usize) -> Arc<FeSpace> {
    Arc::new(FeSpace::new(build_interval_mesh(0.0, 1.0, n).unwrap(), l).unwrap())
}

fn zero_run(space: Arc<FeSpace>, k: usize, t: f64, n_slabs: usize) -> DgSolution {
    let problem = ProblemSpec::zero(0.3, t).unwrap();
    let partition = TimePartition::uniform(t, n_slabs).unwrap();
    solve_forward(&problem, space, &partition, &TimeBasis::new(k), &NewtonConfig::default()).unwrap()
}

#[test]
fn zero_solution_has_zero_norms() {
    let sq = Arc::new(FeSpace::new(build_square_mesh(4).unwrap(), 2).unwrap());
    for space in [interval(8, 1), sq] {
        let sol = zero_run(space, 1, 0.5, 3);
        assert!(sol.flat_coefficients().iter().all(|&v| v == 0.0));
        let r = compute_norms(&sol, None).unwrap();
        assert_eq!((r.l2l2, r.linf_l2, r.l2h1, r.l4l4, r.l4l2, r.jump_sum), (0.0, 0.0, 0.0, 0.0, 0.0, 0.0));
    }
}

#[test]
fn error_of_zero_against_expsine_is_the_exact_norm() {
    // u_h = 0, so every error norm is a norm of e^{−t} sin(πx)
    let t = 0.7;
    let sol = zero_run(interval(16, 2), 1, t, 5);
    let r = compute_norms(&sol, Some(&ExpSine1d)).unwrap();
    let e2 = 1.0 - (-2.0 * t).exp();
    let e4 = 1.0 - (-4.0 * t).exp();
    let want = [
        ("L2L2", r.l2l2, (e2 / 4.0).sqrt()),
        ("LinfL2", r.linf_l2, 0.5f64.sqrt()),
        ("L2H1", r.l2h1, PI * (e2 / 4.0).sqrt()),
        ("L4L4", r.l4l4, (0.375 * e4 / 4.0).powf(0.25)),
        ("L4L2", r.l4l2, (0.25 * e4 / 4.0).powf(0.25)),
    ];
    for (name, got, exact) in want {
        assert!((got - exact).abs() <= 1e-10 * exact, "{name}: {got} vs {exact}");
    }
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 40)
}

/// Nodal values of a 1D P1 function including the two boundary zeros, sorted by x.
fn p1_nodes(space: &FeSpace, coeff: &[f64]) -> Vec<(f64, f64)> {
    let full = space.expand(coeff);
    let mut v: Vec<(f64, f64)> = space.dof_coordinates().iter().zip(full).map(|(p, c)| (p[0], c)).collect();
    v.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    v
}

#[test]
fn norms_match_adaptive_quadrature_oracle() {
    // k = 0, l = 1: u_h is piecewise constant in time and piecewise linear in space.
    // Same discretization as configs/expsine_k0l1.json, whose norms are pinned in tests/golden.
    let (n, n_slabs, t_end) = (32, 32, 1.0);
    let problem = ProblemSpec::manufactured(0.5, t_end, Arc::new(ExpSine1d)).unwrap();
    let partition = TimePartition::uniform(t_end, n_slabs).unwrap();
    let sol = solve_forward(&problem, interval(n, 1), &partition, &TimeBasis::new(0), &NewtonConfig::default()).unwrap();
    let r = compute_norms(&sol, Some(&ExpSine1d)).unwrap();
    let (mut l2, mut h1) = (0.0, 0.0);
    for s in 0..n_slabs {
        let nodes = p1_nodes(&sol.space, &sol.slabs[s].coefficients[0]);
        let (a, b) = (partition.start(s), partition.end(s));
        for w in nodes.windows(2) {
            let ((x0, u0), (x1, u1)) = (w[0], w[1]);
            let slope = (u1 - u0) / (x1 - x0);
            let val = move |t: f64| {
                adaptive_simpson(
                    &|x| {
                        let e = u0 + slope * (x - x0) - ExpSine1d.value(t, [x, 0.0]);
                        e * e
                    },
                    x0,
                    x1,
                    1e-15,
                )
            };
            let grad = move |t: f64| {
                adaptive_simpson(
                    &|x| {
                        let e = slope - PI * (-t).exp() * (PI * x).cos();
                        e * e
                    },
                    x0,
                    x1,
                    1e-15,
                )
            };
            l2 += adaptive_simpson(&val, a, b, 1e-14);
            h1 += adaptive_simpson(&grad, a, b, 1e-14);
        }
    }
    let (l2, h1) = (l2.sqrt(), h1.sqrt());
    assert!((r.l2l2 - l2).abs() <= 1e-6 * l2, "{} vs {l2}", r.l2l2);
    assert!((r.l2h1 - h1).abs() <= 1e-6 * h1, "{} vs {h1}", r.l2h1);
}

fn dense() -> EigenConfig {
    EigenConfig {
        method: EigenMethod::Dense,
        ..EigenConfig::default()
    }
}

fn inverse() -> EigenConfig {
    EigenConfig {
        method: EigenMethod::InverseIteration,
        ..EigenConfig::default()
    }
}

#[test]
fn constant_states_shift_the_laplacian_spectrum() {
    // u ≡ 0: λ = π² − ε⁻²; u ≡ 1: λ = π² + 2ε⁻² (the Dirichlet quotient is kept for u ≡ 1)
    let space = interval(64, 1);
    for eps in [0.5, 0.2] {
        let inv = 1.0 / (eps * eps);
        for (c, exact) in [(0.0, PI * PI - inv), (1.0, PI * PI + 2.0 * inv)] {
            let f = move |_: f64, _: Point| c;
            let tr = spectrum_along_solution(SpectrumSource::Function(&f), &space, &[0.0], eps, &dense()).unwrap();
            let rel = (tr.lambda_min[0] - exact).abs() / exact.abs();
            assert!(rel <= 0.01, "c={c} eps={eps}: {} vs {exact}", tr.lambda_min[0]);
        }
    }
}

#[test]
fn inverse_iteration_matches_dense_on_interface_profile() {
    for (n, eps) in [(128, 0.1), (512, 0.05)] {
        let space = interval(n, 1);
        let p = TanhProfile { epsilon: eps };
        let f = move |t: f64, x: Point| p.value(t, x);
        let it = spectrum_along_solution(SpectrumSource::Function(&f), &space, &[0.0], eps, &inverse()).unwrap();
        let de = spectrum_along_solution(SpectrumSource::Function(&f), &space, &[0.0], eps, &dense()).unwrap();
        let (a, b) = (it.lambda_min[0], de.lambda_min[0]);
        assert!((a - b).abs() <= 1e-6 * b.abs(), "n={n}: {a} vs {b}");
        assert!(it.eigen_residuals[0] < 1e-8);
    }
}

#[test]
fn spectrum_along_computed_solution_is_reported_per_time() {
    let eps = 0.1;
    let p = TanhProfile { epsilon: eps };
    let problem = ProblemSpec::new(eps, 0.05, acdg::problem::Forcing::Zero, Arc::new(move |x| p.value(0.0, x))).unwrap();
    let partition = TimePartition::uniform(0.05, 4).unwrap();
    let sol = solve_forward(&problem, interval(128, 1), &partition, &TimeBasis::new(1), &NewtonConfig::default()).unwrap();
    let times = partition.endpoints().to_vec();
    let tr = spectrum_along_solution(SpectrumSource::Solution(&sol), &sol.space, &times, eps, &EigenConfig::default()).unwrap();
    assert_eq!(tr.lambda_min.len(), times.len());
    assert!(tr.c_s >= 0.0);
    assert!(tr.lambda_min.iter().all(|&l| l > -1.0 / (eps * eps)));
    assert!(spectrum_along_solution(SpectrumSource::Solution(&sol), &sol.space, &[1.0], eps, &EigenConfig::default()).is_err());
}
