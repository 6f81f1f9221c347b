use std::sync::Arc;

use acdg::companion::*;
use acdg::diagnostics::{energy_trace, stability_balance};
use acdg::forward::{solve_forward, DgSolution, NewtonConfig};
use acdg::mesh::{build_interval_mesh, Point};
use acdg::problem::{Constant, ExactSolution, ExpSine1d, Forcing, ProblemSpec, TanhProfile};
use acdg::space::FeSpace;
use acdg::time::basis::combine;
use acdg::time::{TimeBasis, TimePartition};

fn space(n: usize, l: usize) -> Arc<FeSpace> {
    Arc::new(FeSpace::new(build_interval_mesh(0.0, 1.0, n).unwrap(), l).unwrap())
}

fn manufactured_run(k: usize, basis: TimeBasis, tol: f64) -> (DgSolution, ProblemSpec) {
    let problem = ProblemSpec::manufactured(0.5, 1.0, Arc::new(ExpSine1d)).unwrap();
    let partition = TimePartition::uniform(1.0, 4).unwrap();
    assert_eq!(basis.degree(), k);
    let u = solve_forward(&problem, space(8, 1), &partition, &basis, &NewtonConfig::with_tolerances(tol, tol)).unwrap();
    (u, problem)
}

fn interface_problem(eps: f64, t: f64) -> ProblemSpec {
    let p = TanhProfile { epsilon: eps };
    ProblemSpec::new(eps, t, Forcing::Zero, Arc::new(move |x| p.value(0.0, x))).unwrap()
}

#[test]
fn duality_identity_k0_and_k1() {
    for k in [0, 1] {
        let (u, problem) = manufactured_run(k, TimeBasis::new(k), 1e-12);
        let phi = solve_backward_dual(&u, &problem).unwrap();
        let r = duality_identity_residual(&u, &phi, &problem).unwrap();
        assert!(r <= 1e-8, "k={k}: residual {r:e}");
    }
}

#[test]
fn duality_residual_tightens_with_newton_tolerance() {
    let res: Vec<f64> = [1e-8, 1e-12]
        .iter()
        .map(|&tol| {
            let (u, problem) = manufactured_run(1, TimeBasis::new(1), tol);
            let phi = solve_backward_dual(&u, &problem).unwrap();
            duality_identity_residual(&u, &phi, &problem).unwrap()
        })
        .collect();
    assert!(res[1] <= res[0], "{res:?}");
}

#[test]
fn under_integration_breaks_duality() {
    let (u, problem) = manufactured_run(1, TimeBasis::under_integrated(1), 1e-12);
    let phi = solve_backward_dual(&u, &problem).unwrap();
    let r = duality_identity_residual(&u, &phi, &problem).unwrap();
    let (ue, _) = manufactured_run(1, TimeBasis::new(1), 1e-12);
    let exact = duality_identity_residual(&ue, &solve_backward_dual(&ue, &problem).unwrap(), &problem).unwrap();
    assert!(r > 1e-8 && r > 100.0 * exact, "residual {r:e}, exact rule {exact:e}");
}

#[test]
fn zero_forward_gives_zero_dual() {
    let problem = ProblemSpec::zero(0.3, 0.5).unwrap();
    let partition = TimePartition::uniform(0.5, 3).unwrap();
    let u = solve_forward(&problem, space(6, 2), &partition, &TimeBasis::new(1), &NewtonConfig::default()).unwrap();
    let phi = solve_backward_dual(&u, &problem).unwrap();
    assert!(phi.flat_coefficients().iter().all(|&v| v == 0.0));
    assert_eq!(duality_identity_residual(&u, &phi, &problem).unwrap(), 0.0);
}

#[test]
fn dual_energy_balance_and_slack() {
    let (u, problem) = manufactured_run(1, TimeBasis::new(1), 1e-12);
    let phi = solve_backward_dual(&u, &problem).unwrap();
    let st = dual_stability(&u, &phi, &problem).unwrap();
    assert!(st.balance_residual < 1e-10, "{st:?}");
    assert!(st.slack >= -1e-12, "{st:?}");
}

#[test]
fn psi_with_zero_rhs_vanishes() {
    let (u, problem) = manufactured_run(1, TimeBasis::new(1), 1e-12);
    let mut zero = u.clone();
    zero.slabs.iter_mut().for_each(|s| s.coefficients.iter_mut().flatten().for_each(|v| *v = 0.0));
    let psi = solve_backward_psi(&zero, ReactionSource::Exact(Arc::new(ExpSine1d)), &problem).unwrap();
    assert!(psi.psi.flat_coefficients().iter().all(|&v| v == 0.0));
}

#[test]
fn psi_laplacian_matches_stiffness_and_chain_holds() {
    let (u, problem) = manufactured_run(1, TimeBasis::new(1), 1e-12);
    let exact: Arc<dyn ExactSolution> = Arc::new(ExpSine1d);
    let sol = solve_backward_psi(&u, ReactionSource::Exact(exact.clone()), &problem).unwrap();
    let m = u.space.mass();
    let a = u.space.stiffness();
    for (s, lap) in sol.psi.slabs.iter().zip(&sol.laplacian) {
        for (c, d) in s.coefficients.iter().zip(lap) {
            let lhs = m.matvec(d);
            let rhs = a.matvec(c);
            for (x, y) in lhs.iter().zip(&rhs) {
                assert!((x - y).abs() <= 1e-10 * (1.0 + y.abs()));
            }
        }
    }
    let chain = psi_stability_chain(&sol, &u, ReactionSource::Exact(exact), &problem, 1e-9).unwrap();
    assert!(chain.iter().all(|c| c.holds), "{chain:?}");
    let chain_h = psi_stability_chain(&sol, &u, ReactionSource::Discrete(&u), &problem, 1e-9);
    // a discrete linearization point is accepted by the chain as well
    assert!(chain_h.is_ok());
}

#[test]
fn psi_pure_phase_is_coercive() {
    let (u, problem) = manufactured_run(0, TimeBasis::new(0), 1e-12);
    let sol = solve_backward_psi(&u, ReactionSource::Exact(Arc::new(Constant(1.0))), &problem).unwrap();
    let chain = psi_stability_chain(&sol, &u, ReactionSource::Exact(Arc::new(Constant(1.0))), &problem, 1e-9).unwrap();
    for c in &chain {
        assert!(c.lambda_min.iter().all(|&l| l > 2.0 / 0.25));
        assert!(c.holds);
    }
}

/// `(1 + t) x (1 − x)`: in the P2 space and linear in time.
struct Quadratic;

impl ExactSolution for Quadratic {
    fn value(&self, t: f64, x: Point) -> f64 {
        (1.0 + t) * x[0] * (1.0 - x[0])
    }
    fn time_derivative(&self, _t: f64, x: Point) -> f64 {
        x[0] * (1.0 - x[0])
    }
    fn gradient(&self, t: f64, x: Point) -> [f64; 2] {
        [(1.0 + t) * (1.0 - 2.0 * x[0]), 0.0]
    }
    fn laplacian(&self, t: f64, _x: Point) -> f64 {
        -2.0 * (1.0 + t)
    }
}

fn nodal_coefficients(sp: &FeSpace, partition: &TimePartition, basis: &TimeBasis, n: usize) -> Vec<Vec<f64>> {
    basis
        .nodes()
        .iter()
        .map(|&s| sp.interpolate(|x| Quadratic.value(partition.start(n) + partition.tau(n) * s, x)))
        .collect()
}

#[test]
fn parabolic_projection_reproduces_discrete_functions() {
    let sp = space(5, 2);
    let partition = TimePartition::uniform(0.6, 3).unwrap();
    let basis = TimeBasis::new(1);
    let up = solve_parabolic_projection(&Quadratic, sp.clone(), &partition, &basis).unwrap();
    for n in 0..3 {
        let want = nodal_coefficients(&sp, &partition, &basis, n);
        for (a, b) in up.slabs[n].coefficients.iter().flatten().zip(want.iter().flatten()) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
        assert!(up.slabs[n].jump.iter().all(|j| j.abs() < 1e-10));
    }
    assert!(parabolic_orthogonality_residual(&up, &Quadratic).unwrap() < 1e-12);
}

#[test]
fn parabolic_orthogonality_smooth() {
    let sp = space(16, 1);
    let partition = TimePartition::uniform(1.0, 8).unwrap();
    for k in [0, 1, 2] {
        let up = solve_parabolic_projection(&ExpSine1d, sp.clone(), &partition, &TimeBasis::new(k)).unwrap();
        let r = parabolic_orthogonality_residual(&up, &ExpSine1d).unwrap();
        assert!(r < 1e-8, "k={k}: {r:e}");
    }
}

#[test]
fn local_projection_identity_and_moments() {
    let sp = space(5, 2);
    let partition = TimePartition::uniform(0.6, 3).unwrap();
    let w = |t: f64, x: Point| Quadratic.value(t, x);
    for k in [1, 2] {
        let basis = TimeBasis::new(k);
        let c = local_projection(&w, 1, &sp, &basis, &partition).unwrap();
        let want = nodal_coefficients(&sp, &partition, &basis, 1);
        for (a, b) in c.iter().flatten().zip(want.iter().flatten()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
    // k = 0: constant equal to P_h w at the right endpoint
    let basis = TimeBasis::new(0);
    let c = local_projection(&w, 2, &sp, &basis, &partition).unwrap();
    let end = sp.interpolate(|x| Quadratic.value(0.6, x));
    for (a, b) in c[0].iter().zip(&end) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn local_projection_moment_conditions() {
    let sp = space(8, 1);
    let partition = TimePartition::uniform(1.0, 4).unwrap();
    let w = |t: f64, x: Point| ExpSine1d.value(t, x) * (3.0 * t).cos();
    let m = sp.mass();
    for k in [1, 2, 3] {
        let basis = TimeBasis::new(k);
        let n = 2;
        let c = local_projection(&w, n, &sp, &basis, &partition).unwrap();
        // endpoint: M c_k = (w(t_{n+1}), φ)
        let end_load = sp.load(|x| w(partition.end(n), x)).unwrap();
        let mc = m.matvec(combine(&c, basis.right_values()).as_slice());
        for (a, b) in mc.iter().zip(&end_load) {
            assert!((a - b).abs() < 1e-12);
        }
        // moments against s^m with a rule far beyond the polynomial degree
        let (sq, sw) = acdg::quadrature::gauss_legendre_on(12, 0.0, 1.0);
        for mm in 0..k {
            let mut defect = vec![0.0; sp.free_count()];
            for (&s, &ws) in sq.iter().zip(&sw) {
                let t = partition.start(n) + partition.tau(n) * s;
                let lw = sp.load(|x| w(t, x)).unwrap();
                let lp = m.matvec(&basis.evaluate(&c, s));
                for a in 0..defect.len() {
                    defect[a] += ws * s.powi(mm as i32) * (lw[a] - lp[a]);
                }
            }
            let worst = defect.iter().fold(0.0f64, |x, y| x.max(y.abs()));
            assert!(worst < 1e-12, "k={k} m={mm}: {worst:e}");
        }
    }
}

#[test]
fn energy_identity_interface_data() {
    let problem = interface_problem(0.5, 0.5);
    let partition = TimePartition::uniform(0.5, 8).unwrap();
    for k in [1, 2] {
        let u = solve_forward(&problem, space(32, 1), &partition, &TimeBasis::new(k), &NewtonConfig::default()).unwrap();
        let trace = energy_trace(&u, &problem).unwrap();
        assert!(trace.holds(), "k={k}: {:?}", trace.slabs);
    }
}

#[test]
fn stability_balance_holds() {
    let (u, problem) = manufactured_run(1, TimeBasis::new(1), 1e-12);
    for r in stability_balance(&u, &problem).unwrap() {
        assert!(r.residual < 1e-9, "{r:?}");
    }
}
