use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use super::config::RunConfig;
use crate::checkpoint::write_checkpoint;
use crate::companion::{
    dual_stability, duality_identity_report, local_projection_solution, psi_stability_chain, solve_backward_dual,
    solve_backward_psi, solve_parabolic_projection, DualStability, ReactionSource,
};
use crate::diagnostics::{
    best_approximation_ratio, compute_norms, energy_trace, spectrum_along_solution, stability_balance, IdentityReport,
    NormReport, SpectrumSource, SpectrumTrace,
};
use crate::error::{Error, Result};
use crate::forward::{solve_forward, DgSolution};
use crate::linalg::EigenConfig;
use crate::mesh::Point;
use crate::quadrature::gauss_legendre_on;
use crate::time::{discrete_characteristic, discrete_characteristic_explicit};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_IDENTITY: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;

pub const DUALITY_TOL: f64 = 1e-8;
pub const ENERGY_TOL: f64 = 1e-10;
pub const MOMENT_TOL: f64 = 1e-12;
pub const STABILITY_TOL: f64 = 1e-9;
pub const EXPLICIT_TOL: f64 = 1e-10;

pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Config(_) => EXIT_CONFIG,
        _ => EXIT_SOLVER,
    }
}

/// `{"error": kind, "message": ..., "exit_code": n}`
pub fn error_json(e: &Error) -> String {
    serde_json::json!({
        "error": e.kind(),
        "message": e.to_string(),
        "exit_code": exit_code_for(e),
    })
    .to_string()
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Timestamps live here and nowhere in the data tables.
#[derive(Serialize)]
struct RunManifest<'a> {
    command: &'a str,
    config_hash: String,
    config: &'a RunConfig,
    started_unix: u64,
    finished_unix: u64,
    version: &'static str,
}

fn write_manifest(dir: &Path, command: &str, cfg: &RunConfig, started: u64) -> Result<()> {
    let m = RunManifest {
        command,
        config_hash: cfg.hash(),
        config: cfg,
        started_unix: started,
        finished_unix: unix_now(),
        version: env!("CARGO_PKG_VERSION"),
    };
    fs::write(dir.join("run.json"), serde_json::to_string_pretty(&m)?)?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

#[derive(Debug, Clone, Serialize)]
pub struct NormRow {
    pub config_hash: String,
    pub run_id: String,
    pub k: usize,
    pub l: usize,
    #[serde(rename = "N")]
    pub n_slabs: usize,
    pub n_cells: usize,
    pub epsilon: f64,
    #[serde(rename = "L2L2")]
    pub l2l2: f64,
    #[serde(rename = "LinfL2")]
    pub linf_l2: f64,
    #[serde(rename = "L2H1")]
    pub l2h1: f64,
    #[serde(rename = "L4L4")]
    pub l4l4: f64,
    pub jump_sum: f64,
}

impl NormRow {
    fn new(cfg: &RunConfig, sol: &DgSolution, r: &NormReport) -> Self {
        NormRow {
            config_hash: cfg.hash(),
            run_id: cfg.output.run_id.clone(),
            k: cfg.time.k,
            l: cfg.space.degree_l,
            n_slabs: cfg.time.n_slabs,
            n_cells: sol.space.num_elements(),
            epsilon: cfg.epsilon,
            l2l2: r.l2l2,
            linf_l2: r.linf_l2,
            l2h1: r.l2h1,
            l4l4: r.l4l4,
            jump_sum: r.jump_sum,
        }
    }
}

pub struct SolveOutput {
    pub run_dir: PathBuf,
    pub solution: DgSolution,
    /// Error norms against the exact solution when one exists, norms of `u_h` otherwise.
    pub norms: NormReport,
    pub row: NormRow,
}

/// Solve and compute norms without touching the filesystem.
pub fn run_solve(cfg: &RunConfig) -> Result<(DgSolution, NormReport)> {
    cfg.validate()?;
    let problem = cfg.build_problem()?;
    let sol = solve_forward(
        &problem,
        cfg.build_space()?,
        &cfg.build_partition()?,
        &cfg.build_basis()?,
        &cfg.newton(),
    )?;
    let norms = compute_norms(&sol, problem.exact.as_deref())?;
    Ok((sol, norms))
}

pub fn cmd_solve(cfg: &RunConfig, out: Option<&Path>) -> Result<SolveOutput> {
    let started = unix_now();
    let (solution, norms) = run_solve(cfg)?;
    let run_dir = cfg.run_dir(out);
    fs::create_dir_all(&run_dir)?;
    write_checkpoint(&run_dir.join("checkpoint"), &solution, &cfg.hash(), cfg.epsilon)?;
    let row = NormRow::new(cfg, &solution, &norms);
    write_csv(&run_dir.join("norms.csv"), std::slice::from_ref(&row))?;
    write_json(&run_dir.join("norms.json"), &norms)?;
    write_manifest(&run_dir, "solve", cfg, started)?;
    Ok(SolveOutput {
        run_dir,
        solution,
        norms,
        row,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Refine {
    Time,
    Space,
    Both,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub config_hash: String,
    pub level: usize,
    pub n: usize,
    #[serde(rename = "N")]
    pub n_slabs: usize,
    pub h: f64,
    pub tau: f64,
    #[serde(rename = "L2L2")]
    pub l2l2: f64,
    #[serde(rename = "LinfL2")]
    pub linf_l2: f64,
    #[serde(rename = "L2H1")]
    pub l2h1: f64,
    #[serde(rename = "L4L4")]
    pub l4l4: f64,
    #[serde(rename = "L4L2")]
    pub l4l2: f64,
    /// `LinfL2 + L2H1`
    #[serde(rename = "X")]
    pub x: f64,
    pub order_l2l2: Option<f64>,
    pub order_linf_l2: Option<f64>,
    pub order_l2h1: Option<f64>,
    pub order_x: Option<f64>,
    /// parabolic projection `u_p − u`
    pub proj_l2l2: f64,
    pub proj_l2h1: f64,
    pub order_proj_l2l2: Option<f64>,
    pub order_proj_l2h1: Option<f64>,
    /// slab-local projection `ℙ^loc u − u`
    pub loc_l2l2: f64,
    pub loc_l2h1: f64,
    pub order_loc_l2l2: Option<f64>,
    pub order_loc_l2h1: Option<f64>,
    pub best_approx_ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceTable {
    pub config_hash: String,
    pub refine: Refine,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    /// Observed order of the finest pair for the selected column.
    pub fn finest_order(&self, column: impl Fn(&ConvergenceRow) -> Option<f64>) -> Option<f64> {
        self.rows.last().and_then(column)
    }
}

/// `log₂(e_coarse / e_fine)` under exact halving.
pub fn observed_order(coarse: f64, fine: f64) -> Option<f64> {
    (coarse > 0.0 && fine > 0.0).then(|| (coarse / fine).log2())
}

fn level_config(cfg: &RunConfig, level: usize, refine: Refine) -> RunConfig {
    let f = 1usize << level;
    let mut c = cfg.clone();
    if matches!(refine, Refine::Space | Refine::Both) {
        c = c.with_resolution(cfg.resolution() * f);
    }
    if matches!(refine, Refine::Time | Refine::Both) {
        c.time.n_slabs = cfg.time.n_slabs * f;
    }
    c
}

fn convergence_level(cfg: &RunConfig, base_hash: &str, level: usize, prev: Option<&ConvergenceRow>) -> Result<ConvergenceRow> {
    let problem = cfg.build_problem()?;
    let exact = problem
        .exact
        .clone()
        .ok_or_else(|| Error::Config("convergence studies need a manufactured problem".into()))?;
    let space = cfg.build_space()?;
    let partition = cfg.build_partition()?;
    let basis = cfg.build_basis()?;
    let u_h = solve_forward(&problem, space.clone(), &partition, &basis, &cfg.newton())?;
    let e = compute_norms(&u_h, Some(exact.as_ref()))?;
    let u_p = solve_parabolic_projection(exact.as_ref(), space.clone(), &partition, &basis)?;
    let ep = compute_norms(&u_p, Some(exact.as_ref()))?;
    let ex = exact.clone();
    let w = move |t: f64, x: Point| ex.value(t, x);
    let loc = local_projection_solution(&w, space.clone(), &basis, &partition)?;
    let el = compute_norms(&loc, Some(exact.as_ref()))?;
    let best = best_approximation_ratio(&u_h, &u_p, exact.as_ref())?;
    let order = |f: fn(&ConvergenceRow) -> f64, now: f64| prev.and_then(|p| observed_order(f(p), now));
    let x = e.linf_l2 + e.l2h1;
    Ok(ConvergenceRow {
        config_hash: base_hash.to_string(),
        level,
        n: cfg.resolution(),
        n_slabs: cfg.time.n_slabs,
        h: space.mesh().mesh_size_h(),
        tau: partition.max_tau(),
        l2l2: e.l2l2,
        linf_l2: e.linf_l2,
        l2h1: e.l2h1,
        l4l4: e.l4l4,
        l4l2: e.l4l2,
        x,
        order_l2l2: order(|r| r.l2l2, e.l2l2),
        order_linf_l2: order(|r| r.linf_l2, e.linf_l2),
        order_l2h1: order(|r| r.l2h1, e.l2h1),
        order_x: order(|r| r.x, x),
        proj_l2l2: ep.l2l2,
        proj_l2h1: ep.l2h1,
        order_proj_l2l2: order(|r| r.proj_l2l2, ep.l2l2),
        order_proj_l2h1: order(|r| r.proj_l2h1, ep.l2h1),
        loc_l2l2: el.l2l2,
        loc_l2h1: el.l2h1,
        order_loc_l2l2: order(|r| r.loc_l2l2, el.l2l2),
        order_loc_l2h1: order(|r| r.loc_l2h1, el.l2h1),
        best_approx_ratio: best.ratio,
    })
}

/// The refinement ladder in memory; `on_row` sees every finished level.
pub fn run_convergence(
    cfg: &RunConfig,
    levels: usize,
    refine: Refine,
    mut on_row: impl FnMut(&ConvergenceTable) -> Result<()>,
) -> Result<ConvergenceTable> {
    cfg.validate()?;
    if levels < 3 {
        return Err(Error::Config(format!("a convergence study needs at least 3 levels (got {levels})")));
    }
    if !cfg.entry()?.manufactured {
        return Err(Error::Config("convergence studies need a manufactured problem".into()));
    }
    let hash = cfg.hash();
    let mut table = ConvergenceTable {
        config_hash: hash.clone(),
        refine,
        rows: Vec::with_capacity(levels),
    };
    for level in 0..levels {
        let c = level_config(cfg, level, refine);
        let row = convergence_level(&c, &hash, level, table.rows.last())?;
        table.rows.push(row);
        on_row(&table)?;
    }
    Ok(table)
}

/// Ladder with the table rewritten after every level, so a failing level leaves the finished rows.
pub fn cmd_convergence(cfg: &RunConfig, out: Option<&Path>, levels: usize, refine: Refine) -> Result<ConvergenceTable> {
    let started = unix_now();
    let dir = cfg.run_dir(out);
    fs::create_dir_all(&dir)?;
    let table = run_convergence(cfg, levels, refine, |t| write_csv(&dir.join("convergence.csv"), &t.rows))?;
    write_json(&dir.join("convergence.json"), &table)?;
    write_manifest(&dir, "convergence", cfg, started)?;
    Ok(table)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub config_hash: String,
    pub epsilon: f64,
    pub status: String,
    #[serde(rename = "L2L2")]
    pub l2l2: f64,
    #[serde(rename = "LinfL2")]
    pub linf_l2: f64,
    #[serde(rename = "L2H1")]
    pub l2h1: f64,
    #[serde(rename = "L4L4")]
    pub l4l4: f64,
    pub jump_sum: f64,
    /// `‖u_h‖_{L²L²}`
    pub scaled_l2l2: f64,
    /// `ε (‖u_h‖_{L∞L²} + ‖u_h‖_{L²H¹})`
    pub scaled_x: f64,
    /// `ε ‖u_h‖²_{L⁴L⁴}`
    pub scaled_l4: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub failures: usize,
}

impl SweepOutcome {
    /// `max/min` of a column over the successful rows.
    pub fn spread(&self, column: impl Fn(&SweepRow) -> f64) -> f64 {
        let v: Vec<f64> = self.rows.iter().filter(|r| r.status == "ok").map(column).collect();
        let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
        max / min
    }
}

pub fn run_stability_sweep(cfg: &RunConfig, epsilons: &[f64]) -> Result<SweepOutcome> {
    cfg.validate()?;
    if epsilons.is_empty() || epsilons.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(Error::Config("epsilons must be positive".into()));
    }
    if epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Config("epsilons must be strictly descending".into()));
    }
    let hash = cfg.hash();
    let mut rows = Vec::with_capacity(epsilons.len());
    let mut failures = 0;
    for &eps in epsilons {
        let mut c = cfg.clone();
        c.epsilon = eps;
        let row = match run_solve(&c) {
            Ok((_, r)) => SweepRow {
                config_hash: hash.clone(),
                epsilon: eps,
                status: "ok".into(),
                l2l2: r.l2l2,
                linf_l2: r.linf_l2,
                l2h1: r.l2h1,
                l4l4: r.l4l4,
                jump_sum: r.jump_sum,
                scaled_l2l2: r.l2l2,
                scaled_x: eps * (r.linf_l2 + r.l2h1),
                scaled_l4: eps * r.l4l4 * r.l4l4,
            },
            Err(e) => {
                failures += 1;
                SweepRow {
                    config_hash: hash.clone(),
                    epsilon: eps,
                    status: format!("failed:{}", e.kind()),
                    l2l2: f64::NAN,
                    linf_l2: f64::NAN,
                    l2h1: f64::NAN,
                    l4l4: f64::NAN,
                    jump_sum: f64::NAN,
                    scaled_l2l2: f64::NAN,
                    scaled_x: f64::NAN,
                    scaled_l4: f64::NAN,
                }
            }
        };
        rows.push(row);
    }
    Ok(SweepOutcome { rows, failures })
}

pub fn cmd_stability_sweep(cfg: &RunConfig, out: Option<&Path>, epsilons: &[f64]) -> Result<SweepOutcome> {
    let started = unix_now();
    let outcome = run_stability_sweep(cfg, epsilons)?;
    let dir = cfg.run_dir(out);
    fs::create_dir_all(&dir)?;
    write_csv(&dir.join("stability_sweep.csv"), &outcome.rows)?;
    write_manifest(&dir, "stability-sweep", cfg, started)?;
    Ok(outcome)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    pub residual: Option<f64>,
    pub threshold: Option<f64>,
    pub detail: String,
}

impl Check {
    fn measured(name: &str, residual: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            status: if residual <= threshold { CheckStatus::Pass } else { CheckStatus::Fail },
            residual: Some(residual),
            threshold: Some(threshold),
            detail: detail.into(),
        }
    }

    fn skipped(name: &str, why: &str) -> Self {
        Check {
            name: name.into(),
            status: CheckStatus::Skipped,
            residual: None,
            threshold: None,
            detail: why.into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub config_hash: String,
    pub checks: Vec<Check>,
    pub identities: Vec<IdentityReport>,
    pub dual_stability: Option<DualStability>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn failing(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| c.status == CheckStatus::Fail)
            .map(|c| c.name.as_str())
            .collect()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Smooth test function for the projection checks: `e^{−t} sin(πx)` (times `sin(πy)` in 2D).
fn projection_test_function(dimension: usize) -> impl Fn(f64, Point) -> f64 {
    move |t, x| {
        let s = (-t).exp() * (PI * x[0]).sin();
        if dimension == 2 {
            s * (PI * x[1]).sin()
        } else {
            s
        }
    }
}

/// Largest endpoint and moment defect of `ℙ^loc w` over all slabs, checked with a 20-point rule.
fn local_projection_defect(cfg: &RunConfig) -> Result<f64> {
    let space = cfg.build_space()?;
    let partition = cfg.build_partition()?;
    let basis = crate::time::TimeBasis::new(cfg.time.k);
    let w = projection_test_function(cfg.dimension);
    let p = local_projection_solution(&w, space.clone(), &basis, &partition)?;
    let m = space.mass();
    let (sq, sw) = gauss_legendre_on(20, 0.0, 1.0);
    let mut worst: f64 = 0.0;
    for n in 0..partition.n_slabs() {
        let c = &p.slabs[n].coefficients;
        let end = space.load(|x| w(partition.end(n), x))?;
        let me = m.matvec(&p.slabs[n].outgoing);
        worst = me.iter().zip(&end).fold(worst, |a, (x, y)| a.max((x - y).abs()));
        let loads: Vec<(Vec<f64>, Vec<f64>)> = sq
            .iter()
            .map(|&s| {
                let t = partition.start(n) + partition.tau(n) * s;
                Ok((space.load(|x| w(t, x))?, m.matvec(&basis.evaluate(c, s))))
            })
            .collect::<Result<_>>()?;
        for mm in 0..cfg.time.k {
            let mut d = vec![0.0; space.free_count()];
            for ((&s, &ws), (lw, lp)) in sq.iter().zip(&sw).zip(&loads) {
                let f = ws * s.powi(mm as i32);
                for a in 0..d.len() {
                    d[a] += f * (lw[a] - lp[a]);
                }
            }
            worst = d.iter().fold(worst, |a, x| a.max(x.abs()));
        }
    }
    Ok(worst)
}

const CUT_POINTS: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 0.9];

fn characteristic_checks(k: usize) -> Result<(f64, f64)> {
    let mut moment: f64 = 0.0;
    let mut agree: f64 = 0.0;
    for &t in &CUT_POINTS {
        let rho = discrete_characteristic(k, t)?;
        moment = moment.max((rho.eval(0.0) - 1.0).abs());
        for p in 0..k {
            moment = moment.max(rho.moment_defect(p).abs());
        }
        let ex = discrete_characteristic_explicit(k, t)?;
        for i in 0..=200 {
            let s = i as f64 / 200.0;
            agree = agree.max((rho.eval(s) - ex.eval(s)).abs());
        }
    }
    Ok((moment, agree))
}

/// All identity checks on one configuration; solver failures propagate as errors.
pub fn run_verify(cfg: &RunConfig) -> Result<VerifyReport> {
    cfg.validate()?;
    let hash = cfg.hash();
    let problem = cfg.build_problem()?;
    let basis = cfg.build_basis()?;
    let u = solve_forward(&problem, cfg.build_space()?, &cfg.build_partition()?, &basis, &cfg.newton())?;
    let mut checks = Vec::new();
    let mut identities = Vec::new();

    let phi = solve_backward_dual(&u, &problem)?;
    let dual = duality_identity_report(&u, &phi, &problem)?.with_hash(hash.clone());
    let note = if basis.is_under_integrated() {
        "under-integrated time rule"
    } else {
        "exact time rule"
    };
    checks.push(Check::measured("duality", dual.residual, DUALITY_TOL, note));
    identities.push(dual);

    let ds = dual_stability(&u, &phi, &problem)?;
    checks.push(Check::measured(
        "dual_stability_balance",
        ds.balance_residual,
        STABILITY_TOL,
        format!("slack {:.3e}, slack with unit initial coefficient {:.3e}", ds.slack, ds.slack_unit_initial),
    ));

    if cfg.time.k == 0 {
        checks.push(Check::skipped("energy", "skipped (k=0)"));
    } else if problem.has_forcing() {
        checks.push(Check::skipped("energy", "skipped (f ≠ 0)"));
    } else {
        let trace = energy_trace(&u, &problem)?;
        let worst = trace.max_scaled_residual();
        checks.push(Check::measured(
            "energy",
            worst,
            ENERGY_TOL,
            "max over slabs of |residual| / (1 + τ E(u^{n+1}_-))",
        ));
    }

    let balance = stability_balance(&u, &problem)?;
    let worst = balance.iter().map(|r| r.residual).fold(0.0, f64::max);
    checks.push(Check::measured("stability_balance", worst, STABILITY_TOL, "max over slabs"));
    identities.extend(balance.into_iter().map(|r| r.with_hash(hash.clone())));

    let source = || match &problem.exact {
        Some(exact) => ReactionSource::Exact(exact.clone()),
        None => ReactionSource::Discrete(&u),
    };
    let psi = solve_backward_psi(&u, source(), &problem)?;
    let chain = psi_stability_chain(&psi, &u, source(), &problem, STABILITY_TOL)?;
    let violated = chain.iter().filter(|c| !c.holds).count();
    let worst = chain.iter().map(|c| (c.lhs - c.rhs).max(0.0)).fold(0.0, f64::max);
    let mut c = Check::measured("psi_chain", worst, STABILITY_TOL, format!("{violated} slabs violated"));
    if violated > 0 {
        c.status = CheckStatus::Fail;
    }
    checks.push(c);

    checks.push(Check::measured(
        "local_projection_moments",
        local_projection_defect(cfg)?,
        MOMENT_TOL,
        "endpoint and time-moment defects",
    ));

    let (moment, agree) = characteristic_checks(cfg.time.k)?;
    checks.push(Check::measured("characteristic_moments", moment, MOMENT_TOL, "moments and rho(0) = 1"));
    checks.push(Check::measured("characteristic_explicit", agree, EXPLICIT_TOL, "explicit vs moment path"));

    Ok(VerifyReport {
        config_hash: hash,
        checks,
        identities,
        dual_stability: Some(ds),
    })
}

pub fn cmd_verify(cfg: &RunConfig, out: Option<&Path>) -> Result<VerifyReport> {
    let started = unix_now();
    let report = run_verify(cfg)?;
    let dir = cfg.run_dir(out);
    fs::create_dir_all(&dir)?;
    write_json(&dir.join("verify.json"), &report)?;
    write_manifest(&dir, "verify", cfg, started)?;
    Ok(report)
}

/// `λ_min` along the computed solution at every slab endpoint.
pub fn run_spectrum(cfg: &RunConfig) -> Result<SpectrumTrace> {
    let (u, _) = run_solve(cfg)?;
    let times = u.partition.endpoints().to_vec();
    spectrum_along_solution(SpectrumSource::Solution(&u), &u.space, &times, cfg.epsilon, &EigenConfig::default())
}

pub fn cmd_spectrum(cfg: &RunConfig, out: Option<&Path>) -> Result<SpectrumTrace> {
    let started = unix_now();
    let trace = run_spectrum(cfg)?;
    let dir = cfg.run_dir(out);
    fs::create_dir_all(&dir)?;
    #[derive(Serialize)]
    struct Tagged<'a> {
        config_hash: String,
        #[serde(flatten)]
        trace: &'a SpectrumTrace,
    }
    write_json(
        &dir.join("spectrum.json"),
        &Tagged {
            config_hash: cfg.hash(),
            trace: &trace,
        },
    )?;
    write_manifest(&dir, "spectrum", cfg, started)?;
    Ok(trace)
}
