use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use acdg::experiments::{
    cmd_convergence, cmd_solve, cmd_spectrum, cmd_stability_sweep, cmd_verify, error_json, exit_code_for, Refine,
    RunConfig, EXIT_IDENTITY, EXIT_OK, EXIT_SOLVER,
};
use acdg::Error;

#[derive(Parser)]
#[command(name = "acdg", version, about = "Space-time dG solver for the Allen-Cahn equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// JSON run configuration
    #[arg(long)]
    config: PathBuf,
    /// Output root; overrides `output.directory`
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Forward solve, checkpoint and norms
    Solve(Common),
    /// Refinement ladder with observed orders
    Convergence {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        #[arg(long, value_enum, default_value = "both")]
        refine: Refine,
    },
    /// Norms and scaled norms over a descending list of epsilons
    StabilitySweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', required = true)]
        epsilons: Vec<f64>,
    },
    /// Discrete identity checks
    Verify(Common),
    /// Smallest eigenvalue of the linearized operator along the solution
    Spectrum(Common),
}

fn load(common: &Common) -> Result<RunConfig, Error> {
    RunConfig::from_path(&common.config)
}

/// The error estimates ask for `τ + h ≲ δ ε⁴` with an unknown constant; report the numbers only.
fn guidance(cfg: &RunConfig) {
    let h = 1.0 / cfg.resolution() as f64;
    let tau = cfg.time.final_time / cfg.time.n_slabs as f64;
    eprintln!(
        "note: tau + h = {:.3e}, eps^4 = {:.3e} (mesh-size condition involves an unknown constant; not enforced)",
        tau + h,
        cfg.epsilon.powi(4)
    );
}

fn fail(e: &Error) -> ExitCode {
    println!("{}", error_json(e));
    ExitCode::from(exit_code_for(e) as u8)
}

fn out(common: &Common) -> Option<&Path> {
    common.out.as_deref()
}

fn run(cli: Cli) -> Result<i32, Error> {
    match cli.command {
        Command::Solve(c) => {
            let cfg = load(&c)?;
            guidance(&cfg);
            let r = cmd_solve(&cfg, out(&c))?;
            println!("{}", serde_json::to_string(&r.row)?);
            eprintln!("wrote {}", r.run_dir.display());
            Ok(EXIT_OK)
        }
        Command::Convergence { common, levels, refine } => {
            let cfg = load(&common)?;
            guidance(&cfg);
            let t = cmd_convergence(&cfg, out(&common), levels, refine)?;
            for r in &t.rows {
                println!(
                    "level {} n={} N={} LinfL2={:.4e} L2H1={:.4e} order_X={}",
                    r.level,
                    r.n,
                    r.n_slabs,
                    r.linf_l2,
                    r.l2h1,
                    r.order_x.map_or("-".into(), |o| format!("{o:.3}"))
                );
            }
            Ok(EXIT_OK)
        }
        Command::StabilitySweep { common, epsilons } => {
            let cfg = load(&common)?;
            let s = cmd_stability_sweep(&cfg, out(&common), &epsilons)?;
            for r in &s.rows {
                println!(
                    "eps={} status={} scaled_l2l2={:.4e} scaled_x={:.4e}",
                    r.epsilon, r.status, r.scaled_l2l2, r.scaled_x
                );
            }
            Ok(if s.failures > 0 { EXIT_SOLVER } else { EXIT_OK })
        }
        Command::Verify(c) => {
            let cfg = load(&c)?;
            let report = cmd_verify(&cfg, out(&c))?;
            for ch in &report.checks {
                println!(
                    "{:<28} {:?} residual={} threshold={} {}",
                    ch.name,
                    ch.status,
                    ch.residual.map_or("-".into(), |r| format!("{r:.3e}")),
                    ch.threshold.map_or("-".into(), |r| format!("{r:.0e}")),
                    ch.detail
                );
            }
            if report.passed() {
                Ok(EXIT_OK)
            } else {
                println!(
                    "{}",
                    serde_json::json!({
                        "error": "identity_failure",
                        "message": format!("failing identities: {}", report.failing().join(", ")),
                        "failing": report.failing(),
                        "exit_code": EXIT_IDENTITY,
                    })
                );
                Ok(EXIT_IDENTITY)
            }
        }
        Command::Spectrum(c) => {
            let cfg = load(&c)?;
            let t = cmd_spectrum(&cfg, out(&c))?;
            let min = t.lambda_min.iter().cloned().fold(f64::INFINITY, f64::min);
            println!("min lambda_min = {min:.6e}, min lambda_min * eps^2 = {:.4e}", min * cfg.epsilon.powi(2));
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => fail(&e),
    }
}
