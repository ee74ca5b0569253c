use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hm3d_cli::commands;
use hm3d_cli::{CliError, Result};

#[derive(Parser)]
#[command(name = "hm3d", version, about = "Viscous 3D Hasegawa-Mima solver, audits and experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Run configuration (key = value with [section] headers)
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`
    #[arg(long)]
    output: Option<PathBuf>,
    /// Campaign seed; overrides `campaign.seed`
    #[arg(long)]
    seed: Option<u64>,
    /// Exit with status 3 when an audit fails
    #[arg(long)]
    strict: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate and write time series, final checkpoint and audits
    Run(Common),
    /// Galerkin self-convergence over `convergence.radii`
    Convergence(Common),
    /// Growth of the distance between perturbed runs
    ContinuousDependence(Common),
    /// Audit a written time series
    Audit {
        #[command(flatten)]
        common: Common,
        /// Time series to audit; defaults to the run's own output
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// Randomized inequality sweeps
    Inequalities(Common),
    /// Print the resolved configuration
    Info(Common),
}

fn load(c: &Common) -> Result<hm3d_cli::RunConfig> {
    let mut cfg = commands::load_config(&c.config, c.seed)?;
    if let Some(o) = &c.output {
        cfg.output_dir = o.clone();
    }
    Ok(cfg)
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(c) => {
            let out = commands::cmd_run(&load(&c)?, c.strict)?;
            for check in &out.audit.checks {
                println!(
                    "{:<32} {} residual {:.3e} (tolerance {:.1e})",
                    check.name,
                    if check.informational { "info" } else if check.passed { "pass" } else { "FAIL" },
                    check.max_residual,
                    check.tolerance
                );
            }
            println!("max CFL {:.4}, final time {}", out.max_cfl, out.final_state.time);
        }
        Command::Convergence(c) => {
            let out = commands::cmd_convergence(&load(&c)?)?;
            for l in &out.report.levels {
                println!("m = {:>3}  |w_m - w_2m| = {:.3e}  |u_m - u_2m| = {:.3e}", l.m, l.w_diff, l.u_diff);
            }
            match out.decays {
                Some(_) => println!("reduction factors {:?}", out.report.reduction_factors()),
                None => println!("profile outside the analytic class: reported only"),
            }
        }
        Command::ContinuousDependence(c) => {
            let r = commands::cmd_continuous_dependence(&load(&c)?)?;
            for run in &r.runs {
                println!("delta {:.1e}  rate {:.6}  excess {:.3e}", run.delta, run.rate, run.max_excess);
            }
            println!("rate spread {:.3e}", r.rate_spread());
        }
        Command::Audit { common, trajectory } => {
            let r = commands::cmd_audit(&load(&common)?, trajectory.as_deref())?;
            println!("{} checks passed", r.checks.len());
        }
        Command::Inequalities(c) => {
            let out = commands::cmd_inequalities(&load(&c)?)?;
            for (kind, fit) in &out.fits {
                println!(
                    "{:<14} n = {:>6}  max {:.6e}  median {:.6e}  p99 {:.6e}",
                    kind.as_str(),
                    fit.count,
                    fit.max,
                    fit.median,
                    fit.p99
                );
            }
        }
        Command::Info(c) => print!("{}", commands::cmd_info(&load(&c)?)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(CliError::exit_code(&e))
        }
    }
}
