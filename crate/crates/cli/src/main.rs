use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use cosserat_cli::commands::{self, require_pass};
use cosserat_cli::{exit_code, ScenarioConfig};
use cosserat_core::VerificationReport;

#[derive(Debug, Parser)]
#[command(
    name = "cosserat",
    version,
    about = "Planar Cosserat elasticity toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Scenario file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the equations of motion and record energies and snapshots.
    Simulate(Common),
    /// Sweep the plane-wave dispersion relation.
    Dispersion {
        #[command(flatten)]
        common: Common,
        /// Also write SVG plots.
        #[arg(long)]
        svg: bool,
    },
    /// Homogeneous rotation solutions and their residuals.
    Homogeneous(Common),
    /// Run every identity check; exit 3 if any fails.
    Verify(Common),
    /// Check the reductions of the three-dimensional kinematics.
    Reduce3d(Common),
}

fn print_report(rep: &VerificationReport) {
    for c in &rep.checks {
        let status = match &c.status {
            cosserat_core::CheckStatus::Pass => "pass".to_string(),
            cosserat_core::CheckStatus::Fail => "FAIL".to_string(),
            cosserat_core::CheckStatus::Skipped(r) => format!("skipped ({r})"),
        };
        println!(
            "{:<44} {:>12.3e} <= {:>9.1e}  {status}",
            c.name, c.max_abs_error, c.tolerance
        );
    }
    for n in &rep.notes {
        println!("note: {n}");
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(c) => {
            let cfg = ScenarioConfig::load(&c.config)?;
            let s = commands::simulate(&cfg, &c.out)?;
            println!(
                "{} steps, total energy {:.6e} -> {:.6e} (relative drift {:.3e})",
                s.steps,
                s.initial.total(),
                s.last.total(),
                s.relative_drift()
            );
        }
        Command::Dispersion { common: c, svg } => {
            let cfg = ScenarioConfig::load(&c.config)?;
            let s = commands::dispersion(&cfg, &c.out, svg)?;
            println!(
                "{} wavenumbers, {} to {} branches each, vt = {:.12e}, vl = {:.12e}",
                s.wavenumbers, s.min_branches, s.max_branches, s.vt, s.vl
            );
            for k in &s.no_real_branch {
                println!("no real branch at k = {k:e}");
            }
            println!("note: real limiting speeds require A^2 < mu_c (lambda + 2 mu)");
        }
        Command::Homogeneous(c) => {
            let cfg = ScenarioConfig::load(&c.config)?;
            let roots = commands::homogeneous(&cfg, &c.out)?;
            println!("{}", serde_json::to_string_pretty(&roots)?);
        }
        Command::Verify(c) => {
            let cfg = ScenarioConfig::load(&c.config)?;
            let rep = commands::verify(&cfg, &c.out)?;
            print_report(&rep);
            require_pass(&rep)?;
        }
        Command::Reduce3d(c) => {
            let cfg = ScenarioConfig::load(&c.config)?;
            let rep = commands::reduce3d(&cfg, &c.out)?;
            print_report(&rep);
            require_pass(&rep)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
