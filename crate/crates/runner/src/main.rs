use std::path::PathBuf;
use std::process::ExitCode;

use aggrates_runner::{cmd_rates, cmd_scenario, cmd_verify, verify, AppError, RatesOptions};
use aggrates_core::loss::DEFAULT_GRID_POINTS;
use clap::{Parser, Subcommand};

/// Aggregation-rate experiments for classifier dictionaries.
#[derive(Parser)]
#[command(name = "aggrates", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check loss certificates, risk identities and divergence formulas.
    Verify {
        /// Grid points on [-1, 1] for the convexity certificates.
        #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
        grid: usize,
        /// Certify LOSS with BETA instead of its stock constant (repeatable).
        #[arg(long = "beta", value_name = "LOSS=BETA")]
        beta: Vec<String>,
    },
    /// Run the experiment grid described by a config file.
    Rates {
        config: PathBuf,
        /// Master seed; overrides [seed] master.
        #[arg(long)]
        seed: Option<u64>,
        /// Where to write outputs (default: next to the config).
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Write a scenario (cube01, cube_convex:<h>, selector:<kappa>) to a file.
    Scenario {
        spec: String,
        out: PathBuf,
        #[arg(long = "M")]
        m: usize,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        h: Option<f64>,
    },
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.cmd {
        Cmd::Verify { grid, beta } => {
            let overrides = beta.iter().map(|b| verify::parse_beta_override(b)).collect::<Result<Vec<_>, _>>()?;
            print!("{}", cmd_verify(grid, &overrides)?);
        }
        Cmd::Rates { config, seed, out_dir } => {
            let summary = cmd_rates(&config, &RatesOptions { seed, out_dir })?;
            for (n, e) in &summary.skipped {
                eprintln!("skipped n = {n}: {e}");
            }
            println!("{} records", summary.records);
            for p in &summary.written {
                println!("wrote {}", p.display());
            }
        }
        Cmd::Scenario { spec, out, m, n, h } => {
            let s = cmd_scenario(&spec, &out, m, n, h)?;
            println!(
                "wrote {} ({} candidates, {} atoms each)",
                out.display(),
                s.candidates.len(),
                s.candidates[0].len()
            );
        }
    }
    Ok(())
}

/// Exit status for a finished command: 0 on success, 1 when a check or
/// run fails, 2 for usage and configuration errors.
fn exit_code(r: &Result<(), AppError>) -> u8 {
    match r {
        Ok(()) => 0,
        Err(e) => e.exit_code() as u8,
    }
}

fn main() -> ExitCode {
    let r = run(Cli::parse());
    match &r {
        Ok(()) => {}
        Err(AppError::Failed(report)) => print!("{report}"),
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(exit_code(&r))
}
