//! Experiment runner and command-line plumbing for `aggrates-core`: text
//! formats, configuration files, parallel grids, CSV/fit/SVG output and the
//! `verify`, `rates` and `scenario` commands.

pub mod config;
pub mod emit;
pub mod error;
pub mod format;
pub mod grid;
pub mod verify;

use std::path::{Path, PathBuf};

use aggrates_core::scenario::{build_hypercube_01, build_hypercube_convex, build_selector_scenario, h_for_selector_lower_bound};
use aggrates_core::{Scenario, ScenarioTemplate};

pub use error::{AppError, Result};

/// Runs the verification suite; `Err(Failed)` names the first failing check.
pub fn cmd_verify(grid: usize, overrides: &[(aggrates_core::LossSpec, f64)]) -> Result<String> {
    if grid < 2 {
        return Err(AppError::Usage("--grid needs at least 2 points".into()));
    }
    let checks = verify::run(grid, overrides);
    let report = verify::report(&checks);
    match checks.iter().find(|c| !c.passed) {
        None => Ok(report),
        Some(_) => Err(AppError::Failed(report)),
    }
}

#[derive(Debug, Clone, Default)]
pub struct RatesOptions {
    pub seed: Option<u64>,
    /// Directory for output files; defaults to the config file's directory.
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug)]
pub struct RatesSummary {
    pub records: usize,
    pub skipped: Vec<(usize, aggrates_core::Error)>,
    pub written: Vec<PathBuf>,
}

pub fn cmd_rates(config_path: &Path, opts: &RatesOptions) -> Result<RatesSummary> {
    let mut cfg = config::load(config_path)?;
    if let Some(seed) = opts.seed {
        cfg.plan.master_seed = seed;
    }
    let base = match &opts.out_dir {
        Some(d) => d.clone(),
        None => config_path.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    let threads = grid::effective_threads(cfg.threads)?;
    let outcome = grid::run_grid(&cfg.plan, threads)?;
    let series = emit::series(&outcome.records);
    let fits = emit::fits(&series);
    let mut written = Vec::new();
    let csv = base.join(&cfg.csv);
    emit::emit_csv(&outcome.records, &csv)?;
    written.push(csv);
    let fit = base.join(&cfg.fit);
    emit::emit_fit_report(&fits, &fit)?;
    written.push(fit);
    if let Some(svg) = &cfg.svg {
        let svg = base.join(svg);
        emit::emit_svg(&series, &svg)?;
        written.push(svg);
    }
    Ok(RatesSummary { records: outcome.records.len(), skipped: outcome.skipped, written })
}

/// Builds a scenario from its name and the `--M/--n/--h` options. The
/// selector family takes `h` directly, or derives it from `n` with the
/// lower-bound rule when only `n` is given.
pub fn build_named_scenario(name: &str, m: usize, n: Option<usize>, h: Option<f64>) -> Result<Scenario> {
    let need_n = || n.ok_or_else(|| AppError::Usage(format!("scenario `{name}` needs --n")));
    let s = match ScenarioTemplate::parse(name, m).map_err(|e| AppError::Usage(e.to_string()))? {
        ScenarioTemplate::Cube01 { m } => build_hypercube_01(m, need_n()?)?,
        ScenarioTemplate::CubeConvex { m, h } => build_hypercube_convex(m, need_n()?, h)?,
        ScenarioTemplate::Selector { m, kappa } => {
            let h = match (h, n) {
                (Some(h), _) => h,
                (None, Some(n)) => h_for_selector_lower_bound(m, n, kappa)?,
                (None, None) => return Err(AppError::Usage(format!("scenario `{name}` needs --h or --n"))),
            };
            build_selector_scenario(m, kappa, h)?
        }
    };
    Ok(s)
}

pub fn cmd_scenario(name: &str, out: &Path, m: usize, n: Option<usize>, h: Option<f64>) -> Result<Scenario> {
    let s = build_named_scenario(name, m, n, h)?;
    std::fs::write(out, format::scenario_to_string(&s)).map_err(|e| AppError::io(out, e))?;
    Ok(s)
}
