//! Parallel execution of an experiment grid.
//!
//! Every trial's seed is derived from its coordinates, and results are
//! collected in the canonical order n → procedure → candidate → replication,
//! so output is bit-identical for any thread count.

use aggrates_core::harness::{RegretRecord, TrialSetup};
use aggrates_core::{Error, ExperimentPlan, Scenario};
use rayon::prelude::*;

use crate::error::{AppError, Result};

/// Environment variable that overrides the configured thread count.
pub const THREADS_ENV: &str = "AGGRATES_THREADS";

/// Thread count after applying the `AGGRATES_THREADS` override.
pub fn effective_threads(configured: usize) -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| AppError::Usage(format!("{THREADS_ENV}={v} is not a thread count"))),
        Err(_) => Ok(configured),
    }
}

#[derive(Debug, Default)]
pub struct GridOutcome {
    pub records: Vec<RegretRecord>,
    /// Grid points whose scenario could not be built, with the reason.
    pub skipped: Vec<(usize, Error)>,
}

pub fn run_grid(plan: &ExperimentPlan, threads: usize) -> Result<GridOutcome> {
    plan.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| AppError::Failed(format!("cannot start thread pool: {e}")))?;
    pool.install(|| run_in_pool(plan))
}

fn run_in_pool(plan: &ExperimentPlan) -> Result<GridOutcome> {
    let built: Vec<(usize, Result<Scenario, Error>)> =
        plan.ns.par_iter().map(|&n| (n, plan.template.build(n, &plan.h_rule))).collect();

    let mut outcome = GridOutcome::default();
    let mut points: Vec<(usize, Scenario)> = Vec::new();
    for (n, s) in built {
        match s {
            Ok(s) => points.push((n, s)),
            Err(e @ (Error::InvalidRegime(_) | Error::SupportTooLarge { .. })) => {
                outcome.skipped.push((n, e))
            }
            Err(e) => return Err(e.into()),
        }
    }

    let setups: Vec<Vec<TrialSetup<'_>>> = points
        .par_iter()
        .map(|(_, s)| {
            s.candidates
                .iter()
                .enumerate()
                .map(|(c, d)| TrialSetup::new(&s.name, c, d, &s.dict, &plan.loss))
                .collect::<Result<Vec<_>, Error>>()
        })
        .collect::<Result<_, Error>>()?;

    let reps = plan.replications;
    let mut tasks = Vec::new();
    for (pi, (n, _)) in points.iter().enumerate() {
        for proc in &plan.procedures {
            for c in 0..setups[pi].len() {
                for rep in 0..reps {
                    tasks.push((pi, *n, proc, c, rep));
                }
            }
        }
    }
    outcome.records = tasks
        .into_par_iter()
        .map(|(pi, n, proc, c, rep)| {
            setups[pi][c].run(proc, n, rep, plan.trial_seed(c, proc, n, rep))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(outcome)
}
