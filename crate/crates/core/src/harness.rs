//! Monte Carlo regret measurement: plans, single trials, aggregation of
//! regrets and log-log rate fits. IO and parallel execution live in the
//! `aggrates` crate; everything here is deterministic in its inputs.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::aggregation::{mixture_classifier, LossTable, Procedure};
use crate::distribution::{
    bayes_phi_risk, oracle_excess_given_bayes, phi_risk, Dictionary, FiniteJointDistribution,
    Sampler,
};
use crate::error::{Error, Result};
use crate::loss::LossSpec;
use crate::num::compensated_sum;
use crate::rng::{mix64, name_id};
use crate::scenario::{
    build_hypercube_01, build_hypercube_convex, build_selector_scenario,
    h_for_perm_lower_bound, h_for_selector_lower_bound, Scenario,
};

/// A scenario family whose members are built per sample size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScenarioTemplate {
    Cube01 { m: usize },
    CubeConvex { m: usize, h: f64 },
    Selector { m: usize, kappa: f64 },
}

impl ScenarioTemplate {
    /// Parses `cube01`, `cube_convex:<h>` or `selector:<kappa>`.
    pub fn parse(name: &str, m: usize) -> Result<Self> {
        let name = name.trim();
        let num = |s: &str| {
            s.parse::<f64>().map_err(|_| Error::Parse(format!("scenario `{name}`: bad number `{s}`")))
        };
        match name.split_once(':') {
            None if name == "cube01" => Ok(ScenarioTemplate::Cube01 { m }),
            Some(("cube_convex", h)) => Ok(ScenarioTemplate::CubeConvex { m, h: num(h)? }),
            Some(("selector", k)) => Ok(ScenarioTemplate::Selector { m, kappa: num(k)? }),
            _ => Err(Error::Parse(format!("unknown scenario `{name}`"))),
        }
    }

    pub fn m(&self) -> usize {
        match *self {
            ScenarioTemplate::Cube01 { m }
            | ScenarioTemplate::CubeConvex { m, .. }
            | ScenarioTemplate::Selector { m, .. } => m,
        }
    }

    /// Builds the member for sample size `n`. The `h` rule only applies to
    /// the selector family; the cubes derive their parameters from `n`.
    pub fn build(&self, n: usize, rule: &HRule) -> Result<Scenario> {
        match *self {
            ScenarioTemplate::Cube01 { m } => build_hypercube_01(m, n),
            ScenarioTemplate::CubeConvex { m, h } => build_hypercube_convex(m, n, h),
            ScenarioTemplate::Selector { m, kappa } => {
                build_selector_scenario(m, kappa, rule.resolve(m, n, kappa)?)
            }
        }
    }
}

impl fmt::Display for ScenarioTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioTemplate::Cube01 { .. } => f.write_str("cube01"),
            ScenarioTemplate::CubeConvex { h, .. } => write!(f, "cube_convex:{h}"),
            ScenarioTemplate::Selector { kappa, .. } => write!(f, "selector:{kappa}"),
        }
    }
}

/// How `h` is chosen for each `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HRule {
    Fixed(f64),
    /// `((log M)/n)^{(κ−1)/(2κ−1)}`.
    SelectorRule,
    /// `(C²(log M)/n)^{(κ−1)/(2κ)}`.
    PermRule(f64),
}

impl HRule {
    pub fn resolve(&self, m: usize, n: usize, kappa: f64) -> Result<f64> {
        match *self {
            HRule::Fixed(h) => Ok(h),
            HRule::SelectorRule => h_for_selector_lower_bound(m, n, kappa),
            HRule::PermRule(c) => h_for_perm_lower_bound(m, n, kappa, c),
        }
    }

    /// `fixed:<h>`, `selector_rule` or `perm_rule:<C>`; a bare number is
    /// read as a fixed `h`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let num = |v: &str| v.parse::<f64>().map_err(|_| Error::Parse(format!("h rule `{s}`: bad number")));
        match s.split_once(':') {
            None if s == "selector_rule" => Ok(HRule::SelectorRule),
            None => Ok(HRule::Fixed(num(s)?)),
            Some(("fixed", h)) => Ok(HRule::Fixed(num(h)?)),
            Some(("perm_rule", c)) => Ok(HRule::PermRule(num(c)?)),
            _ => Err(Error::Parse(format!("unknown h rule `{s}`"))),
        }
    }
}

impl fmt::Display for HRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HRule::Fixed(h) => write!(f, "fixed:{h}"),
            HRule::SelectorRule => f.write_str("selector_rule"),
            HRule::PermRule(c) => write!(f, "perm_rule:{c}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub template: ScenarioTemplate,
    pub h_rule: HRule,
    pub loss: LossSpec,
    pub procedures: Vec<Procedure>,
    pub ns: Vec<usize>,
    pub replications: usize,
    pub master_seed: u64,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        self.loss.validate()?;
        if self.ns.is_empty() || self.ns[0] == 0 || self.ns.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::InvalidRegime(format!(
                "n values must be positive and strictly increasing, got {:?}",
                self.ns
            )));
        }
        if self.replications == 0 {
            return Err(Error::InvalidRegime("replications must be at least 1".into()));
        }
        if self.procedures.is_empty() {
            return Err(Error::InvalidRegime("no procedures".into()));
        }
        for p in &self.procedures {
            if let Procedure::Caew(t) = p {
                t.resolve(&self.loss)?;
            }
        }
        Ok(())
    }

    /// Trial seed `mix64(master, [candidate, procedure id, n, rep])`; the
    /// procedure id hashes the procedure's name, so seeds do not depend on
    /// the position of the procedure in the plan.
    pub fn trial_seed(&self, candidate: usize, procedure: &Procedure, n: usize, rep: usize) -> u64 {
        trial_seed(self.master_seed, candidate, procedure, n, rep)
    }
}

pub fn trial_seed(master: u64, candidate: usize, procedure: &Procedure, n: usize, rep: usize) -> u64 {
    mix64(
        master,
        &[candidate as u64, name_id(&procedure.to_string()), n as u64, rep as u64],
    )
}

/// One Monte Carlo draw of `A(f̂) − A* − min_j (A(f_j) − A*)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretRecord {
    pub scenario: String,
    pub candidate: usize,
    pub procedure: String,
    pub loss: String,
    pub m: usize,
    pub n: usize,
    pub rep: usize,
    pub seed: u64,
    pub regret: f64,
    pub oracle_excess: f64,
    pub bayes_risk: f64,
}

/// Everything about one (distribution, dictionary, loss) triple that does
/// not change across trials.
#[derive(Debug, Clone)]
pub struct TrialSetup<'a> {
    pub scenario: String,
    pub candidate: usize,
    dist: &'a FiniteJointDistribution,
    dict: &'a Dictionary,
    loss: LossSpec,
    sampler: Sampler,
    table: LossTable,
    bayes_risk: f64,
    oracle_excess: f64,
}

impl<'a> TrialSetup<'a> {
    pub fn new(
        scenario: &str,
        candidate: usize,
        dist: &'a FiniteJointDistribution,
        dict: &'a Dictionary,
        loss: &LossSpec,
    ) -> Result<Self> {
        loss.validate()?;
        if dict.support_len() != dist.len() {
            return Err(Error::Alignment { expected: dist.len(), found: dict.support_len() });
        }
        let bayes_risk = bayes_phi_risk(dist, loss).0;
        let (oracle_excess, _) = oracle_excess_given_bayes(dist, dict, loss, bayes_risk)?;
        Ok(Self {
            scenario: scenario.into(),
            candidate,
            dist,
            dict,
            loss: *loss,
            sampler: Sampler::new(dist),
            table: LossTable::new(dict, loss),
            bayes_risk,
            oracle_excess,
        })
    }

    pub fn bayes_risk(&self) -> f64 {
        self.bayes_risk
    }

    pub fn oracle_excess(&self) -> f64 {
        self.oracle_excess
    }

    pub fn run(&self, procedure: &Procedure, n: usize, rep: usize, seed: u64) -> Result<RegretRecord> {
        let data = self.sampler.sample(n, seed)?;
        let w = self.table.fit(procedure, &data, &self.loss)?;
        let f = mixture_classifier(self.dict, &w)?;
        let risk = phi_risk(self.dist, &f, &self.loss)?;
        Ok(RegretRecord {
            scenario: self.scenario.clone(),
            candidate: self.candidate,
            procedure: procedure.to_string(),
            loss: self.loss.to_string(),
            m: self.dict.len(),
            n,
            rep,
            seed,
            regret: risk - self.bayes_risk - self.oracle_excess,
            oracle_excess: self.oracle_excess,
            bayes_risk: self.bayes_risk,
        })
    }
}

/// A single trial from scratch; prefer [`TrialSetup`] when repeating.
pub fn run_trial(
    dist: &FiniteJointDistribution,
    dict: &Dictionary,
    loss: &LossSpec,
    procedure: &Procedure,
    n: usize,
    seed: u64,
) -> Result<RegretRecord> {
    TrialSetup::new("adhoc", 0, dist, dict, loss)?.run(procedure, n, 0, seed)
}

/// Runs every trial of `plan` for one sample size on an already built
/// scenario, in the canonical order procedure → candidate → replication.
pub fn run_point(plan: &ExperimentPlan, scenario: &Scenario, n: usize) -> Result<Vec<RegretRecord>> {
    let setups = scenario
        .candidates
        .iter()
        .enumerate()
        .map(|(c, dist)| TrialSetup::new(&scenario.name, c, dist, &scenario.dict, &plan.loss))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(plan.procedures.len() * setups.len() * plan.replications);
    for p in &plan.procedures {
        for s in &setups {
            for rep in 0..plan.replications {
                out.push(s.run(p, n, rep, plan.trial_seed(s.candidate, p, n, rep))?);
            }
        }
    }
    Ok(out)
}

/// Sequential grid run: records for every `n` in order, and the per-point
/// builder errors (which do not stop the grid).
pub fn run_grid_sequential(plan: &ExperimentPlan) -> Result<(Vec<RegretRecord>, Vec<(usize, Error)>)> {
    plan.validate()?;
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for &n in &plan.ns {
        match plan.template.build(n, &plan.h_rule) {
            Ok(s) => records.extend(run_point(plan, &s, n)?),
            Err(e @ (Error::InvalidRegime(_) | Error::SupportTooLarge { .. })) => skipped.push((n, e)),
            Err(e) => return Err(e),
        }
    }
    Ok((records, skipped))
}

/// Field of a [`RegretRecord`] to group on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKey {
    Scenario,
    Candidate,
    Procedure,
    Loss,
    M,
    N,
}

impl GroupKey {
    fn extract(&self, r: &RegretRecord) -> String {
        match self {
            GroupKey::Scenario => r.scenario.clone(),
            GroupKey::Candidate => r.candidate.to_string(),
            GroupKey::Procedure => r.procedure.clone(),
            GroupKey::Loss => r.loss.clone(),
            GroupKey::M => r.m.to_string(),
            GroupKey::N => r.n.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupStat {
    pub key: Vec<String>,
    pub mean: f64,
    /// Standard error of the mean; 0 for a single record.
    pub std_error: f64,
    pub count: usize,
}

/// Mean and standard error of the regret per group, groups in order of
/// first appearance.
pub fn aggregate_mean_regret(records: &[RegretRecord], keys: &[GroupKey]) -> Result<Vec<GroupStat>> {
    if records.is_empty() {
        return Err(Error::EmptyGroup);
    }
    let mut groups: Vec<(Vec<String>, Vec<f64>)> = Vec::new();
    for r in records {
        let key: Vec<String> = keys.iter().map(|k| k.extract(r)).collect();
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(r.regret),
            None => groups.push((key, alloc::vec![r.regret])),
        }
    }
    Ok(groups.into_iter().map(|(key, v)| summarize(key, &v)).collect())
}

fn summarize(key: Vec<String>, v: &[f64]) -> GroupStat {
    let count = v.len();
    let mean = compensated_sum(v.iter().copied()) / count as f64;
    let std_error = if count < 2 {
        0.0
    } else {
        let ss = compensated_sum(v.iter().map(|x| (x - mean) * (x - mean)));
        libm::sqrt(ss / (count - 1) as f64 / count as f64)
    };
    GroupStat { key, mean, std_error, count }
}

/// Worst candidate (largest mean regret) per (procedure, n).
#[derive(Debug, Clone, PartialEq)]
pub struct WorstPoint {
    pub procedure: String,
    pub n: usize,
    pub candidate: usize,
    pub mean: f64,
    pub std_error: f64,
    pub count: usize,
}

pub fn worst_candidate(records: &[RegretRecord]) -> Result<Vec<WorstPoint>> {
    let stats =
        aggregate_mean_regret(records, &[GroupKey::Procedure, GroupKey::N, GroupKey::Candidate])?;
    let mut out: Vec<WorstPoint> = Vec::new();
    for s in stats {
        let n: usize = s.key[1].parse().expect("n keys are integers");
        let candidate: usize = s.key[2].parse().expect("candidate keys are integers");
        let point = WorstPoint {
            procedure: s.key[0].clone(),
            n,
            candidate,
            mean: s.mean,
            std_error: s.std_error,
            count: s.count,
        };
        match out.iter_mut().find(|p| p.procedure == point.procedure && p.n == n) {
            Some(p) if point.mean > p.mean => *p = point,
            Some(_) => {}
            None => out.push(point),
        }
    }
    Ok(out)
}

/// Least-squares fit of `log mean = intercept + slope·log n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points_used: usize,
}

pub fn fit_rate(ns: &[usize], means: &[f64]) -> Result<RateFit> {
    if ns.len() != means.len() {
        return Err(Error::Alignment { expected: ns.len(), found: means.len() });
    }
    if ns.len() < 3 {
        return Err(Error::TooFewPoints { needed: 3, found: ns.len() });
    }
    if let Some((index, &value)) = means.iter().enumerate().find(|(_, &m)| !(m > 0.0)) {
        return Err(Error::NonPositiveMean { index, value });
    }
    let xs: Vec<f64> = ns.iter().map(|&n| libm::log(n as f64)).collect();
    let ys: Vec<f64> = means.iter().map(|&m| libm::log(m)).collect();
    let k = xs.len() as f64;
    let mx = compensated_sum(xs.iter().copied()) / k;
    let my = compensated_sum(ys.iter().copied()) / k;
    let sxx = compensated_sum(xs.iter().map(|x| (x - mx) * (x - mx)));
    let sxy = compensated_sum(xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)));
    let syy = compensated_sum(ys.iter().map(|y| (y - my) * (y - my)));
    if sxx == 0.0 {
        return Err(Error::InvalidRegime("all n values coincide".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(RateFit { slope, intercept: my - slope * mx, r_squared, points_used: xs.len() })
}
