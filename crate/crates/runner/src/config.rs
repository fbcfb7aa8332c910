//! Experiment configuration: `key = value` lines grouped under `[section]`
//! headers, `#` comments, comma-separated lists.
//!
//! ```text
//! [scenario]
//! name = selector:2        # cube01 | cube_convex:<h> | selector:<kappa>
//! M = 4
//! h_rule = fixed:0.1       # fixed:<h> | selector_rule | perm_rule:<C>
//! [loss]
//! name = phi_h:2
//! [procedures]
//! list = erm, perm:zero, aew, caew:auto
//! [grid]
//! n = 64, 128, 256
//! replications = 20
//! threads = 0              # 0 = all cores
//! [output]
//! csv = results.csv
//! fit = fit.txt
//! svg = rates.svg          # optional
//! [seed]
//! master = 0
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use aggrates_core::{ExperimentPlan, HRule, LossSpec, Procedure, ScenarioTemplate};

use crate::error::{AppError, Result};

const KNOWN: &[(&str, &[&str])] = &[
    ("scenario", &["name", "M", "h", "h_rule"]),
    ("loss", &["name"]),
    ("procedures", &["list"]),
    ("grid", &["n", "replications", "threads"]),
    ("output", &["csv", "fit", "svg"]),
    ("seed", &["master"]),
];

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub plan: ExperimentPlan,
    /// Worker threads; 0 lets the pool pick.
    pub threads: usize,
    pub csv: PathBuf,
    pub fit: PathBuf,
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Default)]
struct Raw {
    entries: BTreeMap<(String, String), (usize, String)>,
}

impl Raw {
    fn get(&self, section: &str, key: &str) -> Option<(usize, &str)> {
        self.entries.get(&(section.into(), key.into())).map(|(l, v)| (*l, v.as_str()))
    }
}

pub fn load(path: &Path) -> Result<Config> {
    let text = std::fs::read_to_string(path).map_err(|e| AppError::Config {
        path: path.to_path_buf(),
        line: 0,
        msg: format!("cannot read config: {e}"),
    })?;
    parse(&text, path)
}

pub fn parse(text: &str, path: &Path) -> Result<Config> {
    let err = |line: usize, msg: String| AppError::Config { path: path.to_path_buf(), line, msg };
    let mut raw = Raw::default();
    let mut section: Option<String> = None;
    for (i, line) in text.lines().enumerate() {
        let no = i + 1;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = name.trim();
            if !KNOWN.iter().any(|(s, _)| *s == name) {
                return Err(err(no, format!("unknown section [{name}]")));
            }
            section = Some(name.to_string());
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(err(no, format!("expected `key = value`, found `{line}`")));
        };
        let (key, value) = (key.trim(), value.trim());
        let Some(sec) = section.as_deref() else {
            return Err(err(no, format!("key `{key}` appears before any [section]")));
        };
        let allowed = KNOWN.iter().find(|(s, _)| *s == sec).map(|(_, k)| *k).unwrap_or(&[]);
        if !allowed.contains(&key) {
            return Err(err(no, format!("unknown key `{key}` in [{sec}]")));
        }
        if raw.entries.insert((sec.into(), key.into()), (no, value.into())).is_some() {
            return Err(err(no, format!("duplicate key `{key}` in [{sec}]")));
        }
    }

    let required = |sec: &str, key: &str| {
        raw.get(sec, key).ok_or_else(|| err(0, format!("missing `{key}` in [{sec}]")))
    };
    let core = |line: usize| move |e: aggrates_core::Error| err(line, e.to_string());
    let int = |line: usize, v: &str| {
        v.parse::<usize>().map_err(|_| err(line, format!("`{v}` is not a non-negative integer")))
    };

    let (l, m) = required("scenario", "M")?;
    let m = int(l, m)?;
    let (l, name) = required("scenario", "name")?;
    let template = ScenarioTemplate::parse(name, m).map_err(core(l))?;
    let h_rule = match (raw.get("scenario", "h_rule"), raw.get("scenario", "h")) {
        (Some(_), Some((l, _))) => return Err(err(l, "give either `h` or `h_rule`, not both".into())),
        (Some((l, v)), None) | (None, Some((l, v))) => HRule::parse(v).map_err(core(l))?,
        (None, None) => HRule::SelectorRule,
    };
    let (l, loss) = required("loss", "name")?;
    let loss: LossSpec = loss.parse().map_err(core(l))?;
    let (l, list) = required("procedures", "list")?;
    let procedures = list
        .split(',')
        .map(|p| p.parse::<Procedure>().map_err(core(l)))
        .collect::<Result<Vec<_>>>()?;
    let (l, ns) = required("grid", "n")?;
    let ns = ns.split(',').map(|v| int(l, v.trim())).collect::<Result<Vec<_>>>()?;
    let (l, reps) = required("grid", "replications")?;
    let replications = int(l, reps)?;
    let threads = match raw.get("grid", "threads") {
        Some((l, v)) => int(l, v)?,
        None => 0,
    };
    let master_seed = match raw.get("seed", "master") {
        Some((l, v)) => v.parse().map_err(|_| err(l, format!("`{v}` is not a u64 seed")))?,
        None => 0,
    };
    let (_, csv) = required("output", "csv")?;
    let (_, fit) = required("output", "fit")?;
    let svg = raw.get("output", "svg").map(|(_, v)| PathBuf::from(v));

    let plan = ExperimentPlan { template, h_rule, loss, procedures, ns, replications, master_seed };
    let (first_line, _) = required("grid", "n")?;
    plan.validate().map_err(core(first_line))?;
    Ok(Config { plan, threads, csv: csv.into(), fit: fit.into(), svg })
}
