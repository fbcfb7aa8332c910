//! Plain-text formats for distributions, datasets and scenario dumps.
//!
//! A distribution is a `K=<atoms>` line followed by one `<id> <prob> <eta>`
//! line per atom. A dataset is one `<atom index> <label>` line per
//! observation, labels written `1` or `-1`. Blank lines and `#` comments are
//! ignored on input. Reals are written with the shortest representation that
//! reads back to the same `f64`.

use std::fmt::Write as _;

use aggrates_core::distribution::Observation;
use aggrates_core::{Dataset, Error, FiniteJointDistribution, Label, Scenario};

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("line {line}: {msg}"))
}

pub fn write_distribution(out: &mut String, dist: &FiniteJointDistribution) {
    let _ = writeln!(out, "K={}", dist.len());
    for ((id, p), e) in dist.atom_ids().iter().zip(dist.probs()).zip(dist.eta()) {
        let _ = writeln!(out, "{id} {p} {e}");
    }
}

pub fn distribution_to_string(dist: &FiniteJointDistribution) -> String {
    let mut s = String::new();
    write_distribution(&mut s, dist);
    s
}

pub fn parse_distribution(text: &str) -> Result<FiniteJointDistribution, Error> {
    let mut lines = content_lines(text);
    let (first, header) = lines.next().ok_or_else(|| Error::Parse("empty distribution".into()))?;
    let k: usize = header
        .strip_prefix("K=")
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| parse_err(first, format!("expected `K=<atoms>`, found `{header}`")))?;
    let (mut ids, mut probs, mut eta) = (Vec::with_capacity(k), Vec::with_capacity(k), Vec::with_capacity(k));
    for (no, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [id, p, e] = fields[..] else {
            return Err(parse_err(no, "expected `<id> <prob> <eta>`"));
        };
        let num = |v: &str| v.parse::<f64>().map_err(|_| parse_err(no, format!("`{v}` is not a number")));
        ids.push(id.to_string());
        probs.push(num(p)?);
        eta.push(num(e)?);
    }
    if ids.len() != k {
        return Err(Error::Parse(format!("header declares {k} atoms, found {}", ids.len())));
    }
    FiniteJointDistribution::new(ids, probs, eta)
}

pub fn dataset_to_string(data: &Dataset) -> String {
    let mut s = String::new();
    for r in data.records() {
        let _ = writeln!(s, "{} {}", r.atom, r.label);
    }
    s
}

pub fn parse_dataset(text: &str) -> Result<Dataset, Error> {
    let records = content_lines(text)
        .map(|(no, line)| {
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [atom, label] = fields[..] else {
                return Err(parse_err(no, "expected `<atom index> <label>`"));
            };
            let atom = atom.parse().map_err(|_| parse_err(no, format!("bad atom index `{atom}`")))?;
            let label = match label {
                "1" | "+1" => Label::Pos,
                "-1" => Label::Neg,
                other => return Err(parse_err(no, format!("label must be 1 or -1, found `{other}`"))),
            };
            Ok(Observation::new(atom, label))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Dataset::new(records)
}

fn join(values: impl IntoIterator<Item = f64>) -> String {
    values.into_iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

/// Full dump: header comments with the parameters, one distribution block
/// per candidate, the dictionary (one member per line) and the diagnostics.
pub fn scenario_to_string(s: &Scenario) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# scenario {}", s.name);
    let _ = writeln!(out, "# loss {}", s.loss_hint);
    for (k, v) in &s.params {
        let _ = writeln!(out, "# {k} = {v}");
    }
    for (i, c) in s.candidates.iter().enumerate() {
        let _ = writeln!(out, "\n[candidate {i}]");
        write_distribution(&mut out, c);
    }
    let _ = writeln!(out, "\n[dictionary]");
    let _ = writeln!(out, "M={}", s.dict.len());
    for f in s.dict.members() {
        let _ = writeln!(out, "{}", join(f.values().iter().copied()));
    }
    let d = &s.diagnostics;
    let _ = writeln!(out, "\n[diagnostics]");
    let _ = writeln!(out, "oracle_excess = {}", join(d.oracle_excess_per_candidate.iter().copied()));
    for (i, row) in d.member_excess.iter().enumerate() {
        let _ = writeln!(out, "member_excess.{i} = {}", join(row.iter().copied()));
    }
    if let Some(h) = d.pairwise_hellinger_sq {
        let _ = writeln!(out, "pairwise_hellinger_sq = {h}");
    }
    if let Some(k) = d.kl_bound {
        let _ = writeln!(out, "kl_bound_per_observation = {k}");
    }
    if let Some(ok) = d.margin_ok {
        let _ = writeln!(out, "margin_ok = {ok}");
    }
    out
}

/// Splits a scenario dump back into its candidate distributions.
pub fn parse_scenario_candidates(text: &str) -> Result<Vec<FiniteJointDistribution>, Error> {
    let mut out = Vec::new();
    let mut block: Option<String> = None;
    for line in text.lines() {
        let t = line.trim();
        if t.starts_with('[') {
            if let Some(b) = block.take() {
                out.push(parse_distribution(&b)?);
            }
            if t.starts_with("[candidate") {
                block = Some(String::new());
            }
        } else if let Some(b) = block.as_mut() {
            b.push_str(line);
            b.push('\n');
        }
    }
    if let Some(b) = block {
        out.push(parse_distribution(&b)?);
    }
    Ok(out)
}
