//! Finite-support joint distributions of `(X, Y)`, classifiers over their
//! support, samples, and exact risk computations.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::loss::{clip_unit, LossSpec};
use crate::num::compensated_sum;
use crate::rng::SplitMix64;

/// Tolerance on the total mass of a distribution.
pub const MASS_TOL: f64 = 1e-12;

/// Largest support the exhaustive margin-assumption check enumerates.
pub const MARGIN_CHECK_MAX_ATOMS: usize = 20;

/// Largest support any construction may enumerate.
pub const MAX_ATOMS: usize = 1 << 17;

/// Marginal `P^X` over `K` labelled atoms together with `η(x) = P(Y = 1 | X = x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteJointDistribution {
    atom_ids: Vec<String>,
    probs: Vec<f64>,
    eta: Vec<f64>,
}

impl FiniteJointDistribution {
    pub fn new(atom_ids: Vec<String>, probs: Vec<f64>, eta: Vec<f64>) -> Result<Self> {
        let k = atom_ids.len();
        if k == 0 {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        if k > MAX_ATOMS {
            return Err(Error::SupportTooLarge { atoms: k, limit: MAX_ATOMS });
        }
        if probs.len() != k {
            return Err(Error::Alignment { expected: k, found: probs.len() });
        }
        if eta.len() != k {
            return Err(Error::Alignment { expected: k, found: eta.len() });
        }
        let mut seen = BTreeSet::new();
        for id in &atom_ids {
            if id.is_empty() || id.chars().any(char::is_whitespace) {
                return Err(Error::InvalidDistribution(format!(
                    "atom id `{id}` must be non-empty and free of whitespace"
                )));
            }
            if !seen.insert(id.as_str()) {
                return Err(Error::InvalidDistribution(format!("duplicate atom id `{id}`")));
            }
        }
        if let Some((i, p)) = probs.iter().enumerate().find(|(_, p)| !(**p >= 0.0 && p.is_finite())) {
            return Err(Error::InvalidDistribution(format!("probability {p} at atom {i}")));
        }
        if let Some((i, e)) = eta.iter().enumerate().find(|(_, e)| !(0.0..=1.0).contains(*e)) {
            return Err(Error::InvalidDistribution(format!("eta {e} at atom {i} outside [0, 1]")));
        }
        let total = compensated_sum(probs.iter().copied());
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidDistribution(format!("probabilities sum to {total}")));
        }
        Ok(Self { atom_ids, probs, eta })
    }

    /// Atoms named `x1, …, xK`.
    pub fn with_numbered_atoms(probs: Vec<f64>, eta: Vec<f64>) -> Result<Self> {
        let ids = (1..=probs.len()).map(|i| format!("x{i}")).collect();
        Self::new(ids, probs, eta)
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn atom_ids(&self) -> &[String] {
        &self.atom_ids
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    /// Mass of the joint atom `(x, y)`.
    pub fn joint_mass(&self, atom: usize, label: Label) -> f64 {
        match label {
            Label::Pos => self.probs[atom] * self.eta[atom],
            Label::Neg => self.probs[atom] * (1.0 - self.eta[atom]),
        }
    }

    /// Bayes classifier `sign(2η − 1)` with ties resolved to `+1`.
    pub fn bayes_sign(&self) -> Classifier {
        Classifier {
            values: self.eta.iter().map(|&e| sign_tie_pos(2.0 * e - 1.0)).collect(),
        }
    }

    fn check_aligned(&self, k: usize) -> Result<()> {
        if k == self.len() {
            Ok(())
        } else {
            Err(Error::Alignment { expected: self.len(), found: k })
        }
    }
}

/// `sign(x)` with `sign(0) = +1`.
pub fn sign_tie_pos(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// A real-valued classifier over an enumerated support, valued in `[−1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Classifier {
    values: Vec<f64>,
}

impl Classifier {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(-1.0..=1.0).contains(*v)) {
            return Err(Error::InvalidClassifier(format!("value {v} at atom {i} outside [-1, 1]")));
        }
        Ok(Self { values })
    }

    /// The classifier equal to `c` everywhere.
    pub fn constant(c: f64, k: usize) -> Result<Self> {
        Self::new(alloc::vec![c; k])
    }

    pub(crate) fn from_clamped(values: Vec<f64>) -> Self {
        Self { values: values.into_iter().map(clip_unit).collect() }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_sign_valued(&self) -> bool {
        self.values.iter().all(|&v| v == 1.0 || v == -1.0)
    }
}

/// An ordered list of `M ≥ 2` classifiers over a shared support.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    members: Vec<Classifier>,
}

impl Dictionary {
    pub fn new(members: Vec<Classifier>) -> Result<Self> {
        if members.len() < 2 {
            return Err(Error::InvalidClassifier(format!(
                "a dictionary needs at least two members, got {}",
                members.len()
            )));
        }
        let k = members[0].len();
        if let Some(m) = members.iter().find(|m| m.len() != k) {
            return Err(Error::Alignment { expected: k, found: m.len() });
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[Classifier] {
        &self.members
    }

    /// Number of members `M`.
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Size `K` of the shared support.
    pub fn support_len(&self) -> usize {
        self.members[0].len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Neg,
    Pos,
}

impl Label {
    pub fn sign(self) -> f64 {
        match self {
            Label::Pos => 1.0,
            Label::Neg => -1.0,
        }
    }

    pub fn from_sign(y: i64) -> Result<Self> {
        match y {
            1 => Ok(Label::Pos),
            -1 => Ok(Label::Neg),
            _ => Err(Error::InvalidDataset(format!("label must be -1 or +1, got {y}"))),
        }
    }

    /// 0 for `−1`, 1 for `+1`; the column of the joint-atom tables.
    #[inline]
    pub(crate) fn slot(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Observation {
    pub atom: usize,
    pub label: Label,
}

/// A sample `D_n` of `n ≥ 1` observations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    records: Vec<Observation>,
}

impl Dataset {
    pub fn new(records: Vec<Observation>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::InvalidDataset("a dataset needs at least one record".into()));
        }
        Ok(Self { records })
    }

    pub fn records(&self) -> &[Observation] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// The first `k` observations.
    pub fn prefix(&self, k: usize) -> Result<Self> {
        Self::new(self.records[..k.min(self.len())].to_vec())
    }

    pub(crate) fn check_support(&self, k: usize) -> Result<()> {
        match self.records.iter().find(|r| r.atom >= k) {
            Some(r) => Err(Error::InvalidDataset(format!(
                "atom index {} out of range for support of size {k}",
                r.atom
            ))),
            None => Ok(()),
        }
    }

    /// Count of each joint atom, indexed `2·atom + label slot`.
    pub(crate) fn joint_counts(&self, k: usize) -> Vec<u64> {
        let mut counts = alloc::vec![0u64; 2 * k];
        for r in &self.records {
            counts[2 * r.atom + r.label.slot()] += 1;
        }
        counts
    }
}

/// Margin assumption parameters `(κ, c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginSpec {
    pub kappa: f64,
    pub c: f64,
}

impl MarginSpec {
    pub fn new(kappa: f64, c: f64) -> Result<Self> {
        if !(kappa >= 1.0) || !(c > 0.0) {
            return Err(Error::InvalidRegime(format!(
                "margin assumption needs kappa >= 1 and c > 0, got kappa = {kappa}, c = {c}"
            )));
        }
        Ok(Self { kappa, c })
    }
}

/// Pointwise conditional risk `η·φ(α) + (1 − η)·φ(−α)`.
#[inline]
fn conditional_risk(loss: &LossSpec, eta: f64, alpha: f64) -> f64 {
    eta * loss.eval(alpha) + (1.0 - eta) * loss.eval(-alpha)
}

/// `A^φ(f) = Σ_x P(x)·[η(x)φ(f(x)) + (1 − η(x))φ(−f(x))]`.
pub fn phi_risk(dist: &FiniteJointDistribution, f: &Classifier, loss: &LossSpec) -> Result<f64> {
    dist.check_aligned(f.len())?;
    Ok(dist
        .probs
        .iter()
        .zip(&dist.eta)
        .zip(&f.values)
        .map(|((&p, &e), &v)| p * conditional_risk(loss, e, v))
        .sum())
}

/// Step of the grid used when no closed-form minimizer is available.
pub const BAYES_GRID_STEP: f64 = 1e-4;

/// Minimizer over `[−1, 1]` of the conditional risk at a point with
/// conditional probability `eta`.
pub fn pointwise_bayes(loss: &LossSpec, eta: f64) -> f64 {
    match *loss {
        LossSpec::ZeroOne | LossSpec::Hinge => sign_tie_pos(2.0 * eta - 1.0),
        LossSpec::PhiH(h) if h <= 1.0 => sign_tie_pos(2.0 * eta - 1.0),
        LossSpec::PhiH(h) => clip_unit((2.0 * eta - 1.0) / (2.0 * (h - 1.0))),
        LossSpec::Squared => clip_unit(2.0 * eta - 1.0),
        LossSpec::Logit | LossSpec::Exp | LossSpec::SoftMargin2 => grid_then_ternary(loss, eta),
    }
}

fn grid_then_ternary(loss: &LossSpec, eta: f64) -> f64 {
    let steps = libm::round(2.0 / BAYES_GRID_STEP) as usize;
    let mut best = (f64::INFINITY, -1.0);
    for i in 0..=steps {
        let a = -1.0 + 2.0 * (i as f64) / (steps as f64);
        let v = conditional_risk(loss, eta, a);
        if v < best.0 {
            best = (v, a);
        }
    }
    if !loss.is_convex() {
        return best.1;
    }
    let mut lo = (best.1 - BAYES_GRID_STEP).max(-1.0);
    let mut hi = (best.1 + BAYES_GRID_STEP).min(1.0);
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if conditional_risk(loss, eta, m1) <= conditional_risk(loss, eta, m2) {
            hi = m2;
        } else {
            lo = m1;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let a = 0.5 * (lo + hi);
    if conditional_risk(loss, eta, a) <= best.0 {
        a
    } else {
        best.1
    }
}

/// `(A*_φ, f*)` where `f*` minimizes the conditional risk pointwise over
/// `[−1, 1]`.
pub fn bayes_phi_risk(dist: &FiniteJointDistribution, loss: &LossSpec) -> (f64, Classifier) {
    // Constructions reuse a handful of η values across many atoms.
    let mut cache: Vec<(u64, f64)> = Vec::new();
    let mut values = Vec::with_capacity(dist.len());
    for &e in &dist.eta {
        let alpha = match cache.iter().find(|(bits, _)| *bits == e.to_bits()) {
            Some(&(_, a)) => a,
            None => {
                let a = pointwise_bayes(loss, e);
                if cache.len() < 64 {
                    cache.push((e.to_bits(), a));
                }
                a
            }
        };
        values.push(alpha);
    }
    let f = Classifier { values };
    let risk = phi_risk(dist, &f, loss).expect("aligned by construction");
    (risk, f)
}

/// `A^φ(f) − A*_φ`.
pub fn excess_risk(dist: &FiniteJointDistribution, f: &Classifier, loss: &LossSpec) -> Result<f64> {
    let risk = phi_risk(dist, f, loss)?;
    Ok(risk - bayes_phi_risk(dist, loss).0)
}

/// Smallest excess risk over the dictionary and its index (lowest on ties).
pub fn oracle_excess(
    dist: &FiniteJointDistribution,
    dict: &Dictionary,
    loss: &LossSpec,
) -> Result<(f64, usize)> {
    let bayes = bayes_phi_risk(dist, loss).0;
    oracle_excess_given_bayes(dist, dict, loss, bayes)
}

pub(crate) fn oracle_excess_given_bayes(
    dist: &FiniteJointDistribution,
    dict: &Dictionary,
    loss: &LossSpec,
    bayes: f64,
) -> Result<(f64, usize)> {
    let mut best = (f64::INFINITY, 0);
    for (j, f) in dict.members.iter().enumerate() {
        let ex = phi_risk(dist, f, loss)? - bayes;
        if ex < best.0 {
            best = (ex, j);
        }
    }
    Ok(best)
}

/// Sums `value × count` over distinct values in ascending order, so that
/// equal multisets of per-sample losses give bitwise-equal totals no matter
/// the order the samples arrived in.
pub(crate) fn grouped_sum(mut pairs: Vec<(f64, u64)>) -> f64 {
    pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    let mut total = 0.0;
    let mut i = 0;
    while i < pairs.len() {
        let v = pairs[i].0;
        let mut c = 0u64;
        while i < pairs.len() && pairs[i].0.to_bits() == v.to_bits() {
            c += pairs[i].1;
            i += 1;
        }
        total += v * c as f64;
    }
    total
}

/// `n·A_n^φ(f)`, the cumulative loss over the sample.
pub fn cumulative_loss(data: &Dataset, f: &Classifier, loss: &LossSpec) -> Result<f64> {
    data.check_support(f.len())?;
    let pairs = data
        .records
        .iter()
        .map(|r| (loss.eval(r.label.sign() * f.values[r.atom]), 1))
        .collect();
    Ok(grouped_sum(pairs))
}

/// `A_n^φ(f) = (1/n)·Σ φ(Y_i f(X_i))`.
pub fn empirical_phi_risk(data: &Dataset, f: &Classifier, loss: &LossSpec) -> Result<f64> {
    Ok(cumulative_loss(data, f, loss)? / data.len() as f64)
}

/// Inverse-CDF sampler over the joint support.
#[derive(Debug, Clone)]
pub struct Sampler {
    cdf: Vec<f64>,
    eta: Vec<f64>,
    last_positive: usize,
}

impl Sampler {
    pub fn new(dist: &FiniteJointDistribution) -> Self {
        let mut acc = 0.0;
        let cdf = dist
            .probs
            .iter()
            .map(|&p| {
                acc += p;
                acc
            })
            .collect();
        let last_positive = dist.probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        Self { cdf, eta: dist.eta.clone(), last_positive }
    }

    pub fn draw(&self, rng: &mut SplitMix64) -> Observation {
        let u = rng.next_f64();
        let mut atom = self.cdf.partition_point(|&c| c <= u);
        if atom >= self.cdf.len() {
            atom = self.last_positive;
        }
        let label = if rng.next_f64() < self.eta[atom] { Label::Pos } else { Label::Neg };
        Observation { atom, label }
    }

    pub fn sample(&self, n: usize, seed: u64) -> Result<Dataset> {
        let mut rng = SplitMix64::new(seed);
        Dataset::new((0..n).map(|_| self.draw(&mut rng)).collect())
    }
}

/// `n` i.i.d. draws from `dist`; a pure function of `(dist, n, seed)`.
pub fn sample(dist: &FiniteJointDistribution, n: usize, seed: u64) -> Result<Dataset> {
    Sampler::new(dist).sample(n, seed)
}

/// Slack used when comparing margins and masses against the grid.
const NOISE_TOL: f64 = 1e-12;

/// Whether `P[|2η(X) − 1| ≤ t] ≤ t^{1/(κ−1)}` for every `t` in `t_grid`.
pub fn noise_exponent_check(
    dist: &FiniteJointDistribution,
    kappa: f64,
    t_grid: &[f64],
) -> Result<bool> {
    if !(kappa > 1.0) {
        return Err(Error::InvalidRegime(format!("noise exponent check needs kappa > 1, got {kappa}")));
    }
    let exponent = 1.0 / (kappa - 1.0);
    for &t in t_grid {
        let mass = compensated_sum(
            dist.probs
                .iter()
                .zip(&dist.eta)
                .filter(|(_, &e)| (2.0 * e - 1.0).abs() <= t + NOISE_TOL)
                .map(|(&p, _)| p),
        );
        if mass > libm::pow(t, exponent) + NOISE_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `t = 0.001, 0.002, …, 0.999`.
pub fn default_t_grid() -> Vec<f64> {
    (1..1000).map(|i| i as f64 / 1000.0).collect()
}

/// Exhaustive check of `E|f − f*| ≤ c·(A_0(f) − A_0*)^{1/κ}` over every
/// sign-valued `f ≠ f*`. Returns whether the declared `c` suffices and the
/// smallest constant that would; functions with zero excess are skipped.
pub fn margin_assumption_check(
    dist: &FiniteJointDistribution,
    spec: &MarginSpec,
) -> Result<(bool, f64)> {
    let k = dist.len();
    if k > MARGIN_CHECK_MAX_ATOMS {
        return Err(Error::SupportTooLarge { atoms: k, limit: MARGIN_CHECK_MAX_ATOMS });
    }
    // Flipping f away from f* on a set S costs 2·P(S) in E|f − f*| and
    // Σ_S P(x)|2η(x) − 1| in excess 0-1 risk.
    let dist_gain: Vec<f64> = dist.probs.iter().map(|p| 2.0 * p).collect();
    let excess_gain: Vec<f64> =
        dist.probs.iter().zip(&dist.eta).map(|(p, e)| p * (2.0 * e - 1.0).abs()).collect();
    let mut worst = 0.0_f64;
    for mask in 1u32..(1u32 << k) {
        let mut d = 0.0;
        let mut ex = 0.0;
        let mut bits = mask;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            d += dist_gain[i];
            ex += excess_gain[i];
            bits &= bits - 1;
        }
        if ex <= 0.0 {
            continue;
        }
        worst = worst.max(d / libm::pow(ex, 1.0 / spec.kappa));
    }
    Ok((worst <= spec.c, worst))
}

impl core::fmt::Display for Label {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            Label::Pos => "1",
            Label::Neg => "-1",
        })
    }
}

impl Observation {
    pub fn new(atom: usize, label: Label) -> Self {
        Self { atom, label }
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn single(eta: f64) -> FiniteJointDistribution {
        FiniteJointDistribution::with_numbered_atoms(vec![1.0], vec![eta]).unwrap()
    }

    #[test]
    fn construction_rejects_bad_inputs() {
        let d = FiniteJointDistribution::with_numbered_atoms;
        assert!(d(vec![0.5, 0.6], vec![0.5, 0.5]).is_err());
        assert!(d(vec![0.5, 0.5], vec![0.5, 1.5]).is_err());
        assert!(d(vec![1.5, -0.5], vec![0.5, 0.5]).is_err());
        assert!(d(vec![], vec![]).is_err());
        assert!(FiniteJointDistribution::new(
            vec!["a".into(), "a".into()],
            vec![0.5, 0.5],
            vec![0.0, 1.0]
        )
        .is_err());
        assert!(Classifier::new(vec![1.5]).is_err());
        assert!(Dictionary::new(vec![Classifier::new(vec![1.0]).unwrap()]).is_err());
    }

    #[test]
    fn phi_risk_examples() {
        let one = Classifier::new(vec![1.0]).unwrap();
        assert_eq!(phi_risk(&single(1.0), &one, &LossSpec::Hinge).unwrap(), 0.0);
        assert_eq!(phi_risk(&single(0.5), &one, &LossSpec::ZeroOne).unwrap(), 0.5);
        let two = Classifier::new(vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            phi_risk(&single(0.5), &two, &LossSpec::ZeroOne),
            Err(Error::Alignment { .. })
        ));
    }

    #[test]
    fn bayes_examples() {
        let d = FiniteJointDistribution::with_numbered_atoms(vec![0.5, 0.5], vec![1.0, 0.0]).unwrap();
        let (risk, f) = bayes_phi_risk(&d, &LossSpec::ZeroOne);
        assert_eq!(risk, 0.0);
        assert_eq!(f.values(), &[1.0, -1.0]);

        let (risk, f) = bayes_phi_risk(&single(0.75), &LossSpec::phi_h(2.0).unwrap());
        assert_eq!(f.values(), &[0.25]);
        assert!((risk - 0.9375).abs() < 1e-15);

        let (risk, f) = bayes_phi_risk(&single(0.6), &LossSpec::Hinge);
        assert_eq!(f.values(), &[1.0]);
        assert!((risk - 0.8).abs() < 1e-15);

        // ties resolve to +1
        let (_, f) = bayes_phi_risk(&single(0.5), &LossSpec::ZeroOne);
        assert_eq!(f.values(), &[1.0]);
    }

    #[test]
    fn grid_minimizer_matches_analytic_forms() {
        // exp: α* = ½·ln(η/(1−η)); logit: α* = ln(η/(1−η)); soft margin: 2η − 1.
        for &eta in &[0.05, 0.3, 0.5, 0.62, 0.8, 0.97] {
            let odds = libm::log(eta / (1.0 - eta));
            let cases = [
                (LossSpec::Exp, clip_unit(0.5 * odds)),
                (LossSpec::Logit, clip_unit(odds)),
                (LossSpec::SoftMargin2, 2.0 * eta - 1.0),
            ];
            for (loss, expected) in cases {
                let a = pointwise_bayes(&loss, eta);
                assert!((a - expected).abs() < 1e-6, "{loss} η={eta}: {a} vs {expected}");
            }
        }
    }

    #[test]
    fn empirical_risk_examples() {
        let f = Classifier::new(vec![1.0, -1.0]).unwrap();
        let data = Dataset::new(vec![
            Observation::new(0, Label::Pos),
            Observation::new(1, Label::Neg),
        ])
        .unwrap();
        assert_eq!(empirical_phi_risk(&data, &f, &LossSpec::Hinge).unwrap(), 0.0);

        let data = Dataset::new(vec![
            Observation::new(0, Label::Pos),
            Observation::new(0, Label::Neg),
        ])
        .unwrap();
        assert_eq!(empirical_phi_risk(&data, &f, &LossSpec::ZeroOne).unwrap(), 0.5);

        let bad = Dataset::new(vec![Observation::new(5, Label::Pos)]).unwrap();
        assert!(empirical_phi_risk(&bad, &f, &LossSpec::Hinge).is_err());
    }

    #[test]
    fn grouped_sum_ignores_order() {
        let a = vec![(0.1, 1), (0.7, 1), (0.1, 1), (0.3, 1)];
        let b = vec![(0.3, 1), (0.1, 2), (0.7, 1)];
        assert_eq!(grouped_sum(a).to_bits(), grouped_sum(b).to_bits());
    }

    #[test]
    fn sample_examples() {
        let d = FiniteJointDistribution::with_numbered_atoms(vec![0.25, 0.75], vec![1.0, 1.0]).unwrap();
        let data = sample(&d, 500, 3).unwrap();
        assert!(data.records().iter().all(|r| r.label == Label::Pos));
        let data = sample(&single(0.3), 200, 3).unwrap();
        assert!(data.records().iter().all(|r| r.atom == 0));
        assert_eq!(sample(&d, 100, 9).unwrap(), sample(&d, 100, 9).unwrap());
        assert_ne!(sample(&d, 100, 9).unwrap(), sample(&d, 100, 10).unwrap());
    }

    #[test]
    fn zero_mass_atoms_are_never_drawn() {
        let d = FiniteJointDistribution::with_numbered_atoms(vec![0.5, 0.0, 0.5, 0.0], vec![0.5; 4])
            .unwrap();
        let data = sample(&d, 5000, 1).unwrap();
        assert!(data.records().iter().all(|r| r.atom == 0 || r.atom == 2));
    }

    #[test]
    fn sample_frequencies_within_binomial_bands() {
        let probs = vec![0.1, 0.2, 0.3, 0.4];
        let d = FiniteJointDistribution::with_numbered_atoms(probs.clone(), vec![0.3; 4]).unwrap();
        let n = 100_000;
        let data = sample(&d, n, 12345).unwrap();
        let mut counts = [0usize; 4];
        let mut pos = 0usize;
        for r in data.records() {
            counts[r.atom] += 1;
            pos += (r.label == Label::Pos) as usize;
        }
        for (c, p) in counts.iter().zip(&probs) {
            let sd = libm::sqrt(n as f64 * p * (1.0 - p));
            assert!((*c as f64 - n as f64 * p).abs() <= 4.0 * sd);
        }
        let sd = libm::sqrt(n as f64 * 0.3 * 0.7);
        assert!((pos as f64 - 0.3 * n as f64).abs() <= 4.0 * sd);
    }

    #[test]
    fn noise_exponent_examples() {
        let grid = default_t_grid();
        let half = FiniteJointDistribution::with_numbered_atoms(vec![0.5, 0.5], vec![0.5, 0.5]).unwrap();
        assert!(!noise_exponent_check(&half, 2.0, &grid).unwrap());
        let sure = FiniteJointDistribution::with_numbered_atoms(vec![0.5, 0.5], vec![1.0, 1.0]).unwrap();
        for kappa in [1.01, 2.0, 50.0] {
            assert!(noise_exponent_check(&sure, kappa, &grid).unwrap());
        }
        assert!(noise_exponent_check(&sure, 1.0, &grid).is_err());
    }

    /// Brute force over every sign function on a tiny support: no shortcut
    /// through the subset sums.
    fn worst_c_brute(dist: &FiniteJointDistribution, kappa: f64) -> f64 {
        let k = dist.len();
        let fstar = dist.bayes_sign();
        let a0star = phi_risk(dist, &fstar, &LossSpec::ZeroOne).unwrap();
        let mut worst = 0.0_f64;
        for mask in 0u32..(1 << k) {
            let f = Classifier::new(
                (0..k).map(|i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 }).collect(),
            )
            .unwrap();
            if f == fstar {
                continue;
            }
            let ex = phi_risk(dist, &f, &LossSpec::ZeroOne).unwrap() - a0star;
            if ex <= 1e-15 {
                continue;
            }
            let d: f64 = (0..k)
                .map(|i| dist.probs()[i] * (f.values()[i] - fstar.values()[i]).abs())
                .sum();
            worst = worst.max(d / libm::pow(ex, 1.0 / kappa));
        }
        worst
    }

    #[test]
    fn margin_check_noiseless_kappa_one() {
        let d = FiniteJointDistribution::with_numbered_atoms(
            vec![0.1, 0.2, 0.3, 0.4],
            vec![1.0, 0.0, 1.0, 0.0],
        )
        .unwrap();
        let (ok, c) = margin_assumption_check(&d, &MarginSpec::new(1.0, 2.0).unwrap()).unwrap();
        assert!(ok);
        assert!((c - 2.0).abs() < 1e-12);
        assert!((c - worst_c_brute(&d, 1.0)).abs() < 1e-12);
    }

    #[test]
    fn margin_constant_grows_as_noise_vanishes() {
        let mut last = 0.0;
        for h in [0.5, 0.2, 0.1, 0.01] {
            let d = FiniteJointDistribution::with_numbered_atoms(
                vec![0.25; 4],
                vec![0.5 + h / 2.0; 4],
            )
            .unwrap();
            let (_, c) = margin_assumption_check(&d, &MarginSpec::new(1.0, 1.0).unwrap()).unwrap();
            assert!((c - worst_c_brute(&d, 1.0)).abs() < 1e-9 * c);
            assert!((c - 2.0 / h).abs() < 1e-9 * c);
            assert!(c > last);
            last = c;
        }
    }

    #[test]
    fn margin_check_caps_support() {
        let k = MARGIN_CHECK_MAX_ATOMS + 1;
        let d = FiniteJointDistribution::with_numbered_atoms(vec![1.0 / k as f64; k], vec![1.0; k])
            .unwrap();
        assert!(matches!(
            margin_assumption_check(&d, &MarginSpec::new(1.0, 1.0).unwrap()),
            Err(Error::SupportTooLarge { .. })
        ));
    }
}
