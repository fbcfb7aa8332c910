//! ERM, penalized ERM, exponential weights (AEW) and cumulative exponential
//! weights (CAEW), all returning convex weights over a dictionary.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::distribution::{grouped_sum, Classifier, Dataset, Dictionary};
use crate::error::{Error, Result};
use crate::loss::LossSpec;
use crate::num::compensated_sum;

/// Tolerance on the total of a weight vector.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Upper end (exclusive) of the admissible penalty constant, `√2/3`.
pub const MAX_PENALTY_CONSTANT: f64 = core::f64::consts::SQRT_2 / 3.0;

/// Nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    weights: Vec<f64>,
}

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidWeights("empty".into()));
        }
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !(**w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidWeights(format!("weight {w} at index {i}")));
        }
        let total = compensated_sum(weights.iter().copied());
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidWeights(format!("weights sum to {total}")));
        }
        Ok(Self { weights })
    }

    pub fn one_hot(m: usize, index: usize) -> Self {
        let mut weights = vec![0.0; m];
        weights[index] = 1.0;
        Self { weights }
    }

    pub fn uniform(m: usize) -> Self {
        Self { weights: vec![1.0 / m as f64; m] }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// The index carrying all the mass, if any.
    pub fn selected(&self) -> Option<usize> {
        self.weights.iter().position(|&w| w == 1.0)
    }
}

/// Penalty added to the empirical risk by penalized ERM.
#[derive(Debug, Clone, PartialEq)]
pub enum PenaltySpec {
    Zero,
    /// `pen(f) = C·√((log M)/n)` for every member, `0 ≤ C < √2/3`.
    ConstantScaled { c: f64 },
    /// Per-member values, each required to satisfy `|pen(f)| ≤ C·√((log M)/n)`.
    Explicit { values: Vec<f64>, c: f64 },
}

impl PenaltySpec {
    pub fn constant_scaled(c: f64) -> Result<Self> {
        check_penalty_constant(c)?;
        Ok(PenaltySpec::ConstantScaled { c })
    }

    /// Resolves the per-member penalties for a dictionary of size `m` and a
    /// sample of size `n`.
    pub fn values(&self, m: usize, n: usize) -> Result<Vec<f64>> {
        let scale = libm::sqrt(libm::log(m as f64) / n as f64);
        match self {
            PenaltySpec::Zero => Ok(vec![0.0; m]),
            PenaltySpec::ConstantScaled { c } => {
                check_penalty_constant(*c)?;
                Ok(vec![c * scale; m])
            }
            PenaltySpec::Explicit { values, c } => {
                if values.len() != m {
                    return Err(Error::Alignment { expected: m, found: values.len() });
                }
                let bound = c * scale;
                match values.iter().enumerate().find(|(_, v)| !(v.abs() <= bound)) {
                    Some((index, &value)) => Err(Error::PenaltyOutOfRange { index, value, bound }),
                    None => Ok(values.clone()),
                }
            }
        }
    }
}

fn check_penalty_constant(c: f64) -> Result<()> {
    if (0.0..MAX_PENALTY_CONSTANT).contains(&c) {
        Ok(())
    } else {
        Err(Error::InvalidRegime(format!(
            "penalty constant must lie in [0, sqrt(2)/3), got {c}"
        )))
    }
}

/// Temperature of CAEW: either explicit or the loss's convexity constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Temperature {
    Fixed(f64),
    Auto,
}

impl Temperature {
    pub fn resolve(&self, loss: &LossSpec) -> Result<f64> {
        let t = match *self {
            Temperature::Fixed(t) => t,
            Temperature::Auto => loss.beta().ok_or_else(|| {
                Error::InvalidRegime(format!("loss {loss} has no convexity constant for caew:auto"))
            })?,
        };
        if t > 0.0 && t.is_finite() {
            Ok(t)
        } else {
            Err(Error::InvalidRegime(format!("temperature must be positive, got {t}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Procedure {
    Erm,
    PenalizedErm(PenaltySpec),
    Aew,
    Caew(Temperature),
}

impl Procedure {
    /// Whether the procedure always returns a dictionary member.
    pub fn is_selector(&self) -> bool {
        matches!(self, Procedure::Erm | Procedure::PenalizedErm(_))
    }
}

/// Per-member losses on each joint atom `(x, y)`, laid out atom-major:
/// entry `(2x + slot(y))·M + j` holds `φ(y·f_j(x))`.
#[derive(Debug, Clone)]
pub struct LossTable {
    m: usize,
    k: usize,
    values: Vec<f64>,
}

impl LossTable {
    pub fn new(dict: &Dictionary, loss: &LossSpec) -> Self {
        let m = dict.len();
        let k = dict.support_len();
        let mut values = vec![0.0; 2 * k * m];
        for (j, f) in dict.members().iter().enumerate() {
            for (x, &v) in f.values().iter().enumerate() {
                values[(2 * x) * m + j] = loss.eval(-v);
                values[(2 * x + 1) * m + j] = loss.eval(v);
            }
        }
        Self { m, k, values }
    }

    pub fn members(&self) -> usize {
        self.m
    }

    #[inline]
    fn row(&self, cell: usize) -> &[f64] {
        &self.values[cell * self.m..(cell + 1) * self.m]
    }

    /// `n·A_n^φ(f_j)` for every member, grouped by loss value.
    pub fn cumulative_losses(&self, data: &Dataset) -> Result<Vec<f64>> {
        data.check_support(self.k)?;
        let counts = data.joint_counts(self.k);
        let occupied: Vec<(usize, u64)> =
            counts.iter().enumerate().filter(|(_, &c)| c > 0).map(|(i, &c)| (i, c)).collect();
        Ok((0..self.m)
            .map(|j| grouped_sum(occupied.iter().map(|&(cell, c)| (self.row(cell)[j], c)).collect()))
            .collect())
    }

    /// Index minimizing `A_n^φ(f_j) + pen_j`, lowest index on exact ties.
    pub fn penalized_argmin(&self, data: &Dataset, pen: &PenaltySpec) -> Result<usize> {
        let n = data.len();
        let pen = pen.values(self.m, n)?;
        let totals = self.cumulative_losses(data)?;
        let mut best = (f64::INFINITY, 0);
        for (j, (s, p)) in totals.iter().zip(&pen).enumerate() {
            let score = s / n as f64 + p;
            if score < best.0 {
                best = (score, j);
            }
        }
        Ok(best.1)
    }

    /// Weights `∝ exp(−S_n(f)/temperature)`.
    pub fn exponential_weights(&self, data: &Dataset, temperature: f64) -> Result<WeightVector> {
        let totals = self.cumulative_losses(data)?;
        let logits: Vec<f64> = totals.iter().map(|s| -s / temperature).collect();
        Ok(WeightVector { weights: softmax(&logits) })
    }

    /// Average over `k = 1..n` of the exponential weights built on the first
    /// `k` observations.
    pub fn cumulative_exponential_weights(
        &self,
        data: &Dataset,
        temperature: f64,
    ) -> Result<WeightVector> {
        data.check_support(self.k)?;
        let m = self.m;
        let inv_t = 1.0 / temperature;
        let mut running = vec![0.0; m];
        let mut acc = vec![0.0; m];
        let mut scratch = vec![0.0; m];
        for r in data.records() {
            let row = self.row(2 * r.atom + r.label.slot());
            let mut lo = f64::INFINITY;
            for (s, l) in running.iter_mut().zip(row) {
                *s += l;
                lo = lo.min(*s);
            }
            let mut z = 0.0;
            for (e, s) in scratch.iter_mut().zip(&running) {
                *e = libm::exp(-(s - lo) * inv_t);
                z += *e;
            }
            for (a, e) in acc.iter_mut().zip(&scratch) {
                *a += e / z;
            }
        }
        let total: f64 = acc.iter().sum();
        Ok(WeightVector { weights: acc.into_iter().map(|a| a / total).collect() })
    }

    /// Runs `procedure` on `data`.
    pub fn fit(&self, procedure: &Procedure, data: &Dataset, loss: &LossSpec) -> Result<WeightVector> {
        match procedure {
            Procedure::Erm => {
                Ok(WeightVector::one_hot(self.m, self.penalized_argmin(data, &PenaltySpec::Zero)?))
            }
            Procedure::PenalizedErm(pen) => {
                Ok(WeightVector::one_hot(self.m, self.penalized_argmin(data, pen)?))
            }
            Procedure::Aew => self.exponential_weights(data, 1.0),
            Procedure::Caew(t) => self.cumulative_exponential_weights(data, t.resolve(loss)?),
        }
    }
}

/// Normalized `exp(l_j − max l)`.
fn softmax(logits: &[f64]) -> Vec<f64> {
    let hi = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|l| libm::exp(l - hi)).collect();
    let z: f64 = e.iter().sum();
    e.into_iter().map(|v| v / z).collect()
}

/// Empirical risk minimizer (lowest index on ties) and its one-hot weights.
pub fn erm(data: &Dataset, dict: &Dictionary, loss: &LossSpec) -> Result<(usize, WeightVector)> {
    penalized_erm(data, dict, loss, &PenaltySpec::Zero)
}

pub fn penalized_erm(
    data: &Dataset,
    dict: &Dictionary,
    loss: &LossSpec,
    pen: &PenaltySpec,
) -> Result<(usize, WeightVector)> {
    let j = LossTable::new(dict, loss).penalized_argmin(data, pen)?;
    Ok((j, WeightVector::one_hot(dict.len(), j)))
}

/// `w(f) ∝ exp(−n·A_n^φ(f))`.
pub fn aew_weights(data: &Dataset, dict: &Dictionary, loss: &LossSpec) -> Result<WeightVector> {
    LossTable::new(dict, loss).exponential_weights(data, 1.0)
}

/// `(1/n)·Σ_k softmax(−S_k/β)` with `S_k` the cumulative losses after `k`
/// observations.
pub fn caew_weights(
    data: &Dataset,
    dict: &Dictionary,
    loss: &LossSpec,
    temperature: f64,
) -> Result<WeightVector> {
    let t = Temperature::Fixed(temperature).resolve(loss)?;
    LossTable::new(dict, loss).cumulative_exponential_weights(data, t)
}

/// Pointwise mixture `Σ_j w_j·f_j`.
pub fn mixture_classifier(dict: &Dictionary, w: &WeightVector) -> Result<Classifier> {
    if w.len() != dict.len() {
        return Err(Error::Alignment { expected: dict.len(), found: w.len() });
    }
    let mut values = vec![0.0; dict.support_len()];
    for (f, &wj) in dict.members().iter().zip(&w.weights) {
        if wj == 0.0 {
            continue;
        }
        for (acc, v) in values.iter_mut().zip(f.values()) {
            *acc += wj * v;
        }
    }
    Ok(Classifier::from_clamped(values))
}

impl fmt::Display for PenaltySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PenaltySpec::Zero => f.write_str("zero"),
            PenaltySpec::ConstantScaled { c } => write!(f, "constant_scaled:{c}"),
            PenaltySpec::Explicit { c, .. } => write!(f, "explicit:{c}"),
        }
    }
}

impl fmt::Display for Procedure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Procedure::Erm => f.write_str("erm"),
            Procedure::PenalizedErm(p) => write!(f, "perm:{p}"),
            Procedure::Aew => f.write_str("aew"),
            Procedure::Caew(Temperature::Auto) => f.write_str("caew:auto"),
            Procedure::Caew(Temperature::Fixed(t)) => write!(f, "caew:{t}"),
        }
    }
}

impl FromStr for Procedure {
    type Err = Error;

    /// `erm`, `aew`, `caew:<temperature|auto>`, `perm:zero`,
    /// `perm:constant_scaled:<C>`. Explicit penalties need values and are
    /// only available through the API.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |why: &str| Error::Parse(format!("procedure `{s}`: {why}"));
        let mut parts = s.split(':');
        let head = parts.next().unwrap_or_default();
        let rest: Vec<&str> = parts.collect();
        match (head, rest.as_slice()) {
            ("erm", []) => Ok(Procedure::Erm),
            ("aew", []) => Ok(Procedure::Aew),
            ("caew", ["auto"]) => Ok(Procedure::Caew(Temperature::Auto)),
            ("caew", [t]) => {
                let t: f64 = t.parse().map_err(|_| bad("temperature is not a number"))?;
                if !(t > 0.0 && t.is_finite()) {
                    return Err(bad("temperature must be positive"));
                }
                Ok(Procedure::Caew(Temperature::Fixed(t)))
            }
            ("perm", ["zero"]) => Ok(Procedure::PenalizedErm(PenaltySpec::Zero)),
            ("perm", ["constant_scaled", c]) => {
                let c: f64 = c.parse().map_err(|_| bad("penalty constant is not a number"))?;
                Ok(Procedure::PenalizedErm(
                    PenaltySpec::constant_scaled(c).map_err(|e| bad(&format_err(&e)))?,
                ))
            }
            ("perm", ["explicit", ..]) => Err(bad("explicit penalties cannot be named")),
            _ => Err(bad("unknown procedure")),
        }
    }
}

fn format_err(e: &Error) -> String {
    format!("{e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::{phi_risk, FiniteJointDistribution, Label, Observation};
    use crate::rng::SplitMix64;
    use alloc::string::ToString;
    use proptest::prelude::*;

    fn obs(atom: usize, y: i64) -> Observation {
        Observation::new(atom, Label::from_sign(y).unwrap())
    }

    fn dict(rows: &[&[f64]]) -> Dictionary {
        Dictionary::new(rows.iter().map(|r| Classifier::new(r.to_vec()).unwrap()).collect()).unwrap()
    }

    /// A one-atom, positive-label dataset where member j's per-sample hinge
    /// loss is `1 − f_j`, so losses can be dialled in directly.
    fn loss_table_data(per_member_loss: &[f64], n: usize) -> (Dataset, Dictionary) {
        let rows: Vec<Vec<f64>> = per_member_loss.iter().map(|l| vec![1.0 - l]).collect();
        let d = Dictionary::new(rows.into_iter().map(|r| Classifier::new(r).unwrap()).collect())
            .unwrap();
        (Dataset::new(vec![obs(0, 1); n]).unwrap(), d)
    }

    #[test]
    fn erm_examples() {
        // empirical hinge risks (0.2, 0.5)
        let (data, d) = loss_table_data(&[0.2, 0.5], 3);
        assert_eq!(erm(&data, &d, &LossSpec::Hinge).unwrap().0, 0);
        let (data, d) = loss_table_data(&[0.4, 0.4, 0.1], 3);
        assert_eq!(erm(&data, &d, &LossSpec::Hinge).unwrap().0, 2);
        // exact tie
        let (data, d) = loss_table_data(&[0.5, 0.5], 4);
        let (j, w) = erm(&data, &d, &LossSpec::Hinge).unwrap();
        assert_eq!(j, 0);
        assert_eq!(w.weights(), &[1.0, 0.0]);
    }

    #[test]
    fn penalized_erm_examples() {
        let (data, d) = loss_table_data(&[0.5, 0.5], 2);
        let zero = penalized_erm(&data, &d, &LossSpec::Hinge, &PenaltySpec::Zero).unwrap();
        assert_eq!(zero, erm(&data, &d, &LossSpec::Hinge).unwrap());

        let explicit = PenaltySpec::Explicit { values: vec![0.0, -0.1], c: 0.4 };
        // bound = 0.4·sqrt(ln 2 / 2) ≈ 0.235 admits 0.1
        assert_eq!(penalized_erm(&data, &d, &LossSpec::Hinge, &explicit).unwrap().0, 1);

        let tight = PenaltySpec::Explicit { values: vec![0.0, -0.1], c: 0.1 };
        assert!(matches!(
            penalized_erm(&data, &d, &LossSpec::Hinge, &tight),
            Err(Error::PenaltyOutOfRange { index: 1, .. })
        ));

        let (data, d) = loss_table_data(&[0.3, 0.2, 0.9], 7);
        let c = PenaltySpec::constant_scaled(0.3).unwrap();
        assert_eq!(
            penalized_erm(&data, &d, &LossSpec::Hinge, &c).unwrap().0,
            erm(&data, &d, &LossSpec::Hinge).unwrap().0
        );
        assert!(PenaltySpec::constant_scaled(0.5).is_err());
        assert!(PenaltySpec::constant_scaled(-0.1).is_err());
    }

    #[test]
    fn aew_examples() {
        let (data, d) = loss_table_data(&[0.4, 0.4, 0.4], 10);
        let w = aew_weights(&data, &d, &LossSpec::Hinge).unwrap();
        for &x in w.weights() {
            assert!((x - 1.0 / 3.0).abs() < 1e-15);
        }

        let (data, d) = loss_table_data(&[0.0, 1.0], 1);
        let w = aew_weights(&data, &d, &LossSpec::Hinge).unwrap();
        let e = libm::exp(-1.0);
        assert!((w.weights()[0] - 1.0 / (1.0 + e)).abs() < 1e-15);
        assert!((w.weights()[1] - e / (1.0 + e)).abs() < 1e-15);
        assert!((w.weights()[0] - 0.731_058_578_630_004_9).abs() < 1e-15);
    }

    #[test]
    fn aew_is_shift_invariant() {
        let (data, d) = loss_table_data(&[0.1, 0.35, 0.6], 9);
        let (data2, d2) = loss_table_data(&[0.6, 0.85, 1.1], 9);
        let a = aew_weights(&data, &d, &LossSpec::Hinge).unwrap();
        let b = aew_weights(&data2, &d2, &LossSpec::Hinge).unwrap();
        for (x, y) in a.weights().iter().zip(b.weights()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn aew_survives_huge_samples() {
        let (data, d) = loss_table_data(&[0.0, 1.0], 1_000_000);
        let w = aew_weights(&data, &d, &LossSpec::Hinge).unwrap();
        assert!(w.weights().iter().all(|x| x.is_finite()));
        assert_eq!(w.weights()[0], 1.0);
        assert!(w.weights()[1] < 1e-300);
    }

    /// Direct evaluation of the CAEW average: every prefix recomputed from
    /// scratch with plain exponentials.
    fn caew_direct(per_sample: &[Vec<f64>], beta: f64) -> Vec<f64> {
        let m = per_sample[0].len();
        let n = per_sample.len();
        let mut avg = vec![0.0; m];
        for k in 1..=n {
            let s: Vec<f64> =
                (0..m).map(|j| per_sample[..k].iter().map(|row| row[j]).sum::<f64>()).collect();
            let e: Vec<f64> = s.iter().map(|v| libm::exp(-v / beta)).collect();
            let z: f64 = e.iter().sum();
            for j in 0..m {
                avg[j] += e[j] / z / n as f64;
            }
        }
        avg
    }

    #[test]
    fn caew_examples() {
        let (data, d) = loss_table_data(&[0.0, 1.0], 2);
        let w = caew_weights(&data, &d, &LossSpec::Hinge, 1.0).unwrap();
        let direct = caew_direct(&[vec![0.0, 1.0], vec![0.0, 1.0]], 1.0);
        for (a, b) in w.weights().iter().zip(&direct) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((w.weights()[0] - 0.805_928).abs() < 1e-6);
        assert!((w.weights()[1] - 0.194_072).abs() < 1e-6);

        // n = 1 equals AEW at the same temperature
        let (data, d) = loss_table_data(&[0.2, 0.9, 0.5], 1);
        let table = LossTable::new(&d, &LossSpec::Hinge);
        let c = caew_weights(&data, &d, &LossSpec::Hinge, 2.5).unwrap();
        let a = table.exponential_weights(&data, 2.5).unwrap();
        for (x, y) in c.weights().iter().zip(a.weights()) {
            assert!((x - y).abs() < 1e-15);
        }

        // identical members
        let d = dict(&[&[0.3, -0.2], &[0.3, -0.2], &[0.3, -0.2]]);
        let data = Dataset::new(vec![obs(0, 1), obs(1, -1), obs(1, 1)]).unwrap();
        let w = caew_weights(&data, &d, &LossSpec::Logit, 1.7).unwrap();
        for &x in w.weights() {
            assert!((x - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!(caew_weights(&data, &d, &LossSpec::Logit, 0.0).is_err());
    }

    #[test]
    fn caew_matches_direct_evaluation_on_random_data() {
        let mut rng = SplitMix64::new(77);
        let k = 5;
        let rows: Vec<Vec<f64>> =
            (0..4).map(|_| (0..k).map(|_| 2.0 * rng.next_f64() - 1.0).collect()).collect();
        let d = Dictionary::new(rows.iter().map(|r| Classifier::new(r.clone()).unwrap()).collect())
            .unwrap();
        let records: Vec<Observation> = (0..40)
            .map(|_| {
                let atom = (rng.next_u64() % k as u64) as usize;
                obs(atom, if rng.next_f64() < 0.5 { 1 } else { -1 })
            })
            .collect();
        let data = Dataset::new(records.clone()).unwrap();
        let loss = LossSpec::phi_h(2.0).unwrap();
        let per_sample: Vec<Vec<f64>> = records
            .iter()
            .map(|r| rows.iter().map(|f| loss.eval(r.label.sign() * f[r.atom])).collect())
            .collect();
        let w = caew_weights(&data, &d, &loss, 4.5).unwrap();
        for (a, b) in w.weights().iter().zip(caew_direct(&per_sample, 4.5)) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn mixture_examples() {
        let d = dict(&[&[0.5, -1.0], &[-0.5, 1.0]]);
        assert_eq!(
            mixture_classifier(&d, &WeightVector::one_hot(2, 1)).unwrap().values(),
            &[-0.5, 1.0]
        );
        let mid = mixture_classifier(&d, &WeightVector::uniform(2)).unwrap();
        assert_eq!(mid.values(), &[0.0, 0.0]);
        assert!(mixture_classifier(&d, &WeightVector::uniform(3)).is_err());
    }

    #[test]
    fn procedure_names_round_trip() {
        for name in ["erm", "aew", "caew:auto", "caew:4.5", "perm:zero", "perm:constant_scaled:0.2"] {
            let p: Procedure = name.parse().unwrap();
            assert_eq!(p.to_string(), name);
        }
        for bad in ["", "caew", "caew:-1", "perm:constant_scaled:0.9", "perm:explicit:0.1", "knn"] {
            assert!(bad.parse::<Procedure>().is_err(), "{bad}");
        }
        assert_eq!(
            Temperature::Auto.resolve(&LossSpec::phi_h(2.0).unwrap()).unwrap(),
            4.5
        );
        assert!(Temperature::Auto.resolve(&LossSpec::Hinge).is_err());
    }

    fn random_setup(seed: u64, m: usize, k: usize, n: usize) -> (Dictionary, Dataset, FiniteJointDistribution) {
        let mut rng = SplitMix64::new(seed);
        let members: Vec<Classifier> = (0..m)
            .map(|_| Classifier::new((0..k).map(|_| 2.0 * rng.next_f64() - 1.0).collect()).unwrap())
            .collect();
        let raw: Vec<f64> = (0..k).map(|_| rng.next_f64() + 0.01).collect();
        let total: f64 = raw.iter().sum();
        let probs: Vec<f64> = raw.iter().map(|p| p / total).collect();
        let eta: Vec<f64> = (0..k).map(|_| rng.next_f64()).collect();
        let dist = FiniteJointDistribution::with_numbered_atoms(probs, eta).unwrap();
        let data = crate::distribution::sample(&dist, n, rng.next_u64()).unwrap();
        (Dictionary::new(members).unwrap(), data, dist)
    }

    proptest! {
        #[test]
        fn weights_are_convex(seed in any::<u64>(), m in 2usize..6, n in 1usize..60) {
            let (d, data, _) = random_setup(seed, m, 4, n);
            for loss in [LossSpec::Logit, LossSpec::Hinge, LossSpec::Exp] {
                let table = LossTable::new(&d, &loss);
                for w in [
                    table.exponential_weights(&data, 1.0).unwrap(),
                    table.cumulative_exponential_weights(&data, 2.0).unwrap(),
                ] {
                    prop_assert!(WeightVector::new(w.weights().to_vec()).is_ok());
                }
            }
        }

        #[test]
        fn permutation_equivariance(seed in any::<u64>(), n in 1usize..40, rot in 1usize..4) {
            let (d, data, _) = random_setup(seed, 4, 3, n);
            let perm: Vec<usize> = (0..4).map(|i| (i + rot) % 4).collect();
            let permuted = Dictionary::new(perm.iter().map(|&i| d.members()[i].clone()).collect()).unwrap();
            let loss = LossSpec::Squared;
            let a = aew_weights(&data, &d, &loss).unwrap();
            let b = aew_weights(&data, &permuted, &loss).unwrap();
            let c = caew_weights(&data, &d, &loss, 8.0).unwrap();
            let e = caew_weights(&data, &permuted, &loss, 8.0).unwrap();
            for (slot, &orig) in perm.iter().enumerate() {
                prop_assert!((a.weights()[orig] - b.weights()[slot]).abs() < 1e-12);
                prop_assert!((c.weights()[orig] - e.weights()[slot]).abs() < 1e-12);
            }
            let (ja, _) = erm(&data, &d, &loss).unwrap();
            let (jb, _) = erm(&data, &permuted, &loss).unwrap();
            prop_assert_eq!(perm[jb], ja);
        }

        #[test]
        fn jensen_ordering_for_convex_losses(seed in any::<u64>(), n in 1usize..30) {
            let (d, data, dist) = random_setup(seed, 3, 5, n);
            for loss in [
                LossSpec::Hinge, LossSpec::Logit, LossSpec::Exp, LossSpec::Squared,
                LossSpec::SoftMargin2, LossSpec::PhiH(1.0), LossSpec::PhiH(2.5),
            ] {
                let table = LossTable::new(&d, &loss);
                let mut avg_risk = 0.0;
                for k in 1..=n {
                    let w = table.exponential_weights(&data.prefix(k).unwrap(), 1.5).unwrap();
                    avg_risk += phi_risk(&dist, &mixture_classifier(&d, &w).unwrap(), &loss).unwrap();
                }
                avg_risk /= n as f64;
                let caew = table.cumulative_exponential_weights(&data, 1.5).unwrap();
                let mix = phi_risk(&dist, &mixture_classifier(&d, &caew).unwrap(), &loss).unwrap();
                prop_assert!(mix <= avg_risk + 1e-12, "{}: {} > {}", loss, mix, avg_risk);
            }
        }

        #[test]
        fn erm_agrees_with_zero_one_on_sign_dictionaries(seed in any::<u64>(), n in 1usize..200) {
            let mut rng = SplitMix64::new(seed);
            let k = 6;
            let members: Vec<Classifier> = (0..5)
                .map(|_| Classifier::new((0..k).map(|_| if rng.next_u64() & 1 == 0 { 1.0 } else { -1.0 }).collect()).unwrap())
                .collect();
            let d = Dictionary::new(members).unwrap();
            let dist = FiniteJointDistribution::with_numbered_atoms(
                vec![1.0 / k as f64; k],
                (0..k).map(|_| rng.next_f64()).collect(),
            ).unwrap();
            let data = crate::distribution::sample(&dist, n, rng.next_u64()).unwrap();
            let reference = erm(&data, &d, &LossSpec::ZeroOne).unwrap().0;
            for loss in [
                LossSpec::Hinge, LossSpec::Logit, LossSpec::Exp, LossSpec::Squared,
                LossSpec::SoftMargin2, LossSpec::PhiH(0.3), LossSpec::PhiH(2.0),
            ] {
                prop_assert!(loss.a_phi() > 0.0);
                prop_assert_eq!(erm(&data, &d, &loss).unwrap().0, reference, "{}", loss);
            }
        }
    }
}
