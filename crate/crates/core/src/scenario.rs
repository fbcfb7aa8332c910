//! Adversarial distribution families used by the lower-bound arguments,
//! together with the divergences and bound formulas evaluated on them.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::distribution::{
    bayes_phi_risk, default_t_grid, noise_exponent_check, phi_risk, Classifier, Dictionary,
    FiniteJointDistribution, Label,
};
use crate::error::{Error, Result};
use crate::loss::LossSpec;
use crate::num::{ceil_log2, compensated_sum};

/// Largest dictionary the selector construction enumerates (2^{M+1} atoms).
pub const SELECTOR_MAX_M: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioDiagnostics {
    /// `min_j A(f_j) − A*` under the scenario's loss hint, per candidate.
    pub oracle_excess_per_candidate: Vec<f64>,
    /// `A(f_j) − A*` for every (candidate, member) pair, candidate-major.
    pub member_excess: Vec<Vec<f64>>,
    /// Closed-form squared Hellinger distance of neighbouring candidates.
    pub pairwise_hellinger_sq: Option<f64>,
    /// Closed-form upper bound on `K(π_j | π_1)` for a single observation.
    pub kl_bound: Option<f64>,
    pub margin_ok: Option<bool>,
}

impl ScenarioDiagnostics {
    /// Values `A(f_j) − A* − oracle` a selector can incur, sorted, with
    /// values closer than `1e−12` merged.
    pub fn selector_gaps(&self, candidate: usize) -> Vec<f64> {
        let oracle = self.oracle_excess_per_candidate[candidate];
        let mut gaps: Vec<f64> = self.member_excess[candidate].iter().map(|e| e - oracle).collect();
        gaps.sort_by(f64::total_cmp);
        gaps.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        gaps
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub candidates: Vec<FiniteJointDistribution>,
    pub dict: Dictionary,
    pub loss_hint: LossSpec,
    pub params: BTreeMap<String, f64>,
    pub diagnostics: ScenarioDiagnostics,
}

impl Scenario {
    pub fn param(&self, key: &str) -> Option<f64> {
        self.params.get(key).copied()
    }

    /// `nK(π_j | π_1)` bound for the selector family.
    pub fn kl_bound_for(&self, n: usize) -> Option<f64> {
        self.diagnostics.kl_bound.map(|k| n as f64 * k)
    }
}

/// All sign vectors of length `len`, lexicographic with −1 < 1 and the first
/// coordinate most significant.
fn sign_patterns(len: usize) -> Vec<Vec<f64>> {
    (0..1usize << len)
        .map(|code| {
            (0..len)
                .map(|i| if code >> (len - 1 - i) & 1 == 1 { 1.0 } else { -1.0 })
                .collect()
        })
        .collect()
}

fn cube_ids(n_atoms: usize) -> Vec<String> {
    (1..=n_atoms).map(|i| format!("x{i}")).collect()
}

fn fill_diagnostics(
    candidates: &[FiniteJointDistribution],
    dict: &Dictionary,
    loss: &LossSpec,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let mut oracle = Vec::with_capacity(candidates.len());
    let mut table = Vec::with_capacity(candidates.len());
    for dist in candidates {
        let bayes = bayes_phi_risk(dist, loss).0;
        let row = dict
            .members()
            .iter()
            .map(|f| Ok(phi_risk(dist, f, loss)? - bayes))
            .collect::<Result<Vec<f64>>>()?;
        oracle.push(row.iter().copied().fold(f64::INFINITY, f64::min));
        table.push(row);
    }
    Ok((oracle, table))
}

/// Number of cube coordinates `N = ⌈log₂ M⌉`, which must be at least 2 for
/// the cube `{−1,1}^{N−1}` to be non-trivial.
fn cube_dimension(m: usize) -> Result<usize> {
    if m < 2 {
        return Err(Error::InvalidRegime(format!("dictionary size must be at least 2, got {m}")));
    }
    let n_coords = ceil_log2(m);
    if n_coords < 2 {
        return Err(Error::InvalidRegime(format!(
            "M = {m} gives N = {n_coords}: the cube is empty; the smallest usable M is 3"
        )));
    }
    Ok(n_coords)
}

/// Candidates `π_σ`, σ ∈ {−1,1}^{N−1}: `P(x_j) = w` for `j < N`, the rest on
/// `x_N`; `η_σ(x_j) = (1 + σ_j·margin)/2` and `η_σ(x_N) = eta_last`.
fn cube_candidates(n_coords: usize, w: f64, margin: f64, eta_last: f64) -> Result<Vec<FiniteJointDistribution>> {
    let mut probs = vec![w; n_coords - 1];
    probs.push(1.0 - (n_coords - 1) as f64 * w);
    sign_patterns(n_coords - 1)
        .into_iter()
        .map(|sigma| {
            let mut eta: Vec<f64> = sigma.iter().map(|s| (1.0 + s * margin) / 2.0).collect();
            eta.push(eta_last);
            FiniteJointDistribution::new(cube_ids(n_coords), probs.clone(), eta)
        })
        .collect()
}

fn cube_dictionary(n_coords: usize, m: usize, scale: f64) -> Result<Dictionary> {
    let members = sign_patterns(n_coords - 1)
        .into_iter()
        .take(m)
        .map(|sigma| {
            let mut v: Vec<f64> = sigma.iter().map(|s| s * scale).collect();
            v.push(scale);
            Classifier::new(v)
        })
        .collect::<Result<Vec<_>>>()?;
    Dictionary::new(members)
}

/// The 0-1 hypercube: `N = ⌈log₂ M⌉`, margin `𝔥 = √(N/n)`, `w = 1/(n𝔥²)`,
/// `η_σ(x_N) = 1`. Dictionary: the `2^{N−1}` sign patterns with `f(x_N) = 1`.
pub fn build_hypercube_01(m: usize, n: usize) -> Result<Scenario> {
    let n_coords = cube_dimension(m)?;
    if n == 0 {
        return Err(Error::InvalidRegime("n must be positive".into()));
    }
    let margin = libm::sqrt(n_coords as f64 / n as f64);
    if !(margin < 1.0) {
        return Err(Error::InvalidRegime(format!(
            "margin sqrt(N/n) = {margin} must be below 1 (n = {n} too small for M = {m})"
        )));
    }
    let w = 1.0 / (n as f64 * margin * margin);
    if (n_coords - 1) as f64 * w > 1.0 {
        return Err(Error::InvalidRegime(format!("(N-1)w = {} exceeds 1", (n_coords - 1) as f64 * w)));
    }
    let candidates = cube_candidates(n_coords, w, margin, 1.0)?;
    let dict = cube_dictionary(n_coords, m, 1.0)?;
    let loss = LossSpec::ZeroOne;
    let (oracle, member) = fill_diagnostics(&candidates, &dict, &loss)?;
    let mut params = BTreeMap::new();
    params.insert("M".into(), m as f64);
    params.insert("N".into(), n_coords as f64);
    params.insert("n".into(), n as f64);
    params.insert("margin".into(), margin);
    params.insert("w".into(), w);
    Ok(Scenario {
        name: "cube01".into(),
        candidates,
        dict,
        loss_hint: loss,
        params,
        diagnostics: ScenarioDiagnostics {
            oracle_excess_per_candidate: oracle,
            member_excess: member,
            pairwise_hellinger_sq: Some(2.0 * w * (1.0 - libm::sqrt(1.0 - margin * margin))),
            kl_bound: None,
            margin_ok: None,
        },
    })
}

/// `ρ(h)`: 1 when `2(h−1) ≤ 1`, else `1/(4(h−1))`.
pub fn rho(h: f64) -> f64 {
    if 2.0 * (h - 1.0) <= 1.0 {
        1.0
    } else {
        1.0 / (4.0 * (h - 1.0))
    }
}

/// The cube for `φ_h`, `h > 1`. The margin is `𝔥 = 2(h−1)` while that is at
/// most 1 and `1/2` beyond, so that `f*_σ = (2η_σ − 1)/(2(h−1)) = ρ(h)·g*_σ`
/// on every atom. `w = 1/(2n(h−1)²)` if `2(h−1) < 1`, else `8/n`.
pub fn build_hypercube_convex(m: usize, n: usize, h: f64) -> Result<Scenario> {
    if !(h > 1.0 && h.is_finite()) {
        return Err(Error::InvalidRegime(format!("the convex cube needs h > 1, got {h}")));
    }
    let n_coords = cube_dimension(m)?;
    if n == 0 {
        return Err(Error::InvalidRegime("n must be positive".into()));
    }
    let two_hm1 = 2.0 * (h - 1.0);
    let margin = if two_hm1 <= 1.0 { two_hm1 } else { 0.5 };
    let w = if two_hm1 < 1.0 { 1.0 / (2.0 * n as f64 * (h - 1.0) * (h - 1.0)) } else { 8.0 / n as f64 };
    if (n_coords - 1) as f64 * w > 1.0 {
        return Err(Error::InvalidRegime(format!(
            "(N-1)w = {} exceeds 1 (n = {n} too small for M = {m}, h = {h})",
            (n_coords - 1) as f64 * w
        )));
    }
    let r = rho(h);
    let candidates = cube_candidates(n_coords, w, margin, (1.0 + margin) / 2.0)?;
    let dict = cube_dictionary(n_coords, m, r)?;
    let loss = LossSpec::phi_h(h)?;
    let (oracle, member) = fill_diagnostics(&candidates, &dict, &loss)?;
    let mut params = BTreeMap::new();
    params.insert("M".into(), m as f64);
    params.insert("N".into(), n_coords as f64);
    params.insert("n".into(), n as f64);
    params.insert("h".into(), h);
    params.insert("margin".into(), margin);
    params.insert("w".into(), w);
    params.insert("rho".into(), r);
    Ok(Scenario {
        name: format!("cube_convex:{h}"),
        candidates,
        dict,
        loss_hint: loss,
        params,
        diagnostics: ScenarioDiagnostics {
            oracle_excess_per_candidate: oracle,
            member_excess: member,
            pairwise_hellinger_sq: Some(2.0 * w * (1.0 - libm::sqrt(1.0 - margin * margin))),
            kl_bound: None,
            margin_ok: None,
        },
    })
}

/// `(1 − w)h/2 + w/2`, the exact 0-1 excess of the oracle member `f_j` under
/// `π_j` in the selector family.
pub fn selector_oracle_excess(h: f64, w: f64) -> f64 {
    (1.0 - w) * h / 2.0 + w / 2.0
}

/// `3h(1 − w)/4 + w/2`, the exact 0-1 excess of any other member.
pub fn selector_off_oracle_excess(h: f64, w: f64) -> f64 {
    3.0 * h * (1.0 - w) / 4.0 + w / 2.0
}

/// `h²/(4(1 − h − 2h²))`, the per-observation KL bound.
pub fn selector_kl_bound(h: f64) -> f64 {
    h * h / (4.0 * (1.0 - h - 2.0 * h * h))
}

/// The selector family on `{−1,1}^{M+1}`: `x⁰ = 1` with probability
/// `w = 1 − h^{1/(κ−1)}`, other coordinates fair; under `π_j`,
/// `η = 1` if `x⁰ = 1`, else `1/2 + h/2` or `1/2 + h` as `x^j` is −1 or 1.
/// Dictionary `f_j(x) = x^j`. Atoms are enumerated lexicographically with
/// `x⁰` most significant and −1 before 1.
pub fn build_selector_scenario(m: usize, kappa: f64, h: f64) -> Result<Scenario> {
    if m < 2 {
        return Err(Error::InvalidRegime(format!("dictionary size must be at least 2, got {m}")));
    }
    if m > SELECTOR_MAX_M {
        return Err(Error::SupportTooLarge { atoms: 1 << (m + 1), limit: 1 << (SELECTOR_MAX_M + 1) });
    }
    if !(kappa > 1.0 && kappa.is_finite()) {
        return Err(Error::InvalidRegime(format!("kappa must exceed 1, got {kappa}")));
    }
    if !(h > 0.0 && h <= 0.5) {
        return Err(Error::InvalidRegime(format!("h must lie in (0, 1/2], got {h}")));
    }
    let w = 1.0 - libm::pow(h, 1.0 / (kappa - 1.0));
    let dim = m + 1;
    let atoms = 1usize << dim;
    let coord = |a: usize, i: usize| -> f64 { if a >> (dim - 1 - i) & 1 == 1 { 1.0 } else { -1.0 } };
    let ids: Vec<String> = (0..atoms)
        .map(|a| (0..dim).map(|i| if coord(a, i) > 0.0 { '+' } else { '-' }).collect())
        .collect();
    let cell = 1.0 / (1u64 << m) as f64;
    let probs: Vec<f64> =
        (0..atoms).map(|a| if coord(a, 0) > 0.0 { w * cell } else { (1.0 - w) * cell }).collect();
    let candidates = (1..=m)
        .map(|j| {
            let eta = (0..atoms)
                .map(|a| {
                    if coord(a, 0) > 0.0 {
                        1.0
                    } else if coord(a, j) < 0.0 {
                        0.5 + h / 2.0
                    } else {
                        0.5 + h
                    }
                })
                .collect();
            FiniteJointDistribution::new(ids.clone(), probs.clone(), eta)
        })
        .collect::<Result<Vec<_>>>()?;
    let dict = Dictionary::new(
        (1..=m)
            .map(|j| Classifier::new((0..atoms).map(|a| coord(a, j)).collect()))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let loss = LossSpec::ZeroOne;
    let (oracle, member) = fill_diagnostics(&candidates, &dict, &loss)?;
    let grid = default_t_grid();
    let mut margin_ok = true;
    for c in &candidates {
        margin_ok &= noise_exponent_check(c, kappa, &grid)?;
    }
    let mut params = BTreeMap::new();
    params.insert("M".into(), m as f64);
    params.insert("h".into(), h);
    params.insert("kappa".into(), kappa);
    params.insert("w".into(), w);
    params.insert("oracle_excess".into(), selector_oracle_excess(h, w));
    params.insert("off_oracle_excess".into(), selector_off_oracle_excess(h, w));
    params.insert("gap".into(), h * (1.0 - w) / 4.0);
    Ok(Scenario {
        name: format!("selector:{kappa}"),
        candidates,
        dict,
        loss_hint: loss,
        params,
        diagnostics: ScenarioDiagnostics {
            oracle_excess_per_candidate: oracle,
            member_excess: member,
            pairwise_hellinger_sq: None,
            kl_bound: Some(selector_kl_bound(h)),
            margin_ok: Some(margin_ok),
        },
    })
}

fn check_lower_bound_regime(m: usize, n: usize, kappa: f64) -> Result<f64> {
    if m < 2 || n == 0 {
        return Err(Error::InvalidRegime(format!("need M >= 2 and n >= 1, got M = {m}, n = {n}")));
    }
    if !(kappa > 1.0 && kappa.is_finite()) {
        return Err(Error::InvalidRegime(format!("kappa must exceed 1, got {kappa}")));
    }
    let ratio = libm::log(m as f64) / n as f64;
    if libm::sqrt(ratio) > 0.5 {
        return Err(Error::InvalidRegime(format!(
            "sqrt(log M / n) = {} exceeds 1/2",
            libm::sqrt(ratio)
        )));
    }
    Ok(ratio)
}

/// `h = ((log M)/n)^{(κ−1)/(2κ−1)}`.
pub fn h_for_selector_lower_bound(m: usize, n: usize, kappa: f64) -> Result<f64> {
    let ratio = check_lower_bound_regime(m, n, kappa)?;
    Ok(libm::pow(ratio, (kappa - 1.0) / (2.0 * kappa - 1.0)))
}

/// `h = (C²(log M)/n)^{(κ−1)/(2κ)}`.
pub fn h_for_perm_lower_bound(m: usize, n: usize, kappa: f64, c: f64) -> Result<f64> {
    let ratio = check_lower_bound_regime(m, n, kappa)?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidRegime(format!("penalty constant must be positive, got {c}")));
    }
    let h = libm::pow(c * c * ratio, (kappa - 1.0) / (2.0 * kappa));
    if h > 0.5 {
        return Err(Error::InvalidRegime(format!("h = {h} exceeds 1/2")));
    }
    Ok(h)
}

/// `1188π·C²·M^{9C²}·log M ≤ n`, the sample size the penalized-ERM lower
/// bound asks for. Advisory only.
pub fn perm_regime_ok(m: usize, n: usize, c: f64) -> bool {
    let mf = m as f64;
    1188.0 * core::f64::consts::PI * c * c * libm::pow(mf, 9.0 * c * c) * libm::log(mf) <= n as f64
}

fn check_same_support(p: &FiniteJointDistribution, q: &FiniteJointDistribution) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::Alignment { expected: p.len(), found: q.len() });
    }
    Ok(())
}

fn joint_masses(p: &FiniteJointDistribution) -> impl Iterator<Item = f64> + '_ {
    (0..p.len()).flat_map(move |x| [p.joint_mass(x, Label::Neg), p.joint_mass(x, Label::Pos)])
}

/// `Σ_{(x,y)} (√p − √q)²` over the joint support.
pub fn hellinger_sq(p: &FiniteJointDistribution, q: &FiniteJointDistribution) -> Result<f64> {
    check_same_support(p, q)?;
    Ok(compensated_sum(joint_masses(p).zip(joint_masses(q)).map(|(a, b)| {
        let d = libm::sqrt(a) - libm::sqrt(b);
        d * d
    })))
}

/// `H²(P^{⊗n}, Q^{⊗n}) = 2(1 − (1 − H²(P, Q)/2)^n)`.
pub fn hellinger_sq_product(h2_single: f64, n: u32) -> f64 {
    2.0 * (1.0 - libm::pow(1.0 - h2_single / 2.0, n as f64))
}

/// `K(P | Q) = Σ p·log(p/q)`, `+∞` unless `P ≪ Q`.
pub fn kl_divergence(p: &FiniteJointDistribution, q: &FiniteJointDistribution) -> Result<f64> {
    check_same_support(p, q)?;
    let mut terms = Vec::with_capacity(2 * p.len());
    for (a, b) in joint_masses(p).zip(joint_masses(q)) {
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            return Ok(f64::INFINITY);
        }
        terms.push(a * libm::log(a / b));
    }
    Ok(compensated_sum(terms))
}

/// `m·2^{−3−θ}·(2 − α)²`.
pub fn assouad_bound(m: u32, alpha: f64, theta: f64) -> f64 {
    m as f64 * libm::pow(2.0, -3.0 - theta) * (2.0 - alpha) * (2.0 - alpha)
}

/// `(√M/(1 + √M))·(1 − 2α − 2√(α/log 2))` for `α ∈ (0, 1/8)`.
pub fn multitest_bound(m: usize, alpha: f64) -> Result<f64> {
    if m < 2 {
        return Err(Error::InvalidRegime(format!("M must be at least 2, got {m}")));
    }
    if !(alpha > 0.0 && alpha < 0.125) {
        return Err(Error::InvalidRegime(format!("alpha must lie in (0, 1/8), got {alpha}")));
    }
    let s = libm::sqrt(m as f64);
    Ok(s / (1.0 + s) * (1.0 - 2.0 * alpha - 2.0 * libm::sqrt(alpha / core::f64::consts::LN_2)))
}
