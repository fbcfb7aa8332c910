//! Self-checks run by `aggrates verify`: convexity certificates, closed-form
//! risk identities and the divergence formulas of the constructions.

use aggrates_core::distribution::{excess_risk, phi_risk, pointwise_bayes};
use aggrates_core::loss::{beta_h, certify_beta_convexity};
use aggrates_core::scenario::{
    build_hypercube_01, build_hypercube_convex, build_selector_scenario, hellinger_sq,
    hellinger_sq_product, kl_divergence, selector_off_oracle_excess, selector_oracle_excess,
};
use aggrates_core::{Classifier, FiniteJointDistribution, Label, LossSpec};

use crate::error::{AppError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

/// Parses `LOSS=BETA`, e.g. `logit=3.9` or `phi_h:2=4.5`.
pub fn parse_beta_override(s: &str) -> Result<(LossSpec, f64)> {
    let (loss, beta) =
        s.rsplit_once('=').ok_or_else(|| AppError::Usage(format!("expected LOSS=BETA, got `{s}`")))?;
    let loss: LossSpec = loss.parse().map_err(|e| AppError::Usage(format!("{e}")))?;
    let beta: f64 = beta.parse().map_err(|_| AppError::Usage(format!("`{beta}` is not a number")))?;
    Ok((loss, beta))
}

/// Losses whose convexity constant is certified, and the constant used.
pub fn certified_losses() -> Vec<LossSpec> {
    let mut v = vec![LossSpec::Logit, LossSpec::Exp, LossSpec::Squared, LossSpec::SoftMargin2];
    v.extend([1.25, 1.5, 2.0, 3.0].map(LossSpec::PhiH));
    v
}

pub fn run(grid: usize, overrides: &[(LossSpec, f64)]) -> Vec<Check> {
    let mut checks = Vec::new();
    certificates(grid, overrides, &mut checks);
    risks(&mut checks);
    divergences(&mut checks);
    checks
}

fn certificates(grid: usize, overrides: &[(LossSpec, f64)], out: &mut Vec<Check>) {
    for loss in certified_losses() {
        let beta = overrides
            .iter()
            .find(|(l, _)| *l == loss)
            .map(|(_, b)| *b)
            .or_else(|| loss.beta())
            .expect("certified losses carry a constant");
        let cert = certify_beta_convexity(&loss, beta, grid);
        let detail = match cert.failed_at {
            Some(x) => format!("fails at x = {x}, violation {:e}", cert.max_violation),
            None => format!("{} points, max violation {:e}", cert.points_checked, cert.max_violation),
        };
        out.push(Check::new(format!("certificate {loss} beta={beta}"), cert.passed(), detail));
    }
    let hinge = certify_beta_convexity(&LossSpec::Hinge, 1e6, grid);
    out.push(Check::new("hinge is not beta-convex (beta=1e6)", !hinge.passed(), ""));
    let (mut best_h, mut best) = (0.0, f64::INFINITY);
    for i in 1..=4000 {
        let h = 1.0 + i as f64 / 1000.0;
        if beta_h(h) < best {
            (best_h, best) = (h, beta_h(h));
        }
    }
    out.push(Check::new(
        "beta_h is minimised at h = 1.5 with value 4",
        best_h == 1.5 && (best - 4.0).abs() < 1e-12,
        format!("h = {best_h}, beta = {best}"),
    ));
}

fn risks(out: &mut Vec<Check>) {
    let etas: [f64; 7] = [0.05, 0.2, 0.35, 0.5, 0.6, 0.75, 0.9];
    // The conditional risk is flat at its minimum, so the numeric argmin is
    // only good to about sqrt(eps); the minimal risk itself must agree tightly.
    let cond = |loss: &LossSpec, eta: f64, a: f64| eta * loss.eval(a) + (1.0 - eta) * loss.eval(-a);
    let (mut arg_dev, mut risk_dev) = (0.0_f64, 0.0_f64);
    for &eta in &etas {
        let odds = (eta / (1.0 - eta)).ln();
        for (loss, want) in [
            (LossSpec::Exp, 0.5 * odds),
            (LossSpec::Logit, odds),
            (LossSpec::SoftMargin2, 2.0 * eta - 1.0),
        ] {
            let want = want.clamp(-1.0, 1.0);
            let got = pointwise_bayes(&loss, eta);
            arg_dev = arg_dev.max((got - want).abs());
            risk_dev = risk_dev.max((cond(&loss, eta, got) - cond(&loss, eta, want)).abs());
        }
    }
    out.push(Check::new(
        "numeric Bayes minimisers match closed forms",
        arg_dev < 1e-6 && risk_dev < 1e-12,
        format!("argmin deviation {arg_dev:e}, risk deviation {risk_dev:e}"),
    ));

    let dist = FiniteJointDistribution::with_numbered_atoms(
        vec![0.1, 0.25, 0.3, 0.15, 0.2],
        vec![0.9, 0.3, 0.55, 0.0, 0.71],
    )
    .expect("fixed distribution is valid");
    let signs = [[1.0, 1.0, -1.0, 1.0, -1.0], [-1.0, -1.0, -1.0, -1.0, 1.0], [1.0, -1.0, 1.0, -1.0, 1.0]];
    let mut doubling = 0.0_f64;
    let mut affine = 0.0_f64;
    for s in signs {
        let f = Classifier::new(s.to_vec()).expect("sign classifier");
        let z = excess_risk(&dist, &f, &LossSpec::ZeroOne).expect("aligned");
        let hinge = excess_risk(&dist, &f, &LossSpec::Hinge).expect("aligned");
        doubling = doubling.max((hinge - 2.0 * z).abs());
        let r0 = phi_risk(&dist, &f, &LossSpec::ZeroOne).expect("aligned");
        for loss in LossSpec::NAMED.into_iter().chain([LossSpec::PhiH(0.4), LossSpec::PhiH(2.0)]) {
            let r = phi_risk(&dist, &f, &loss).expect("aligned");
            affine = affine.max((r - loss.eval(1.0) - loss.a_phi() * r0).abs());
        }
    }
    out.push(Check::new("hinge excess = 2 x 0-1 excess", doubling < 1e-12, format!("{doubling:e}")));
    out.push(Check::new("A(f) = phi(1) + a_phi A_0(f) for sign f", affine < 1e-12, format!("{affine:e}")));
}

fn product_direct(p: &FiniteJointDistribution, q: &FiniteJointDistribution, n: u32) -> f64 {
    let masses = |d: &FiniteJointDistribution| -> Vec<f64> {
        (0..d.len()).flat_map(|x| [d.joint_mass(x, Label::Neg), d.joint_mass(x, Label::Pos)]).collect()
    };
    let pairs: Vec<(f64, f64)> =
        masses(p).into_iter().zip(masses(q)).filter(|(a, b)| *a > 0.0 || *b > 0.0).collect();
    fn go(pairs: &[(f64, f64)], depth: u32, a: f64, b: f64) -> f64 {
        if depth == 0 {
            return (a.sqrt() - b.sqrt()).powi(2);
        }
        pairs.iter().map(|&(pa, pb)| go(pairs, depth - 1, a * pa, b * pb)).sum()
    }
    go(&pairs, n, 1.0, 1.0)
}

fn divergences(out: &mut Vec<Check>) {
    for n in [256, 1024] {
        let name = format!("cube01 M=8 n={n}: Hamming-1 Hellinger and product formula");
        match build_hypercube_01(8, n) {
            Ok(s) => {
                let h2 = hellinger_sq(&s.candidates[0], &s.candidates[1]).unwrap_or(f64::NAN);
                let closed = s.diagnostics.pairwise_hellinger_sq.unwrap_or(f64::NAN);
                let mut prod = 0.0_f64;
                for k in 1..=6 {
                    prod = prod.max((product_direct(&s.candidates[0], &s.candidates[1], k) - hellinger_sq_product(h2, k)).abs());
                }
                out.push(Check::new(
                    name,
                    (h2 - closed).abs() < 1e-12 && prod < 1e-10,
                    format!("|H2 - closed| = {:e}, product deviation {prod:e}", (h2 - closed).abs()),
                ));
            }
            Err(e) => out.push(Check::new(name, false, e.to_string())),
        }
    }
    for h in [1.25, 2.0] {
        let name = format!("cube_convex:{h} M=8 n=4096: Hellinger closed form");
        match build_hypercube_convex(8, 4096, h) {
            Ok(s) => {
                let h2 = hellinger_sq(&s.candidates[0], &s.candidates[1]).unwrap_or(f64::NAN);
                let closed = s.diagnostics.pairwise_hellinger_sq.unwrap_or(f64::NAN);
                out.push(Check::new(name, (h2 - closed).abs() < 1e-12, format!("{:e}", (h2 - closed).abs())));
            }
            Err(e) => out.push(Check::new(name, false, e.to_string())),
        }
    }
    for kappa in [1.5, 2.0, 4.0] {
        let name = format!("selector:{kappa} M=6 h=0.1: excess closed forms, noise condition, KL bound");
        match build_selector_scenario(6, kappa, 0.1) {
            Ok(s) => {
                let w = s.param("w").unwrap_or(f64::NAN);
                let mut dev = 0.0_f64;
                for (j, row) in s.diagnostics.member_excess.iter().enumerate() {
                    for (k, e) in row.iter().enumerate() {
                        let want = if j == k {
                            selector_oracle_excess(0.1, w)
                        } else {
                            selector_off_oracle_excess(0.1, w)
                        };
                        dev = dev.max((e - want).abs());
                    }
                }
                let bound = s.diagnostics.kl_bound.unwrap_or(f64::NAN);
                let kl_ok = (1..s.candidates.len()).all(|j| {
                    kl_divergence(&s.candidates[j], &s.candidates[0]).map_or(false, |k| k <= bound)
                });
                let ok = dev < 1e-12 && s.diagnostics.margin_ok == Some(true) && kl_ok;
                out.push(Check::new(name, ok, format!("excess deviation {dev:e}, kl within bound: {kl_ok}")));
            }
            Err(e) => out.push(Check::new(name, false, e.to_string())),
        }
    }
}

/// Human-readable report, one line per check.
pub fn report(checks: &[Check]) -> String {
    let mut s = String::new();
    for c in checks {
        let tag = if c.passed { "ok  " } else { "FAIL" };
        if c.detail.is_empty() {
            s.push_str(&format!("{tag} {}\n", c.name));
        } else {
            s.push_str(&format!("{tag} {} ({})\n", c.name, c.detail));
        }
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    match checks.iter().find(|c| !c.passed) {
        None => s.push_str(&format!("all {} checks passed\n", checks.len())),
        Some(first) => s.push_str(&format!("{failed} of {} checks failed; first: {}\n", checks.len(), first.name)),
    }
    s
}
