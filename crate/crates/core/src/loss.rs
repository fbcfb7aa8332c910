//! The surrogate loss family, its closed-form derivatives and β-convexity
//! certificates.
//!
//! Losses are functions of the margin `x = y·f(x)`. Besides the classical
//! losses the family contains the interpolating scale `phi_h`: for
//! `0 ≤ h ≤ 1` it mixes hinge and 0-1 loss, for `h > 1` it is the quadratic
//! `(h−1)x² − x + 1`.

use alloc::format;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

/// Absolute slack in `[φ'(x)]² ≤ β·φ''(x)`.
pub const CONVEXITY_TOL: f64 = 1e-9;

/// Default number of grid points for certificates.
pub const DEFAULT_GRID_POINTS: usize = 10_001;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossSpec {
    /// `1{x ≤ 0}`, closed at zero.
    ZeroOne,
    /// `max(0, 1 − x)`.
    Hinge,
    /// `log2(1 + exp(−x))`.
    Logit,
    /// `exp(−x)`.
    Exp,
    /// `(1 − x)²`.
    Squared,
    /// `max(0, 1 − x)²`.
    SoftMargin2,
    /// The interpolating scale; the payload is `h ≥ 0`.
    PhiH(f64),
}

impl LossSpec {
    /// All kinds with a representative `phi_h`; handy for sweeps.
    pub const NAMED: [LossSpec; 6] = [
        LossSpec::ZeroOne,
        LossSpec::Hinge,
        LossSpec::Logit,
        LossSpec::Exp,
        LossSpec::Squared,
        LossSpec::SoftMargin2,
    ];

    pub fn phi_h(h: f64) -> Result<Self> {
        let spec = LossSpec::PhiH(h);
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            LossSpec::PhiH(h) if !(h.is_finite() && h >= 0.0) => Err(Error::InvalidLoss(
                format!("phi_h requires a finite h >= 0, got {h}"),
            )),
            _ => Ok(()),
        }
    }

    /// φ(x).
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            LossSpec::ZeroOne => zero_one(x),
            LossSpec::Hinge => hinge(x),
            LossSpec::Logit => logit(x),
            LossSpec::Exp => libm::exp(-x),
            LossSpec::Squared => (1.0 - x) * (1.0 - x),
            LossSpec::SoftMargin2 => {
                let m = hinge(x);
                m * m
            }
            LossSpec::PhiH(h) if h <= 1.0 => h * hinge(x) + (1.0 - h) * zero_one(x),
            LossSpec::PhiH(h) => (h - 1.0) * x * x - x + 1.0,
        }
    }

    /// `(φ'(x), φ''(x))` in closed form.
    pub fn derivatives(&self, x: f64) -> Result<(f64, f64)> {
        let kink = || Error::NotDifferentiable { loss: *self, x };
        match *self {
            LossSpec::ZeroOne => Err(kink()),
            LossSpec::Hinge | LossSpec::SoftMargin2 if x == 1.0 => Err(kink()),
            LossSpec::Hinge => Ok(if x < 1.0 { (-1.0, 0.0) } else { (0.0, 0.0) }),
            LossSpec::SoftMargin2 => Ok(if x < 1.0 {
                (-2.0 * (1.0 - x), 2.0)
            } else {
                (0.0, 0.0)
            }),
            LossSpec::Logit => {
                // s = 1 / (1 + e^x), evaluated without overflow.
                let s = if x >= 0.0 {
                    let e = libm::exp(-x);
                    e / (1.0 + e)
                } else {
                    1.0 / (1.0 + libm::exp(x))
                };
                let ln2 = core::f64::consts::LN_2;
                Ok((-s / ln2, s * (1.0 - s) / ln2))
            }
            LossSpec::Exp => {
                let e = libm::exp(-x);
                Ok((-e, e))
            }
            LossSpec::Squared => Ok((-2.0 * (1.0 - x), 2.0)),
            LossSpec::PhiH(h) if h > 1.0 => Ok((2.0 * (h - 1.0) * x - 1.0, 2.0 * (h - 1.0))),
            LossSpec::PhiH(h) => {
                if (h > 0.0 && x == 1.0) || (h < 1.0 && x == 0.0) {
                    Err(kink())
                } else if x < 1.0 {
                    Ok((-h, 0.0))
                } else {
                    Ok((0.0, 0.0))
                }
            }
        }
    }

    /// The convexity constant β for which `[φ']² ≤ βφ''` on `[−1, 1]`, or
    /// `None` when the loss is not β-convex for any β.
    ///
    /// For the squared and 2-norm soft margin losses the binding point is
    /// `x = −1`, where `[φ']² = 16` and `φ'' = 2`, so the constant is 8.
    pub fn beta(&self) -> Option<f64> {
        match *self {
            LossSpec::Logit => Some(core::f64::consts::E / core::f64::consts::LN_2),
            LossSpec::Exp => Some(core::f64::consts::E),
            LossSpec::Squared | LossSpec::SoftMargin2 => Some(8.0),
            LossSpec::PhiH(h) if h > 1.0 => Some(beta_h(h)),
            _ => None,
        }
    }

    /// Convex on the whole real line.
    pub fn is_convex(&self) -> bool {
        match *self {
            LossSpec::ZeroOne => false,
            LossSpec::PhiH(h) => h >= 1.0,
            _ => true,
        }
    }

    /// `a_φ = φ(−1) − φ(1)`.
    pub fn a_phi(&self) -> f64 {
        self.eval(-1.0) - self.eval(1.0)
    }
}

/// `β_h = (2h − 1)² / (2(h − 1))` for `h > 1`.
pub fn beta_h(h: f64) -> f64 {
    let a = 2.0 * h - 1.0;
    a * a / (2.0 * (h - 1.0))
}

/// See [`LossSpec::beta`].
pub fn beta_for(spec: &LossSpec) -> Option<f64> {
    spec.beta()
}

pub fn eval_loss(spec: &LossSpec, x: f64) -> f64 {
    spec.eval(x)
}

pub fn loss_derivatives(spec: &LossSpec, x: f64) -> Result<(f64, f64)> {
    spec.derivatives(x)
}

pub fn a_phi(spec: &LossSpec) -> f64 {
    spec.a_phi()
}

/// `max(−1, min(1, x))`.
pub fn clip_unit(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

#[inline]
fn zero_one(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        0.0
    }
}

#[inline]
fn hinge(x: f64) -> f64 {
    if x < 1.0 {
        1.0 - x
    } else {
        0.0
    }
}

#[inline]
fn logit(x: f64) -> f64 {
    // log(1 + e^{-x}) = max(-x, 0) + log1p(e^{-|x|})
    let ln = if x >= 0.0 {
        libm::log1p(libm::exp(-x))
    } else {
        -x + libm::log1p(libm::exp(x))
    };
    ln / core::f64::consts::LN_2
}

/// Outcome of checking `[φ'(x)]² ≤ β·φ''(x) + tol` on a grid of `[−1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityCertificate {
    pub loss: LossSpec,
    /// The certified constant, or `None` when the check failed.
    pub beta: Option<f64>,
    pub checked_on_grid: bool,
    pub grid_resolution: usize,
    /// Number of grid points where the loss was twice differentiable.
    pub points_checked: usize,
    /// Largest `[φ']² − βφ''` seen over the grid.
    pub max_violation: f64,
    /// First grid point where the inequality failed.
    pub failed_at: Option<f64>,
}

impl ConvexityCertificate {
    pub fn passed(&self) -> bool {
        self.beta.is_some()
    }
}

/// Uniform grid point `i` of `[−1, 1]` with `points` points.
pub(crate) fn unit_grid(i: usize, points: usize) -> f64 {
    -1.0 + 2.0 * (i as f64) / ((points - 1) as f64)
}

/// Checks β-convexity on a uniform grid of `[−1, 1]`, skipping points where
/// the loss has no second derivative. A grid where no point is
/// differentiable does not certify anything.
pub fn certify_beta_convexity(
    spec: &LossSpec,
    beta: f64,
    grid_points: usize,
) -> ConvexityCertificate {
    let mut cert = ConvexityCertificate {
        loss: *spec,
        beta: None,
        checked_on_grid: false,
        grid_resolution: grid_points,
        points_checked: 0,
        max_violation: f64::NEG_INFINITY,
        failed_at: None,
    };
    if grid_points < 2 || !(beta > 0.0) || !beta.is_finite() {
        return cert;
    }
    for i in 0..grid_points {
        let x = unit_grid(i, grid_points);
        let Ok((d1, d2)) = spec.derivatives(x) else {
            continue;
        };
        cert.points_checked += 1;
        let violation = d1 * d1 - beta * d2;
        if violation > cert.max_violation {
            cert.max_violation = violation;
        }
        if violation > CONVEXITY_TOL && cert.failed_at.is_none() {
            cert.failed_at = Some(x);
        }
    }
    cert.checked_on_grid = cert.points_checked > 0;
    if cert.checked_on_grid && cert.failed_at.is_none() {
        cert.beta = Some(beta);
    }
    cert
}

/// Smallest β satisfying the convexity inequality on the grid
/// (`sup [φ']²/φ''`); `None` when some checked point has `φ'' = 0` and
/// `φ' ≠ 0`, or no point is differentiable.
pub fn required_beta(spec: &LossSpec, grid_points: usize) -> Option<f64> {
    let mut worst = 0.0_f64;
    let mut any = false;
    for i in 0..grid_points.max(2) {
        let x = unit_grid(i, grid_points.max(2));
        let Ok((d1, d2)) = spec.derivatives(x) else {
            continue;
        };
        any = true;
        if d2 <= 0.0 {
            if d1 != 0.0 {
                return None;
            }
            continue;
        }
        worst = worst.max(d1 * d1 / d2);
    }
    any.then_some(worst)
}

impl fmt::Display for LossSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LossSpec::ZeroOne => f.write_str("zero_one"),
            LossSpec::Hinge => f.write_str("hinge"),
            LossSpec::Logit => f.write_str("logit"),
            LossSpec::Exp => f.write_str("exp"),
            LossSpec::Squared => f.write_str("squared"),
            LossSpec::SoftMargin2 => f.write_str("soft_margin_2"),
            LossSpec::PhiH(h) => write!(f, "phi_h:{h}"),
        }
    }
}

impl FromStr for LossSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "zero_one" => Ok(LossSpec::ZeroOne),
            "hinge" => Ok(LossSpec::Hinge),
            "logit" => Ok(LossSpec::Logit),
            "exp" => Ok(LossSpec::Exp),
            "squared" => Ok(LossSpec::Squared),
            "soft_margin_2" => Ok(LossSpec::SoftMargin2),
            _ => {
                let Some(h) = s.strip_prefix("phi_h:") else {
                    return Err(Error::InvalidLoss(format!("unknown loss `{s}`")));
                };
                let h: f64 = h
                    .parse()
                    .map_err(|_| Error::InvalidLoss(format!("bad phi_h parameter in `{s}`")))?;
                LossSpec::phi_h(h)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use proptest::prelude::*;

    const E: f64 = core::f64::consts::E;
    const LN2: f64 = core::f64::consts::LN_2;

    fn ph(h: f64) -> LossSpec {
        LossSpec::phi_h(h).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(LossSpec::Hinge.eval(0.0), 1.0);
        assert_eq!(ph(2.0).eval(1.0), 1.0);
        assert_eq!(ph(0.5).eval(-0.5), 1.25);
        assert_eq!(LossSpec::ZeroOne.eval(0.0), 1.0);
        assert_eq!(LossSpec::ZeroOne.eval(1e-300), 0.0);
        assert!((LossSpec::Logit.eval(0.0) - 1.0).abs() < 1e-15);
        assert_eq!(LossSpec::SoftMargin2.eval(2.0), 0.0);
        assert_eq!(LossSpec::SoftMargin2.eval(-1.0), 4.0);
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(LossSpec::Squared.derivatives(0.5).unwrap(), (-1.0, 2.0));
        assert_eq!(ph(2.0).derivatives(0.0).unwrap(), (-1.0, 2.0));
        assert!(matches!(
            LossSpec::Hinge.derivatives(1.0),
            Err(Error::NotDifferentiable { .. })
        ));
        assert!(LossSpec::ZeroOne.derivatives(0.3).is_err());
        assert!(ph(0.5).derivatives(0.0).is_err());
        assert!(ph(0.5).derivatives(1.0).is_err());
        // h = 1 has no jump at zero, h = 0 has no kink at one.
        assert_eq!(ph(1.0).derivatives(0.0).unwrap(), (-1.0, 0.0));
        assert_eq!(ph(0.0).derivatives(1.0).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn beta_examples() {
        assert_eq!(ph(2.0).beta(), Some(4.5));
        assert_eq!(ph(1.5).beta(), Some(4.0));
        assert_eq!(LossSpec::Hinge.beta(), None);
        assert_eq!(ph(1.0).beta(), None);
        assert_eq!(ph(0.3).beta(), None);
        assert_eq!(LossSpec::ZeroOne.beta(), None);
        assert_eq!(LossSpec::Logit.beta(), Some(E / LN2));
        assert_eq!(LossSpec::Exp.beta(), Some(E));
    }

    #[test]
    fn certificate_examples() {
        let logit = certify_beta_convexity(&LossSpec::Logit, E / LN2, DEFAULT_GRID_POINTS);
        assert!(logit.passed());
        assert_eq!(logit.points_checked, DEFAULT_GRID_POINTS);
        let hinge = certify_beta_convexity(&LossSpec::Hinge, 1e6, DEFAULT_GRID_POINTS);
        assert!(!hinge.passed());
        assert_eq!(hinge.failed_at, Some(-1.0));
        let zo = certify_beta_convexity(&LossSpec::ZeroOne, 1.0, 101);
        assert!(!zo.passed());
        assert!(!zo.checked_on_grid);
    }

    #[test]
    fn squared_losses_need_beta_eight() {
        for spec in [LossSpec::Squared, LossSpec::SoftMargin2] {
            assert!(certify_beta_convexity(&spec, 8.0, DEFAULT_GRID_POINTS).passed());
            let below = certify_beta_convexity(&spec, 8.0 - 1e-6, DEFAULT_GRID_POINTS);
            assert!(!below.passed());
            assert_eq!(below.failed_at, Some(-1.0));
            let req = required_beta(&spec, DEFAULT_GRID_POINTS).unwrap();
            assert!((req - 8.0).abs() < 1e-12);
        }
    }

    #[test]
    fn every_stated_beta_certifies() {
        let mut specs = LossSpec::NAMED.to_vec();
        for h in [0.0, 0.5, 1.0, 1.01, 1.25, 1.5, 2.0, 3.0, 10.0] {
            specs.push(ph(h));
        }
        for spec in specs {
            if let Some(beta) = spec.beta() {
                let cert = certify_beta_convexity(&spec, beta, DEFAULT_GRID_POINTS);
                assert!(cert.passed(), "{spec}: {cert:?}");
            }
        }
    }

    #[test]
    fn beta_h_minimum_is_four_at_three_halves() {
        // Grid search over h in (1, 10].
        let mut best = (f64::INFINITY, 0.0);
        for i in 1..=90_000 {
            let h = 1.0 + i as f64 * 1e-4;
            let b = beta_h(h);
            assert!(b >= 2.0);
            if b < best.0 {
                best = (b, h);
            }
        }
        assert!((best.0 - 4.0).abs() < 1e-12);
        assert!((best.1 - 1.5).abs() < 1e-9);
    }

    #[test]
    fn a_phi_examples() {
        assert_eq!(LossSpec::Hinge.a_phi(), 2.0);
        assert_eq!(LossSpec::ZeroOne.a_phi(), 1.0);
        assert_eq!(ph(2.0).a_phi(), 2.0);
    }

    #[test]
    fn clip_examples() {
        assert_eq!(clip_unit(2.0), 1.0);
        assert_eq!(clip_unit(-3.0), -1.0);
        assert_eq!(clip_unit(0.25), 0.25);
    }

    #[test]
    fn names_round_trip() {
        let mut specs = LossSpec::NAMED.to_vec();
        specs.push(ph(1.25));
        specs.push(ph(0.0));
        for spec in specs {
            let parsed: LossSpec = spec.to_string().parse().unwrap();
            assert_eq!(parsed, spec);
        }
        assert!("phi_h:-1".parse::<LossSpec>().is_err());
        assert!("logistic".parse::<LossSpec>().is_err());
    }

    proptest! {
        #[test]
        fn phi_h_interpolates_exactly(h in 0.0f64..=1.0, x in -2.0f64..=2.0) {
            let lhs = ph(h).eval(x);
            let rhs = h * LossSpec::Hinge.eval(x) + (1.0 - h) * LossSpec::ZeroOne.eval(x);
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn phi_one_is_hinge(x in -2.0f64..=2.0) {
            prop_assert_eq!(ph(1.0).eval(x), LossSpec::Hinge.eval(x));
        }

        #[test]
        fn every_loss_is_finite(x in -2.0f64..=2.0, h in 0.0f64..20.0) {
            for spec in LossSpec::NAMED.iter().copied().chain([ph(h)]) {
                prop_assert!(spec.eval(x).is_finite());
            }
        }
    }

    #[test]
    fn finite_differences_agree_with_closed_forms() {
        let mut rng = crate::rng::SplitMix64::new(0xD1FF);
        let specs = [
            LossSpec::Hinge,
            LossSpec::Logit,
            LossSpec::Exp,
            LossSpec::Squared,
            LossSpec::SoftMargin2,
            ph(0.4),
            ph(1.0),
            ph(1.25),
            ph(3.0),
        ];
        let step = 1e-5;
        for spec in specs {
            let mut tested = 0;
            while tested < 1000 {
                let x = -0.999 + 1.998 * rng.next_f64();
                // stay clear of the kinks at 0 and 1
                if x.abs() < 1e-3 || (x - 1.0).abs() < 1e-3 {
                    continue;
                }
                let (d1, d2) = spec.derivatives(x).unwrap();
                let fd1 = (spec.eval(x + step) - spec.eval(x - step)) / (2.0 * step);
                let fd2 =
                    (spec.eval(x + step) - 2.0 * spec.eval(x) + spec.eval(x - step)) / (step * step);
                assert!((d1 - fd1).abs() < 1e-6, "{spec} φ' at {x}: {d1} vs {fd1}");
                // second differences lose ~8 digits at this step
                assert!((d2 - fd2).abs() < 1e-4, "{spec} φ'' at {x}: {d2} vs {fd2}");
                // first derivative of φ' by central differences instead
                if let (Ok((a, _)), Ok((b, _))) =
                    (spec.derivatives(x + step), spec.derivatives(x - step))
                {
                    assert!((d2 - (a - b) / (2.0 * step)).abs() < 1e-6);
                }
                tested += 1;
            }
        }
    }
}
