//! Classifier aggregation under surrogate losses.
//!
//! This crate holds the algorithmic core: the loss family with its
//! β-convexity certificates, finite joint distributions with exact risks,
//! the four aggregation procedures (ERM, penalized ERM, exponential
//! weights and cumulative exponential weights), the adversarial
//! distribution families used to probe aggregation rates, and the pieces of
//! the Monte Carlo harness that do not touch IO.
//!
//! Everything here is `no_std` with `alloc`; file formats, configuration,
//! parallel grid execution and the CLI live in the `aggrates-runner` crate.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod aggregation;
pub mod distribution;
mod error;
pub mod harness;
pub mod loss;
mod num;
pub mod rng;
pub mod scenario;

pub use aggregation::{
    aew_weights, caew_weights, erm, mixture_classifier, penalized_erm, PenaltySpec, Procedure,
    Temperature, WeightVector,
};
pub use distribution::{
    Classifier, Dataset, Dictionary, FiniteJointDistribution, Label, MarginSpec, Observation,
};
pub use error::{Error, Result};
pub use harness::{ExperimentPlan, HRule, RateFit, RegretRecord, ScenarioTemplate};
pub use loss::{ConvexityCertificate, LossSpec};
pub use scenario::{Scenario, ScenarioDiagnostics};
