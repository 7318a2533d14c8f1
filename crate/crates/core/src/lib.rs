//! Energy-based fairness shields for sequential binary decision makers.
//!
//! A shield watches a stream of accept/reject decisions and flips some of
//! them at random so that a fairness value (the running acceptance rate, or
//! the acceptance-rate gap between two groups) stays within a target
//! interval. The probability of flipping is given by an energy function of
//! the current fairness value.

// `!(x > 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod energy;
pub mod error;
pub mod exactdp;
pub mod fairness;
pub mod format;
pub mod seeding;
pub mod shield;
pub mod simkit;
pub mod synthesis;

pub use analysis::{CharacteristicModel, Setting, TailBoundParams};
pub use energy::{EnergyFunction, MonotonicFamily};
pub use error::{Error, Result};
pub use exactdp::{ChainSpec, DpOptions, DpResult, Measure};
pub use shield::{Input, Mode, ShieldEngine, ShieldSpec, StepRecord};
pub use simkit::{EnvModel, ExperimentConfig};
pub use synthesis::{SynthesisInstance, SynthesisOutcome};
pub use fairness::{Domain, FairnessTarget, Group, Interval};
