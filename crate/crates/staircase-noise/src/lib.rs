//! Multiplication-noise analysis for staircase avalanche multipliers.
//!
//! A staircase device multiplies charge over n discrete steps; an electron
//! entering step x ionizes with probability p_x and leaves as two electrons,
//! else as one. This crate provides three independent views of the noise of
//! that process:
//!
//! - [`formulas`]: the closed-form excess noise factors in circulation
//!   (p-form, delta-form, heterogeneous per-step sum, moment form, stepwise
//!   factor) and the two cascade composition rules they descend from, one
//!   dividing by stage power gains and one by stage count gains.
//! - [`oracle`]: exact output-gain distributions via probability generating
//!   function composition, plus a seeded, deterministically partitioned
//!   Monte Carlo simulator for the same statistics.
//! - [`formulas::compare`]: every route evaluated side by side on one step
//!   profile, with the discrepancy between the compositions reported rather
//!   than adjudicated.
//!
//! All noise factors are linear-scale and dimensionless (never decibels);
//! gains are dimensionless electron-count ratios. Everything is pure and
//! thread-safe; the Monte Carlo runner parallelizes internally while staying
//! a deterministic function of its config.

pub mod error;
pub mod formulas;
pub mod oracle;
pub mod profile;

pub use error::{Error, Result};
pub use formulas::{
    capasso_enf, capasso_enf_delta, capasso_enf_heterogeneous, capasso_enf_moments,
    cascade_total_gain_variant, compare, friis_total, mean_staircase_gain, stepwise_enf,
    EnfComparisonReport,
};
pub use oracle::{
    enf_from_distribution, exact_gain_pmf, mc_gain_histogram, mc_simulate, EnfEstimate,
    GainDistribution, SimConfig, EXACT_STEP_CAP,
};
pub use profile::{CascadeStage, PowerGainRule, StepMoments, StepProfile};
