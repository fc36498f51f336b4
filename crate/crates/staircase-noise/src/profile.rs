//! Staircase step profiles and generic cascade-stage descriptions.

use crate::error::{Error, Result};
use crate::formulas::stepwise_enf;

pub(crate) fn check_probability(p: f64) -> Result<f64> {
    if p.is_finite() && (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(Error::InvalidProbability(p))
    }
}

/// Per-step ionization probabilities of an n-step staircase multiplier.
///
/// An electron entering step x ionizes with probability `p_x` and leaves the
/// step as 2 electrons, otherwise as 1. The empty profile (n = 0) is the
/// degenerate device with deterministic unit gain. The complementary
/// parametrization `delta_x = 1 - p_x` is exposed only as a derived view so
/// the two cannot drift apart.
#[derive(Debug, Clone, PartialEq)]
pub struct StepProfile {
    probs: Vec<f64>,
}

impl StepProfile {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        for &p in &probs {
            check_probability(p)?;
        }
        Ok(Self { probs })
    }

    /// Staircase with the same ionization probability at every step.
    pub fn homogeneous(p: f64, steps: u32) -> Result<Self> {
        let p = check_probability(p)?;
        Ok(Self {
            probs: vec![p; steps as usize],
        })
    }

    /// Build from the complementary fractions `delta_x = 1 - p_x` of
    /// electrons that do not ionize.
    pub fn from_deltas(deltas: &[f64]) -> Result<Self> {
        let probs = deltas
            .iter()
            .map(|&d| check_probability(d).map(|d| 1.0 - d))
            .collect::<Result<Vec<f64>>>()?;
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Derived view: `delta_x = 1 - p_x`.
    pub fn deltas(&self) -> impl Iterator<Item = f64> + '_ {
        self.probs.iter().map(|&p| 1.0 - p)
    }

    pub fn steps(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// Mean and variance of the gain of a single multiplication step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepMoments {
    mean_gain: f64,
    var_gain: f64,
}

impl StepMoments {
    pub fn new(mean_gain: f64, var_gain: f64) -> Result<Self> {
        if !(mean_gain.is_finite() && mean_gain >= 1.0) {
            return Err(Error::InvalidMeanGain(mean_gain));
        }
        if !(var_gain.is_finite() && var_gain >= 0.0) {
            return Err(Error::InvalidGainVariance(var_gain));
        }
        Ok(Self {
            mean_gain,
            var_gain,
        })
    }

    /// Exact moments of a staircase step: the gain is 2 with probability p,
    /// else 1, so the mean is 1 + p and the variance p(1 - p).
    pub fn bernoulli_step(p: f64) -> Result<Self> {
        let p = check_probability(p)?;
        Ok(Self {
            mean_gain: 1.0 + p,
            var_gain: p * (1.0 - p),
        })
    }

    pub fn mean_gain(&self) -> f64 {
        self.mean_gain
    }

    pub fn var_gain(&self) -> f64 {
        self.var_gain
    }
}

/// How a stage's particle-count gain M maps to the power gain G used by the
/// power-gain cascade composition.
///
/// The two readings give different totals for multi-stage cascades, so the
/// rule is an explicit parameter everywhere rather than a baked-in
/// convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PowerGainRule {
    /// G = M^2: power scales as the square of the count gain.
    #[default]
    Squared,
    /// G = M: power gain taken equal to the count gain.
    Identity,
}

impl PowerGainRule {
    pub fn power_gain(self, gain: f64) -> f64 {
        match self {
            PowerGainRule::Squared => gain * gain,
            PowerGainRule::Identity => gain,
        }
    }
}

/// One stage of a generic cascade network: noise factor F, particle-count
/// gain M, and power gain G.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CascadeStage {
    noise_factor: f64,
    gain: f64,
    power_gain: f64,
}

impl CascadeStage {
    pub fn new(noise_factor: f64, gain: f64, power_gain: f64) -> Result<Self> {
        if !(noise_factor.is_finite() && noise_factor >= 1.0) {
            return Err(Error::InvalidNoiseFactor(noise_factor));
        }
        if !(gain.is_finite() && gain > 0.0) {
            return Err(Error::InvalidGain(gain));
        }
        if !(power_gain.is_finite() && power_gain > 0.0) {
            return Err(Error::InvalidPowerGain(power_gain));
        }
        Ok(Self {
            noise_factor,
            gain,
            power_gain,
        })
    }

    /// Cascade-stage equivalent of one staircase step: F from the stepwise
    /// noise factor, M = 1 + p, and G from the chosen power-gain rule.
    pub fn from_step(p: f64, rule: PowerGainRule) -> Result<Self> {
        let p = check_probability(p)?;
        let gain = 1.0 + p;
        Ok(Self {
            noise_factor: stepwise_enf(p).expect("probability already validated"),
            gain,
            power_gain: rule.power_gain(gain),
        })
    }

    pub fn noise_factor(&self) -> f64 {
        self.noise_factor
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn power_gain(&self) -> f64 {
        self.power_gain
    }
}
