//! Independent ground truth for staircase multiplication statistics.
//!
//! The staircase is a branching process: each electron entering step x
//! independently leaves as 2 electrons with probability p_x, else as 1. Its
//! per-step offspring generating function is `f_x(s) = (1-p_x) s + p_x s^2`,
//! and the distribution of the total output count starting from one electron
//! is the coefficient sequence of the composition `f_1(f_2(...f_n(s)))`.
//! [`exact_gain_pmf`] evaluates that composition exactly by dynamic
//! programming over integer counts; [`mc_simulate`] estimates the same
//! statistics by seeded, deterministically partitioned Monte Carlo. Neither
//! path shares any arithmetic with the closed forms in
//! [`formulas`](crate::formulas), which is what makes the agreement checks
//! between them meaningful.

mod mc;
mod stats;

pub use mc::{mc_gain_histogram, mc_simulate, EnfEstimate, SimConfig};
pub use stats::RunningMoments;

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::profile::StepProfile;
use stats::neumaier_sum;

/// Largest step count accepted by [`exact_gain_pmf`]. The dense support
/// grows as 2^n; past this cap only Monte Carlo estimation is offered.
pub const EXACT_STEP_CAP: usize = 24;

/// Probability distribution over integer output gains (electrons out per
/// electron in). Stores only strictly positive masses, sorted by gain.
#[derive(Debug, Clone, PartialEq)]
pub struct GainDistribution {
    entries: Vec<(u64, f64)>,
}

impl GainDistribution {
    /// Build from (gain, mass) pairs. Masses must be finite and
    /// non-negative; zero masses are dropped and duplicate gains merged.
    pub fn from_masses<I: IntoIterator<Item = (u64, f64)>>(masses: I) -> Result<Self> {
        let mut entries: Vec<(u64, f64)> = Vec::new();
        for (gain, mass) in masses {
            if !(mass.is_finite() && mass >= 0.0) {
                return Err(Error::InvalidMass { gain, mass });
            }
            if mass > 0.0 {
                entries.push((gain, mass));
            }
        }
        entries.sort_by_key(|&(gain, _)| gain);
        entries.dedup_by(|later, earlier| {
            if later.0 == earlier.0 {
                earlier.1 += later.1;
                true
            } else {
                false
            }
        });
        Ok(Self { entries })
    }

    fn from_dense(masses: Vec<f64>) -> Self {
        let entries = masses
            .into_iter()
            .enumerate()
            .filter(|&(_, mass)| mass != 0.0)
            .map(|(gain, mass)| (gain as u64, mass))
            .collect();
        Self { entries }
    }

    fn from_counts(counts: BTreeMap<u64, u64>, trials: u64) -> Self {
        let entries = counts
            .into_iter()
            .filter(|&(_, count)| count > 0)
            .map(|(gain, count)| (gain, count as f64 / trials as f64))
            .collect();
        Self { entries }
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn mass(&self, gain: u64) -> f64 {
        match self.entries.binary_search_by_key(&gain, |&(g, _)| g) {
            Ok(i) => self.entries[i].1,
            Err(_) => 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn min_gain(&self) -> Option<u64> {
        self.entries.first().map(|&(g, _)| g)
    }

    pub fn max_gain(&self) -> Option<u64> {
        self.entries.last().map(|&(g, _)| g)
    }

    pub fn total_mass(&self) -> f64 {
        neumaier_sum(self.iter().map(|(_, m)| m))
    }

    /// Mean gain, normalized by the total mass.
    pub fn mean(&self) -> f64 {
        neumaier_sum(self.iter().map(|(g, m)| g as f64 * m)) / self.total_mass()
    }

    /// Second raw moment E[g^2], normalized by the total mass.
    pub fn second_moment(&self) -> f64 {
        let g2 = self.iter().map(|(g, m)| {
            let g = g as f64;
            g * g * m
        });
        neumaier_sum(g2) / self.total_mass()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.second_moment() - mean * mean
    }
}

/// Exact distribution of the output electron count of a staircase, starting
/// from one input electron.
///
/// Computed by composing the per-step offspring PGFs: one step with
/// probability p replaces the count polynomial c(s) by c((1-p) s + p s^2),
/// evaluated by Horner with an in-place multiply by the step kernel. The
/// support after n steps is contained in {1, ..., 2^n} and the mean equals
/// `prod_x (1 + p_x)` up to rounding.
///
/// Cost is quadratic in the final support size, so step counts above
/// [`EXACT_STEP_CAP`] are refused.
pub fn exact_gain_pmf(profile: &StepProfile) -> Result<GainDistribution> {
    let steps = profile.steps();
    if steps > EXACT_STEP_CAP {
        return Err(Error::ExactStepCapExceeded {
            steps,
            cap: EXACT_STEP_CAP,
        });
    }

    // dist[k] = P(count = k); one input electron
    let mut dist = vec![0.0, 1.0];
    for &p in profile.probs() {
        dist = compose_step(&dist, p);
        while dist.len() > 1 && dist.last() == Some(&0.0) {
            dist.pop();
        }
    }
    Ok(GainDistribution::from_dense(dist))
}

/// Substitute the step kernel u(s) = q s + p s^2 into the count polynomial:
/// Horner over the coefficients, multiplying by u in place per iteration.
fn compose_step(dist: &[f64], p: f64) -> Vec<f64> {
    let q = 1.0 - p;
    let deg = dist.len() - 1;
    let mut out = vec![0.0; 2 * deg + 1];
    out[0] = dist[deg];
    let mut out_deg = 0;
    for &coeff in dist[..deg].iter().rev() {
        out_deg += 2;
        // (out * u)[j] = q*out[j-1] + p*out[j-2]; descending j keeps the
        // reads ahead of the writes.
        for j in (2..=out_deg).rev() {
            out[j] = q * out[j - 1] + p * out[j - 2];
        }
        out[1] = q * out[0];
        out[0] = coeff;
    }
    out
}

/// ENF of a gain distribution: `E[g^2]/E[g]^2 = 1 + Var[g]/E[g]^2`.
pub fn enf_from_distribution(dist: &GainDistribution) -> Result<f64> {
    if dist.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    let mean = dist.mean();
    Ok(dist.second_moment() / (mean * mean))
}
