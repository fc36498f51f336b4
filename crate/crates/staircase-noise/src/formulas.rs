//! Closed-form excess noise factors for staircase multipliers, and the two
//! cascade composition rules they are compared against.
//!
//! The excess noise factor (ENF) of a random multiplier m is
//! `F = <m^2>/<m>^2 = 1 + var(m)/<m>^2`; F = 1 means noiseless gain. For an
//! n-step staircase with per-step ionization probability p the total ENF in
//! common use is
//!
//! ```text
//! F = 1 + ((1 - p)/(1 + p)) * (1 - (1 + p)^-n)
//! ```
//!
//! with equivalent forms in terms of delta = 1 - p, per-step moments, or a
//! heterogeneous per-step sum. A cascade of stages with noise factors F_x can
//! also be composed two ways: dividing by products of stage *power* gains G
//! (the standardized cascade rule) or by products of stage count gains M. The
//! two agree for a single stage and diverge for longer chains; [`compare`]
//! evaluates every route on the same profile and reports the discrepancy.

use crate::error::{Error, Result};
use crate::profile::{check_probability, CascadeStage, PowerGainRule, StepMoments, StepProfile};

/// Decay factor `base^-steps`, underflowing to 0 for very large step counts.
fn inverse_power(base: f64, steps: u32) -> f64 {
    base.powi(-(steps.min(i32::MAX as u32) as i32))
}

/// Total ENF of a homogeneous n-step staircase:
/// `1 + ((1 - p)/(1 + p)) * (1 - (1 + p)^-n)`.
///
/// Returns exactly 1 for n = 0, p = 0, and p = 1.
pub fn capasso_enf(p: f64, steps: u32) -> Result<f64> {
    let p = check_probability(p)?;
    let mean_step_gain = 1.0 + p;
    let decay = inverse_power(mean_step_gain, steps);
    Ok(1.0 + (1.0 - p) / mean_step_gain * (1.0 - decay))
}

/// Total ENF in the complementary parametrization delta = 1 - p:
/// `1 + (delta/(2 - delta)) * (1 - (2 - delta)^-n)`.
pub fn capasso_enf_delta(delta: f64, steps: u32) -> Result<f64> {
    let delta = check_probability(delta)?;
    let mean_step_gain = 2.0 - delta;
    let decay = inverse_power(mean_step_gain, steps);
    Ok(1.0 + delta / mean_step_gain * (1.0 - decay))
}

/// Total ENF of a staircase whose steps may ionize with different
/// probabilities:
///
/// ```text
/// F = 1 + sum_i var(m_i) / (<m_i>^2 * prod_{j<i} <m_j>)
/// ```
///
/// with `<m_i> = 1 + p_i` and `var(m_i) = p_i (1 - p_i)`. Reduces to
/// [`capasso_enf`] when all steps are equal. Step order matters: earlier
/// steps appear in the denominators of all later terms.
pub fn capasso_enf_heterogeneous(profile: &StepProfile) -> f64 {
    let mut enf = 1.0;
    let mut upstream_gain = 1.0;
    for &p in profile.probs() {
        let mean = 1.0 + p;
        enf += p * (1.0 - p) / (mean * mean * upstream_gain);
        upstream_gain *= mean;
    }
    enf
}

/// Total ENF of n identical stages described only by their gain moments:
/// `1 + var(m)/(<m>(<m> - 1)) * (1 - <m>^-n)`.
///
/// The form divides by `<m> - 1`, so a unit-mean stage is accepted only when
/// it is noiseless (returns 1, the continuous limit); unit mean with nonzero
/// variance is a domain error.
pub fn capasso_enf_moments(moments: StepMoments, steps: u32) -> Result<f64> {
    let mean = moments.mean_gain();
    let var = moments.var_gain();
    if mean == 1.0 {
        return if var == 0.0 {
            Ok(1.0)
        } else {
            Err(Error::UnitMeanGainWithVariance { var_gain: var })
        };
    }
    let decay = inverse_power(mean, steps);
    Ok(1.0 + var / (mean * (mean - 1.0)) * (1.0 - decay))
}

/// ENF of a single staircase step: `1 + p(1 - p)/(1 + p)^2`.
///
/// Algebraically identical to `capasso_enf(p, 1)`.
pub fn stepwise_enf(p: f64) -> Result<f64> {
    let p = check_probability(p)?;
    let mean = 1.0 + p;
    Ok(1.0 + p * (1.0 - p) / (mean * mean))
}

fn compose_cascade<F>(stages: &[CascadeStage], denominator_gain: F) -> Result<f64>
where
    F: Fn(&CascadeStage) -> f64,
{
    let (first, rest) = stages.split_first().ok_or(Error::EmptyCascade)?;
    let mut total = first.noise_factor();
    let mut cumulative_gain = denominator_gain(first);
    for stage in rest {
        total += (stage.noise_factor() - 1.0) / cumulative_gain;
        cumulative_gain *= denominator_gain(stage);
    }
    Ok(total)
}

/// Total noise factor of a cascade under the standardized composition rule:
/// `F_1 + sum_{i>=2} (F_i - 1) / prod_{j<i} G_j` with G the stage *power*
/// gains. A single stage composes to its own noise factor exactly.
pub fn friis_total(stages: &[CascadeStage]) -> Result<f64> {
    compose_cascade(stages, |s| s.power_gain())
}

/// Cascade composition with the stage count gains M in the denominators
/// where [`friis_total`] uses the power gains G. Over staircase-step stages
/// this variant telescopes to [`capasso_enf`]; it is kept separate so the
/// two readings can be compared on equal terms.
pub fn cascade_total_gain_variant(stages: &[CascadeStage]) -> Result<f64> {
    compose_cascade(stages, |s| s.gain())
}

/// Mean total gain of a staircase: `prod_x (1 + p_x)`, i.e. `(1 + p)^n` for
/// homogeneous profiles.
pub fn mean_staircase_gain(profile: &StepProfile) -> f64 {
    profile.probs().iter().map(|&p| 1.0 + p).product()
}

/// Every composition route evaluated on one step profile.
#[derive(Debug, Clone, PartialEq)]
pub struct EnfComparisonReport {
    pub profile: StepProfile,
    /// Heterogeneous closed form (the per-step sum).
    pub capasso: f64,
    /// Power-gain cascade composition over the profile's stages.
    pub friis_power_gain: f64,
    /// Count-gain cascade composition over the same stages.
    pub friis_gain_variant: f64,
    pub mean_staircase_gain: f64,
    /// `|capasso - friis_power_gain|`.
    pub abs_discrepancy: f64,
}

/// Evaluate the closed form and both cascade compositions on one profile.
///
/// Stages are built per step with the stepwise noise factor, M = 1 + p_x,
/// and G from `rule`. The count-gain composition always telescopes back to
/// the closed form; the power-gain composition falls below it for n >= 2
/// under the G = M^2 rule. The empty profile is the degenerate noiseless
/// device: every field is 1.
pub fn compare(profile: &StepProfile, rule: PowerGainRule) -> EnfComparisonReport {
    if profile.is_empty() {
        return EnfComparisonReport {
            profile: profile.clone(),
            capasso: 1.0,
            friis_power_gain: 1.0,
            friis_gain_variant: 1.0,
            mean_staircase_gain: 1.0,
            abs_discrepancy: 0.0,
        };
    }

    let stages: Vec<CascadeStage> = profile
        .probs()
        .iter()
        .map(|&p| CascadeStage::from_step(p, rule).expect("profile probabilities are validated"))
        .collect();

    let capasso = capasso_enf_heterogeneous(profile);
    let friis_power_gain = friis_total(&stages).expect("stages are non-empty");
    let friis_gain_variant = cascade_total_gain_variant(&stages).expect("stages are non-empty");

    debug_assert!(
        (capasso - friis_gain_variant).abs() <= 1e-12 * capasso,
        "count-gain composition must telescope to the closed form"
    );

    EnfComparisonReport {
        profile: profile.clone(),
        capasso,
        friis_power_gain,
        friis_gain_variant,
        mean_staircase_gain: mean_staircase_gain(profile),
        abs_discrepancy: (capasso - friis_power_gain).abs(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Published worked-example constants, printed to 6 decimal places; half
    // a unit in the last printed place.
    const PRINTED_TOL: f64 = 5e-7;

    fn staircase_stages(p: f64, n: usize, rule: PowerGainRule) -> Vec<CascadeStage> {
        (0..n)
            .map(|_| CascadeStage::from_step(p, rule).unwrap())
            .collect()
    }

    #[test]
    fn capasso_matches_published_values() {
        assert!((capasso_enf(0.3, 1).unwrap() - 1.12426).abs() < PRINTED_TOL);
        assert!((capasso_enf(0.3, 2).unwrap() - 1.219845).abs() < PRINTED_TOL);
        assert!((capasso_enf(0.3, 3).unwrap() - 1.293372).abs() < PRINTED_TOL);
    }

    #[test]
    fn capasso_is_exactly_one_at_the_boundaries() {
        assert_eq!(capasso_enf(0.0, 5).unwrap(), 1.0);
        assert_eq!(capasso_enf(1.0, 5).unwrap(), 1.0);
        assert_eq!(capasso_enf(0.3, 0).unwrap(), 1.0);
    }

    #[test]
    fn capasso_rejects_invalid_probability() {
        assert_eq!(capasso_enf(1.2, 3), Err(Error::InvalidProbability(1.2)));
        assert_eq!(capasso_enf(-0.1, 3), Err(Error::InvalidProbability(-0.1)));
    }

    #[test]
    fn delta_form_matches_p_form() {
        assert!((capasso_enf_delta(0.7, 2).unwrap() - 1.219845).abs() < PRINTED_TOL);
        assert_eq!(capasso_enf_delta(1.0, 4).unwrap(), 1.0);
        // Independently derived: exact gain distribution for p = 0.5, n = 2
        // has E[g] = 2.25 and E[g^2] = 6, so F = 6/2.25^2 = 32/27.
        let expected = 32.0 / 27.0;
        let f = capasso_enf_delta(0.5, 2).unwrap();
        assert!((f - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn delta_form_matches_p_form_tightly_on_exact_inputs() {
        // dyadic deltas make 1 - delta exact, isolating evaluation rounding
        for k in 0..=16 {
            let delta = k as f64 / 16.0;
            for n in [0u32, 1, 2, 5, 17, 64] {
                let a = capasso_enf_delta(delta, n).unwrap();
                let b = capasso_enf(1.0 - delta, n).unwrap();
                assert!((a - b).abs() <= 1e-15 * a.max(b), "delta={delta} n={n}");
            }
        }
    }

    #[test]
    fn heterogeneous_form_reduces_to_homogeneous() {
        let profile = StepProfile::homogeneous(0.3, 2).unwrap();
        let f = capasso_enf_heterogeneous(&profile);
        assert!((f - 1.219845).abs() < PRINTED_TOL);
        assert!((f - capasso_enf(0.3, 2).unwrap()).abs() < 1e-12 * f);

        let empty = StepProfile::new(vec![]).unwrap();
        assert_eq!(capasso_enf_heterogeneous(&empty), 1.0);
    }

    #[test]
    fn heterogeneous_two_step_value() {
        // Exact distribution for steps [0.5, 0.3]: E[g] = 1.95,
        // E[g^2] = 4.54, so F = 4.54/1.95^2 (enumerated by hand in the
        // oracle tests).
        let profile = StepProfile::new(vec![0.5, 0.3]).unwrap();
        let f = capasso_enf_heterogeneous(&profile);
        let expected = 4.54 / (1.95 * 1.95);
        assert!((f - expected).abs() < 1e-12 * expected);
        assert!((f - 1.193951).abs() < PRINTED_TOL);
    }

    #[test]
    fn heterogeneous_is_order_sensitive() {
        let ab = capasso_enf_heterogeneous(&StepProfile::new(vec![0.5, 0.3]).unwrap());
        let ba = capasso_enf_heterogeneous(&StepProfile::new(vec![0.3, 0.5]).unwrap());
        assert!((ab - ba).abs() > 1e-3);
    }

    #[test]
    fn moment_form_matches_published_values() {
        let m = StepMoments::new(1.3, 0.21).unwrap();
        assert!((capasso_enf_moments(m, 3).unwrap() - 1.293372).abs() < PRINTED_TOL);

        let noiseless = StepMoments::new(2.0, 0.0).unwrap();
        assert_eq!(capasso_enf_moments(noiseless, 7).unwrap(), 1.0);

        let m = StepMoments::new(1.5, 0.25).unwrap();
        let expected = 32.0 / 27.0; // same distribution as p = 0.5, n = 2
        assert!((capasso_enf_moments(m, 2).unwrap() - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn moment_form_unit_mean_singularity() {
        let identity = StepMoments::new(1.0, 0.0).unwrap();
        assert_eq!(capasso_enf_moments(identity, 5).unwrap(), 1.0);

        let contradictory = StepMoments::new(1.0, 0.1).unwrap();
        assert_eq!(
            capasso_enf_moments(contradictory, 5),
            Err(Error::UnitMeanGainWithVariance { var_gain: 0.1 })
        );
    }

    #[test]
    fn stepwise_matches_published_value() {
        assert!((stepwise_enf(0.3).unwrap() - 1.12426).abs() < PRINTED_TOL);
        assert_eq!(stepwise_enf(0.0).unwrap(), 1.0);
        assert_eq!(stepwise_enf(1.0).unwrap(), 1.0);
        let f = stepwise_enf(0.5).unwrap();
        assert!((f - (1.0 + 0.25 / 2.25)).abs() < 1e-15);
    }

    #[test]
    fn stepwise_equals_single_step_total() {
        let mut p = 0.0;
        while p <= 1.0 {
            let a = stepwise_enf(p).unwrap();
            let b = capasso_enf(p, 1).unwrap();
            assert!((a - b).abs() <= 1e-15 * a, "p = {p}: {a} vs {b}");
            p += 0.01;
        }
    }

    #[test]
    fn friis_total_matches_published_values() {
        let f2 = friis_total(&staircase_stages(0.3, 2, PowerGainRule::Squared)).unwrap();
        assert!((f2 - 1.197787).abs() < PRINTED_TOL);

        let f3 = friis_total(&staircase_stages(0.3, 3, PowerGainRule::Squared)).unwrap();
        assert!((f3 - 1.241294).abs() < PRINTED_TOL);
    }

    #[test]
    fn friis_single_stage_is_its_noise_factor() {
        let stage = CascadeStage::from_step(0.3, PowerGainRule::Squared).unwrap();
        assert_eq!(friis_total(&[stage]).unwrap(), stage.noise_factor());
    }

    #[test]
    fn friis_noiseless_stages_compose_to_one() {
        let stages: Vec<CascadeStage> = [1.5, 2.0, 3.0]
            .iter()
            .map(|&m| CascadeStage::new(1.0, m, m * m).unwrap())
            .collect();
        assert_eq!(friis_total(&stages).unwrap(), 1.0);
        assert_eq!(cascade_total_gain_variant(&stages).unwrap(), 1.0);
    }

    #[test]
    fn empty_cascade_is_rejected() {
        assert_eq!(friis_total(&[]), Err(Error::EmptyCascade));
        assert_eq!(cascade_total_gain_variant(&[]), Err(Error::EmptyCascade));
    }

    #[test]
    fn gain_variant_matches_published_values() {
        let f2 =
            cascade_total_gain_variant(&staircase_stages(0.3, 2, PowerGainRule::Squared)).unwrap();
        assert!((f2 - 1.219845).abs() < PRINTED_TOL);

        let f3 =
            cascade_total_gain_variant(&staircase_stages(0.3, 3, PowerGainRule::Squared)).unwrap();
        assert!((f3 - 1.293372).abs() < PRINTED_TOL);
    }

    #[test]
    fn mean_gain_is_the_product_of_step_means() {
        let profile = StepProfile::homogeneous(0.3, 2).unwrap();
        assert!((mean_staircase_gain(&profile) - 1.69).abs() < 1e-15);

        let empty = StepProfile::new(vec![]).unwrap();
        assert_eq!(mean_staircase_gain(&empty), 1.0);

        let hetero = StepProfile::new(vec![0.5, 0.3]).unwrap();
        assert!((mean_staircase_gain(&hetero) - 1.95).abs() < 1e-15);
    }

    #[test]
    fn compare_reports_the_divergence() {
        let profile = StepProfile::homogeneous(0.3, 2).unwrap();
        let report = compare(&profile, PowerGainRule::Squared);
        assert!((report.capasso - 1.219845).abs() < PRINTED_TOL);
        assert!((report.friis_power_gain - 1.197787).abs() < PRINTED_TOL);
        assert!((report.friis_gain_variant - 1.219845).abs() < PRINTED_TOL);
        assert!((report.mean_staircase_gain - 1.69).abs() < 1e-15);
        assert!(
            (report.abs_discrepancy - (report.capasso - report.friis_power_gain).abs()).abs()
                == 0.0
        );
        assert!(report.abs_discrepancy > 0.02);
    }

    #[test]
    fn compare_single_step_is_rule_independent() {
        let profile = StepProfile::homogeneous(0.3, 1).unwrap();
        for rule in [PowerGainRule::Squared, PowerGainRule::Identity] {
            let report = compare(&profile, rule);
            assert!((report.capasso - 1.12426).abs() < PRINTED_TOL);
            assert!((report.friis_power_gain - report.capasso).abs() < 1e-15);
            assert!((report.friis_gain_variant - report.capasso).abs() < 1e-15);
        }
    }

    #[test]
    fn compare_identity_rule_collapses_the_gap() {
        let profile = StepProfile::homogeneous(0.3, 3).unwrap();
        let report = compare(&profile, PowerGainRule::Identity);
        assert!((report.friis_power_gain - 1.293372).abs() < PRINTED_TOL);
        // With G = M both compositions run the same arithmetic.
        assert_eq!(report.friis_power_gain, report.friis_gain_variant);
    }

    #[test]
    fn compare_empty_profile_is_noiseless() {
        let empty = StepProfile::new(vec![]).unwrap();
        let report = compare(&empty, PowerGainRule::Squared);
        assert_eq!(report.capasso, 1.0);
        assert_eq!(report.friis_power_gain, 1.0);
        assert_eq!(report.friis_gain_variant, 1.0);
        assert_eq!(report.mean_staircase_gain, 1.0);
        assert_eq!(report.abs_discrepancy, 0.0);
    }
}
