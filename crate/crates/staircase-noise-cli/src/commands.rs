//! Command dispatch: argument resolution, evaluation, rendering, exit codes.
//!
//! Exit-code contract: 0 success, 1 verification failure (a recomputed value
//! or agreement check missed its tolerance), 2 usage or domain error, 3
//! resource-cap error (exact mode beyond the step cap).

use std::fs;

use serde_json::Value;

use staircase_noise::formulas::{
    capasso_enf, capasso_enf_delta, capasso_enf_heterogeneous, capasso_enf_moments,
    cascade_total_gain_variant, compare, friis_total, stepwise_enf,
};
use staircase_noise::oracle::{enf_from_distribution, exact_gain_pmf, mc_simulate, SimConfig};
use staircase_noise::profile::{CascadeStage, PowerGainRule, StepMoments, StepProfile};
use staircase_noise::{Error as NoiseError, EXACT_STEP_CAP};

use crate::cli::{Cli, Command, FormulaKind, ProfileArgs, RuleArg, SweepFormula};
use crate::output::{format_value, render, OutputRecord};

const DEFAULT_TEXT_DECIMALS: usize = 6;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    fn resource(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<NoiseError> for CliError {
    fn from(err: NoiseError) -> Self {
        let code = match err {
            NoiseError::ExactStepCapExceeded { .. } => 3,
            _ => 2,
        };
        Self {
            code,
            message: err.to_string(),
        }
    }
}

struct CommandOutput {
    records: Vec<OutputRecord>,
    text: String,
    /// JSON renders as an array (grid/row streams) rather than one object.
    multi: bool,
    status: u8,
}

pub fn run(cli: Cli) -> Result<u8, CliError> {
    let decimals = cli.precision.unwrap_or(DEFAULT_TEXT_DECIMALS);
    let out = match cli.command {
        Command::Compute {
            formula,
            profile,
            mean_gain,
            var_gain,
        } => cmd_compute(formula, &profile, mean_gain, var_gain, decimals)?,
        Command::Compare {
            profile,
            power_gain_rule,
        } => cmd_compare(&profile, power_gain_rule, decimals)?,
        Command::Sweep {
            p_range,
            n_range,
            formulas,
        } => cmd_sweep(&p_range, &n_range, &formulas, decimals)?,
        Command::Simulate {
            profile,
            trials,
            seed,
            chunk_size,
            exact,
        } => cmd_simulate(&profile, trials, seed, chunk_size, exact, decimals)?,
        Command::ReproduceAppendix { max_abs_error } => {
            cmd_reproduce_appendix(max_abs_error, decimals)
        }
    };

    let rendered = render(
        &out.records,
        &out.text,
        cli.format,
        cli.precision,
        out.multi,
    );
    match &cli.output {
        Some(path) => fs::write(path, rendered)
            .map_err(|err| CliError::usage(format!("cannot write {}: {err}", path.display())))?,
        None => print!("{rendered}"),
    }
    Ok(out.status)
}

/// Input flags echoed back into a record, in flag order.
type InputEcho = Vec<(String, Value)>;

/// Turn the profile flags into a validated StepProfile plus an input echo.
/// Exactly one of -p, --probs, --delta, --deltas selects the profile; the
/// homogeneous scalars additionally require -n.
fn resolve_profile(args: &ProfileArgs) -> Result<(StepProfile, InputEcho), CliError> {
    let selectors = [
        args.p.is_some(),
        args.probs.is_some(),
        args.delta.is_some(),
        args.deltas.is_some(),
    ];
    if selectors.iter().filter(|&&s| s).count() != 1 {
        return Err(CliError::usage(
            "specify exactly one of -p, --probs, --delta, --deltas",
        ));
    }

    if let Some(p) = args.p {
        let steps = args
            .steps
            .ok_or_else(|| CliError::usage("-p requires a step count -n"))?;
        let profile = StepProfile::homogeneous(p, steps)?;
        let echo = vec![("p".into(), p.into()), ("n".into(), steps.into())];
        return Ok((profile, echo));
    }
    if let Some(delta) = args.delta {
        let steps = args
            .steps
            .ok_or_else(|| CliError::usage("--delta requires a step count -n"))?;
        let profile = StepProfile::from_deltas(&vec![delta; steps as usize])?;
        let echo = vec![("delta".into(), delta.into()), ("n".into(), steps.into())];
        return Ok((profile, echo));
    }
    if args.steps.is_some() {
        return Err(CliError::usage(
            "-n only applies to the homogeneous -p/--delta forms",
        ));
    }
    if let Some(probs) = &args.probs {
        let profile = StepProfile::new(probs.clone())?;
        let echo = vec![("probs".into(), probs.clone().into())];
        return Ok((profile, echo));
    }
    let deltas = args.deltas.as_ref().expect("one selector is set");
    let profile = StepProfile::from_deltas(deltas)?;
    let echo = vec![("deltas".into(), deltas.clone().into())];
    Ok((profile, echo))
}

/// The scalar forms take exactly one of -p/--delta plus -n.
fn resolve_homogeneous(args: &ProfileArgs) -> Result<(f64, u32, InputEcho), CliError> {
    if args.probs.is_some() || args.deltas.is_some() {
        return Err(CliError::usage(
            "this formula is parametrized by -p or --delta plus -n, not a per-step list",
        ));
    }
    let steps = args
        .steps
        .ok_or_else(|| CliError::usage("missing step count -n"))?;
    match (args.p, args.delta) {
        (Some(p), None) => Ok((
            p,
            steps,
            vec![("p".into(), p.into()), ("n".into(), steps.into())],
        )),
        (None, Some(delta)) => Ok((
            1.0 - delta,
            steps,
            vec![("delta".into(), delta.into()), ("n".into(), steps.into())],
        )),
        _ => Err(CliError::usage("specify exactly one of -p, --delta")),
    }
}

fn formula_name(formula: FormulaKind) -> &'static str {
    match formula {
        FormulaKind::Capasso => "capasso",
        FormulaKind::Delta => "delta",
        FormulaKind::Heterogeneous => "heterogeneous",
        FormulaKind::Moments => "moments",
        FormulaKind::Stepwise => "stepwise",
    }
}

fn cmd_compute(
    formula: FormulaKind,
    profile: &ProfileArgs,
    mean_gain: Option<f64>,
    var_gain: Option<f64>,
    decimals: usize,
) -> Result<CommandOutput, CliError> {
    if formula != FormulaKind::Moments && (mean_gain.is_some() || var_gain.is_some()) {
        return Err(CliError::usage(
            "--mean-gain/--var-gain only apply to --formula moments",
        ));
    }

    let (value, echo) = match formula {
        FormulaKind::Capasso => {
            let (p, steps, echo) = resolve_homogeneous(profile)?;
            (capasso_enf(p, steps)?, echo)
        }
        FormulaKind::Delta => {
            let (p, steps, echo) = resolve_homogeneous(profile)?;
            (capasso_enf_delta(1.0 - p, steps)?, echo)
        }
        FormulaKind::Heterogeneous => {
            let (profile, echo) = resolve_profile(profile)?;
            (capasso_enf_heterogeneous(&profile), echo)
        }
        FormulaKind::Moments => {
            if profile.p.is_some()
                || profile.probs.is_some()
                || profile.delta.is_some()
                || profile.deltas.is_some()
            {
                return Err(CliError::usage(
                    "--formula moments is parametrized by --mean-gain, --var-gain and -n",
                ));
            }
            let (mean, var) = match (mean_gain, var_gain) {
                (Some(mean), Some(var)) => (mean, var),
                _ => {
                    return Err(CliError::usage(
                        "--formula moments requires --mean-gain and --var-gain",
                    ))
                }
            };
            let steps = profile
                .steps
                .ok_or_else(|| CliError::usage("missing step count -n"))?;
            let moments = StepMoments::new(mean, var)?;
            let echo = vec![
                ("mean_gain".into(), mean.into()),
                ("var_gain".into(), var.into()),
                ("n".into(), steps.into()),
            ];
            (capasso_enf_moments(moments, steps)?, echo)
        }
        FormulaKind::Stepwise => {
            if profile.steps.is_some() {
                return Err(CliError::usage("the stepwise form takes no step count"));
            }
            if profile.probs.is_some() || profile.deltas.is_some() {
                return Err(CliError::usage(
                    "the stepwise form is parametrized by -p or --delta",
                ));
            }
            match (profile.p, profile.delta) {
                (Some(p), None) => (stepwise_enf(p)?, vec![("p".into(), p.into())]),
                (None, Some(delta)) => (
                    stepwise_enf(1.0 - delta)?,
                    vec![("delta".into(), delta.into())],
                ),
                _ => return Err(CliError::usage("specify exactly one of -p, --delta")),
            }
        }
    };

    let mut record = OutputRecord::new().input("formula", formula_name(formula));
    for (key, v) in echo {
        record.inputs.push((key, v));
    }
    let record = record.result("capasso", value);

    Ok(CommandOutput {
        text: format!("{}\n", format_value(value, decimals)),
        records: vec![record],
        multi: false,
        status: 0,
    })
}

fn rule_to_lib(rule: RuleArg) -> PowerGainRule {
    match rule {
        RuleArg::M2 => PowerGainRule::Squared,
        RuleArg::M => PowerGainRule::Identity,
    }
}

fn rule_name(rule: RuleArg) -> &'static str {
    match rule {
        RuleArg::M2 => "m2",
        RuleArg::M => "m",
    }
}

fn cmd_compare(
    profile: &ProfileArgs,
    rule: RuleArg,
    decimals: usize,
) -> Result<CommandOutput, CliError> {
    let (profile, echo) = resolve_profile(profile)?;
    let report = compare(&profile, rule_to_lib(rule));

    let mut record = OutputRecord::new();
    for (key, v) in echo {
        record.inputs.push((key, v));
    }
    let record = record
        .input("power_gain_rule", rule_name(rule))
        .result("capasso", report.capasso)
        .result("friis_power_gain", report.friis_power_gain)
        .result("friis_gain_variant", report.friis_gain_variant)
        .result("mean_gain", report.mean_staircase_gain)
        .result("abs_discrepancy", report.abs_discrepancy);

    let mut text = String::new();
    for (key, value) in &record.results {
        let value = value.as_f64().expect("all comparison results are floats");
        text.push_str(&format!("{key:<20} {}\n", format_value(value, decimals)));
    }
    if profile.steps() >= 2 && report.abs_discrepancy > 0.0 {
        text.push_str(&format!(
            "note: the power-gain composition differs from the closed form by {} on this {}-step profile\n",
            format_value(report.abs_discrepancy, decimals),
            profile.steps(),
        ));
    }

    Ok(CommandOutput {
        records: vec![record],
        text,
        multi: false,
        status: 0,
    })
}

fn parse_float_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let parse = |s: &str| -> Result<f64, CliError> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| CliError::usage(format!("invalid number {s:?} in range {spec:?}")))
    };
    match parts.as_slice() {
        [single] => Ok(vec![parse(single)?]),
        [start, step, end] => {
            let (start, step, end) = (parse(start)?, parse(step)?, parse(end)?);
            if step.is_nan() || step <= 0.0 {
                return Err(CliError::usage(format!(
                    "range {spec:?} must have a positive step"
                )));
            }
            let mut grid = Vec::new();
            let mut k = 0u32;
            loop {
                let value = start + f64::from(k) * step;
                if value > end + 1e-9 {
                    break;
                }
                grid.push(value.min(end));
                k += 1;
            }
            if grid.is_empty() {
                return Err(CliError::usage(format!("range {spec:?} is empty")));
            }
            Ok(grid)
        }
        _ => Err(CliError::usage(format!(
            "range {spec:?} must be VALUE or START:STEP:END"
        ))),
    }
}

fn parse_step_grid(spec: &str) -> Result<Vec<u32>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let parse = |s: &str| -> Result<u32, CliError> {
        s.trim()
            .parse::<u32>()
            .map_err(|_| CliError::usage(format!("invalid step count {s:?} in range {spec:?}")))
    };
    let (start, step, end) = match parts.as_slice() {
        [single] => {
            let v = parse(single)?;
            (v, 1, v)
        }
        [start, end] => (parse(start)?, 1, parse(end)?),
        [start, step, end] => (parse(start)?, parse(step)?, parse(end)?),
        _ => {
            return Err(CliError::usage(format!(
                "range {spec:?} must be VALUE, START:END or START:STEP:END"
            )))
        }
    };
    if step == 0 {
        return Err(CliError::usage(format!(
            "range {spec:?} must have a positive step"
        )));
    }
    let grid: Vec<u32> = (start..=end).step_by(step as usize).collect();
    if grid.is_empty() {
        return Err(CliError::usage(format!("range {spec:?} is empty")));
    }
    Ok(grid)
}

fn sweep_column(formula: SweepFormula) -> &'static str {
    match formula {
        SweepFormula::Capasso => "capasso",
        SweepFormula::Friis => "friis_power_gain",
        SweepFormula::Cascade => "friis_gain_variant",
    }
}

fn staircase_stages(
    p: f64,
    steps: u32,
    rule: PowerGainRule,
) -> Result<Vec<CascadeStage>, CliError> {
    (0..steps)
        .map(|_| CascadeStage::from_step(p, rule).map_err(CliError::from))
        .collect()
}

fn cmd_sweep(
    p_range: &str,
    n_range: &str,
    formulas: &[SweepFormula],
    decimals: usize,
) -> Result<CommandOutput, CliError> {
    if formulas.is_empty() {
        return Err(CliError::usage("select at least one formula column"));
    }
    let p_grid = parse_float_grid(p_range)?;
    let n_grid = parse_step_grid(n_range)?;

    let mut records = Vec::with_capacity(p_grid.len() * n_grid.len());
    for &p in &p_grid {
        for &n in &n_grid {
            let mut record = OutputRecord::new().input("p", p).input("n", n);
            for &formula in formulas {
                let value = match formula {
                    SweepFormula::Capasso => capasso_enf(p, n)?,
                    SweepFormula::Friis => {
                        if n == 0 {
                            1.0
                        } else {
                            friis_total(&staircase_stages(p, n, PowerGainRule::Squared)?)?
                        }
                    }
                    SweepFormula::Cascade => {
                        if n == 0 {
                            1.0
                        } else {
                            cascade_total_gain_variant(&staircase_stages(
                                p,
                                n,
                                PowerGainRule::Squared,
                            )?)?
                        }
                    }
                };
                record = record.result(sweep_column(formula), value);
            }
            records.push(record);
        }
    }

    let mut text = String::from("p n");
    for &formula in formulas {
        text.push(' ');
        text.push_str(sweep_column(formula));
    }
    text.push('\n');
    for record in &records {
        let p = record.inputs[0].1.as_f64().expect("p is a float");
        let n = record.inputs[1].1.as_u64().expect("n is an integer");
        text.push_str(&format_value(p, decimals));
        text.push_str(&format!(" {n}"));
        for (_, value) in &record.results {
            let value = value.as_f64().expect("sweep results are floats");
            text.push(' ');
            text.push_str(&format_value(value, decimals));
        }
        text.push('\n');
    }

    Ok(CommandOutput {
        records,
        text,
        multi: true,
        status: 0,
    })
}

fn cmd_simulate(
    profile: &ProfileArgs,
    trials: u64,
    seed: u64,
    chunk_size: u64,
    exact: bool,
    decimals: usize,
) -> Result<CommandOutput, CliError> {
    let (profile, echo) = resolve_profile(profile)?;
    let config = SimConfig::new(trials, seed, chunk_size)?;
    if exact && profile.steps() > EXACT_STEP_CAP {
        return Err(CliError::resource(format!(
            "exact mode supports at most {EXACT_STEP_CAP} steps, got {}; drop --exact to simulate only",
            profile.steps(),
        )));
    }

    let estimate = mc_simulate(&profile, config);
    let exact_enf = if exact {
        Some(enf_from_distribution(&exact_gain_pmf(&profile)?)?)
    } else {
        None
    };

    let mut record = OutputRecord::new();
    for (key, v) in echo {
        record.inputs.push((key, v));
    }
    let mut record = record
        .input("trials", trials)
        .input("seed", seed)
        .input("chunk_size", chunk_size)
        .input("exact", exact)
        .result("enf_mc", estimate.enf)
        .result("std_error", estimate.std_error_enf)
        .result("mean_gain", estimate.mean_gain);

    let fmt = |v: f64| format_value(v, decimals);
    let mut text = format!(
        "trials       {trials}\nseed         {seed}\nchunk_size   {chunk_size}\n\
         mean_gain    {}\nvar_gain     {}\nenf_mc       {}\nstd_error    {}\n",
        fmt(estimate.mean_gain),
        fmt(estimate.var_gain),
        fmt(estimate.enf),
        fmt(estimate.std_error_enf),
    );

    let mut status = 0;
    if let Some(exact_enf) = exact_enf {
        let gap = (estimate.enf - exact_enf).abs();
        let bound = 3.0 * estimate.std_error_enf;
        let verdict = if gap <= bound { "PASS" } else { "FAIL" };
        record = record
            .result("enf_exact", exact_enf)
            .result("verdict", verdict);
        text.push_str(&format!(
            "enf_exact    {}\n|enf_mc - enf_exact| = {} <= 3*std_error = {} -> {verdict}\n",
            fmt(exact_enf),
            fmt(gap),
            fmt(bound),
        ));
        if verdict == "FAIL" {
            status = 1;
        }
    }

    Ok(CommandOutput {
        records: vec![record],
        text,
        multi: false,
        status,
    })
}

struct AppendixCheck {
    label: &'static str,
    steps: u32,
    key: &'static str,
    computed: f64,
    expected: f64,
}

/// Recompute the five published worked-example rows (homogeneous p = 0.3,
/// n = 1..3): the closed form, the power-gain composition with G = M^2, and
/// the count-gain composition.
fn appendix_checks() -> Vec<AppendixCheck> {
    const P: f64 = 0.3;
    let power_stages =
        |n: u32| staircase_stages(P, n, PowerGainRule::Squared).expect("valid probability");

    let capasso = |n: u32| capasso_enf(P, n).expect("valid probability");
    let friis = |n: u32| friis_total(&power_stages(n)).expect("non-empty cascade");
    let cascade = |n: u32| cascade_total_gain_variant(&power_stages(n)).expect("non-empty cascade");

    vec![
        AppendixCheck {
            label: "Ill.1",
            steps: 1,
            key: "capasso",
            computed: capasso(1),
            expected: 1.12426,
        },
        AppendixCheck {
            label: "Ill.1",
            steps: 1,
            key: "friis_power_gain",
            computed: friis(1),
            expected: 1.12426,
        },
        AppendixCheck {
            label: "Ill.2a",
            steps: 2,
            key: "capasso",
            computed: capasso(2),
            expected: 1.219845,
        },
        AppendixCheck {
            label: "Ill.2a",
            steps: 2,
            key: "friis_power_gain",
            computed: friis(2),
            expected: 1.197787,
        },
        AppendixCheck {
            label: "Ill.2b",
            steps: 2,
            key: "friis_gain_variant",
            computed: cascade(2),
            expected: 1.219845,
        },
        AppendixCheck {
            label: "Ill.3a",
            steps: 3,
            key: "capasso",
            computed: capasso(3),
            expected: 1.293372,
        },
        AppendixCheck {
            label: "Ill.3a",
            steps: 3,
            key: "friis_power_gain",
            computed: friis(3),
            expected: 1.241294,
        },
        AppendixCheck {
            label: "Ill.3b",
            steps: 3,
            key: "friis_gain_variant",
            computed: cascade(3),
            expected: 1.293372,
        },
    ]
}

fn cmd_reproduce_appendix(max_abs_error: f64, decimals: usize) -> CommandOutput {
    let checks = appendix_checks();

    let labels = ["Ill.1", "Ill.2a", "Ill.2b", "Ill.3a", "Ill.3b"];
    let mut records = Vec::new();
    let mut text = String::new();
    for label in labels {
        let row: Vec<&AppendixCheck> = checks.iter().filter(|c| c.label == label).collect();
        let steps = row[0].steps;
        let mut record = OutputRecord::new()
            .input("label", label)
            .input("p", 0.3)
            .input("n", steps);
        for check in &row {
            record = record.result(check.key, check.computed);
        }
        records.push(record);

        let values: Vec<String> = row
            .iter()
            .map(|c| format_value(c.computed, decimals))
            .collect();
        // Rows with two routes print "closed form vs power-gain"; Ill.1's
        // routes agree, so it prints once.
        let shown = if values.len() == 2 && values[0] != values[1] {
            format!("{} vs {}", values[0], values[1])
        } else {
            values[0].clone()
        };
        text.push_str(&format!("{label:<7} {shown}\n"));
    }

    let mismatches: Vec<&AppendixCheck> = checks
        .iter()
        .filter(|c| (c.computed - c.expected).abs() > max_abs_error)
        .collect();
    let status = if mismatches.is_empty() {
        text.push_str(&format!(
            "all {} recomputed values match the published constants (tolerance {max_abs_error:e})\n",
            checks.len(),
        ));
        0
    } else {
        for check in &mismatches {
            text.push_str(&format!(
                "MISMATCH {} {}: computed {} expected {} (tolerance {max_abs_error:e})\n",
                check.label,
                check.key,
                format_value(check.computed, 12),
                check.expected,
            ));
        }
        1
    };

    CommandOutput {
        records,
        text,
        multi: true,
        status,
    }
}
