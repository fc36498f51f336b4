//! Command-line argument definitions.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "staircase-noise",
    version,
    about = "Staircase-multiplier excess noise: closed forms, cascade composition rules, \
             an exact branching-process oracle, and a reproducible Monte Carlo simulator"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,

    /// Decimal places for text output (default 6). JSON always keeps full
    /// precision; CSV keeps full precision unless this is set explicitly.
    #[arg(long, global = true)]
    pub precision: Option<usize>,

    /// Write the rendered output to a file instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
    Csv,
}

/// One staircase profile, in any of the accepted parametrizations. Exactly
/// one of -p, --probs, --delta, --deltas selects the profile; the delta
/// forms are converted to p = 1 - delta at this boundary.
#[derive(Debug, Args)]
pub struct ProfileArgs {
    /// Ionization probability of every step of a homogeneous staircase
    /// (requires -n).
    #[arg(short = 'p', long = "p", value_name = "PROB")]
    pub p: Option<f64>,

    /// Step count for the homogeneous parametrizations.
    #[arg(short = 'n', long = "n", value_name = "STEPS")]
    pub steps: Option<u32>,

    /// Per-step ionization probabilities, comma separated.
    #[arg(long, value_delimiter = ',', value_name = "P1,P2,...")]
    pub probs: Option<Vec<f64>>,

    /// Non-ionization fraction delta = 1 - p of every step (requires -n).
    #[arg(long, value_name = "DELTA")]
    pub delta: Option<f64>,

    /// Per-step non-ionization fractions, comma separated.
    #[arg(long, value_delimiter = ',', value_name = "D1,D2,...")]
    pub deltas: Option<Vec<f64>>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one closed-form noise factor
    Compute {
        /// Which closed form to evaluate.
        #[arg(long, value_enum)]
        formula: FormulaKind,

        #[command(flatten)]
        profile: ProfileArgs,

        /// Mean step gain (moment form only).
        #[arg(long, value_name = "MEAN")]
        mean_gain: Option<f64>,

        /// Step gain variance (moment form only).
        #[arg(long, value_name = "VAR")]
        var_gain: Option<f64>,
    },

    /// Evaluate every composition route on one profile and report the discrepancy
    Compare {
        #[command(flatten)]
        profile: ProfileArgs,

        /// Power-gain convention used to build the cascade stages.
        #[arg(long, value_enum, ignore_case = true, default_value_t = RuleArg::M2)]
        power_gain_rule: RuleArg,
    },

    /// Tabulate formulas over a (p, n) grid, p outer and n inner
    Sweep {
        /// Probability grid START:STEP:END (inclusive), or a single value.
        #[arg(long = "p", value_name = "START:STEP:END")]
        p_range: String,

        /// Step-count grid START:END or START:STEP:END, or a single value.
        #[arg(long = "n", value_name = "START:END")]
        n_range: String,

        /// Formula columns, comma separated, in output order.
        #[arg(
            long,
            value_enum,
            value_delimiter = ',',
            default_value = "capasso,friis,cascade"
        )]
        formulas: Vec<SweepFormula>,
    },

    /// Monte Carlo estimate of the staircase ENF, optionally checked against the exact value
    Simulate {
        #[command(flatten)]
        profile: ProfileArgs,

        /// Number of Monte Carlo trials.
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,

        /// RNG seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,

        /// Trials per deterministic RNG stream.
        #[arg(long, default_value_t = 65_536)]
        chunk_size: u64,

        /// Also compute the exact ENF (step count capped) and verify that
        /// the estimate agrees within three standard errors.
        #[arg(long)]
        exact: bool,
    },

    /// Recompute the five published worked-example rows and verify them
    ReproduceAppendix {
        /// Verification tolerance against the published constants.
        #[arg(long, hide = true, default_value_t = 5e-7)]
        max_abs_error: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormulaKind {
    /// Homogeneous total ENF in terms of p.
    Capasso,
    /// Homogeneous total ENF in terms of delta = 1 - p.
    Delta,
    /// Per-step total ENF for profiles with unequal steps.
    Heterogeneous,
    /// Total ENF from the step gain moments.
    Moments,
    /// Single-step ENF.
    Stepwise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    /// G = M^2.
    M2,
    /// G = M.
    M,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepFormula {
    /// Closed-form total ENF (column `capasso`).
    Capasso,
    /// Power-gain composition with G = M^2 (column `friis_power_gain`).
    Friis,
    /// Count-gain composition (column `friis_gain_variant`).
    Cascade,
}
