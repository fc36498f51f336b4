use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by profile construction, the closed forms, and the oracle.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("ionization probability must lie in [0, 1], got {0}")]
    InvalidProbability(f64),

    #[error("mean step gain must be finite and >= 1, got {0}")]
    InvalidMeanGain(f64),

    #[error("step gain variance must be finite and >= 0, got {0}")]
    InvalidGainVariance(f64),

    /// The moment form divides by (mean - 1); a unit-mean stage is only
    /// meaningful when it is noiseless.
    #[error(
        "noise factor is undefined for unit mean gain with nonzero variance (var = {var_gain})"
    )]
    UnitMeanGainWithVariance { var_gain: f64 },

    #[error("stage noise factor must be finite and >= 1, got {0}")]
    InvalidNoiseFactor(f64),

    #[error("stage gain must be finite and > 0, got {0}")]
    InvalidGain(f64),

    #[error("stage power gain must be finite and > 0, got {0}")]
    InvalidPowerGain(f64),

    #[error("cascade must contain at least one stage")]
    EmptyCascade,

    #[error("gain distribution has no probability mass")]
    EmptyDistribution,

    #[error("probability mass for gain {gain} must be finite and >= 0, got {mass}")]
    InvalidMass { gain: u64, mass: f64 },

    /// The dense support of the exact distribution grows as 2^n.
    #[error("exact gain distribution supports at most {cap} steps, got {steps}")]
    ExactStepCapExceeded { steps: usize, cap: usize },

    #[error("trial count must be >= 1")]
    ZeroTrials,

    #[error("chunk size must be >= 1")]
    ZeroChunkSize,
}
