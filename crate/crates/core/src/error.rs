//! Error taxonomy for the whole crate.
//!
//! Every fallible operation returns [`Error`]. Callers that need to pick a
//! process exit status can use [`Error::category`]: malformed data, bad
//! dimensions and unachievable hyperparameters are [`ErrorCategory::Input`],
//! while solver divergence and violated numerical preconditions are
//! [`ErrorCategory::Numerical`].

use thiserror::Error;

/// Convenient alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification of an error, used for exit-status mapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// The caller supplied something malformed or out of range.
    Input,
    /// An algorithm failed to meet its numerical contract.
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dataset is empty")]
    EmptyDataset,

    #[error("example {index} has {got} features, expected {expected}")]
    RaggedFeatures {
        index: usize,
        expected: usize,
        got: usize,
    },

    #[error("label {value} is not in {{-1, +1}}")]
    BadLabel { value: f64 },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("voter index {index} out of range for 2n = {size}")]
    VoterIndexOutOfRange { index: usize, size: usize },

    #[error("expected {expected} weights, got {got}")]
    WeightCountMismatch { expected: usize, got: usize },

    #[error("posterior weights sum to {sum}, not 1")]
    UnnormalizedPosterior { sum: f64 },

    #[error("negative posterior weight {value} at index {index}")]
    NegativeWeight { index: usize, value: f64 },

    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },

    #[error("kernel value {value} for pair ({row}, {col}) lies outside [-1, 1]")]
    KernelOutOfRange { row: usize, col: usize, value: f64 },

    #[error("first margin moment {mu1} is not positive: Gibbs risk >= 1/2, C-bound undefined")]
    CBoundUndefined { mu1: f64 },

    #[error("moments are inconsistent: second moment {mu2} < squared first moment {mu1_sq}")]
    InconsistentMoments { mu1_sq: f64, mu2: f64 },

    #[error("rate {value} must lie in [0, 1/2) for this bound")]
    RateOutOfRange { value: f64 },

    #[error("{name} = {value} is outside its valid range {range}")]
    ParameterOutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("sample size m must be positive")]
    ZeroSampleSize,

    #[error("this bound requires an unlabeled sample size m_u")]
    MissingUnlabeledSize,

    #[error("this bound requires an aligned (quasi-uniform) posterior")]
    NotAligned,

    #[error("this bound requires sample-compression size {expected}, voters report {got}")]
    CompressionMismatch { expected: u32, got: u32 },

    #[error("margin target {target} is not achievable: current first moment is {current}")]
    MarginTargetTooLarge { current: f64, target: f64 },

    #[error("posterior has zero margin spread, transformation undefined")]
    ZeroMarginSpread,

    #[error("mu is not realizable on this sample: achievable range is [{lo}, {hi}]")]
    InfeasibleTarget { lo: f64, hi: f64 },

    #[error("matrix is not symmetric: |M[{row}][{col}] - M[{col}][{row}]| = {delta}")]
    Asymmetric { row: usize, col: usize, delta: f64 },

    #[error("matrix is not positive semidefinite: smallest eigenvalue estimate {eigenvalue}")]
    NotPsd { eigenvalue: f64 },

    #[error("solver stopped after {iterations} iterations with KKT residual {residual}")]
    SolverDiverged { iterations: usize, residual: f64 },

    #[error("weak learner cannot beat 1/2 at round {round}; no rounds completed")]
    NoUsefulWeakLearner { round: usize },

    #[error("no rounds with a defined value for this stopping criterion")]
    CriterionUndefined,

    #[error("sign test needs at least one pair")]
    NoPairs,

    #[error("all grid cells failed: {summary}")]
    AllCellsFailed { summary: String },

    #[error("{context}")]
    InvalidInput { context: String },
}

impl Error {
    /// Which exit-status bucket this error belongs to.
    pub fn category(&self) -> ErrorCategory {
        use Error::*;
        match self {
            InconsistentMoments { .. }
            | CBoundUndefined { .. }
            | NotPsd { .. }
            | SolverDiverged { .. }
            | ZeroMarginSpread
            | MarginTargetTooLarge { .. }
            | NoUsefulWeakLearner { .. }
            | CriterionUndefined => ErrorCategory::Numerical,
            _ => ErrorCategory::Input,
        }
    }
}
