use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A stochastic table failed validation (row length, entry range, or row sum).
    #[error("invalid rule table at row {row}: {defect}")]
    RuleInvalid { row: usize, defect: String },

    /// A model or sampler parameter is outside its admissible range.
    #[error("parameter {param} = {value} outside {expected}")]
    ParamRange {
        param: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// An exhaustive enumeration would exceed the configured state-space guard.
    #[error("state space of {states} states exceeds the guard of {guard}")]
    StateSpaceGuard { states: u128, guard: u128 },

    /// Inclusion-exclusion produced a probability below the numeric tolerance.
    #[error(
        "envelope table entry negative beyond tolerance: word {word}, subset mask {subset:#b}, value {value:e}"
    )]
    EnvelopeNegative { word: usize, subset: u16, value: f64 },

    /// An operation that flips alternate cells needs an even ring.
    #[error("operation requires an even ring size, got n = {n}")]
    ParityError { n: usize },

    /// A requested window reaches outside the domain it must be contained in.
    #[error("window {window:?} is not contained in the domain")]
    WindowOutOfDomain { window: Vec<i64> },

    /// A window is too small to carry the requested observable.
    #[error("window too small: {detail}")]
    WindowTooSmall { detail: String },

    /// An operation defined on rings was handed a non-ring configuration.
    #[error("operation requires a ring lattice")]
    RingRequired,

    /// A model description (zoo name or JSON file) is malformed; the
    /// message carries its own context.
    #[error("{0}")]
    ModelFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
