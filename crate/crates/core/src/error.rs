use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("subsets belong to different ground sets")]
    GroundMismatch,

    #[error("{what}: n = {n} exceeds the cap of {cap}")]
    CapExceeded {
        what: &'static str,
        n: usize,
        cap: usize,
    },

    #[error("malformed set function spec: {0}")]
    MalformedSpec(String),

    #[error("ground set: {0}")]
    InvalidGroundSet(String),

    #[error("unknown element label {0:?}")]
    UnknownLabel(String),

    #[error("cannot combine an exact value with an approximate one")]
    MixedMode,

    #[error("division by zero")]
    DivisionByZero,

    #[error("set function property violated: {0}")]
    PropertyViolation(String),

    #[error("vector lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("negative entry {0}")]
    NegativeEntry(String),

    #[error("prerequisite properties fail: {}", .0.join(", "))]
    PrereqFailed(Vec<String>),

    #[error("invalid number {0:?}")]
    InvalidNumber(String),
}
