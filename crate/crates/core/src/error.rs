use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("truth table has {got} entries, expected 2^{n} = {expected}")]
    LengthMismatch {
        n: usize,
        expected: usize,
        got: usize,
    },

    #[error("arity {n} exceeds the exact-mode cap of {cap}; use the Monte Carlo commands")]
    ArityCap { n: usize, cap: usize },

    #[error("arity must be at least {min}, got {n}")]
    ArityTooSmall { n: usize, min: usize },

    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("bias p = {0} is outside the open interval (0, 1)")]
    InvalidBias(f64),

    #[error("coordinate {index} is out of range 1..={n}")]
    CoordinateOutOfRange { index: usize, n: usize },

    #[error("prefix length {j} is out of range 0..={n}")]
    PrefixOutOfRange { j: usize, n: usize },

    #[error("value at point {point} is not finite")]
    NonFinite { point: usize },

    #[error("entropy requires a nonnegative function; value {value} at point {point}")]
    NegativeValue { point: usize, value: f64 },

    #[error("malformed family spec: {0}")]
    BadFamily(String),

    #[error("malformed permutation: {0}")]
    BadPermutation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("function is not monotone")]
    NotMonotone,

    #[error("set is trivial (empty or full); no threshold exists")]
    TrivialSet,

    #[error("set is not invariant under the given permutations")]
    NotInvariant,

    #[error("permutation group does not act transitively on the coordinates")]
    NotTransitive,

    #[error("no symmetry group is known for this function; supply generators")]
    NoSymmetry,

    #[error("level {0} is outside the admissible open interval")]
    InvalidLevel(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("premise of the integrated bound fails at p = {p} (slack {slack})")]
    PremiseFailed { p: f64, slack: f64 },

    #[error("family {0} has no closed form above the exact-mode cap")]
    NoClosedForm(String),
}
