//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A Yamanouchi prefix has more zeroes than its length allows; the
    /// payload is the 1-based length of the first violating prefix.
    #[error("invalid Yamanouchi symbol: prefix of length {0} dips below spin zero")]
    InvalidYamanouchi(usize),

    #[error("spin parity mismatch: twice_j = {twice_j} is not reachable on {n} qubits")]
    ParityMismatch { n: usize, twice_j: u32 },

    #[error("{what} = {value} exceeds the guard {limit}")]
    TooLarge {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("tableau is not standard")]
    NotStandard,

    #[error("coupling query out of range: {0}")]
    OutOfRange(String),

    #[error("bitstring length {got} does not match wire count {want}")]
    LengthMismatch { want: usize, got: usize },

    #[error("permutation is not a bijection")]
    NotBijection,

    #[error("invalid gate: {0}")]
    BadGate(String),

    #[error("swap block k = {k} invalid for n = {n} system wires")]
    BadK { n: usize, k: usize },

    #[error("states act on different wire counts: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("prefix on {k} qubits is longer than the state on {n} qubits")]
    PrefixTooLong { k: usize, n: usize },

    #[error("invalid parameter: {0}")]
    BadParameter(String),

    #[error("rejection sampler exceeded its cap of {0} trials")]
    SamplerStalled(usize),

    #[error("cycle lengths must be positive and sum to the box count")]
    BadPartition,
}

pub type Result<T> = std::result::Result<T, Error>;
