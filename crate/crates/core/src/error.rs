use alloc::vec::Vec;
use core::fmt;

/// Errors raised by model construction, evaluation and the annealer.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A variable or node index was not below the declared size.
    IndexOutOfRange {
        index: usize,
        len: usize,
    },
    /// A coefficient or weight was NaN or infinite.
    NonFinite {
        what: &'static str,
    },
    /// A bit vector did not match the model size.
    LengthMismatch {
        expected: usize,
        actual: usize,
    },
    /// Edge weight was zero or negative.
    NonPositiveWeight {
        u: usize,
        v: usize,
    },
    SelfLoop {
        node: usize,
    },
    DuplicateEdge {
        u: usize,
        v: usize,
    },
    /// The graph has no edge weight, so modularity is undefined.
    EmptyGraph,
    EmptyNumberSet,
    /// Number sets only hold positive integers.
    NonPositiveValue {
        index: usize,
    },
    /// A structured-move run started from a state that is not one-hot per block.
    NotOneHot {
        block: usize,
    },
    /// Decoded blocks that hold no set bit or more than one.
    Infeasible {
        zero_hot: Vec<usize>,
        multi_hot: Vec<usize>,
    },
    /// A schedule, parameter set or problem description violated its invariants.
    InvalidParameter(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::IndexOutOfRange { index, len } => {
                write!(f, "index {index} out of range for size {len}")
            }
            Error::NonFinite { what } => write!(f, "non-finite {what}"),
            Error::LengthMismatch { expected, actual } => {
                write!(f, "expected {expected} bits, got {actual}")
            }
            Error::NonPositiveWeight { u, v } => {
                write!(f, "edge ({u}, {v}) has a non-positive weight")
            }
            Error::SelfLoop { node } => write!(f, "self-loop on node {node}"),
            Error::DuplicateEdge { u, v } => write!(f, "duplicate edge ({u}, {v})"),
            Error::EmptyGraph => f.write_str("graph has zero total edge weight"),
            Error::EmptyNumberSet => f.write_str("number set is empty"),
            Error::NonPositiveValue { index } => {
                write!(f, "value at position {index} is not a positive integer")
            }
            Error::NotOneHot { block } => write!(f, "block {block} is not one-hot"),
            Error::Infeasible { zero_hot, multi_hot } => {
                write!(f, "{} zero-hot and {} multi-hot blocks", zero_hot.len(), multi_hot.len())
            }
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
