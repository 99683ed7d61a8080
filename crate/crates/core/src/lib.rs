//! Short travelling-salesman tours in bridgeless cubic graphs.
//!
//! Given a simple connected bridgeless cubic graph on `n >= 8` vertices, the
//! pipeline in this crate constructs a closed spanning walk of length at most
//! `1.3 * n - 2` and emits machine-checkable certificates for every
//! intermediate guarantee:
//!
//! 1. reduce the input to an irreducible core by eliminating four local
//!    patterns ([`reduce`]),
//! 2. select a starting 2-factor as the complement of a perfect matching that
//!    minimises a weighted boundary functional subject to a 3-edge-cut
//!    condition ([`factor`]),
//! 3. run two scheduled rounds of 4-/5-/6-swaps that merge factor components
//!    while maintaining exact per-vertex cost ledgers ([`swap`]),
//! 4. undo the reductions ([`reduce`]) and convert the final even factor into
//!    an Eulerian closed walk ([`tour`]).
//!
//! All cost accounting is exact rational arithmetic; nothing is ever compared
//! through floating point.

pub mod factor;
pub mod format;
pub mod generate;
pub mod graph;
pub mod matching;
pub mod oracle;
pub mod pipeline;
pub mod reduce;
pub mod structure;
pub mod swap;
pub mod tour;

pub use graph::{EdgeRef, Graph, ValidationReport};
pub use pipeline::{run_pipeline, PipelineOptions, PipelineResult, SelectionMode};

use num_bigint::BigInt;

/// Exact rational scalar used for every cost, weight and certificate value.
pub type Rat = num_rational::BigRational;

/// Rational from an integer pair.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Rational from an integer.
pub fn rat_int(num: i64) -> Rat {
    Rat::from_integer(BigInt::from(num))
}

/// Rational from an unsigned count.
pub fn rat_usize(num: usize) -> Rat {
    Rat::from_integer(BigInt::from(num))
}

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed input text; carries line (1-based) and byte offset.
    #[error("parse error at line {line}, byte {byte}: {reason}")]
    Parse { line: usize, byte: usize, reason: String },
    /// The requested encoding cannot represent the graph.
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    /// A structurally invalid graph was supplied.
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    /// Parameters outside the supported range of a generator or oracle.
    #[error("infeasible parameters: {0}")]
    Infeasible(String),
    /// Desk-scale limit exceeded; the message names the alternative.
    #[error("capability limit exceeded: {0}")]
    LimitExceeded(String),
    /// A caller violated an operation's contract.
    #[error("contract violation: {0}")]
    ContractViolation(String),
    /// An invariant the algorithm guarantees failed to hold; carries a witness.
    #[error("internal invariant violated: {0}")]
    InternalInvariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
