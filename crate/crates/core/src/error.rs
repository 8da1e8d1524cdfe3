use thiserror::Error;

use crate::expr::{EvalError, ParseError};
use crate::tree::Vertex;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("vertex {address} is not valid for shape {shape}: index {index} at position {position} exceeds branching {branching}")]
    InvalidVertex {
        address: Vertex,
        shape: String,
        position: usize,
        index: u32,
        branching: u64,
    },

    #[error("level {level} does not fit in a u64 vertex count (max safe depth {max_safe_depth})")]
    LevelOverflow { level: usize, max_safe_depth: usize },

    #[error("evaluation failed at vertex {address}: {message}")]
    Evaluation { address: Vertex, message: String },

    #[error("weight is not positive at level {level} (value {value})")]
    WeightDomain { level: usize, value: f64 },

    #[error("unbounded operator: weight ratio {value} exceeds cap {cap} at depth {depth}")]
    Unbounded { depth: usize, value: f64, cap: f64 },

    #[error("truncation dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: u64, cap: u64 },

    #[error("zero-norm function rejected: {0}")]
    ZeroNorm(String),

    #[error("parse error: {0}")]
    Parse(#[from] ParseError),

    #[error("expression error: {0}")]
    Eval(#[from] EvalError),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// True for failures caused by numeric domain limits (overflow, divergence,
    /// non-positive weights) rather than malformed input.
    pub fn is_numeric_domain(&self) -> bool {
        matches!(
            self,
            Error::LevelOverflow { .. }
                | Error::WeightDomain { .. }
                | Error::Unbounded { .. }
                | Error::DimensionCap { .. }
                | Error::Eval(_)
                | Error::Evaluation { .. }
        )
    }
}
