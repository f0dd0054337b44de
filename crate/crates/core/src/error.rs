use thiserror::Error;

use crate::hypotheses::HypothesisReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("floating-point overflow or non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("{op} requires a square matrix, got {rows}x{cols}")]
    NotSquare {
        op: &'static str,
        rows: usize,
        cols: usize,
    },

    #[error("singular matrix")]
    Singular,

    #[error("no group inverse: Drazin index is {index}")]
    NoGroupInverse { index: usize },

    #[error("precondition violated: {what} (residual {residual:e})")]
    PreconditionViolated { what: String, residual: f64 },

    #[error("hypothesis {} violated", .0.id)]
    HypothesisViolated(Box<HypothesisReport>),

    #[error("infeasible configuration: {0}")]
    Infeasible(String),

    #[error("cannot isolate condition {condition} of {id}: {reason}")]
    CannotIsolate {
        id: String,
        condition: usize,
        reason: String,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
