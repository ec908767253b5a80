//! Symbolic regression: expression trees, a parser and protected evaluator,
//! fit metrics, CSV datasets and the swarm adapter.

mod adapter;
mod dataset;
mod eval;
mod expr;
mod metrics;
mod parser;

pub use adapter::{extract_expression, SymregAdapter, ADVERTISED_OPERATORS, MAX_DEPTH, MAX_NODES, SAMPLE_SIZE};
pub use dataset::{load_csv, parse_csv, Dataset};
pub use eval::{eval_expr, eval_with_notes, EvalNotes, POW_LIMIT};
pub use expr::{BinaryOp, Expr, UnaryOp};
pub use metrics::{fit_metrics, mean_absolute_error, r2_score, FitReport};
pub use parser::parse_expr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymregError {
    #[error("parse error at byte {position}: expected {expected}")]
    Parse { position: usize, expected: String },
    #[error("unknown variable `{name}` at byte {position}")]
    UnknownVariable { name: String, position: usize },
    #[error("unknown function `{name}` at byte {position}")]
    UnknownFunction { name: String, position: usize },
    #[error("target has zero variance; r2 is undefined")]
    DegenerateTarget,
    #[error("{0}")]
    Io(String),
    #[error("row {row}, column {col}: {message}")]
    Schema { row: usize, col: usize, message: String },
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
}
