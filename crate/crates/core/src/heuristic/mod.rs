//! Evolving TSP construction heuristics written as Python programs. Programs
//! are scored by an external evaluator subprocess over a line-delimited JSON
//! protocol.

mod adapter;
mod client;
mod protocol;
mod seeds;

pub use adapter::{
    extract_code, fenced, probe_instance, HeuristicAdapter, HeuristicCandidate, Origin,
    DEFAULT_INSTANCE_TIMEOUT_S, LANGUAGE_TAG, PROBE_TIMEOUT_S,
};
pub use client::{EvalOutcome, EvaluatorClient, EvaluatorCommand, EvaluatorError, EvaluatorPool, REPLY_GRACE};
pub use protocol::{EvalFailure, EvalRequest, EvalResponse, Frame, PROTOCOL_VERSION};
pub use seeds::{splitmix_order, SeedKind, RI_SEED};
