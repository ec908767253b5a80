//! Particle swarm optimization where a chat language model generates each
//! particle's next position from a prompt-encoded velocity.

pub mod heuristic;
pub mod llm;
pub mod seed;
pub mod swarm;
pub mod symreg;
pub mod tsp;

pub use llm::{ChatBackend, ChatMessage, MetaPrompt, ProblemKind, Role, SamplingParams};
pub use swarm::{
    run, Candidate, EngineError, ProblemAdapter, RunOutcome, RunTrace, SwarmConfig, Violation,
    ViolationKind, VelocityPrompt,
};
