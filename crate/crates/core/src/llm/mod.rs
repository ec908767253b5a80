//! Chat-completion abstraction used to generate new particle positions.

mod http;
mod mock;

pub use http::{HttpBackend, HttpConfig, ENV_API_BASE, ENV_API_KEY, ENV_MODEL};
pub use mock::{KeyedReplies, MockBackend, Script};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Temperature used for every problem kind.
pub const DEFAULT_TEMPERATURE: f64 = 0.9;

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("mock script exhausted after {0} replies")]
    ScriptExhausted(usize),
    #[error("unknown problem kind `{0}`")]
    UnknownKind(String),
    #[error("prompt violates meta-prompt structure: {0}")]
    InvalidPrompt(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self { role: Role::System, content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self { role: Role::User, content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self { role: Role::Assistant, content: content.into() }
    }
}

/// Ordered chat transcript sent to the model.
///
/// A swarm prompt carries four parts: the problem description as the system
/// turn, the previous velocity as a user turn, the current position as an
/// assistant turn, and the new velocity as the final user turn.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetaPrompt {
    pub messages: Vec<ChatMessage>,
}

impl MetaPrompt {
    /// The four-turn swarm prompt.
    pub fn swarm(
        description: impl Into<String>,
        previous_velocity: impl Into<String>,
        position: impl Into<String>,
        next_velocity: impl Into<String>,
    ) -> Self {
        Self {
            messages: vec![
                ChatMessage::system(description),
                ChatMessage::user(previous_velocity),
                ChatMessage::assistant(position),
                ChatMessage::user(next_velocity),
            ],
        }
    }

    /// A two-turn prompt (description plus one instruction) used to bootstrap
    /// positions before any exist.
    pub fn bootstrap(description: impl Into<String>, instruction: impl Into<String>) -> Self {
        Self {
            messages: vec![ChatMessage::system(description), ChatMessage::user(instruction)],
        }
    }

    /// Concatenated content of every message; what keyed mock scripts match on.
    pub fn joined_content(&self) -> String {
        self.messages
            .iter()
            .map(|m| m.content.as_str())
            .collect::<Vec<_>>()
            .join("\n")
    }

    fn check_common(&self) -> Result<(), LlmError> {
        let first = self
            .messages
            .first()
            .ok_or_else(|| LlmError::InvalidPrompt("empty transcript".into()))?;
        if first.role != Role::System {
            return Err(LlmError::InvalidPrompt("first message must be the system turn".into()));
        }
        if self.messages.iter().filter(|m| m.role == Role::System).count() != 1 {
            return Err(LlmError::InvalidPrompt("exactly one system turn is allowed".into()));
        }
        for (i, m) in self.messages.iter().enumerate() {
            if m.role != Role::Assistant && m.content.trim().is_empty() {
                return Err(LlmError::InvalidPrompt(format!(
                    "message {i} ({}) has empty content",
                    m.role.as_str()
                )));
            }
        }
        match self.messages.last() {
            Some(m) if m.role == Role::User => Ok(()),
            _ => Err(LlmError::InvalidPrompt("last message must be a user turn".into())),
        }
    }

    /// Check the four-component swarm structure.
    pub fn validate(&self) -> Result<(), LlmError> {
        self.check_common()?;
        let framed_position = self.messages.windows(3).any(|w| {
            w[0].role == Role::User && w[1].role == Role::Assistant && w[2].role == Role::User
        });
        if !framed_position {
            return Err(LlmError::InvalidPrompt(
                "missing user/assistant/user turns around the current position".into(),
            ));
        }
        Ok(())
    }

    /// Check the bootstrap structure (system turn then user turns only).
    pub fn validate_bootstrap(&self) -> Result<(), LlmError> {
        self.check_common()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingParams {
    pub temperature: f64,
    pub max_new_tokens: u32,
    pub model_name: String,
}

impl SamplingParams {
    pub fn new(temperature: f64, max_new_tokens: u32, model_name: impl Into<String>) -> Self {
        Self { temperature, max_new_tokens, model_name: model_name.into() }
    }
}

/// Problem settings with default budgets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Tsp10,
    Tsp20,
    Tsp30,
    Heuristic,
    Symreg,
}

/// (iterations, particles, max new tokens) for one problem kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub iterations: usize,
    pub particles: usize,
    pub max_new_tokens: u32,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 5] = [
        ProblemKind::Tsp10,
        ProblemKind::Tsp20,
        ProblemKind::Tsp30,
        ProblemKind::Heuristic,
        ProblemKind::Symreg,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProblemKind::Tsp10 => "tsp10",
            ProblemKind::Tsp20 => "tsp20",
            ProblemKind::Tsp30 => "tsp30",
            ProblemKind::Heuristic => "heuristic",
            ProblemKind::Symreg => "symreg",
        }
    }

    pub fn budget(self) -> Budget {
        let (iterations, particles, max_new_tokens) = match self {
            ProblemKind::Tsp10 => (100, 10, 50),
            ProblemKind::Tsp20 => (100, 10, 100),
            ProblemKind::Tsp30 => (100, 10, 150),
            ProblemKind::Heuristic => (40, 25, 1000),
            ProblemKind::Symreg => (50, 80, 200),
        };
        Budget { iterations, particles, max_new_tokens }
    }

    /// TSP kind for a city count, if there is one.
    pub fn for_cities(n: usize) -> Option<Self> {
        match n {
            10 => Some(ProblemKind::Tsp10),
            20 => Some(ProblemKind::Tsp20),
            30 => Some(ProblemKind::Tsp30),
            _ => None,
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProblemKind {
    type Err = LlmError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ProblemKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| LlmError::UnknownKind(s.to_string()))
    }
}

/// Sampling parameters for a problem kind: temperature 0.9 and the kind's
/// token limit. The model name is taken from `LMPSO_MODEL` when set.
pub fn default_params(kind: &str) -> Result<SamplingParams, LlmError> {
    let kind: ProblemKind = kind.parse()?;
    let model = std::env::var(ENV_MODEL).unwrap_or_else(|_| "default".to_string());
    Ok(SamplingParams::new(DEFAULT_TEMPERATURE, kind.budget().max_new_tokens, model))
}

/// Anything that turns a meta-prompt into the model's reply text.
pub trait ChatBackend: Send + Sync {
    fn complete(&self, prompt: &MetaPrompt, params: &SamplingParams) -> Result<String, LlmError>;
}

impl<B: ChatBackend + ?Sized> ChatBackend for &B {
    fn complete(&self, prompt: &MetaPrompt, params: &SamplingParams) -> Result<String, LlmError> {
        (**self).complete(prompt, params)
    }
}

impl<B: ChatBackend + ?Sized> ChatBackend for Box<B> {
    fn complete(&self, prompt: &MetaPrompt, params: &SamplingParams) -> Result<String, LlmError> {
        (**self).complete(prompt, params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn swarm_prompt_is_valid() {
        let p = MetaPrompt::swarm("desc", "Generate a position randomly", "[0, 1]", "improve");
        p.validate().unwrap();
    }

    #[test]
    fn structural_violations_are_reported() {
        let mut p = MetaPrompt::swarm("desc", "v", "x", "v'");
        p.messages.insert(1, ChatMessage::system("again"));
        assert!(p.validate().is_err());

        let p = MetaPrompt::bootstrap("desc", "go");
        assert!(p.validate().is_err());
        p.validate_bootstrap().unwrap();

        let p = MetaPrompt::swarm("", "v", "x", "v'");
        assert!(p.validate().is_err());

        let mut p = MetaPrompt::swarm("d", "v", "x", "v'");
        p.messages.pop();
        assert!(p.validate().is_err());
    }

    #[test]
    fn table_defaults() {
        assert_eq!(default_params("tsp10").unwrap().max_new_tokens, 50);
        assert_eq!(default_params("tsp20").unwrap().max_new_tokens, 100);
        assert_eq!(default_params("tsp30").unwrap().max_new_tokens, 150);
        assert_eq!(default_params("heuristic").unwrap().max_new_tokens, 1000);
        assert_eq!(default_params("symreg").unwrap().max_new_tokens, 200);
        assert_eq!(default_params("symreg").unwrap().temperature, 0.9);
        assert!(matches!(default_params("tsp40"), Err(LlmError::UnknownKind(_))));
    }
}
