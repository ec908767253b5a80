use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{ChatBackend, LlmError, MetaPrompt, SamplingParams};

/// Replies returned whenever the prompt contains `contains`. Cycles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyedReplies {
    pub contains: String,
    pub responses: Vec<String>,
}

/// A scripted sequence of model replies.
///
/// Keyed entries are checked first, in order; the first whose substring
/// occurs in the prompt answers. Otherwise the next reply of `responses` is
/// used, wrapping around when `cycle` is set.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Script {
    #[serde(default)]
    pub responses: Vec<String>,
    #[serde(default)]
    pub cycle: bool,
    #[serde(default)]
    pub keyed: Vec<KeyedReplies>,
}

impl Script {
    pub fn finite<S: Into<String>>(responses: impl IntoIterator<Item = S>) -> Self {
        Self {
            responses: responses.into_iter().map(Into::into).collect(),
            cycle: false,
            keyed: Vec::new(),
        }
    }

    pub fn cyclic<S: Into<String>>(responses: impl IntoIterator<Item = S>) -> Self {
        Self { cycle: true, ..Self::finite(responses) }
    }

    pub fn with_key<S: Into<String>>(
        mut self,
        contains: impl Into<String>,
        responses: impl IntoIterator<Item = S>,
    ) -> Self {
        self.keyed.push(KeyedReplies {
            contains: contains.into(),
            responses: responses.into_iter().map(Into::into).collect(),
        });
        self
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }
}

#[derive(Debug, Default)]
struct MockState {
    cursor: usize,
    key_cursors: Vec<usize>,
    calls: usize,
    log: Vec<MetaPrompt>,
}

/// Deterministic stand-in for a language model.
#[derive(Debug)]
pub struct MockBackend {
    script: Script,
    state: Mutex<MockState>,
}

impl MockBackend {
    pub fn new(script: Script) -> Self {
        let key_cursors = vec![0; script.keyed.len()];
        Self { script, state: Mutex::new(MockState { key_cursors, ..Default::default() }) }
    }

    /// Number of `complete` calls so far, including failed ones.
    pub fn calls(&self) -> usize {
        self.state.lock().expect("mock state poisoned").calls
    }

    /// Every prompt received, in call order.
    pub fn prompts(&self) -> Vec<MetaPrompt> {
        self.state.lock().expect("mock state poisoned").log.clone()
    }

    pub fn script(&self) -> &Script {
        &self.script
    }
}

impl ChatBackend for MockBackend {
    fn complete(&self, prompt: &MetaPrompt, _params: &SamplingParams) -> Result<String, LlmError> {
        let mut state = self.state.lock().expect("mock state poisoned");
        state.calls += 1;
        state.log.push(prompt.clone());

        let content = prompt.joined_content();
        if let Some(k) = self
            .script
            .keyed
            .iter()
            .position(|k| !k.responses.is_empty() && content.contains(&k.contains))
        {
            let replies = &self.script.keyed[k].responses;
            let reply = replies[state.key_cursors[k] % replies.len()].clone();
            state.key_cursors[k] += 1;
            return Ok(reply);
        }

        let replies = &self.script.responses;
        let idx = state.cursor;
        let reply = if self.script.cycle && !replies.is_empty() {
            replies[idx % replies.len()].clone()
        } else {
            replies.get(idx).cloned().ok_or(LlmError::ScriptExhausted(idx))?
        };
        state.cursor += 1;
        Ok(reply)
    }
}
