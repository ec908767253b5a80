//! Per-iteration run record and its JSON-lines form.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// First reply was valid.
    Accepted,
    /// A valid reply arrived after `retries` invalid ones.
    Retried,
    /// Every reply was invalid; the particle was re-seeded by the adapter.
    Reinitialized,
    /// No valid position could be obtained at all; the particle kept its
    /// previous position.
    EvaluationError,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Event {
    Accepted,
    Retried(u32),
    Reinitialized { retries: u32 },
    EvaluationError { retries: u32 },
}

impl Event {
    pub fn kind(self) -> EventKind {
        match self {
            Event::Accepted => EventKind::Accepted,
            Event::Retried(_) => EventKind::Retried,
            Event::Reinitialized { .. } => EventKind::Reinitialized,
            Event::EvaluationError { .. } => EventKind::EvaluationError,
        }
    }

    pub fn retries(self) -> u32 {
        match self {
            Event::Accepted => 0,
            Event::Retried(k) => k,
            Event::Reinitialized { retries } | Event::EvaluationError { retries } => retries,
        }
    }

    /// Whether the event produced a new position.
    pub fn moved(self) -> bool {
        !matches!(self, Event::EvaluationError { .. })
    }
}

/// Outcome of one particle's position update.
///
/// `text` and `score` describe the position the particle holds afterwards
/// and are absent only for `evaluation_error`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub particle: usize,
    pub kind: EventKind,
    pub retries: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionRecord {
    pub particle: usize,
    pub text: String,
    pub score: f64,
}

/// Best-so-far state at the end of one iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub gbest_score: f64,
    pub gbest_text: String,
    pub events: Vec<EventRecord>,
    /// Starting positions; only present on the first iteration.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub initial: Vec<PositionRecord>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub iterations: Vec<IterationRecord>,
}

impl RunTrace {
    pub fn gbest_scores(&self) -> Vec<f64> {
        self.iterations.iter().map(|r| r.gbest_score).collect()
    }

    pub fn is_non_increasing(&self) -> bool {
        self.iterations.windows(2).all(|w| w[1].gbest_score <= w[0].gbest_score)
    }

    /// Every (text, score) pair a particle held: initial positions then each
    /// event that produced a position.
    pub fn positions(&self) -> impl Iterator<Item = (&str, f64)> {
        self.iterations.iter().flat_map(|r| {
            r.initial
                .iter()
                .map(|p| (p.text.as_str(), p.score))
                .chain(r.events.iter().filter_map(|e| Some((e.text.as_deref()?, e.score?))))
        })
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        for record in &self.iterations {
            serde_json::to_writer(&mut out, record)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> io::Result<Self> {
        let mut iterations = Vec::new();
        for line in input.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: IterationRecord = serde_json::from_str(&line)
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
            iterations.push(record);
        }
        Ok(Self { iterations })
    }
}
