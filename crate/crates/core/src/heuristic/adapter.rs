use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::OnceLock;

use rand::Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};

use super::client::{EvalOutcome, EvaluatorPool};
use super::seeds::SeedKind;
use crate::llm::{ChatBackend, LlmError, SamplingParams};
use crate::seed::StreamRng;
use crate::swarm::{Candidate, ProblemAdapter, VelocityPrompt, Violation};
use crate::tsp::{held_karp, TspInstance};

pub const LANGUAGE_TAG: &str = "python";
pub const PROBE_TIMEOUT_S: f64 = 5.0;
pub const DEFAULT_INSTANCE_TIMEOUT_S: f64 = 30.0;

const PROBE_COORDS: [(i64, i64); 10] = [
    (5, 5),
    (20, 80),
    (45, 15),
    (60, 60),
    (85, 30),
    (95, 90),
    (30, 45),
    (70, 5),
    (10, 95),
    (50, 90),
];

/// Fixed 10-city instance used to screen candidates, with its exact optimum.
pub fn probe_instance() -> TspInstance {
    let inst = TspInstance::new("probe10", PROBE_COORDS.to_vec()).expect("probe coordinates are valid");
    let (opt, _) = held_karp(&inst).expect("10 cities is within the exact solver's range");
    inst.with_optimum(opt)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Origin {
    Seed(SeedKind),
    Generated,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeuristicCandidate {
    pub source: String,
    pub language_tag: String,
    pub origin: Origin,
}

fn fence_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?s)```[^\n]*\n(.*?)```").expect("static regex"))
}

/// Largest fenced code block, or the whole reply when there is none.
pub fn extract_code(reply: &str) -> &str {
    let mut best: Option<&str> = None;
    for cap in fence_re().captures_iter(reply) {
        let body = cap.get(1).map_or("", |m| m.as_str());
        if best.is_none_or(|b| body.len() > b.len()) {
            best = Some(body);
        }
    }
    best.unwrap_or(reply).trim_matches('\n')
}

pub fn fenced(source: &str) -> String {
    format!("```{LANGUAGE_TAG}\n{}\n```", source.trim_end())
}

/// Swarm adapter over TSP heuristic programs, scored by total tour length
/// across a fixed instance set.
pub struct HeuristicAdapter {
    instances: Vec<TspInstance>,
    probe: TspInstance,
    pool: EvaluatorPool,
    seeds: Vec<SeedKind>,
    instance_timeout_s: f64,
    probes: AtomicUsize,
    full_evaluations: AtomicUsize,
}

impl HeuristicAdapter {
    pub fn new(instances: Vec<TspInstance>, pool: EvaluatorPool) -> Self {
        assert!(!instances.is_empty(), "need at least one scoring instance");
        Self {
            instances,
            probe: probe_instance(),
            pool,
            seeds: SeedKind::ALL.to_vec(),
            instance_timeout_s: DEFAULT_INSTANCE_TIMEOUT_S,
            probes: AtomicUsize::new(0),
            full_evaluations: AtomicUsize::new(0),
        }
    }

    pub fn with_seeds(mut self, seeds: Vec<SeedKind>) -> Self {
        assert!(!seeds.is_empty(), "need at least one seed heuristic");
        self.seeds = seeds;
        self
    }

    pub fn with_instance_timeout(mut self, seconds: f64) -> Self {
        self.instance_timeout_s = seconds;
        self
    }

    pub fn instances(&self) -> &[TspInstance] {
        &self.instances
    }

    pub fn probe_count(&self) -> usize {
        self.probes.load(Ordering::Relaxed)
    }

    pub fn full_evaluation_count(&self) -> usize {
        self.full_evaluations.load(Ordering::Relaxed)
    }

    /// Per-instance lengths of `source` on the scoring instances.
    pub fn lengths(&self, source: &str) -> Result<Vec<f64>, Violation> {
        self.full_evaluations.fetch_add(1, Ordering::Relaxed);
        match self.pool.evaluate(source, &self.instances, self.instance_timeout_s) {
            Ok(EvalOutcome::Lengths(l)) => Ok(l),
            Ok(EvalOutcome::Failed(f)) => Err(Violation::evaluation(f.to_string())),
            Err(e) => Err(Violation::evaluation(e.to_string())),
        }
    }
}

impl ProblemAdapter for HeuristicAdapter {
    type Solution = HeuristicCandidate;

    fn describe(&self) -> String {
        let sizes: Vec<String> = self.instances.iter().map(|i| i.len().to_string()).collect();
        format!(
            "You are improving a construction heuristic for the traveling salesman problem. \
             A heuristic is a Python program defining `solve(coords)`, where `coords` is a list of \
             [x, y] integer pairs; it must return a list containing every city index exactly once, \
             the order in which the closed tour visits them. Only the Python standard library may be \
             used. The heuristic is scored by the total length of its tours over {} fixed instances \
             with {} cities; lower is better. Reply with the complete program in one fenced code block.",
            self.instances.len(),
            sizes.join(", ")
        )
    }

    fn initial_position(
        &self,
        _backend: &dyn ChatBackend,
        _params: &SamplingParams,
        rng: &mut StreamRng,
    ) -> Result<String, LlmError> {
        let kind = self.seeds[rng.random_range(0..self.seeds.len())];
        Ok(fenced(kind.source()))
    }

    fn construct_velocity(
        &self,
        pbest: &Candidate<HeuristicCandidate>,
        gbest: &Candidate<HeuristicCandidate>,
        _rng: &mut StreamRng,
    ) -> VelocityPrompt {
        VelocityPrompt::new(format!(
            "Your best heuristic so far (total distance {:.4}):\n{}\n\
             The best heuristic found by the swarm (total distance {:.4}):\n{}\n\
             Write a new heuristic program, influenced by both, that achieves a shorter total distance.",
            pbest.score,
            fenced(&pbest.decoded.source),
            gbest.score,
            fenced(&gbest.decoded.source)
        ))
    }

    fn position_text(&self, candidate: &Candidate<HeuristicCandidate>) -> String {
        fenced(&candidate.decoded.source)
    }

    fn parse_and_validate(&self, text: &str) -> Result<HeuristicCandidate, Violation> {
        let source = extract_code(text);
        if source.trim().is_empty() {
            return Err(Violation::parse("empty program"));
        }
        self.probes.fetch_add(1, Ordering::Relaxed);
        match self.pool.evaluate(source, std::slice::from_ref(&self.probe), PROBE_TIMEOUT_S) {
            Ok(EvalOutcome::Lengths(_)) => {}
            Ok(EvalOutcome::Failed(f)) => return Err(Violation::probe(f.to_string())),
            Err(e) => return Err(Violation::probe(e.to_string())),
        }
        let origin = SeedKind::from_source(source).map_or(Origin::Generated, Origin::Seed);
        Ok(HeuristicCandidate { source: source.to_string(), language_tag: LANGUAGE_TAG.into(), origin })
    }

    fn evaluate(&self, candidate: &HeuristicCandidate) -> Result<f64, Violation> {
        Ok(self.lengths(&candidate.source)?.iter().sum())
    }
}
