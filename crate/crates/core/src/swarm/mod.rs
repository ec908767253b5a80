//! The swarm loop: each particle's velocity is an instruction, and a chat
//! model turns (problem, previous velocity, current position, new velocity)
//! into the particle's next position.
//!
//! Scores are always minimized. Per iteration and per particle, in id order:
//! fold the current position into the personal and global bests, build the
//! new velocity from them, render the meta-prompt, query the model and
//! accept, retry or reinitialize.

pub mod trace;

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use log::debug;
use thiserror::Error;

use crate::llm::{ChatBackend, LlmError, MetaPrompt, SamplingParams};
use crate::seed::{substream, StreamRng};
pub use trace::{Event, EventKind, EventRecord, IterationRecord, PositionRecord, RunTrace};

/// Instruction attached to freshly generated positions.
pub const BOOTSTRAP_VELOCITY: &str = "Generate a position randomly";

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate<S> {
    /// Text the position was decoded from.
    pub text: String,
    pub decoded: S,
    pub score: f64,
}

impl<S> Candidate<S> {
    pub fn is_better_than(&self, other: &Candidate<S>) -> bool {
        self.score < other.score
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VelocityPrompt(String);

impl VelocityPrompt {
    pub fn new(text: impl Into<String>) -> Self {
        Self(text.into())
    }

    pub fn text(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for VelocityPrompt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone)]
pub struct Particle<S> {
    pub id: usize,
    pub position: Candidate<S>,
    pub velocity: VelocityPrompt,
    pub pbest: Candidate<S>,
    /// Score of the position held at the start of each iteration.
    pub history: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    Parse,
    Constraint,
    Probe,
    Evaluation,
}

/// Why a reply could not become a position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind:?}: {message}")]
pub struct Violation {
    pub kind: ViolationKind,
    pub message: String,
}

impl Violation {
    pub fn new(kind: ViolationKind, message: impl Into<String>) -> Self {
        Self { kind, message: message.into() }
    }

    pub fn parse(message: impl Into<String>) -> Self {
        Self::new(ViolationKind::Parse, message)
    }

    pub fn constraint(message: impl Into<String>) -> Self {
        Self::new(ViolationKind::Constraint, message)
    }

    pub fn probe(message: impl Into<String>) -> Self {
        Self::new(ViolationKind::Probe, message)
    }

    pub fn evaluation(message: impl Into<String>) -> Self {
        Self::new(ViolationKind::Evaluation, message)
    }
}

/// The three inputs a meta-prompt is built from besides the problem itself.
pub struct PromptInputs<'a, S> {
    pub previous_velocity: &'a VelocityPrompt,
    pub position: &'a Candidate<S>,
    pub next_velocity: &'a VelocityPrompt,
}

/// Problem-specific half of the swarm.
pub trait ProblemAdapter: Sync {
    type Solution: Clone + Send + Sync;

    /// System turn: what is being optimized and how answers must look.
    fn describe(&self) -> String;

    /// Text of a fresh starting position. Adapters may sample it locally or
    /// ask the model; the engine validates it like any other reply.
    fn initial_position(
        &self,
        backend: &dyn ChatBackend,
        params: &SamplingParams,
        rng: &mut StreamRng,
    ) -> Result<String, LlmError>;

    fn construct_velocity(
        &self,
        pbest: &Candidate<Self::Solution>,
        gbest: &Candidate<Self::Solution>,
        rng: &mut StreamRng,
    ) -> VelocityPrompt;

    /// How a position is shown back to the model and written to traces.
    fn position_text(&self, candidate: &Candidate<Self::Solution>) -> String {
        candidate.text.clone()
    }

    fn render(&self, inputs: &PromptInputs<'_, Self::Solution>, _rng: &mut StreamRng) -> MetaPrompt {
        MetaPrompt::swarm(
            self.describe(),
            inputs.previous_velocity.text(),
            self.position_text(inputs.position),
            inputs.next_velocity.text(),
        )
    }

    fn parse_and_validate(&self, text: &str) -> Result<Self::Solution, Violation>;

    fn evaluate(&self, solution: &Self::Solution) -> Result<f64, Violation>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwarmConfig {
    pub num_particles: usize,
    pub max_iterations: usize,
    pub retry_limit: u32,
    pub rng_seed: u64,
    /// When false the adapter's objective is negated before use.
    pub minimize: bool,
    /// Worker threads for the query phase; 1 is strictly sequential.
    pub concurrency: usize,
    pub bootstrap_velocity: String,
}

impl SwarmConfig {
    pub fn new(num_particles: usize, max_iterations: usize) -> Self {
        Self {
            num_particles,
            max_iterations,
            retry_limit: 3,
            rng_seed: 0,
            minimize: true,
            concurrency: 1,
            bootstrap_velocity: BOOTSTRAP_VELOCITY.to_string(),
        }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if self.num_particles == 0 {
            return Err(EngineError::InvalidConfig("num_particles must be at least 1".into()));
        }
        if self.max_iterations == 0 {
            return Err(EngineError::InvalidConfig("max_iterations must be at least 1".into()));
        }
        if self.concurrency == 0 {
            return Err(EngineError::InvalidConfig("concurrency must be at least 1".into()));
        }
        if self.bootstrap_velocity.trim().is_empty() {
            return Err(EngineError::InvalidConfig("bootstrap velocity is empty".into()));
        }
        Ok(())
    }

    fn sign(&self) -> f64 {
        if self.minimize {
            1.0
        } else {
            -1.0
        }
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid swarm configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Backend(#[from] LlmError),
    #[error("particle {particle}: no valid initial position after {attempts} attempts ({last})")]
    AdapterInitFailure { particle: usize, attempts: u32, last: String },
}

/// Query bound of a run: `N * G` model calls. The per-call inference cost
/// is not counted.
pub fn cost_model(num_particles: u64, max_iterations: u64, _inference_cost: u64) -> u64 {
    num_particles * max_iterations
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QueryStats {
    /// Calls made while moving particles (first attempt plus retries).
    pub position_queries: usize,
    /// Calls made by the adapter while producing initial or reinitialized
    /// positions.
    pub bootstrap_queries: usize,
}

struct CountingBackend<'a> {
    inner: &'a dyn ChatBackend,
    count: AtomicUsize,
}

impl<'a> CountingBackend<'a> {
    fn new(inner: &'a dyn ChatBackend) -> Self {
        Self { inner, count: AtomicUsize::new(0) }
    }

    fn count(&self) -> usize {
        self.count.load(Ordering::Relaxed)
    }
}

impl ChatBackend for CountingBackend<'_> {
    fn complete(&self, prompt: &MetaPrompt, params: &SamplingParams) -> Result<String, LlmError> {
        self.count.fetch_add(1, Ordering::Relaxed);
        self.inner.complete(prompt, params)
    }
}

/// Particles plus the global best.
#[derive(Debug, Clone)]
pub struct Swarm<S> {
    pub particles: Vec<Particle<S>>,
    pub gbest: Candidate<S>,
}

impl<S: Clone> Swarm<S> {
    /// Start from one position per particle; each becomes its own personal
    /// best and the first strictly best one becomes the global best.
    pub fn from_positions(positions: Vec<Candidate<S>>, velocity: &str) -> Option<Self> {
        let first = positions.first()?.clone();
        let mut swarm = Swarm { particles: Vec::with_capacity(positions.len()), gbest: first };
        for (id, position) in positions.into_iter().enumerate() {
            if position.is_better_than(&swarm.gbest) {
                swarm.gbest = position.clone();
            }
            swarm.particles.push(Particle {
                id,
                pbest: position.clone(),
                position,
                velocity: VelocityPrompt::new(velocity),
                history: Vec::new(),
            });
        }
        Some(swarm)
    }

    /// Fold `candidate` into particle `i`'s personal best and then the
    /// personal best into the global best. Only strict improvements replace
    /// an incumbent.
    pub fn update_bests(&mut self, candidate: &Candidate<S>, i: usize) -> (bool, bool) {
        let particle = &mut self.particles[i];
        let pbest_changed = candidate.is_better_than(&particle.pbest);
        if pbest_changed {
            particle.pbest = candidate.clone();
        }
        let gbest_changed = particle.pbest.is_better_than(&self.gbest);
        if gbest_changed {
            self.gbest = particle.pbest.clone();
        }
        (pbest_changed, gbest_changed)
    }
}

pub struct RunOutcome<S> {
    pub gbest: Candidate<S>,
    pub trace: RunTrace,
    pub swarm: Swarm<S>,
    pub stats: QueryStats,
}

fn validate_text<A: ProblemAdapter + ?Sized>(
    adapter: &A,
    text: String,
    sign: f64,
) -> Result<Candidate<A::Solution>, Violation> {
    if text.trim().is_empty() {
        return Err(Violation::parse("empty reply"));
    }
    let decoded = adapter.parse_and_validate(&text)?;
    let raw = adapter.evaluate(&decoded)?;
    if !raw.is_finite() {
        return Err(Violation::evaluation(format!("non-finite objective {raw}")));
    }
    Ok(Candidate { text, decoded, score: sign * raw })
}

/// Ask the adapter for a starting position, validating up to
/// `retry_limit + 1` attempts.
fn fresh_position<A: ProblemAdapter + ?Sized>(
    adapter: &A,
    backend: &dyn ChatBackend,
    params: &SamplingParams,
    retry_limit: u32,
    sign: f64,
    rng: &mut StreamRng,
) -> Result<Result<Candidate<A::Solution>, Violation>, LlmError> {
    let mut last = Violation::parse("no attempt made");
    for _ in 0..=retry_limit {
        let text = adapter.initial_position(backend, params, rng)?;
        match validate_text(adapter, text, sign) {
            Ok(c) => return Ok(Ok(c)),
            Err(v) => last = v,
        }
    }
    Ok(Err(last))
}

/// Query the model with `prompt` until a valid position arrives, making at
/// most `retry_limit + 1` calls. If none is valid the adapter reinitializes
/// the particle; if that fails too the current position is kept.
///
/// Returns the new position, the event and the number of `prompt` queries.
#[allow(clippy::too_many_arguments)]
pub fn acquire_position<A: ProblemAdapter + ?Sized>(
    adapter: &A,
    backend: &dyn ChatBackend,
    bootstrap_backend: &dyn ChatBackend,
    prompt: &MetaPrompt,
    params: &SamplingParams,
    current: &Candidate<A::Solution>,
    retry_limit: u32,
    sign: f64,
    rng: &mut StreamRng,
) -> Result<(Candidate<A::Solution>, Event, u32), LlmError> {
    let mut queries = 0;
    for attempt in 0..=retry_limit {
        let reply = backend.complete(prompt, params)?;
        queries += 1;
        match validate_text(adapter, reply, sign) {
            Ok(candidate) => {
                let event = if attempt == 0 { Event::Accepted } else { Event::Retried(attempt) };
                return Ok((candidate, event, queries));
            }
            Err(v) => debug!("rejected reply (attempt {attempt}): {v}"),
        }
    }
    match fresh_position(adapter, bootstrap_backend, params, retry_limit, sign, rng)? {
        Ok(candidate) => Ok((candidate, Event::Reinitialized { retries: retry_limit }, queries)),
        Err(v) => {
            debug!("reinitialization failed: {v}");
            Ok((current.clone(), Event::EvaluationError { retries: retry_limit }, queries))
        }
    }
}

struct Job<'a, S> {
    prompt: MetaPrompt,
    current: &'a Candidate<S>,
    rng: &'a mut StreamRng,
}

type JobResult<S> = Result<(Candidate<S>, Event, u32), LlmError>;

/// Run the swarm for `cfg.max_iterations` iterations.
pub fn run<A: ProblemAdapter + ?Sized>(
    adapter: &A,
    backend: &dyn ChatBackend,
    params: &SamplingParams,
    cfg: &SwarmConfig,
) -> Result<RunOutcome<A::Solution>, EngineError> {
    cfg.validate()?;
    let sign = cfg.sign();
    let position_backend = CountingBackend::new(backend);
    let bootstrap_backend = CountingBackend::new(backend);
    let mut rngs: Vec<StreamRng> = (0..cfg.num_particles)
        .map(|i| substream(cfg.rng_seed, "swarm", i as u64))
        .collect();

    let mut initial = Vec::with_capacity(cfg.num_particles);
    for (i, rng) in rngs.iter_mut().enumerate() {
        match fresh_position(adapter, &bootstrap_backend, params, cfg.retry_limit, sign, rng)? {
            Ok(c) => initial.push(c),
            Err(v) => {
                return Err(EngineError::AdapterInitFailure {
                    particle: i,
                    attempts: cfg.retry_limit + 1,
                    last: v.to_string(),
                })
            }
        }
    }
    let initial_records: Vec<PositionRecord> = initial
        .iter()
        .enumerate()
        .map(|(i, c)| PositionRecord { particle: i, text: adapter.position_text(c), score: c.score })
        .collect();
    let mut swarm = Swarm::from_positions(initial, &cfg.bootstrap_velocity)
        .expect("num_particles >= 1 was validated");
    // Best position evaluated so far, in acquisition order. Matches the
    // global best once the last positions are folded in.
    let mut best_seen = swarm.gbest.clone();
    let mut trace = RunTrace::default();

    for t in 1..=cfg.max_iterations {
        let mut next_velocities = Vec::with_capacity(cfg.num_particles);
        let mut prompts = Vec::with_capacity(cfg.num_particles);
        for (i, rng) in rngs.iter_mut().enumerate() {
            let position = swarm.particles[i].position.clone();
            swarm.particles[i].history.push((t, position.score));
            swarm.update_bests(&position, i);
            let particle = &swarm.particles[i];
            let next = adapter.construct_velocity(&particle.pbest, &swarm.gbest, rng);
            let prompt = adapter.render(
                &PromptInputs {
                    previous_velocity: &particle.velocity,
                    position: &particle.position,
                    next_velocity: &next,
                },
                rng,
            );
            prompt.validate()?;
            next_velocities.push(next);
            prompts.push(prompt);
        }

        let jobs: Vec<Job<'_, A::Solution>> = prompts
            .into_iter()
            .zip(rngs.iter_mut())
            .zip(swarm.particles.iter())
            .map(|((prompt, rng), p)| Job { prompt, current: &p.position, rng })
            .collect();
        let results = run_jobs(adapter, &position_backend, &bootstrap_backend, params, cfg, sign, jobs);

        let mut events = Vec::with_capacity(cfg.num_particles);
        for (i, (result, next)) in results.into_iter().zip(next_velocities).enumerate() {
            let (candidate, event, _) = result?;
            let particle = &mut swarm.particles[i];
            let record = if event.moved() {
                if candidate.is_better_than(&best_seen) {
                    best_seen = candidate.clone();
                }
                let text = adapter.position_text(&candidate);
                let score = candidate.score;
                particle.position = candidate;
                particle.velocity = match event {
                    Event::Reinitialized { .. } => VelocityPrompt::new(cfg.bootstrap_velocity.clone()),
                    _ => next,
                };
                EventRecord {
                    particle: i,
                    kind: event.kind(),
                    retries: event.retries(),
                    text: Some(text),
                    score: Some(score),
                }
            } else {
                particle.velocity = next;
                EventRecord { particle: i, kind: event.kind(), retries: event.retries(), text: None, score: None }
            };
            events.push(record);
        }

        trace.iterations.push(IterationRecord {
            iter: t,
            gbest_score: best_seen.score,
            gbest_text: adapter.position_text(&best_seen),
            events,
            initial: if t == 1 { initial_records.clone() } else { Vec::new() },
        });
    }

    for i in 0..swarm.particles.len() {
        let position = swarm.particles[i].position.clone();
        swarm.update_bests(&position, i);
    }
    debug_assert_eq!(swarm.gbest.score, best_seen.score);

    Ok(RunOutcome {
        gbest: swarm.gbest.clone(),
        trace,
        swarm,
        stats: QueryStats {
            position_queries: position_backend.count(),
            bootstrap_queries: bootstrap_backend.count(),
        },
    })
}

fn run_jobs<A: ProblemAdapter + ?Sized>(
    adapter: &A,
    backend: &dyn ChatBackend,
    bootstrap_backend: &dyn ChatBackend,
    params: &SamplingParams,
    cfg: &SwarmConfig,
    sign: f64,
    jobs: Vec<Job<'_, A::Solution>>,
) -> Vec<JobResult<A::Solution>> {
    let execute = |job: Job<'_, A::Solution>| {
        acquire_position(
            adapter,
            backend,
            bootstrap_backend,
            &job.prompt,
            params,
            job.current,
            cfg.retry_limit,
            sign,
            job.rng,
        )
    };

    if cfg.concurrency <= 1 || jobs.len() <= 1 {
        let mut out = Vec::with_capacity(jobs.len());
        for job in jobs {
            let failed = {
                let r = execute(job);
                let failed = r.is_err();
                out.push(r);
                failed
            };
            // A backend failure aborts the run; later particles are not queried.
            if failed {
                break;
            }
        }
        return out;
    }

    let n = jobs.len();
    let queue: Vec<Mutex<Option<Job<'_, A::Solution>>>> =
        jobs.into_iter().map(|j| Mutex::new(Some(j))).collect();
    let slots: Vec<Mutex<Option<JobResult<A::Solution>>>> = (0..n).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..cfg.concurrency.min(n) {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= n {
                    break;
                }
                let job = queue[k].lock().expect("job queue poisoned").take().expect("job taken twice");
                let result = execute(job);
                *slots[k].lock().expect("result slot poisoned") = Some(result);
            });
        }
    });
    slots
        .into_iter()
        .map(|s| s.into_inner().expect("result slot poisoned").expect("every job ran"))
        .collect()
}
