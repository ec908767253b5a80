//! Discrete PSO over permutations with swap-sequence velocities.
//!
//! A velocity is an ordered list of transpositions. Each step the particle
//! keeps its previous velocity (capped in length), appends each swap of
//! `diff(pbest, x)` with probability `alpha` and each swap of
//! `diff(gbest, x)` with probability `beta`, and applies the result to its
//! position.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{format_route, DistanceMatrix, Tour, TspInstance};
use crate::swarm::{EventKind, EventRecord, IterationRecord, PositionRecord, RunTrace};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SwapSequence {
    pub swaps: Vec<(usize, usize)>,
}

impl SwapSequence {
    pub fn new(swaps: Vec<(usize, usize)>) -> Self {
        Self { swaps }
    }

    pub fn len(&self) -> usize {
        self.swaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.swaps.is_empty()
    }

    /// Apply the swaps left to right to a copy of `perm`.
    pub fn apply(&self, perm: &[usize]) -> Vec<usize> {
        let mut out = perm.to_vec();
        self.apply_in_place(&mut out);
        out
    }

    pub fn apply_in_place(&self, perm: &mut [usize]) {
        for &(i, j) in &self.swaps {
            perm.swap(i, j);
        }
    }

    /// Swaps that turn `from` into `to`: `diff(to, from).apply(from) == to`.
    pub fn diff(to: &[usize], from: &[usize]) -> Self {
        assert_eq!(to.len(), from.len(), "permutations differ in length");
        let mut work = from.to_vec();
        let mut where_is = vec![0; work.len()];
        for (idx, &c) in work.iter().enumerate() {
            where_is[c] = idx;
        }
        let mut swaps = Vec::new();
        for i in 0..work.len() {
            if work[i] != to[i] {
                let j = where_is[to[i]];
                swaps.push((i, j));
                let displaced = work[i];
                work.swap(i, j);
                where_is[displaced] = j;
                where_is[to[i]] = i;
            }
        }
        Self { swaps }
    }

    /// Keep each swap independently with probability `p`, preserving order.
    pub fn keep_each<R: Rng + ?Sized>(&self, p: f64, rng: &mut R) -> Self {
        Self { swaps: self.swaps.iter().copied().filter(|_| rng.random::<f64>() < p).collect() }
    }

    pub fn truncated(&self, cap: usize) -> Self {
        Self { swaps: self.swaps.iter().copied().take(cap).collect() }
    }

    pub fn extend(&mut self, other: SwapSequence) {
        self.swaps.extend(other.swaps);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwapPsoConfig {
    pub particles: usize,
    pub iterations: usize,
    /// Probability of keeping each swap towards the personal best.
    pub alpha: f64,
    /// Probability of keeping each swap towards the global best.
    pub beta: f64,
    /// Cap on the carried-over velocity; `None` means `n` swaps.
    pub velocity_cap: Option<usize>,
    /// Length of the random initial velocity; `None` means `n / 2`.
    pub initial_swaps: Option<usize>,
}

impl SwapPsoConfig {
    pub fn new(particles: usize, iterations: usize) -> Self {
        Self { particles, iterations, alpha: 0.5, beta: 0.5, velocity_cap: None, initial_swaps: None }
    }
}

#[derive(Debug, Clone)]
pub struct SwapPsoOutcome {
    pub best: Tour,
    pub best_length: f64,
    pub trace: RunTrace,
    /// Every particle's position at the end of the run.
    pub final_positions: Vec<Vec<usize>>,
}

struct SwapParticle {
    x: Vec<usize>,
    fx: f64,
    v: SwapSequence,
    pbest: Vec<usize>,
    fp: f64,
}

fn random_swaps<R: Rng + ?Sized>(n: usize, len: usize, rng: &mut R) -> SwapSequence {
    SwapSequence::new((0..len).map(|_| (rng.random_range(0..n), rng.random_range(0..n))).collect())
}

/// Run the swap-sequence PSO for `cfg.iterations` iterations.
///
/// Best-tracking uses the same strict-improvement and trace conventions as
/// the language-model swarm, so the two traces are directly comparable.
pub fn swap_pso<R: Rng + ?Sized>(instance: &TspInstance, cfg: &SwapPsoConfig, rng: &mut R) -> SwapPsoOutcome {
    assert!(cfg.particles >= 1 && cfg.iterations >= 1, "particles and iterations must be positive");
    assert!((0.0..=1.0).contains(&cfg.alpha) && (0.0..=1.0).contains(&cfg.beta), "alpha, beta must lie in [0, 1]");
    let n = instance.len();
    let d: DistanceMatrix = instance.distance_matrix();
    let cap = cfg.velocity_cap.unwrap_or(n);
    let init_len = cfg.initial_swaps.unwrap_or(n / 2);

    let mut swarm: Vec<SwapParticle> = (0..cfg.particles)
        .map(|_| {
            let mut x: Vec<usize> = (0..n).collect();
            x.shuffle(rng);
            let fx = d.cycle_length(&x);
            let v = random_swaps(n, init_len, rng);
            SwapParticle { pbest: x.clone(), fp: fx, x, fx, v }
        })
        .collect();
    let initial: Vec<PositionRecord> = swarm
        .iter()
        .enumerate()
        .map(|(i, p)| PositionRecord { particle: i, text: format_route(&p.x), score: p.fx })
        .collect();

    let mut g = 0;
    for (i, p) in swarm.iter().enumerate() {
        if p.fp < swarm[g].fp {
            g = i;
        }
    }
    let mut gbest = swarm[g].pbest.clone();
    let mut fg = swarm[g].fp;
    let mut best_seen = (gbest.clone(), fg);
    let mut trace = RunTrace::default();

    for t in 1..=cfg.iterations {
        let mut events = Vec::with_capacity(cfg.particles);
        for (i, p) in swarm.iter_mut().enumerate() {
            if p.fx < p.fp {
                p.pbest = p.x.clone();
                p.fp = p.fx;
            }
            if p.fp < fg {
                gbest = p.pbest.clone();
                fg = p.fp;
            }
            let mut v = p.v.truncated(cap);
            v.extend(SwapSequence::diff(&p.pbest, &p.x).keep_each(cfg.alpha, rng));
            v.extend(SwapSequence::diff(&gbest, &p.x).keep_each(cfg.beta, rng));
            v.apply_in_place(&mut p.x);
            p.v = v;
            p.fx = d.cycle_length(&p.x);
            if p.fx < best_seen.1 {
                best_seen = (p.x.clone(), p.fx);
            }
            events.push(EventRecord {
                particle: i,
                kind: EventKind::Accepted,
                retries: 0,
                text: Some(format_route(&p.x)),
                score: Some(p.fx),
            });
        }
        trace.iterations.push(IterationRecord {
            iter: t,
            gbest_score: best_seen.1,
            gbest_text: format_route(&best_seen.0),
            events,
            initial: if t == 1 { initial.clone() } else { Vec::new() },
        });
    }

    SwapPsoOutcome {
        best: Tour::new_unchecked(best_seen.0),
        best_length: best_seen.1,
        trace,
        final_positions: swarm.into_iter().map(|p| p.x).collect(),
    }
}
