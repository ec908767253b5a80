//! Euclidean TSP: instances, tours, classical construction heuristics, an
//! exact small-n solver, the swap-sequence PSO baseline and the swarm adapter.

mod adapter;
mod exact;
mod heuristics;
mod io;
mod swap_pso;

pub use adapter::{extract_route, format_route, TspAdapter, VELOCITY_TEMPLATE};
pub use exact::{held_karp, reference_optimum, HELD_KARP_MAX_CITIES};
pub use heuristics::{
    insertion_heuristic, insertion_with_order, insertion_with_steps, nearest_neighbor,
    InsertionMode, InsertionStep,
};
pub use io::InstanceJson;
pub use swap_pso::{swap_pso, SwapPsoConfig, SwapPsoOutcome, SwapSequence};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest allowed coordinate value.
pub const COORD_MAX: i64 = 100;

#[derive(Debug, Error, PartialEq)]
pub enum TspError {
    #[error("invalid tour: {0}")]
    InvalidTour(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("instance has {0} cities; the exact solver handles at most {HELD_KARP_MAX_CITIES}")]
    TooLarge(usize),
    #[error("no optimum available for instance `{0}` (too large for the exact solver and no OPT line)")]
    MissingOptimum(String),
    #[error("optimum must be positive, got {0}")]
    NonPositiveOptimum(f64),
    #[error("instance parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TspInstance {
    pub name: String,
    pub coords: Vec<(i64, i64)>,
    pub reference_optimum: Option<f64>,
}

impl TspInstance {
    pub fn new(name: impl Into<String>, coords: Vec<(i64, i64)>) -> Result<Self, TspError> {
        let inst = Self { name: name.into(), coords, reference_optimum: None };
        inst.validate()?;
        Ok(inst)
    }

    pub fn with_optimum(mut self, optimum: f64) -> Self {
        self.reference_optimum = Some(optimum);
        self
    }

    pub fn validate(&self) -> Result<(), TspError> {
        if self.coords.len() < 2 {
            return Err(TspError::InvalidInstance(format!(
                "need at least 2 cities, got {}",
                self.coords.len()
            )));
        }
        if let Some((i, &(x, y))) = self
            .coords
            .iter()
            .enumerate()
            .find(|(_, &(x, y))| !(0..=COORD_MAX).contains(&x) || !(0..=COORD_MAX).contains(&y))
        {
            return Err(TspError::InvalidInstance(format!(
                "city {i} at ({x}, {y}) is outside [0, {COORD_MAX}]"
            )));
        }
        if let Some(opt) = self.reference_optimum {
            if !(opt.is_finite() && opt > 0.0) {
                return Err(TspError::InvalidInstance(format!("bad reference optimum {opt}")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        euclidean(self.coords[a], self.coords[b])
    }

    pub fn distance_matrix(&self) -> DistanceMatrix {
        DistanceMatrix::new(self)
    }
}

/// Euclidean distance between integer points, unrounded.
pub fn euclidean(a: (i64, i64), b: (i64, i64)) -> f64 {
    let dx = a.0 - b.0;
    let dy = a.1 - b.1;
    ((dx * dx + dy * dy) as f64).sqrt()
}

/// `n` cities with integer coordinates drawn uniformly from {0..100}².
pub fn generate_instance<R: Rng + ?Sized>(n: usize, rng: &mut R, name: impl Into<String>) -> TspInstance {
    assert!(n >= 2, "a TSP instance needs at least 2 cities");
    let coords = (0..n)
        .map(|_| (rng.random_range(0..=COORD_MAX), rng.random_range(0..=COORD_MAX)))
        .collect();
    TspInstance { name: name.into(), coords, reference_optimum: None }
}

#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    pub fn new(instance: &TspInstance) -> Self {
        let n = instance.len();
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                d[i * n + j] = instance.distance(i, j);
            }
        }
        Self { n, d }
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.d[a * self.n + b]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Closed-tour length, summing edges in visiting order.
    pub fn cycle_length(&self, order: &[usize]) -> f64 {
        let n = order.len();
        let mut total = 0.0;
        for i in 0..n {
            total += self.get(order[i], order[(i + 1) % n]);
        }
        total
    }
}

/// A permutation of `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Tour(Vec<usize>);

impl Tour {
    pub fn new(order: Vec<usize>, n: usize) -> Result<Self, TspError> {
        check_permutation(&order, n)?;
        Ok(Self(order))
    }

    pub(crate) fn new_unchecked(order: Vec<usize>) -> Self {
        Self(order)
    }

    pub fn order(&self) -> &[usize] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn check_permutation(order: &[usize], n: usize) -> Result<(), TspError> {
    if order.len() != n {
        return Err(TspError::InvalidTour(format!("expected {n} cities, got {}", order.len())));
    }
    let mut seen = vec![false; n];
    for &c in order {
        if c >= n {
            return Err(TspError::InvalidTour(format!("city {c} out of range 0..{n}")));
        }
        if std::mem::replace(&mut seen[c], true) {
            return Err(TspError::InvalidTour(format!("city {c} visited twice")));
        }
    }
    Ok(())
}

/// Sum of Euclidean edge lengths, including the edge back to the start.
pub fn tour_length(instance: &TspInstance, tour: &Tour) -> Result<f64, TspError> {
    check_permutation(tour.order(), instance.len())?;
    let order = tour.order();
    let n = order.len();
    Ok((0..n).map(|i| instance.distance(order[i], order[(i + 1) % n])).sum())
}

/// Relative excess of a tour length over the optimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    pub fraction: f64,
    pub percent: f64,
}

pub fn optimality_gap(length: f64, optimum: f64) -> Result<Gap, TspError> {
    if !(optimum > 0.0) {
        return Err(TspError::NonPositiveOptimum(optimum));
    }
    let fraction = (length - optimum) / optimum;
    Ok(Gap { fraction, percent: fraction * 100.0 })
}
