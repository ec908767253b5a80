//! Nearest-neighbor and insertion construction heuristics.
//!
//! Ties always go to the lowest city index and, for insertion positions,
//! to the leftmost position. The Python seed heuristics shipped with the
//! heuristic adapter follow the same rules and arithmetic order, so both
//! produce identical tours.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{DistanceMatrix, Tour, TspInstance};

/// Greedy tour: repeatedly move to the closest unvisited city.
///
/// Panics if `start` is not a city of `instance`.
pub fn nearest_neighbor(instance: &TspInstance, start: usize) -> Tour {
    let n = instance.len();
    assert!(start < n, "start city {start} out of range 0..{n}");
    let d = instance.distance_matrix();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut current = start;
    visited[current] = true;
    order.push(current);
    while order.len() < n {
        let mut best: Option<(usize, f64)> = None;
        for c in (0..n).filter(|&c| !visited[c]) {
            let dc = d.get(current, c);
            if best.is_none_or(|(_, bd)| dc < bd) {
                best = Some((c, dc));
            }
        }
        let (next, _) = best.expect("an unvisited city remains");
        visited[next] = true;
        order.push(next);
        current = next;
    }
    Tour::new_unchecked(order)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InsertionMode {
    Nearest,
    Farthest,
    Random,
}

impl InsertionMode {
    pub fn name(self) -> &'static str {
        match self {
            InsertionMode::Nearest => "nearest",
            InsertionMode::Farthest => "farthest",
            InsertionMode::Random => "random",
        }
    }
}

/// One insertion: the partial tour before it, the city and the index it
/// was inserted at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InsertionStep {
    pub before: Vec<usize>,
    pub city: usize,
    pub index: usize,
}

/// Cheapest place to put `city` in the closed partial tour: the position
/// `p` minimizing `d(t[p], c) + d(c, t[p+1]) - d(t[p], t[p+1])`, leftmost
/// on ties. Returns the insertion index `p + 1`.
pub(crate) fn cheapest_insertion(d: &DistanceMatrix, tour: &[usize], city: usize) -> usize {
    let k = tour.len();
    let mut best_pos = 0;
    let mut best_cost = f64::INFINITY;
    for p in 0..k {
        let a = tour[p];
        let b = tour[(p + 1) % k];
        let cost = d.get(a, city) + d.get(city, b) - d.get(a, b);
        if cost < best_cost {
            best_cost = cost;
            best_pos = p;
        }
    }
    best_pos + 1
}

fn extreme_pair(d: &DistanceMatrix, farthest: bool) -> (usize, usize) {
    let n = d.len();
    let mut best = (0, 1);
    let mut best_d = d.get(0, 1);
    for i in 0..n {
        for j in (i + 1)..n {
            let dij = d.get(i, j);
            let better = if farthest { dij > best_d } else { dij < best_d };
            if better {
                best = (i, j);
                best_d = dij;
            }
        }
    }
    best
}

fn build(
    d: &DistanceMatrix,
    mode: InsertionMode,
    random_order: Option<&[usize]>,
    mut on_step: impl FnMut(InsertionStep),
) -> Tour {
    let n = d.len();
    if n <= 2 {
        return Tour::new_unchecked((0..n).collect());
    }
    let (a, b) = match random_order {
        Some(order) => (order[0], order[1]),
        None => extreme_pair(d, mode == InsertionMode::Farthest),
    };
    let mut tour = vec![a, b];
    let mut in_tour = vec![false; n];
    in_tour[a] = true;
    in_tour[b] = true;
    // distance from each city to the nearest tour city
    let mut to_tour: Vec<f64> = (0..n).map(|c| d.get(c, a).min(d.get(c, b))).collect();

    for step in 0..(n - 2) {
        let city = match (mode, random_order) {
            (InsertionMode::Random, Some(order)) => order[step + 2],
            _ => {
                let mut pick: Option<usize> = None;
                for c in (0..n).filter(|&c| !in_tour[c]) {
                    let better = match pick {
                        None => true,
                        Some(p) if mode == InsertionMode::Farthest => to_tour[c] > to_tour[p],
                        Some(p) => to_tour[c] < to_tour[p],
                    };
                    if better {
                        pick = Some(c);
                    }
                }
                pick.expect("an unvisited city remains")
            }
        };
        let index = cheapest_insertion(d, &tour, city);
        on_step(InsertionStep { before: tour.clone(), city, index });
        tour.insert(index, city);
        in_tour[city] = true;
        for c in 0..n {
            let dc = d.get(c, city);
            if dc < to_tour[c] {
                to_tour[c] = dc;
            }
        }
    }
    Tour::new_unchecked(tour)
}

/// Insertion heuristic. `Random` draws a uniformly random city order from
/// `rng`; its first two cities form the starting pair.
pub fn insertion_heuristic<R: Rng + ?Sized>(instance: &TspInstance, mode: InsertionMode, rng: &mut R) -> Tour {
    insertion_with_steps(instance, mode, rng).0
}

/// As [`insertion_heuristic`], also returning every insertion step.
pub fn insertion_with_steps<R: Rng + ?Sized>(
    instance: &TspInstance,
    mode: InsertionMode,
    rng: &mut R,
) -> (Tour, Vec<InsertionStep>) {
    let d = instance.distance_matrix();
    let order = (mode == InsertionMode::Random).then(|| {
        let mut order: Vec<usize> = (0..instance.len()).collect();
        order.shuffle(rng);
        order
    });
    let mut steps = Vec::new();
    let tour = build(&d, mode, order.as_deref(), |s| steps.push(s));
    (tour, steps)
}

/// Random insertion with a caller-supplied city order.
///
/// Panics unless `order` is a permutation of the instance's cities.
pub fn insertion_with_order(instance: &TspInstance, order: &[usize]) -> Tour {
    super::check_permutation(order, instance.len()).expect("order must be a permutation");
    build(&instance.distance_matrix(), InsertionMode::Random, Some(order), |_| {})
}
