use super::{Tour, TspError, TspInstance};

/// Hard cap on instance size for [`held_karp`] (2^(n-1)·(n-1) states).
pub const HELD_KARP_MAX_CITIES: usize = 15;

/// Exact shortest closed tour by dynamic programming over subsets.
///
/// The witness tour starts at city 0.
pub fn held_karp(instance: &TspInstance) -> Result<(f64, Tour), TspError> {
    let n = instance.len();
    if n > HELD_KARP_MAX_CITIES {
        return Err(TspError::TooLarge(n));
    }
    if n < 2 {
        return Err(TspError::InvalidInstance("need at least 2 cities".into()));
    }
    let d = instance.distance_matrix();
    // City 0 is fixed as the start; the other m = n - 1 cities are bits.
    let m = n - 1;
    let states = 1usize << m;
    let mut cost = vec![f64::INFINITY; states * m];
    let mut parent = vec![usize::MAX; states * m];
    for j in 0..m {
        cost[(1 << j) * m + j] = d.get(0, j + 1);
    }
    for mask in 1..states {
        for last in 0..m {
            if mask & (1 << last) == 0 {
                continue;
            }
            let here = cost[mask * m + last];
            if !here.is_finite() {
                continue;
            }
            for next in 0..m {
                if mask & (1 << next) != 0 {
                    continue;
                }
                let nmask = mask | (1 << next);
                let cand = here + d.get(last + 1, next + 1);
                let slot = nmask * m + next;
                if cand < cost[slot] {
                    cost[slot] = cand;
                    parent[slot] = last;
                }
            }
        }
    }
    let full = states - 1;
    let mut best = f64::INFINITY;
    let mut best_last = 0;
    for last in 0..m {
        let total = cost[full * m + last] + d.get(last + 1, 0);
        if total < best {
            best = total;
            best_last = last;
        }
    }

    let mut order = Vec::with_capacity(n);
    let mut mask = full;
    let mut last = best_last;
    while last != usize::MAX {
        order.push(last + 1);
        let prev = parent[mask * m + last];
        mask &= !(1 << last);
        last = prev;
    }
    order.push(0);
    order.reverse();
    let tour = Tour::new_unchecked(order);
    // report the length of the witness itself so it matches `tour_length`
    let length = d.cycle_length(tour.order());
    Ok((length, tour))
}

/// The optimum used for gap reporting: the instance's reference value when
/// given, otherwise the exact solver's result.
pub fn reference_optimum(instance: &TspInstance) -> Result<f64, TspError> {
    if let Some(opt) = instance.reference_optimum {
        return Ok(opt);
    }
    match held_karp(instance) {
        Ok((len, _)) => Ok(len),
        Err(TspError::TooLarge(_)) => Err(TspError::MissingOptimum(instance.name.clone())),
        Err(e) => Err(e),
    }
}
