//! Fixed inputs shared by the benchmarks.

use lmpso_core::seed::substream;
use lmpso_core::tsp::{generate_instance, TspInstance};

pub fn instance(n: usize) -> TspInstance {
    generate_instance(n, &mut substream(1, "bench", n as u64), format!("bench-{n}"))
}

/// A mid-sized expression of the kind the swarm produces late in a run.
pub const EXPRESSION: &str =
    "20 + (x0 - 3) - 0.446 * ((x1 - 11)^2 / 5 + (x0 - 4)^2) + 0.576 * sin(x1 - 10.51) + 0.084 * sin(x1 - 10.54)";
