use serde::{Deserialize, Serialize};

use crate::seed::splitmix64;

/// Shuffle seed baked into the random-insertion seed program.
pub const RI_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SeedKind {
    NearestNeighbor,
    NearestInsertion,
    FarthestInsertion,
    RandomInsertion,
}

impl SeedKind {
    pub const ALL: [SeedKind; 4] = [
        SeedKind::NearestNeighbor,
        SeedKind::NearestInsertion,
        SeedKind::FarthestInsertion,
        SeedKind::RandomInsertion,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            SeedKind::NearestNeighbor => "NN",
            SeedKind::NearestInsertion => "NI",
            SeedKind::FarthestInsertion => "FI",
            SeedKind::RandomInsertion => "RI",
        }
    }

    /// Python source defining `solve(coords) -> list[int]`.
    pub fn source(self) -> &'static str {
        match self {
            SeedKind::NearestNeighbor => include_str!("../../seeds/nn.py"),
            SeedKind::NearestInsertion => include_str!("../../seeds/ni.py"),
            SeedKind::FarthestInsertion => include_str!("../../seeds/fi.py"),
            SeedKind::RandomInsertion => include_str!("../../seeds/ri.py"),
        }
    }

    pub fn from_source(source: &str) -> Option<Self> {
        let s = source.trim();
        Self::ALL.into_iter().find(|k| k.source().trim() == s)
    }
}

/// The city order the random-insertion seed program draws: a Fisher-Yates
/// shuffle driven by SplitMix64 from `seed`.
pub fn splitmix_order(n: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    let mut state = seed;
    for i in (1..n).rev() {
        let j = (splitmix64(&mut state) % (i as u64 + 1)) as usize;
        order.swap(i, j);
    }
    order
}
