//! Shared fixtures for the criterion benchmarks.

use mdmotif_core::{generate_planted, Planted, PlantedSpec};

/// A planted dataset of the given length with 5 dimensions, 2 of which carry
/// the motif.
pub fn planted_fixture(n: usize, w: usize, seed: u64) -> Planted {
    generate_planted(&PlantedSpec::new(n, 5, 2, w), seed).expect("valid fixture")
}
