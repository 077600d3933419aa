//! Diagonal sampling, reconstruction and closure for batches of seeds.

use ckc::closure::{close, ClosedConfiguration};
use ckc::diagonal::sample_diagonals;
use ckc::solver::reconstruct;
use ckc::{DiagonalVector, JointCase, LinkLengths, Result};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct Sample {
    pub closed: ClosedConfiguration,
    pub diagonals: DiagonalVector,
    pub cases: Vec<JointCase>,
    pub seed: u64,
}

/// Per-sample seeds derived from a base seed.
pub fn derive_seeds(seed: u64, count: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.next_u64()).collect()
}

pub fn sample_one(links: &LinkLengths, seed: u64) -> Result<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let diagonals = sample_diagonals(links, &mut rng)?;
    let sc = reconstruct(links, &diagonals, None, &mut rng)?;
    let closed = close(links, &sc.angles)?;
    Ok(Sample {
        closed,
        diagonals,
        cases: sc.cases,
        seed,
    })
}

/// `count` samples in index order, computed in parallel.
pub fn sample_many(links: &LinkLengths, seed: u64, count: usize) -> Result<Vec<Sample>> {
    derive_seeds(seed, count)
        .into_par_iter()
        .map(|s| sample_one(links, s))
        .collect()
}
