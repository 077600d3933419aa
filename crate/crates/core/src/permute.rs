//! Transport of diagonal vectors between chains whose links are permutations
//! of each other.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chain::{endpoint_map, spherical_angles, ChainPrefixState, JointAngles, LinkLengths};
use crate::closure::SPHERICAL_TOL;
use crate::diagonal::{membership_zan_stein, DiagonalVector};
use crate::error::{CkcError, Result};
use crate::solver::{reconstruct, MEMBERSHIP_SLACK};

/// A permutation of link positions, stored 0-based.
///
/// Applying `σ` to a sequence gives `out[i] = in[σ[i]]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinkPermutation {
    sigma: Vec<usize>,
}

impl LinkPermutation {
    pub fn new(sigma: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; sigma.len()];
        for &i in &sigma {
            if i >= sigma.len() || std::mem::replace(&mut seen[i], true) {
                return Err(CkcError::InvalidPermutation(format!("{sigma:?}")));
            }
        }
        Ok(Self { sigma })
    }

    /// From 1-based images `σ(1), …, σ(n)`.
    pub fn from_one_based(sigma: &[usize]) -> Result<Self> {
        if sigma.contains(&0) {
            return Err(CkcError::InvalidPermutation(format!("{sigma:?}")));
        }
        Self::new(sigma.iter().map(|&i| i - 1).collect())
    }

    pub fn identity(n: usize) -> Self {
        Self {
            sigma: (0..n).collect(),
        }
    }

    /// The permutation that sorts `links` in descending order (stable).
    pub fn sorting_descending(links: &LinkLengths) -> Self {
        let a = links.as_slice();
        let mut sigma: Vec<usize> = (0..a.len()).collect();
        sigma.sort_by(|&i, &j| a[j].total_cmp(&a[i]));
        Self { sigma }
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.sigma
    }

    pub fn is_identity(&self) -> bool {
        self.sigma.iter().enumerate().all(|(i, &s)| i == s)
    }

    /// `self ∘ other`: applying the result equals applying `self` first,
    /// then `other`.
    pub fn compose(&self, other: &LinkPermutation) -> LinkPermutation {
        LinkPermutation {
            sigma: other.sigma.iter().map(|&i| self.sigma[i]).collect(),
        }
    }

    pub fn inverse(&self) -> LinkPermutation {
        let mut inv = vec![0; self.sigma.len()];
        for (i, &s) in self.sigma.iter().enumerate() {
            inv[s] = i;
        }
        LinkPermutation { sigma: inv }
    }

    pub fn apply<T: Clone>(&self, items: &[T]) -> Vec<T> {
        self.sigma.iter().map(|&i| items[i].clone()).collect()
    }

    pub fn apply_links(&self, links: &LinkLengths) -> Result<LinkLengths> {
        if links.len() != self.len() {
            return Err(CkcError::InvalidPermutation(format!(
                "length {} for {} links",
                self.len(),
                links.len()
            )));
        }
        LinkLengths::new(self.apply(links.as_slice()))
    }
}

/// Angles of the closing link, pointing from `f_{n-1}` back to the origin.
pub fn closing_joint(links: &LinkLengths, angles: &JointAngles) -> Result<(f64, f64)> {
    let n = links.len();
    if angles.len() != n - 1 {
        return Err(CkcError::WrongAngleCount {
            expected: n - 1,
            actual: angles.len(),
        });
    }
    let f = endpoint_map(links, angles, n - 1)?;
    let norm = f.norm();
    if norm == 0.0 || (norm - links.last()).abs() > SPHERICAL_TOL * links.total() {
        return Err(CkcError::NotSpherical {
            norm,
            expected: links.last(),
        });
    }
    Ok(spherical_angles(-f))
}

/// Result of transporting a diagonal vector to a permuted chain.
#[derive(Debug, Clone, PartialEq)]
pub struct Transported {
    pub links: LinkLengths,
    pub diagonals: DiagonalVector,
    /// Angles of the first `n - 1` permuted links.
    pub angles: JointAngles,
    /// `|‖f_{n-1}‖ - a_{σ(n)}|` of the permuted open chain.
    pub closure_gap: f64,
    pub seed: u64,
}

/// Maps feasible diagonals of `links` to feasible diagonals of the permuted
/// chain: assign angles (seeded), append the closing joint, reorder the
/// `(angle, link)` pairs and read off the prefix norms.
pub fn map_diagonals(
    links: &LinkLengths,
    sigma: &LinkPermutation,
    diagonals: &DiagonalVector,
    seed: u64,
) -> Result<Transported> {
    let permuted = sigma.apply_links(links)?;
    let n = links.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sc = reconstruct(links, diagonals, None, &mut rng)?;
    let (an, bn) = closing_joint(links, &sc.angles)?;

    let mut pairs: Vec<(f64, f64)> = (1..n).map(|j| sc.angles.get(j)).collect();
    pairs.push((an, bn));
    let pairs = sigma.apply(&pairs);

    let mut angles = JointAngles::with_capacity(n - 1);
    let mut state = ChainPrefixState::origin();
    let mut values = Vec::with_capacity(n - 1);
    for (k, &(a, b)) in pairs.iter().take(n - 1).enumerate() {
        angles.push(a, b);
        state.push(permuted.get(k + 1), a, b);
        values.push(state.norm());
    }
    let closure_gap = (values[n - 2] - permuted.last()).abs();
    if closure_gap > SPHERICAL_TOL * permuted.total() {
        return Err(CkcError::PermutationTransport);
    }
    values[0] = permuted.get(1);
    values[n - 2] = permuted.last();
    let out = DiagonalVector::from_full(values);
    if !membership_zan_stein(&permuted, &out, MEMBERSHIP_SLACK * permuted.total()) {
        return Err(CkcError::PermutationTransport);
    }
    Ok(Transported {
        links: permuted,
        diagonals: out,
        angles,
        closure_gap,
        seed,
    })
}
