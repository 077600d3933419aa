//! Cube parametrization of the diagonal space for chains with three long
//! links.
//!
//! With `U_j = L_j² - a_{j+1}² - L_{j+1}²` (`2 ≤ j ≤ n-2`) the nested triangle
//! inequalities read `|U_j| ≤ T_{j+1}`, where `T_m = 2 a_m L_m` depends only on
//! `U_m, …, U_{n-2}`. Writing `U_j = s_j T_{j+1}` maps the cube `[-1, 1]^{n-3}`
//! onto the feasible `U`.

use rand::Rng;

use crate::chain::LinkLengths;
use crate::diagonal::{membership_zan_stein, reach_bounds, DiagonalVector};
use crate::error::{CkcError, Result};
use crate::permute::{map_diagonals, LinkPermutation};

/// Relative (to `(Σa)²`) slack before a negative radicand is an error.
pub const RADICAND_TOL: f64 = 1e-12;

/// Slack beyond `|s| = 1` tolerated (and clamped) by [`gamma_inverse`].
pub const CUBE_TOL: f64 = 1e-10;

/// Strict (`a + b > L/2`) or non-strict (`a + b ≥ L/2`) long-link test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LongLinkRule {
    #[default]
    Strict,
    NonStrict,
}

/// The three largest links, as 1-based indices in descending length order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LongLinks {
    pub indices: [usize; 3],
    pub lengths: [f64; 3],
}

/// The three largest links if every pair of them sums to more than half
/// the total length.
pub fn three_long_links(links: &LinkLengths, rule: LongLinkRule) -> Option<LongLinks> {
    let a = links.as_slice();
    let mut idx: Vec<usize> = (0..a.len()).collect();
    idx.sort_by(|&i, &j| a[j].total_cmp(&a[i]));
    let half = links.total() / 2.0;
    let pair = a[idx[1]] + a[idx[2]];
    let ok = match rule {
        LongLinkRule::Strict => pair > half,
        LongLinkRule::NonStrict => pair >= half,
    };
    ok.then(|| LongLinks {
        indices: [idx[0] + 1, idx[1] + 1, idx[2] + 1],
        lengths: [a[idx[0]], a[idx[1]], a[idx[2]]],
    })
}

pub fn has_three_long_links(links: &LinkLengths) -> bool {
    three_long_links(links, LongLinkRule::Strict).is_some()
}

pub fn is_descending(links: &LinkLengths) -> bool {
    links.as_slice().windows(2).all(|w| w[0] >= w[1])
}

/// `U_2, …, U_{n-2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct UVector {
    values: Vec<f64>,
}

impl UVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    /// `U_j` for `2 ≤ j ≤ n - 2`.
    pub fn get(&self, j: usize) -> f64 {
        self.values[j - 2]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `s_2, …, s_{n-2} ∈ [-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CubePoint {
    values: Vec<f64>,
}

impl CubePoint {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (i, &v) in values.iter().enumerate() {
            if !(-1.0..=1.0).contains(&v) {
                return Err(CkcError::OutsideCube {
                    index: i + 2,
                    value: v,
                });
            }
        }
        Ok(Self { values })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            values: vec![0.0; dim],
        }
    }

    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        Self {
            values: (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect(),
        }
    }

    /// `s_j` for `2 ≤ j ≤ n - 2`.
    pub fn get(&self, j: usize) -> f64 {
        self.values[j - 2]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn check_dim(links: &LinkLengths, dim: usize) -> Result<()> {
    let expected = links.len() - 3;
    if dim != expected {
        return Err(CkcError::WrongDiagonalCount {
            expected,
            actual: dim,
        });
    }
    Ok(())
}

fn clamp_radicand(r: f64, links: &LinkLengths, index: usize) -> Result<f64> {
    if r >= 0.0 {
        Ok(r)
    } else if r >= -RADICAND_TOL * links.total().powi(2) {
        Ok(0.0)
    } else {
        Err(CkcError::NegativeRadicand(r, index))
    }
}

/// `T_{n-k} = 2 a_{n-k} √(Σ_{j=n-k}^{n-2} U_j + Σ_{j=n-k+1}^{n} a_j²)` for
/// `1 ≤ k ≤ n - 2`, with `u_suffix = U_{n-k}, …, U_{n-2}` (empty for `k = 1`).
pub fn t_bound(links: &LinkLengths, k: usize, u_suffix: &[f64]) -> Result<f64> {
    let n = links.len();
    if k == 0 || k > n - 2 || u_suffix.len() != k - 1 {
        return Err(CkcError::WrongDiagonalCount {
            expected: k.saturating_sub(1),
            actual: u_suffix.len(),
        });
    }
    let m = n - k;
    let r: f64 =
        u_suffix.iter().sum::<f64>() + (m + 1..=n).map(|j| links.get(j).powi(2)).sum::<f64>();
    let r = clamp_radicand(r, links, m)?;
    Ok(2.0 * links.get(m) * r.sqrt())
}

/// `U_j = L_j² - a_{j+1}² - L_{j+1}²`.
pub fn to_u(links: &LinkLengths, diagonals: &DiagonalVector) -> Result<UVector> {
    let n = links.len();
    if diagonals.len() != n - 1 {
        return Err(CkcError::WrongDiagonalCount {
            expected: n - 1,
            actual: diagonals.len(),
        });
    }
    Ok(UVector::new(
        (2..=n - 2)
            .map(|j| {
                let (l, up, a) = (diagonals.get(j), diagonals.get(j + 1), links.get(j + 1));
                l * l - a * a - up * up
            })
            .collect(),
    ))
}

/// `L_j = √(U_j + a_{j+1}² + L_{j+1}²)` backward from `L_{n-1} = a_n`.
pub fn from_u(links: &LinkLengths, u: &UVector) -> Result<DiagonalVector> {
    let n = links.len();
    check_dim(links, u.len())?;
    let mut values = vec![0.0; n - 1];
    values[n - 2] = links.last();
    let mut sq = links.last().powi(2);
    for j in (2..=n - 2).rev() {
        let a = links.get(j + 1);
        sq = clamp_radicand(u.get(j) + a * a + sq, links, j)?;
        values[j - 1] = sq.sqrt();
    }
    values[0] = links.get(1);
    Ok(DiagonalVector::from_full(values))
}

/// Options for [`gamma`] and [`containment_check`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct HypothesisCheck {
    pub rule: LongLinkRule,
    /// Evaluate even without three long links.
    pub force: bool,
}

fn require_long_links(links: &LinkLengths, check: HypothesisCheck) -> Result<()> {
    if check.force || three_long_links(links, check.rule).is_some() {
        Ok(())
    } else {
        Err(CkcError::NoLongLinks)
    }
}

/// The cube map `s ↦ U`, evaluated from `U_{n-2}` downward.
pub fn gamma(links: &LinkLengths, s: &CubePoint, check: HypothesisCheck) -> Result<UVector> {
    require_long_links(links, check)?;
    check_dim(links, s.len())?;
    let n = links.len();
    let mut u = vec![0.0; n - 3];
    // radicand of T_{j+1}, i.e. L_{j+1}²
    let mut sq = links.last().powi(2);
    for j in (2..=n - 2).rev() {
        let a = links.get(j + 1);
        let t = 2.0 * a * sq.sqrt();
        u[j - 2] = s.get(j) * t;
        sq = clamp_radicand(u[j - 2] + a * a + sq, links, j)?;
    }
    Ok(UVector::new(u))
}

/// `s_j = U_j / T_{j+1}`; fails where a bound vanishes.
pub fn gamma_inverse(links: &LinkLengths, u: &UVector) -> Result<CubePoint> {
    check_dim(links, u.len())?;
    let n = links.len();
    let mut s = vec![0.0; n - 3];
    let mut sq = links.last().powi(2);
    for j in (2..=n - 2).rev() {
        let a = links.get(j + 1);
        let t = 2.0 * a * sq.sqrt();
        if t == 0.0 {
            return Err(CkcError::ZeroBound(j + 1));
        }
        let v = u.get(j) / t;
        if v.abs() > 1.0 + CUBE_TOL {
            return Err(CkcError::OutsideCube { index: j, value: v });
        }
        s[j - 2] = v.clamp(-1.0, 1.0);
        sq = clamp_radicand(u.get(j) + a * a + sq, links, j)?;
    }
    Ok(CubePoint { values: s })
}

/// Draws a point of the nested-interval polytope `P`, ignoring the reach
/// bounds.
pub fn sample_polytope<R: Rng + ?Sized>(links: &LinkLengths, rng: &mut R) -> DiagonalVector {
    let n = links.len();
    let mut values = vec![0.0; n - 1];
    values[n - 2] = links.last();
    for j in (2..=n - 2).rev() {
        let (up, a) = (values[j], links.get(j + 1));
        values[j - 1] = rng.random_range((up - a).abs()..=up + a);
    }
    values[0] = links.get(1);
    DiagonalVector::from_full(values)
}

/// Outcome of [`containment_check`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContainmentReport {
    pub samples: usize,
    /// Polytope samples outside the reach cuboid.
    pub violations: usize,
}

/// Samples `P` and counts points that leave the reach cuboid `Q`.
pub fn containment_check<R: Rng + ?Sized>(
    links: &LinkLengths,
    samples: usize,
    check: HypothesisCheck,
    rng: &mut R,
) -> Result<ContainmentReport> {
    require_long_links(links, check)?;
    let bounds = reach_bounds(links);
    let eps = RADICAND_TOL * links.total();
    let n = links.len();
    let violations = (0..samples)
        .filter(|_| {
            let l = sample_polytope(links, rng);
            !(2..=n - 2).all(|k| bounds.interval(k).contains_within(l.get(k), eps))
        })
        .count();
    Ok(ContainmentReport {
        samples,
        violations,
    })
}

/// Diagonals for a cube point. Descending chains go through `γ` and the
/// square-root recursion directly; other orders are parametrized on the
/// sorted chain and transported back with a seeded permutation.
pub fn cube_to_diagonals(
    links: &LinkLengths,
    s: &CubePoint,
    check: HypothesisCheck,
    seed: u64,
) -> Result<DiagonalVector> {
    if is_descending(links) {
        return from_u(links, &gamma(links, s, check)?);
    }
    let sort = LinkPermutation::sorting_descending(links);
    let sorted = sort.apply_links(links)?;
    let l = from_u(&sorted, &gamma(&sorted, s, check)?)?;
    Ok(map_diagonals(&sorted, &sort.inverse(), &l, seed)?.diagonals)
}

/// Membership of `from_u(gamma(s))` in the diagonal space.
pub fn cube_point_feasible(
    links: &LinkLengths,
    s: &CubePoint,
    check: HypothesisCheck,
) -> Result<bool> {
    let l = from_u(links, &gamma(links, s, check)?)?;
    Ok(membership_zan_stein(links, &l, 0.0))
}
