//! The diagonal space: feasible vectors of diagonal lengths.
//!
//! A vector `(L_2, …, L_{n-2})` is feasible when, walking backwards from
//! `L_{n-1} = a_n`, every `L_j` lies in
//! `[|L_{j+1} - a_{j+1}|, L_{j+1} + a_{j+1}] ∩ [0 ∨ R_j^min, R_j^max]`.
//! The first factor is a polytope of nested intervals, the second a cuboid of
//! reach bounds.

use std::fmt;

use rand::Rng;

use crate::chain::LinkLengths;
use crate::error::{CkcError, Result};

/// Diagonal lengths `L_1, …, L_{n-1}` of a chain with `n` links.
///
/// `L_1 = a_1` and `L_{n-1} = a_n` are fixed for spherical configurations;
/// the variable part is `L_2, …, L_{n-2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalVector {
    values: Vec<f64>,
}

impl DiagonalVector {
    /// Wraps all `n - 1` diagonals.
    pub fn from_full(values: Vec<f64>) -> Self {
        Self { values }
    }

    /// Builds the full vector from the variable part `L_2, …, L_{n-2}`,
    /// filling in the fixed ends.
    pub fn from_variable(links: &LinkLengths, variable: &[f64]) -> Result<Self> {
        let n = links.len();
        if variable.len() != n - 3 {
            return Err(CkcError::WrongDiagonalCount {
                expected: n - 3,
                actual: variable.len(),
            });
        }
        let mut values = Vec::with_capacity(n - 1);
        values.push(links.get(1));
        values.extend_from_slice(variable);
        values.push(links.last());
        Ok(Self { values })
    }

    /// `L_k` for `1 ≤ k ≤ n - 1`.
    #[inline]
    pub fn get(&self, k: usize) -> f64 {
        self.values[k - 1]
    }

    pub fn set(&mut self, k: usize, value: f64) {
        self.values[k - 1] = value;
    }

    /// Number of stored diagonals, `n - 1`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// `L_2, …, L_{n-2}`.
    pub fn variable(&self) -> &[f64] {
        let n1 = self.values.len();
        if n1 < 2 {
            &[]
        } else {
            &self.values[1..n1 - 1]
        }
    }
}

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo).max(0.0)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Membership with slack `eps` on both ends.
    pub fn contains_within(&self, x: f64, eps: f64) -> bool {
        self.lo - eps <= x && x <= self.hi + eps
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    /// Smallest `|x - c|` over the interval.
    fn min_distance_to(&self, c: f64) -> f64 {
        if c < self.lo {
            self.lo - c
        } else if c > self.hi {
            c - self.hi
        } else {
            0.0
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Reach bounds `R_k^min`, `R_k^max` for `k = 1, …, n - 1`.
///
/// `R_k^max = Σ_{j≤k} a_j` and `R_k^min = max_{i≤k} (2 a_i - Σ_{j≤k} a_j)`.
/// The raw minimum may be negative; [`ReachBounds::clamped_min`] gives
/// `0 ∨ R_k^min`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReachBounds {
    min: Vec<f64>,
    max: Vec<f64>,
}

impl ReachBounds {
    pub fn min(&self, k: usize) -> f64 {
        self.min[k - 1]
    }

    pub fn clamped_min(&self, k: usize) -> f64 {
        self.min[k - 1].max(0.0)
    }

    pub fn max(&self, k: usize) -> f64 {
        self.max[k - 1]
    }

    /// `[0 ∨ R_k^min, R_k^max]`.
    pub fn interval(&self, k: usize) -> Interval {
        Interval::new(self.clamped_min(k), self.max(k))
    }

    pub fn len(&self) -> usize {
        self.max.len()
    }

    pub fn is_empty(&self) -> bool {
        self.max.is_empty()
    }
}

/// Reach bounds in one pass with a running sum and a running maximum.
pub fn reach_bounds(links: &LinkLengths) -> ReachBounds {
    let m = links.len() - 1;
    let mut min = Vec::with_capacity(m);
    let mut max = Vec::with_capacity(m);
    let mut sum = 0.0;
    let mut largest = 0.0f64;
    for &a in &links.as_slice()[..m] {
        sum += a;
        largest = largest.max(a);
        min.push(2.0 * largest - sum);
        max.push(sum);
    }
    ReachBounds { min, max }
}

// Intervals that come out empty by no more than this fraction of the total
// chain length are treated as a single point; they arise from rounding on
// degenerate triangles.
const COLLAPSE_REL: f64 = 1e-12;

/// The diagonal space of one chain.
#[derive(Debug, Clone)]
pub struct DiagonalSpace<'a> {
    links: &'a LinkLengths,
    bounds: ReachBounds,
}

impl<'a> DiagonalSpace<'a> {
    pub fn new(links: &'a LinkLengths) -> Self {
        Self {
            links,
            bounds: reach_bounds(links),
        }
    }

    pub fn links(&self) -> &LinkLengths {
        self.links
    }

    pub fn bounds(&self) -> &ReachBounds {
        &self.bounds
    }

    /// Number of variable diagonals, `n - 3`.
    pub fn dimension(&self) -> usize {
        self.links.len() - 3
    }

    /// The polytope factor for `L_j` given `L_{j+1}`:
    /// `[|L_{j+1} - a_{j+1}|, L_{j+1} + a_{j+1}]`.
    pub fn triangle_interval(&self, j: usize, upper: f64) -> Interval {
        let a = self.links.get(j + 1);
        Interval::new((upper - a).abs(), upper + a)
    }

    /// Feasible interval for `L_j` given the already chosen `L_{j+1}`.
    pub fn interval_for(&self, j: usize, upper: f64) -> Result<Interval> {
        let iv = self
            .triangle_interval(j, upper)
            .intersect(&self.bounds.interval(j));
        if !iv.is_empty() {
            return Ok(iv);
        }
        if iv.lo - iv.hi <= COLLAPSE_REL * self.links.total() {
            let mid = 0.5 * (iv.lo + iv.hi);
            return Ok(Interval::new(mid, mid));
        }
        Err(CkcError::InfeasiblePrefix {
            index: j,
            lo: iv.lo,
            hi: iv.hi,
        })
    }

    /// Interval for `L_{n-k-1}` at step `k`, given `L_{n-k}`.
    pub fn step_interval(&self, k: usize, upper: f64) -> Result<Interval> {
        self.interval_for(self.links.len() - k - 1, upper)
    }

    /// Backward sampling: each `L_j`, `j = n-2, …, 2`, uniform on its interval.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<DiagonalVector> {
        let n = self.links.len();
        let mut values = vec![0.0; n - 1];
        values[0] = self.links.get(1);
        values[n - 2] = self.links.last();
        for j in (2..=n.saturating_sub(2)).rev() {
            let iv = self.interval_for(j, values[j])?;
            values[j - 1] = uniform_in(rng, iv);
        }
        Ok(DiagonalVector::from_full(values))
    }

    /// Axis-aligned bounding box of the diagonal space, one interval per
    /// `j = 2, …, n-2` in ascending order.
    pub fn bounding_box(&self) -> Vec<Interval> {
        let n = self.links.len();
        let mut boxes = vec![Interval::new(0.0, 0.0); n.saturating_sub(3)];
        let mut upper = Interval::new(self.links.last(), self.links.last());
        for j in (2..=n.saturating_sub(2)).rev() {
            let a = self.links.get(j + 1);
            let poly = Interval::new(upper.min_distance_to(a), upper.hi + a);
            let iv = poly.intersect(&self.bounds.interval(j));
            boxes[j - 2] = iv;
            upper = iv;
        }
        boxes
    }

    /// Membership in the diagonal space via nested intervals and reach
    /// bounds, with slack `eps`.
    pub fn contains(&self, diagonals: &DiagonalVector, eps: f64) -> bool {
        membership_zan_stein_with(self.links, &self.bounds, diagonals, eps)
    }
}

fn uniform_in<R: Rng + ?Sized>(rng: &mut R, iv: Interval) -> f64 {
    if iv.lo >= iv.hi {
        iv.lo
    } else {
        rng.random_range(iv.lo..=iv.hi)
    }
}

/// Feasible interval for the next diagonal after the choices
/// `chosen = [L_{n-1}, L_{n-2}, …, L_{n-k}]` (so `k = chosen.len()`).
pub fn interval_at_step(links: &LinkLengths, chosen: &[f64]) -> Result<Interval> {
    let k = chosen.len();
    let n = links.len();
    if k == 0 || k > n - 3 {
        return Err(CkcError::WrongDiagonalCount {
            expected: n - 3,
            actual: k,
        });
    }
    DiagonalSpace::new(links).step_interval(k, chosen[k - 1])
}

fn fixed_ends_ok(links: &LinkLengths, l: &DiagonalVector, eps: f64) -> bool {
    l.len() == links.len() - 1
        && (l.get(1) - links.get(1)).abs() <= eps
        && (l.get(l.len()) - links.last()).abs() <= eps
        && l.as_slice().iter().all(|&x| x >= -eps)
}

fn membership_zan_stein_with(
    links: &LinkLengths,
    bounds: &ReachBounds,
    l: &DiagonalVector,
    eps: f64,
) -> bool {
    if !fixed_ends_ok(links, l, eps) {
        return false;
    }
    let n = links.len();
    for k in 3..=n - 1 {
        let (lk, ak, prev) = (l.get(k), links.get(k), l.get(k - 1));
        if !((lk - ak).abs() - eps <= prev && prev <= lk + ak + eps) {
            return false;
        }
    }
    (2..=n - 1).all(|k| bounds.interval(k).contains_within(l.get(k), eps))
}

/// Membership test with the nested triangle inequalities together with the
/// reach bounds:
/// `|L_k - a_k| ≤ L_{k-1} ≤ L_k + a_k` for `3 ≤ k ≤ n-1` and
/// `0 ∨ R_k^min ≤ L_k ≤ R_k^max` for `2 ≤ k ≤ n-1`.
pub fn membership_zan_stein(links: &LinkLengths, diagonals: &DiagonalVector, eps: f64) -> bool {
    membership_zan_stein_with(links, &reach_bounds(links), diagonals, eps)
}

/// Membership test with the triangle system
/// `|L_{k-1} - a_k| ≤ L_k ≤ L_{k-1} + a_k`, `a_k ≤ L_k + L_{k-1}` for
/// `2 ≤ k ≤ n-1`, with `L_1 = a_1` and `L_{n-1} = a_n`.
pub fn membership_li_han(links: &LinkLengths, diagonals: &DiagonalVector, eps: f64) -> bool {
    let l = diagonals;
    if !fixed_ends_ok(links, l, eps) {
        return false;
    }
    (2..=links.len() - 1).all(|k| {
        let (lk, prev, ak) = (l.get(k), l.get(k - 1), links.get(k));
        (prev - ak).abs() - eps <= lk && lk <= prev + ak + eps && ak <= lk + prev + eps
    })
}

/// One side of the reach-bound cuboid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CuboidSide {
    /// Diagonal index `j`.
    pub index: usize,
    /// `R_j^min` before clamping at zero.
    pub raw_min: f64,
    pub max: f64,
}

impl CuboidSide {
    pub fn interval(&self) -> Interval {
        Interval::new(self.raw_min.max(0.0), self.max)
    }
}

/// One nested constraint `|L_{index+1} - offset| ≤ L_index ≤ L_{index+1} + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NestedStep {
    pub index: usize,
    pub offset: f64,
}

/// The diagonal space split into the nested-interval polytope `P` and the
/// reach-bound cuboid `Q`, with `DS = P ∩ Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    n: usize,
    /// Interval for `L_{n-2}`, determined by `a_{n-1}` and `a_n` alone.
    pub top: Option<(usize, Interval)>,
    /// Nested steps for `L_{n-3}` down to `L_2`.
    pub steps: Vec<NestedStep>,
    /// Cuboid sides for `L_{n-2}` down to `L_2`.
    pub cuboid: Vec<CuboidSide>,
}

impl Decomposition {
    pub fn in_polytope(&self, l: &DiagonalVector, eps: f64) -> bool {
        if l.len() != self.n - 1 {
            return false;
        }
        if let Some((j, iv)) = self.top {
            if !iv.contains_within(l.get(j), eps) {
                return false;
            }
        }
        self.steps.iter().all(|s| {
            let up = l.get(s.index + 1);
            Interval::new((up - s.offset).abs(), up + s.offset).contains_within(l.get(s.index), eps)
        })
    }

    pub fn in_cuboid(&self, l: &DiagonalVector, eps: f64) -> bool {
        l.len() == self.n - 1
            && self
                .cuboid
                .iter()
                .all(|c| c.interval().contains_within(l.get(c.index), eps))
    }

    pub fn contains(&self, l: &DiagonalVector, eps: f64) -> bool {
        self.in_polytope(l, eps) && self.in_cuboid(l, eps)
    }
}

impl fmt::Display for Decomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P = {{")?;
        if let Some((j, iv)) = self.top {
            write!(f, "{} <= L_{j} <= {}", iv.lo, iv.hi)?;
        }
        for s in &self.steps {
            let (j, u, o) = (s.index, s.index + 1, s.offset);
            write!(f, ", |L_{u} - {o}| <= L_{j} <= L_{u} + {o}")?;
        }
        write!(f, "}}\nQ = ")?;
        self.write_cuboid(f, |c| (c.raw_min, c.max))?;
        write!(f, "\nQ clamped = ")?;
        self.write_cuboid(f, |c| (c.raw_min.max(0.0), c.max))
    }
}

impl Decomposition {
    fn write_cuboid(
        &self,
        f: &mut fmt::Formatter<'_>,
        side: impl Fn(&CuboidSide) -> (f64, f64),
    ) -> fmt::Result {
        for (i, c) in self.cuboid.iter().enumerate() {
            if i > 0 {
                write!(f, " x ")?;
            }
            let (lo, hi) = side(c);
            write!(f, "[{lo}, {hi}]")?;
        }
        if self.cuboid.is_empty() {
            write!(f, "{{}}")?;
        }
        Ok(())
    }
}

/// Splits the diagonal space into its polytope and cuboid factors.
pub fn decompose(links: &LinkLengths) -> Decomposition {
    let n = links.len();
    let bounds = reach_bounds(links);
    let top = (n >= 4).then(|| {
        let (an, an1) = (links.last(), links.get(n - 1));
        (n - 2, Interval::new((an - an1).abs(), an + an1))
    });
    let steps = (2..n.saturating_sub(2))
        .rev()
        .map(|j| NestedStep {
            index: j,
            offset: links.get(j + 1),
        })
        .collect();
    let cuboid = (2..=n.saturating_sub(2))
        .rev()
        .map(|j| CuboidSide {
            index: j,
            raw_min: bounds.min(j),
            max: bounds.max(j),
        })
        .collect();
    Decomposition {
        n,
        top,
        steps,
        cuboid,
    }
}

/// Draws one feasible diagonal vector by backward sequential sampling.
pub fn sample_diagonals<R: Rng + ?Sized>(
    links: &LinkLengths,
    rng: &mut R,
) -> Result<DiagonalVector> {
    DiagonalSpace::new(links).sample(rng)
}

/// Monte-Carlo estimate of the volume of the diagonal space: the bounding
/// box volume times the feasible fraction of `points` uniform box samples.
pub fn monte_carlo_volume<R: Rng + ?Sized>(links: &LinkLengths, points: usize, rng: &mut R) -> f64 {
    let space = DiagonalSpace::new(links);
    let bx = space.bounding_box();
    let volume: f64 = bx.iter().map(Interval::width).product();
    if points == 0 || volume == 0.0 {
        return 0.0;
    }
    let mut v = vec![0.0; bx.len()];
    let hits = (0..points)
        .filter(|_| {
            for (x, iv) in v.iter_mut().zip(&bx) {
                *x = rng.random_range(iv.lo..=iv.hi);
            }
            let d = DiagonalVector::from_variable(links, &v).expect("box dimension");
            space.contains(&d, 0.0)
        })
        .count();
    volume * hits as f64 / points as f64
}

/// Exact area of a two-dimensional diagonal space (five links). The feasible
/// width in `L_2` is piecewise linear in `L_3`, so the trapezoid rule between
/// breakpoints is exact.
pub fn planar_area(links: &LinkLengths) -> Result<f64> {
    if links.len() != 5 {
        return Err(CkcError::WrongDiagonalCount {
            expected: 2,
            actual: links.len().saturating_sub(3),
        });
    }
    let space = DiagonalSpace::new(links);
    let range = space.bounding_box()[1];
    let a3 = links.get(3);
    let (rmin, rmax) = (space.bounds.clamped_min(2), space.bounds.max(2));
    let mut xs = vec![range.lo, range.hi, 0.0, a3];
    for c in [rmin, rmax] {
        xs.extend([a3 + c, a3 - c, c - a3]);
    }
    xs.retain(|&x| range.contains(x));
    xs.sort_by(f64::total_cmp);
    let width = |l3: f64| {
        space
            .triangle_interval(2, l3)
            .intersect(&space.bounds.interval(2))
            .width()
            .max(0.0)
    };
    Ok(xs
        .windows(2)
        .map(|w| 0.5 * (w[1] - w[0]) * (width(w[0]) + width(w[1])))
        .sum())
}
