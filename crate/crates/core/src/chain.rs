//! Problem instance, joint angles and the endpoint map.
//!
//! Link `j` (1-based) points in the direction
//! `(sin β_j cos α_j, sin β_j sin α_j, cos β_j)`. The `k`-th endpoint map is
//! the sum of the first `k` scaled directions; its norm is the diagonal `L_k`.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::diagonal::DiagonalVector;
use crate::error::{CkcError, Result};
use crate::sum::NeumaierSum;

/// Oriented angle of the point `(a, b)` measured from the positive x-axis,
/// in `[0, 2π)`.
///
/// With this convention `a sin x + b cos x = √(a² + b²) sin(x + arg(a, b))`
/// holds for every `x`.
pub fn arg(a: f64, b: f64) -> Result<f64> {
    if a == 0.0 && b == 0.0 {
        return Err(CkcError::DegenerateArg);
    }
    Ok(normalize_angle(b.atan2(a)))
}

/// Reduces an angle into `[0, 2π)`.
#[inline]
pub fn normalize_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Maps an arbitrary `(α, β)` pair onto the same direction with
/// `α ∈ [0, 2π)` and `β ∈ [0, π]`.
pub fn reflect_spherical(alpha: f64, beta: f64) -> (f64, f64) {
    let mut b = beta.rem_euclid(TAU);
    let mut a = alpha;
    if b > PI {
        b = TAU - b;
        a += PI;
    }
    (normalize_angle(a), b.clamp(0.0, PI))
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Point3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y).hypot(self.z)
    }

    pub fn distance(self, other: Point3) -> f64 {
        (self - other).norm()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl From<[f64; 3]> for Point3 {
    fn from(v: [f64; 3]) -> Self {
        Point3::new(v[0], v[1], v[2])
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, o: Point3) -> Point3 {
        Point3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, o: Point3) -> Point3 {
        Point3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Point3 {
    type Output = Point3;
    fn neg(self) -> Point3 {
        Point3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, s: f64) -> Point3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl fmt::Display for Point3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// Unit direction for azimuth `alpha` and polar angle `beta`.
#[inline]
pub fn direction(alpha: f64, beta: f64) -> Point3 {
    let (sb, cb) = beta.sin_cos();
    let (sa, ca) = alpha.sin_cos();
    Point3::new(sb * ca, sb * sa, cb)
}

/// Spherical angles of a nonzero vector. Vectors parallel to the z-axis get
/// azimuth 0.
pub fn spherical_angles(v: Point3) -> (f64, f64) {
    let r = v.norm();
    let alpha = if v.x == 0.0 && v.y == 0.0 {
        0.0
    } else {
        normalize_angle(v.y.atan2(v.x))
    };
    let beta = if r > 0.0 {
        (v.z / r).clamp(-1.0, 1.0).acos()
    } else {
        0.0
    };
    (alpha, beta)
}

/// Positive link lengths `a_1, …, a_n` of a closable chain.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkLengths {
    a: Vec<f64>,
    total: f64,
}

impl LinkLengths {
    pub fn new(a: Vec<f64>) -> Result<Self> {
        if a.len() < 3 {
            return Err(CkcError::TooFewLinks(a.len()));
        }
        for (i, &v) in a.iter().enumerate() {
            if !(v.is_finite() && v > 0.0) {
                return Err(CkcError::InvalidLink {
                    index: i + 1,
                    value: v,
                });
            }
        }
        let total: f64 = a.iter().copied().collect::<NeumaierSum>().value();
        let max = a.iter().copied().fold(0.0, f64::max);
        if 2.0 * max > total {
            return Err(CkcError::NotClosable {
                twice_max: 2.0 * max,
                total,
            });
        }
        Ok(Self { a, total })
    }

    /// `n` links of length one.
    pub fn unit(n: usize) -> Result<Self> {
        Self::new(vec![1.0; n])
    }

    /// Number of links `n`.
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.a
    }

    /// `a_k` with the 1-based index used throughout the formulas.
    #[inline]
    pub fn get(&self, k: usize) -> f64 {
        self.a[k - 1]
    }

    /// The closing link `a_n`.
    pub fn last(&self) -> f64 {
        self.a[self.a.len() - 1]
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn max(&self) -> f64 {
        self.a.iter().copied().fold(0.0, f64::max)
    }

    /// `S_k = a_1² + … + a_k²`.
    pub fn sum_sq_prefix(&self, k: usize) -> f64 {
        self.a[..k]
            .iter()
            .map(|x| x * x)
            .collect::<NeumaierSum>()
            .value()
    }
}

impl fmt::Display for LinkLengths {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.a.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// Azimuths `α_j ∈ [0, 2π)` and polar angles `β_j ∈ [0, π]` of the first
/// `k` links.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct JointAngles {
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl JointAngles {
    /// Validates user-facing angles. Azimuths are reduced modulo `2π`; polar
    /// angles outside `[0, π]` are rejected.
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        if alpha.len() != beta.len() {
            return Err(CkcError::AngleLengthMismatch {
                alpha: alpha.len(),
                beta: beta.len(),
            });
        }
        let mut out = Self::with_capacity(alpha.len());
        for (i, (&a, &b)) in alpha.iter().zip(&beta).enumerate() {
            if !a.is_finite() || !b.is_finite() {
                return Err(CkcError::NonFiniteAngle { index: i + 1 });
            }
            if !(0.0..=PI).contains(&b) {
                return Err(CkcError::BetaOutOfRange {
                    index: i + 1,
                    value: b,
                });
            }
            out.alpha.push(normalize_angle(a));
            out.beta.push(b);
        }
        Ok(out)
    }

    pub fn with_capacity(cap: usize) -> Self {
        Self {
            alpha: Vec::with_capacity(cap),
            beta: Vec::with_capacity(cap),
        }
    }

    /// Appends a pair produced by internal arithmetic, reflecting it back
    /// into the canonical ranges if needed.
    pub fn push(&mut self, alpha: f64, beta: f64) {
        let (a, b) = reflect_spherical(alpha, beta);
        self.alpha.push(a);
        self.beta.push(b);
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// `(α_j, β_j)` for 1-based `j`.
    pub fn get(&self, j: usize) -> (f64, f64) {
        (self.alpha[j - 1], self.beta[j - 1])
    }

    /// Unit direction of link `j` (1-based).
    pub fn direction(&self, j: usize) -> Point3 {
        direction(self.alpha[j - 1], self.beta[j - 1])
    }

    pub fn directions(&self) -> impl Iterator<Item = Point3> + '_ {
        self.alpha
            .iter()
            .zip(&self.beta)
            .map(|(&a, &b)| direction(a, b))
    }
}

/// Running components `X_k, Y_k, Z_k` of the `k`-th endpoint, accumulated
/// with compensated sums.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ChainPrefixState {
    x: NeumaierSum,
    y: NeumaierSum,
    z: NeumaierSum,
    k: usize,
}

impl ChainPrefixState {
    /// The empty prefix, located at the origin.
    pub fn origin() -> Self {
        Self::default()
    }

    /// A state with prescribed components, for callers that construct a
    /// prefix geometrically.
    pub fn at(x: f64, y: f64, z: f64, k: usize) -> Self {
        let mut s = Self::default();
        s.x.add(x);
        s.y.add(y);
        s.z.add(z);
        s.k = k;
        s
    }

    /// Attaches one more link of length `a` in direction `(alpha, beta)`.
    #[inline]
    pub fn push(&mut self, a: f64, alpha: f64, beta: f64) {
        let d = direction(alpha, beta);
        self.x.add(a * d.x);
        self.y.add(a * d.y);
        self.z.add(a * d.z);
        self.k += 1;
    }

    pub fn extended(mut self, a: f64, alpha: f64, beta: f64) -> Self {
        self.push(a, alpha, beta);
        self
    }

    pub fn x(&self) -> f64 {
        self.x.value()
    }

    pub fn y(&self) -> f64 {
        self.y.value()
    }

    pub fn z(&self) -> f64 {
        self.z.value()
    }

    /// Number of links in the prefix.
    pub fn len(&self) -> usize {
        self.k
    }

    pub fn is_empty(&self) -> bool {
        self.k == 0
    }

    pub fn point(&self) -> Point3 {
        Point3::new(self.x(), self.y(), self.z())
    }

    /// `X² + Y²`.
    pub fn planar_norm_sq(&self) -> f64 {
        let (x, y) = (self.x(), self.y());
        x * x + y * y
    }

    /// `X² + Y² + Z²`, the squared diagonal of this prefix.
    pub fn norm_sq(&self) -> f64 {
        self.point().norm_sq()
    }

    pub fn norm(&self) -> f64 {
        self.point().norm()
    }
}

fn check_angles(links: &LinkLengths, angles: &JointAngles) -> Result<()> {
    if angles.len() >= links.len() {
        return Err(CkcError::WrongAngleCount {
            expected: links.len() - 1,
            actual: angles.len(),
        });
    }
    Ok(())
}

/// The `k`-th endpoint map `f_k = Σ_{j≤k} a_j · dir(α_j, β_j)`.
pub fn endpoint_map(links: &LinkLengths, angles: &JointAngles, k: usize) -> Result<Point3> {
    check_angles(links, angles)?;
    if k > angles.len() {
        return Err(CkcError::WrongAngleCount {
            expected: k,
            actual: angles.len(),
        });
    }
    let mut state = ChainPrefixState::origin();
    for j in 1..=k {
        let (a, b) = angles.get(j);
        state.push(links.get(j), a, b);
    }
    Ok(state.point())
}

/// Prefix states for every prefix length `1..=angles.len()`.
pub fn prefix_sums(links: &LinkLengths, angles: &JointAngles) -> Result<Vec<ChainPrefixState>> {
    check_angles(links, angles)?;
    let mut state = ChainPrefixState::origin();
    Ok((1..=angles.len())
        .map(|j| {
            let (a, b) = angles.get(j);
            state.push(links.get(j), a, b);
            state
        })
        .collect())
}

/// `Φ = arg(Y, X)` of a prefix, so that
/// `X cos α + Y sin α = √(X² + Y²) sin(α + Φ)`.
pub fn phi(state: &ChainPrefixState) -> Result<f64> {
    arg(state.y(), state.x())
}

/// `Ψ = arg(sin(α_k + Φ_prev) · √(X² + Y²), Z)` for the previous prefix and
/// the azimuth of the next link.
pub fn psi(alpha_k: f64, prev: &ChainPrefixState) -> Result<f64> {
    let planar = prev.planar_norm_sq().sqrt();
    let first = if planar > 0.0 {
        (alpha_k + phi(prev)?).sin() * planar
    } else {
        0.0
    };
    arg(first, prev.z())
}

/// All diagonals `L_1, …, L_{n-1}` of a full angle vector. `L_{n-1}` is the
/// measured endpoint norm, equal to `a_n` only for spherical configurations.
pub fn diagonal_lengths(links: &LinkLengths, angles: &JointAngles) -> Result<DiagonalVector> {
    if angles.len() != links.len() - 1 {
        return Err(CkcError::WrongAngleCount {
            expected: links.len() - 1,
            actual: angles.len(),
        });
    }
    let values = prefix_sums(links, angles)?
        .iter()
        .map(ChainPrefixState::norm)
        .collect();
    Ok(DiagonalVector::from_full(values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    fn random_angles(rng: &mut ChaCha8Rng, k: usize) -> JointAngles {
        let alpha = (0..k).map(|_| rng.random_range(0.0..TAU)).collect();
        let beta = (0..k).map(|_| rng.random_range(0.0..=PI)).collect();
        JointAngles::new(alpha, beta).unwrap()
    }

    #[test]
    fn arg_axes() {
        assert_eq!(arg(1.0, 0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(arg(0.0, 1.0).unwrap(), FRAC_PI_2);
        assert_abs_diff_eq!(arg(-1.0, 1.0).unwrap(), 3.0 * PI / 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(arg(0.0, -1.0).unwrap(), 3.0 * FRAC_PI_2, epsilon = 1e-15);
        assert_eq!(arg(0.0, 0.0), Err(CkcError::DegenerateArg));
    }

    #[test]
    fn arg_addition_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (a, b) in [(-1.0, 1.0), (3.0, -2.0), (-0.5, -4.0), (0.0, 2.0)] {
            let g = arg(a, b).unwrap();
            let c = f64::hypot(a, b);
            for _ in 0..100 {
                let x = rng.random_range(-10.0..10.0);
                let lhs = a * f64::sin(x) + b * f64::cos(x);
                let rhs = c * (x + g).sin();
                assert!((lhs - rhs).abs() <= 1e-12 * (a.abs() + b.abs()));
            }
        }
    }

    #[test]
    fn link_lengths_validation() {
        assert!(matches!(
            LinkLengths::new(vec![5.0, 1.0, 1.0]),
            Err(CkcError::NotClosable { .. })
        ));
        assert!(matches!(
            LinkLengths::new(vec![1.0, 1.0]),
            Err(CkcError::TooFewLinks(2))
        ));
        assert!(matches!(
            LinkLengths::new(vec![1.0, -1.0, 1.0]),
            Err(CkcError::InvalidLink { index: 2, .. })
        ));
        // 2·max = Σa is closable (a flat triangle)
        assert!(LinkLengths::new(vec![1.0, 1.0, 2.0]).is_ok());
        let l = LinkLengths::new(vec![1.0, 2.0, 2.0]).unwrap();
        assert_eq!(l.sum_sq_prefix(2), 5.0);
    }

    #[test]
    fn joint_angles_normalize_alpha_reject_beta() {
        let j = JointAngles::new(vec![-FRAC_PI_2, 3.0 * TAU], vec![0.0, PI]).unwrap();
        assert_abs_diff_eq!(j.alpha()[0], 3.0 * FRAC_PI_2);
        assert_abs_diff_eq!(j.alpha()[1], 0.0, epsilon = 1e-12);
        assert!(matches!(
            JointAngles::new(vec![0.0], vec![-0.1]),
            Err(CkcError::BetaOutOfRange { index: 1, .. })
        ));
        assert!(JointAngles::new(vec![0.0], vec![]).is_err());
    }

    #[test]
    fn reflection_preserves_direction() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let a = rng.random_range(-20.0..20.0);
            let b = rng.random_range(-20.0..20.0);
            let (ra, rb) = reflect_spherical(a, b);
            assert!((0.0..TAU).contains(&ra) && (0.0..=PI).contains(&rb));
            assert!(direction(a, b).distance(direction(ra, rb)) < 1e-12);
        }
    }

    #[test]
    fn endpoint_collinear_and_square() {
        let links = LinkLengths::unit(4).unwrap();
        let flat = JointAngles::new(vec![0.0; 3], vec![FRAC_PI_2; 3]).unwrap();
        let p = endpoint_map(&links, &flat, 3).unwrap();
        assert_abs_diff_eq!(p.x, 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.y, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.z, 0.0, epsilon = 1e-15);

        let sq = JointAngles::new(vec![0.0, FRAC_PI_2, PI], vec![FRAC_PI_2; 3]).unwrap();
        let p = endpoint_map(&links, &sq, 3).unwrap();
        assert!(p.distance(Point3::new(0.0, 1.0, 0.0)) < 1e-15);

        let states = prefix_sums(&links, &sq).unwrap();
        assert!(states[1].point().distance(Point3::new(1.0, 1.0, 0.0)) < 1e-15);
    }

    #[test]
    fn endpoint_matches_naive_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let links = LinkLengths::unit(8).unwrap();
        for _ in 0..10 {
            let ang = random_angles(&mut rng, 7);
            let (mut x, mut y, mut z) = (0.0, 0.0, 0.0);
            for j in 0..5 {
                let (a, b) = (ang.alpha()[j], ang.beta()[j]);
                x += b.sin() * a.cos();
                y += b.sin() * a.sin();
                z += b.cos();
            }
            let p = endpoint_map(&links, &ang, 5).unwrap();
            assert!(p.distance(Point3::new(x, y, z)) < 1e-12);
        }
    }

    #[test]
    fn single_link_prefix() {
        let links = LinkLengths::new(vec![2.0, 2.0, 2.0]).unwrap();
        let ang = JointAngles::new(vec![0.0], vec![FRAC_PI_2]).unwrap();
        let s = prefix_sums(&links, &ang).unwrap();
        assert_abs_diff_eq!(s[0].x(), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s[0].y(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s[0].z(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn prefix_last_state_is_endpoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let links = LinkLengths::unit(51).unwrap();
        let ang = random_angles(&mut rng, 50);
        let s = prefix_sums(&links, &ang).unwrap();
        let p = endpoint_map(&links, &ang, 50).unwrap();
        assert_eq!(s.len(), 50);
        assert!(s[49].point().distance(p) < 1e-12);
    }

    #[test]
    fn phi_values() {
        let s = ChainPrefixState::at(1.0, 0.0, 0.0, 1);
        assert_abs_diff_eq!(phi(&s).unwrap(), FRAC_PI_2);
        let s = ChainPrefixState::at(0.0, 1.0, 0.0, 1);
        assert_abs_diff_eq!(phi(&s).unwrap(), 0.0);
        assert!(phi(&ChainPrefixState::at(0.0, 0.0, 1.0, 1)).is_err());

        let s = ChainPrefixState::at(0.3, -1.7, 0.4, 2);
        let p = phi(&s).unwrap();
        let c = s.planar_norm_sq().sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let a: f64 = rng.random_range(0.0..TAU);
            let lhs = s.x() * a.cos() + s.y() * a.sin();
            assert!((lhs - c * (a + p).sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn psi_values() {
        // X = 1, Y = 0: Φ = π/2, so α = 0 gives sin(α + Φ) = 1 and Ψ = arg(1, 0).
        let s = ChainPrefixState::at(1.0, 0.0, 0.0, 1);
        assert_abs_diff_eq!(psi(0.0, &s).unwrap(), 0.0, epsilon = 1e-15);

        // C-term zero, Z > 0
        let s = ChainPrefixState::at(0.0, 0.0, 5.0, 1);
        assert_abs_diff_eq!(psi(1.234, &s).unwrap(), FRAC_PI_2);

        // β addition identity for X = 0.6, Y = 0.8, Z = 1, α = 0.
        let s = ChainPrefixState::at(0.6, 0.8, 1.0, 2);
        let alpha = 0.0;
        let g = psi(alpha, &s).unwrap();
        let amp = (alpha + phi(&s).unwrap()).sin() * s.planar_norm_sq().sqrt();
        let r = amp.hypot(s.z());
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let b: f64 = rng.random_range(0.0..=PI);
            let d = direction(alpha, b);
            let lhs = d.x * s.x() + d.y * s.y() + d.z * s.z();
            assert!((lhs - r * (b + g).sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonals_of_square_and_line() {
        let links = LinkLengths::unit(4).unwrap();
        let sq = JointAngles::new(vec![0.0, FRAC_PI_2, PI], vec![FRAC_PI_2; 3]).unwrap();
        let d = diagonal_lengths(&links, &sq).unwrap();
        assert_abs_diff_eq!(d.get(1), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.get(2), 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(d.get(3), 1.0, epsilon = 1e-15);

        let links = LinkLengths::new(vec![1.0, 2.0, 3.0, 4.0, 9.0]).unwrap();
        let flat = JointAngles::new(vec![0.0; 4], vec![FRAC_PI_2; 4]).unwrap();
        let d = diagonal_lengths(&links, &flat).unwrap();
        for (k, want) in [1.0, 3.0, 6.0, 10.0].iter().enumerate() {
            assert_abs_diff_eq!(d.get(k + 1), *want, epsilon = 1e-14);
        }
    }
}
