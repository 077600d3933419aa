//! Joint angles from diagonal lengths.
//!
//! Given the prefix of the chain up to joint `k - 1` (with endpoint norm
//! `L_{k-1}`) and the next diagonal `L_k`, the direction `d` of link `k`
//! must satisfy `2 a_k ⟨d, f_{k-1}⟩ = L_k² - a_k² - L_{k-1}²`. The admissible
//! directions form a circle on the unit sphere (or the whole sphere when the
//! prefix has returned to the origin). [`solve_joint`] classifies the circle
//! and [`sample_from_solution`] draws one `(α_k, β_k)` from it.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;

use rand::Rng;

use crate::chain::{arg, normalize_angle, phi, ChainPrefixState, JointAngles, LinkLengths};
use crate::diagonal::{membership_zan_stein, DiagonalVector, Interval};
use crate::error::{CkcError, Result};

/// Relative tolerance for classifying the degenerate cases.
pub const CASE_TOL: f64 = 1e-10;

/// Relative slack allowed between the squared prefix norm and the squared
/// nominal diagonal.
pub const PREFIX_TOL: f64 = 1e-8;

/// Relative slack when checking that supplied diagonals are feasible.
pub const MEMBERSHIP_SLACK: f64 = 1e-12;

const BRANCH_TOL: f64 = 1e-9;

/// Which family of solutions a joint falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum JointCase {
    FullSphere,
    EquatorCircle,
    LongitudeCircle,
    SkewGreatCircle,
    LatitudeCircle,
    GenericCircle,
}

impl JointCase {
    pub const ALL: [JointCase; 6] = [
        JointCase::FullSphere,
        JointCase::EquatorCircle,
        JointCase::LongitudeCircle,
        JointCase::SkewGreatCircle,
        JointCase::LatitudeCircle,
        JointCase::GenericCircle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            JointCase::FullSphere => "full_sphere",
            JointCase::EquatorCircle => "equator_circle",
            JointCase::LongitudeCircle => "longitude_circle",
            JointCase::SkewGreatCircle => "skew_great_circle",
            JointCase::LatitudeCircle => "latitude_circle",
            JointCase::GenericCircle => "generic_circle",
        }
    }

    pub fn parse(s: &str) -> Option<JointCase> {
        JointCase::ALL.into_iter().find(|c| c.as_str() == s)
    }
}

impl fmt::Display for JointCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A union of at most two disjoint arcs of `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleSet {
    parts: [Interval; 2],
    count: usize,
}

impl AngleSet {
    pub fn full() -> Self {
        Self {
            parts: [Interval::new(0.0, TAU), Interval::new(0.0, 0.0)],
            count: 1,
        }
    }

    /// The arc that starts at `start` (any real) and runs counter-clockwise
    /// for `length ∈ [0, 2π]`, split at the wrap point.
    pub fn arc(start: f64, length: f64) -> Self {
        if length >= TAU {
            return Self::full();
        }
        let s = normalize_angle(start);
        let e = s + length.max(0.0);
        if e <= TAU {
            Self {
                parts: [Interval::new(s, e), Interval::new(0.0, 0.0)],
                count: 1,
            }
        } else {
            Self {
                parts: [Interval::new(0.0, e - TAU), Interval::new(s, TAU)],
                count: 2,
            }
        }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.parts[..self.count]
    }

    pub fn measure(&self) -> f64 {
        self.intervals().iter().map(Interval::width).sum()
    }

    pub fn contains(&self, x: f64, eps: f64) -> bool {
        let x = normalize_angle(x);
        self.intervals().iter().any(|iv| {
            iv.contains_within(x, eps)
                || iv.contains_within(x + TAU, eps)
                || iv.contains_within(x - TAU, eps)
        })
    }

    /// Maps `u ∈ [0, 1]` onto the set, weighting each arc by its length.
    pub fn at_fraction(&self, u: f64) -> f64 {
        let mut rest = u.clamp(0.0, 1.0) * self.measure();
        for iv in self.intervals() {
            if rest <= iv.width() {
                return normalize_angle(iv.lo + rest);
            }
            rest -= iv.width();
        }
        let last = self.intervals()[self.count - 1];
        normalize_angle(last.hi)
    }
}

/// All `(α_k, β_k)` compatible with a prefix and the diagonals `L_{k-1}`,
/// `L_k`.
#[derive(Debug, Clone, PartialEq)]
pub enum AngleSolutionSet {
    /// The prefix ends at the origin; any direction works.
    FullSphere,
    /// Prefix along the z-axis, right angle: `β = π/2`, `α` free.
    EquatorCircle,
    /// Prefix in the xy-plane, right angle: `α ∈ {2π - Φ, π - Φ}`, `β` free.
    LongitudeCircle { phi: f64 },
    /// Right angle otherwise: `α` free, `β` from `sin(β + Ψ) = 0`.
    SkewGreatCircle { phi: f64, planar_norm: f64, z: f64 },
    /// Prefix along the z-axis, general triangle: `α` free, fixed `β`.
    LatitudeCircle { beta: f64 },
    /// General triangle with a planar component.
    GenericCircle {
        phi: f64,
        planar_norm: f64,
        z: f64,
        /// `(L_k² - a_k² - L_{k-1}²) / (2 a_k)`, the required `⟨d, f_{k-1}⟩`.
        target: f64,
        /// `D_k`; two β branches exist for every interior α when positive.
        d: f64,
        /// Azimuths for which some `β ∈ [0, π]` solves the joint equation.
        alpha_set: AngleSet,
    },
}

impl AngleSolutionSet {
    pub fn case(&self) -> JointCase {
        match self {
            AngleSolutionSet::FullSphere => JointCase::FullSphere,
            AngleSolutionSet::EquatorCircle => JointCase::EquatorCircle,
            AngleSolutionSet::LongitudeCircle { .. } => JointCase::LongitudeCircle,
            AngleSolutionSet::SkewGreatCircle { .. } => JointCase::SkewGreatCircle,
            AngleSolutionSet::LatitudeCircle { .. } => JointCase::LatitudeCircle,
            AngleSolutionSet::GenericCircle { .. } => JointCase::GenericCircle,
        }
    }

    /// The admissible azimuths.
    pub fn alpha_set(&self) -> AngleSet {
        match self {
            AngleSolutionSet::LongitudeCircle { phi } => {
                // two isolated azimuths; represented as degenerate arcs
                let mut s = AngleSet::arc(TAU - phi, 0.0);
                s.parts[1] = AngleSet::arc(PI - phi, 0.0).parts[0];
                s.count = 2;
                s
            }
            AngleSolutionSet::GenericCircle { alpha_set, .. } => *alpha_set,
            _ => AngleSet::full(),
        }
    }

    /// Solutions `β ∈ [0, π]` for a given azimuth (up to two).
    pub fn betas_for(&self, alpha: f64) -> BetaSolutions {
        match *self {
            AngleSolutionSet::FullSphere | AngleSolutionSet::LongitudeCircle { .. } => {
                BetaSolutions::Any
            }
            AngleSolutionSet::EquatorCircle => BetaSolutions::One(FRAC_PI_2),
            AngleSolutionSet::LatitudeCircle { beta } => BetaSolutions::One(beta),
            AngleSolutionSet::SkewGreatCircle {
                phi,
                planar_norm,
                z,
            } => {
                let amp = (alpha + phi).sin() * planar_norm;
                match arg(amp, z) {
                    Ok(psi) => BetaSolutions::One(skew_beta(psi)),
                    Err(_) => BetaSolutions::Any,
                }
            }
            AngleSolutionSet::GenericCircle {
                phi,
                planar_norm,
                z,
                target,
                ..
            } => generic_betas(alpha, phi, planar_norm, z, target),
        }
    }
}

/// `β` with `sin(β + Ψ) = 0` in `[0, π]`; `Ψ = π` takes the first branch.
fn skew_beta(psi: f64) -> f64 {
    if psi <= PI {
        PI - psi
    } else {
        TAU - psi
    }
}

/// Candidate polar angles for one azimuth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaSolutions {
    /// Every `β ∈ [0, π]`.
    Any,
    One(f64),
    Two(f64, f64),
    /// No candidate lands in `[0, π]`; carries the nearest reflected value.
    Outside(f64),
}

fn to_polar_range(b: f64) -> Option<f64> {
    let b = normalize_angle(b);
    if b <= PI + BRANCH_TOL {
        Some(b.min(PI))
    } else if b >= TAU - BRANCH_TOL {
        Some(0.0)
    } else {
        None
    }
}

fn generic_betas(alpha: f64, phi: f64, planar_norm: f64, z: f64, target: f64) -> BetaSolutions {
    let amp = (alpha + phi).sin() * planar_norm;
    let r = amp.hypot(z);
    let Ok(psi) = arg(amp, z) else {
        return BetaSolutions::Any;
    };
    let s = (target / r).clamp(-1.0, 1.0).asin();
    let c1 = to_polar_range(s - psi);
    let c2 = to_polar_range(PI - s - psi);
    match (c1, c2) {
        (Some(x), Some(y)) if (x - y).abs() <= BRANCH_TOL => BetaSolutions::One(x.min(y)),
        (Some(x), Some(y)) => BetaSolutions::Two(x.min(y), x.max(y)),
        (Some(x), None) | (None, Some(x)) => BetaSolutions::One(x),
        (None, None) => BetaSolutions::Outside(normalize_angle(s - psi)),
    }
}

/// `D_k = ((L_k² - a_k² - L_{k-1}²)² - 4 a_k² Z_{k-1}²) / (4 a_k² (X_{k-1}² + Y_{k-1}²))`.
pub fn d_k(
    links: &LinkLengths,
    k: usize,
    l_prev: f64,
    l_k: f64,
    prev: &ChainPrefixState,
) -> Result<f64> {
    let planar = prev.planar_norm_sq();
    if planar == 0.0 {
        return Err(CkcError::DegenerateArg);
    }
    let a = links.get(k);
    let num = l_k * l_k - a * a - l_prev * l_prev;
    let z = prev.z();
    Ok((num * num - 4.0 * a * a * z * z) / (4.0 * a * a * planar))
}

/// Classifies the solution set for joint `k` (`2 ≤ k ≤ n - 1`).
///
/// The prefix norm is used in place of `L_{k-1}` so that rounding in earlier
/// joints does not accumulate; its square must agree with `l_prev²` to
/// [`PREFIX_TOL`]. Squares are compared because a diagonal near zero is
/// only determined to about the square root of the rounding error.
pub fn solve_joint(
    links: &LinkLengths,
    k: usize,
    prev: &ChainPrefixState,
    l_prev: f64,
    l_k: f64,
) -> Result<AngleSolutionSet> {
    let a = links.get(k);
    let norm_sq = prev.norm_sq();
    let norm = norm_sq.sqrt();
    if (norm_sq - l_prev * l_prev).abs() > PREFIX_TOL * l_prev.max(a).max(1.0).powi(2) {
        return Err(CkcError::InconsistentPrefix {
            index: k - 1,
            expected: l_prev,
            actual: norm,
        });
    }

    let scale = l_k.max(1.0);
    let eps = CASE_TOL * scale;
    if norm <= eps {
        return Ok(AngleSolutionSet::FullSphere);
    }

    let rhs = l_k * l_k - a * a - norm_sq;
    let planar_sq = prev.planar_norm_sq();
    let planar_norm = planar_sq.sqrt();
    let z = prev.z();

    if rhs.abs() <= eps * scale {
        if planar_norm <= eps {
            return Ok(AngleSolutionSet::EquatorCircle);
        }
        let phi = phi(prev)?;
        if z.abs() <= eps {
            return Ok(AngleSolutionSet::LongitudeCircle { phi });
        }
        return Ok(AngleSolutionSet::SkewGreatCircle {
            phi,
            planar_norm,
            z,
        });
    }

    let target = rhs / (2.0 * a);
    if planar_norm <= eps {
        let beta = (target / z).clamp(-1.0, 1.0).acos();
        return Ok(AngleSolutionSet::LatitudeCircle { beta });
    }

    let phi = phi(prev)?;
    let d = (target * target - z * z) / planar_sq;
    let alpha_set = if d <= 0.0 {
        AngleSet::full()
    } else {
        // sin(α + Φ) ∈ [t, 1] for a positive target, [-1, -t] for a negative one;
        // the other half of the symmetric set gives no β in [0, π].
        let t = d.sqrt().min(1.0).asin();
        let start = if target > 0.0 { t } else { PI + t };
        AngleSet::arc(start - phi, PI - 2.0 * t)
    };
    Ok(AngleSolutionSet::GenericCircle {
        phi,
        planar_norm,
        z,
        target,
        d,
        alpha_set,
    })
}

/// One drawn `(α_k, β_k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointSample {
    pub alpha: f64,
    pub beta: f64,
    /// Two β candidates coincided in `[0, π]` where a unique solution was
    /// expected; the smaller one was taken.
    pub boundary_tie: bool,
}

/// Draws `α` uniformly from the admissible azimuths, then `β` from the case
/// formula. Where two β branches exist the branch is drawn uniformly, so the
/// samples cover the whole circle.
pub fn sample_from_solution<R: Rng + ?Sized>(set: &AngleSolutionSet, rng: &mut R) -> JointSample {
    let plain = |alpha, beta| JointSample {
        alpha: normalize_angle(alpha),
        beta,
        boundary_tie: false,
    };
    match *set {
        AngleSolutionSet::FullSphere => {
            let alpha = rng.random_range(0.0..TAU);
            let beta = rng.random_range(-1.0f64..=1.0).acos();
            plain(alpha, beta)
        }
        AngleSolutionSet::LongitudeCircle { phi } => {
            let alpha = if rng.random_bool(0.5) {
                TAU - phi
            } else {
                PI - phi
            };
            plain(alpha, rng.random_range(0.0..=PI))
        }
        AngleSolutionSet::GenericCircle { d, alpha_set, .. } => {
            let alpha = alpha_set.at_fraction(rng.random_range(0.0..=1.0));
            match set.betas_for(alpha) {
                BetaSolutions::Any => plain(alpha, rng.random_range(0.0..=PI)),
                BetaSolutions::One(b) => plain(alpha, b),
                BetaSolutions::Two(lo, hi) => {
                    if d > 0.0 {
                        plain(alpha, if rng.random_bool(0.5) { lo } else { hi })
                    } else {
                        JointSample {
                            alpha: normalize_angle(alpha),
                            beta: lo,
                            boundary_tie: true,
                        }
                    }
                }
                BetaSolutions::Outside(b) => plain(alpha, b),
            }
        }
        _ => {
            let alpha = rng.random_range(0.0..TAU);
            match set.betas_for(alpha) {
                BetaSolutions::One(b) | BetaSolutions::Outside(b) => plain(alpha, b),
                BetaSolutions::Two(b, _) => plain(alpha, b),
                BetaSolutions::Any => plain(alpha, rng.random_range(0.0..=PI)),
            }
        }
    }
}

/// Angles of the first `n - 1` links with `‖f_{n-1}‖ = a_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalConfiguration {
    pub angles: JointAngles,
    pub diagonals: DiagonalVector,
    /// Solution case chosen at joints `2, …, n - 1`.
    pub cases: Vec<JointCase>,
    /// Number of joints where the β tie rule fired.
    pub boundary_ties: usize,
}

impl SphericalConfiguration {
    /// `|‖f_{n-1}‖ - a_n|`.
    pub fn residual(&self, links: &LinkLengths) -> f64 {
        let end = crate::chain::endpoint_map(links, &self.angles, self.angles.len())
            .map(|p| p.norm())
            .unwrap_or(f64::NAN);
        (end - links.last()).abs()
    }
}

/// Default direction of the first link: along `+x`.
pub const DEFAULT_FIRST_JOINT: (f64, f64) = (0.0, FRAC_PI_2);

/// Builds a spherical configuration realizing the given feasible diagonals,
/// joint by joint.
pub fn reconstruct<R: Rng + ?Sized>(
    links: &LinkLengths,
    diagonals: &DiagonalVector,
    first_joint: Option<(f64, f64)>,
    rng: &mut R,
) -> Result<SphericalConfiguration> {
    if !membership_zan_stein(links, diagonals, MEMBERSHIP_SLACK * links.total()) {
        return Err(CkcError::InfeasibleDiagonals);
    }
    let n = links.len();
    let (a1, b1) = first_joint.unwrap_or(DEFAULT_FIRST_JOINT);
    let mut angles = JointAngles::with_capacity(n - 1);
    angles.push(a1, b1);
    let mut state = ChainPrefixState::origin();
    let (a1, b1) = angles.get(1);
    state.push(links.get(1), a1, b1);

    let mut cases = Vec::with_capacity(n - 2);
    let mut boundary_ties = 0;
    for k in 2..n {
        let set = solve_joint(links, k, &state, diagonals.get(k - 1), diagonals.get(k))?;
        let s = sample_from_solution(&set, rng);
        boundary_ties += usize::from(s.boundary_tie);
        angles.push(s.alpha, s.beta);
        let (a, b) = angles.get(k);
        state.push(links.get(k), a, b);
        cases.push(set.case());
    }
    Ok(SphericalConfiguration {
        angles,
        diagonals: diagonals.clone(),
        cases,
        boundary_ties,
    })
}
