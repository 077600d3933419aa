//! Rotating spherical configurations onto the closing link.

use crate::chain::{
    diagonal_lengths, direction, endpoint_map, spherical_angles, ChainPrefixState, JointAngles,
    LinkLengths, Point3,
};
use crate::diagonal::DiagonalVector;
use crate::error::{CkcError, Result};
use crate::sum::NeumaierSum;

/// Relative tolerance (to `Σa`) on `|‖f_{n-1}‖ - a_n|` accepted by [`close`].
pub const SPHERICAL_TOL: f64 = 1e-9;

/// A 3×3 rotation matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation([[f64; 3]; 3]);

impl Rotation {
    pub const IDENTITY: Rotation = Rotation([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn about_z(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Rotation([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    }

    pub fn about_y(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Rotation([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
    }

    /// `self · other`.
    pub fn compose(&self, other: &Rotation) -> Rotation {
        let (a, b) = (&self.0, &other.0);
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| a[i][k] * b[k][j]).sum();
            }
        }
        Rotation(m)
    }

    pub fn apply(&self, p: Point3) -> Point3 {
        let m = &self.0;
        Point3::new(
            m[0][0] * p.x + m[0][1] * p.y + m[0][2] * p.z,
            m[1][0] * p.x + m[1][1] * p.y + m[1][2] * p.z,
            m[2][0] * p.x + m[2][1] * p.y + m[2][2] * p.z,
        )
    }

    pub fn matrix(&self) -> [[f64; 3]; 3] {
        self.0
    }

    /// The rotation `Ry(θ) · Rz(-λ)` taking `f` onto the positive x-axis,
    /// where `(λ, θ)` are the azimuth and elevation of `f`.
    pub fn aligning(f: Point3) -> Rotation {
        let rho = f.x.hypot(f.y);
        let lambda = if rho == 0.0 { 0.0 } else { f.y.atan2(f.x) };
        let theta = f.z.atan2(rho);
        Rotation::about_y(theta).compose(&Rotation::about_z(-lambda))
    }
}

/// A closed configuration: `p_1 = 0`, `p_n = (a_n, 0, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedConfiguration {
    pub angles: JointAngles,
    /// `p_1, …, p_n`.
    pub joints: Vec<Point3>,
    /// `‖p_n - (a_n, 0, 0)‖`.
    pub residual: f64,
}

impl ClosedConfiguration {
    /// Unit direction of the closing link, from `p_n` back to the origin.
    pub fn closing_direction(&self) -> Point3 {
        let p = *self.joints.last().expect("at least two joints");
        let r = p.norm();
        if r == 0.0 {
            Point3::new(-1.0, 0.0, 0.0)
        } else {
            -p * (1.0 / r)
        }
    }

    /// `Σ_j a_j · d_j` over all `n` links, closing link included.
    pub fn balance(&self, links: &LinkLengths) -> Point3 {
        let mut s = ChainPrefixState::origin();
        for j in 1..=self.angles.len() {
            let (a, b) = self.angles.get(j);
            s.push(links.get(j), a, b);
        }
        let c = self.closing_direction() * links.last();
        let (mut x, mut y, mut z) = (NeumaierSum::new(), NeumaierSum::new(), NeumaierSum::new());
        for (acc, v, w) in [
            (&mut x, s.x(), c.x),
            (&mut y, s.y(), c.y),
            (&mut z, s.z(), c.z),
        ] {
            acc.add(v);
            acc.add(w);
        }
        Point3::new(x.value(), y.value(), z.value())
    }
}

/// `p_1 = 0` followed by `f_1, …, f_m` for `m = angles.len()`.
pub fn joint_positions(links: &LinkLengths, angles: &JointAngles) -> Result<Vec<Point3>> {
    if angles.len() >= links.len() {
        return Err(CkcError::WrongAngleCount {
            expected: links.len() - 1,
            actual: angles.len(),
        });
    }
    let mut out = Vec::with_capacity(angles.len() + 1);
    out.push(Point3::ORIGIN);
    let mut s = ChainPrefixState::origin();
    for j in 1..=angles.len() {
        let (a, b) = angles.get(j);
        s.push(links.get(j), a, b);
        out.push(s.point());
    }
    Ok(out)
}

/// Closes a spherical configuration with the default tolerance.
pub fn close(links: &LinkLengths, angles: &JointAngles) -> Result<ClosedConfiguration> {
    close_with_tol(links, angles, SPHERICAL_TOL)
}

/// Rotates the open chain so that its endpoint lands on `(a_n, 0, 0)`.
/// `rel_tol` bounds `|‖f_{n-1}‖ - a_n|` relative to `Σa`.
pub fn close_with_tol(
    links: &LinkLengths,
    angles: &JointAngles,
    rel_tol: f64,
) -> Result<ClosedConfiguration> {
    let n = links.len();
    if angles.len() != n - 1 {
        return Err(CkcError::WrongAngleCount {
            expected: n - 1,
            actual: angles.len(),
        });
    }
    let f = endpoint_map(links, angles, n - 1)?;
    let norm = f.norm();
    if !norm.is_finite() || (norm - links.last()).abs() > rel_tol * links.total() {
        return Err(CkcError::NotSpherical {
            norm,
            expected: links.last(),
        });
    }
    let rot = Rotation::aligning(f);
    let mut rotated = JointAngles::with_capacity(n - 1);
    for d in angles.directions() {
        let (a, b) = spherical_angles(rot.apply(d));
        rotated.push(a, b);
    }
    let joints = joint_positions(links, &rotated)?;
    let residual = joints[n - 1].distance(Point3::new(links.last(), 0.0, 0.0));
    Ok(ClosedConfiguration {
        angles: rotated,
        joints,
        residual,
    })
}

/// Closure residual of an angle vector against `(a_n, 0, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    /// `‖f_{n-1} - (a_n, 0, 0)‖`.
    pub absolute: f64,
    /// `absolute / Σa`.
    pub relative: f64,
    pub endpoint: Point3,
    pub diagonals: DiagonalVector,
}

impl ResidualReport {
    pub fn passes(&self, rel_tol: f64) -> bool {
        self.relative <= rel_tol
    }
}

pub fn verify(links: &LinkLengths, angles: &JointAngles) -> Result<ResidualReport> {
    let diagonals = diagonal_lengths(links, angles)?;
    let endpoint = endpoint_map(links, angles, angles.len())?;
    let absolute = endpoint.distance(Point3::new(links.last(), 0.0, 0.0));
    Ok(ResidualReport {
        absolute,
        relative: absolute / links.total(),
        endpoint,
        diagonals,
    })
}

/// Directions of all `n` links of a closed configuration, closing link last.
pub fn link_directions(closed: &ClosedConfiguration) -> Vec<Point3> {
    let mut out: Vec<Point3> = closed
        .angles
        .alpha()
        .iter()
        .zip(closed.angles.beta())
        .map(|(&a, &b)| direction(a, b))
        .collect();
    out.push(closed.closing_direction());
    out
}
