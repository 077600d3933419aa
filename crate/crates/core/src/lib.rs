//! Sampling and analysis of closed kinematic chains with spherical joints.
//!
//! A chain of `n` links `a_1, …, a_n` is described by the directions of the
//! first `n - 1` links in spherical coordinates. The chain closes when the
//! endpoint of those links lies at distance `a_n` from the origin. The
//! diagonals `L_k = ‖f_k‖` parametrize closed configurations up to rotation;
//! the set of feasible diagonal vectors is a convex polytope.

pub mod chain;
pub mod closure;
pub mod cube;
pub mod diagonal;
pub mod error;
pub mod permute;
pub mod solver;
pub mod sum;

pub use chain::{
    arg, diagonal_lengths, direction, endpoint_map, normalize_angle, phi, psi, spherical_angles,
    ChainPrefixState, JointAngles, LinkLengths, Point3,
};
pub use closure::{close, joint_positions, verify, ClosedConfiguration, ResidualReport};
pub use cube::{
    cube_to_diagonals, from_u, gamma, gamma_inverse, has_three_long_links, to_u, CubePoint,
    HypothesisCheck, UVector,
};
pub use diagonal::{
    decompose, membership_li_han, membership_zan_stein, reach_bounds, sample_diagonals,
    DiagonalSpace, DiagonalVector, Interval,
};
pub use error::{CkcError, Result};
pub use permute::{closing_joint, map_diagonals, LinkPermutation};
pub use solver::{reconstruct, solve_joint, AngleSolutionSet, JointCase, SphericalConfiguration};
