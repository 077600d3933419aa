use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CkcError {
    #[error("a chain needs at least 3 links, got {0}")]
    TooFewLinks(usize),

    #[error("link {index} has invalid length {value} (must be finite and > 0)")]
    InvalidLink { index: usize, value: f64 },

    #[error("links are not closable: 2 * max = {twice_max} exceeds total length {total}")]
    NotClosable { twice_max: f64, total: f64 },

    #[error("angle vectors differ in length: {alpha} alpha vs {beta} beta")]
    AngleLengthMismatch { alpha: usize, beta: usize },

    #[error("angle {index} is not finite")]
    NonFiniteAngle { index: usize },

    #[error("polar angle beta[{index}] = {value} lies outside [0, pi]")]
    BetaOutOfRange { index: usize, value: f64 },

    #[error("expected {expected} joint angles, got {actual}")]
    WrongAngleCount { expected: usize, actual: usize },

    #[error("arg is undefined at the origin")]
    DegenerateArg,

    #[error("expected {expected} diagonal entries, got {actual}")]
    WrongDiagonalCount { expected: usize, actual: usize },

    #[error("empty feasible interval for L_{index}: [{lo}, {hi}]")]
    InfeasiblePrefix { index: usize, lo: f64, hi: f64 },

    #[error("diagonal vector is not in the diagonal space")]
    InfeasibleDiagonals,

    #[error("prefix norm {actual} is inconsistent with diagonal L_{index} = {expected}")]
    InconsistentPrefix {
        index: usize,
        expected: f64,
        actual: f64,
    },

    #[error("endpoint norm {norm} differs from the closing link length {expected}")]
    NotSpherical { norm: f64, expected: f64 },

    #[error("the chain does not have three long links")]
    NoLongLinks,

    #[error("negative radicand {0} at index {1}")]
    NegativeRadicand(f64, usize),

    #[error("bound T_{0} vanishes; the cube coordinate is undetermined")]
    ZeroBound(usize),

    #[error("cube coordinate s_{index} = {value} lies outside [-1, 1]")]
    OutsideCube { index: usize, value: f64 },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("permuted diagonals are infeasible for the reordered chain")]
    PermutationTransport,
}

pub type Result<T> = std::result::Result<T, CkcError>;
