use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix must be square: row {row} has {found} entries, expected {expected}")]
    NotSquare {
        row: usize,
        found: usize,
        expected: usize,
    },

    #[error("matrix entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not Hermitian (max asymmetry {asymmetry:.3e} > {tol:.3e})")]
    NotHermitian { asymmetry: f64, tol: f64 },

    #[error("not a density: {reason}")]
    NotDensity { reason: String },

    #[error("vector is not a unit vector (norm {norm})")]
    NotUnitVector { norm: f64 },

    #[error("{routine} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence {
        routine: &'static str,
        iterations: usize,
        residual: f64,
        /// Eigenvalues that were deflated before the iteration cap was hit.
        partial: Vec<num_complex::Complex64>,
    },

    #[error("negative central moment {value:.3e} exceeds rounding tolerance")]
    NegativeMoment { value: f64 },

    #[error("exponent p = {p} is outside the admissible range ({reason})")]
    InvalidExponent { p: f64, reason: &'static str },

    #[error("input is not a contraction (operator norm {norm})")]
    NotContraction { norm: f64 },

    #[error("input is not normal (commutator norm {residual:.3e})")]
    NotNormal { residual: f64 },

    #[error("density is infeasible for the spectrahedron (residual {residual:.3e} on constraint {constraint})")]
    Infeasible { constraint: usize, residual: f64 },

    #[error("no null direction found at rank {rank} with {equations} equations")]
    NoNullDirection { rank: usize, equations: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("basis is not orthonormal (residual {residual:.3e})")]
    NotOrthonormal { residual: f64 },

    #[error("unknown tolerance name `{0}`")]
    UnknownTolerance(String),

    #[error("unknown verification id `{0}`")]
    UnknownTheorem(String),

    #[error("suite {id} does not accept p = {p}: {reason}")]
    UnsupportedExponent {
        id: String,
        p: f64,
        reason: &'static str,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix file: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
