use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("p must be an odd prime, got {0}")]
    NotOddPrime(u64),

    #[error("p = {p} exceeds the configured maximum {max}")]
    ModulusTooLarge { p: u64, max: u64 },

    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u64, u64),

    #[error("division by zero in F_{0}")]
    DivisionByZero(u64),

    #[error("scaling by zero is not invertible")]
    ZeroScaling,

    #[error("matrix [[{a}, {b}], [{c}, {d}]] does not have determinant 1")]
    NotUnimodular { a: u64, b: u64, c: u64, d: u64 },

    #[error("eigenvalue at angle {angle} is not within tolerance of any {order}-th root of unity")]
    SnapFailure { angle: f64, order: usize },

    #[error("expected one-dimensional eigenspaces, character {index} has multiplicity {multiplicity}")]
    DegenerateEigenspace { index: usize, multiplicity: usize },

    #[error("eigenvector residual {residual} exceeds {tolerance}")]
    EigenResidual { residual: f64, tolerance: f64 },

    #[error("torus of order {order} has no element of full order")]
    NotCyclic { order: usize },

    #[error("ambiguous peak: |m| = {first} at {first_at:?} and {second} at {second_at:?}")]
    AmbiguousPeak {
        first: f64,
        first_at: (u64, u64),
        second: f64,
        second_at: (u64, u64),
    },

    #[error("decode margin below threshold: interference {interference} >= {threshold}")]
    DecodeMarginBelowThreshold { interference: f64, threshold: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
