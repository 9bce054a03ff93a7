use thiserror::Error;

use crate::bounds::RelationId;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(&'static str),
    #[error("level {level}: {reason}")]
    ApproximationFailure { level: usize, reason: &'static str },
    #[error("coefficient vector is zero")]
    ZeroVector,
    #[error("Bloch vector of length {length} lies outside the unit ball")]
    OutsideBall { length: f64 },
    #[error("invalid density matrix: {0}")]
    InvalidState(&'static str),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("s = {s} does not give a complete measurement for this spectrum")]
    InvalidS { s: usize },
    #[error("probability {value} at index {index} is negative")]
    NegativeProbability { index: usize, value: f64 },
    #[error("probabilities sum to {sum}")]
    NotNormalized { sum: f64 },
    #[error("α-logarithm needs a positive argument, got {0}")]
    NonPositiveArgument(f64),
    #[error("entropic order {0} is out of range")]
    OrderOutOfRange(f64),
    #[error("no (n, m) pair with both probabilities non-zero")]
    NoAdmissiblePair,
    #[error("detector efficiency {0} is out of range")]
    EtaOutOfRange(f64),
    #[error("{relation} does not apply at α = {alpha}")]
    NotApplicable { relation: RelationId, alpha: f64 },
    #[error("quadrature did not converge with {intervals} intervals (last change {delta:e})")]
    QuadratureUnconverged { intervals: usize, delta: f64 },
    #[error("invalid bin partition: {0}")]
    InvalidPartition(&'static str),
}
