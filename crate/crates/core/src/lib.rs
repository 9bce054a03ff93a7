//! Entropic uncertainty relations for energy and its complement.
//!
//! A discrete spectrum whose level ratios are rational (exactly or to a
//! chosen tolerance) admits a rank-one POVM of time-shifted states that is
//! mutually unbiased with the energy basis. This crate builds that
//! measurement, computes Rényi and Tsallis statistics of both measurements,
//! and evaluates both sides of each entropic bound so that they can be
//! certified numerically:
//!
//! - [`spectrum`]: reduction of the levels to integers `r_n` and the period `T_c`.
//! - [`states`]: density matrices in the energy basis.
//! - [`povm`]: the complement measurement and outcome distributions.
//! - [`entropy`]: Rényi/Tsallis entropies, α-logarithms, detector losses.
//! - [`bounds`]: discrete relations and their [`BoundReport`]s.
//! - [`naimark`]: the projective extension in dimension `s + 1`.
//! - [`continuum`]: the time density `w(τ)`, binning and continuous relations.
//!
//! The crate is `no_std` and needs only `alloc`. Entropies are in nats and
//! `ħ = 1`, so energies are inverse times.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
#[macro_use]
extern crate std;

pub mod bounds;
pub mod continuum;
pub mod entropy;
mod error;
pub mod naimark;
pub mod povm;
pub mod quadrature;
pub mod spectrum;
pub mod states;

pub use nalgebra;

pub use bounds::{BoundReport, Parameters, RelationId};
pub use continuum::{BinPartition, TimeDensity};
pub use entropy::ExtendedDistribution;
pub use error::{Error, Result};
pub use naimark::ExtendedSystem;
pub use povm::{ComplementMeasurement, ProbabilityVector};
pub use spectrum::{EnergySpectrum, RationalStructure};
pub use states::DensityMatrix;

/// Complex scalar used for all kets and matrices.
pub type C64 = nalgebra::Complex<f64>;

/// `exp(i·phase)`.
#[inline]
pub(crate) fn cis(phase: f64) -> C64 {
    C64::new(libm::cos(phase), libm::sin(phase))
}
