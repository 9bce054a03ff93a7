//! The `(s+1)`-dimensional extension in which the complement POVM becomes a
//! projective measurement in a basis of phase states.
//!
//! Level `n` is moved to slot `ℓ = r_n`; the remaining slots are auxiliary
//! canonical directions. Phase states are
//! `|η̃_m⟩ = (s+1)^{-1/2} Σ_ℓ e^{−iℓθ_m} |ẽ_ℓ⟩` with `θ_m = 2πτ_m/T_c`.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::povm::{complement_probabilities, ComplementMeasurement, ProbabilityVector};
use crate::spectrum::{validate_s, RationalStructure};
use crate::states::DensityMatrix;
use crate::{cis, C64};

/// The extended Hilbert space together with its two mutually unbiased bases.
#[derive(Debug, Clone)]
pub struct ExtendedSystem {
    index_map: Vec<usize>,
    theta_grid: Vec<f64>,
    phase_states: Vec<DVector<C64>>,
}

impl ExtendedSystem {
    /// `s + 1`.
    pub fn dimension(&self) -> usize {
        self.theta_grid.len()
    }

    /// Slot `ℓ = r_n` of each original level `n`.
    pub fn index_map(&self) -> &[usize] {
        &self.index_map
    }

    /// Slots not hit by any level.
    pub fn auxiliary_slots(&self) -> Vec<usize> {
        (0..self.dimension()).filter(|l| !self.index_map.contains(l)).collect()
    }

    pub fn theta_grid(&self) -> &[f64] {
        &self.theta_grid
    }

    pub fn phase_states(&self) -> &[DVector<C64>] {
        &self.phase_states
    }

    /// Canonical ket `|ẽ_ℓ⟩`.
    pub fn energy_ket(&self, slot: usize) -> DVector<C64> {
        let mut ket = DVector::zeros(self.dimension());
        ket[slot] = C64::new(1.0, 0.0);
        ket
    }

    /// Energy-basis distribution of an embedded state.
    pub fn energy_distribution(&self, embedded: &DensityMatrix) -> Result<ProbabilityVector> {
        self.check_dimension(embedded)?;
        ProbabilityVector::new(embedded.matrix().diagonal().iter().map(|z| z.re).collect())
    }

    /// Phase-state distribution `⟨η̃_m|ρ̃|η̃_m⟩` of an embedded state.
    pub fn phase_distribution(&self, embedded: &DensityMatrix) -> Result<ProbabilityVector> {
        self.check_dimension(embedded)?;
        let values = self
            .phase_states
            .iter()
            .map(|ket| (ket.adjoint() * embedded.matrix() * ket)[(0, 0)].re)
            .collect();
        ProbabilityVector::new(values)
    }

    fn check_dimension(&self, embedded: &DensityMatrix) -> Result<()> {
        if embedded.dimension() == self.dimension() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dimension(),
                found: embedded.dimension(),
            })
        }
    }
}

/// Builds the extension for the grid starting at `tau0`.
pub fn extend(structure: &RationalStructure, tau0: f64, s: usize) -> Result<ExtendedSystem> {
    if !validate_s(structure, s) {
        return Err(Error::InvalidS { s });
    }
    let outcomes = s + 1;
    let index_map = structure.r().iter().map(|&r| r as usize).collect();
    let amplitude = 1.0 / libm::sqrt(outcomes as f64);
    let theta0 = TAU * tau0 / structure.period();
    let theta_grid: Vec<f64> = (0..outcomes)
        .map(|m| theta0 + TAU * m as f64 / outcomes as f64)
        .collect();
    let phase_states = theta_grid
        .iter()
        .map(|&theta| DVector::from_iterator(outcomes, (0..outcomes).map(|l| cis(-(l as f64) * theta) * amplitude)))
        .collect();
    Ok(ExtendedSystem {
        index_map,
        theta_grid,
        phase_states,
    })
}

/// Pads `ρ` with zero rows and columns at the auxiliary slots.
pub fn embed_state(state: &DensityMatrix, system: &ExtendedSystem) -> Result<DensityMatrix> {
    let levels = system.index_map.len();
    if state.dimension() != levels {
        return Err(Error::DimensionMismatch {
            expected: levels,
            found: state.dimension(),
        });
    }
    let mut padded = DMatrix::zeros(system.dimension(), system.dimension());
    for (n, &l) in system.index_map.iter().enumerate() {
        for (k, &j) in system.index_map.iter().enumerate() {
            padded[(l, j)] = state.matrix()[(n, k)];
        }
    }
    Ok(DensityMatrix::from_trusted(padded))
}

/// `max_m |⟨η̃_m|ρ̃|η̃_m⟩ − ⟨θ_m|ρ|θ_m⟩|`.
pub fn consistency_check(
    system: &ExtendedSystem,
    measurement: &ComplementMeasurement,
    state: &DensityMatrix,
) -> Result<f64> {
    let embedded = embed_state(state, system)?;
    let extended = system.phase_distribution(&embedded)?;
    let original = complement_probabilities(measurement, state)?;
    Ok(extended
        .iter()
        .zip(original.iter())
        .fold(0.0_f64, |acc, (a, b)| acc.max(libm::fabs(a - b))))
}

/// `(Σ_ℓ ℓ|ẽ_ℓ⟩⟨ẽ_ℓ|, Σ_m θ_m|η̃_m⟩⟨η̃_m|)`.
pub fn conjugate_operators(system: &ExtendedSystem) -> (DMatrix<C64>, DMatrix<C64>) {
    let dim = system.dimension();
    let level_operator = DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            C64::new(i as f64, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let phase_operator = system
        .phase_states
        .iter()
        .zip(&system.theta_grid)
        .fold(DMatrix::zeros(dim, dim), |acc, (ket, &theta)| {
            acc + ket * ket.adjoint() * C64::new(theta, 0.0)
        });
    (level_operator, phase_operator)
}
