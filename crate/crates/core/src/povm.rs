//! The energy measurement and the complement-of-energy POVM.
//!
//! The complement measurement consists of `s + 1` sub-normalized kets
//! `|θ_m⟩ = √((d+1)/(s+1)) |τ_m⟩` on the grid `τ_m = τ_0 + m T_c/(s+1)`,
//! where `|τ⟩ = (d+1)^{-1/2} Σ_n e^{−iε_n τ} |ε_n⟩`.

use alloc::vec::Vec;
use core::ops::Deref;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::spectrum::{validate_s, RationalStructure};
use crate::states::DensityMatrix;
use crate::{cis, C64};

/// Entries down to this negative value are rounding noise and clamp to 0.
pub const CLAMP_TOLERANCE: f64 = 1e-12;

/// Default allowed deviation of `Σ p_i` from 1.
pub const SUM_TOLERANCE: f64 = 1e-10;

/// Non-negative probabilities summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(values, SUM_TOLERANCE)
    }

    /// Like [`new`](Self::new) with a custom tolerance on the sum.
    pub fn with_tolerance(mut values: Vec<f64>, sum_tolerance: f64) -> Result<Self> {
        for (index, p) in values.iter_mut().enumerate() {
            if !p.is_finite() || *p < -CLAMP_TOLERANCE {
                return Err(Error::NegativeProbability { index, value: *p });
            }
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let sum: f64 = values.iter().sum();
        if values.is_empty() || libm::fabs(sum - 1.0) > sum_tolerance {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Self(values))
    }

    pub fn uniform(outcomes: usize) -> Self {
        Self(alloc::vec![1.0 / outcomes as f64; outcomes])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }
}

impl Deref for ProbabilityVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// `|τ⟩ = (d+1)^{-1/2} Σ_n exp(−iε_n τ)|ε_n⟩`, a unit vector.
pub fn tau_ket(structure: &RationalStructure, tau: f64) -> DVector<C64> {
    let levels = structure.levels();
    let amplitude = 1.0 / libm::sqrt(levels.len() as f64);
    DVector::from_iterator(levels.len(), levels.iter().map(|&e| cis(-e * tau) * amplitude))
}

/// Rank-one POVM `{|θ_m⟩⟨θ_m|}` measuring the complement of the Hamiltonian.
#[derive(Debug, Clone)]
pub struct ComplementMeasurement {
    structure: RationalStructure,
    s: usize,
    tau0: f64,
    tau_grid: Vec<f64>,
    kets: Vec<DVector<C64>>,
    defect: f64,
}

impl ComplementMeasurement {
    pub fn structure(&self) -> &RationalStructure {
        &self.structure
    }

    pub fn s(&self) -> usize {
        self.s
    }

    /// Number of outcomes, `s + 1`.
    pub fn outcomes(&self) -> usize {
        self.s + 1
    }

    /// Dimension `d + 1` of the measured system.
    pub fn dimension(&self) -> usize {
        self.structure.dimension()
    }

    pub fn tau0(&self) -> f64 {
        self.tau0
    }

    pub fn tau_grid(&self) -> &[f64] {
        &self.tau_grid
    }

    /// The kets `|θ_m⟩` in the energy basis.
    pub fn kets(&self) -> &[DVector<C64>] {
        &self.kets
    }

    /// `Σ_m |θ_m⟩⟨θ_m|`.
    pub fn element_sum(&self) -> DMatrix<C64> {
        let dim = self.dimension();
        self.kets
            .iter()
            .fold(DMatrix::zeros(dim, dim), |acc, k| acc + k * k.adjoint())
    }

    /// Spectral norm of `Σ_m |θ_m⟩⟨θ_m| − I`, computed at construction.
    pub fn identity_defect(&self) -> f64 {
        self.defect
    }
}

/// Builds the POVM on the uniform grid starting at `tau0`.
///
/// Fails with [`Error::InvalidS`] unless [`validate_s`] holds. For a
/// near-rational spectrum the measurement is still built; its completeness
/// error is available from [`identity_defect`].
pub fn build_povm(structure: &RationalStructure, tau0: f64, s: usize) -> Result<ComplementMeasurement> {
    if !validate_s(structure, s) {
        return Err(Error::InvalidS { s });
    }
    let outcomes = s + 1;
    let step = structure.period() / outcomes as f64;
    let weight = libm::sqrt(structure.dimension() as f64 / outcomes as f64);
    let tau_grid: Vec<f64> = (0..outcomes).map(|m| tau0 + m as f64 * step).collect();
    let kets = tau_grid
        .iter()
        .map(|&tau| tau_ket(structure, tau) * C64::new(weight, 0.0))
        .collect();
    let mut measurement = ComplementMeasurement {
        structure: structure.clone(),
        s,
        tau0,
        tau_grid,
        kets,
        defect: 0.0,
    };
    measurement.defect = spectral_defect(&measurement);
    Ok(measurement)
}

fn spectral_defect(measurement: &ComplementMeasurement) -> f64 {
    let dim = measurement.dimension();
    let deviation = measurement.element_sum() - DMatrix::<C64>::identity(dim, dim);
    deviation
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0_f64, |acc, l| acc.max(libm::fabs(*l)))
}

/// Spectral norm of `Σ_m |θ_m⟩⟨θ_m| − I`.
pub fn identity_defect(measurement: &ComplementMeasurement) -> f64 {
    measurement.identity_defect()
}

/// `p_n = ⟨ε_n|ρ|ε_n⟩`.
pub fn energy_probabilities(state: &DensityMatrix) -> ProbabilityVector {
    let values = state.matrix().diagonal().iter().map(|z| z.re).collect();
    ProbabilityVector::new(values).expect("a validated state has a probability diagonal")
}

/// `q_m = ⟨θ_m|ρ|θ_m⟩`.
pub fn complement_probabilities(
    measurement: &ComplementMeasurement,
    state: &DensityMatrix,
) -> Result<ProbabilityVector> {
    if state.dimension() != measurement.dimension() {
        return Err(Error::DimensionMismatch {
            expected: measurement.dimension(),
            found: state.dimension(),
        });
    }
    let values = measurement.kets().iter().map(|k| state.expectation(k)).collect();
    ProbabilityVector::with_tolerance(values, SUM_TOLERANCE + measurement.identity_defect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{min_valid_s, reduce_to_integers, EnergySpectrum};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};
    use std::vec;

    fn structure(levels: &[f64]) -> RationalStructure {
        reduce_to_integers(&EnergySpectrum::new(levels.to_vec()).unwrap(), 1_000_000, 1e-9).unwrap()
    }

    fn close(a: &DVector<C64>, b: &DVector<C64>) -> f64 {
        (a - b).norm()
    }

    #[test]
    fn tau_ket_examples() {
        let qubit = structure(&[0.0, 1.0]);
        let zero = tau_ket(&qubit, 0.0);
        for z in zero.iter() {
            assert_relative_eq!(z.re, FRAC_1_SQRT_2);
        }
        let at_pi = tau_ket(&qubit, PI);
        let expected = DVector::from_vec(vec![C64::new(FRAC_1_SQRT_2, 0.0), C64::new(-FRAC_1_SQRT_2, 0.0)]);
        assert!(close(&at_pi, &expected) < 1e-15);

        let three = structure(&[0.0, 1.0, 1.5]);
        for tau in [0.0, 0.3, -2.0, 11.0] {
            let shifted = tau_ket(&three, tau + three.period());
            assert!(close(&shifted, &tau_ket(&three, tau)) < 1e-12);
            assert_relative_eq!(tau_ket(&three, tau).norm(), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn qubit_povm_is_orthonormal_basis() {
        let m = build_povm(&structure(&[0.0, 1.0]), 0.0, 1).unwrap();
        let plus = DVector::from_vec(vec![C64::new(FRAC_1_SQRT_2, 0.0); 2]);
        let minus = DVector::from_vec(vec![C64::new(FRAC_1_SQRT_2, 0.0), C64::new(-FRAC_1_SQRT_2, 0.0)]);
        assert!(close(&m.kets()[0], &plus) < 1e-15);
        assert!(close(&m.kets()[1], &minus) < 1e-15);
        assert!(m.identity_defect() < 1e-12);
    }

    #[test]
    fn completeness_for_rational_spectra() {
        let three = structure(&[0.0, 1.0, 1.5]);
        let m = build_povm(&three, 0.0, 3).unwrap();
        assert!(identity_defect(&m) < 1e-10);
        for ket in m.kets() {
            assert_relative_eq!(ket.norm_squared(), 3.0 / 4.0, epsilon = 1e-14);
        }
        let grid = m.tau_grid();
        assert_relative_eq!(grid[1] - grid[0], three.period() / 4.0);
        assert!(identity_defect(&build_povm(&structure(&[0.0, 2.0, 3.0]), 0.7, 3).unwrap()) < 1e-10);
    }

    #[test]
    fn invalid_s_rejected() {
        let three = structure(&[0.0, 1.0, 1.5]);
        // s + 1 = 3 = r_2 − r_0
        assert_eq!(build_povm(&three, 0.0, 2).unwrap_err(), Error::InvalidS { s: 2 });
        assert_eq!(build_povm(&three, 0.0, 1).unwrap_err(), Error::InvalidS { s: 1 });
    }

    #[test]
    fn near_rational_defect_is_reported() {
        let spectrum = EnergySpectrum::new(vec![0.0, 1.0, core::f64::consts::SQRT_2]).unwrap();
        let approx = reduce_to_integers(&spectrum, 1000, 1e-5).unwrap();
        assert!(approx.residual() > 0.0);
        let s = min_valid_s(&approx);
        let m = build_povm(&approx, 0.0, s).unwrap();
        assert!(m.identity_defect() > 0.0);
        assert!(m.identity_defect() < 1e-2);
    }

    /// Independent check of the defect: brute-force the operator norm of the
    /// deviation by maximizing the Rayleigh quotient over random unit vectors
    /// refined by power iteration.
    #[test]
    fn defect_matches_power_iteration() {
        let spectrum = EnergySpectrum::new(vec![0.0, 1.0, 1.73205]).unwrap();
        let approx = reduce_to_integers(&spectrum, 100_000, 1e-7).unwrap();
        let m = build_povm(&approx, 0.0, min_valid_s(&approx)).unwrap();
        let deviation = m.element_sum() - DMatrix::<C64>::identity(3, 3);
        let squared = deviation.adjoint() * &deviation;
        let mut v = DVector::from_vec(vec![C64::new(1.0, 0.3), C64::new(-0.2, 0.5), C64::new(0.7, -0.1)]);
        for _ in 0..500 {
            v = &squared * &v;
            v /= C64::new(v.norm(), 0.0);
        }
        let norm = (deviation * &v).norm();
        assert_relative_eq!(norm, m.identity_defect(), max_relative = 1e-6);
    }

    #[test]
    fn probability_examples() {
        let qubit = structure(&[0.0, 1.0]);
        let m = build_povm(&qubit, 0.0, 1).unwrap();
        let ground = DensityMatrix::diagonal(&[1.0, 0.0]).unwrap();
        assert_eq!(energy_probabilities(&ground).as_slice(), &[1.0, 0.0]);
        assert_eq!(
            energy_probabilities(&DensityMatrix::maximally_mixed(2)).as_slice(),
            &[0.5, 0.5]
        );
        let x = DensityMatrix::bloch_qubit(0.75, 0.0, 0.0).unwrap();
        assert_eq!(energy_probabilities(&x).as_slice(), &[0.5, 0.5]);

        let plus = DensityMatrix::bloch_qubit(1.0, 0.0, 0.0).unwrap();
        let q = complement_probabilities(&m, &plus).unwrap();
        assert_relative_eq!(q[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(q[1], 0.0, epsilon = 1e-15);

        let three = structure(&[0.0, 1.0, 1.5]);
        for s in [3, 4, 6, 10] {
            let m = build_povm(&three, 0.25, s).unwrap();
            let q = complement_probabilities(&m, &DensityMatrix::maximally_mixed(3)).unwrap();
            for &qm in q.iter() {
                assert_relative_eq!(qm, 1.0 / (s + 1) as f64, epsilon = 1e-14);
            }
            for n in 0..3 {
                let mut pops = [0.0; 3];
                pops[n] = 1.0;
                let q = complement_probabilities(&m, &DensityMatrix::diagonal(&pops).unwrap()).unwrap();
                for &qm in q.iter() {
                    assert_relative_eq!(qm, 1.0 / (s + 1) as f64, epsilon = 1e-14);
                }
            }
        }
        assert!(matches!(
            complement_probabilities(&m, &DensityMatrix::maximally_mixed(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn probability_vector_validation() {
        assert_eq!(ProbabilityVector::new(vec![0.5, 0.5 + 1e-13, -1e-13]).unwrap()[2], 0.0);
        assert!(matches!(
            ProbabilityVector::new(vec![1.1, -0.1]),
            Err(Error::NegativeProbability { .. })
        ));
        assert!(matches!(
            ProbabilityVector::new(vec![0.5, 0.4]),
            Err(Error::NotNormalized { .. })
        ));
        assert!(ProbabilityVector::new(vec![]).is_err());
    }

    proptest! {
        #[test]
        fn shift_covariance(tau in -20.0f64..20.0, delta in -5.0f64..5.0) {
            let three = structure(&[0.0, 1.0, 1.5]);
            let shifted = tau_ket(&three, tau + delta);
            let evolved = DVector::from_iterator(3, tau_ket(&three, tau).iter().zip(three.levels()).map(|(z, &e)| z * cis(-e * delta)));
            prop_assert!(close(&shifted, &evolved) < 1e-12);
        }

        #[test]
        fn flat_overlaps_and_conservation(seed in any::<u64>(), extra in 0usize..40, tau0 in -3.0f64..3.0) {
            let three = structure(&[0.0, 1.0, 1.5]);
            let s = min_valid_s(&three) + extra;
            prop_assume!(validate_s(&three, s));
            let m = build_povm(&three, tau0, s).unwrap();
            for ket in m.kets() {
                for z in ket.iter() {
                    prop_assert!((z.norm() - 1.0 / ((s + 1) as f64).sqrt()).abs() < 1e-12);
                }
            }
            let rho = DensityMatrix::random_state(3, 1 + (seed % 3) as usize, seed).unwrap();
            let q = complement_probabilities(&m, &rho).unwrap();
            prop_assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            for &qm in q.iter() {
                prop_assert!(qm <= 3.0 / (s + 1) as f64 + 1e-12);
            }
        }

        #[test]
        fn one_step_evolution_permutes_outcomes(seed in any::<u64>(), s in 3usize..20) {
            let three = structure(&[0.0, 1.0, 1.5]);
            prop_assume!(validate_s(&three, s));
            let m = build_povm(&three, 0.0, s).unwrap();
            let rho = DensityMatrix::random_state(3, 2, seed).unwrap();
            let q = complement_probabilities(&m, &rho).unwrap();
            let later = rho.evolve(&three, three.period() / (s + 1) as f64).unwrap();
            let q_later = complement_probabilities(&m, &later).unwrap();
            for k in 0..=s {
                prop_assert!((q_later[(k + 1) % (s + 1)] - q[k]).abs() < 1e-10);
            }
        }
    }
}
