//! Density matrices in the energy eigenbasis.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::spectrum::RationalStructure;
use crate::{cis, C64};

/// Entrywise Hermiticity, trace and positivity tolerance.
pub const STATE_TOLERANCE: f64 = 1e-12;

/// Hermitian, positive semidefinite, unit-trace matrix expressed in the
/// energy basis `{|ε_n⟩}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates `matrix` and symmetrizes it to `(ρ + ρ†)/2`.
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::InvalidState("matrix must be square and non-empty"));
        }
        if matrix.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidState("entries must be finite"));
        }
        let adjoint = matrix.adjoint();
        let asymmetry = matrix
            .iter()
            .zip(adjoint.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .fold(0.0_f64, f64::max);
        if libm::sqrt(asymmetry) > STATE_TOLERANCE {
            return Err(Error::InvalidState("matrix is not Hermitian"));
        }
        let matrix = (matrix + adjoint).scale(0.5);
        if libm::fabs(matrix.trace().re - 1.0) > STATE_TOLERANCE {
            return Err(Error::InvalidState("trace is not 1"));
        }
        let state = Self { matrix };
        if state.eigenvalues().iter().any(|&l| l < -STATE_TOLERANCE) {
            return Err(Error::InvalidState("matrix has a negative eigenvalue"));
        }
        Ok(state)
    }

    pub(crate) fn from_trusted(matrix: DMatrix<C64>) -> Self {
        Self { matrix }
    }

    /// `|ψ⟩⟨ψ|` for the normalized `coefficients` `c_n = ⟨ε_n|ψ⟩`.
    pub fn pure_state(coefficients: &[C64]) -> Result<Self> {
        let psi = DVector::from_column_slice(coefficients);
        let norm = psi.norm_squared();
        if coefficients.is_empty() || norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        if !norm.is_finite() {
            return Err(Error::InvalidState("entries must be finite"));
        }
        let psi = psi.unscale(libm::sqrt(norm));
        Ok(Self::from_trusted(&psi * psi.adjoint()))
    }

    /// Qubit state `(I + r·σ)/2`.
    pub fn bloch_qubit(rx: f64, ry: f64, rz: f64) -> Result<Self> {
        let length = libm::sqrt(rx * rx + ry * ry + rz * rz);
        if !(length <= 1.0 + STATE_TOLERANCE) {
            return Err(Error::OutsideBall { length });
        }
        let matrix = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(0.5 * (1.0 + rz), 0.0),
                C64::new(0.5 * rx, -0.5 * ry),
                C64::new(0.5 * rx, 0.5 * ry),
                C64::new(0.5 * (1.0 - rz), 0.0),
            ],
        );
        Ok(Self::from_trusted(matrix))
    }

    /// `I/dimension`.
    pub fn maximally_mixed(dimension: usize) -> Self {
        let dimension = dimension.max(1);
        let scale = C64::new(1.0 / dimension as f64, 0.0);
        Self::from_trusted(DMatrix::from_diagonal_element(dimension, dimension, scale))
    }

    /// Diagonal state with the given populations.
    pub fn diagonal(populations: &[f64]) -> Result<Self> {
        let diagonal = DVector::from_iterator(populations.len(), populations.iter().map(|&p| C64::new(p, 0.0)));
        Self::new(DMatrix::from_diagonal(&diagonal))
    }

    /// `ρ = GG†/tr(GG†)` with `G` a `dimension × rank` matrix of standard
    /// complex Gaussians drawn from a ChaCha8 stream seeded by `seed`.
    pub fn random_state(dimension: usize, rank: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_with(dimension, rank, &mut rng)
    }

    /// As [`random_state`](Self::random_state) but drawing from `rng`.
    pub fn random_with<R: Rng + ?Sized>(dimension: usize, rank: usize, rng: &mut R) -> Result<Self> {
        if dimension == 0 || rank == 0 || rank > dimension {
            return Err(Error::InvalidState("rank must lie in 1..=dimension"));
        }
        let g = DMatrix::<C64>::from_fn(dimension, rank, |_, _| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let gram = &g * g.adjoint();
        let trace = gram.trace().re;
        Ok(Self::from_trusted(gram.unscale(trace)))
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    /// `tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        // tr(ρ²) = Σ |ρ_ij|² for Hermitian ρ
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut values: Vec<f64> = self.matrix.clone().symmetric_eigenvalues().iter().copied().collect();
        values.sort_by(f64::total_cmp);
        values
    }

    /// `e^{−iHt} ρ e^{iHt}` with `H = Σ ε_n |ε_n⟩⟨ε_n|`.
    pub fn evolve(&self, structure: &RationalStructure, t: f64) -> Result<Self> {
        let levels = structure.levels();
        if levels.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: levels.len(),
                found: self.dimension(),
            });
        }
        let matrix = DMatrix::from_fn(self.dimension(), self.dimension(), |n, k| {
            self.matrix[(n, k)] * cis(-(levels[n] - levels[k]) * t)
        });
        Ok(Self::from_trusted(matrix))
    }

    /// `⟨v|ρ|v⟩` (real part; the imaginary part vanishes for Hermitian ρ).
    pub fn expectation(&self, v: &DVector<C64>) -> f64 {
        (v.adjoint() * &self.matrix * v)[(0, 0)].re
    }
}
