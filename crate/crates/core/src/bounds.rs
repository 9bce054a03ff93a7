//! Both sides of each discrete uncertainty relation between the energy
//! measurement `E` and the complement POVM `T`.
//!
//! Every check produces a [`BoundReport`] whose `slack` is oriented so that
//! `slack ≥ −tolerance` means the relation holds, for lower and upper
//! bounds alike.

use alloc::vec::Vec;
use core::f64::consts::SQRT_2;
use core::fmt;
use core::str::FromStr;

use crate::entropy::{alpha_log, binary_tsallis, distort, is_shannon, min_entropy, renyi, shannon, tsallis};
use crate::error::{Error, Result};
use crate::povm::{complement_probabilities, energy_probabilities, ComplementMeasurement, ProbabilityVector};
use crate::states::DensityMatrix;

/// Default pass threshold: a relation holds iff `slack ≥ −HOLD_TOLERANCE`.
pub const HOLD_TOLERANCE: f64 = 1e-9;

/// Probabilities at or below this value are treated as zero in `g`.
pub const ZERO_PROBABILITY: f64 = 1e-12;

/// Default sweep grid of entropic orders.
pub const DEFAULT_ALPHAS: [f64; 9] = [0.5, 0.6, 0.75, 1.0, 1.5, 2.0, 3.0, 5.0, f64::INFINITY];

macro_rules! relations {
    ($($variant:ident => $tag:literal, $upper:literal;)*) => {
        /// Identifier of a certified relation.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum RelationId {
            $($variant,)*
        }

        impl RelationId {
            pub const ALL: &'static [RelationId] = &[$(RelationId::$variant,)*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(RelationId::$variant => $tag,)*
                }
            }

            /// True for relations of the form `lhs ≤ rhs`.
            pub fn is_upper_bound(self) -> bool {
                match self {
                    $(RelationId::$variant => $upper,)*
                }
            }
        }

        impl FromStr for RelationId {
            type Err = ();

            fn from_str(s: &str) -> core::result::Result<Self, ()> {
                match s {
                    $($tag => Ok(RelationId::$variant),)*
                    _ => Err(()),
                }
            }
        }
    };
}

relations! {
    Rengr => "RENGR", false;
    Tsagr => "TSAGR", false;
    Renfr => "RENFR", false;
    Tsafr => "TSAFR", false;
    Srenfr => "SRENFR", false;
    Vgadf => "VGADF", false;
    Etaun => "ETAUN", false;
    Muheta => "MUHETA", false;
    MubH => "MUB_H", false;
    MubR => "MUB_R", false;
    MubMin => "MUB_MIN", false;
    MubMinPure => "MUB_MIN_PURE", false;
    LpSum => "LP_SUM", true;
    LpMin => "LP_MIN", false;
    Thmth => "THMTH", true;
    Ctren => "CTREN", false;
    Crbin => "CRBIN", false;
    Ctbin => "CTBIN", false;
    TwipqEnergy => "TWIPQ_E", true;
    TwipqComplement => "TWIPQ_T", true;
    TwipEnergy => "TWIP_E", true;
    TwipDensity => "TWIP_W", true;
    DwipEnergy => "DWIP_E", true;
    DwipBins => "DWIP_Q", true;
    Ubwb => "UBWB", true;
}

impl fmt::Display for RelationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Parameters a report was evaluated at.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Parameters {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub mu: Option<f64>,
    /// `min{η_E, η_T}` for the inefficiency relations.
    pub eta: Option<f64>,
    /// `s` for relations tied to a grid of `s + 1` outcomes.
    pub s: Option<usize>,
    pub d: usize,
    pub purity: f64,
}

/// One evaluated inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub relation: RelationId,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub tolerance: f64,
    pub holds: bool,
    pub params: Parameters,
}

impl BoundReport {
    /// Report for `lhs ≥ rhs` or, for upper-bound relations, `lhs ≤ rhs`.
    pub fn new(relation: RelationId, lhs: f64, rhs: f64, params: Parameters) -> Self {
        let slack = if relation.is_upper_bound() {
            rhs - lhs
        } else {
            lhs - rhs
        };
        let mut report = Self {
            relation,
            lhs,
            rhs,
            slack,
            tolerance: HOLD_TOLERANCE,
            holds: false,
            params,
        };
        report.holds = report.slack >= -report.tolerance;
        report
    }

    /// Report for an identity `lhs = rhs`; the slack is `−|lhs − rhs|`.
    pub fn identity(relation: RelationId, lhs: f64, rhs: f64, params: Parameters) -> Self {
        let mut report = Self::new(relation, lhs, rhs, params);
        report.slack = -libm::fabs(lhs - rhs);
        report.holds = report.slack >= -report.tolerance;
        report
    }

    /// Replaces the pass threshold (e.g. to fold in quadrature error).
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self.holds = self.slack >= -tolerance;
        self
    }
}

/// `β = α/(2α − 1)`, the order with `1/α + 1/β = 2`; `β = 1/2` at `α = ∞`.
pub fn conjugate_beta(alpha: f64) -> Result<f64> {
    if alpha == f64::INFINITY {
        Ok(0.5)
    } else if alpha > 0.5 {
        Ok(alpha / (2.0 * alpha - 1.0))
    } else {
        Err(Error::OrderOutOfRange(alpha))
    }
}

/// `max{α, β}`.
fn mu(alpha: f64, beta: f64) -> f64 {
    alpha.max(beta)
}

/// State-dependent overlap
/// `g = max |⟨ε_n|θ_m⟩⟨θ_m|ρ|ε_n⟩| / (p_n q_m)^{1/2}`
/// over pairs with `p_n, q_m >` [`ZERO_PROBABILITY`].
pub fn overlap_g(measurement: &ComplementMeasurement, state: &DensityMatrix) -> Result<f64> {
    let p = energy_probabilities(state);
    let q = complement_probabilities(measurement, state)?;
    overlap_g_with(measurement, state, &p, &q)
}

fn overlap_g_with(measurement: &ComplementMeasurement, state: &DensityMatrix, p: &[f64], q: &[f64]) -> Result<f64> {
    let rho = state.matrix();
    let mut best: Option<f64> = None;
    for (ket, &qm) in measurement.kets().iter().zip(q) {
        if qm <= ZERO_PROBABILITY {
            continue;
        }
        let row = ket.adjoint() * rho;
        for (n, &pn) in p.iter().enumerate() {
            if pn <= ZERO_PROBABILITY {
                continue;
            }
            let ratio = (ket[n] * row[(0, n)]).norm_sqr();
            let ratio = libm::sqrt(ratio) / libm::sqrt(pn * qm);
            best = Some(best.map_or(ratio, |b| b.max(ratio)));
        }
    }
    best.ok_or(Error::NoAdmissiblePair)
}

/// `f = max_{n,m} |⟨ε_n|θ_m⟩|`, equal to `(s+1)^{-1/2}`.
pub fn overlap_f(measurement: &ComplementMeasurement) -> f64 {
    let max_sq = measurement
        .kets()
        .iter()
        .flat_map(|ket| ket.iter().map(|z| z.norm_sqr()))
        .fold(0.0_f64, f64::max);
    libm::sqrt(max_sq)
}

/// `Γ = ln((s+1)/(d+1))`.
pub fn gamma_floor(measurement: &ComplementMeasurement) -> f64 {
    libm::log(measurement.outcomes() as f64 / measurement.dimension() as f64)
}

/// `Υ = min{(s+1)^{-1/2}, (d+1)/(s+1)}`.
pub fn upsilon(dimension: usize, outcomes: usize) -> f64 {
    let outcomes = outcomes as f64;
    (1.0 / libm::sqrt(outcomes)).min(dimension as f64 / outcomes)
}

/// Distributions and scalars shared by every relation for one
/// (measurement, state) pair.
#[derive(Debug, Clone)]
pub struct Evaluation<'a> {
    measurement: &'a ComplementMeasurement,
    p: ProbabilityVector,
    q: ProbabilityVector,
    purity: f64,
    g: f64,
}

impl<'a> Evaluation<'a> {
    pub fn new(measurement: &'a ComplementMeasurement, state: &DensityMatrix) -> Result<Self> {
        let p = energy_probabilities(state);
        let q = complement_probabilities(measurement, state)?;
        let g = overlap_g_with(measurement, state, &p, &q)?;
        Ok(Self {
            measurement,
            p,
            q,
            purity: state.purity(),
            g,
        })
    }

    pub fn energy(&self) -> &ProbabilityVector {
        &self.p
    }

    pub fn complement(&self) -> &ProbabilityVector {
        &self.q
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn purity(&self) -> f64 {
        self.purity
    }

    fn s(&self) -> usize {
        self.measurement.s()
    }

    /// `s + 1` as a float.
    fn outcomes(&self) -> f64 {
        self.measurement.outcomes() as f64
    }

    fn params(&self) -> Parameters {
        Parameters {
            s: Some(self.s()),
            d: self.measurement.dimension() - 1,
            purity: self.purity,
            ..Parameters::default()
        }
    }

    fn conjugate_params(&self, alpha: f64) -> Result<(f64, Parameters)> {
        let beta = conjugate_beta(alpha)?;
        let params = Parameters {
            alpha: Some(alpha),
            beta: Some(beta),
            mu: Some(mu(alpha, beta)),
            ..self.params()
        };
        Ok((beta, params))
    }

    /// `R_α(E) + R_β(T) ≥ −2 ln g` and `H_α(E) + H_β(T) ≥ ln_μ(g^{−2})`.
    pub fn maassen_uffink(&self, alpha: f64) -> Result<[BoundReport; 2]> {
        let (beta, params) = self.conjugate_params(alpha)?;
        let renyi_lhs = renyi(&self.p, alpha) + renyi(&self.q, beta);
        let tsallis_lhs = tsallis(&self.p, alpha) + tsallis(&self.q, beta);
        let tsallis_rhs = alpha_log(1.0 / (self.g * self.g), mu(alpha, beta))?;
        Ok([
            BoundReport::new(RelationId::Rengr, renyi_lhs, -2.0 * libm::log(self.g), params),
            BoundReport::new(RelationId::Tsagr, tsallis_lhs, tsallis_rhs, params),
        ])
    }

    /// `R_α(E) + R_β(T) ≥ ln(s+1)` and `H_α(E) + H_β(T) ≥ ln_μ(s+1)`.
    pub fn state_independent(&self, alpha: f64) -> Result<[BoundReport; 2]> {
        let (beta, params) = self.conjugate_params(alpha)?;
        let renyi_lhs = renyi(&self.p, alpha) + renyi(&self.q, beta);
        let tsallis_lhs = tsallis(&self.p, alpha) + tsallis(&self.q, beta);
        Ok([
            BoundReport::new(RelationId::Renfr, renyi_lhs, libm::log(self.outcomes()), params),
            BoundReport::new(
                RelationId::Tsafr,
                tsallis_lhs,
                alpha_log(self.outcomes(), mu(alpha, beta))?,
                params,
            ),
        ])
    }

    /// `R_α(E) + R_β(T) − Γ ≥ ln(d+1)`.
    pub fn shifted(&self, alpha: f64) -> Result<BoundReport> {
        let (beta, params) = self.conjugate_params(alpha)?;
        let lhs = renyi(&self.p, alpha) + renyi(&self.q, beta) - gamma_floor(self.measurement);
        let rhs = libm::log(self.measurement.dimension() as f64);
        Ok(BoundReport::new(RelationId::Srenfr, lhs, rhs, params))
    }

    /// `R_β(T) ≥ Γ`, with β conjugate to `alpha`.
    pub fn gamma_floor(&self, alpha: f64) -> Result<BoundReport> {
        let (beta, params) = self.conjugate_params(alpha)?;
        Ok(BoundReport::new(
            RelationId::Vgadf,
            renyi(&self.q, beta),
            gamma_floor(self.measurement),
            params,
        ))
    }

    /// Relations for lossy detectors with efficiencies `η_E, η_T ∈ [1/2, 1]`.
    ///
    /// At α = 1 the Shannon relation `H_1(E^(η_E)) + H_1(T^(η_T)) ≥
    /// −2η ln g + 2h_1(η)` is reported; for `α ∈ (0, 2]` the purity-based
    /// Tsallis relation as well. Here `η = min{η_E, η_T}` on the right-hand
    /// side, exactly as the relations are stated; with unequal efficiencies
    /// they can fail.
    pub fn inefficiency(&self, eta_energy: f64, eta_complement: f64, alpha: f64) -> Result<Vec<BoundReport>> {
        for eta in [eta_energy, eta_complement] {
            if !(0.5..=1.0).contains(&eta) {
                return Err(Error::EtaOutOfRange(eta));
            }
        }
        if !(alpha > 0.0) {
            return Err(Error::OrderOutOfRange(alpha));
        }
        let eta = eta_energy.min(eta_complement);
        let params = Parameters {
            alpha: Some(alpha),
            beta: Some(alpha),
            eta: Some(eta),
            ..self.params()
        };
        let p_lossy = distort(&self.p, eta_energy)?.to_vec();
        let q_lossy = distort(&self.q, eta_complement)?.to_vec();
        let mut reports = Vec::new();
        if is_shannon(alpha) {
            let lhs = shannon(&p_lossy) + shannon(&q_lossy);
            let rhs = -2.0 * eta * libm::log(self.g) + 2.0 * binary_tsallis(eta, 1.0);
            reports.push(BoundReport::new(RelationId::Etaun, lhs, rhs, params));
        }
        if alpha <= 2.0 {
            let lhs = tsallis(&p_lossy, alpha) + tsallis(&q_lossy, alpha);
            let eta_power = if is_shannon(alpha) { eta } else { libm::pow(eta, alpha) };
            let rhs = 2.0 * eta_power * alpha_log(self.collision_ratio(), alpha)? + 2.0 * binary_tsallis(eta, alpha);
            reports.push(BoundReport::new(RelationId::Muheta, lhs, rhs, params));
        } else {
            return Err(Error::NotApplicable {
                relation: RelationId::Muheta,
                alpha,
            });
        }
        Ok(reports)
    }

    /// `(2s+2)/((s+1) tr ρ² + 1)`.
    fn collision_ratio(&self) -> f64 {
        2.0 * self.outcomes() / (self.outcomes() * self.purity + 1.0)
    }

    /// `√2 (s+1) / (√(s(s+1) tr ρ² − s) + √2)`.
    fn min_entropy_ratio(&self) -> f64 {
        let s = self.s() as f64;
        let radicand = (s * self.outcomes() * self.purity - s).max(0.0);
        SQRT_2 * self.outcomes() / (libm::sqrt(radicand) + SQRT_2)
    }

    /// Purity-based relations for the mutually unbiased extension.
    ///
    /// Emits the Tsallis relation for `α ≤ 2`, the Rényi relation for
    /// `α ≥ 2`, and both min-entropy relations always.
    pub fn mub(&self, alpha: f64) -> Result<Vec<BoundReport>> {
        if !(alpha > 0.0) {
            return Err(Error::NotApplicable {
                relation: RelationId::MubH,
                alpha,
            });
        }
        let params = Parameters {
            alpha: Some(alpha),
            beta: Some(alpha),
            ..self.params()
        };
        let min_params = Parameters {
            alpha: Some(f64::INFINITY),
            beta: Some(f64::INFINITY),
            ..self.params()
        };
        let mut reports = Vec::with_capacity(4);
        if alpha <= 2.0 {
            reports.push(self.mub_tsallis(alpha, params)?);
        }
        if alpha >= 2.0 {
            reports.push(self.mub_renyi(alpha, params));
        }
        let min_lhs = min_entropy(&self.p) + min_entropy(&self.q);
        reports.push(BoundReport::new(
            RelationId::MubMin,
            min_lhs,
            2.0 * libm::log(self.min_entropy_ratio()),
            min_params,
        ));
        let s = self.s() as f64;
        let pure_rhs = 2.0 * libm::log(SQRT_2 * self.outcomes() / (s + SQRT_2));
        reports.push(BoundReport::new(RelationId::MubMinPure, min_lhs, pure_rhs, min_params));
        Ok(reports)
    }

    fn mub_tsallis(&self, alpha: f64, params: Parameters) -> Result<BoundReport> {
        let lhs = tsallis(&self.p, alpha) + tsallis(&self.q, alpha);
        let rhs = 2.0 * alpha_log(self.collision_ratio(), alpha)?;
        Ok(BoundReport::new(RelationId::MubH, lhs, rhs, params))
    }

    fn mub_renyi(&self, alpha: f64, params: Parameters) -> BoundReport {
        let lhs = renyi(&self.p, alpha) + renyi(&self.q, alpha);
        let min_term = libm::log(self.min_entropy_ratio());
        let rhs = if alpha == f64::INFINITY {
            2.0 * min_term
        } else {
            2.0 / (alpha - 1.0) * libm::log(self.collision_ratio()) + (2.0 * alpha - 4.0) / (alpha - 1.0) * min_term
        };
        BoundReport::new(RelationId::MubR, lhs, rhs, params)
    }

    /// `max p_n + max q_m ≤ 1 + Υ` and `R_∞(E) + R_∞(T) ≥ 2 ln(2/(1+Υ))`.
    pub fn landau_pollak(&self) -> [BoundReport; 2] {
        let ups = upsilon(self.measurement.dimension(), self.measurement.outcomes());
        let params = Parameters {
            alpha: Some(f64::INFINITY),
            beta: Some(f64::INFINITY),
            ..self.params()
        };
        [
            BoundReport::new(RelationId::LpSum, self.p.max() + self.q.max(), 1.0 + ups, params),
            BoundReport::new(
                RelationId::LpMin,
                min_entropy(&self.p) + min_entropy(&self.q),
                2.0 * libm::log(2.0 / (1.0 + ups)),
                params,
            ),
        ]
    }

    /// Every discrete relation applicable at `alpha`, plus the inefficiency
    /// relations for each `η` (applied to both detectors) when `α ≤ 2`.
    pub fn all(&self, alpha: f64, etas: &[f64]) -> Result<Vec<BoundReport>> {
        let mut reports = Vec::new();
        if alpha > 0.5 {
            reports.extend(self.maassen_uffink(alpha)?);
            reports.extend(self.state_independent(alpha)?);
            reports.push(self.shifted(alpha)?);
            reports.push(self.gamma_floor(alpha)?);
        }
        if alpha <= 2.0 {
            for &eta in etas {
                reports.extend(self.inefficiency(eta, eta, alpha)?);
            }
        }
        reports.extend(self.mub(alpha)?);
        reports.extend(self.landau_pollak());
        Ok(reports)
    }
}

/// `(RENGR, TSAGR)` for `α > 1/2` and its conjugate β.
pub fn check_maassen_uffink(
    measurement: &ComplementMeasurement,
    state: &DensityMatrix,
    alpha: f64,
) -> Result<[BoundReport; 2]> {
    Evaluation::new(measurement, state)?.maassen_uffink(alpha)
}

/// `(RENFR, TSAFR)`.
pub fn check_state_independent(
    measurement: &ComplementMeasurement,
    state: &DensityMatrix,
    alpha: f64,
) -> Result<[BoundReport; 2]> {
    Evaluation::new(measurement, state)?.state_independent(alpha)
}

/// `SRENFR`.
pub fn check_shifted(measurement: &ComplementMeasurement, state: &DensityMatrix, alpha: f64) -> Result<BoundReport> {
    Evaluation::new(measurement, state)?.shifted(alpha)
}

/// `VGADF`.
pub fn check_gamma_floor(
    measurement: &ComplementMeasurement,
    state: &DensityMatrix,
    alpha: f64,
) -> Result<BoundReport> {
    Evaluation::new(measurement, state)?.gamma_floor(alpha)
}

/// `ETAUN` (α = 1) and `MUHETA` (α ≤ 2).
pub fn check_inefficiency(
    measurement: &ComplementMeasurement,
    state: &DensityMatrix,
    eta_energy: f64,
    eta_complement: f64,
    alpha: f64,
) -> Result<Vec<BoundReport>> {
    Evaluation::new(measurement, state)?.inefficiency(eta_energy, eta_complement, alpha)
}

/// `MUB_H`, `MUB_R`, `MUB_MIN`, `MUB_MIN_PURE` as applicable.
pub fn check_mub_bounds(
    measurement: &ComplementMeasurement,
    state: &DensityMatrix,
    alpha: f64,
) -> Result<Vec<BoundReport>> {
    Evaluation::new(measurement, state)?.mub(alpha)
}

/// `(LP_SUM, LP_MIN)`.
pub fn landau_pollak(measurement: &ComplementMeasurement, state: &DensityMatrix) -> Result<[BoundReport; 2]> {
    Ok(Evaluation::new(measurement, state)?.landau_pollak())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::povm::build_povm;
    use crate::spectrum::{min_valid_s, reduce_to_integers, validate_s, EnergySpectrum, RationalStructure};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, LN_2};
    use std::vec::Vec;

    fn structure(levels: &[f64]) -> RationalStructure {
        reduce_to_integers(&EnergySpectrum::new(levels.to_vec()).unwrap(), 1_000_000, 1e-9).unwrap()
    }

    fn qubit_plus() -> (ComplementMeasurement, DensityMatrix) {
        let m = build_povm(&structure(&[0.0, 1.0]), 0.0, 1).unwrap();
        (m, DensityMatrix::bloch_qubit(1.0, 0.0, 0.0).unwrap())
    }

    /// g by explicit loops over (n, m) with sums written out.
    fn brute_g(m: &ComplementMeasurement, rho: &DensityMatrix) -> f64 {
        let dim = m.dimension();
        let mut best: f64 = 0.0;
        for ket in m.kets() {
            let q: f64 = (0..dim)
                .flat_map(|a| (0..dim).map(move |b| (a, b)))
                .map(|(a, b)| (ket[a].conj() * rho.matrix()[(a, b)] * ket[b]).re)
                .sum();
            for n in 0..dim {
                let p = rho.matrix()[(n, n)].re;
                if p <= 1e-12 || q <= 1e-12 {
                    continue;
                }
                let inner = (0..dim)
                    .map(|k| ket[k].conj() * rho.matrix()[(k, n)])
                    .sum::<crate::C64>();
                best = best.max((ket[n] * inner).norm() / (p * q).sqrt());
            }
        }
        best
    }

    #[test]
    fn conjugate_beta_examples() {
        assert_eq!(conjugate_beta(1.0).unwrap(), 1.0);
        assert_relative_eq!(conjugate_beta(2.0).unwrap(), 2.0 / 3.0);
        assert_eq!(conjugate_beta(f64::INFINITY).unwrap(), 0.5);
        assert!(conjugate_beta(0.5).is_err());
        assert!(conjugate_beta(0.2).is_err());
        for alpha in [0.6, 0.9, 1.3, 7.0] {
            let beta = conjugate_beta(alpha).unwrap();
            assert_relative_eq!(1.0 / alpha + 1.0 / beta, 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn overlap_examples() {
        let (m, plus) = qubit_plus();
        assert_relative_eq!(overlap_g(&m, &plus).unwrap(), FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_relative_eq!(brute_g(&m, &plus), FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_relative_eq!(overlap_f(&m), FRAC_1_SQRT_2, epsilon = 1e-15);

        // completely mixed state: |⟨ε|θ⟩|²/(d+1) over ((d+1)(s+1))^{-1/2}
        let three = structure(&[0.0, 1.0, 1.5]);
        for s in [3usize, 5, 9] {
            let m = build_povm(&three, 0.0, s).unwrap();
            let g = overlap_g(&m, &DensityMatrix::maximally_mixed(3)).unwrap();
            assert_relative_eq!(g, 1.0 / ((s + 1) as f64 * 3.0).sqrt(), epsilon = 1e-14);
            assert_relative_eq!(overlap_f(&m), 1.0 / ((s + 1) as f64).sqrt(), epsilon = 1e-14);
        }
        let m = build_povm(&structure(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]), 0.0, 9).unwrap();
        assert_relative_eq!(overlap_f(&m), 10f64.powf(-0.5), epsilon = 1e-14);
    }

    #[test]
    fn qubit_plus_is_tight() {
        let (m, plus) = qubit_plus();
        let [rengr, tsagr] = check_maassen_uffink(&m, &plus, 1.0).unwrap();
        assert_relative_eq!(rengr.lhs, LN_2, epsilon = 1e-15);
        assert_relative_eq!(rengr.rhs, LN_2, epsilon = 1e-15);
        assert!(rengr.slack.abs() < 1e-12 && rengr.holds);
        // μ = 1: Tsallis and Rényi forms coincide
        assert_relative_eq!(tsagr.lhs, rengr.lhs, epsilon = 1e-15);
        assert_relative_eq!(tsagr.rhs, rengr.rhs, epsilon = 1e-15);
        let [renfr, _] = check_state_independent(&m, &plus, 1.0).unwrap();
        assert!(renfr.slack.abs() < 1e-12);
    }

    #[test]
    fn mixed_state_saturates_state_dependent_bound() {
        let three = structure(&[0.0, 1.0, 1.5]);
        for s in [3usize, 4, 7] {
            let m = build_povm(&three, 0.0, s).unwrap();
            for alpha in DEFAULT_ALPHAS {
                if alpha <= 0.5 {
                    continue;
                }
                let [rengr, _] = check_maassen_uffink(&m, &DensityMatrix::maximally_mixed(3), alpha).unwrap();
                assert!(rengr.holds && rengr.slack.abs() < 1e-12, "{rengr:?}");
            }
        }
    }

    #[test]
    fn gamma_floor_examples() {
        let m = build_povm(&structure(&[0.0, 1.0]), 0.0, 3).unwrap();
        assert_relative_eq!(gamma_floor(&m), LN_2, epsilon = 1e-15);
        let square = build_povm(&structure(&[0.0, 1.0, 2.0]), 0.0, 2).unwrap();
        assert_eq!(gamma_floor(&square), 0.0);
        let rho = DensityMatrix::random_state(3, 2, 4).unwrap();
        let shifted = check_shifted(&square, &rho, 1.5).unwrap();
        let [renfr, _] = check_state_independent(&square, &rho, 1.5).unwrap();
        assert_relative_eq!(shifted.slack, renfr.slack, epsilon = 1e-14);
    }

    #[test]
    fn gamma_floor_on_random_qubits() {
        let m = build_povm(&structure(&[0.0, 1.0]), 0.0, 7).unwrap();
        for seed in 0..200 {
            let rho = DensityMatrix::random_state(2, 1 + (seed % 2) as usize, seed).unwrap();
            for alpha in [0.6, 1.0, 3.0, f64::INFINITY] {
                let report = check_gamma_floor(&m, &rho, alpha).unwrap();
                assert_relative_eq!(report.rhs, 4f64.ln(), epsilon = 1e-15);
                assert!(report.holds, "{report:?}");
            }
        }
    }

    #[test]
    fn inefficiency_examples() {
        let m = build_povm(&structure(&[0.0, 1.0, 1.5]), 0.0, 5).unwrap();
        let rho = DensityMatrix::random_state(3, 1, 9).unwrap();
        let eval = Evaluation::new(&m, &rho).unwrap();
        let lossless = eval.inefficiency(1.0, 1.0, 1.0).unwrap();
        let [rengr, _] = eval.maassen_uffink(1.0).unwrap();
        assert_eq!(lossless[0].relation, RelationId::Etaun);
        assert_relative_eq!(lossless[0].lhs, rengr.lhs, epsilon = 1e-14);
        assert_relative_eq!(lossless[0].rhs, rengr.rhs, epsilon = 1e-14);
        let mub = eval.mub(1.0).unwrap();
        assert_relative_eq!(lossless[1].rhs, mub[0].rhs, epsilon = 1e-14);

        let half = eval.inefficiency(0.5, 0.5, 1.0).unwrap();
        assert_relative_eq!(half[0].rhs, 0.5 * rengr.rhs + 2.0 * LN_2, epsilon = 1e-14);

        assert_eq!(eval.inefficiency(0.4, 1.0, 1.0).unwrap_err(), Error::EtaOutOfRange(0.4));
        assert!(matches!(
            eval.inefficiency(0.9, 0.9, 3.0),
            Err(Error::NotApplicable {
                relation: RelationId::Muheta,
                ..
            })
        ));
    }

    #[test]
    fn unequal_efficiencies_can_violate_the_shannon_form() {
        // energy eigenstate of a qubit: H(E) = 0, H(T) = ln 2, g = 2^{-1/2};
        // LHS = 0 + ½ ln 2 + h(½) = 1.5 ln 2 while RHS = ½ ln 2 + 2 ln 2
        let m = build_povm(&structure(&[0.0, 1.0]), 0.0, 1).unwrap();
        let ground = DensityMatrix::diagonal(&[1.0, 0.0]).unwrap();
        let reports = check_inefficiency(&m, &ground, 1.0, 0.5, 1.0).unwrap();
        assert_relative_eq!(reports[0].lhs, 1.5 * LN_2, epsilon = 1e-14);
        assert_relative_eq!(reports[0].rhs, 2.5 * LN_2, epsilon = 1e-14);
        assert!(!reports[0].holds);
    }

    #[test]
    fn mub_examples() {
        let (m, plus) = qubit_plus();
        let reports = check_mub_bounds(&m, &plus, 1.0).unwrap();
        assert_eq!(reports[0].relation, RelationId::MubH);
        assert_relative_eq!(reports[0].rhs, 2.0 * (4.0f64 / 3.0).ln(), epsilon = 1e-15);
        let relations: Vec<_> = reports.iter().map(|r| r.relation).collect();
        assert_eq!(
            relations,
            [RelationId::MubH, RelationId::MubMin, RelationId::MubMinPure]
        );
        let at_two: Vec<_> = check_mub_bounds(&m, &plus, 2.0)
            .unwrap()
            .iter()
            .map(|r| r.relation)
            .collect();
        assert_eq!(
            at_two,
            [
                RelationId::MubH,
                RelationId::MubR,
                RelationId::MubMin,
                RelationId::MubMinPure
            ]
        );
        assert!(check_mub_bounds(&m, &plus, 0.0).is_err());

        // pure states: the purity-dependent min-entropy bound equals the pure one
        for seed in 0..20 {
            let rho = DensityMatrix::random_state(2, 1, seed).unwrap();
            let r = check_mub_bounds(&build_povm(&structure(&[0.0, 1.0]), 0.0, 6).unwrap(), &rho, 5.0).unwrap();
            assert_eq!(r[0].relation, RelationId::MubR);
            assert_relative_eq!(r[1].rhs, r[2].rhs, epsilon = 1e-12);
        }
    }

    #[test]
    fn mub_renyi_at_infinity_is_min_entropy_bound() {
        let m = build_povm(&structure(&[0.0, 1.0, 1.5]), 0.0, 11).unwrap();
        let rho = DensityMatrix::random_state(3, 2, 1).unwrap();
        let r = check_mub_bounds(&m, &rho, f64::INFINITY).unwrap();
        assert_eq!(r[0].relation, RelationId::MubR);
        assert_relative_eq!(r[0].rhs, r[1].rhs, epsilon = 1e-14);
        let huge = check_mub_bounds(&m, &rho, 1e9).unwrap();
        assert_relative_eq!(huge[0].rhs, r[0].rhs, epsilon = 1e-6);
    }

    #[test]
    fn mixed_qubit_prefers_purity_bound_for_large_s() {
        let m = build_povm(&structure(&[0.0, 1.0]), 0.0, 9_999).unwrap();
        let eval = Evaluation::new(&m, &DensityMatrix::maximally_mixed(2)).unwrap();
        let mub = eval.mub(f64::INFINITY).unwrap();
        assert_eq!(mub[1].relation, RelationId::MubMin);
        assert!((mub[1].rhs - 4f64.ln()).abs() < 1e-3);
        let [_, lp_min] = eval.landau_pollak();
        assert!(mub[1].rhs > lp_min.rhs);
    }

    #[test]
    fn landau_pollak_examples() {
        assert_relative_eq!(upsilon(2, 9), 2.0 / 9.0);
        assert_relative_eq!(upsilon(2, 2), FRAC_1_SQRT_2);
        let m = build_povm(&structure(&[0.0, 1.0]), 0.0, 999_999).unwrap();
        let [_, lp_min] = landau_pollak(&m, &DensityMatrix::maximally_mixed(2)).unwrap();
        assert!((lp_min.rhs - 4f64.ln()).abs() < 5e-3);
        let (m, plus) = qubit_plus();
        let [sum, min] = landau_pollak(&m, &plus).unwrap();
        assert_relative_eq!(sum.lhs, 1.5, epsilon = 1e-15);
        assert_relative_eq!(sum.rhs, 1.0 + FRAC_1_SQRT_2);
        assert_relative_eq!(sum.slack, sum.rhs - sum.lhs);
        assert!(sum.holds && min.holds);
    }

    #[test]
    fn report_orientation() {
        let lower = BoundReport::new(RelationId::Renfr, 1.0, 2.0, Parameters::default());
        assert_eq!(lower.slack, -1.0);
        assert!(!lower.holds);
        let upper = BoundReport::new(RelationId::LpSum, 1.0, 2.0, Parameters::default());
        assert_eq!(upper.slack, 1.0);
        assert!(upper.holds);
        let edge = BoundReport::new(RelationId::Renfr, 1.0, 1.0 + 0.5e-9, Parameters::default());
        assert!(edge.holds);
        assert!(!edge.with_tolerance(1e-10).holds);
        for &id in RelationId::ALL {
            assert_eq!(id.as_str().parse::<RelationId>(), Ok(id));
        }
    }

    fn any_case() -> impl Strategy<Value = (Vec<f64>, usize, u64, usize)> {
        let presets = prop_oneof![
            Just(vec![0.0, 1.0]),
            Just(vec![0.0, 1.0, 1.5]),
            Just(vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]),
        ];
        (presets, 0usize..30, any::<u64>(), 1usize..=6)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn every_relation_holds((levels, extra, seed, rank) in any_case(), alpha_index in 0usize..9, eta_index in 0usize..3) {
            let st = structure(&levels);
            let s = min_valid_s(&st) + extra;
            prop_assume!(validate_s(&st, s));
            let m = build_povm(&st, 0.0, s).unwrap();
            let rho = DensityMatrix::random_state(levels.len(), rank.min(levels.len()), seed).unwrap();
            let eta = [0.5, 0.75, 1.0][eta_index];
            let eval = Evaluation::new(&m, &rho).unwrap();
            prop_assert!(eval.g() <= overlap_f(&m) + 1e-12);
            prop_assert!((eval.g() - brute_g(&m, &rho)).abs() < 1e-12);
            for report in eval.all(DEFAULT_ALPHAS[alpha_index], &[eta]).unwrap() {
                prop_assert!(report.holds, "{:?}", report);
            }
            // state-dependent bound is never weaker
            let [rengr, _] = eval.maassen_uffink(1.0).unwrap();
            let [renfr, _] = eval.state_independent(1.0).unwrap();
            prop_assert!(rengr.rhs >= renfr.rhs - 1e-12);
        }
    }
}
