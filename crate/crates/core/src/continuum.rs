//! Continuous time: the density `w_ρ(τ)`, its differential Rényi entropies,
//! time binning and the relations in which `T_c` sets the scale.
//!
//! `w_ρ(τ) = (d+1)⟨τ|ρ|τ⟩/T_c` over one period `[τ_0, τ_0 + T_c]`. Every
//! integral uses [`Simpson`] doubling, and each report's pass threshold is
//! widened by ten times the propagated quadrature error estimate.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};

use crate::bounds::{conjugate_beta, BoundReport, Parameters, RelationId, HOLD_TOLERANCE};
use crate::entropy::{alpha_log, is_shannon, pnorm, renyi, tsallis};
use crate::error::{Error, Result};
use crate::povm::{build_povm, complement_probabilities, energy_probabilities, ProbabilityVector, SUM_TOLERANCE};
use crate::quadrature::{Integral, Simpson, DEFAULT_NODES};
use crate::spectrum::RationalStructure;
use crate::states::DensityMatrix;
use crate::{cis, C64};

/// Multiplier applied to quadrature error estimates in pass thresholds.
pub const QUADRATURE_SAFETY: f64 = 10.0;

/// Relative tolerance on a partition covering exactly one period.
const COVER_TOLERANCE: f64 = 1e-9;

/// `w_ρ(τ)` for one state over one period.
#[derive(Debug, Clone)]
pub struct TimeDensity {
    structure: RationalStructure,
    state: DensityMatrix,
    tau0: f64,
    quadrature: Simpson,
}

impl TimeDensity {
    /// Density over `[tau0, tau0 + T_c]` with default quadrature: 4097 nodes,
    /// or `16 r_max + 1` if that is larger.
    pub fn new(structure: &RationalStructure, state: &DensityMatrix, tau0: f64) -> Result<Self> {
        if state.dimension() != structure.dimension() {
            return Err(Error::DimensionMismatch {
                expected: structure.dimension(),
                found: state.dimension(),
            });
        }
        let max_r = usize::try_from(structure.max_r()).unwrap_or(usize::MAX);
        let nodes = DEFAULT_NODES.max(max_r.saturating_mul(16).saturating_add(1));
        Ok(Self {
            structure: structure.clone(),
            state: state.clone(),
            tau0,
            quadrature: Simpson::with_nodes(nodes),
        })
    }

    pub fn with_quadrature(mut self, quadrature: Simpson) -> Self {
        self.quadrature = quadrature;
        self
    }

    pub fn structure(&self) -> &RationalStructure {
        &self.structure
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.state
    }

    pub fn tau0(&self) -> f64 {
        self.tau0
    }

    pub fn period(&self) -> f64 {
        self.structure.period()
    }

    pub fn quadrature(&self) -> &Simpson {
        &self.quadrature
    }

    /// `w_ρ(τ)`, clamped at 0 against rounding.
    pub fn evaluate(&self, tau: f64) -> f64 {
        density(&self.structure, &self.state, tau)
    }

    /// `∫ w` over one period.
    pub fn total(&self) -> Result<Integral> {
        let (a, b) = self.window();
        self.quadrature.integrate(|t| self.evaluate(t), a, b)
    }

    /// `ln ∫ w^β` over one period; the delta is a relative error estimate.
    pub fn log_power_integral(&self, beta: f64) -> Result<Integral> {
        let (a, b) = self.window();
        log_power_integral(&self.quadrature, |t| self.evaluate(t), a, b, beta)
    }

    /// `R_α(w)`; the delta is the propagated quadrature error.
    pub fn differential_renyi(&self, alpha: f64) -> Result<Integral> {
        if !(alpha > 0.0) || alpha == f64::INFINITY {
            return Err(Error::OrderOutOfRange(alpha));
        }
        if is_shannon(alpha) {
            let (a, b) = self.window();
            let integral = self.quadrature.integrate(|t| plogp(self.evaluate(t)), a, b)?;
            return Ok(Integral {
                value: -integral.value,
                ..integral
            });
        }
        let log_power = self.log_power_integral(alpha)?;
        Ok(Integral {
            value: log_power.value / (1.0 - alpha),
            delta: log_power.delta / libm::fabs(1.0 - alpha),
            intervals: log_power.intervals,
        })
    }

    /// `‖w‖_β = (∫ w^β dτ)^{1/β}`.
    pub fn norm(&self, beta: f64) -> Result<Integral> {
        Ok(norm_from_log(self.log_power_integral(beta)?, beta))
    }

    /// `‖U‖_β` of the phase density `U(θ) = w(τ) T_c/2π`, `θ = 2π(τ − τ_0)/T_c`,
    /// integrated in θ over `[0, 2π]`.
    pub fn phase_norm(&self, beta: f64) -> Result<Integral> {
        let scale = self.period() / TAU;
        let phase_density = |theta: f64| self.evaluate(self.tau0 + theta * scale) * scale;
        let log_power = log_power_integral(&self.quadrature, phase_density, 0.0, TAU, beta)?;
        Ok(norm_from_log(log_power, beta))
    }

    fn window(&self) -> (f64, f64) {
        (self.tau0, self.tau0 + self.period())
    }
}

fn plogp(w: f64) -> f64 {
    if w > 0.0 {
        w * libm::log(w)
    } else {
        0.0
    }
}

/// `ln ∫_a^b f^β` for a density `f` on `[a, b]`.
///
/// Near β = 1 the integrand is `f^β − f`, which keeps the small excess over
/// `∫ f = 1` accurate; otherwise `(f L)^β` with `L = b − a`, which keeps the
/// integrand of order one for any time unit.
fn log_power_integral(quadrature: &Simpson, f: impl Fn(f64) -> f64, a: f64, b: f64, beta: f64) -> Result<Integral> {
    if libm::fabs(beta - 1.0) < 0.5 {
        let excess = quadrature.integrate(
            |t| {
                let w = f(t);
                if w > 0.0 {
                    w * libm::expm1((beta - 1.0) * libm::log(w))
                } else {
                    0.0
                }
            },
            a,
            b,
        )?;
        return Ok(Integral {
            value: libm::log1p(excess.value),
            delta: excess.delta / (1.0 + excess.value),
            intervals: excess.intervals,
        });
    }
    let length = b - a;
    let scaled = quadrature.integrate(|t| libm::pow(f(t) * length, beta), a, b)?;
    if !(scaled.value > 0.0) {
        return Err(Error::QuadratureUnconverged {
            intervals: scaled.intervals,
            delta: scaled.delta,
        });
    }
    Ok(Integral {
        value: libm::log(scaled.value) - beta * libm::log(length),
        delta: scaled.delta / scaled.value,
        intervals: scaled.intervals,
    })
}

fn norm_from_log(log_power: Integral, beta: f64) -> Integral {
    let value = libm::exp(log_power.value / beta);
    Integral {
        value,
        delta: value * log_power.delta / beta,
        intervals: log_power.intervals,
    }
}

/// `w_ρ(τ) = (d+1)⟨τ|ρ|τ⟩/T_c`.
pub fn density(structure: &RationalStructure, state: &DensityMatrix, tau: f64) -> f64 {
    let phases = DVector::from_iterator(structure.dimension(), structure.levels().iter().map(|&e| cis(-e * tau)));
    let value = (phases.adjoint() * state.matrix() * &phases)[(0, 0)].re;
    value.max(0.0) / structure.period()
}

/// `R_α(w)` starting from `nodes` quadrature nodes.
pub fn differential_renyi(density: &TimeDensity, alpha: f64, nodes: usize) -> Result<Integral> {
    let quadrature = density.quadrature().starting_at(nodes.saturating_sub(1));
    density.clone().with_quadrature(quadrature).differential_renyi(alpha)
}

/// Ordered marks `t_0 < t_1 < … < t_J` delimiting `J` time bins.
#[derive(Debug, Clone, PartialEq)]
pub struct BinPartition {
    marks: Vec<f64>,
}

impl BinPartition {
    pub fn new(marks: Vec<f64>) -> Result<Self> {
        if marks.len() < 2 {
            return Err(Error::InvalidPartition("at least two marks are needed"));
        }
        if marks.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidPartition("marks must be finite"));
        }
        if marks.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidPartition("marks must be strictly increasing"));
        }
        Ok(Self { marks })
    }

    /// `bins` equal bins over `[tau0, tau0 + period]`.
    pub fn uniform(tau0: f64, period: f64, bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::InvalidPartition("at least one bin is needed"));
        }
        let mut marks: Vec<f64> = (0..bins).map(|j| tau0 + period * j as f64 / bins as f64).collect();
        marks.push(tau0 + period);
        Self::new(marks)
    }

    /// Bins over `[tau0, tau0 + period]` split at the interior `cuts`
    /// (offsets from `tau0`, any order).
    pub fn from_cuts(tau0: f64, period: f64, cuts: &[f64]) -> Result<Self> {
        let mut offsets: Vec<f64> = cuts.to_vec();
        offsets.sort_by(f64::total_cmp);
        if offsets.iter().any(|&c| !(c > 0.0 && c < period)) {
            return Err(Error::InvalidPartition("cuts must lie strictly inside the period"));
        }
        let mut marks = Vec::with_capacity(offsets.len() + 2);
        marks.push(tau0);
        marks.extend(offsets.iter().map(|c| tau0 + c));
        marks.push(tau0 + period);
        Self::new(marks)
    }

    pub fn marks(&self) -> &[f64] {
        &self.marks
    }

    /// Number of bins `J`.
    pub fn bins(&self) -> usize {
        self.marks.len() - 1
    }

    /// `δτ`, the widest bin.
    pub fn max_width(&self) -> f64 {
        self.marks.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    fn check_covers(&self, density: &TimeDensity) -> Result<()> {
        let (a, b) = density.window();
        let slack = COVER_TOLERANCE * density.period();
        let first = self.marks[0];
        let last = self.marks[self.marks.len() - 1];
        if libm::fabs(first - a) > slack || libm::fabs(last - b) > slack {
            return Err(Error::InvalidPartition("partition must cover one period from τ_0"));
        }
        Ok(())
    }
}

/// `∫ w` over each bin.
pub fn bin_integrals(density: &TimeDensity, partition: &BinPartition) -> Result<Vec<Integral>> {
    partition.check_covers(density)?;
    let base = density.quadrature();
    partition
        .marks
        .windows(2)
        .map(|w| {
            let share = (w[1] - w[0]) / density.period();
            let start = libm::ceil(share * base.intervals as f64) as usize;
            base.starting_at(start.max(4))
                .integrate(|t| density.evaluate(t), w[0], w[1])
        })
        .collect()
}

/// Binned distribution `q_j = ∫_{t_j}^{t_{j+1}} w`.
pub fn bin_probabilities(density: &TimeDensity, partition: &BinPartition) -> Result<ProbabilityVector> {
    Ok(binned(density, partition)?.0)
}

fn binned(density: &TimeDensity, partition: &BinPartition) -> Result<(ProbabilityVector, Vec<f64>)> {
    let integrals = bin_integrals(density, partition)?;
    let deltas: Vec<f64> = integrals.iter().map(|i| i.delta).collect();
    let spread: f64 = deltas.iter().sum();
    let q = ProbabilityVector::with_tolerance(
        integrals.iter().map(|i| i.value).collect(),
        SUM_TOLERANCE + QUADRATURE_SAFETY * spread,
    )?;
    Ok((q, deltas))
}

/// First-order error of `f(q)` given `|∂f/∂q_j| = gradient(q_j)` and bin deltas.
fn propagate(q: &[f64], deltas: &[f64], gradient: impl Fn(f64) -> f64) -> f64 {
    q.iter()
        .zip(deltas)
        .filter(|(_, &d)| d > 0.0)
        .map(|(&qj, &d)| libm::fabs(gradient(qj.max(d))) * d)
        .sum()
}

fn renyi_error(q: &[f64], deltas: &[f64], beta: f64) -> f64 {
    if is_shannon(beta) {
        return propagate(q, deltas, |x| libm::log(x) + 1.0);
    }
    let power_sum: f64 = q.iter().filter(|&&x| x > 0.0).map(|&x| libm::pow(x, beta)).sum();
    propagate(q, deltas, |x| {
        beta * libm::pow(x, beta - 1.0) / ((1.0 - beta) * power_sum)
    })
}

fn tsallis_error(q: &[f64], deltas: &[f64], beta: f64) -> f64 {
    if is_shannon(beta) {
        return propagate(q, deltas, |x| libm::log(x) + 1.0);
    }
    propagate(q, deltas, |x| (beta * libm::pow(x, beta - 1.0) - 1.0) / (1.0 - beta))
}

fn norm_error(q: &[f64], deltas: &[f64], beta: f64) -> f64 {
    let norm = pnorm(q, beta);
    propagate(q, deltas, |x| libm::pow(norm, 1.0 - beta) * libm::pow(x, beta - 1.0))
}

fn widened(report: BoundReport, error: f64) -> BoundReport {
    report.with_tolerance(HOLD_TOLERANCE + QUADRATURE_SAFETY * error)
}

fn pair_params(alpha: f64, beta: f64, density: &TimeDensity, s: Option<usize>) -> Parameters {
    Parameters {
        alpha: Some(alpha),
        beta: Some(beta),
        mu: Some(alpha.max(beta)),
        eta: None,
        s,
        d: density.structure().d(),
        purity: density.state().purity(),
    }
}

/// `R_α(E) + R_β(w) ≥ ln T_c` for `α > 1/2` and its conjugate β.
pub fn check_continuous_relation(density: &TimeDensity, alpha: f64) -> Result<BoundReport> {
    let beta = conjugate_beta(alpha)?;
    let p = energy_probabilities(density.state());
    let differential = density.differential_renyi(beta)?;
    let report = BoundReport::new(
        RelationId::Ctren,
        renyi(&p, alpha) + differential.value,
        libm::log(density.period()),
        pair_params(alpha, beta, density, None),
    );
    Ok(widened(report, differential.delta))
}

/// `R_α(E) + R_β(q^(δ)) ≥ ln(T_c/δτ)` and
/// `H_α(E) + H_β(q^(δ)) ≥ ln_μ(T_c/δτ)`.
pub fn check_binned_relations(density: &TimeDensity, partition: &BinPartition, alpha: f64) -> Result<[BoundReport; 2]> {
    let beta = conjugate_beta(alpha)?;
    let p = energy_probabilities(density.state());
    let (q, deltas) = binned(density, partition)?;
    let ratio = density.period() / partition.max_width();
    let params = pair_params(alpha, beta, density, None);
    let renyi_report = BoundReport::new(
        RelationId::Crbin,
        renyi(&p, alpha) + renyi(&q, beta),
        libm::log(ratio),
        params,
    );
    let tsallis_report = BoundReport::new(
        RelationId::Ctbin,
        tsallis(&p, alpha) + tsallis(&q, beta),
        alpha_log(ratio, alpha.max(beta))?,
        params,
    );
    Ok([
        widened(renyi_report, renyi_error(&q, &deltas, beta)),
        widened(tsallis_report, tsallis_error(&q, &deltas, beta)),
    ])
}

/// The norm inequalities for `1 ≤ α < ∞` and conjugate `β ∈ (1/2, 1]`:
/// on the grid of `s + 1` outcomes, against `w`, and against the binned
/// distribution, each in both directions; plus the identity relating the
/// phase and time norms of the density.
pub fn check_norm_inequalities(
    density: &TimeDensity,
    partition: &BinPartition,
    alpha: f64,
    s: usize,
) -> Result<Vec<BoundReport>> {
    if !(alpha >= 1.0) || alpha == f64::INFINITY {
        return Err(Error::NotApplicable {
            relation: RelationId::TwipqEnergy,
            alpha,
        });
    }
    let beta = conjugate_beta(alpha)?;
    let exponent = (1.0 - beta) / beta;
    let params = pair_params(alpha, beta, density, Some(s));
    let period = density.period();

    let p = energy_probabilities(density.state());
    let measurement = build_povm(density.structure(), density.tau0(), s)?;
    let q = complement_probabilities(&measurement, density.state())?;
    let grid_factor = libm::pow((s + 1) as f64, -exponent);

    let w_alpha = density.norm(alpha)?;
    let w_beta = density.norm(beta)?;
    let time_factor = libm::pow(period, -exponent);

    let (bins, deltas) = binned(density, partition)?;
    let bin_factor = libm::pow(partition.max_width() / period, exponent);

    let u_beta = density.phase_norm(beta)?;
    let phase_factor = libm::pow(TAU / period, exponent);

    let norm = |v: &[f64], order| pnorm(v, order);
    Ok(alloc::vec![
        BoundReport::new(
            RelationId::TwipqEnergy,
            norm(&p, alpha),
            grid_factor * norm(&q, beta),
            params
        ),
        BoundReport::new(
            RelationId::TwipqComplement,
            norm(&q, alpha),
            grid_factor * norm(&p, beta),
            params
        ),
        widened(
            BoundReport::new(
                RelationId::TwipEnergy,
                norm(&p, alpha),
                time_factor * w_beta.value,
                params
            ),
            time_factor * w_beta.delta,
        ),
        widened(
            BoundReport::new(
                RelationId::TwipDensity,
                w_alpha.value,
                time_factor * norm(&p, beta),
                params
            ),
            w_alpha.delta,
        ),
        widened(
            BoundReport::new(
                RelationId::DwipEnergy,
                norm(&p, alpha),
                bin_factor * norm(&bins, beta),
                params
            ),
            bin_factor * norm_error(&bins, &deltas, beta),
        ),
        widened(
            BoundReport::new(
                RelationId::DwipBins,
                norm(&bins, alpha),
                bin_factor * norm(&p, beta),
                params
            ),
            norm_error(&bins, &deltas, alpha),
        ),
        widened(
            BoundReport::identity(RelationId::Ubwb, u_beta.value, phase_factor * w_beta.value, params),
            u_beta.delta + phase_factor * w_beta.delta,
        ),
    ])
}

/// Exact `∫_a^b w` from the Fourier form of `w`.
pub fn analytic_bin_integral(structure: &RationalStructure, state: &DensityMatrix, a: f64, b: f64) -> f64 {
    let levels = structure.levels();
    let rho: &DMatrix<C64> = state.matrix();
    let mut total = C64::new(0.0, 0.0);
    for (n, &en) in levels.iter().enumerate() {
        for (k, &ek) in levels.iter().enumerate() {
            // ⟨τ|ε_n⟩ρ_nk⟨ε_k|τ⟩ carries e^{i(ε_n − ε_k)τ}
            let omega = en - ek;
            let factor = if n == k {
                C64::new(b - a, 0.0)
            } else {
                (cis(omega * b) - cis(omega * a)) / C64::new(0.0, omega)
            };
            total += rho[(n, k)] * factor;
        }
    }
    total.re / structure.period()
}
