//! Generalized entropies of discrete distributions, in nats.
//!
//! Orders are plain `f64`; `f64::INFINITY` is the min-entropy order. Orders
//! within [`SHANNON_WINDOW`] of 1 use the Shannon formulas. Zero
//! probabilities are left out of every power sum (`0^α = 0`, `0 ln 0 = 0`).
//!
//! Power sums are evaluated as `Σ p·expm1((α−1) ln p)`, i.e. `Σ p^α − Σ p`,
//! which stays accurate as α approaches 1.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Half-width of the window around α = 1 routed to the Shannon branch.
pub const SHANNON_WINDOW: f64 = 1e-8;

pub(crate) fn is_shannon(alpha: f64) -> bool {
    libm::fabs(alpha - 1.0) < SHANNON_WINDOW
}

/// `Σ p_i^α − 1` over the support.
fn power_sum_excess(p: &[f64], alpha: f64) -> f64 {
    p.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| x * libm::expm1((alpha - 1.0) * libm::log(x)))
        .sum()
}

/// `ln Σ p_i^α` over the support: the excess form near α = 1, otherwise
/// factored around the largest entry so that large orders do not underflow.
fn log_power_sum(p: &[f64], alpha: f64) -> f64 {
    if libm::fabs(alpha - 1.0) < 0.5 {
        return libm::log1p(power_sum_excess(p, alpha));
    }
    let top = p.iter().copied().fold(0.0, f64::max);
    let ln_top = libm::log(top);
    let rest: f64 = p
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| libm::exp(alpha * (libm::log(x) - ln_top)))
        .sum();
    alpha * ln_top + libm::log(rest)
}

/// `H_1(p) = −Σ p_i ln p_i`.
pub fn shannon(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * libm::log(x)).sum::<f64>()
}

/// `R_∞(p) = −ln max p_i`.
pub fn min_entropy(p: &[f64]) -> f64 {
    -libm::log(p.iter().copied().fold(0.0, f64::max))
}

/// Rényi α-entropy `ln(Σ p_i^α)/(1 − α)` for `α ∈ (0, ∞]`.
pub fn renyi(p: &[f64], alpha: f64) -> f64 {
    debug_assert!(alpha > 0.0);
    if alpha == f64::INFINITY {
        min_entropy(p)
    } else if is_shannon(alpha) {
        shannon(p)
    } else {
        log_power_sum(p, alpha) / (1.0 - alpha)
    }
}

/// Tsallis α-entropy `(Σ p_i^α − 1)/(1 − α)`; Shannon at α = 1 and 0 in
/// the limit α → ∞.
pub fn tsallis(p: &[f64], alpha: f64) -> f64 {
    debug_assert!(alpha > 0.0);
    if alpha == f64::INFINITY {
        0.0
    } else if is_shannon(alpha) {
        shannon(p)
    } else {
        power_sum_excess(p, alpha) / (1.0 - alpha)
    }
}

/// `ln_α(x) = (x^{1−α} − 1)/(1 − α)`, with `ln_1 = ln`.
pub fn alpha_log(x: f64, alpha: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::NonPositiveArgument(x));
    }
    if !(alpha > 0.0) {
        return Err(Error::OrderOutOfRange(alpha));
    }
    let ln_x = libm::log(x);
    Ok(if alpha == f64::INFINITY {
        if x >= 1.0 {
            0.0
        } else {
            f64::NEG_INFINITY
        }
    } else if is_shannon(alpha) {
        ln_x
    } else {
        libm::expm1((1.0 - alpha) * ln_x) / (1.0 - alpha)
    })
}

/// `‖p‖_β = (Σ p_i^β)^{1/β}`; the maximum at β = ∞.
pub fn pnorm(p: &[f64], beta: f64) -> f64 {
    debug_assert!(beta > 0.0);
    if beta == f64::INFINITY {
        return p.iter().copied().fold(0.0, f64::max);
    }
    libm::exp(log_power_sum(p, beta) / beta)
}

/// Distribution seen through a detector of efficiency η: every outcome is
/// scaled by η and a no-click outcome carries `1 − η`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedDistribution {
    detected: Vec<f64>,
    no_click: f64,
    efficiency: f64,
}

impl ExtendedDistribution {
    pub fn detected(&self) -> &[f64] {
        &self.detected
    }

    pub fn no_click(&self) -> f64 {
        self.no_click
    }

    pub fn efficiency(&self) -> f64 {
        self.efficiency
    }

    /// Detected outcomes followed by the no-click entry.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut all = self.detected.clone();
        all.push(self.no_click);
        all
    }
}

/// `p_i^(η) = η p_i`, `p_∅ = 1 − η`.
pub fn distort(p: &[f64], eta: f64) -> Result<ExtendedDistribution> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::EtaOutOfRange(eta));
    }
    Ok(ExtendedDistribution {
        detected: p.iter().map(|&x| eta * x).collect(),
        no_click: 1.0 - eta,
        efficiency: eta,
    })
}

/// Binary Tsallis entropy `−η^α ln_α η − (1−η)^α ln_α(1−η)`.
pub fn binary_tsallis(eta: f64, alpha: f64) -> f64 {
    let term = |x: f64| -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let power = if is_shannon(alpha) { x } else { libm::pow(x, alpha) };
        // x ∈ (0, 1] and α > 0, so alpha_log cannot fail here
        -power * alpha_log(x, alpha).unwrap_or(0.0)
    };
    term(eta) + term(1.0 - eta)
}
