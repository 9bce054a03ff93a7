//! Integer structure of a discrete spectrum.
//!
//! Levels `0 = ε_0 < ε_1 < … < ε_d` are reduced to integers `r_n` and a
//! characteristic time `T_c` with `ε_n = 2π r_n / T_c`. Each ratio
//! `ε_n / ε_1` is replaced by the simplest fraction `B_n / A_n` within the
//! requested relative tolerance; `r_1` is the lcm of the denominators.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use crate::error::{Error, Result};

/// Denominator cap used when none is given.
pub const DEFAULT_MAX_DENOMINATOR: u64 = 1_000_000;

/// Relative tolerance of the rational approximation used when none is given.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Ordered, non-degenerate energy levels with `ε_0 = 0` (units with `ħ = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct EnergySpectrum {
    levels: Vec<f64>,
}

impl EnergySpectrum {
    pub fn new(levels: Vec<f64>) -> Result<Self> {
        if levels.len() < 2 {
            return Err(Error::InvalidSpectrum("need at least two levels"));
        }
        if levels[0] != 0.0 {
            return Err(Error::InvalidSpectrum("lowest level must be exactly 0"));
        }
        if levels.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidSpectrum("levels must be finite"));
        }
        if levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSpectrum(
                "levels must be strictly increasing (no degeneracy)",
            ));
        }
        Ok(Self { levels })
    }

    /// Two-level system `{0, 1}`.
    pub fn qubit() -> Self {
        Self {
            levels: alloc::vec![0.0, 1.0],
        }
    }

    /// `{0, 1, …, d}`.
    pub fn equidistant(d: usize) -> Result<Self> {
        Self::new((0..=d).map(|n| n as f64).collect())
    }

    /// Shifts the spectrum so that its lowest level is zero, then validates.
    pub fn shifted_to_ground(mut levels: Vec<f64>) -> Result<Self> {
        if let Some(&ground) = levels.first() {
            for e in &mut levels {
                *e -= ground;
            }
        }
        Self::new(levels)
    }

    /// All levels multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::InvalidSpectrum("scale factor must be positive"));
        }
        Self::new(self.levels.iter().map(|e| e * factor).collect())
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// Hilbert space dimension `d + 1`.
    pub fn dimension(&self) -> usize {
        self.levels.len()
    }
}

/// Output of [`reduce_to_integers`].
#[derive(Debug, Clone, PartialEq)]
pub struct RationalStructure {
    spectrum: EnergySpectrum,
    numerators: Vec<u64>,
    denominators: Vec<u64>,
    r: Vec<u64>,
    period: f64,
    residual: f64,
    max_denominator: u64,
    tolerance: f64,
}

impl RationalStructure {
    pub fn spectrum(&self) -> &EnergySpectrum {
        &self.spectrum
    }

    /// The measured levels `ε_n`.
    pub fn levels(&self) -> &[f64] {
        self.spectrum.levels()
    }

    /// Levels rebuilt from the integers, `2π r_n / T_c`.
    pub fn reconstructed_levels(&self) -> Vec<f64> {
        self.r.iter().map(|&r| TAU * r as f64 / self.period).collect()
    }

    pub fn r(&self) -> &[u64] {
        &self.r
    }

    /// `B_n` for each level (`B_0 = 0`, `B_1 = 1`).
    pub fn numerators(&self) -> &[u64] {
        &self.numerators
    }

    /// `A_n` for each level (`A_0 = A_1 = 1`).
    pub fn denominators(&self) -> &[u64] {
        &self.denominators
    }

    /// Characteristic time `T_c = 2π r_1 / ε_1`.
    pub fn period(&self) -> f64 {
        self.period
    }

    /// Largest relative error `|ε_n − 2π r_n/T_c| / ε_n` over `n ≥ 1`.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn max_denominator(&self) -> u64 {
        self.max_denominator
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn dimension(&self) -> usize {
        self.r.len()
    }

    /// Index of the top level, `d`.
    pub fn d(&self) -> usize {
        self.r.len() - 1
    }

    pub fn max_r(&self) -> u64 {
        // r is strictly increasing
        *self.r.last().unwrap()
    }
}

/// Reduces the spectrum to integers `r_n` and the period `T_c`.
///
/// Each ratio `ε_n/ε_1` is approximated by the fraction with the smallest
/// denominator whose relative error is within `tolerance`; denominators above
/// `max_denominator` or any integer overflow yield
/// [`Error::ApproximationFailure`].
pub fn reduce_to_integers(
    spectrum: &EnergySpectrum,
    max_denominator: u64,
    tolerance: f64,
) -> Result<RationalStructure> {
    if max_denominator == 0 {
        return Err(Error::ApproximationFailure {
            level: 0,
            reason: "denominator cap must be at least 1",
        });
    }
    if !(tolerance > 0.0) {
        return Err(Error::ApproximationFailure {
            level: 0,
            reason: "tolerance must be positive",
        });
    }
    let levels = spectrum.levels();
    let e1 = levels[1];
    let mut numerators = alloc::vec![0, 1];
    let mut denominators = alloc::vec![1, 1];
    let mut residual = 0.0_f64;
    for (n, &e) in levels.iter().enumerate().skip(2) {
        let ratio = e / e1;
        let (b, a) = simplest_rational(ratio, tolerance, max_denominator).ok_or(Error::ApproximationFailure {
            level: n,
            reason: "no fraction within tolerance under the denominator cap",
        })?;
        residual = residual.max(libm::fabs(ratio - b as f64 / a as f64) / ratio);
        numerators.push(b);
        denominators.push(a);
    }

    let overflow = |level| Error::ApproximationFailure {
        level,
        reason: "integer overflow",
    };
    let mut r1: u64 = 1;
    for (n, &a) in denominators.iter().enumerate().skip(2) {
        r1 = lcm(r1, a).ok_or(overflow(n))?;
    }
    let mut r = alloc::vec![0, r1];
    for n in 2..levels.len() {
        let rn = (r1 / denominators[n]).checked_mul(numerators[n]).ok_or(overflow(n))?;
        r.push(rn);
    }

    Ok(RationalStructure {
        spectrum: spectrum.clone(),
        numerators,
        denominators,
        r,
        period: TAU * r1 as f64 / e1,
        residual,
        max_denominator,
        tolerance,
    })
}

/// Fraction `p/q` with the smallest `q ≤ max_denominator` such that
/// `|x − p/q| ≤ tolerance·x`, for `x > 0`.
///
/// The candidates are the convergents and intermediate fractions of the
/// continued fraction of `x`, visited in order of increasing denominator.
pub fn simplest_rational(x: f64, tolerance: f64, max_denominator: u64) -> Option<(u64, u64)> {
    if !(x > 0.0 && x.is_finite()) {
        return None;
    }
    let accept = |p: u64, q: u64| libm::fabs(x - p as f64 / q as f64) <= tolerance * x;

    // (p_{k-2}, q_{k-2}) and (p_{k-1}, q_{k-1})
    let (mut p2, mut q2) = (0u64, 1u64);
    let (mut p1, mut q1) = (1u64, 0u64);
    let mut y = x;
    for _ in 0..96 {
        let a_float = libm::floor(y);
        if a_float >= u64::MAX as f64 {
            return None;
        }
        let a = a_float as u64;
        let at = |j: u64| -> Option<(u64, u64)> {
            let p = p2.checked_add(j.checked_mul(p1)?)?;
            let q = q2.checked_add(j.checked_mul(q1)?)?;
            Some((p, q))
        };
        // Largest admissible j in this block under the denominator cap.
        let j_max = if q1 == 0 {
            a
        } else if q2 > max_denominator {
            0
        } else {
            a.min((max_denominator - q2) / q1)
        };
        if j_max >= 1 {
            let (p, q) = at(j_max)?;
            if q >= 1 && accept(p, q) {
                // Error shrinks monotonically with j inside a block.
                let (mut lo, mut hi) = (1u64, j_max);
                while lo < hi {
                    let mid = lo + (hi - lo) / 2;
                    let (p, q) = at(mid)?;
                    if q >= 1 && accept(p, q) {
                        hi = mid;
                    } else {
                        lo = mid + 1;
                    }
                }
                return at(lo);
            }
        }
        if j_max < a {
            return None;
        }
        let (p, q) = at(a)?;
        (p2, q2, p1, q1) = (p1, q1, p, q);
        let frac = y - a_float;
        if frac <= 0.0 {
            return None;
        }
        y = 1.0 / frac;
    }
    None
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn lcm(a: u64, b: u64) -> Option<u64> {
    (a / gcd(a, b)).checked_mul(b)
}

/// Smallest `s` with `s + 1 > max r_n` and `s ≥ d`.
pub fn min_valid_s(structure: &RationalStructure) -> usize {
    (structure.max_r() as usize).max(structure.d())
}

/// True iff `s ≥ d` and no non-zero difference `r_ℓ − r_n` is a multiple of
/// `s + 1`, the condition under which the complement POVM resolves the
/// identity.
pub fn validate_s(structure: &RationalStructure, s: usize) -> bool {
    if s < structure.d() {
        return false;
    }
    let modulus = s as u64 + 1;
    let r = structure.r();
    r.iter()
        .enumerate()
        .all(|(i, &ri)| r[i + 1..].iter().all(|&rj| (rj - ri) % modulus != 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn reduce(levels: &[f64]) -> RationalStructure {
        let spectrum = EnergySpectrum::new(levels.to_vec()).unwrap();
        reduce_to_integers(&spectrum, DEFAULT_MAX_DENOMINATOR, DEFAULT_TOLERANCE).unwrap()
    }

    #[test]
    fn qubit_structure() {
        let s = reduce(&[0.0, 1.0]);
        assert_eq!(s.r(), &[0, 1]);
        assert_relative_eq!(s.period(), 2.0 * PI);
        assert_eq!(s.residual(), 0.0);
    }

    #[test]
    fn three_level_structure() {
        let s = reduce(&[0.0, 1.0, 1.5]);
        assert_eq!(s.r(), &[0, 2, 3]);
        assert_eq!(s.numerators(), &[0, 1, 3]);
        assert_eq!(s.denominators(), &[1, 1, 2]);
        assert_relative_eq!(s.period(), 4.0 * PI);
    }

    #[test]
    fn two_level_any_gap() {
        for e1 in [0.1, 2.5, 17.0] {
            let s = reduce(&[0.0, e1]);
            assert_eq!(s.r(), &[0, 1]);
            assert_relative_eq!(s.period(), 2.0 * PI / e1);
        }
    }

    #[test]
    fn lcm_over_several_denominators() {
        // ratios 4/3 and 7/4 → r_1 = 12
        let s = reduce(&[0.0, 0.3, 0.4, 0.525]);
        assert_eq!(s.r(), &[0, 12, 16, 21]);
    }

    #[test]
    fn decimal_input_snaps_to_simple_fraction() {
        let s = reduce(&[0.0, 1.0, 1.3333333333]);
        assert_eq!(s.r(), &[0, 3, 4]);
        assert!(s.residual() > 0.0 && s.residual() <= DEFAULT_TOLERANCE);
    }

    #[test]
    fn irrational_ratio_fails_under_small_cap() {
        let spectrum = EnergySpectrum::new(vec![0.0, 1.0, core::f64::consts::SQRT_2]).unwrap();
        let err = reduce_to_integers(&spectrum, 100, 1e-9).unwrap_err();
        assert!(matches!(err, Error::ApproximationFailure { level: 2, .. }));
        // with a looser tolerance 99/70 is accepted
        let s = reduce_to_integers(&spectrum, 100, 1e-4).unwrap();
        assert_eq!(s.r(), &[0, 70, 99]);
        assert!(s.residual() <= 1e-4);
    }

    #[test]
    fn overflow_is_approximation_failure() {
        // denominators are distinct large primes; their lcm overflows u64
        let primes = [999_983u64, 999_979, 999_961, 999_959];
        let mut levels = vec![0.0, 1.0];
        for p in primes {
            levels.push(1.0 + 1.0 / p as f64);
        }
        let spectrum = EnergySpectrum::new(levels).unwrap();
        let err = reduce_to_integers(&spectrum, 1_000_000, 1e-14).unwrap_err();
        assert!(matches!(
            err,
            Error::ApproximationFailure {
                reason: "integer overflow",
                ..
            }
        ));
    }

    #[test]
    fn invalid_spectra_rejected() {
        assert!(EnergySpectrum::new(vec![0.0]).is_err());
        assert!(EnergySpectrum::new(vec![0.1, 1.0]).is_err());
        assert!(EnergySpectrum::new(vec![0.0, 1.0, 1.0]).is_err());
        assert!(EnergySpectrum::new(vec![0.0, 2.0, 1.0]).is_err());
        assert!(EnergySpectrum::new(vec![0.0, f64::NAN]).is_err());
        let shifted = EnergySpectrum::shifted_to_ground(vec![-0.5, 0.5]).unwrap();
        assert_eq!(shifted.levels(), &[0.0, 1.0]);
    }

    #[test]
    fn min_valid_s_examples() {
        assert_eq!(min_valid_s(&reduce(&[0.0, 1.0])), 1);
        assert_eq!(min_valid_s(&reduce(&[0.0, 1.0, 1.5])), 3);
        assert_eq!(min_valid_s(&reduce(&[0.0, 1.0, 2.0, 3.0, 4.0])), 4);
    }

    #[test]
    fn validate_s_examples() {
        let three = reduce(&[0.0, 1.0, 1.5]);
        assert!(validate_s(&three, 3));
        assert!(!validate_s(&three, 2));
        assert!(validate_s(&reduce(&[0.0, 1.0]), 1));
        assert!(!validate_s(&three, 1));
        // s + 1 = 6: difference 3 − 0 is not a multiple, 2 − 0 neither
        assert!(validate_s(&three, 5));
    }

    #[test]
    fn simplest_rational_prefers_small_denominators() {
        assert_eq!(simplest_rational(1.5, 1e-12, 10), Some((3, 2)));
        assert_eq!(simplest_rational(PI, 1e-3, 1000), Some((22, 7)));
        assert_eq!(simplest_rational(PI, 1e-7, 1000), Some((355, 113)));
        assert_eq!(simplest_rational(PI, 1e-7, 100), None);
        assert_eq!(simplest_rational(7.0, 1e-12, 1), Some((7, 1)));
        // intermediate fraction: 0.4 ± 10% → 1/2 is outside, 1/3 is outside, 2/5 exact
        assert_eq!(simplest_rational(0.4, 0.1, 10), Some((2, 5)));
        assert_eq!(simplest_rational(0.4, 0.2, 10), Some((1, 3)));
    }

    /// Brute force over all denominators up to the cap.
    fn brute_simplest(x: f64, tol: f64, cap: u64) -> Option<(u64, u64)> {
        for q in 1..=cap {
            let centre = (x * q as f64).round() as u64;
            for p in centre.saturating_sub(1)..=centre + 1 {
                if (x - p as f64 / q as f64).abs() <= tol * x {
                    return Some((p, q));
                }
            }
        }
        None
    }

    proptest! {
        #[test]
        fn simplest_matches_brute_force(x in 0.05f64..20.0, tol_exp in 1.0f64..6.0, cap in 1u64..400) {
            let tol = 10f64.powf(-tol_exp);
            let fast = simplest_rational(x, tol, cap);
            let slow = brute_simplest(x, tol, cap);
            prop_assert_eq!(fast.map(|f| f.1), slow.map(|f| f.1));
        }

        #[test]
        fn reconstruction_within_residual(b in prop::collection::vec(1u64..50, 1..4), a in prop::collection::vec(1u64..12, 1..4), e1 in 0.1f64..10.0) {
            let mut ratios: Vec<f64> = b.iter().zip(&a).map(|(&b, &a)| 1.0 + b as f64 / a as f64).collect();
            ratios.sort_by(|x, y| x.partial_cmp(y).unwrap());
            ratios.dedup();
            let mut levels = vec![0.0, e1];
            levels.extend(ratios.iter().map(|r| r * e1));
            let s = reduce(&levels);
            let rebuilt = s.reconstructed_levels();
            for n in 1..levels.len() {
                prop_assert!((levels[n] - rebuilt[n]).abs() / levels[n] <= s.residual() + 1e-14);
            }
            prop_assert!(validate_s(&s, min_valid_s(&s)));
        }

        #[test]
        fn scale_covariance(lambda in 0.01f64..100.0) {
            let base = reduce(&[0.0, 1.0, 1.5, 2.25]);
            let spectrum = base.spectrum().scaled(lambda).unwrap();
            let scaled = reduce_to_integers(&spectrum, DEFAULT_MAX_DENOMINATOR, DEFAULT_TOLERANCE).unwrap();
            prop_assert_eq!(scaled.r(), base.r());
            prop_assert!((scaled.period() - base.period() / lambda).abs() <= 1e-12 * base.period() / lambda);
        }
    }
}
