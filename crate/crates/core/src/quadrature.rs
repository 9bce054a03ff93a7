//! Composite Simpson quadrature with interval doubling.
//!
//! Each doubling reuses every previous function evaluation: the running
//! trapezoid sum `T_{2n} = T_n/2 + h_{2n} Σ f(new midpoints)` gives
//! `S_{2n} = (4T_{2n} − T_n)/3`. Refinement stops once two successive
//! Simpson values agree to the relative tolerance.

use crate::error::{Error, Result};

/// Relative agreement of successive Simpson values that ends refinement.
pub const REL_TOL: f64 = 1e-8;

/// Absolute agreement accepted for integrals that are (near) zero.
pub const ABS_TOL: f64 = 1e-14;

/// Default number of nodes over one period.
pub const DEFAULT_NODES: usize = 4097;

/// Refinement gives up beyond this many intervals.
pub const MAX_INTERVALS: usize = 1 << 23;

/// A converged integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    /// `|S_{2n} − S_n|` at the last doubling, a conservative error estimate.
    pub delta: f64,
    /// Interval count of the accepted value.
    pub intervals: usize,
}

/// Quadrature settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Simpson {
    /// Intervals in the first Simpson estimate (rounded up to even).
    pub intervals: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for Simpson {
    fn default() -> Self {
        Self::with_nodes(DEFAULT_NODES)
    }
}

impl Simpson {
    /// Settings starting from `nodes` equally spaced nodes.
    pub fn with_nodes(nodes: usize) -> Self {
        Self {
            intervals: nodes.saturating_sub(1),
            rel_tol: REL_TOL,
            abs_tol: ABS_TOL,
            max_intervals: MAX_INTERVALS,
        }
    }

    /// Same tolerances, starting from `intervals` intervals.
    pub fn starting_at(self, intervals: usize) -> Self {
        Self { intervals, ..self }
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<Integral> {
        let mut n = self.intervals.max(2);
        n += n % 2;
        let half = n / 2;
        let width = b - a;

        // trapezoid sums on n/2 and n intervals
        let mut coarse_sum = 0.5 * (f(a) + f(b));
        for i in 1..half {
            coarse_sum += f(a + width * i as f64 / half as f64);
        }
        let coarse = coarse_sum * width / half as f64;
        let mut sum = coarse_sum;
        for i in 0..half {
            sum += f(a + width * (2 * i + 1) as f64 / n as f64);
        }
        let mut trapezoid = sum * width / n as f64;
        let mut simpson = (4.0 * trapezoid - coarse) / 3.0;

        loop {
            let next_n = 2 * n;
            if next_n > self.max_intervals {
                return Err(Error::QuadratureUnconverged {
                    intervals: n,
                    delta: f64::NAN,
                });
            }
            for i in 0..n {
                sum += f(a + width * (2 * i + 1) as f64 / next_n as f64);
            }
            let next_trapezoid = sum * width / next_n as f64;
            let next_simpson = (4.0 * next_trapezoid - trapezoid) / 3.0;
            let delta = libm::fabs(next_simpson - simpson);
            if delta <= self.rel_tol * libm::fabs(next_simpson) || delta <= self.abs_tol {
                return Ok(Integral {
                    value: next_simpson,
                    delta,
                    intervals: next_n,
                });
            }
            if next_n * 2 > self.max_intervals {
                return Err(Error::QuadratureUnconverged {
                    intervals: next_n,
                    delta,
                });
            }
            n = next_n;
            trapezoid = next_trapezoid;
            simpson = next_simpson;
        }
    }
}
