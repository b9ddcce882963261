//! Composite Simpson quadrature for piecewise-smooth integrands.
//!
//! The figure of merit integrates `max(g(p), 0)`, which has a kink wherever `g`
//! crosses zero. Kinks are located by bisection between sign changes on the base
//! grid and each positive piece is integrated separately, so Simpson's rule only
//! ever sees a smooth integrand.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Number of nodes on the full interval (odd, so the interval count is even).
    pub base_points: usize,
    /// Width at which kink bisection stops.
    pub root_tol: f64,
    /// Target absolute error, checked by comparing against a halved step.
    pub abs_tol: f64,
    /// How many times a piece may be refined before giving up.
    pub max_refinements: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            base_points: 3001,
            root_tol: 1e-12,
            abs_tol: 1e-8,
            max_refinements: 6,
        }
    }
}

impl QuadratureSpec {
    /// Same settings with the base step halved.
    pub fn refined(&self) -> Self {
        Self {
            base_points: 2 * self.base_points - 1,
            ..*self
        }
    }

    fn validate(&self) -> Result<()> {
        if self.base_points < 3 || self.base_points.is_multiple_of(2) {
            return Err(Error::OutOfRange(format!(
                "quadrature needs an odd number of at least 3 points, got {}",
                self.base_points
            )));
        }
        if !(self.root_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::OutOfRange("quadrature tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Composite Simpson rule with `intervals` (even) subintervals.
pub fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    debug_assert!(intervals >= 2 && intervals.is_multiple_of(2));
    let h = (b - a) / intervals as f64;
    let mut sum = f(a) + f(b);
    for k in 1..intervals {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + h * k as f64);
    }
    sum * h / 3.0
}

/// Integrates a smooth `f` with step doubling until two successive estimates agree.
fn converged_simpson(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    intervals: usize,
    tol: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let mut n = intervals.max(2);
    n += n % 2;
    let mut coarse = simpson(f, a, b, n);
    for _ in 0..=spec.max_refinements {
        n *= 2;
        let fine = simpson(f, a, b, n);
        if (fine - coarse).abs() <= tol {
            return Ok(fine);
        }
        coarse = fine;
    }
    Err(Error::QuadratureNoConvergence(format!(
        "Simpson estimates on [{a}, {b}] still differ by more than {tol:e} after {} refinements",
        spec.max_refinements
    )))
}

fn bisect_sign_change(g: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let lo_positive = g(lo) > 0.0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (g(mid) > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Result of integrating the positive part of a function.
#[derive(Clone, Debug, PartialEq)]
pub struct PositivePartIntegral {
    pub value: f64,
    /// Zero crossings located on the way, ascending.
    pub crossings: Vec<f64>,
}

/// `∫_a^b max(g(x), 0) dx` for piecewise-smooth `g`.
pub fn integrate_positive_part(
    g: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<PositivePartIntegral> {
    spec.validate()?;
    let intervals = spec.base_points - 1;
    let h = (b - a) / intervals as f64;
    let node = |k: usize| if k == intervals { b } else { a + h * k as f64 };

    let mut crossings = Vec::new();
    let mut prev_positive = g(a) > 0.0;
    for k in 1..=intervals {
        let positive = g(node(k)) > 0.0;
        if positive != prev_positive {
            crossings.push(bisect_sign_change(&g, node(k - 1), node(k), spec.root_tol));
        }
        prev_positive = positive;
    }

    let mut breaks = Vec::with_capacity(crossings.len() + 2);
    breaks.push(a);
    breaks.extend(&crossings);
    breaks.push(b);

    let pieces = breaks.len() - 1;
    let mut value = 0.0;
    for w in breaks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi - lo <= 0.0 || g(0.5 * (lo + hi)) <= 0.0 {
            continue;
        }
        let share = ((hi - lo) / (b - a) * intervals as f64).ceil() as usize;
        value += converged_simpson(&g, lo, hi, share, spec.abs_tol / pieces as f64, spec)?;
    }
    Ok(PositivePartIntegral { value, crossings })
}

/// `∫_a^b f(x) dx` for smooth `f`.
pub fn integrate_smooth(f: impl Fn(f64) -> f64, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    converged_simpson(&f, a, b, spec.base_points - 1, spec.abs_tol, spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_is_exact_for_cubics() {
        let f = |x: f64| 3.0 * x * x * x - x + 2.0;
        let exact = 0.75 * 16.0 - 2.0 + 4.0;
        assert!((simpson(&f, 0.0, 2.0, 2) - exact).abs() < 1e-13);
    }

    #[test]
    fn positive_part_of_a_parabola() {
        // g = 1/3 - 4p + 8p^2 has roots (3 ± √3)/12; on [0, 1/3] only the lower one matters
        let g = |p: f64| 1.0 / 3.0 - 4.0 * p + 8.0 * p * p;
        let r = integrate_positive_part(g, 0.0, 1.0 / 3.0, &QuadratureSpec::default()).unwrap();
        let root = (3.0 - 3f64.sqrt()) / 12.0;
        let antiderivative = |p: f64| p / 3.0 - 2.0 * p * p + 8.0 / 3.0 * p * p * p;
        assert_eq!(r.crossings.len(), 1);
        assert!((r.crossings[0] - root).abs() < 1e-12);
        assert!((r.value - antiderivative(root)).abs() < 1e-13);
    }

    #[test]
    fn two_kinks_and_a_negative_function() {
        let g = |x: f64| (x - 0.2) * (x - 0.7);
        let r = integrate_positive_part(g, 0.0, 1.0, &QuadratureSpec::default()).unwrap();
        let prim = |x: f64| x * x * x / 3.0 - 0.45 * x * x + 0.14 * x;
        let exact = prim(0.2) - prim(0.0) + prim(1.0) - prim(0.7);
        assert_eq!(r.crossings.len(), 2);
        assert!((r.value - exact).abs() < 1e-13);

        let r = integrate_positive_part(|x| -1.0 - x, 0.0, 1.0, &QuadratureSpec::default()).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn smooth_integral() {
        let v = integrate_smooth(f64::exp, 0.0, 1.0, &QuadratureSpec::default()).unwrap();
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn rejects_bad_spec_and_reports_non_convergence() {
        let even = QuadratureSpec {
            base_points: 10,
            ..Default::default()
        };
        assert!(integrate_smooth(f64::exp, 0.0, 1.0, &even).is_err());
        let strict = QuadratureSpec {
            base_points: 3,
            abs_tol: 1e-300,
            max_refinements: 1,
            ..Default::default()
        };
        let err = integrate_smooth(|x: f64| x.sqrt(), 0.0, 1.0, &strict).unwrap_err();
        assert!(matches!(err, Error::QuadratureNoConvergence(_)));
    }
}
