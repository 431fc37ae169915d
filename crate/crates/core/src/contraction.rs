//! Banach iteration with a recorded trace.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Point;

/// Iteration budget for a contraction with the given rate: enough steps to
/// shrink `diam` to `tol`, plus a fixed allowance.
pub fn max_iterations(rate: f64, diam: f64, tol: f64) -> usize {
    let base = if rate > 0.0 && rate < 1.0 && tol < diam && diam > 0.0 {
        libm::ceil(libm::log(tol / diam) / libm::log(rate)).max(0.0) as usize
    } else if rate >= 1.0 {
        1000
    } else {
        0
    };
    base + 16
}

#[derive(Debug, Clone, PartialEq)]
pub struct Iteration {
    pub point: Point,
    pub iterations: usize,
    /// `|x_{k+1} - x_k|` for every step taken.
    pub steps: Vec<f64>,
}

impl Iteration {
    /// Largest ratio of consecutive step lengths, ignoring steps already at
    /// rounding level.
    pub fn observed_rate(&self) -> f64 {
        observed_rate(&self.steps)
    }
}

/// Largest ratio of consecutive entries of a decreasing trace. Entries at or
/// below `1e-13` of the first one are rounding noise and are skipped.
pub fn observed_rate(steps: &[f64]) -> f64 {
    let first = steps.first().copied().unwrap_or(0.0);
    let noise = 1e-13 * first.max(f64::MIN_POSITIVE);
    steps
        .windows(2)
        .filter(|w| w[0] > noise && w[1] > noise)
        .map(|w| w[1] / w[0])
        .fold(0.0, f64::max)
}

/// Iterates `x ← step(x)` from `start` until a step shorter than `tol`.
pub fn iterate<F>(start: Point, max_iter: usize, tol: f64, mut step: F) -> Result<Iteration>
where
    F: FnMut(&Point) -> Result<Point>,
{
    let mut x = start;
    let mut steps = Vec::new();
    for k in 0..max_iter {
        let y = step(&x)?;
        let d = y.dist(&x);
        steps.push(d);
        x = y;
        if d <= tol {
            return Ok(Iteration {
                point: x,
                iterations: k + 1,
                steps,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual: steps.last().copied().unwrap_or(f64::INFINITY),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halving_converges_with_rate_one_half() {
        let it = iterate(Point::from_slice(&[1.0]), 100, 1e-12, |x| Ok(*x * 0.5)).unwrap();
        assert!(it.point[0] <= 1e-12);
        assert!((it.observed_rate() - 0.5).abs() < 1e-12);
        assert!(it.iterations <= max_iterations(0.5, 1.0, 1e-12));
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let r = iterate(Point::from_slice(&[1.0]), 5, 1e-12, |x| Ok(*x * 0.9));
        assert!(matches!(r, Err(Error::NoConvergence { iterations: 5, .. })));
    }
}
