//! One-dimensional Lipschitz dynamics: sinks and sources, permanence of
//! fixed and periodic points under Lipschitz perturbation, and δ-Lyapunov
//! exponents.

use alloc::vec;
use alloc::vec::Vec;

use crate::contraction::{max_iterations, Iteration};
use crate::error::{Error, Result};
use crate::hyperbolic::roots_1d;
use crate::linalg::Point;
use crate::lip::{
    estimate_lip, estimate_reverse_lip, extremize_pairs, lip_distance, quotient_noise, LipEstimate, SamplingBudget,
    Score,
};
use crate::map::LipMap;
use crate::region::Ball;

fn at(f: &(impl LipMap + ?Sized), x: f64) -> Result<f64> {
    Ok(f.eval(&Point::from_slice(&[x]))?[0])
}

fn nbhd(p: f64, delta: f64) -> Result<Ball> {
    Ball::new(Point::from_slice(&[p]), delta)
}

/// `f^k` of a one-dimensional map.
pub struct Iterated<'a> {
    pub f: &'a dyn LipMap,
    pub k: usize,
}

impl LipMap for Iterated<'_> {
    fn dim(&self) -> usize {
        1
    }
    fn eval(&self, x: &Point) -> Result<Point> {
        let mut y = *x;
        for _ in 0..self.k {
            y = self.f.eval(&y)?;
        }
        Ok(y)
    }
    fn domain(&self) -> Option<Ball> {
        self.f.domain()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Sink,
    Source,
    IndifferentOrUnknown,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Sink => "sink",
            Classification::Source => "source",
            Classification::IndifferentOrUnknown => "indifferent_or_unknown",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointReport {
    pub p: f64,
    pub delta: f64,
    pub lip: LipEstimate,
    pub rev_lip: LipEstimate,
    pub classification: Classification,
    pub margin: f64,
}

/// Sink if `Lip·margin < 1`, source if `rev/margin > 1` on `N_δ(p)`.
pub fn classify_fixed_point<M: LipMap + ?Sized>(
    f: &M,
    p: f64,
    delta: f64,
    budget: &SamplingBudget,
    margin: f64,
    tol: f64,
) -> Result<FixedPointReport> {
    let displacement = (at(f, p)? - p).abs();
    if displacement > tol {
        return Err(Error::NotFixed { displacement });
    }
    let region = nbhd(p, delta)?;
    let lip = estimate_lip(f, &region, budget)?;
    let rev_lip = estimate_reverse_lip(f, &region, budget)?;
    let classification = if lip.value * margin < 1.0 {
        Classification::Sink
    } else if rev_lip.value / margin > 1.0 {
        Classification::Source
    } else {
        Classification::IndifferentOrUnknown
    };
    Ok(FixedPointReport {
        p,
        delta,
        lip,
        rev_lip,
        classification,
        margin,
    })
}

fn signed_quotient<M: LipMap + ?Sized>(f: &M, x: &Point, y: &Point) -> Result<Option<Score>> {
    let d = y[0] - x[0];
    if d == 0.0 {
        return Ok(None);
    }
    let (fx, fy) = (at(f, x[0])?, at(f, y[0])?);
    Ok(Some(Score {
        value: (fy - fx) / d,
        noise: quotient_noise(fx.abs().max(fy.abs()), d.abs()),
    }))
}

/// Sampled infimum and supremum of the signed difference quotient.
pub fn quotient_range<M: LipMap + ?Sized>(f: &M, region: &Ball, budget: &SamplingBudget) -> Result<(f64, f64)> {
    let (hi, _, _) = extremize_pairs(region, budget, true, |x, y| signed_quotient(f, x, y))?;
    let (lo, _, _) = extremize_pairs(region, budget, false, |x, y| signed_quotient(f, x, y))?;
    Ok((lo, hi))
}

/// Symmetric difference quotient at `p` with step `h`.
pub fn symmetric_slope<M: LipMap + ?Sized>(f: &M, p: f64, h: f64) -> Result<f64> {
    Ok((at(f, p + h)? - at(f, p - h)?) / (2.0 * h))
}

/// The constant `C` of the gordura condition: the local Lipschitz constant,
/// signed like the map's slope at `p` so that orientation-reversing maps
/// are measured against a negative slope.
pub fn default_constant<M: LipMap + ?Sized>(f: &M, p: f64, delta: f64, budget: &SamplingBudget) -> Result<f64> {
    let lip = estimate_lip(f, &nbhd(p, delta)?, budget)?.value;
    let s = symmetric_slope(f, p, delta / 100.0)?;
    Ok(if s < 0.0 { -lip } else { lip })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GorduraReport {
    pub c: f64,
    /// `sup |q - C| / |1 - C|` over signed difference quotients `q`.
    pub worst_ratio: f64,
    pub quotient_min: f64,
    pub quotient_max: f64,
    pub pass: bool,
}

/// `|(1-C)⁻¹[f(x) - f(y) - C(x - y)]| ≤ |x - y| / 3` on `N_δ(p)`.
pub fn check_gordura<M: LipMap + ?Sized>(
    f: &M,
    p: f64,
    delta: f64,
    c: Option<f64>,
    budget: &SamplingBudget,
) -> Result<GorduraReport> {
    let c = match c {
        Some(c) => c,
        None => default_constant(f, p, delta, budget)?,
    };
    if (1.0 - c).abs() < 1e-8 {
        return Err(Error::DegenerateC { c });
    }
    let (lo, hi) = quotient_range(f, &nbhd(p, delta)?, budget)?;
    let worst_ratio = (hi - c).abs().max((lo - c).abs()) / (1.0 - c).abs();
    Ok(GorduraReport {
        c,
        worst_ratio,
        quotient_min: lo,
        quotient_max: hi,
        pass: worst_ratio <= 1.0 / 3.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PermanencePath {
    /// `f` treated as differentiable: `L` is a symmetric difference quotient.
    Differentiable,
    /// `f` only Lipschitz: `C` is the signed local constant.
    Lipschitz,
}

impl PermanencePath {
    pub fn as_str(self) -> &'static str {
        match self {
            PermanencePath::Differentiable => "differentiable",
            PermanencePath::Lipschitz => "lipschitz",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub inequality: &'static str,
    pub value: f64,
    pub bound: f64,
    pub strict: bool,
}

impl Threshold {
    pub fn holds(&self) -> bool {
        if self.strict {
            self.value < self.bound
        } else {
            self.value <= self.bound
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PermanenceCert {
    pub p: f64,
    pub k: usize,
    pub delta: f64,
    pub path: PermanencePath,
    /// `L` or `C`.
    pub c: f64,
    pub gordura: GorduraReport,
    /// Margin-inflated `‖f^k - g^k‖_{Lip, N_δ(p)}`.
    pub eps: f64,
    pub thresholds: Vec<Threshold>,
    pub q: f64,
    /// `|g^k(q) - q|`.
    pub residual: f64,
    pub iteration: Iteration,
    pub classification: Classification,
    /// `q, g(q), …, g^{k-1}(q)`.
    pub orbit: Vec<f64>,
    /// `Π C_{x_i,δ}` of `g` along the orbit.
    pub constant_product: f64,
    pub periodic_sink: bool,
}

/// Fixed point of `g` near the fixed point `p` of `f`.
pub fn perturbed_fixed_point(
    f: &dyn LipMap,
    g: &dyn LipMap,
    p: f64,
    delta: f64,
    path: PermanencePath,
    budget: &SamplingBudget,
    margin: f64,
    tol: f64,
) -> Result<PermanenceCert> {
    perturbed_periodic_point(f, g, p, 1, delta, path, budget, margin, tol)
}

/// Fixed point of `g^k` near the fixed point `p` of `f^k`, by the contraction
/// `ψ(z) = (1-C)⁻¹[g^k(z + p) - p - Cz]` on `N̄_δ(0)`.
#[allow(clippy::too_many_arguments)]
pub fn perturbed_periodic_point(
    f: &dyn LipMap,
    g: &dyn LipMap,
    p: f64,
    k: usize,
    delta: f64,
    path: PermanencePath,
    budget: &SamplingBudget,
    margin: f64,
    tol: f64,
) -> Result<PermanenceCert> {
    let fk = Iterated { f, k };
    let gk = Iterated { f: g, k };
    let displacement = (at(&fk, p)? - p).abs();
    if displacement > tol {
        return Err(Error::NotFixed { displacement });
    }
    let region = nbhd(p, delta)?;
    let c = match path {
        PermanencePath::Differentiable => symmetric_slope(&fk, p, delta / 100.0)?,
        PermanencePath::Lipschitz => default_constant(&fk, p, delta, budget)?,
    };
    let gordura = check_gordura(&fk, p, delta, Some(c), budget)?;
    if !gordura.pass {
        return Err(Error::ThresholdExceeded {
            inequality: "gordura",
            value: gordura.worst_ratio,
            bound: 1.0 / 3.0,
        });
    }
    let eps = lip_distance(&fk, &gk, &region, budget)? * margin;
    let gap = (1.0 - c).abs();
    let thresholds = match path {
        PermanencePath::Differentiable => vec![
            Threshold {
                inequality: "eps <= min(|1-L| delta/3, |1-L|/3)",
                value: eps,
                bound: (gap * delta / 3.0).min(gap / 3.0),
                strict: false,
            },
            Threshold {
                inequality: "eps < |1-L|/6",
                value: eps,
                bound: gap / 6.0,
                strict: true,
            },
        ],
        PermanencePath::Lipschitz => vec![
            Threshold {
                inequality: "eps < min(|1-C| delta/3, |1-C|/3)",
                value: eps,
                bound: (gap * delta / 3.0).min(gap / 3.0),
                strict: true,
            },
            Threshold {
                inequality: "eps < |1-C|/2",
                value: eps,
                bound: gap / 2.0,
                strict: true,
            },
        ],
    };
    if let Some(t) = thresholds.iter().find(|t| !t.holds()) {
        return Err(Error::ThresholdExceeded {
            inequality: t.inequality,
            value: t.value,
            bound: t.bound,
        });
    }

    let psi = |z: f64| -> Result<f64> { Ok((at(&gk, z + p)? - p - c * z) / (1.0 - c)) };
    let max_iter = max_iterations(0.5, 2.0 * delta, tol);
    let mut z = 0.0;
    let mut steps = Vec::new();
    let mut done = false;
    for _ in 0..max_iter {
        let next = psi(z)?;
        if next.abs() > delta * (1.0 + 1e-12) {
            return Err(Error::precondition("ψ left the closed δ-neighbourhood"));
        }
        let d = (next - z).abs();
        steps.push(d);
        z = next;
        if d <= tol {
            done = true;
            break;
        }
    }
    if !done {
        return Err(Error::NoConvergence {
            iterations: max_iter,
            residual: steps.last().copied().unwrap_or(f64::INFINITY),
        });
    }
    let q = p + z;
    let iteration = Iteration {
        point: Point::from_slice(&[q]),
        iterations: steps.len(),
        steps,
    };
    let residual = (at(&gk, q)? - q).abs();
    let inner = (delta - z.abs()).max(delta * 1e-3);
    let classification = classify_fixed_point(&gk, q, inner, budget, margin, tol.max(residual))?.classification;
    let mut orbit = vec![q];
    for _ in 1..k {
        let last = *orbit.last().expect("orbit starts at q");
        orbit.push(at(g, last)?);
    }
    let constant_product = constant_product(g, &orbit, delta, budget)?;
    Ok(PermanenceCert {
        p,
        k,
        delta,
        path,
        c,
        gordura,
        eps,
        thresholds,
        q,
        residual,
        iteration,
        classification,
        periodic_sink: constant_product < 1.0,
        orbit,
        constant_product,
    })
}

/// `Π C_{x_i,δ}` over the given points.
pub fn constant_product<M: LipMap + ?Sized>(f: &M, points: &[f64], delta: f64, budget: &SamplingBudget) -> Result<f64> {
    let mut prod = 1.0;
    for &x in points {
        prod *= estimate_lip(f, &nbhd(x, delta)?, budget)?.value;
    }
    Ok(prod)
}

/// Value at zero of the interpolating polynomial through `(h_i, v_i)`
/// (Neville's scheme).
pub fn extrapolate_to_zero(h: &[f64], v: &[f64]) -> f64 {
    let mut p = v.to_vec();
    let n = p.len();
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (h[i + m] * p[i] - h[i] * p[i + 1]) / (h[i + m] - h[i]);
        }
    }
    p[0]
}

/// Periodic orbits of minimal period `k` in `[lo, hi]`, each listed from its
/// smallest point.
pub fn periodic_orbits<M: LipMap + ?Sized>(f: &M, k: usize, lo: f64, hi: f64, nodes: usize, tol: f64) -> Result<Vec<Vec<f64>>> {
    let gk = |x: f64| -> Result<f64> {
        let mut y = x;
        for _ in 0..k {
            y = at(f, y)?;
        }
        Ok(y - x)
    };
    let roots = roots_1d(gk, lo, hi, nodes, tol)?;
    let mut orbits: Vec<Vec<f64>> = Vec::new();
    let same = |a: f64, b: f64| (a - b).abs() <= 1e-7 * a.abs().max(1.0);
    for r in roots {
        let mut orbit = vec![r];
        for _ in 1..k {
            let last = *orbit.last().expect("nonempty");
            orbit.push(at(f, last)?);
        }
        let minimal = (1..k).all(|d| !k.is_multiple_of(d) || !same(orbit[d], r));
        if !minimal || orbits.iter().any(|o| o.iter().any(|&x| same(x, r))) {
            continue;
        }
        let start = (0..k).min_by(|&a, &b| orbit[a].total_cmp(&orbit[b])).expect("k >= 1");
        orbit.rotate_left(start);
        orbits.push(orbit);
    }
    Ok(orbits)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitRecord {
    pub x1: f64,
    pub delta: f64,
    /// `x_1, …, x_n`.
    pub points: Vec<f64>,
    /// `C_{x_i,δ}`.
    pub constants: Vec<f64>,
    /// `h^{(m)} = (1/m) Σ_{i ≤ m} ln C_{x_i,δ}` for `m = 1..n`.
    pub partial_exponents: Vec<f64>,
    pub exponent: f64,
    /// `exp(exponent)`, the δ-Lyapunov number.
    pub number: f64,
    /// Largest `|h^{(m)} - h^{(n)}|` over the last quarter of the orbit.
    pub tail: f64,
    /// Variance of `h^{(m)}` over the last quarter.
    pub window_variance: f64,
}

/// Compensated running sum.
#[derive(Default, Clone, Copy)]
struct Neumaier {
    sum: f64,
    c: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.c
    }
}

/// Orbit of `x₁` with its local constants and δ-Lyapunov exponent.
pub fn delta_lyapunov<M: LipMap + ?Sized>(
    f: &M,
    x1: f64,
    delta: f64,
    n: usize,
    budget: &SamplingBudget,
) -> Result<OrbitRecord> {
    if n == 0 {
        return Err(Error::invalid("the orbit needs at least one point"));
    }
    let escape = |step: usize| {
        move |e: Error| match e {
            Error::Domain { .. } => Error::OrbitEscape { step },
            e => e,
        }
    };
    let mut points = Vec::with_capacity(n);
    let mut x = x1;
    for i in 0..n {
        if i > 0 {
            x = at(f, x).map_err(escape(i))?;
        }
        if !x.is_finite() {
            return Err(Error::OrbitEscape { step: i });
        }
        points.push(x);
    }
    let mut constants = Vec::with_capacity(n);
    let mut partial_exponents = Vec::with_capacity(n);
    let mut sum = Neumaier::default();
    for (i, &x) in points.iter().enumerate() {
        let c = estimate_lip(f, &nbhd(x, delta)?, budget).map_err(escape(i))?.value;
        if c == 0.0 {
            return Err(Error::ZeroConstant { step: i });
        }
        constants.push(c);
        sum.add(libm::log(c));
        partial_exponents.push(sum.value() / (i + 1) as f64);
    }
    let exponent = *partial_exponents.last().expect("n >= 1");
    let window = &partial_exponents[n - n.div_ceil(4)..];
    let mean = window.iter().sum::<f64>() / window.len() as f64;
    let window_variance = window.iter().map(|h| (h - mean) * (h - mean)).sum::<f64>() / window.len() as f64;
    let tail = window.iter().fold(0.0f64, |m, h| m.max((h - exponent).abs())) + 4.0 * f64::EPSILON * exponent.abs();
    Ok(OrbitRecord {
        x1,
        delta,
        points,
        constants,
        partial_exponents,
        number: libm::exp(exponent),
        exponent,
        tail,
        window_variance,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovComparison {
    pub delta: f64,
    pub delta_bar: f64,
    pub halvings: usize,
    /// Exponent of `x₁` over the window after burn-in, at `δ̄`.
    pub h_x: f64,
    /// Exponent of the periodic orbit of `y₁` at `δ`.
    pub h_y: f64,
    /// Distance of the orbit of `x₁` to the periodic orbit after burn-in.
    pub shadow_distance: f64,
    pub holds: bool,
}

/// Exhibits `δ̄ ≤ δ` with `h_δ̄(x₁) ≤ h_δ(y₁) + tol`, where `y₁` is
/// `k`-periodic and the orbit of `x₁` is asymptotic to it. Exponents of `x₁`
/// are taken over the last `k`-aligned half of an `n`-step orbit.
#[allow(clippy::too_many_arguments)]
pub fn lyapunov_comparison<M: LipMap + ?Sized>(
    f: &M,
    x1: f64,
    y1: f64,
    k: usize,
    delta: f64,
    n: usize,
    budget: &SamplingBudget,
    tol: f64,
) -> Result<LyapunovComparison> {
    let k = k.max(1);
    let mut cycle = vec![y1];
    for _ in 1..k {
        let last = *cycle.last().expect("nonempty");
        cycle.push(at(f, last)?);
    }
    let back = (at(f, cycle[k - 1])? - y1).abs();
    if back > 1e-9 * y1.abs().max(1.0) {
        return Err(Error::NotFixed { displacement: back });
    }
    let mut orbit = Vec::with_capacity(n);
    let mut x = x1;
    for i in 0..n {
        if i > 0 {
            x = at(f, x)?;
        }
        orbit.push(x);
    }
    let burn = n / 2;
    let len = ((n - burn) / k) * k;
    if len == 0 {
        return Err(Error::invalid("orbit too short for the window"));
    }
    let window = &orbit[n - len..];
    let shadow_distance = window
        .iter()
        .map(|x| cycle.iter().fold(f64::INFINITY, |m, y| m.min((x - y).abs())))
        .fold(0.0, f64::max);
    if shadow_distance >= delta / 4.0 {
        return Err(Error::NotAsymptotic {
            distance: shadow_distance,
        });
    }
    let mean_log = |pts: &[f64], d: f64| -> Result<f64> {
        let mut s = Neumaier::default();
        for &x in pts {
            s.add(libm::log(estimate_lip(f, &nbhd(x, d)?, budget)?.value));
        }
        Ok(s.value() / pts.len() as f64)
    };
    let h_y = mean_log(&cycle, delta)?;
    let mut delta_bar = delta;
    let mut halvings = 0;
    loop {
        let h_x = mean_log(window, delta_bar)?;
        if h_x <= h_y + tol || halvings == 30 {
            return Ok(LyapunovComparison {
                delta,
                delta_bar,
                halvings,
                h_x,
                h_y,
                shadow_distance,
                holds: h_x <= h_y + tol,
            });
        }
        delta_bar *= 0.5;
        halvings += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neville_recovers_quadratics() {
        let h = [4e-4, 2e-4, 1e-4];
        let v: Vec<f64> = h.iter().map(|d| 0.29 + 3.0 * d + 50.0 * d * d).collect();
        assert!((extrapolate_to_zero(&h, &v) - 0.29).abs() < 1e-14);
    }

    #[test]
    fn compensated_sum_of_equal_terms() {
        let mut s = Neumaier::default();
        for _ in 0..1000 {
            s.add(0.1);
        }
        assert!((s.value() - 100.0).abs() < 1e-13);
    }
}
