//! Sampled Lipschitz, reverse-Lipschitz and local Lipschitz-norm estimates.
//!
//! Pairs come from a seeded Halton sequence over the region; the best few
//! pairs are then refined by a pattern search that moves each endpoint along
//! the coordinate axes with a halving step. All reductions run in index order,
//! so a given `(map, region, budget)` always yields the same bits.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Point;
use crate::lowdisc::Halton;
use crate::map::LipMap;
use crate::region::Ball;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingBudget {
    /// Number of low-discrepancy pairs in the base sample.
    pub pairs: usize,
    pub seed: u64,
    /// Maximum number of step halvings in the local refinement; zero turns
    /// refinement off.
    pub refine_depth: usize,
}

impl Default for SamplingBudget {
    fn default() -> Self {
        SamplingBudget {
            pairs: 2048,
            seed: 0,
            refine_depth: 48,
        }
    }
}

impl SamplingBudget {
    pub fn new(pairs: usize, seed: u64) -> Self {
        SamplingBudget {
            pairs,
            seed,
            ..SamplingBudget::default()
        }
    }

    pub fn without_refinement(self) -> Self {
        SamplingBudget {
            refine_depth: 0,
            ..self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateKind {
    Lipschitz,
    ReverseLipschitz,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipEstimate {
    pub value: f64,
    pub kind: EstimateKind,
    pub region: Ball,
    pub pair_count: usize,
    pub refinement_depth: usize,
    /// Sampled suprema only bound the true constant from below; sampled
    /// infima (reverse constants) bound it from above, and then this is false.
    pub is_lower_bound: bool,
    /// The extremal pair found.
    pub argmax: (Point, Point),
}

/// Number of best base pairs that get refined.
const REFINE_STARTS: usize = 4;

/// Smallest endpoint separation used by the refinement. Below roughly
/// `1e-8·|x|` the difference quotient is dominated by rounding error.
pub fn separation_floor(region: &Ball) -> f64 {
    let r = region.radius();
    let c = region.center().norm();
    (1e-12 * r).max((1e-8 * c.max(1.0)).min(1e-4 * r))
}

fn check_region<M: LipMap + ?Sized>(m: &M, region: &Ball) -> Result<()> {
    if region.dim() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            found: region.dim(),
        });
    }
    let scale = region.center().norm();
    if region.radius() < 64.0 * f64::EPSILON * scale {
        return Err(Error::DegenerateRegion {
            radius: region.radius(),
        });
    }
    if let Some(d) = m.domain() {
        if !d.contains_ball(region) {
            let r = region.to_rect();
            let outside = if d.contains(&r.lo) { r.hi } else { r.lo };
            return Err(Error::Domain { point: outside });
        }
    }
    Ok(())
}

/// The deterministic base pairs for a region and budget.
pub fn sample_pairs(region: &Ball, budget: &SamplingBudget) -> Vec<(Point, Point)> {
    let n = region.dim();
    let lo = region.to_rect().lo;
    let w = 2.0 * region.radius();
    let mut h = Halton::new(2 * n, budget.seed);
    let mut u = [0.0; 6];
    let mut out = Vec::with_capacity(budget.pairs.max(1));
    for _ in 0..budget.pairs.max(1) {
        h.next_into(&mut u[..2 * n]);
        let mut x = lo;
        let mut y = lo;
        for i in 0..n {
            x[i] += w * u[i];
            y[i] += w * u[n + i];
        }
        out.push((x, y));
    }
    out
}

/// Deterministic sample points, the corners and the center included.
pub fn sample_points(region: &Ball, budget: &SamplingBudget) -> Vec<Point> {
    let n = region.dim();
    let rect = region.to_rect();
    let mut out = Vec::with_capacity(budget.pairs + 9);
    out.push(region.center());
    for mask in 0..(1usize << n) {
        let mut p = rect.lo;
        for i in 0..n {
            if mask & (1 << i) != 0 {
                p[i] = rect.hi[i];
            }
        }
        out.push(p);
    }
    let mut h = Halton::new(n, budget.seed);
    let mut u = [0.0; 3];
    for _ in 0..budget.pairs {
        h.next_into(&mut u[..n]);
        let mut p = rect.lo;
        for i in 0..n {
            p[i] += 2.0 * region.radius() * u[i];
        }
        out.push(p);
    }
    out
}

/// A scored pair: the functional value and a bound on its rounding error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Score {
    pub value: f64,
    pub noise: f64,
}

/// Extremum of a pair functional over the region: the base sample followed
/// by pattern-search refinement of the best few pairs. `q` returns `None` for
/// pairs it cannot score (too close, undefined). Refinement only accepts a
/// move whose gain exceeds the rounding noise of both scores, so it does not
/// chase cancellation error at tiny separations.
pub fn extremize_pairs<Q>(
    region: &Ball,
    budget: &SamplingBudget,
    maximize: bool,
    q: Q,
) -> Result<(f64, (Point, Point), usize)>
where
    Q: Fn(&Point, &Point) -> Result<Option<Score>>,
{
    let floor = separation_floor(region);
    let better = |a: f64, b: f64| if maximize { a > b } else { a < b };
    let worst = if maximize {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    };

    let pairs = sample_pairs(region, budget);
    let mut scored: Vec<(f64, usize, f64)> = Vec::new();
    for (i, (x, y)) in pairs.iter().enumerate() {
        if x.dist(y) < floor {
            continue;
        }
        if let Some(v) = q(x, y)? {
            scored.push((v.value, i, v.noise));
        }
    }
    if scored.is_empty() {
        return Err(Error::DegenerateRegion {
            radius: region.radius(),
        });
    }
    // Stable order: by value, ties by index.
    scored.sort_by(|a, b| {
        let o = a.0.total_cmp(&b.0);
        let o = if maximize { o.reverse() } else { o };
        o.then(a.1.cmp(&b.1))
    });
    let mut best = (scored[0].0, pairs[scored[0].1]);
    let mut used_depth = 0;
    if budget.refine_depth > 0 {
        // Refine the overall leaders and the leader of every spatial bin of
        // pair midpoints, so a local extremum cannot hide a better one.
        let n = region.dim();
        let per_axis = match n {
            1 => 16,
            2 => 4,
            _ => 3,
        };
        let lo = region.to_rect().lo;
        let bin_of = |i: usize| -> usize {
            let (x, y) = pairs[i];
            let mut b = 0;
            for a in 0..n {
                let t = (0.5 * (x[a] + y[a]) - lo[a]) / (2.0 * region.radius());
                let k = ((t * per_axis as f64) as usize).min(per_axis - 1);
                b = b * per_axis + k;
            }
            b
        };
        let mut seen_bins: Vec<usize> = Vec::new();
        let mut starts: Vec<(f64, usize, f64)> = Vec::new();
        for (rank, s) in scored.iter().enumerate() {
            let b = bin_of(s.1);
            let fresh = !seen_bins.contains(&b);
            if fresh {
                seen_bins.push(b);
            }
            if rank < REFINE_STARTS || fresh {
                starts.push(*s);
            }
        }
        for &(v0, idx, n0) in starts.iter() {
            let start = Score { value: v0, noise: n0 };
            let (v, pair, depth) = refine(region, budget.refine_depth, floor, maximize, start, pairs[idx], &q)?;
            used_depth = used_depth.max(depth);
            if better(v, best.0) {
                best = (v, pair);
            }
        }
    }
    if best.0 == worst {
        return Err(Error::DegenerateRegion {
            radius: region.radius(),
        });
    }
    Ok((best.0, best.1, used_depth))
}

fn refine<Q>(
    region: &Ball,
    depth: usize,
    floor: f64,
    maximize: bool,
    start: Score,
    mut pair: (Point, Point),
    q: &Q,
) -> Result<(f64, (Point, Point), usize)>
where
    Q: Fn(&Point, &Point) -> Result<Option<Score>>,
{
    let n = region.dim();
    let mut value = start;
    let mut step = 0.25 * region.radius();
    let mut halvings = 0;
    let mut rounds = 0;
    let max_rounds = 64 * depth.max(1);
    while halvings < depth && step >= 0.5 * floor && rounds < max_rounds {
        rounds += 1;
        let mut improved = false;
        let consider = |x: Point, y: Point, value: &mut Score, pair: &mut (Point, Point)| -> Result<bool> {
            if x.dist(&y) < floor || (x, y) == *pair {
                return Ok(false);
            }
            if let Some(v) = q(&x, &y)? {
                let gain = if maximize {
                    v.value - value.value
                } else {
                    value.value - v.value
                };
                if gain > v.noise.max(value.noise) {
                    *value = v;
                    *pair = (x, y);
                    return Ok(true);
                }
            }
            Ok(false)
        };
        // Shrinking the pair toward either endpoint, then rigid translations,
        // then single-endpoint moves.
        let (x, y) = pair;
        let mid = (x + y) * 0.5;
        improved |= consider(x, mid, &mut value, &mut pair)?;
        let (x, y) = pair;
        let mid = (x + y) * 0.5;
        improved |= consider(mid, y, &mut value, &mut pair)?;
        for axis in 0..n {
            for sign in [1.0, -1.0] {
                let (mut x, mut y) = pair;
                x[axis] += sign * step;
                y[axis] += sign * step;
                improved |= consider(region.clamp(&x), region.clamp(&y), &mut value, &mut pair)?;
            }
        }
        for end in 0..2 {
            for axis in 0..n {
                for sign in [1.0, -1.0] {
                    let (mut x, mut y) = pair;
                    {
                        let p = if end == 0 { &mut x } else { &mut y };
                        p[axis] += sign * step;
                        *p = region.clamp(p);
                    }
                    improved |= consider(x, y, &mut value, &mut pair)?;
                }
            }
        }
        if !improved {
            step *= 0.5;
            halvings += 1;
        }
    }
    Ok((value.value, pair, halvings))
}

/// Rounding error bound for `|a - b| / d` where `a`, `b` have magnitude
/// `scale` and were computed to a few ulps.
pub fn quotient_noise(scale: f64, d: f64) -> f64 {
    8.0 * f64::EPSILON * scale / d
}

fn quotient<M: LipMap + ?Sized>(m: &M, x: &Point, y: &Point) -> Result<Option<Score>> {
    let d = x.dist(y);
    if d == 0.0 {
        return Ok(None);
    }
    let (fx, fy) = (m.eval(x)?, m.eval(y)?);
    Ok(Some(Score {
        value: fx.dist(&fy) / d,
        noise: quotient_noise(fx.norm().max(fy.norm()), d),
    }))
}

/// Sampled `Lip(m, region)`, a lower bound of the true constant.
pub fn estimate_lip<M: LipMap + ?Sized>(m: &M, region: &Ball, budget: &SamplingBudget) -> Result<LipEstimate> {
    check_region(m, region)?;
    let (value, argmax, depth) = extremize_pairs(region, budget, true, |x, y| quotient(m, x, y))?;
    Ok(LipEstimate {
        value,
        kind: EstimateKind::Lipschitz,
        region: *region,
        pair_count: budget.pairs.max(1),
        refinement_depth: depth,
        is_lower_bound: true,
        argmax,
    })
}

/// Sampled reverse Lipschitz constant `inf |m(x)-m(y)|/|x-y|`, an upper bound
/// of the true constant.
pub fn estimate_reverse_lip<M: LipMap + ?Sized>(
    m: &M,
    region: &Ball,
    budget: &SamplingBudget,
) -> Result<LipEstimate> {
    check_region(m, region)?;
    let (value, argmax, depth) = extremize_pairs(region, budget, false, |x, y| quotient(m, x, y))?;
    Ok(LipEstimate {
        value,
        kind: EstimateKind::ReverseLipschitz,
        region: *region,
        pair_count: budget.pairs.max(1),
        refinement_depth: depth,
        is_lower_bound: false,
        argmax,
    })
}

/// Largest quotient over an explicit pair list, with no refinement.
pub fn max_quotient<M: LipMap + ?Sized>(m: &M, pairs: &[(Point, Point)]) -> Result<f64> {
    let mut best = 0.0f64;
    for (x, y) in pairs {
        if let Some(v) = quotient(m, x, y)? {
            best = best.max(v.value);
        }
    }
    Ok(best)
}

/// Sampled `sup |m|` over the region, refined by a pattern search from the
/// best sample point.
pub fn sup_norm<M: LipMap + ?Sized>(m: &M, region: &Ball, budget: &SamplingBudget) -> Result<f64> {
    check_region(m, region)?;
    let pts = sample_points(region, budget);
    let mut best = (f64::NEG_INFINITY, region.center());
    for p in &pts {
        let v = m.eval(p)?.norm();
        if v > best.0 {
            best = (v, *p);
        }
    }
    let mut step = 0.25 * region.radius();
    let mut halvings = 0;
    let floor = separation_floor(region);
    while halvings < budget.refine_depth && step >= floor {
        let mut improved = false;
        for axis in 0..region.dim() {
            for sign in [1.0, -1.0] {
                let mut p = best.1;
                p[axis] += sign * step;
                let p = region.clamp(&p);
                let v = m.eval(&p)?.norm();
                if v > best.0 {
                    best = (v, p);
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
            halvings += 1;
        }
    }
    Ok(best.0)
}

/// The local Lipschitz norm `max{‖m‖_C0, Lip(m)}` on the region.
pub fn lip_norm<M: LipMap + ?Sized>(m: &M, region: &Ball, budget: &SamplingBudget) -> Result<f64> {
    let c0 = sup_norm(m, region, budget)?;
    let lip = estimate_lip(m, region, budget)?.value;
    Ok(c0.max(lip))
}

/// `lip_norm(m1 - m2)` on the region.
pub fn lip_distance<A, B>(m1: &A, m2: &B, region: &Ball, budget: &SamplingBudget) -> Result<f64>
where
    A: LipMap + ?Sized,
    B: LipMap + ?Sized,
{
    check_region(m1, region)?;
    check_region(m2, region)?;
    lip_norm(&Difference(m1, m2), region, budget)
}

/// `x ↦ a(x) - b(x)`.
#[derive(Debug, Clone, Copy)]
pub struct Difference<A, B>(pub A, pub B);

impl<A: LipMap, B: LipMap> LipMap for Difference<A, B> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn out_dim(&self) -> usize {
        self.0.out_dim()
    }
    fn eval(&self, x: &Point) -> Result<Point> {
        Ok(self.0.eval(x)? - self.1.eval(x)?)
    }
}

/// `x ↦ a(x) + b(x)`.
#[derive(Debug, Clone, Copy)]
pub struct Sum<A, B>(pub A, pub B);

impl<A: LipMap, B: LipMap> LipMap for Sum<A, B> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn out_dim(&self) -> usize {
        self.0.out_dim()
    }
    fn eval(&self, x: &Point) -> Result<Point> {
        Ok(self.0.eval(x)? + self.1.eval(x)?)
    }
}

/// `x ↦ α·a(x)`.
#[derive(Debug, Clone, Copy)]
pub struct Scaled<A>(pub f64, pub A);

impl<A: LipMap> LipMap for Scaled<A> {
    fn dim(&self) -> usize {
        self.1.dim()
    }
    fn out_dim(&self) -> usize {
        self.1.out_dim()
    }
    fn eval(&self, x: &Point) -> Result<Point> {
        Ok(self.1.eval(x)? * self.0)
    }
}
