//! Intersections of complementary Lipschitz graphs and L-transversality.
//!
//! Points of `E = E₁ ⊕ E₂` are stored as `(y, x)` with `y ∈ E₁` first.
//! `θ̃: E₁ → E₂` and `σ̃: E₂ → E₁` are graphs over the two factors; their
//! intersection is the fixed point of `g = σ̃ ∘ θ̃` on `K¹_r = B_{r/2} ∩ E₁`.

use alloc::vec::Vec;

use crate::contraction::{max_iterations, observed_rate};
use crate::error::{Error, Result};
use crate::grid::GraphFn;
use crate::hyperbolic::Verdict;
use crate::linalg::Point;
use crate::lip::{estimate_lip, sup_norm, Difference, SamplingBudget};
use crate::lowdisc::Halton;
use crate::map::{FnMap, LipMap};
use crate::region::Ball;

/// Width of the band around 1 in which a local graph constant is undecided.
pub const LIP_ONE_BAND: f64 = 1e-9;

pub struct TransversalityProblem<'a> {
    pub dim1: usize,
    pub dim2: usize,
    pub radius: f64,
    /// `θ̃: E₁ → E₂`.
    pub theta_t: &'a dyn LipMap,
    /// `σ̃: E₂ → E₁`.
    pub sigma_t: &'a dyn LipMap,
    /// Reference graphs; `None` stands for the zero graph.
    pub theta: Option<&'a dyn LipMap>,
    pub sigma: Option<&'a dyn LipMap>,
    pub c: f64,
    /// Spacing of the grid the graphs live on, if any; `r₀` is aligned to it.
    pub spacing: Option<f64>,
}

impl TransversalityProblem<'_> {
    fn k1(&self) -> Result<Ball> {
        Ball::new(Point::zeros(self.dim1), 0.5 * self.radius)
    }

    fn k2(&self) -> Result<Ball> {
        Ball::new(Point::zeros(self.dim2), 0.5 * self.radius)
    }
}

struct Zero(usize, usize);

impl LipMap for Zero {
    fn dim(&self) -> usize {
        self.0
    }
    fn out_dim(&self) -> usize {
        self.1
    }
    fn eval(&self, _: &Point) -> Result<Point> {
        Ok(Point::zeros(self.1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    /// `(1 - c) r / 2`.
    pub bound: f64,
    /// Sampled `sup |θ - θ̃|` over `K¹_r`.
    pub theta_distance: f64,
    pub sigma_distance: f64,
    pub lip_theta: f64,
    pub lip_sigma: f64,
    pub lip_theta_t: f64,
    pub lip_sigma_t: f64,
    /// Sampled `sup |θ̃|` over `K¹_r`, to compare with `r/2`.
    pub theta_t_reach: f64,
    pub sigma_t_reach: f64,
    pub closeness_ok: bool,
    pub lip_ok: bool,
    pub containment_ok: bool,
    pub pass: bool,
}

pub fn check_hypotheses(p: &TransversalityProblem<'_>, budget: &SamplingBudget) -> Result<HypothesisReport> {
    let (k1, k2) = (p.k1()?, p.k2()?);
    let z1 = Zero(p.dim1, p.dim2);
    let z2 = Zero(p.dim2, p.dim1);
    let theta: &dyn LipMap = p.theta.unwrap_or(&z1);
    let sigma: &dyn LipMap = p.sigma.unwrap_or(&z2);
    let bound = 0.5 * (1.0 - p.c) * p.radius;
    let slack = 1.0 + 1e-12;
    let theta_distance = sup_norm(&Difference(theta, p.theta_t), &k1, budget)?;
    let sigma_distance = sup_norm(&Difference(sigma, p.sigma_t), &k2, budget)?;
    let full1 = Ball::new(Point::zeros(p.dim1), p.radius)?;
    let full2 = Ball::new(Point::zeros(p.dim2), p.radius)?;
    let lip = |m: &dyn LipMap, b: &Ball| estimate_lip(&m, b, budget).map(|e| e.value);
    let lip_theta = lip(theta, &full1)?;
    let lip_sigma = lip(sigma, &full2)?;
    let lip_theta_t = lip(p.theta_t, &full1)?;
    let lip_sigma_t = lip(p.sigma_t, &full2)?;
    let theta_t_reach = sup_norm(&p.theta_t, &k1, budget)?;
    let sigma_t_reach = sup_norm(&p.sigma_t, &k2, budget)?;
    let closeness_ok = theta_distance <= bound * slack && sigma_distance <= bound * slack;
    let lip_ok = p.c < 1.0
        && lip_theta <= p.c * slack
        && lip_sigma <= p.c * slack
        && lip_theta_t < 1.0
        && lip_sigma_t < 1.0;
    let containment_ok = theta_t_reach <= 0.5 * p.radius * slack && sigma_t_reach <= 0.5 * p.radius * slack;
    Ok(HypothesisReport {
        bound,
        theta_distance,
        sigma_distance,
        lip_theta,
        lip_sigma,
        lip_theta_t,
        lip_sigma_t,
        theta_t_reach,
        sigma_t_reach,
        closeness_ok,
        lip_ok,
        containment_ok,
        pass: closeness_ok && lip_ok && containment_ok,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransversalityCert {
    pub y1: Point,
    pub y2: Point,
    /// `(y₁, y₂)` as a point of `E`.
    pub y0: Point,
    pub iterations: usize,
    pub steps: Vec<f64>,
    /// `Lip(σ̃)·Lip(θ̃)` (sampled).
    pub rate: f64,
    pub observed_rate: f64,
    pub r0: f64,
    /// `Lip θ*` on `B_{r₀}` and `Lip σ*` on `B_{r₀}`.
    pub lip_theta_star: f64,
    pub lip_sigma_star: f64,
    pub verdict: Verdict,
    /// The hypotheses were not checked or failed and the search ran anyway.
    pub overridden: bool,
}

/// Fixed point of `σ̃ ∘ θ̃` on `K¹_r` from `start`.
pub fn iterate_intersection(p: &TransversalityProblem<'_>, start: &Point, rate: f64, tol: f64) -> Result<(Point, Vec<f64>)> {
    let k1 = p.k1()?;
    let max_iter = max_iterations(rate.min(0.999), p.radius, tol);
    let mut y = *start;
    let mut steps = Vec::new();
    for k in 0..max_iter {
        let next = p.sigma_t.eval(&p.theta_t.eval(&y)?)?;
        if !k1.contains(&next) && next.norm() > k1.radius() * (1.0 + 1e-12) {
            return Err(Error::EscapedCompactum { iteration: k + 1 });
        }
        let d = next.dist(&y);
        steps.push(d);
        y = next;
        if d <= tol {
            return Ok((y, steps));
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual: steps.last().copied().unwrap_or(f64::INFINITY),
    })
}

/// The intersection point and the translated local graphs
/// `θ*(y) = θ̃(y + y₁) - θ̃(y₁)`, `σ*(x) = σ̃(x + y₂) - σ̃(y₂)`.
pub fn find_intersection(
    p: &TransversalityProblem<'_>,
    tol: f64,
    budget: &SamplingBudget,
    override_hypotheses: bool,
) -> Result<TransversalityCert> {
    let hyp = check_hypotheses(p, budget)?;
    if !hyp.pass && !override_hypotheses {
        return Err(Error::precondition("transversality hypotheses fail"));
    }
    let rate = hyp.lip_sigma_t * hyp.lip_theta_t;
    let (y1, steps) = iterate_intersection(p, &Point::zeros(p.dim1), rate, tol)?;
    let y2 = p.theta_t.eval(&y1)?;

    let room = p.radius - y1.norm().max(y2.norm());
    let mut r0 = room;
    if let Some(h) = p.spacing {
        r0 = libm::floor(room / h) * h;
    }
    r0 *= 0.9;
    if r0 <= 0.0 {
        return Err(Error::precondition("the intersection lies on the boundary of B_r"));
    }
    let theta_star = FnMap::with_out_dim(p.dim1, p.dim2, |y: &Point| {
        Ok(p.theta_t.eval(&(*y + y1))? - y2)
    });
    let s_y2 = p.sigma_t.eval(&y2)?;
    let sigma_star = FnMap::with_out_dim(p.dim2, p.dim1, |x: &Point| Ok(p.sigma_t.eval(&(*x + y2))? - s_y2));
    let lip_theta_star = estimate_lip(&theta_star, &Ball::new(Point::zeros(p.dim1), r0)?, budget)?.value;
    let lip_sigma_star = estimate_lip(&sigma_star, &Ball::new(Point::zeros(p.dim2), r0)?, budget)?.value;
    Ok(TransversalityCert {
        y0: y1.concat(&y2),
        y1,
        y2,
        iterations: steps.len(),
        observed_rate: observed_rate(&steps),
        steps,
        rate,
        r0,
        lip_theta_star,
        lip_sigma_star,
        verdict: lip_verdict(lip_theta_star.max(lip_sigma_star)),
        overridden: !hyp.pass,
    })
}

/// Restarts the iteration from `seeds` points of `K¹_r`; returns the largest
/// distance between the limits.
pub fn uniqueness_spread(p: &TransversalityProblem<'_>, seeds: usize, tol: f64, seed: u64) -> Result<f64> {
    let mut h = Halton::new(p.dim1, seed);
    let mut u = [0.0; 3];
    let mut limits: Vec<Point> = Vec::new();
    for _ in 0..seeds {
        h.next_into(&mut u[..p.dim1]);
        let mut s = Point::zeros(p.dim1);
        for i in 0..p.dim1 {
            s[i] = (u[i] - 0.5) * p.radius;
        }
        limits.push(iterate_intersection(p, &s, 0.999, tol)?.0);
    }
    let mut spread: f64 = 0.0;
    for a in &limits {
        for b in &limits {
            spread = spread.max(a.dist(b));
        }
    }
    Ok(spread)
}

/// Fixed point of `θ̃ ∘ σ̃` on `K²_r`, the `E₂` coordinate of the intersection.
pub fn iterate_dual(p: &TransversalityProblem<'_>, tol: f64) -> Result<Point> {
    let swapped = TransversalityProblem {
        dim1: p.dim2,
        dim2: p.dim1,
        radius: p.radius,
        theta_t: p.sigma_t,
        sigma_t: p.theta_t,
        theta: p.sigma,
        sigma: p.theta,
        c: p.c,
        spacing: p.spacing,
    };
    Ok(iterate_intersection(&swapped, &Point::zeros(p.dim2), 0.999, tol)?.0)
}

fn lip_verdict(lip: f64) -> Verdict {
    if lip < 1.0 - LIP_ONE_BAND {
        Verdict::Certified
    } else if lip > 1.0 + LIP_ONE_BAND {
        Verdict::Rejected
    } else {
        Verdict::Inconclusive
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphTransversality {
    pub lip1: f64,
    pub lip2: f64,
    pub verdict: Verdict,
}

/// L-transversality at `x = (x₁, x₂)` of the graphs `w1: E₁ → E₂` and
/// `w2: E₂ → E₁`: both must pass through `x` and have interpolant constant
/// below one on `B_r` around it.
pub fn l_transversal_graphs(w1: &GraphFn, w2: &GraphFn, x: &Point, r: f64, tol: f64) -> Result<GraphTransversality> {
    let d1 = w1.in_dim();
    let d2 = w2.in_dim();
    if x.dim() != d1 + d2 || w1.out_dim() != d2 || w2.out_dim() != d1 {
        return Err(Error::DimensionMismatch {
            expected: d1 + d2,
            found: x.dim(),
        });
    }
    let (x1, x2) = (x.slice(0, d1), x.slice(d1, d2));
    let distance = w1.value(&x1).dist(&x2).max(w2.value(&x2).dist(&x1));
    if distance > tol {
        return Err(Error::NotOnSet { distance });
    }
    let lip1 = w1.lip_within(&Ball::new(x1, r)?);
    let lip2 = w2.lip_within(&Ball::new(x2, r)?);
    Ok(GraphTransversality {
        lip1,
        lip2,
        verdict: lip_verdict(lip1.max(lip2)),
    })
}
