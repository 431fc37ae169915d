//! Local stable and unstable manifolds as Lipschitz graphs, computed by the
//! graph transform.
//!
//! The unstable manifold is the graph of `σ: E^u → E^s`, the fixed point of
//! `Tσ = (A_s σ + φ_s(I + σ)) ∘ (A_u + φ_u(I + σ))⁻¹`. The stable manifold
//! `E^s → E^u` is the unstable manifold of the inverse map, whose linear part
//! is `B⁻¹` and whose nonlinearity is evaluated by inversion.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::contraction::{max_iterations, observed_rate};
use crate::error::{Error, Result};
use crate::grid::{GraphFn, Grid};
use crate::hyperbolic::{HyperbolicLinear, Inverter};
use crate::linalg::{Matrix, Point};
use crate::lip::{estimate_lip, sup_norm, SamplingBudget};
use crate::lowdisc::Halton;
use crate::map::{FnMap, LipMap};
use crate::region::Ball;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Stable,
    Unstable,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Stable => "stable",
            Side::Unstable => "unstable",
        }
    }
}

/// `f = A + φ` near a fixed point `p`, in the frame of the splitting and
/// translated so that `p` sits at the origin:
/// `φ̂(v) = P⁻¹(φ(p + P·c(v)) + Ap - p)` with `c` the clamp onto `B_r`.
pub struct LocalSystem<'a> {
    pub linear: HyperbolicLinear,
    phi: &'a dyn LipMap,
    pub p: Point,
    pub radius: f64,
    offset: Point,
    /// Margin-inflated sampled `Lip(φ̂)` on `B_r`.
    pub lip_phi: f64,
}

impl<'a> LocalSystem<'a> {
    pub fn new(
        linear: HyperbolicLinear,
        phi: &'a dyn LipMap,
        p: Point,
        radius: f64,
        budget: &SamplingBudget,
        margin: f64,
    ) -> Result<Self> {
        let mut sys = LocalSystem::with_lip(linear, phi, p, radius, 0.0)?;
        let hat = FnMap::new(sys.dim(), |v: &Point| sys.phi_hat(v));
        let lip = estimate_lip(&hat, &Ball::new(Point::zeros(sys.dim()), radius)?, budget)?.value;
        sys.lip_phi = lip * margin;
        Ok(sys)
    }

    /// As [`LocalSystem::new`] with a known Lipschitz constant.
    pub fn with_lip(linear: HyperbolicLinear, phi: &'a dyn LipMap, p: Point, radius: f64, lip_phi: f64) -> Result<Self> {
        if phi.dim() != linear.dim() || p.dim() != linear.dim() {
            return Err(Error::DimensionMismatch {
                expected: linear.dim(),
                found: phi.dim(),
            });
        }
        let offset = linear.a.apply(&p) - p;
        Ok(LocalSystem {
            linear,
            phi,
            p,
            radius,
            offset,
            lip_phi,
        })
    }

    pub fn dim(&self) -> usize {
        self.linear.dim()
    }

    pub fn local_ball(&self) -> Ball {
        Ball::new(Point::zeros(self.dim()), self.radius).expect("radius validated")
    }

    pub fn to_local(&self, x: &Point) -> Point {
        self.linear.splitting.to_frame(&(*x - self.p))
    }

    pub fn from_local(&self, v: &Point) -> Point {
        self.p + self.linear.splitting.from_frame(v)
    }

    pub fn phi_hat(&self, v: &Point) -> Result<Point> {
        let c = self.local_ball().clamp(v);
        let x = self.from_local(&c);
        Ok(self.linear.splitting.to_frame(&(self.phi.eval(&x)? + self.offset)))
    }

    /// The local map `B v + φ̂(v)`.
    pub fn f_hat(&self, v: &Point) -> Result<Point> {
        Ok(self.linear.frame.apply(v) + self.phi_hat(v)?)
    }

    /// The local inverse, by the inversion contraction in the frame.
    pub fn f_hat_inv(&self, w: &Point, tol: f64) -> Result<Point> {
        let hat = FnMap::new(self.dim(), |v: &Point| self.phi_hat(v));
        let inv = Inverter::new(&self.linear.frame, &hat, None, self.lip_phi)?;
        let start = self.linear.frame_inv.apply(w);
        Ok(inv.invert(w, &start, 2.0 * self.radius, tol)?.point)
    }

    /// The graph problem whose solution is the manifold on `side`.
    pub fn problem(&'a self, side: Side, budget: &SamplingBudget, margin: f64) -> Result<GraphProblem<'a>> {
        let lin = &self.linear;
        match side {
            Side::Unstable => Ok(GraphProblem {
                dim_dom: lin.dim_u(),
                dim_rng: lin.dim_s(),
                dom_is_u: true,
                a_dom_inv: lin.a_u_inv,
                a_rng: lin.a_s,
                tau: lin.tau,
                lip_phi: self.lip_phi,
                radius: self.radius,
                phi: Box::new(move |v: &Point| self.phi_hat(v)),
            }),
            Side::Stable => {
                let b_inv = lin.frame_inv;
                let phi = move |w: &Point| -> Result<Point> { Ok(self.f_hat_inv(w, 1e-14)? - b_inv.apply(w)) };
                let probe = FnMap::new(self.dim(), phi);
                let lip = estimate_lip(&probe, &self.local_ball(), budget)?.value * margin;
                Ok(GraphProblem {
                    dim_dom: lin.dim_s(),
                    dim_rng: lin.dim_u(),
                    dom_is_u: false,
                    a_dom_inv: lin.a_s,
                    a_rng: lin.a_u_inv,
                    tau: lin.tau,
                    lip_phi: lip,
                    radius: self.radius,
                    phi: Box::new(phi),
                })
            }
        }
    }
}

/// The data of a graph transform in frame coordinates: an expanding block on
/// the domain subspace `E₁`, a contracting block on the range `E₂`, and the
/// nonlinearity of the full vector.
pub struct GraphProblem<'a> {
    pub dim_dom: usize,
    pub dim_rng: usize,
    /// `E₁ = E^u` (frame coordinates after the stable ones).
    pub dom_is_u: bool,
    pub a_dom_inv: Matrix,
    pub a_rng: Matrix,
    pub tau: f64,
    pub lip_phi: f64,
    pub radius: f64,
    pub phi: Box<dyn Fn(&Point) -> Result<Point> + 'a>,
}

impl GraphProblem<'_> {
    /// Frame vector with domain part `d` and range part `r`.
    pub fn embed(&self, d: &Point, r: &Point) -> Point {
        if self.dom_is_u {
            r.concat(d)
        } else {
            d.concat(r)
        }
    }

    /// Splits a frame vector into (domain, range) parts.
    pub fn parts(&self, v: &Point) -> (Point, Point) {
        if self.dom_is_u {
            (v.slice(self.dim_rng, self.dim_dom), v.slice(0, self.dim_rng))
        } else {
            (v.slice(0, self.dim_dom), v.slice(self.dim_dom, self.dim_rng))
        }
    }

    /// Proven contraction rate of the transform, `τ + 2 Lip φ`.
    pub fn rate_bound(&self) -> f64 {
        self.tau + 2.0 * self.lip_phi
    }

    pub fn grid(&self, n: usize) -> Result<Grid> {
        Grid::centered(self.dim_dom, self.radius, n)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformStep {
    pub graph: GraphFn,
    /// Interior nodes whose lookup of `σ(η)` was clamped.
    pub interior_clamps: usize,
    pub boundary_clamps: usize,
}

/// One application of the graph transform.
pub fn graph_transform_step(sigma: &GraphFn, prob: &GraphProblem<'_>, tol: f64) -> Result<TransformStep> {
    let grid = sigma.grid;
    let lip_sigma = sigma.lip().min(1.0);
    let inner_rate = prob.a_dom_inv.norm() * prob.lip_phi * (1.0 + lip_sigma);
    let inner_tol = 0.1 * tol;
    let max_iter = max_iterations(inner_rate.min(0.999), 2.0 * prob.radius, inner_tol);
    let mut values = Vec::with_capacity(grid.len());
    let mut interior_clamps = 0;
    let mut boundary_clamps = 0;
    for idx in 0..grid.len() {
        let xi = grid.node(idx);
        // Solve A_dom η + φ_dom(η + σ(η)) = ξ.
        let mut eta = prob.a_dom_inv.apply(&xi);
        let mut converged = false;
        for _ in 0..max_iter {
            let v = prob.embed(&eta, &sigma.value(&eta));
            let (pd, _) = prob.parts(&(prob.phi)(&v)?);
            let next = prob.a_dom_inv.apply(&(xi - pd));
            let d = next.dist(&eta);
            eta = next;
            if d <= inner_tol {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::InversionFailure { node: idx });
        }
        let (s_eta, clamped) = sigma.eval_flagged(&eta);
        if clamped {
            if grid.ring(idx) == 0 {
                boundary_clamps += 1;
            } else {
                interior_clamps += 1;
            }
        }
        let (_, pr) = prob.parts(&(prob.phi)(&prob.embed(&eta, &s_eta))?);
        values.push(prob.a_rng.apply(&s_eta) + pr);
    }
    Ok(TransformStep {
        graph: GraphFn { grid, values },
        interior_clamps,
        boundary_clamps,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifold {
    pub side: Side,
    pub graph: GraphFn,
    /// Sup-norm change of each transform step.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub rate_bound: f64,
    pub observed_rate: f64,
    /// `sup |Tσ* - σ*|` for the returned graph.
    pub invariance_defect: f64,
    pub lip: f64,
    pub boundary_clamps: usize,
}

/// Iterates the graph transform from `σ ≡ 0` until the sup change is at
/// most `tol`.
pub fn compute_manifold(prob: &GraphProblem<'_>, side: Side, grid_n: usize, tol: f64) -> Result<Manifold> {
    let grid = prob.grid(grid_n)?;
    let rate = prob.rate_bound();
    if rate >= 1.0 {
        return Err(Error::precondition("τ + 2 Lip(φ) must be below one"));
    }
    let max_iter = max_iterations(rate, 2.0 * prob.radius, tol);
    let mut sigma = GraphFn::zeros(grid, prob.dim_rng);
    let mut trace = Vec::new();
    for k in 0..max_iter {
        let step = graph_transform_step(&sigma, prob, tol)?;
        if step.interior_clamps > 0 {
            return Err(Error::BoundaryClamp {
                nodes: step.interior_clamps,
            });
        }
        let change = step.graph.sup_distance(&sigma);
        trace.push(change);
        sigma = step.graph;
        let lip = sigma.lip();
        if lip > 1.0 + tol {
            return Err(Error::LipBlowup { lip });
        }
        if change <= tol {
            let check = graph_transform_step(&sigma, prob, tol)?;
            return Ok(Manifold {
                side,
                invariance_defect: check.graph.sup_distance(&sigma),
                lip,
                observed_rate: observed_rate(&trace),
                graph: sigma,
                trace,
                iterations: k + 1,
                rate_bound: rate,
                boundary_clamps: check.boundary_clamps,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual: trace.last().copied().unwrap_or(f64::INFINITY),
    })
}

/// Embeds a graph point `(ξ, σ(ξ))` as a local frame vector.
pub fn graph_point(sys: &LocalSystem<'_>, side: Side, xi: &Point, value: &Point) -> Point {
    match side {
        Side::Unstable => value.concat(xi),
        Side::Stable => xi.concat(value),
    }
    .slice(0, sys.dim())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharacterizationReport {
    pub samples: usize,
    pub steps: usize,
    /// Largest per-step ratio `|v_{k+1}| / |v_k|` along the (backward for
    /// unstable, forward for stable) orbits.
    pub worst_decay_ratio: f64,
    pub decay_bound: f64,
    pub cone_exits: usize,
    pub region_exits: usize,
}

/// Checks the characterisation of manifold points: orbits in the decaying
/// direction stay in `U_r`, stay in the 1-cone about the manifold's
/// subspace, and shrink at rate at most `τ + Lip φ`. The distance of a
/// sampled point to the true manifold grows by `τ⁻¹` per step while the orbit
/// shrinks by `τ`, so `n_steps` should stay well below
/// `log(graph error) / (2 log τ)`.
pub fn verify_characterization(
    sys: &LocalSystem<'_>,
    manifold: &Manifold,
    n_steps: usize,
    samples: usize,
    seed: u64,
) -> Result<CharacterizationReport> {
    let g = &manifold.graph;
    let dd = g.in_dim();
    let r = g.grid.radius();
    let mut h = Halton::new(dd, seed);
    let mut u = [0.0; 3];
    let ds = sys.linear.dim_s();
    let mut worst: f64 = 0.0;
    let mut cone_exits = 0;
    let mut region_exits = 0;
    for _ in 0..samples {
        h.next_into(&mut u[..dd]);
        let mut xi = Point::zeros(dd);
        for i in 0..dd {
            xi[i] = (2.0 * u[i] - 1.0) * r;
        }
        let mut v = graph_point(sys, manifold.side, &xi, &g.value(&xi));
        for _ in 0..n_steps {
            let next = match manifold.side {
                Side::Unstable => sys.f_hat_inv(&v, 1e-14)?,
                Side::Stable => sys.f_hat(&v)?,
            };
            if v.norm() > 1e-12 {
                worst = worst.max(next.norm() / v.norm());
            }
            v = next;
            if v.norm() > r * (1.0 + 1e-12) {
                region_exits += 1;
                break;
            }
            let (vs, vu) = (v.slice(0, ds), v.slice(ds, sys.dim() - ds));
            let in_cone = match manifold.side {
                Side::Unstable => vs.norm() <= vu.norm() * (1.0 + 1e-9) + 1e-15,
                Side::Stable => vu.norm() <= vs.norm() * (1.0 + 1e-9) + 1e-15,
            };
            if !in_cone {
                cone_exits += 1;
                break;
            }
        }
    }
    Ok(CharacterizationReport {
        samples,
        steps: n_steps,
        worst_decay_ratio: worst,
        decay_bound: sys.linear.tau + sys.lip_phi,
        cone_exits,
        region_exits,
    })
}

/// First step at which the orbit of `v` (forward or backward) leaves `B_r`.
pub fn escape_step(sys: &LocalSystem<'_>, v: &Point, forward: bool, max_steps: usize) -> Result<Option<usize>> {
    let mut x = *v;
    for k in 1..=max_steps {
        x = if forward {
            sys.f_hat(&x)?
        } else {
            sys.f_hat_inv(&x, 1e-14)?
        };
        if x.norm() > sys.radius {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationRow {
    pub eta: f64,
    pub c0: f64,
    pub lip: f64,
    /// `‖φ_η - φ₀‖_C0 · margin / (1 - τ - γ)`.
    pub bound1: Option<f64>,
    /// `K_η / (τ⁻¹ - τ - 2γ - K_η)`; `None` when the denominator is not
    /// positive and the bound does not apply.
    pub bound2: Option<f64>,
    pub gamma: f64,
    pub k_eta: f64,
    pub phi_c0_distance: f64,
    pub fixed_point: Point,
}

impl PerturbationRow {
    pub fn bound_inapplicable(&self) -> bool {
        self.bound1.is_none() || self.bound2.is_none()
    }

    pub fn holds(&self) -> bool {
        self.bound1.is_none_or(|b| self.c0 <= b) && self.bound2.is_none_or(|b| self.lip <= b)
    }
}

/// Manifolds of a family `φ_η` compared against the base `φ₀`.
///
/// When the base manifold is not flat, every system is first sheared by
/// `(v_s, v_u) ↦ (v_s - σ₀(v_u), v_u)` (unstable side; the stable side is
/// symmetric), which makes `σ₀ ≡ 0` and leaves the perturbed graphs measured
/// relative to the base one.
#[allow(clippy::too_many_arguments)]
pub fn perturbation_study(
    base: &LocalSystem<'_>,
    family: &[(f64, &LocalSystem<'_>)],
    side: Side,
    grid_n: usize,
    tol: f64,
    budget: &SamplingBudget,
    margin: f64,
) -> Result<Vec<PerturbationRow>> {
    let base_prob = base.problem(side, budget, margin)?;
    let base_m = compute_manifold(&base_prob, side, grid_n, tol)?;
    let flat = base_m.graph.sup_norm() <= tol;
    let sigma0 = base_m.graph.clone();
    let ball = base.local_ball();
    let n = base.dim();
    let tau = base.linear.tau;

    let shear = |v: &Point, sign: f64| -> Point {
        if flat {
            return *v;
        }
        let (d, r) = base_prob.parts(v);
        base_prob.embed(&d, &(r - sigma0.value(&d) * sign))
    };
    // Nonlinearity of a sheared system: Φ ∘ F ∘ Φ⁻¹ - B.
    let sheared_phi = |sys: &LocalSystem<'_>, v: &Point| -> Result<Point> {
        let x = shear(v, -1.0);
        Ok(shear(&sys.f_hat(&x)?, 1.0) - sys.linear.frame.apply(v))
    };
    let phi0 = |v: &Point| sheared_phi(base, v);
    let rng_part = |p: &Point| base_prob.parts(p).1;

    let mut rows = Vec::new();
    for &(eta, sys) in family {
        let phi_eta = |v: &Point| sheared_phi(sys, v);
        let diff = FnMap::new(n, |v: &Point| Ok(phi_eta(v)? - phi0(v)?));
        let c0_diff = sup_norm(&diff, &ball, budget)?;
        let lip_eta = estimate_lip(&FnMap::new(n, phi_eta), &ball, budget)?.value;
        let lip_0 = estimate_lip(&FnMap::new(n, phi0), &ball, budget)?.value;
        let gamma = lip_eta.max(lip_0) * margin;
        let phi0_rng = FnMap::with_out_dim(n, base_prob.dim_rng, |v: &Point| Ok(rng_part(&phi0(v)?)));
        let diff_rng = FnMap::with_out_dim(n, base_prob.dim_rng, |v: &Point| Ok(rng_part(&(phi_eta(v)? - phi0(v)?))));
        let k_eta =
            sup_norm(&phi0_rng, &ball, budget)? + estimate_lip(&diff_rng, &ball, budget)?.value * margin;

        let lin = &sys.linear;
        let prob = match side {
            Side::Unstable => GraphProblem {
                dim_dom: lin.dim_u(),
                dim_rng: lin.dim_s(),
                dom_is_u: true,
                a_dom_inv: lin.a_u_inv,
                a_rng: lin.a_s,
                tau: lin.tau,
                lip_phi: lip_eta * margin,
                radius: sys.radius,
                phi: Box::new(phi_eta),
            },
            Side::Stable => {
                // Time reversal of the sheared system.
                let inv_sheared = move |w: &Point| -> Result<Point> {
                    let x = shear(w, -1.0);
                    let y = sys.f_hat_inv(&x, 1e-14)?;
                    Ok(shear(&y, 1.0) - lin.frame_inv.apply(w))
                };
                let lip_inv = estimate_lip(&FnMap::new(n, inv_sheared), &ball, budget)?.value * margin;
                GraphProblem {
                    dim_dom: lin.dim_s(),
                    dim_rng: lin.dim_u(),
                    dom_is_u: false,
                    a_dom_inv: lin.a_s,
                    a_rng: lin.a_u_inv,
                    tau: lin.tau,
                    lip_phi: lip_inv,
                    radius: sys.radius,
                    phi: Box::new(inv_sheared),
                }
            }
        };
        let m = compute_manifold(&prob, side, grid_n, tol)?;
        let den1 = 1.0 - tau - gamma;
        let den2 = 1.0 / tau - tau - 2.0 * gamma - k_eta;
        rows.push(PerturbationRow {
            eta,
            c0: m.graph.sup_norm(),
            lip: m.lip,
            bound1: (den1 > 0.0).then(|| c0_diff * margin / den1),
            bound2: (den2 > 0.0).then(|| k_eta / den2),
            gamma,
            k_eta,
            phi_c0_distance: c0_diff,
            fixed_point: sys.p,
        });
    }
    Ok(rows)
}
