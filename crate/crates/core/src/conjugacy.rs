//! Linearising conjugacy `h ∘ f = A ∘ h`, `h = I + ψ`, by the functional
//! contraction
//! `ψ_s ← (A_s ψ_s - φ_s) ∘ f⁻¹`, `ψ_u ← A_u⁻¹(φ_u + ψ_u ∘ f)`
//! in the local frame of a [`LocalSystem`].

use alloc::vec::Vec;

use crate::contraction::{max_iterations, observed_rate};
use crate::error::{Error, Result};
use crate::grid::{GraphFn, Grid};
use crate::linalg::Point;
use crate::lowdisc::Halton;
use crate::manifolds::{graph_point, LocalSystem, Manifold};

/// Largest share of core nodes whose lookups may leave the padded grid.
pub const MAX_FLAGGED_FRACTION: f64 = 0.05;

/// `ψ` on a grid padded around the core `U_r`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundedField {
    pub field: GraphFn,
    pub core: Grid,
}

impl BoundedField {
    pub fn psi(&self, v: &Point) -> Point {
        self.field.value(v)
    }

    pub fn h(&self, v: &Point) -> Point {
        *v + self.psi(v)
    }

    /// Sup of `|ψ|` over the core nodes.
    pub fn sup_norm(&self) -> f64 {
        self.core.nodes().fold(0.0, |m, x| m.max(self.psi(&x).norm()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Conjugacy {
    pub psi: BoundedField,
    pub iterations: usize,
    /// Sup change of `ψ` per iteration.
    pub trace: Vec<f64>,
    /// Core residual `sup |h(f(x)) - B h(x)|` after each iteration.
    pub residual_trace: Vec<f64>,
    pub residual: f64,
    pub rate_bound: f64,
    pub observed_rate: f64,
    pub pad: usize,
    /// Core nodes with a lookup outside the padded grid.
    pub flagged_core: usize,
    pub flagged_fraction: f64,
}

fn core_residual(sys: &LocalSystem<'_>, field: &BoundedField, images: &[(Point, usize)]) -> Result<f64> {
    let b = &sys.linear.frame;
    let mut worst: f64 = 0.0;
    for &(fx, idx) in images {
        let x = field.field.grid.node(idx);
        let r = field.h(&fx) - b.apply(&field.h(&x));
        worst = worst.max(r.norm());
    }
    Ok(worst)
}

/// Solves for `ψ` on an `grid_n`-per-axis core grid over the local ball.
/// `pad` extra node rings are added so that `f` and `f⁻¹` of core nodes
/// land inside the grid; `None` picks the smallest such padding.
pub fn solve_conjugacy(sys: &LocalSystem<'_>, grid_n: usize, tol: f64, pad: Option<usize>) -> Result<Conjugacy> {
    let n = sys.dim();
    let core = Grid::centered(n, sys.radius, grid_n)?;
    let h = core.spacing();
    let pad = match pad {
        Some(p) => p,
        None => {
            let mut reach: f64 = sys.radius;
            for x in core.nodes() {
                reach = reach.max(sys.f_hat(&x)?.norm()).max(sys.f_hat_inv(&x, 1e-14)?.norm());
            }
            libm::ceil((reach - sys.radius) / h) as usize + 1
        }
    };
    let grid = core.padded(pad);
    let inside = |y: &Point| grid.ball().contains(y);

    // Images, preimages and the nonlinearity at every node are fixed.
    let mut fwd = Vec::with_capacity(grid.len());
    let mut bwd = Vec::with_capacity(grid.len());
    let mut phi_at_fwd = Vec::with_capacity(grid.len());
    let mut phi_at_bwd = Vec::with_capacity(grid.len());
    let mut flagged_core = 0;
    let mut core_images = Vec::new();
    for idx in 0..grid.len() {
        let x = grid.node(idx);
        let fx = sys.f_hat(&x)?;
        let bx = sys.f_hat_inv(&x, 1e-14)?;
        if grid.ring(idx) >= pad && (!inside(&fx) || !inside(&bx)) {
            flagged_core += 1;
        }
        if grid.ring(idx) >= pad {
            core_images.push((fx, idx));
        }
        phi_at_fwd.push(sys.phi_hat(&x)?);
        phi_at_bwd.push(sys.phi_hat(&bx)?);
        fwd.push(fx);
        bwd.push(bx);
    }
    let flagged_fraction = flagged_core as f64 / core.len() as f64;
    if flagged_fraction >= MAX_FLAGGED_FRACTION {
        return Err(Error::BoundaryClamp { nodes: flagged_core });
    }

    let lin = &sys.linear;
    let ds = lin.dim_s();
    let du = lin.dim_u();
    let rate = lin.tau;
    let max_iter = max_iterations(rate, 2.0 * sys.radius, tol);
    let mut field = BoundedField {
        field: GraphFn::zeros(grid, n),
        core,
    };
    let mut trace = Vec::new();
    let mut residual_trace = Vec::new();
    for k in 0..max_iter {
        let mut values = Vec::with_capacity(grid.len());
        for idx in 0..grid.len() {
            let pb = field.psi(&bwd[idx]);
            let pf = field.psi(&fwd[idx]);
            let ps = lin.a_s.apply(&pb.slice(0, ds)) - phi_at_bwd[idx].slice(0, ds);
            let pu = lin.a_u_inv.apply(&(phi_at_fwd[idx].slice(ds, du) + pf.slice(ds, du)));
            values.push(ps.concat(&pu));
        }
        let next = GraphFn { grid, values };
        let change = next.sup_distance(&field.field);
        field.field = next;
        trace.push(change);
        residual_trace.push(core_residual(sys, &field, &core_images)?);
        if change <= tol {
            return Ok(Conjugacy {
                residual: *residual_trace.last().expect("one iteration ran"),
                observed_rate: observed_rate(&trace),
                psi: field,
                iterations: k + 1,
                trace,
                residual_trace,
                rate_bound: rate,
                pad,
                flagged_core,
                flagged_fraction,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual: trace.last().copied().unwrap_or(f64::INFINITY),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitCheck {
    pub starts: usize,
    /// Orbit steps compared, over all starts.
    pub steps: usize,
    /// Largest `|h(f^k x) - B^k h(x)|`.
    pub max_error: f64,
}

/// Compares `h(f^k(x))` with `B^k h(x)` for starts in `B_{r/2}` and every
/// `k ≤ horizon` with the orbit still inside `B_r`.
pub fn orbit_conjugation(sys: &LocalSystem<'_>, conj: &Conjugacy, starts: usize, horizon: usize, seed: u64) -> Result<OrbitCheck> {
    let n = sys.dim();
    let mut hal = Halton::new(n, seed);
    let mut u = [0.0; 3];
    let mut max_error: f64 = 0.0;
    let mut steps = 0;
    let b = &sys.linear.frame;
    for _ in 0..starts {
        hal.next_into(&mut u[..n]);
        let mut x = Point::zeros(n);
        for i in 0..n {
            x[i] = (u[i] - 0.5) * sys.radius;
        }
        let mut lin = conj.psi.h(&x);
        for _ in 0..horizon {
            x = sys.f_hat(&x)?;
            if x.norm() > sys.radius {
                break;
            }
            lin = b.apply(&lin);
            max_error = max_error.max(conj.psi.h(&x).dist(&lin));
            steps += 1;
        }
    }
    Ok(OrbitCheck {
        starts,
        steps,
        max_error,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConjugacyReport {
    /// Largest distance of `h(W^s)` from `E^s`, over sampled graph points.
    pub stable_deviation: Option<f64>,
    pub unstable_deviation: Option<f64>,
    /// Closest pair of `h`-images of distinct core nodes.
    pub min_image_separation: f64,
    pub injective: bool,
    pub orbit: OrbitCheck,
}

/// Checks that `h` straightens the computed manifolds onto the linear
/// subspaces and separates core nodes.
pub fn conjugacy_report(
    sys: &LocalSystem<'_>,
    conj: &Conjugacy,
    manifolds: &[&Manifold],
    samples: usize,
    horizon: usize,
) -> Result<ConjugacyReport> {
    let ds = sys.linear.dim_s();
    let du = sys.linear.dim_u();
    let mut stable_deviation = None;
    let mut unstable_deviation = None;
    for m in manifolds {
        let g = &m.graph;
        let mut worst: f64 = 0.0;
        let step = (g.grid.len() / samples.max(1)).max(1);
        for idx in (0..g.grid.len()).step_by(step) {
            let xi = g.grid.node(idx);
            let hv = conj.psi.h(&graph_point(sys, m.side, &xi, &g.values[idx]));
            let off = match m.side {
                crate::manifolds::Side::Stable => hv.slice(ds, du).norm(),
                crate::manifolds::Side::Unstable => hv.slice(0, ds).norm(),
            };
            worst = worst.max(off);
        }
        match m.side {
            crate::manifolds::Side::Stable => stable_deviation = Some(worst),
            crate::manifolds::Side::Unstable => unstable_deviation = Some(worst),
        }
    }
    let images: Vec<Point> = conj.psi.core.nodes().map(|x| conj.psi.h(&x)).collect();
    let mut min_sep = f64::INFINITY;
    for i in 0..images.len() {
        for j in i + 1..images.len() {
            min_sep = min_sep.min(images[i].dist(&images[j]));
        }
    }
    Ok(ConjugacyReport {
        stable_deviation,
        unstable_deviation,
        min_image_separation: min_sep,
        injective: min_sep > 1e-12,
        orbit: orbit_conjugation(sys, conj, samples, horizon, 0)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperbolic::{analyze_linear, Splitting};
    use crate::linalg::Matrix;
    use crate::map::MapSpec;
    use crate::region::Ball;

    #[test]
    fn linear_system_has_identity_conjugacy() {
        let lin = analyze_linear(&Matrix::diag(&[0.5, 2.0]), &Splitting::coordinate(2, &[0]).unwrap()).unwrap();
        let zero = MapSpec::expr(Ball::new(Point::zeros(2), 4.0).unwrap(), &["0", "0"]).unwrap();
        let sys = LocalSystem::with_lip(lin, &zero, Point::zeros(2), 1.0, 0.0).unwrap();
        let c = solve_conjugacy(&sys, 9, 1e-12, None).unwrap();
        assert!(c.psi.field.values.iter().all(|v| v.norm() == 0.0));
        assert_eq!(c.residual, 0.0);
        assert_eq!(c.flagged_core, 0);
    }
}
