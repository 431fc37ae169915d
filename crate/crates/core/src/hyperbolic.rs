//! Splittings, hyperbolic linear maps and L-hyperbolicity of `A + φ`,
//! together with the contraction solvers for fixed points and inversion.
//!
//! Computations happen in the frame of the splitting: with `P = [E^s | E^u]`
//! the linear part becomes `B = P⁻¹AP`, block diagonal with blocks `A_s` and
//! `A_u`, and all norms are maximum norms of frame coordinates.

use alloc::vec::Vec;

use crate::contraction::{iterate, max_iterations, Iteration};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Point};
use crate::lip::{estimate_lip, LipEstimate, SamplingBudget};
use crate::map::LipMap;
use crate::region::Ball;

/// Largest accepted condition number of the splitting basis.
pub const CONDITION_CAP: f64 = 1e8;
/// Tolerance on the off-diagonal blocks of `P⁻¹AP`.
pub const INVARIANCE_TOL: f64 = 1e-10;
/// Relative half-width of the band around a threshold in which a sampled
/// constant gives no verdict.
pub const INCONCLUSIVE_BAND: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Certified,
    Rejected,
    Inconclusive,
}

impl Verdict {
    /// Compares `value` against `threshold` with the inconclusive band.
    pub fn below(value: f64, threshold: f64) -> Verdict {
        if value >= threshold * (1.0 - INCONCLUSIVE_BAND) && value <= threshold * (1.0 + INCONCLUSIVE_BAND) {
            Verdict::Inconclusive
        } else if value < threshold {
            Verdict::Certified
        } else {
            Verdict::Rejected
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Certified => "certified",
            Verdict::Rejected => "rejected",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// A direct sum `E = E^s ⊕ E^u` given by bases of the two summands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Splitting {
    dim_s: usize,
    dim_u: usize,
    basis: Matrix,
    inverse: Matrix,
    condition: f64,
}

impl Splitting {
    pub fn new(stable: &[Point], unstable: &[Point]) -> Result<Splitting> {
        let cols: Vec<Point> = stable.iter().chain(unstable).copied().collect();
        let n = cols.first().map_or(0, |c| c.dim());
        if cols.len() != n || cols.iter().any(|c| c.dim() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: cols.len(),
            });
        }
        let basis = Matrix::from_columns(&cols);
        let inverse = basis.inverse()?;
        let condition = basis.norm() * inverse.norm();
        if condition > CONDITION_CAP {
            return Err(Error::IllConditioned { condition });
        }
        Ok(Splitting {
            dim_s: stable.len(),
            dim_u: unstable.len(),
            basis,
            inverse,
            condition,
        })
    }

    /// The splitting along coordinate axes; `stable_axes` lists `E^s`.
    pub fn coordinate(n: usize, stable_axes: &[usize]) -> Result<Splitting> {
        if stable_axes.iter().any(|&a| a >= n) {
            return Err(Error::invalid("stable axis out of range"));
        }
        let s: Vec<Point> = stable_axes.iter().map(|&a| Point::unit(n, a)).collect();
        let u: Vec<Point> = (0..n)
            .filter(|a| !stable_axes.contains(a))
            .map(|a| Point::unit(n, a))
            .collect();
        Splitting::new(&s, &u)
    }

    pub fn dim(&self) -> usize {
        self.dim_s + self.dim_u
    }

    pub fn dim_s(&self) -> usize {
        self.dim_s
    }

    pub fn dim_u(&self) -> usize {
        self.dim_u
    }

    /// `P`, whose columns are the stable then the unstable basis vectors.
    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn inverse(&self) -> &Matrix {
        &self.inverse
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// Frame coordinates `P⁻¹x`: stable coordinates first.
    pub fn to_frame(&self, x: &Point) -> Point {
        self.inverse.apply(x)
    }

    pub fn from_frame(&self, v: &Point) -> Point {
        self.basis.apply(v)
    }

    fn projection(&self, keep_stable: bool) -> Matrix {
        let n = self.dim();
        let mut d = Matrix::zeros(n, n);
        for i in 0..n {
            if (i < self.dim_s) == keep_stable {
                d.set(i, i, 1.0);
            }
        }
        self.basis.mul(&d).mul(&self.inverse)
    }

    /// `Π_s`, the projection onto `E^s` along `E^u`.
    pub fn proj_s(&self) -> Matrix {
        self.projection(true)
    }

    pub fn proj_u(&self) -> Matrix {
        self.projection(false)
    }

    /// Splits frame coordinates into `(v_s, v_u)`.
    pub fn split(&self, v: &Point) -> (Point, Point) {
        (v.slice(0, self.dim_s), v.slice(self.dim_s, self.dim_u))
    }

    pub fn join(&self, s: &Point, u: &Point) -> Point {
        s.concat(u)
    }
}

/// A hyperbolic linear isomorphism with its blocks, skewness and mininorm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperbolicLinear {
    pub a: Matrix,
    pub splitting: Splitting,
    /// `P⁻¹AP`.
    pub frame: Matrix,
    pub a_s: Matrix,
    pub a_u: Matrix,
    pub a_u_inv: Matrix,
    pub frame_inv: Matrix,
    pub tau: f64,
    pub m: f64,
}

impl HyperbolicLinear {
    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    pub fn dim_s(&self) -> usize {
        self.splitting.dim_s()
    }

    pub fn dim_u(&self) -> usize {
        self.splitting.dim_u()
    }

    /// `min{(1 - τ)/2, m(A)}`, the bound on `Lip(φ)`.
    pub fn threshold(&self) -> f64 {
        (0.5 * (1.0 - self.tau)).min(self.m)
    }
}

pub fn analyze_linear(a: &Matrix, splitting: &Splitting) -> Result<HyperbolicLinear> {
    if !a.is_square() || a.rows() != splitting.dim() {
        return Err(Error::DimensionMismatch {
            expected: splitting.dim(),
            found: a.rows(),
        });
    }
    a.inverse()?;
    let frame = splitting.inverse().mul(a).mul(splitting.basis());
    let (ds, du) = (splitting.dim_s(), splitting.dim_u());
    let defect = frame
        .block(0, ds, ds, du)
        .max_abs()
        .max(frame.block(ds, 0, du, ds).max_abs());
    if defect > INVARIANCE_TOL * frame.max_abs().max(1.0) {
        return Err(Error::NotInvariant { defect });
    }
    let a_s = frame.block(0, 0, ds, ds);
    let a_u = frame.block(ds, ds, du, du);
    let a_u_inv = a_u.inverse()?;
    let tau = a_s.norm().max(a_u_inv.norm());
    if tau >= 1.0 {
        return Err(Error::NotHyperbolic { tau });
    }
    let frame_inv = frame.inverse()?;
    Ok(HyperbolicLinear {
        a: *a,
        splitting: *splitting,
        frame,
        a_s,
        a_u,
        a_u_inv,
        frame_inv,
        tau,
        m: frame.mininorm(),
    })
}

/// `φ` seen in frame coordinates, with its argument clamped to `region`.
struct FramePhi<'a, M: ?Sized> {
    phi: &'a M,
    splitting: &'a Splitting,
    region: Ball,
}

impl<M: LipMap + ?Sized> LipMap for FramePhi<'_, M> {
    fn dim(&self) -> usize {
        self.phi.dim()
    }
    fn eval(&self, w: &Point) -> Result<Point> {
        let x = self.region.clamp(&self.splitting.from_frame(w));
        Ok(self.splitting.to_frame(&self.phi.eval(&x)?))
    }
}

/// Frame ball whose image under `P` lies in `region`.
fn frame_ball(splitting: &Splitting, region: &Ball) -> Result<Ball> {
    Ball::new(
        splitting.to_frame(&region.center()),
        region.radius() / splitting.basis().norm(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LHyperbolicCert {
    pub linear: HyperbolicLinear,
    pub region: Ball,
    /// Sampled `Lip(φ)` in frame coordinates.
    pub lip_phi: LipEstimate,
    pub threshold: f64,
    pub margin: f64,
    pub verdict: Verdict,
}

pub fn certify_l_hyperbolic<M: LipMap + ?Sized>(
    linear: &HyperbolicLinear,
    phi: &M,
    region: &Ball,
    budget: &SamplingBudget,
    margin: f64,
) -> Result<LHyperbolicCert> {
    let fphi = FramePhi {
        phi,
        splitting: &linear.splitting,
        region: *region,
    };
    let lip_phi = estimate_lip(&fphi, &frame_ball(&linear.splitting, region)?, budget)?;
    let threshold = linear.threshold();
    Ok(LHyperbolicCert {
        linear: *linear,
        region: *region,
        lip_phi,
        threshold,
        margin,
        verdict: Verdict::below(lip_phi.value * margin, threshold),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoint {
    pub point: Point,
    pub iteration: Iteration,
    /// `τ + margin·Lip(φ)`, the proven contraction rate.
    pub rate_bound: f64,
    pub observed_rate: f64,
    /// `|f(p) - p|`.
    pub residual: f64,
}

/// Fixed point of `A + φ` in `region` by the contraction
/// `v_s ← A_s v_s + φ_s(v)`, `v_u ← A_u⁻¹(v_u - φ_u(v))` in frame coordinates.
pub fn find_fixed_point<M: LipMap + ?Sized>(
    linear: &HyperbolicLinear,
    phi: &M,
    lip_phi: f64,
    region: &Ball,
    tol: f64,
) -> Result<FixedPoint> {
    let sp = &linear.splitting;
    let fphi = FramePhi {
        phi,
        splitting: sp,
        region: *region,
    };
    let rate = linear.tau + lip_phi;
    if rate >= 1.0 {
        return Err(Error::precondition("τ + Lip(φ) must be below one"));
    }
    let fb = frame_ball(sp, region)?;
    let t = |v: &Point| -> Result<Point> {
        let (vs, vu) = sp.split(v);
        let (ps, pu) = sp.split(&fphi.eval(v)?);
        Ok(sp.join(&(linear.a_s.apply(&vs) + ps), &linear.a_u_inv.apply(&(vu - pu))))
    };
    let w0 = fb.center();
    let first = t(&w0)?.dist(&w0);
    if first > (1.0 - rate) * fb.radius() {
        return Err(Error::precondition(alloc::format!(
            "offset {first:e} exceeds (1 - τ - Lip φ)·r = {:e}",
            (1.0 - rate) * fb.radius()
        )));
    }
    let max_iter = max_iterations(rate, 2.0 * fb.radius(), tol);
    let it = iterate(w0, max_iter, tol, t)?;
    let point = sp.from_frame(&it.point);
    let fp = linear.a.apply(&point) + phi.eval(&region.clamp(&point))?;
    Ok(FixedPoint {
        point,
        rate_bound: rate,
        observed_rate: it.observed_rate(),
        residual: fp.dist(&point),
        iteration: it,
    })
}

/// Solves `A x + φ(x) = z` by `x ← A⁻¹(z - φ(x))`. The argument of `φ` is
/// clamped to `region`, which extends `φ` with the same Lipschitz constant.
#[derive(Clone, Copy)]
pub struct Inverter<'a, M: ?Sized> {
    a_inv: Matrix,
    phi: &'a M,
    region: Option<Ball>,
    rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Inversion {
    pub point: Point,
    pub iterations: usize,
    pub steps: Vec<f64>,
    /// `|A x + φ(x) - z|` at the returned point.
    pub residual: f64,
    /// The solution lies outside the clamping region.
    pub clamped: bool,
}

impl<'a, M: LipMap + ?Sized> Inverter<'a, M> {
    /// `lip_phi` is the (margin-inflated) Lipschitz constant of `φ`; it must
    /// be below `m(A)`.
    pub fn new(a: &Matrix, phi: &'a M, region: Option<Ball>, lip_phi: f64) -> Result<Self> {
        let a_inv = a.inverse()?;
        let m = 1.0 / a_inv.norm();
        if lip_phi >= m {
            return Err(Error::precondition(alloc::format!(
                "Lip(φ) = {lip_phi} is not below m(A) = {m}"
            )));
        }
        Ok(Inverter {
            a_inv,
            phi,
            region,
            rate: lip_phi / m,
        })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    fn phi_at(&self, x: &Point) -> Result<Point> {
        match &self.region {
            Some(r) => self.phi.eval(&r.clamp(x)),
            None => self.phi.eval(x),
        }
    }

    pub fn invert(&self, z: &Point, start: &Point, diam: f64, tol: f64) -> Result<Inversion> {
        let max_iter = max_iterations(self.rate, diam.max(z.norm()).max(tol), tol);
        let mut x = *start;
        let mut phx = self.phi_at(&x)?;
        let mut steps = Vec::new();
        for k in 0..max_iter {
            let y = self.a_inv.apply(&(*z - phx));
            let phy = self.phi_at(&y)?;
            steps.push(y.dist(&x));
            let residual = phy.dist(&phx);
            x = y;
            phx = phy;
            if residual <= tol {
                let clamped = self.region.is_some_and(|r| !r.contains(&x));
                return Ok(Inversion {
                    point: x,
                    iterations: k + 1,
                    steps,
                    residual,
                    clamped,
                });
            }
        }
        Err(Error::NoConvergence {
            iterations: max_iter,
            residual: steps.last().copied().unwrap_or(f64::INFINITY),
        })
    }
}

/// One-shot inversion of `A + φ` at `z`, starting from the region center.
pub fn invert_at<M: LipMap + ?Sized>(
    a: &Matrix,
    phi: &M,
    lip_phi: f64,
    z: &Point,
    region: &Ball,
    tol: f64,
) -> Result<Inversion> {
    Inverter::new(a, phi, Some(*region), lip_phi)?.invert(z, &region.center(), 2.0 * region.radius(), tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsolationReport {
    pub distance: f64,
    /// First step (forward, backward) at which the orbit of `q` left the
    /// region, if it did.
    pub forward_escape: Option<usize>,
    pub backward_escape: Option<usize>,
    /// `(τ + Lip φ)^n · diam`, the distance bound for orbits that stay.
    pub bound: f64,
    /// Either the orbit escaped, or `q` is within the bound of `p`.
    pub consistent: bool,
    /// Fixed points of `A + φ` found by an independent sweep of the region.
    pub sweep: Vec<Point>,
    pub unique: bool,
}

/// Checks that `p` is the only fixed point in `region`: orbits of `q` that
/// stay `n_steps` forward and backward must be `(τ + Lip φ)^n`-close to `p`,
/// and a grid sweep of the displacement must find `p` alone.
#[allow(clippy::too_many_arguments)]
pub fn isolation_check<M: LipMap + ?Sized>(
    linear: &HyperbolicLinear,
    phi: &M,
    lip_phi: f64,
    p: &Point,
    q: &Point,
    region: &Ball,
    n_steps: usize,
    sweep_nodes: usize,
) -> Result<IsolationReport> {
    let f = |x: &Point| -> Result<Point> { Ok(linear.a.apply(x) + phi.eval(&region.clamp(x))?) };
    let inv = Inverter::new(&linear.a, phi, Some(*region), lip_phi)?;
    let mut forward_escape = None;
    let mut x = *q;
    for k in 1..=n_steps {
        x = f(&x)?;
        if !region.contains(&x) {
            forward_escape = Some(k);
            break;
        }
    }
    let mut backward_escape = None;
    let mut x = *q;
    for k in 1..=n_steps {
        x = inv.invert(&x, &x, 2.0 * region.radius(), 1e-14)?.point;
        if !region.contains(&x) {
            backward_escape = Some(k);
            break;
        }
    }
    let rate = linear.tau + lip_phi;
    let bound = libm::pow(rate, n_steps as f64) * 2.0 * region.radius() * linear.splitting.condition();
    let distance = q.dist(p);
    let consistent = forward_escape.is_some() || backward_escape.is_some() || distance <= bound;
    let fmap = crate::map::FnMap::new(p.dim(), f);
    let sweep = sweep_fixed_points(&fmap, region, sweep_nodes, 1e-9)?;
    let unique = sweep.len() == 1 && sweep[0].dist(p) <= 1e-6 * (1.0 + p.norm());
    Ok(IsolationReport {
        distance,
        forward_escape,
        backward_escape,
        bound,
        consistent,
        sweep,
        unique,
    })
}

/// Fixed points of `f` in `region` by a grid sweep of the displacement
/// `g(x) = f(x) - x`. In one dimension roots are bracketed by sign changes
/// and tangential roots found by golden-section search on `|g|`; in higher
/// dimensions local minima of `|g|` are polished by Newton's method with a
/// difference Jacobian. Points with `|g| > tol` are discarded.
pub fn sweep_fixed_points<M: LipMap + ?Sized>(f: &M, region: &Ball, nodes: usize, tol: f64) -> Result<Vec<Point>> {
    let nodes = nodes.max(3);
    if region.dim() == 1 {
        let g = |x: f64| -> Result<f64> { Ok(f.eval(&Point::from_slice(&[x]))?[0] - x) };
        let lo = region.center()[0] - region.radius();
        let hi = region.center()[0] + region.radius();
        let roots = roots_1d(g, lo, hi, nodes, tol)?;
        return Ok(roots.into_iter().map(|r| Point::from_slice(&[r])).collect());
    }
    sweep_nd(f, region, nodes, tol)
}

/// Roots of a scalar function on `[lo, hi]`, sign changes and touching zeros.
pub fn roots_1d<G>(g: G, lo: f64, hi: f64, nodes: usize, tol: f64) -> Result<Vec<f64>>
where
    G: Fn(f64) -> Result<f64>,
{
    let h = (hi - lo) / (nodes - 1) as f64;
    let xs: Vec<f64> = (0..nodes)
        .map(|i| if i == nodes - 1 { hi } else { lo + h * i as f64 })
        .collect();
    let gs = xs.iter().map(|&x| g(x)).collect::<Result<Vec<_>>>()?;
    let scale = hi.abs().max(lo.abs()).max(1.0);
    let mut roots: Vec<f64> = Vec::new();
    let push = |r: f64, roots: &mut Vec<f64>| {
        if !roots.iter().any(|&q| (q - r).abs() <= 1e-7 * scale) {
            roots.push(r);
        }
    };
    for i in 0..nodes {
        if gs[i] == 0.0 {
            push(xs[i], &mut roots);
        }
    }
    for i in 0..nodes - 1 {
        if gs[i] != 0.0 && gs[i + 1] != 0.0 && (gs[i] < 0.0) != (gs[i + 1] < 0.0) {
            let (mut a, mut b, mut ga) = (xs[i], xs[i + 1], gs[i]);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                let gm = g(m)?;
                if gm == 0.0 {
                    a = m;
                    b = m;
                    break;
                }
                if (gm < 0.0) == (ga < 0.0) {
                    a = m;
                    ga = gm;
                } else {
                    b = m;
                }
            }
            let r = 0.5 * (a + b);
            // A sign change across a jump is not a root.
            if g(r)?.abs() <= tol {
                push(r, &mut roots);
            }
        }
    }
    for i in 1..nodes - 1 {
        let local_min = gs[i].abs() <= gs[i - 1].abs() && gs[i].abs() <= gs[i + 1].abs();
        let same_sign = (gs[i - 1] < 0.0) == (gs[i] < 0.0) && (gs[i] < 0.0) == (gs[i + 1] < 0.0);
        if local_min && same_sign && gs[i] != 0.0 {
            let r = golden_min(|x| Ok(g(x)?.abs()), xs[i - 1], xs[i + 1])?;
            if g(r)?.abs() <= tol {
                push(r, &mut roots);
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    Ok(roots)
}

/// Golden-section minimiser on `[a, b]`.
pub fn golden_min<G>(g: G, mut a: f64, mut b: f64) -> Result<f64>
where
    G: Fn(f64) -> Result<f64>,
{
    let r = 0.5 * (libm::sqrt(5.0) - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut gc, mut gd) = (g(c)?, g(d)?);
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * (a.abs() + b.abs()).max(1e-300) {
            break;
        }
        if gc <= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - r * (b - a);
            gc = g(c)?;
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + r * (b - a);
            gd = g(d)?;
        }
    }
    let m = 0.5 * (a + b);
    let candidates = [(g(m)?, m), (gc, c), (gd, d)];
    Ok(candidates
        .iter()
        .fold(candidates[0], |best, c| if c.0 < best.0 { *c } else { best })
        .1)
}

fn sweep_nd<M: LipMap + ?Sized>(f: &M, region: &Ball, nodes: usize, tol: f64) -> Result<Vec<Point>> {
    let n = region.dim();
    let lo = region.to_rect().lo;
    let h = 2.0 * region.radius() / (nodes - 1) as f64;
    let total = nodes.pow(n as u32);
    let node = |mut idx: usize| -> Point {
        let mut p = lo;
        for a in (0..n).rev() {
            p[a] += h * (idx % nodes) as f64;
            idx /= nodes;
        }
        p
    };
    let disp = |x: &Point| -> Result<f64> { Ok(f.eval(x)?.dist(x)) };
    let values = (0..total).map(|i| disp(&node(i))).collect::<Result<Vec<_>>>()?;
    let mut found: Vec<Point> = Vec::new();
    for i in 0..total {
        let mut is_min = true;
        let mut stride = 1;
        for a in (0..n).rev() {
            let k = (i / stride) % nodes;
            if k > 0 && values[i - stride] < values[i] {
                is_min = false;
            }
            if k + 1 < nodes && values[i + stride] < values[i] {
                is_min = false;
            }
            let _ = a;
            stride *= nodes;
        }
        if !is_min {
            continue;
        }
        if let Some(x) = newton(f, &node(i), region, tol)? {
            if !found.iter().any(|q| q.dist(&x) <= 1e-6 * (1.0 + x.norm())) {
                found.push(x);
            }
        }
    }
    Ok(found)
}

fn newton<M: LipMap + ?Sized>(f: &M, start: &Point, region: &Ball, tol: f64) -> Result<Option<Point>> {
    let n = start.dim();
    let g = |x: &Point| -> Result<Point> { Ok(f.eval(x)? - *x) };
    let mut x = *start;
    for _ in 0..60 {
        let gx = g(&x)?;
        if gx.norm() <= 0.01 * tol {
            break;
        }
        let mut jac = Matrix::zeros(n, n);
        for j in 0..n {
            let e = 1e-7 * (1.0 + x[j].abs());
            let mut xp = x;
            xp[j] += e;
            let col = (g(&region.clamp(&xp))? - gx) * (1.0 / e);
            for i in 0..n {
                jac.set(i, j, col[i]);
            }
        }
        let Ok(ji) = jac.inverse() else {
            return Ok(None);
        };
        x = region.clamp(&(x - ji.apply(&gx)));
    }
    Ok((g(&x)?.norm() <= tol).then_some(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::MapSpec;

    #[test]
    fn diagonal_blocks() {
        let sp = Splitting::coordinate(2, &[0]).unwrap();
        let h = analyze_linear(&Matrix::diag(&[0.5, 2.0]), &sp).unwrap();
        assert_eq!(h.tau, 0.5);
        assert_eq!(h.m, 0.5);
        assert_eq!(h.threshold(), 0.25);
        let h = analyze_linear(&Matrix::diag(&[0.9, 1.1]), &sp).unwrap();
        assert!((h.tau - 1.0 / 1.1).abs() < 1e-15);
    }

    #[test]
    fn coupling_breaks_invariance() {
        let sp = Splitting::coordinate(2, &[0]).unwrap();
        let a = Matrix::from_rows(&[&[0.5, 0.1], &[0.0, 2.0]]).unwrap();
        assert!(matches!(analyze_linear(&a, &sp), Err(Error::NotInvariant { .. })));
        let a = Matrix::diag(&[0.5, 0.9]);
        assert!(matches!(analyze_linear(&a, &sp), Err(Error::NotHyperbolic { .. })));
    }

    #[test]
    fn projections_are_complementary() {
        let sp = Splitting::new(&[Point::from_slice(&[1.0, 1.0])], &[Point::from_slice(&[0.0, 1.0])]).unwrap();
        let ps = sp.proj_s();
        let pu = sp.proj_u();
        let sum = ps.mul(&Matrix::identity(2));
        for i in 0..2 {
            for j in 0..2 {
                let id = if i == j { 1.0 } else { 0.0 };
                assert!((sum.get(i, j) + pu.get(i, j) - id).abs() < 1e-15);
                assert!((ps.mul(&ps).get(i, j) - ps.get(i, j)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn inconclusive_band() {
        assert_eq!(Verdict::below(0.21, 0.25), Verdict::Certified);
        assert_eq!(Verdict::below(0.25, 0.25), Verdict::Inconclusive);
        assert_eq!(Verdict::below(0.3, 0.25), Verdict::Rejected);
    }

    #[test]
    fn tangential_roots_are_found() {
        let dom = Ball::interval(-1.0, 2.0).unwrap();
        let f = MapSpec::parse_pieces(
            dom,
            &[
                ("x < 0", &["2*x"]),
                ("x < 0.1", &["0.1*x"]),
                ("x <= 1", &["x^2"]),
                ("true", &["0.5*x+0.5"]),
            ],
        )
        .unwrap();
        let pts = sweep_fixed_points(&f, &dom, 301, 1e-9).unwrap();
        assert_eq!(pts.len(), 2, "{pts:?}");
        assert!(pts[0][0].abs() < 1e-9 && (pts[1][0] - 1.0).abs() < 1e-9);
    }
}
