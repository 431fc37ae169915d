//! Numerical experiments around saddles: convergence of iterated disks to
//! the unstable manifold, symbolic dynamics of horseshoes, and composition of
//! heteroclinic connections.
//!
//! Disks and manifolds live in the local frame of a [`LocalSystem`] (stable
//! coordinates first).

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{GraphFn, Grid};
use crate::interval::IBox;
use crate::linalg::{Matrix, Point};
use crate::lip::SamplingBudget;
use crate::manifolds::{LocalSystem, Manifold, Side};
use crate::map::{LipMap, MapSpec};
use crate::region::Rect;
use crate::transversal::{check_hypotheses, find_intersection, HypothesisReport, TransversalityCert, TransversalityProblem};

/// A disk transverse to the manifold of the opposite side: the graph of
/// `d` over a box of the `side` subspace, placed at `anchor`. For
/// `Side::Unstable` the disk is `t ↦ (anchor_s + d(t), anchor_u + t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiskSpec {
    pub side: Side,
    pub anchor: Point,
    pub graph: GraphFn,
}

impl DiskSpec {
    pub fn new(sys: &LocalSystem<'_>, side: Side, anchor: Point, graph: GraphFn) -> Result<DiskSpec> {
        let (dd, dr) = dims(sys, side);
        if anchor.dim() != sys.dim() || graph.in_dim() != dd || graph.out_dim() != dr {
            return Err(Error::DimensionMismatch {
                expected: dd,
                found: graph.in_dim(),
            });
        }
        let lip = graph.lip();
        if lip >= 1.0 {
            return Err(Error::precondition("disk graph must have Lipschitz constant below 1"));
        }
        Ok(DiskSpec { side, anchor, graph })
    }

    /// The local piece of a computed manifold as a disk through the origin.
    pub fn from_manifold(m: &Manifold) -> DiskSpec {
        let dim = m.graph.in_dim() + m.graph.out_dim();
        DiskSpec {
            side: m.side,
            anchor: Point::zeros(dim),
            graph: m.graph.clone(),
        }
    }

    fn point(&self, t: &Point) -> Point {
        let d = self.graph.value(t);
        let v = match self.side {
            Side::Unstable => d.concat(t),
            Side::Stable => t.concat(&d),
        };
        self.anchor + v
    }
}

fn dims(sys: &LocalSystem<'_>, side: Side) -> (usize, usize) {
    let (ds, du) = (sys.linear.dim_s(), sys.linear.dim_u());
    match side {
        Side::Unstable => (du, ds),
        Side::Stable => (ds, du),
    }
}

fn split_dom(side: Side, ds: usize, v: &Point) -> Point {
    match side {
        Side::Unstable => v.slice(ds, v.dim() - ds),
        Side::Stable => v.slice(0, ds),
    }
}

fn split_rng(side: Side, ds: usize, v: &Point) -> Point {
    match side {
        Side::Unstable => v.slice(0, ds),
        Side::Stable => v.slice(ds, v.dim() - ds),
    }
}

fn det(m: &Matrix) -> f64 {
    match m.rows() {
        1 => m.get(0, 0),
        2 => m.get(0, 0) * m.get(1, 1) - m.get(0, 1) * m.get(1, 0),
        _ => {
            let g = |i, j| m.get(i, j);
            g(0, 0) * (g(1, 1) * g(2, 2) - g(1, 2) * g(2, 1)) - g(0, 1) * (g(1, 0) * g(2, 2) - g(1, 2) * g(2, 0))
                + g(0, 2) * (g(1, 0) * g(2, 1) - g(1, 1) * g(2, 0))
        }
    }
}

/// The image `f^n(D)` (unstable disks) or `f^{-n}(D)` (stable disks),
/// written again as a graph over the disk's subspace on `window`.
#[derive(Debug, Clone, PartialEq)]
pub struct Regraph {
    pub graph: GraphFn,
    /// Largest number of chord-Newton steps at any window node.
    pub newton_steps: usize,
}

/// Pulls every window node back to a disk parameter by chord-Newton on
/// `t ↦ Π F^{±n}(D(t))` with a finite-difference Jacobian, then reads off
/// the other coordinates. Fails with `RegraphFailure` when a node has no
/// preimage on the disk or the image folds over the window.
pub fn regraph(sys: &LocalSystem<'_>, disk: &DiskSpec, n: usize, window: &Grid, tol: f64) -> Result<Regraph> {
    let ds = sys.linear.dim_s();
    let (dd, _) = dims(sys, disk.side);
    let fail = || Err(Error::RegraphFailure { step: n });
    let push = |v: &Point| -> Result<Point> {
        let mut x = *v;
        for _ in 0..n {
            x = match disk.side {
                Side::Unstable => sys.f_hat(&x)?,
                Side::Stable => sys.f_hat_inv(&x, 1e-15)?,
            };
        }
        Ok(x)
    };
    let gain_inv = match disk.side {
        Side::Unstable => sys.linear.a_u_inv.pow(n),
        Side::Stable => sys.linear.a_s.pow(n),
    };
    let anchor_dom = split_dom(disk.side, ds, &disk.anchor);
    let param = disk.graph.grid.ball();
    let slack = param.radius() * 1e-12;
    let w = window.radius().max(1e-300);
    let eval = |t: &Point| -> Result<Option<Point>> {
        let c = param.center();
        if (0..dd).any(|i| (t[i] - c[i]).abs() > param.radius() + slack) {
            return Ok(None);
        }
        Ok(Some(push(&disk.point(t))?))
    };

    let mut values = Vec::with_capacity(window.len());
    let mut newton_steps = 0;
    let mut sign = 0.0;
    let mut prev_t: Option<(Point, Point)> = None;
    for idx in 0..window.len() {
        let xi = window.node(idx);
        let mut t = gain_inv.apply(&xi) - anchor_dom;
        t = param.clamp(&t);
        // Finite-difference Jacobian at the starting parameter.
        let h = 1e-6 * (gain_inv.max_abs() * w).max(1e-12);
        let mut jac = Matrix::zeros(dd, dd);
        for j in 0..dd {
            let mut tp = t;
            let mut tm = t;
            tp[j] += h;
            tm[j] -= h;
            // One-sided at the edge of the parameter box.
            let (a, b, span) = match (eval(&tp)?, eval(&t)?, eval(&tm)?) {
                (Some(a), _, Some(b)) => (a, b, 2.0 * h),
                (Some(a), Some(b), None) => (a, b, h),
                (None, Some(a), Some(b)) => (a, b, h),
                _ => return fail(),
            };
            let (a, b) = (split_dom(disk.side, ds, &a), split_dom(disk.side, ds, &b));
            for i in 0..dd {
                jac.set(i, j, (a[i] - b[i]) / span);
            }
        }
        let dj = det(&jac);
        if dj == 0.0 || !dj.is_finite() {
            return fail();
        }
        if sign == 0.0 {
            sign = dj.signum();
        } else if dj.signum() != sign {
            return fail();
        }
        let jinv = jac.inverse().map_err(|_| Error::RegraphFailure { step: n })?;
        let mut image = match eval(&t)? {
            Some(v) => v,
            None => return fail(),
        };
        let mut res = xi - split_dom(disk.side, ds, &image);
        let mut steps = 0;
        let floor = 64.0 * f64::EPSILON * (w + image.norm());
        while res.norm() > tol.max(floor) {
            if steps == 100 {
                return fail();
            }
            t += jinv.apply(&res);
            image = match eval(&t)? {
                Some(v) => v,
                None => return fail(),
            };
            let next = xi - split_dom(disk.side, ds, &image);
            steps += 1;
            if next.norm() >= res.norm() && next.norm() <= 1e-9 * w {
                res = next;
                break;
            }
            res = next;
        }
        if res.norm() > 1e-9 * w {
            return fail();
        }
        newton_steps = newton_steps.max(steps);
        // Along each axis of a one-dimensional window, parameters must move
        // monotonically with the node.
        if dd == 1 {
            if let Some((pxi, pt)) = prev_t {
                if (xi[0] - pxi[0]) * (t[0] - pt[0]) * sign < 0.0 {
                    return fail();
                }
            }
            prev_t = Some((xi, t));
        }
        values.push(split_rng(disk.side, ds, &image));
    }
    Ok(Regraph {
        graph: GraphFn { grid: *window, values },
        newton_steps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaStep {
    pub n: usize,
    /// `sup |g_n - σ|` over the window.
    pub c0: f64,
    /// `Lip(g_n - σ)` over the window.
    pub lip: f64,
    /// `c0 + lip`.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaExperiment {
    pub window: f64,
    pub window_nodes: usize,
    /// Steps used to refine the manifold graph by its own invariance.
    pub reference_steps: usize,
    pub steps: Vec<LambdaStep>,
}

impl LambdaExperiment {
    /// Smallest `n₀` from which every distance shrinks by at least `ratio`
    /// per step (down to exact zeros).
    pub fn decay_onset(&self, ratio: f64) -> Option<usize> {
        let d: Vec<f64> = self.steps.iter().map(|s| s.distance).collect();
        let ok = |i: usize| d[i + 1] <= ratio * d[i];
        (0..d.len()).find(|&n0| (n0..d.len().saturating_sub(1)).all(ok))
    }

    /// Largest ratio of consecutive distances from `n0` on.
    pub fn worst_ratio_from(&self, n0: usize) -> f64 {
        self.steps[n0.min(self.steps.len())..]
            .windows(2)
            .filter(|w| w[0].distance > 0.0)
            .map(|w| w[1].distance / w[0].distance)
            .fold(0.0, f64::max)
    }
}

/// Iterates `disk` and measures the Lip-norm distance of the re-graphed
/// images to `target` (the manifold on the same side) over a window of
/// radius `window` about the fixed point. The target graph is refined by
/// pushing itself `reference_steps` times, which removes most of its
/// interpolation error near the window. If `crossing` is given, the disk
/// anchor must lie on it.
#[allow(clippy::too_many_arguments)]
pub fn lambda_experiment(
    sys: &LocalSystem<'_>,
    target: &Manifold,
    crossing: Option<&Manifold>,
    disk: &DiskSpec,
    n_max: usize,
    window: f64,
    window_nodes: usize,
    reference_steps: usize,
    tol: f64,
) -> Result<LambdaExperiment> {
    if disk.side != target.side {
        return Err(Error::invalid("disk and target manifold must be graphs over the same subspace"));
    }
    if window > sys.radius {
        return Err(Error::invalid("window must lie inside the local ball"));
    }
    let ds = sys.linear.dim_s();
    if let Some(m) = crossing {
        on_manifold(ds, m, &disk.anchor, 1e-9)?;
    }
    let (dd, _) = dims(sys, disk.side);
    let grid = Grid::centered(dd, window, window_nodes)?;
    let reference = regraph(sys, &DiskSpec::from_manifold(target), reference_steps, &grid, tol)?.graph;
    let mut steps = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let g = regraph(sys, disk, n, &grid, tol)?.graph;
        let diff = g.difference(&reference);
        let c0 = diff.sup_norm();
        let lip = diff.lip();
        steps.push(LambdaStep {
            n,
            c0,
            lip,
            distance: c0 + lip,
        });
    }
    Ok(LambdaExperiment {
        window,
        window_nodes,
        reference_steps,
        steps,
    })
}

fn on_manifold(ds: usize, m: &Manifold, v: &Point, tol: f64) -> Result<()> {
    let dom = split_dom(m.side, ds, v);
    let rng = split_rng(m.side, ds, v);
    let distance = m.graph.value(&dom).dist(&rng);
    if distance > tol {
        return Err(Error::NotOnSet { distance });
    }
    Ok(())
}

/// Subdivision depth after which an undecided cell is reported.
pub const DEPTH_CAP: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct ItineraryTable {
    pub k_max: usize,
    /// Realized words of length `k` at index `k - 1`, over the symbols `0`, `1`.
    pub realized: Vec<Vec<String>>,
    pub undecided_words: Vec<String>,
    pub undecided_cells: usize,
    /// Fixed points of `f^k` found in realized cylinders, at index `k - 1`.
    pub fixed_points: Vec<usize>,
    /// Orbits of minimal period `d`, at index `d - 1`.
    pub orbits: Vec<usize>,
}

impl ItineraryTable {
    pub fn realized_count(&self, k: usize) -> usize {
        self.realized[k - 1].len()
    }

    fn has(&self, w: &str) -> bool {
        w.is_empty() || self.realized[w.len() - 1].iter().any(|x| x == w)
    }

    pub fn prefix_closed(&self) -> bool {
        self.realized.iter().flatten().all(|w| self.has(&w[..w.len() - 1]))
    }

    pub fn suffix_closed(&self) -> bool {
        self.realized.iter().flatten().all(|w| self.has(&w[1..]))
    }

    /// `Σ_{d | k} d·orbits_d` for `k = 1..=k_max`.
    pub fn divisor_sums(&self) -> Vec<usize> {
        (1..=self.k_max)
            .map(|k| (1..=k).filter(|d| k % d == 0).map(|d| d * self.orbits[d - 1]).sum())
            .collect()
    }

    pub fn divisor_relation_holds(&self) -> bool {
        self.divisor_sums() == self.fixed_points
    }
}

enum Chain {
    Excluded,
    Inside,
    Unknown,
}

/// Interval images of `cell` along `word`, each clipped to its rectangle.
/// Returns the classification and the clipped last set.
fn run_chain(map: &MapSpec, cell: &Rect, word: &[u8], rects: [&Rect; 2]) -> (Chain, Option<Rect>) {
    let first = rects[word[0] as usize];
    let Some(mut cur) = cell.intersection(first) else {
        return (Chain::Excluded, None);
    };
    let mut inside = first.contains_rect(cell);
    for &s in &word[1..] {
        let target = rects[s as usize];
        let Some(img) = map.eval_box(&IBox::from_rect(&cur)).and_then(|b| b.to_rect()) else {
            return (Chain::Unknown, None);
        };
        let Some(next) = img.intersection(target) else {
            return (Chain::Excluded, None);
        };
        inside &= target.contains_rect(&img);
        cur = next;
    }
    (if inside { Chain::Inside } else { Chain::Unknown }, Some(cur))
}

fn witness(map: &MapSpec, x: &Point, word: &[u8], rects: [&Rect; 2]) -> bool {
    let mut y = *x;
    for (j, &s) in word.iter().enumerate() {
        if j > 0 {
            match map.eval(&y) {
                Ok(v) => y = v,
                Err(_) => return false,
            }
        }
        if !rects[s as usize].contains(&y) {
            return false;
        }
    }
    true
}

/// Axis along which the last image of `cell` is widest when only that axis varies.
fn sensitive_axis(map: &MapSpec, cell: &Rect, word: &[u8], rects: [&Rect; 2]) -> usize {
    let mid = cell.mid();
    let mut best = (0, -1.0);
    for a in 0..cell.dim() {
        let mut thin = Rect { lo: mid, hi: mid };
        thin.lo[a] = cell.lo[a];
        thin.hi[a] = cell.hi[a];
        let spread = match run_chain(map, &thin, word, rects) {
            (_, Some(last)) => {
                let t = rects[word[word.len() - 1] as usize];
                (0..last.dim())
                    .map(|i| last.width(i) / t.width(i).max(f64::MIN_POSITIVE))
                    .fold(0.0, f64::max)
                    .max(if word.len() == 1 { cell.width(a) } else { 0.0 })
            }
            _ => 0.0,
        };
        if spread > best.1 {
            best = (a, spread);
        }
    }
    best.0
}

enum Decision {
    Realized,
    Empty,
    Undecided(usize),
}

fn decide(map: &MapSpec, word: &[u8], rects: [&Rect; 2]) -> Decision {
    let mut stack = vec![(*rects[word[0] as usize], 0usize)];
    let mut undecided = 0;
    while let Some((cell, depth)) = stack.pop() {
        match run_chain(map, &cell, word, rects).0 {
            Chain::Excluded => continue,
            Chain::Inside => return Decision::Realized,
            Chain::Unknown => {}
        }
        if witness(map, &cell.mid(), word, rects) {
            return Decision::Realized;
        }
        if depth >= DEPTH_CAP {
            undecided += 1;
            continue;
        }
        let (a, b) = cell.bisect(sensitive_axis(map, &cell, word, rects));
        stack.push((b, depth + 1));
        stack.push((a, depth + 1));
    }
    if undecided > 0 {
        Decision::Undecided(undecided)
    } else {
        Decision::Empty
    }
}

/// Fixed points of `f^k` in the cylinder of `word`: cells whose image under
/// `f^k` meets them, refined to `resolution` and clustered by contact.
fn periodic_points(map: &MapSpec, word: &[u8], rects: [&Rect; 2], resolution: f64) -> usize {
    let mut stack = vec![*rects[word[0] as usize]];
    let mut leaves: Vec<Rect> = Vec::new();
    while let Some(cell) = stack.pop() {
        let (status, last) = run_chain(map, &cell, word, rects);
        if matches!(status, Chain::Excluded) {
            continue;
        }
        let Some(last) = last else { continue };
        let Some(img) = map.eval_box(&IBox::from_rect(&last)).and_then(|b| b.to_rect()) else {
            continue;
        };
        if !img.intersects(&cell) {
            continue;
        }
        let (axis, width) = (0..cell.dim())
            .map(|a| (a, cell.width(a)))
            .fold((0, -1.0), |m, x| if x.1 > m.1 { x } else { m });
        if width <= resolution {
            leaves.push(cell);
            continue;
        }
        let (a, b) = cell.bisect(axis);
        stack.push(b);
        stack.push(a);
    }
    // Union of touching leaves.
    let mut parent: Vec<usize> = (0..leaves.len()).collect();
    fn root(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..leaves.len() {
        for j in i + 1..leaves.len() {
            if leaves[i].touches(&leaves[j]) {
                let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    (0..leaves.len()).filter(|&i| root(&mut parent, i) == i).count()
}

fn minimal_period(word: &[u8]) -> usize {
    let k = word.len();
    (1..=k)
        .find(|&d| k.is_multiple_of(d) && (0..k).all(|i| word[i] == word[(i + d) % k]))
        .unwrap_or(k)
}

/// Decides which binary words of length at most `k_max` have nonempty
/// cylinders `∩ f^{-i}(rect_{w_i})`, and counts the periodic points they
/// carry.
pub fn horseshoe_verify(map: &MapSpec, rect0: &Rect, rect1: &Rect, k_max: usize) -> Result<ItineraryTable> {
    if map.dim() != rect0.dim() || rect0.dim() != rect1.dim() {
        return Err(Error::DimensionMismatch {
            expected: map.dim(),
            found: rect0.dim(),
        });
    }
    if rect0.intersects(rect1) {
        return Err(Error::precondition("the two rectangles must be disjoint"));
    }
    if k_max == 0 || k_max > 20 {
        return Err(Error::invalid("word length must be between 1 and 20"));
    }
    let rects = [rect0, rect1];
    let scale = (0..rect0.dim()).map(|i| rect0.width(i).max(rect1.width(i))).fold(0.0, f64::max);
    let resolution = 1e-9 * scale.max(1e-300);
    let mut realized = Vec::with_capacity(k_max);
    let mut undecided_words = Vec::new();
    let mut undecided_cells = 0;
    let mut fixed_points = Vec::with_capacity(k_max);
    let mut primitive = vec![0usize; k_max];
    for k in 1..=k_max {
        let mut words = Vec::new();
        let mut fixed = 0;
        for code in 0..(1u32 << k) {
            let word: Vec<u8> = (0..k).map(|i| ((code >> (k - 1 - i)) & 1) as u8).collect();
            let text: String = word.iter().map(|&b| if b == 0 { '0' } else { '1' }).collect();
            match decide(map, &word, rects) {
                Decision::Realized => {
                    let count = periodic_points(map, &word, rects, resolution);
                    fixed += count;
                    if minimal_period(&word) == k {
                        primitive[k - 1] += count;
                    }
                    words.push(text);
                }
                Decision::Empty => {}
                Decision::Undecided(cells) => {
                    undecided_cells += cells;
                    undecided_words.push(text);
                }
            }
        }
        realized.push(words);
        fixed_points.push(fixed);
    }
    let orbits = primitive.iter().enumerate().map(|(i, &p)| p / (i + 1)).collect();
    Ok(ItineraryTable {
        k_max,
        realized,
        undecided_words,
        undecided_cells,
        fixed_points,
        orbits,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainReport {
    pub n_x: usize,
    pub n_y: usize,
    pub hypotheses: HypothesisReport,
    pub cert: TransversalityCert,
    /// The intersection in the local frame.
    pub local_point: Point,
    /// The intersection in ambient coordinates.
    pub point: Point,
}

/// Composes two connections through the saddle `q`: `d_x` is a disk of
/// `W^u(p)` crossing `W^s(q)`, `d_y` a disk of `W^s(r)` crossing `W^u(q)`.
/// Searches for the smallest `(n_x, n_y)` (by total, then `n_x`) such that
/// `f^{n_x}(d_x)` and `f^{-n_y}(d_y)`, re-graphed on `B_r`, satisfy the
/// transversality hypotheses against the manifolds of `q`, and certifies
/// their intersection.
#[allow(clippy::too_many_arguments)]
pub fn heteroclinic_chain(
    sys_q: &LocalSystem<'_>,
    wu_q: &Manifold,
    ws_q: &Manifold,
    d_x: &DiskSpec,
    d_y: &DiskSpec,
    n_max: usize,
    grid_n: usize,
    budget: &SamplingBudget,
    tol: f64,
) -> Result<ChainReport> {
    if d_x.side != Side::Unstable || d_y.side != Side::Stable || wu_q.side != Side::Unstable || ws_q.side != Side::Stable {
        return Err(Error::invalid("expected an unstable disk, a stable disk and both manifolds of q"));
    }
    let ds = sys_q.linear.dim_s();
    let du = sys_q.linear.dim_u();
    on_manifold(ds, ws_q, &d_x.anchor, 1e-9)?;
    on_manifold(ds, wu_q, &d_y.anchor, 1e-9)?;
    let r = sys_q.radius;
    let gu = Grid::centered(du, r, grid_n)?;
    let gs = Grid::centered(ds, r, grid_n)?;
    // Sampled constants of an interpolant can exceed its node slopes by rounding.
    let c = wu_q.graph.lip().max(ws_q.graph.lip()) * crate::DEFAULT_MARGIN;
    if c >= 1.0 {
        return Err(Error::precondition("manifold graphs of q must have Lipschitz constant below 1"));
    }
    let mut forward: Vec<Option<GraphFn>> = Vec::new();
    let mut backward: Vec<Option<GraphFn>> = Vec::new();
    for n in 0..=n_max {
        forward.push(regraph(sys_q, d_x, n, &gu, tol).ok().map(|g| g.graph));
        backward.push(regraph(sys_q, d_y, n, &gs, tol).ok().map(|g| g.graph));
    }
    for total in 0..=2 * n_max {
        for n_x in total.saturating_sub(n_max)..=total.min(n_max) {
            let n_y = total - n_x;
            let (Some(sigma_t), Some(theta_t)) = (&forward[n_x], &backward[n_y]) else {
                continue;
            };
            let problem = TransversalityProblem {
                dim1: ds,
                dim2: du,
                radius: r,
                theta_t,
                sigma_t,
                theta: Some(&ws_q.graph as &dyn LipMap),
                sigma: Some(&wu_q.graph as &dyn LipMap),
                c,
                spacing: Some(gu.spacing().max(gs.spacing())),
            };
            let hypotheses = check_hypotheses(&problem, budget)?;
            if !hypotheses.pass {
                continue;
            }
            let cert = find_intersection(&problem, tol, budget, false)?;
            let local_point = cert.y0;
            return Ok(ChainReport {
                n_x,
                n_y,
                hypotheses,
                point: sys_q.from_local(&local_point),
                local_point,
                cert,
            });
        }
    }
    Err(Error::precondition("no iterate pair up to n_max satisfies the transversality hypotheses"))
}
