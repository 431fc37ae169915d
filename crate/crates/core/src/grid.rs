//! Uniform grids over cubes and multilinear interpolation of node values.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{Point, MAX_DIM};
use crate::map::LipMap;
use crate::region::Ball;

/// `n` nodes per axis over the cube `B_r(center)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    center: Point,
    radius: f64,
    n: usize,
    h: f64,
}

impl Grid {
    pub fn new(center: Point, radius: f64, n: usize) -> Result<Grid> {
        if n < 2 {
            return Err(Error::invalid("a grid needs at least two nodes per axis"));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid("grid radius must be positive"));
        }
        Ok(Grid {
            center,
            radius,
            n,
            h: 2.0 * radius / (n - 1) as f64,
        })
    }

    /// Grid over `B_r(0)` in `dim` dimensions.
    pub fn centered(dim: usize, radius: f64, n: usize) -> Result<Grid> {
        Grid::new(Point::zeros(dim), radius, n)
    }

    /// A grid with the same spacing extended by `pad` nodes on every side.
    pub fn padded(&self, pad: usize) -> Grid {
        Grid {
            center: self.center,
            radius: self.radius + pad as f64 * self.h,
            n: self.n + 2 * pad,
            h: self.h,
        }
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn ball(&self) -> Ball {
        Ball::new(self.center, self.radius).expect("grid radius is validated")
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim() as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Multi-index of a flat node index; the last axis varies fastest.
    pub fn multi_index(&self, mut idx: usize) -> [usize; MAX_DIM] {
        let mut m = [0; MAX_DIM];
        for a in (0..self.dim()).rev() {
            m[a] = idx % self.n;
            idx /= self.n;
        }
        m
    }

    pub fn flat_index(&self, m: &[usize]) -> usize {
        m[..self.dim()].iter().fold(0, |acc, &k| acc * self.n + k)
    }

    pub fn coordinate(&self, axis: usize, k: usize) -> f64 {
        if k + 1 == self.n {
            self.center[axis] + self.radius
        } else {
            self.center[axis] - self.radius + self.h * k as f64
        }
    }

    pub fn node(&self, idx: usize) -> Point {
        let m = self.multi_index(idx);
        let mut p = self.center;
        for a in 0..self.dim() {
            p[a] = self.coordinate(a, m[a]);
        }
        p
    }

    pub fn nodes(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.len()).map(|i| self.node(i))
    }

    /// Distance (in nodes) from the grid boundary.
    pub fn ring(&self, idx: usize) -> usize {
        let m = self.multi_index(idx);
        (0..self.dim())
            .map(|a| m[a].min(self.n - 1 - m[a]))
            .min()
            .unwrap_or(0)
    }

    /// Index of the node nearest to `x` on a grid-aligned lattice, or `None`
    /// when `x` lies off the lattice by more than `tol` per axis.
    pub fn node_at(&self, x: &Point, tol: f64) -> Option<usize> {
        let mut m = [0usize; MAX_DIM];
        for a in 0..self.dim() {
            let t = (x[a] - (self.center[a] - self.radius)) / self.h;
            let k = libm::round(t);
            if k < 0.0 || k > (self.n - 1) as f64 || (t - k).abs() * self.h > tol {
                return None;
            }
            m[a] = k as usize;
        }
        Some(self.flat_index(&m))
    }

    /// Cell and local coordinates of `x`; coordinates outside the cube are
    /// clamped and reported.
    fn locate(&self, x: &Point) -> ([usize; MAX_DIM], [f64; MAX_DIM], bool) {
        let mut cell = [0usize; MAX_DIM];
        let mut t = [0.0; MAX_DIM];
        let mut clamped = false;
        for a in 0..self.dim() {
            let mut s = (x[a] - (self.center[a] - self.radius)) / self.h;
            let top = (self.n - 1) as f64;
            if s < 0.0 {
                // Allow rounding-level excursions without flagging.
                if s < -1e-9 {
                    clamped = true;
                }
                s = 0.0;
            } else if s > top {
                if s > top + 1e-9 {
                    clamped = true;
                }
                s = top;
            }
            let k = (libm::floor(s) as usize).min(self.n - 2);
            cell[a] = k;
            t[a] = s - k as f64;
        }
        (cell, t, clamped)
    }

    /// Multilinear interpolation of node values at `x`; the flag reports a
    /// clamped lookup.
    pub fn interpolate(&self, values: &[Point], x: &Point) -> (Point, bool) {
        let d = self.dim();
        let (cell, t, clamped) = self.locate(x);
        let out_dim = values[0].dim();
        let mut acc = Point::zeros(out_dim);
        for corner in 0..(1usize << d) {
            let mut w = 1.0;
            let mut m = [0usize; MAX_DIM];
            for a in 0..d {
                let up = corner & (1 << (d - 1 - a)) != 0;
                m[a] = cell[a] + up as usize;
                w *= if up { t[a] } else { 1.0 - t[a] };
            }
            if w != 0.0 {
                acc += values[self.flat_index(&m)] * w;
            }
        }
        (acc, clamped)
    }

    /// Exact Lipschitz constant (maximum norms) of the multilinear
    /// interpolant: the largest, over cells, cell corners and components, of
    /// the sum of absolute edge slopes at the corner.
    pub fn interpolant_lip(&self, values: &[Point]) -> f64 {
        self.lip_where(values, |_| true)
    }

    /// As [`Grid::interpolant_lip`], over the cells that meet `ball`.
    pub fn interpolant_lip_within(&self, values: &[Point], ball: &Ball) -> f64 {
        let grown = ball.radius() + self.h * (1.0 + 1e-9);
        self.lip_where(values, |x| x.dist(&ball.center()) <= grown)
    }

    fn lip_where(&self, values: &[Point], keep: impl Fn(&Point) -> bool) -> f64 {
        let d = self.dim();
        let out_dim = values[0].dim();
        let mut best = 0.0f64;
        for idx in 0..self.len() {
            if !keep(&self.node(idx)) {
                continue;
            }
            let m = self.multi_index(idx);
            // Each node is a corner of up to 2^d cells; its edges run to the
            // neighbours in either direction along each axis.
            for dirs in 0..(1usize << d) {
                let mut valid = true;
                let mut nb = [[0usize; MAX_DIM]; MAX_DIM];
                for a in 0..d {
                    let up = dirs & (1 << a) != 0;
                    if (up && m[a] + 1 >= self.n) || (!up && m[a] == 0) {
                        valid = false;
                        break;
                    }
                    nb[a] = m;
                    nb[a][a] = if up { m[a] + 1 } else { m[a] - 1 };
                }
                if !valid {
                    continue;
                }
                for k in 0..out_dim {
                    let s: f64 = (0..d)
                        .map(|a| (values[self.flat_index(&nb[a])][k] - values[idx][k]).abs())
                        .sum();
                    best = best.max(s / self.h);
                }
            }
        }
        best
    }
}

/// A function on a grid, evaluated between nodes by multilinear
/// interpolation. Graphs of manifolds and conjugacy fields are both stored
/// this way.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphFn {
    pub grid: Grid,
    pub values: Vec<Point>,
}

impl GraphFn {
    pub fn zeros(grid: Grid, out_dim: usize) -> GraphFn {
        GraphFn {
            grid,
            values: vec![Point::zeros(out_dim); grid.len()],
        }
    }

    /// Samples `f` at the nodes.
    pub fn from_fn<F>(grid: Grid, f: F) -> Result<GraphFn>
    where
        F: Fn(&Point) -> Result<Point>,
    {
        let values = grid.nodes().map(|x| f(&x)).collect::<Result<Vec<_>>>()?;
        Ok(GraphFn { grid, values })
    }

    pub fn in_dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn out_dim(&self) -> usize {
        self.values.first().map_or(0, |v| v.dim())
    }

    pub fn eval_flagged(&self, x: &Point) -> (Point, bool) {
        self.grid.interpolate(&self.values, x)
    }

    pub fn value(&self, x: &Point) -> Point {
        self.eval_flagged(x).0
    }

    pub fn lip(&self) -> f64 {
        self.grid.interpolant_lip(&self.values)
    }

    /// Lipschitz constant of the interpolant near `ball` (cells meeting it).
    pub fn lip_within(&self, ball: &Ball) -> f64 {
        self.grid.interpolant_lip_within(&self.values, ball)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Largest node-wise distance to another function on the same grid.
    pub fn sup_distance(&self, other: &GraphFn) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max(a.dist(b)))
    }

    /// Node-wise difference, on the same grid.
    pub fn difference(&self, other: &GraphFn) -> GraphFn {
        GraphFn {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| *a - *b).collect(),
        }
    }
}

impl LipMap for GraphFn {
    fn dim(&self) -> usize {
        self.in_dim()
    }
    fn out_dim(&self) -> usize {
        GraphFn::out_dim(self)
    }
    fn eval(&self, x: &Point) -> Result<Point> {
        Ok(self.value(x))
    }
    fn domain(&self) -> Option<Ball> {
        Some(self.grid.ball())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_hit_the_cube_corners_exactly() {
        let g = Grid::centered(2, 1.0, 5).unwrap();
        assert_eq!(g.len(), 25);
        assert_eq!(g.node(0), Point::from_slice(&[-1.0, -1.0]));
        assert_eq!(g.node(24), Point::from_slice(&[1.0, 1.0]));
        assert_eq!(g.node(1), Point::from_slice(&[-1.0, -0.5]));
        assert_eq!(g.node_at(&Point::from_slice(&[0.5, 0.0]), 1e-12), Some(17));
    }

    #[test]
    fn bilinear_functions_are_reproduced() {
        let g = Grid::centered(2, 1.0, 4).unwrap();
        let f = |p: &Point| Ok(Point::from_slice(&[1.0 + 2.0 * p[0] - p[1] + 0.5 * p[0] * p[1]]));
        let gf = GraphFn::from_fn(g, f).unwrap();
        let x = Point::from_slice(&[0.3, -0.7]);
        assert!((gf.value(&x)[0] - f(&x).unwrap()[0]).abs() < 1e-14);
        let (_, clamped) = gf.eval_flagged(&Point::from_slice(&[1.5, 0.0]));
        assert!(clamped);
    }

    #[test]
    fn interpolant_lip_matches_gradient_bound() {
        let g = Grid::centered(1, 1.0, 11).unwrap();
        let gf = GraphFn::from_fn(g, |p| Ok(Point::from_slice(&[p[0].abs() * 0.99]))).unwrap();
        assert!((gf.lip() - 0.99).abs() < 1e-14);
        // In two dimensions with max norms the constant is |a| + |b| for ax + by.
        let g2 = Grid::centered(2, 1.0, 3).unwrap();
        let gf2 = GraphFn::from_fn(g2, |p| Ok(Point::from_slice(&[0.3 * p[0] - 0.2 * p[1]]))).unwrap();
        assert!((gf2.lip() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn padding_keeps_spacing() {
        let g = Grid::centered(1, 1.0, 5).unwrap();
        let p = g.padded(2);
        assert_eq!(p.spacing(), g.spacing());
        assert_eq!(p.nodes_per_axis(), 9);
        assert!((p.radius() - 2.0).abs() < 1e-15);
    }
}
