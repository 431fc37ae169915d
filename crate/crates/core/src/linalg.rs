//! Fixed-capacity points and matrices for phase spaces of dimension at most
//! three, measured in the maximum norm throughout.

use core::fmt;
use core::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use crate::error::{Error, Result};

/// Largest supported phase-space dimension.
pub const MAX_DIM: usize = 3;

/// A point (or vector) of `ℝⁿ`, `n ≤ 3`.
///
/// Zero-dimensional points are allowed: they stand for the components of a
/// vector in a trivial subspace (an all-unstable splitting has `dim_s = 0`).
#[derive(Clone, Copy, PartialEq)]
pub struct Point {
    dim: usize,
    c: [f64; MAX_DIM],
}

impl Point {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim <= MAX_DIM, "dimension {dim} exceeds {MAX_DIM}");
        Point {
            dim,
            c: [0.0; MAX_DIM],
        }
    }

    /// Builds a point, rejecting non-finite coordinates.
    pub fn new(coords: &[f64]) -> Result<Self> {
        if coords.len() > MAX_DIM {
            return Err(Error::DimensionMismatch {
                expected: MAX_DIM,
                found: coords.len(),
            });
        }
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("point coordinates must be finite"));
        }
        Ok(Self::from_slice(coords))
    }

    /// Builds a point without the finiteness check. Panics above `MAX_DIM`.
    pub fn from_slice(coords: &[f64]) -> Self {
        let mut p = Point::zeros(coords.len());
        p.c[..coords.len()].copy_from_slice(coords);
        p
    }

    pub fn splat(dim: usize, v: f64) -> Self {
        let mut p = Point::zeros(dim);
        p.c[..dim].fill(v);
        p
    }

    /// Unit coordinate vector `e_axis`.
    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut p = Point::zeros(dim);
        p.c[axis] = 1.0;
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> &[f64] {
        &self.c[..self.dim]
    }

    pub fn coords_mut(&mut self) -> &mut [f64] {
        &mut self.c[..self.dim]
    }

    /// Maximum norm.
    pub fn norm(&self) -> f64 {
        self.coords().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn dist(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        self.coords()
            .iter()
            .zip(other.coords())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.coords().iter().all(|v| v.is_finite())
    }

    /// The sub-vector `coords[start..start + len]`.
    pub fn slice(&self, start: usize, len: usize) -> Point {
        Point::from_slice(&self.c[start..start + len])
    }

    /// Concatenation `(self, tail)`.
    pub fn concat(&self, tail: &Point) -> Point {
        let mut p = Point::zeros(self.dim + tail.dim);
        p.c[..self.dim].copy_from_slice(self.coords());
        p.c[self.dim..self.dim + tail.dim].copy_from_slice(tail.coords());
        p
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Point {
        let mut p = *self;
        for v in p.coords_mut() {
            *v = f(*v);
        }
        p
    }

    pub fn zip_map(&self, other: &Point, f: impl Fn(f64, f64) -> f64) -> Point {
        debug_assert_eq!(self.dim, other.dim);
        let mut p = *self;
        for (v, o) in p.coords_mut().iter_mut().zip(other.coords()) {
            *v = f(*v, *o);
        }
        p
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.coords()).finish()
    }
}

impl Index<usize> for Point {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.coords()[i]
    }
}

impl IndexMut<usize> for Point {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.coords_mut()[i]
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        self.zip_map(&rhs, |a, b| a + b)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        self.zip_map(&rhs, |a, b| a - b)
    }
}

impl AddAssign for Point {
    fn add_assign(&mut self, rhs: Point) {
        *self = *self + rhs;
    }
}

impl SubAssign for Point {
    fn sub_assign(&mut self, rhs: Point) {
        *self = *self - rhs;
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        self.map(|v| v * s)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        self.map(|v| -v)
    }
}

/// A dense matrix of at most `3 × 3` entries.
#[derive(Clone, Copy, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    m: [[f64; MAX_DIM]; MAX_DIM],
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows <= MAX_DIM && cols <= MAX_DIM);
        Matrix {
            rows,
            cols,
            m: [[0.0; MAX_DIM]; MAX_DIM],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut a = Matrix::zeros(n, n);
        for i in 0..n {
            a.m[i][i] = 1.0;
        }
        a
    }

    pub fn diag(entries: &[f64]) -> Self {
        let mut a = Matrix::zeros(entries.len(), entries.len());
        for (i, v) in entries.iter().enumerate() {
            a.m[i][i] = *v;
        }
        a
    }

    /// Builds a matrix from rows; all rows must have the same length.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.len() > MAX_DIM || cols > MAX_DIM {
            return Err(Error::invalid("matrix larger than 3x3"));
        }
        let mut a = Matrix::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::invalid("ragged matrix rows"));
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid("matrix entries must be finite"));
            }
            a.m[i][..cols].copy_from_slice(r);
        }
        Ok(a)
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Point]) -> Self {
        let rows = cols.first().map_or(0, |c| c.dim());
        let mut a = Matrix::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for i in 0..rows {
                a.m[i][j] = c[i];
            }
        }
        a
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.m[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.m[i][j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.m[i][..self.cols]
    }

    pub fn column(&self, j: usize) -> Point {
        let mut p = Point::zeros(self.rows);
        for i in 0..self.rows {
            p[i] = self.m[i][j];
        }
        p
    }

    pub fn apply(&self, x: &Point) -> Point {
        debug_assert_eq!(self.cols, x.dim());
        let mut y = Point::zeros(self.rows);
        for i in 0..self.rows {
            y[i] = self.row(i).iter().zip(x.coords()).map(|(a, b)| a * b).sum();
        }
        y
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        debug_assert_eq!(self.cols, other.rows);
        let mut c = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                c.m[i][j] = (0..self.cols).map(|k| self.m[i][k] * other.m[k][j]).sum();
            }
        }
        c
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        let mut c = *self;
        for i in 0..self.rows {
            for j in 0..self.cols {
                c.m[i][j] -= other.m[i][j];
            }
        }
        c
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.m[j][i] = self.m[i][j];
            }
        }
        t
    }

    /// The `rows × cols` block starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Matrix {
        let mut b = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                b.m[i][j] = self.m[r0 + i][c0 + j];
            }
        }
        b
    }

    /// Operator norm induced by the maximum norm: the largest absolute row sum.
    pub fn norm(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        (0..self.rows)
            .flat_map(|i| self.row(i).iter().copied())
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Gauss–Jordan inverse with partial pivoting.
    pub fn inverse(&self) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::invalid("inverse of a non-square matrix"));
        }
        let n = self.rows;
        let mut a = *self;
        let mut inv = Matrix::identity(n);
        let scale = self.max_abs();
        if n == 0 {
            return Ok(inv);
        }
        if scale == 0.0 {
            return Err(Error::Singular);
        }
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a.m[i][col].abs().total_cmp(&a.m[j][col].abs()))
                .unwrap_or(col);
            if a.m[pivot][col].abs() <= 1e-14 * scale {
                return Err(Error::Singular);
            }
            a.m.swap(col, pivot);
            inv.m.swap(col, pivot);
            let d = a.m[col][col];
            for j in 0..n {
                a.m[col][j] /= d;
                inv.m[col][j] /= d;
            }
            for i in 0..n {
                if i != col {
                    let factor = a.m[i][col];
                    if factor != 0.0 {
                        for j in 0..n {
                            a.m[i][j] -= factor * a.m[col][j];
                            inv.m[i][j] -= factor * inv.m[col][j];
                        }
                    }
                }
            }
        }
        Ok(inv)
    }

    /// Mininorm `inf{|Av| : |v| = 1}` in the maximum norm, equal to
    /// `1 / ‖A⁻¹‖` for invertible `A` and zero otherwise.
    pub fn mininorm(&self) -> f64 {
        match self.inverse() {
            Ok(inv) if self.rows > 0 => 1.0 / inv.norm(),
            Ok(_) => f64::INFINITY,
            Err(_) => 0.0,
        }
    }

    /// `A^k` for `k ≥ 0`.
    pub fn pow(&self, k: usize) -> Matrix {
        let mut r = Matrix::identity(self.rows);
        for _ in 0..k {
            r = r.mul(self);
        }
        r
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries((0..self.rows).map(|i| self.row(i)))
            .finish()
    }
}
