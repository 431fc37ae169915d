//! Max-norm balls and axis-aligned rectangles.

use crate::error::{Error, Result};
use crate::linalg::Point;

/// The closed max-norm ball `B_r(center)`, i.e. an axis-aligned cube.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball {
    center: Point,
    radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid("ball radius must be positive and finite"));
        }
        if !center.is_finite() {
            return Err(Error::invalid("ball center must be finite"));
        }
        Ok(Ball { center, radius })
    }

    /// `[lo, hi]` as a one-dimensional ball.
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Ball::new(Point::from_slice(&[0.5 * (lo + hi)]), 0.5 * (hi - lo))
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn contains(&self, x: &Point) -> bool {
        x.dim() == self.dim()
            && x
                .coords()
                .iter()
                .zip(self.center.coords())
                .all(|(v, c)| (v - c).abs() <= self.radius)
    }

    pub fn contains_ball(&self, other: &Ball) -> bool {
        self.to_rect().contains_rect(&other.to_rect())
    }

    /// Coordinate-wise clamp onto the ball, a 1-Lipschitz retraction in the
    /// maximum norm.
    pub fn clamp(&self, x: &Point) -> Point {
        x.zip_map(&self.center, |v, c| {
            v.clamp(c - self.radius, c + self.radius)
        })
    }

    pub fn with_radius(&self, radius: f64) -> Result<Ball> {
        Ball::new(self.center, radius)
    }

    pub fn to_rect(&self) -> Rect {
        Rect {
            lo: self.center.map(|c| c - self.radius),
            hi: self.center.map(|c| c + self.radius),
        }
    }
}

/// Closed axis-aligned rectangle `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub lo: Point,
    pub hi: Point,
}

impl Rect {
    pub fn new(lo: Point, hi: Point) -> Result<Self> {
        if lo.dim() != hi.dim() {
            return Err(Error::DimensionMismatch {
                expected: lo.dim(),
                found: hi.dim(),
            });
        }
        if lo.coords().iter().zip(hi.coords()).any(|(a, b)| !(a <= b)) {
            return Err(Error::invalid("rectangle needs lo <= hi in every axis"));
        }
        Ok(Rect { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.dim()
    }

    pub fn width(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    pub fn mid(&self) -> Point {
        self.lo.zip_map(&self.hi, |a, b| 0.5 * (a + b))
    }

    pub fn contains(&self, x: &Point) -> bool {
        (0..self.dim()).all(|i| self.lo[i] <= x[i] && x[i] <= self.hi[i])
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        (0..self.dim()).all(|i| self.lo[i] <= other.lo[i] && other.hi[i] <= self.hi[i])
    }

    pub fn intersects(&self, other: &Rect) -> bool {
        (0..self.dim()).all(|i| self.lo[i] <= other.hi[i] && other.lo[i] <= self.hi[i])
    }

    pub fn intersection(&self, other: &Rect) -> Option<Rect> {
        if !self.intersects(other) {
            return None;
        }
        Some(Rect {
            lo: self.lo.zip_map(&other.lo, f64::max),
            hi: self.hi.zip_map(&other.hi, f64::min),
        })
    }

    pub fn hull(&self, other: &Rect) -> Rect {
        Rect {
            lo: self.lo.zip_map(&other.lo, f64::min),
            hi: self.hi.zip_map(&other.hi, f64::max),
        }
    }

    /// Splits along `axis` at the midpoint.
    pub fn bisect(&self, axis: usize) -> (Rect, Rect) {
        let m = 0.5 * (self.lo[axis] + self.hi[axis]);
        let mut left = *self;
        let mut right = *self;
        left.hi[axis] = m;
        right.lo[axis] = m;
        (left, right)
    }

    /// Closed rectangles sharing at least a boundary point.
    pub fn touches(&self, other: &Rect) -> bool {
        self.intersects(other)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_containment_is_coordinatewise() {
        let b = Ball::new(Point::from_slice(&[0.0, 1.0]), 0.5).unwrap();
        assert!(b.contains(&Point::from_slice(&[0.5, 0.5])));
        assert!(!b.contains(&Point::from_slice(&[0.5, 1.6])));
        assert_eq!(b.clamp(&Point::from_slice(&[2.0, 1.2])), Point::from_slice(&[0.5, 1.2]));
    }

    #[test]
    fn zero_radius_is_rejected() {
        assert!(Ball::new(Point::from_slice(&[0.0]), 0.0).is_err());
    }

    #[test]
    fn rect_set_operations() {
        let a = Rect::new(Point::from_slice(&[0.0, 0.0]), Point::from_slice(&[1.0, 1.0])).unwrap();
        let b = Rect::new(Point::from_slice(&[1.0, 0.5]), Point::from_slice(&[2.0, 2.0])).unwrap();
        assert!(a.touches(&b));
        let i = a.intersection(&b).unwrap();
        assert_eq!(i.lo, Point::from_slice(&[1.0, 0.5]));
        let (l, r) = a.bisect(0);
        assert_eq!(l.hi[0], 0.5);
        assert_eq!(r.lo[0], 0.5);
    }
}
