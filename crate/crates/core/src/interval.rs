//! Closed intervals with outward rounding.
//!
//! Every operation widens its result by one ulp on each side, so enclosures
//! stay valid regardless of the rounding of the underlying `libm` calls.

use core::f64::consts::PI;
use core::ops::{Add, Mul, Neg, Sub};

use crate::linalg::{Point, MAX_DIM};
use crate::region::Rect;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const ENTIRE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi || lo.is_nan() || hi.is_nan());
        Interval { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    fn outward(lo: f64, hi: f64) -> Self {
        if lo.is_nan() || hi.is_nan() {
            return Interval::ENTIRE;
        }
        Interval {
            lo: lo.next_down(),
            hi: hi.next_up(),
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    pub fn abs(self) -> Interval {
        if self.lo >= 0.0 {
            self
        } else if self.hi <= 0.0 {
            -self
        } else {
            Interval::new(0.0, (-self.lo).max(self.hi))
        }
    }

    pub fn min(self, o: Interval) -> Interval {
        Interval::new(self.lo.min(o.lo), self.hi.min(o.hi))
    }

    pub fn max(self, o: Interval) -> Interval {
        Interval::new(self.lo.max(o.lo), self.hi.max(o.hi))
    }

    /// Division; a denominator straddling zero yields the entire line.
    pub fn div(self, o: Interval) -> Interval {
        if o.lo <= 0.0 && o.hi >= 0.0 {
            return Interval::ENTIRE;
        }
        let inv = Interval::outward(1.0 / o.hi, 1.0 / o.lo);
        self * inv
    }

    pub fn powi(self, k: i32) -> Interval {
        if k == 0 {
            return Interval::point(1.0);
        }
        if k < 0 {
            return Interval::point(1.0).div(self.powi(-k));
        }
        let base = if k % 2 == 0 { self.abs() } else { self };
        let a = libm::pow(base.lo, k as f64);
        let b = libm::pow(base.hi, k as f64);
        Interval::outward(a.min(b), a.max(b))
    }

    /// General power for a positive base, via `exp(y ln x)`; the base is
    /// restricted to its positive part.
    pub fn powf(self, y: Interval) -> Interval {
        if self.hi <= 0.0 {
            return Interval::ENTIRE;
        }
        let base = Interval::new(self.lo.max(f64::MIN_POSITIVE), self.hi);
        (base.ln() * y).exp()
    }

    pub fn sqrt(self) -> Interval {
        let lo = libm::sqrt(self.lo.max(0.0));
        let hi = libm::sqrt(self.hi.max(0.0));
        Interval::outward(lo, hi).max(Interval::point(0.0))
    }

    pub fn exp(self) -> Interval {
        Interval::outward(libm::exp(self.lo), libm::exp(self.hi)).max(Interval::point(0.0))
    }

    pub fn ln(self) -> Interval {
        if self.hi <= 0.0 {
            return Interval::ENTIRE;
        }
        let lo = if self.lo <= 0.0 {
            f64::NEG_INFINITY
        } else {
            libm::log(self.lo)
        };
        Interval::outward(lo, libm::log(self.hi))
    }

    pub fn tanh(self) -> Interval {
        Interval::outward(libm::tanh(self.lo), libm::tanh(self.hi))
            .min(Interval::point(1.0))
            .max(Interval::point(-1.0))
    }

    pub fn sin(self) -> Interval {
        (self - Interval::point(PI / 2.0)).cos()
    }

    pub fn cos(self) -> Interval {
        if !(self.lo.is_finite() && self.hi.is_finite()) || self.width() >= 2.0 * PI {
            return Interval::new(-1.0, 1.0);
        }
        let a = libm::cos(self.lo);
        let b = libm::cos(self.hi);
        let mut lo = a.min(b);
        let mut hi = a.max(b);
        // Extrema of cos sit at multiples of π; widen the test slightly so a
        // rounding error in the reduction can only make the enclosure larger.
        let k0 = libm::floor(self.lo / PI - 1e-9) as i64;
        let k1 = libm::ceil(self.hi / PI + 1e-9) as i64;
        for k in k0..=k1 {
            let x = k as f64 * PI;
            if x >= self.lo - 1e-9 && x <= self.hi + 1e-9 {
                if k % 2 == 0 {
                    hi = 1.0;
                } else {
                    lo = -1.0;
                }
            }
        }
        Interval::outward(lo, hi)
            .min(Interval::point(1.0))
            .max(Interval::point(-1.0))
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, o: Interval) -> Interval {
        Interval::outward(self.lo + o.lo, self.hi + o.hi)
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, o: Interval) -> Interval {
        Interval::outward(self.lo - o.hi, self.hi - o.lo)
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval::new(-self.hi, -self.lo)
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, o: Interval) -> Interval {
        let prods = [
            self.lo * o.lo,
            self.lo * o.hi,
            self.hi * o.lo,
            self.hi * o.hi,
        ];
        // 0 * inf products are NaN; they only arise from unbounded operands.
        if prods.iter().any(|p| p.is_nan()) {
            return Interval::ENTIRE;
        }
        let lo = prods.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = prods.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Interval::outward(lo, hi)
    }
}

/// An interval vector, the enclosure counterpart of [`Point`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IBox {
    dim: usize,
    c: [Interval; MAX_DIM],
}

impl IBox {
    pub fn from_rect(r: &Rect) -> Self {
        let mut b = IBox {
            dim: r.dim(),
            c: [Interval::point(0.0); MAX_DIM],
        };
        for i in 0..r.dim() {
            b.c[i] = Interval::new(r.lo[i], r.hi[i]);
        }
        b
    }

    pub fn from_point(p: &Point) -> Self {
        let mut b = IBox {
            dim: p.dim(),
            c: [Interval::point(0.0); MAX_DIM],
        };
        for i in 0..p.dim() {
            b.c[i] = Interval::point(p[i]);
        }
        b
    }

    pub fn from_intervals(iv: &[Interval]) -> Self {
        let mut b = IBox {
            dim: iv.len(),
            c: [Interval::point(0.0); MAX_DIM],
        };
        b.c[..iv.len()].copy_from_slice(iv);
        b
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize) -> Interval {
        self.c[i]
    }

    pub fn set(&mut self, i: usize, v: Interval) {
        self.c[i] = v;
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.c[..self.dim]
    }

    pub fn hull(&self, other: &IBox) -> IBox {
        let mut b = *self;
        for i in 0..self.dim {
            b.c[i] = self.c[i].hull(&other.c[i]);
        }
        b
    }

    pub fn is_bounded(&self) -> bool {
        self.intervals()
            .iter()
            .all(|v| v.lo.is_finite() && v.hi.is_finite())
    }

    /// The enclosure as a rectangle; `None` when unbounded.
    pub fn to_rect(&self) -> Option<Rect> {
        if !self.is_bounded() {
            return None;
        }
        let lo: [f64; MAX_DIM] = core::array::from_fn(|i| self.c[i].lo);
        let hi: [f64; MAX_DIM] = core::array::from_fn(|i| self.c[i].hi);
        Some(Rect {
            lo: Point::from_slice(&lo[..self.dim]),
            hi: Point::from_slice(&hi[..self.dim]),
        })
    }

    pub fn max_width(&self) -> f64 {
        self.intervals().iter().fold(0.0, |m, v| m.max(v.width()))
    }
}
