//! Map representations.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::expr::{parse_expr, parse_pred, Expr, Pred};
use crate::interval::{IBox, Interval};
use crate::linalg::{Matrix, Point};
use crate::region::{Ball, Rect};

/// Anything that can be evaluated pointwise. Lipschitz estimates, solvers
/// and graph transforms are generic over this trait.
pub trait LipMap {
    /// Dimension of the argument.
    fn dim(&self) -> usize;

    /// Dimension of the value; defaults to [`LipMap::dim`].
    fn out_dim(&self) -> usize {
        self.dim()
    }

    fn eval(&self, x: &Point) -> Result<Point>;

    /// Declared domain, when the map has one.
    fn domain(&self) -> Option<Ball> {
        None
    }
}

impl<T: LipMap + ?Sized> LipMap for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn out_dim(&self) -> usize {
        (**self).out_dim()
    }
    fn eval(&self, x: &Point) -> Result<Point> {
        (**self).eval(x)
    }
    fn domain(&self) -> Option<Ball> {
        (**self).domain()
    }
}

impl<T: LipMap + ?Sized> LipMap for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn out_dim(&self) -> usize {
        (**self).out_dim()
    }
    fn eval(&self, x: &Point) -> Result<Point> {
        (**self).eval(x)
    }
    fn domain(&self) -> Option<Ball> {
        (**self).domain()
    }
}

/// A closure viewed as a map.
#[derive(Clone)]
pub struct FnMap<F> {
    dim: usize,
    out_dim: usize,
    f: F,
}

impl<F: Fn(&Point) -> Result<Point>> FnMap<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnMap { dim, out_dim: dim, f }
    }

    pub fn with_out_dim(dim: usize, out_dim: usize, f: F) -> Self {
        FnMap { dim, out_dim, f }
    }
}

impl<F: Fn(&Point) -> Result<Point>> LipMap for FnMap<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn out_dim(&self) -> usize {
        self.out_dim
    }
    fn eval(&self, x: &Point) -> Result<Point> {
        (self.f)(x)
    }
}

/// One branch of a piecewise map: where `when` holds, the value is `expr`.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub when: Pred,
    pub expr: Vec<Expr>,
}

impl Piece {
    pub fn parse(when: &str, exprs: &[&str]) -> Result<Piece> {
        Ok(Piece {
            when: parse_pred(when)?,
            expr: exprs.iter().map(|e| parse_expr(e)).collect::<Result<_>>()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MapSpec {
    /// Closed-form map on a domain cube; the first piece whose predicate
    /// holds supplies the value.
    Piecewise { domain: Ball, pieces: Vec<Piece> },
    /// `x ↦ A x + φ(x)`.
    LinearPlusLip { a: Matrix, phi: Box<MapSpec> },
    /// `k`-fold composition.
    Iterate { inner: Box<MapSpec>, k: usize },
    /// `x ↦ inner(x + shift) - shift`, moving a point `shift` to the origin.
    Translate { inner: Box<MapSpec>, shift: Point },
    /// `x ↦ P⁻¹ inner(P x)` for the basis matrix `P`.
    Conjugate {
        inner: Box<MapSpec>,
        basis: Matrix,
        inverse: Matrix,
    },
}

impl MapSpec {
    pub fn piecewise(domain: Ball, pieces: Vec<Piece>) -> Result<MapSpec> {
        if pieces.is_empty() {
            return Err(Error::invalid("a piecewise map needs at least one piece"));
        }
        let n = domain.dim();
        for p in &pieces {
            if p.expr.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: p.expr.len(),
                });
            }
            let used = p
                .expr
                .iter()
                .filter_map(Expr::max_var)
                .chain(p.when.max_var())
                .max();
            if let Some(v) = used {
                if v >= n {
                    return Err(Error::invalid("expression uses a coordinate beyond the map dimension"));
                }
            }
        }
        Ok(MapSpec::Piecewise { domain, pieces })
    }

    /// A single-expression map valid on the whole domain.
    pub fn expr(domain: Ball, exprs: &[&str]) -> Result<MapSpec> {
        MapSpec::piecewise(domain, vec![Piece::parse("true", exprs)?])
    }

    /// Builds a piecewise map from `(predicate, component expressions)` text.
    pub fn parse_pieces(domain: Ball, pieces: &[(&str, &[&str])]) -> Result<MapSpec> {
        let pieces = pieces
            .iter()
            .map(|(w, e)| Piece::parse(w, e))
            .collect::<Result<Vec<_>>>()?;
        MapSpec::piecewise(domain, pieces)
    }

    pub fn linear_plus_lip(a: Matrix, phi: MapSpec) -> Result<MapSpec> {
        if !a.is_square() || a.rows() != phi.dim() {
            return Err(Error::DimensionMismatch {
                expected: phi.dim(),
                found: a.rows(),
            });
        }
        Ok(MapSpec::LinearPlusLip {
            a,
            phi: Box::new(phi),
        })
    }

    pub fn iterate(inner: MapSpec, k: usize) -> Result<MapSpec> {
        if k == 0 {
            return Err(Error::invalid("iterate count must be positive"));
        }
        Ok(MapSpec::Iterate {
            inner: Box::new(inner),
            k,
        })
    }

    pub fn translate(inner: MapSpec, shift: Point) -> Result<MapSpec> {
        if shift.dim() != inner.dim() {
            return Err(Error::DimensionMismatch {
                expected: inner.dim(),
                found: shift.dim(),
            });
        }
        Ok(MapSpec::Translate {
            inner: Box::new(inner),
            shift,
        })
    }

    pub fn conjugate(inner: MapSpec, basis: Matrix) -> Result<MapSpec> {
        let inverse = basis.inverse()?;
        Ok(MapSpec::Conjugate {
            inner: Box::new(inner),
            basis,
            inverse,
        })
    }

    /// Declared domain of the outermost map, as far as it is a cube.
    pub fn domain(&self) -> Option<Ball> {
        match self {
            MapSpec::Piecewise { domain, .. } => Some(*domain),
            MapSpec::LinearPlusLip { phi, .. } => phi.domain(),
            MapSpec::Iterate { inner, .. } => inner.domain(),
            MapSpec::Translate { inner, shift } => inner
                .domain()
                .and_then(|d| Ball::new(d.center() - *shift, d.radius()).ok()),
            MapSpec::Conjugate { .. } => None,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            MapSpec::Piecewise { domain, .. } => domain.dim(),
            MapSpec::LinearPlusLip { a, .. } => a.rows(),
            MapSpec::Iterate { inner, .. } | MapSpec::Translate { inner, .. } => inner.dim(),
            MapSpec::Conjugate { basis, .. } => basis.rows(),
        }
    }

    pub fn eval(&self, x: &Point) -> Result<Point> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.dim(),
            });
        }
        match self {
            MapSpec::Piecewise { domain, pieces } => {
                if !domain.contains(x) {
                    return Err(Error::Domain { point: *x });
                }
                for p in pieces {
                    if p.when.holds(x.coords())? {
                        let mut out = Point::zeros(x.dim());
                        for (i, e) in p.expr.iter().enumerate() {
                            out[i] = e.eval(x.coords())?;
                        }
                        return Ok(out);
                    }
                }
                Err(Error::eval("no piece covers the evaluation point"))
            }
            MapSpec::LinearPlusLip { a, phi } => Ok(a.apply(x) + phi.eval(x)?),
            MapSpec::Iterate { inner, k } => {
                let mut y = *x;
                for _ in 0..*k {
                    y = inner.eval(&y)?;
                }
                Ok(y)
            }
            MapSpec::Translate { inner, shift } => Ok(inner.eval(&(*x + *shift))? - *shift),
            MapSpec::Conjugate {
                inner,
                basis,
                inverse,
            } => Ok(inverse.apply(&inner.eval(&basis.apply(x))?)),
        }
    }

    /// Interval enclosure of the image of `b`. Returns `None` when no part of
    /// `b` lies in the domain or no piece applies anywhere on it.
    pub fn eval_box(&self, b: &IBox) -> Option<IBox> {
        match self {
            MapSpec::Piecewise { domain, pieces } => {
                let dr = domain.to_rect();
                let br = b.to_rect()?;
                let clipped = IBox::from_rect(&dr.intersection(&br)?);
                let x = clipped.intervals();
                let mut acc: Option<IBox> = None;
                for p in pieces {
                    let status = p.when.holds_interval(x);
                    if status == Some(false) {
                        continue;
                    }
                    let iv: Vec<Interval> = p.expr.iter().map(|e| e.eval_interval(x)).collect();
                    let img = IBox::from_intervals(&iv);
                    acc = Some(match acc {
                        Some(a) => a.hull(&img),
                        None => img,
                    });
                    if status == Some(true) {
                        break;
                    }
                }
                acc
            }
            MapSpec::LinearPlusLip { a, phi } => {
                let p = phi.eval_box(b)?;
                let ab = mat_box(a, b);
                let iv: Vec<Interval> = (0..p.dim()).map(|i| ab.get(i) + p.get(i)).collect();
                Some(IBox::from_intervals(&iv))
            }
            MapSpec::Iterate { inner, k } => {
                let mut y = *b;
                for _ in 0..*k {
                    y = inner.eval_box(&y)?;
                }
                Some(y)
            }
            MapSpec::Translate { inner, shift } => {
                let s = IBox::from_point(shift);
                let y = inner.eval_box(&box_add(b, &s))?;
                Some(box_sub(&y, &s))
            }
            MapSpec::Conjugate {
                inner,
                basis,
                inverse,
            } => {
                let y = inner.eval_box(&mat_box(basis, b))?;
                Some(mat_box(inverse, &y))
            }
        }
    }

    /// Verifies that the pieces of every piecewise map inside `self` cover
    /// its domain, by interval subdivision.
    pub fn check_coverage(&self) -> Result<()> {
        match self {
            MapSpec::Piecewise { domain, pieces } => coverage(domain, pieces),
            MapSpec::LinearPlusLip { phi, .. } => phi.check_coverage(),
            MapSpec::Iterate { inner, .. }
            | MapSpec::Translate { inner, .. }
            | MapSpec::Conjugate { inner, .. } => inner.check_coverage(),
        }
    }
}

impl LipMap for MapSpec {
    fn dim(&self) -> usize {
        MapSpec::dim(self)
    }
    fn eval(&self, x: &Point) -> Result<Point> {
        MapSpec::eval(self, x)
    }
    fn domain(&self) -> Option<Ball> {
        MapSpec::domain(self)
    }
}

fn mat_box(a: &Matrix, b: &IBox) -> IBox {
    let iv: Vec<Interval> = (0..a.rows())
        .map(|i| {
            (0..a.cols()).fold(Interval::point(0.0), |s, j| {
                s + Interval::point(a.get(i, j)) * b.get(j)
            })
        })
        .collect();
    IBox::from_intervals(&iv)
}

fn box_add(a: &IBox, b: &IBox) -> IBox {
    let iv: Vec<Interval> = (0..a.dim()).map(|i| a.get(i) + b.get(i)).collect();
    IBox::from_intervals(&iv)
}

fn box_sub(a: &IBox, b: &IBox) -> IBox {
    let iv: Vec<Interval> = (0..a.dim()).map(|i| a.get(i) - b.get(i)).collect();
    IBox::from_intervals(&iv)
}

const COVERAGE_CELL_CAP: usize = 1 << 16;

fn coverage(domain: &Ball, pieces: &[Piece]) -> Result<()> {
    let root = domain.to_rect();
    let min_width = 1e-9 * 2.0 * domain.radius();
    let mut stack = vec![root];
    let mut gaps: Vec<Rect> = Vec::new();
    let mut visited = 0usize;
    while let Some(cell) = stack.pop() {
        visited += 1;
        let x = IBox::from_rect(&cell);
        let mut undecided = false;
        let mut covered = false;
        for p in pieces {
            match p.when.holds_interval(x.intervals()) {
                Some(true) => {
                    covered = true;
                    break;
                }
                None => undecided = true,
                Some(false) => {}
            }
        }
        if covered {
            continue;
        }
        if !undecided {
            gaps.push(cell);
            continue;
        }
        let axis = (0..cell.dim())
            .max_by(|&i, &j| cell.width(i).total_cmp(&cell.width(j)))
            .unwrap_or(0);
        if cell.width(axis) <= min_width || visited + stack.len() > COVERAGE_CELL_CAP {
            // Too small to split: decide by the midpoint and the corners.
            let probes = corners(&cell);
            let uncovered = probes.iter().any(|pt| {
                !pieces
                    .iter()
                    .any(|p| p.when.holds(pt.coords()).unwrap_or(false))
            });
            if uncovered {
                gaps.push(cell);
            }
            continue;
        }
        let (l, r) = cell.bisect(axis);
        stack.push(r);
        stack.push(l);
    }
    if gaps.is_empty() {
        return Ok(());
    }
    // Report the connected gap component containing the first gap cell found.
    let mut hull = gaps[0];
    let mut rest: Vec<Rect> = gaps[1..].to_vec();
    loop {
        let before = rest.len();
        rest.retain(|g| {
            if g.touches(&hull) {
                hull = hull.hull(g);
                false
            } else {
                true
            }
        });
        if rest.len() == before {
            break;
        }
    }
    Err(Error::CoverageGap {
        lo: hull.lo,
        hi: hull.hi,
    })
}

fn corners(cell: &Rect) -> Vec<Point> {
    let n = cell.dim();
    let mut out = vec![cell.mid()];
    for mask in 0..(1usize << n) {
        let mut p = cell.lo;
        for i in 0..n {
            if mask & (1 << i) != 0 {
                p[i] = cell.hi[i];
            }
        }
        out.push(p);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Ball {
        Ball::interval(-1.0, 1.0).unwrap()
    }

    #[test]
    fn logistic_value() {
        let m = MapSpec::expr(Ball::interval(0.0, 1.0).unwrap(), &["3.3*x*(1-x)"]).unwrap();
        assert!((m.eval(&Point::from_slice(&[0.5])).unwrap()[0] - 0.825).abs() < 1e-15);
    }

    #[test]
    fn linear_plus_lip_adds_parts() {
        let dom = Ball::new(Point::zeros(2), 2.0).unwrap();
        let phi = MapSpec::expr(dom, &["0", "0"]).unwrap();
        let m = MapSpec::linear_plus_lip(Matrix::diag(&[0.5, 2.0]), phi).unwrap();
        let y = m.eval(&Point::from_slice(&[1.0, 1.0])).unwrap();
        assert_eq!(y, Point::from_slice(&[0.5, 2.0]));
    }

    #[test]
    fn piecewise_first_match_and_domain() {
        let dom = Ball::interval(-1.0, 3.0).unwrap();
        let m = MapSpec::parse_pieces(
            dom,
            &[
                ("x < 0", &["2*x"]),
                ("x < 0.1", &["0.1*x"]),
                ("x <= 1", &["x^2"]),
                ("true", &["0.5*x+0.5"]),
            ],
        )
        .unwrap();
        assert_eq!(m.eval(&Point::from_slice(&[2.0])).unwrap()[0], 1.5);
        assert_eq!(m.eval(&Point::from_slice(&[1.0])).unwrap()[0], 1.0);
        assert!(matches!(
            m.eval(&Point::from_slice(&[3.5])),
            Err(Error::Domain { .. })
        ));
        assert!(m.check_coverage().is_ok());
    }

    #[test]
    fn gap_is_reported_as_a_box() {
        let dom = Ball::interval(-1.0, 2.0).unwrap();
        let m = MapSpec::parse_pieces(
            dom,
            &[
                ("x < 0", &["2*x"]),
                ("0.1 <= x <= 1", &["x^2"]),
                ("x > 1", &["0.5*x+0.5"]),
            ],
        )
        .unwrap();
        match m.check_coverage() {
            Err(Error::CoverageGap { lo, hi }) => {
                assert!(lo[0].abs() < 1e-8, "{lo:?}");
                assert!((hi[0] - 0.1).abs() < 1e-8, "{hi:?}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wrappers_compose() {
        let m = MapSpec::expr(unit(), &["x^2"]).unwrap();
        let it = MapSpec::iterate(m.clone(), 2).unwrap();
        assert!((it.eval(&Point::from_slice(&[0.5])).unwrap()[0] - 0.0625).abs() < 1e-15);
        let tr = MapSpec::translate(m, Point::from_slice(&[0.5])).unwrap();
        // (0 + 0.5)^2 - 0.5
        assert_eq!(tr.eval(&Point::from_slice(&[0.0])).unwrap()[0], -0.25);
    }

    #[test]
    fn box_images_enclose_point_images() {
        let dom = Ball::new(Point::splat(2, 0.5), 0.5).unwrap();
        let m = MapSpec::parse_pieces(dom, &[("x <= 1/3", &["3*x", "y/3"]), ("true", &["x", "2"])]).unwrap();
        let b = IBox::from_rect(&Rect::new(Point::from_slice(&[0.0, 0.0]), Point::from_slice(&[0.2, 1.0])).unwrap());
        let img = m.eval_box(&b).unwrap();
        assert!(img.get(0).contains(0.6) && img.get(1).contains(1.0 / 3.0));
        assert!(img.get(0).hi < 0.61);
    }
}
