//! Map-config files.
//!
//! A config is a JSON object describing one [`MapSpec`]:
//!
//! ```json
//! {
//!   "dim": 2,
//!   "domain": { "center": [0, 0], "radius": 2 },
//!   "kind": "linear_plus_lip",
//!   "matrix": [[2, 0], [0, 0.5]],
//!   "splitting": { "stable": [[0, 1]], "unstable": [[1, 0]] },
//!   "phi": { "pieces": [{ "expr": ["0", "0.2*sin(x)"] }] }
//! }
//! ```
//!
//! `kind` is one of `piecewise` (the default), `linear_plus_lip`, `iterate`,
//! `translate` and `conjugate`. Nested `phi` and `inner` configs inherit
//! `dim` and `domain` from their parent. Piecewise configs are checked for
//! coverage of their domain.

use std::path::Path;

use lipdyn_core::hyperbolic::{analyze_linear, HyperbolicLinear, Splitting};
use lipdyn_core::map::Piece;
use lipdyn_core::{Ball, Error, MapSpec, Matrix, Point};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    #[default]
    Piecewise,
    LinearPlusLip,
    Iterate,
    Translate,
    Conjugate,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Exprs {
    One(String),
    Many(Vec<String>),
}

impl Exprs {
    fn as_vec(&self) -> Vec<&str> {
        match self {
            Exprs::One(s) => vec![s.as_str()],
            Exprs::Many(v) => v.iter().map(String::as_str).collect(),
        }
    }
}

fn always() -> String {
    "true".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceConfig {
    #[serde(default = "always")]
    pub when: String,
    pub expr: Exprs,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplittingConfig {
    pub stable: Vec<Vec<f64>>,
    pub unstable: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    pub dim: Option<usize>,
    pub domain: Option<DomainConfig>,
    #[serde(default)]
    pub kind: Kind,
    pub pieces: Option<Vec<PieceConfig>>,
    /// Shorthand for a single piece that holds everywhere.
    pub expr: Option<Exprs>,
    pub matrix: Option<Vec<Vec<f64>>>,
    pub phi: Option<Box<MapConfig>>,
    pub splitting: Option<SplittingConfig>,
    pub inner: Option<Box<MapConfig>>,
    pub k: Option<usize>,
    pub shift: Option<Vec<f64>>,
    pub basis: Option<Vec<Vec<f64>>>,
    /// A known fixed point, used by the subcommands that work near one.
    pub fixed_point: Option<Vec<f64>>,
}

/// A parsed config: the map plus the optional hyperbolic data.
#[derive(Debug, Clone)]
pub struct System {
    pub map: MapSpec,
    pub splitting: Option<Splitting>,
    pub fixed_point: Option<Point>,
}

impl System {
    /// `(A, φ)` for a `linear_plus_lip` config. Without an explicit
    /// splitting a diagonal `A` is split along the coordinate axes.
    pub fn hyperbolic(&self) -> Result<(HyperbolicLinear, &MapSpec), CliError> {
        let MapSpec::LinearPlusLip { a, phi } = &self.map else {
            return Err(CliError::usage("this subcommand needs a linear_plus_lip config"));
        };
        let splitting = match self.splitting {
            Some(s) => s,
            None => coordinate_splitting(a)?,
        };
        Ok((analyze_linear(a, &splitting)?, phi))
    }
}

fn coordinate_splitting(a: &Matrix) -> Result<Splitting, CliError> {
    let n = a.rows();
    let off = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|(i, j)| i != j);
    if off.into_iter().any(|(i, j)| a.get(i, j) != 0.0) {
        return Err(CliError::usage("a non-diagonal matrix needs an explicit splitting"));
    }
    let stable: Vec<usize> = (0..n).filter(|&i| a.get(i, i).abs() < 1.0).collect();
    Ok(Splitting::coordinate(n, &stable)?)
}

fn parse_error(message: impl Into<String>) -> Error {
    Error::Parse {
        line: 0,
        column: 0,
        message: message.into(),
    }
}

fn with_context(path: &str, e: Error) -> Error {
    match e {
        Error::Parse { line, column, message } => Error::Parse {
            line,
            column,
            message: format!("{path}: {message}"),
        },
        other => other,
    }
}

fn point(v: &[f64], what: &str) -> Result<Point, Error> {
    Point::new(v).map_err(|_| parse_error(format!("{what}: bad vector of length {}", v.len())))
}

fn matrix(rows: &[Vec<f64>], what: &str) -> Result<Matrix, Error> {
    let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
    Matrix::from_rows(&refs).map_err(|e| with_context(what, e))
}

impl MapConfig {
    fn inherit(&self, parent_dim: Option<usize>, parent_domain: Option<&DomainConfig>) -> MapConfig {
        let mut c = self.clone();
        c.dim = c.dim.or(parent_dim);
        if c.domain.is_none() {
            c.domain = parent_domain.cloned();
        }
        c
    }

    fn build(&self, path: &str) -> Result<MapSpec, Error> {
        let need = |o: bool, field: &str| {
            if o {
                Ok(())
            } else {
                Err(parse_error(format!("{path}: missing field `{field}`")))
            }
        };
        let child = |c: &Option<Box<MapConfig>>, name: &str| -> Result<MapSpec, Error> {
            let c = c.as_ref().ok_or_else(|| parse_error(format!("{path}: missing field `{name}`")))?;
            c.inherit(self.dim, self.domain.as_ref()).build(&format!("{path}.{name}"))
        };
        let spec = match self.kind {
            Kind::Piecewise => {
                let d = self.domain.as_ref().ok_or_else(|| parse_error(format!("{path}: missing field `domain`")))?;
                let domain = Ball::new(point(&d.center, "domain.center")?, d.radius)
                    .map_err(|e| with_context(&format!("{path}.domain"), e))?;
                let single;
                let pieces: &[PieceConfig] = match (&self.pieces, &self.expr) {
                    (Some(p), None) => p,
                    (None, Some(e)) => {
                        single = [PieceConfig {
                            when: always(),
                            expr: e.clone(),
                        }];
                        &single
                    }
                    _ => return Err(parse_error(format!("{path}: give exactly one of `pieces` and `expr`"))),
                };
                let parsed = pieces
                    .iter()
                    .enumerate()
                    .map(|(i, p)| {
                        Piece::parse(&p.when, &p.expr.as_vec()).map_err(|e| with_context(&format!("{path}.pieces[{i}]"), e))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let spec = MapSpec::piecewise(domain, parsed).map_err(|e| with_context(path, e))?;
                spec.check_coverage()?;
                spec
            }
            Kind::LinearPlusLip => {
                need(self.matrix.is_some(), "matrix")?;
                let a = matrix(self.matrix.as_ref().expect("checked"), &format!("{path}.matrix"))?;
                MapSpec::linear_plus_lip(a, child(&self.phi, "phi")?)?
            }
            Kind::Iterate => {
                need(self.k.is_some(), "k")?;
                MapSpec::iterate(child(&self.inner, "inner")?, self.k.expect("checked"))?
            }
            Kind::Translate => {
                need(self.shift.is_some(), "shift")?;
                let s = point(self.shift.as_ref().expect("checked"), "shift")?;
                MapSpec::translate(child(&self.inner, "inner")?, s)?
            }
            Kind::Conjugate => {
                need(self.basis.is_some(), "basis")?;
                let b = matrix(self.basis.as_ref().expect("checked"), &format!("{path}.basis"))?;
                MapSpec::conjugate(child(&self.inner, "inner")?, b)?
            }
        };
        if let Some(d) = self.dim {
            if d != spec.dim() {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: spec.dim(),
                });
            }
        }
        Ok(spec)
    }
}

/// Parses and validates config text.
pub fn parse_map_config(text: &str) -> Result<System, Error> {
    let cfg: MapConfig = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let map = cfg.build("$")?;
    let splitting = match &cfg.splitting {
        Some(s) => {
            let pts = |v: &[Vec<f64>]| v.iter().map(|c| point(c, "splitting")).collect::<Result<Vec<_>, _>>();
            Some(Splitting::new(&pts(&s.stable)?, &pts(&s.unstable)?)?)
        }
        None => None,
    };
    let fixed_point = cfg.fixed_point.as_deref().map(|v| point(v, "fixed_point")).transpose()?;
    Ok(System {
        map,
        splitting,
        fixed_point,
    })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Raw config bytes with their hash, read before parsing so that a report can
/// name the file even when it fails to parse.
#[derive(Debug, Clone)]
pub struct Source {
    pub path: String,
    pub sha256: String,
    pub text: String,
}

pub fn read_source(path: &Path) -> Result<Source, CliError> {
    let bytes = std::fs::read(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let sha256 = sha256_hex(&bytes);
    let text = String::from_utf8(bytes).map_err(|_| CliError::Core(parse_error("config is not UTF-8")))?;
    Ok(Source {
        path: path.display().to_string(),
        sha256,
        text,
    })
}
