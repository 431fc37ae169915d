use alloc::string::String;
use core::fmt;

use crate::linalg::Point;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Every failure the numerics can report.
///
/// Report-only operations never return an error for a negative finding; they
/// record it in their report instead.
#[derive(Debug, Clone, PartialEq)]
#[non_exhaustive]
pub enum Error {
    /// A point was evaluated outside the declared domain of a map.
    Domain { point: Point },
    /// The expression is undefined at the evaluation point.
    Eval { message: String },
    /// The region is too small for difference quotients to be meaningful.
    DegenerateRegion { radius: f64 },
    /// Malformed expression or config text.
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    /// Piecewise pieces leave part of the domain uncovered.
    CoverageGap { lo: Point, hi: Point },
    DimensionMismatch { expected: usize, found: usize },
    InvalidArgument { message: String },
    Singular,
    IllConditioned { condition: f64 },
    /// The linear part does not map a splitting subspace into itself.
    NotInvariant { defect: f64 },
    NotHyperbolic { tau: f64 },
    PreconditionFailed { message: String },
    NoConvergence { iterations: usize, residual: f64 },
    InversionFailure { node: usize },
    LipBlowup { lip: f64 },
    /// Accepted graphs or fields may only clamp lookups on their outer ring.
    BoundaryClamp { nodes: usize },
    EscapedCompactum { iteration: usize },
    NotOnSet { distance: f64 },
    NotFixed { displacement: f64 },
    DegenerateC { c: f64 },
    ThresholdExceeded {
        inequality: &'static str,
        value: f64,
        bound: f64,
    },
    OrbitEscape { step: usize },
    ZeroConstant { step: usize },
    NotAsymptotic { distance: f64 },
    RegraphFailure { step: usize },
    DepthExceeded { undecided: usize },
}

impl Error {
    pub(crate) fn eval(message: impl Into<String>) -> Self {
        Error::Eval {
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidArgument {
            message: message.into(),
        }
    }

    pub(crate) fn precondition(message: impl Into<String>) -> Self {
        Error::PreconditionFailed {
            message: message.into(),
        }
    }

    /// Short stable identifier, used as the `error` field of reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "DomainError",
            Error::Eval { .. } => "EvalError",
            Error::DegenerateRegion { .. } => "DegenerateRegion",
            Error::Parse { .. } => "ParseError",
            Error::CoverageGap { .. } => "CoverageGap",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::InvalidArgument { .. } => "InvalidArgument",
            Error::Singular => "Singular",
            Error::IllConditioned { .. } => "IllConditioned",
            Error::NotInvariant { .. } => "NotInvariant",
            Error::NotHyperbolic { .. } => "NotHyperbolic",
            Error::PreconditionFailed { .. } => "PreconditionFailed",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::InversionFailure { .. } => "InversionFailure",
            Error::LipBlowup { .. } => "LipBlowup",
            Error::BoundaryClamp { .. } => "BoundaryClamp",
            Error::EscapedCompactum { .. } => "EscapedCompactum",
            Error::NotOnSet { .. } => "NotOnSet",
            Error::NotFixed { .. } => "NotFixed",
            Error::DegenerateC { .. } => "DegenerateC",
            Error::ThresholdExceeded { .. } => "ThresholdExceeded",
            Error::OrbitEscape { .. } => "OrbitEscape",
            Error::ZeroConstant { .. } => "ZeroConstant",
            Error::NotAsymptotic { .. } => "NotAsymptotic",
            Error::RegraphFailure { .. } => "RegraphFailure",
            Error::DepthExceeded { .. } => "DepthExceeded",
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { point } => write!(f, "point {point:?} lies outside the map domain"),
            Error::Eval { message } => write!(f, "evaluation failed: {message}"),
            Error::DegenerateRegion { radius } => {
                write!(f, "region radius {radius:e} is too small for difference quotients")
            }
            Error::Parse {
                line,
                column,
                message,
            } => write!(f, "parse error at {line}:{column}: {message}"),
            Error::CoverageGap { lo, hi } => write!(
                f,
                "pieces do not cover the domain: gap in [{:?}, {:?}]",
                lo.coords(),
                hi.coords()
            ),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::InvalidArgument { message } => write!(f, "invalid argument: {message}"),
            Error::Singular => f.write_str("matrix is singular"),
            Error::IllConditioned { condition } => {
                write!(f, "splitting basis condition number {condition:e} exceeds the cap")
            }
            Error::NotInvariant { defect } => {
                write!(f, "splitting is not invariant under A (coupling {defect:e})")
            }
            Error::NotHyperbolic { tau } => write!(f, "skewness {tau} is not below one"),
            Error::PreconditionFailed { message } => write!(f, "precondition failed: {message}"),
            Error::NoConvergence {
                iterations,
                residual,
            } => write!(
                f,
                "no convergence after {iterations} iterations (last step {residual:e})"
            ),
            Error::InversionFailure { node } => write!(f, "inner inversion failed at node {node}"),
            Error::LipBlowup { lip } => write!(f, "graph Lipschitz constant {lip} exceeds one"),
            Error::BoundaryClamp { nodes } => {
                write!(f, "{nodes} interior nodes needed clamped lookups")
            }
            Error::EscapedCompactum { iteration } => {
                write!(f, "iterate left the compactum at iteration {iteration}")
            }
            Error::NotOnSet { distance } => {
                write!(f, "point is {distance:e} away from one of the graphs")
            }
            Error::NotFixed { displacement } => {
                write!(f, "point is not fixed (displacement {displacement:e})")
            }
            Error::DegenerateC { c } => write!(f, "linearisation constant {c} is too close to one"),
            Error::ThresholdExceeded {
                inequality,
                value,
                bound,
            } => write!(f, "perturbation too large: {inequality} violated ({value:e} vs {bound:e})"),
            Error::OrbitEscape { step } => write!(f, "orbit left the domain at step {step}"),
            Error::ZeroConstant { step } => {
                write!(f, "local Lipschitz constant vanished at step {step}")
            }
            Error::NotAsymptotic { distance } => write!(
                f,
                "orbit is not asymptotic to the periodic orbit (distance {distance:e})"
            ),
            Error::RegraphFailure { step } => {
                write!(f, "iterated disk is not a graph over the window at step {step}")
            }
            Error::DepthExceeded { undecided } => {
                write!(f, "{undecided} cells left undecided at the depth cap")
            }
        }
    }
}

impl core::error::Error for Error {}
