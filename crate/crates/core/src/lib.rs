//! Numerics for finite-dimensional dynamical systems generated by Lipschitz
//! maps.
//!
//! The crate is `no_std` (it needs `alloc`) and is organised bottom-up:
//!
//! * [`linalg`], [`region`], [`interval`], [`expr`], [`map`] and [`lip`] hold
//!   the shared geometry: small fixed-size points and matrices in the maximum
//!   norm, boxes, the map expression grammar and sampled (reverse) Lipschitz
//!   estimates.
//! * [`hyperbolic`] certifies `A + φ` as Lipschitz hyperbolic and runs the
//!   contraction solvers for fixed points and inversion.
//! * [`manifolds`] computes local stable/unstable manifolds with the graph
//!   transform, [`conjugacy`] solves the linearising conjugacy
//!   `h ∘ f = A ∘ h`, and [`transversal`] locates and certifies intersections
//!   of Lipschitz graphs.
//! * [`onedim`] covers sinks, sources, permanence under Lipschitz perturbation
//!   and δ-Lyapunov exponents of interval maps.
//! * [`chaoslab`] runs the λ-lemma, horseshoe and heteroclinic-chain
//!   experiments.
//!
//! Everything is deterministic: sampling uses low-discrepancy sequences seeded
//! explicitly, and every reduction runs in a fixed order.
#![no_std]

extern crate alloc;

pub mod chaoslab;
pub mod conjugacy;
pub mod contraction;
mod error;
pub mod expr;
pub mod grid;
pub mod hyperbolic;
pub mod interval;
pub mod linalg;
pub mod lip;
pub mod lowdisc;
pub mod manifolds;
pub mod map;
pub mod onedim;
pub mod region;
pub mod transversal;

pub use error::{Error, Result};
pub use linalg::{Matrix, Point, MAX_DIM};
pub use lip::{LipEstimate, SamplingBudget};
pub use map::{LipMap, MapSpec};
pub use region::{Ball, Rect};

/// Oversampling factor applied to sampled Lipschitz constants before they are
/// compared against a certification threshold.
pub const DEFAULT_MARGIN: f64 = 1.05;
