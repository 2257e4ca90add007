//! Geodesic (Riemannian) optimization with Nesterov-style acceleration.
//!
//! The crate provides:
//!
//! - exact differential-geometric primitives (exponential map, logarithm,
//!   parallel transport, distance) for Euclidean space, the unit sphere,
//!   hyperbolic space (hyperboloid model) and SPD matrices with the
//!   affine-invariant metric ([`manifold`]);
//! - geodesically strongly convex test objectives with value/gradient
//!   oracles and checkers for the defining inequalities ([`objective`]);
//! - Riemannian gradient descent and the accelerated scheme with its
//!   constant-step instantiation ([`optimizer`]);
//! - runtime verification of the estimate-sequence machinery and the
//!   convergence bounds ([`diagnostics`]);
//! - numerical and exact verification of the comparison-geometry
//!   inequalities behind the analysis ([`geometry`]).

pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod manifold;
pub mod objective;
pub mod optimizer;
pub(crate) mod scalar;

pub use error::{GeoError, Result};
pub use manifold::{Manifold, ManifoldDescriptor, ManifoldPoint, TangentVector};
pub use objective::Objective;
pub use optimizer::{RagdParams, RagdState, Trace};
