//! Validity-domain modeling for data-driven surrogates.
//!
//! The crate follows a three-stage workflow: inspect the topology of the
//! training inputs with persistent homology, model the region covered by the
//! data either by its convex hull or by a one-class SVM, and finally minimize
//! a surrogate objective by deterministic branch-and-bound subject to the
//! learned validity constraint.

pub mod ann;
pub mod datasets;
pub mod error;
pub mod hull;
pub mod ocsvm;
pub mod pipeline;
pub mod relax;
pub mod solver;
mod svg;
pub mod tda;

pub use error::{Error, Result};
