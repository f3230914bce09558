//! Motion planning and verification for a non-uniform cantilever beam with
//! tip-mass, driven at the free end.
//!
//! The library computes the generating-function tables of the flat
//! parametrization, builds Gevrey-class reference trajectories, sums the
//! truncated control/field series, simulates the closed-loop PDE for
//! cross-checking, and solves the associated eigenvalue problem.

pub mod error;
pub mod genfun;
pub mod gevrey;
pub mod io;
pub mod jet;
pub mod model;
pub mod planner;
pub mod quadrature;
pub mod sim;
pub mod spectral;

pub use error::{BeamError, Result};
pub use genfun::{compute_gen_tables, GenTable};
pub use model::{BeamParams, BeamState, GridFunction, Profile};
