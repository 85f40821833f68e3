//! Evans functions for planar viscous shock profiles of hyperbolic–parabolic
//! conservation laws in flux, balanced-flux and modified balanced-flux form.

// negated float comparisons are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod banded;
pub mod bases;
pub mod error;
pub mod evans;
pub mod formulations;
pub mod linalg;
pub mod lopatinski;
pub mod model;
pub mod ode;
pub mod profile;
pub mod systems;

pub use error::{EvansError, Result};
