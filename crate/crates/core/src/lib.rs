//! Variable-exponent modulars and norms, double-phase energies on the ball
//! and solvers for their critical points in the radial Lane-Emden setting
//! `-div(|grad u|^{p(x)-2} grad u) - div(a(x) |grad u|^{m(x)-2} grad u) = lambda |u|^{q(x)-2} u`.

// Index loops mirror the stencils; NaN-rejecting guards are written as `!(x > y)`.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod energy;
pub mod error;
pub mod exponent_fields;
pub mod linalg;
pub mod modular_norms;
pub mod parallel;
pub mod radial;
pub mod solvers;

pub use error::{Error, Result};
