//! Groundstates, best constants and symmetry breaking for -Δu = V(|x|)|u|^{p-1}u
//! on the unit ball, where V = (1 - |x|/R)^α inside the shell |x| = R and
//! V = ((|x| - R)/(1 - R))^α outside it.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod axisym;
pub mod ball;
pub mod error;
pub mod experiments;
pub mod fem1d;
pub mod mesh;
pub mod minimize;
pub mod quadrature;
pub mod radial;
pub mod special;
pub mod tridiag;
pub mod weight;

pub use error::{Error, Result};
