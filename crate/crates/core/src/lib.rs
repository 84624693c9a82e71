//! Numerical laboratory for von Neumann-type inequalities, Bohr radii and
//! isometric-dilation criteria on finite-dimensional complex Banach spaces.

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bohr;
pub mod calculus;
pub mod dilation;
pub mod error;
pub mod hilbertness;
pub mod operators;
pub mod scenarios;
pub mod spaces;

pub use error::{Error, Result};
pub use num_complex::Complex64;
