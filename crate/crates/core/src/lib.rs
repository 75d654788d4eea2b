//! Numerical toolkit for mild solutions of the fractional incompressible
//! Navier–Stokes equations on periodic boxes, together with
//! variable-exponent Lebesgue norms used to monitor them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
mod fft;
pub mod grid;
pub mod io;
pub mod kernels;
pub mod mild;
pub mod operators;
pub mod quad;
pub mod random;
pub mod theorems;
pub mod varlp;

pub use error::{Error, Result};
