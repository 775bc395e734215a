//! Numerical core for experiments with extremal Beltrami differentials on the
//! unit disk: fat Cantor supports, polar quadrature, Teichmüller forms and their
//! deformations, Reich-Strebel type inequalities, Hamilton-sequence searches and
//! a spectral Beltrami solver.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, configuration and
//! the command line live in the `blab` crate.
#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` is deliberate: it rejects NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod beltrami;
pub mod cantor;
pub mod error;
pub mod hamilton;
pub mod inequalities;
pub mod quadrature;
pub mod sampling;
pub mod solver;
mod sum;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use sum::{CompensatedSum, ComplexSum};
