//! Bohr-Sommerfeld quantization for S-states of d-dimensional radial
//! potentials, a Lagrange-mesh reference eigensolver, and extraction and
//! fitting of the WKB correction γ that makes the quantization exact.

// `!(x > 0.0)` is deliberate: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod error;
pub mod specfun;

pub use error::{Error, Result};
pub mod potentials;
pub mod action;
pub mod bs_solver;
pub mod mesh_solver;
pub mod wkb_correction;
pub mod report;
pub mod cli;
mod roots;
