//! Magnetic Neumann Laplacian spectra near boundaries and corners.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod fem2d;
pub mod harness;
pub mod model1d;
pub mod numerics;
pub mod sector;
pub mod semiclassics;
pub mod spectra;

pub use error::{Error, Result};
