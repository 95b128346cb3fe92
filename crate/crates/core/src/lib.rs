//! Total-variation blind deconvolution with a free-boundary (valid) blur model.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod alternating;
pub mod conv;
pub mod deblur;
pub mod diff;
pub mod error;
pub mod eval;
pub mod image;
pub mod io;
pub mod landscape;
pub mod tv1d;
pub mod usolve;

pub use error::{Error, Result};
pub use image::{BoundaryMode, Image, Kernel};
