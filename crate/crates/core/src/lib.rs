// `!(x <= tol)` is used on purpose so that NaN counts as a failure
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dilations;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod optimize;
pub mod pinching;
pub mod json;
pub mod linalg;
pub mod moments;
pub mod states;
pub mod tolerance;

pub use error::{Error, Result};
pub use tolerance::ToleranceConfig;
