// NaN inputs are rejected with negated comparisons throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adjust;
pub mod counting;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod group;
pub mod measures;

pub use error::{Error, Result};
