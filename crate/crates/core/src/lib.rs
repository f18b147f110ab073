//! Estimation, hypothesis tests, and confidence intervals for a common risk
//! difference across strata of combined bilateral and unilateral binary
//! outcomes.

// `!(x < y)` is used on purpose so NaN lands on the rejecting side.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimation;
pub mod inference;
pub mod intervals;
pub mod model;
pub mod montecarlo;
pub mod numkit;
pub mod table;

pub use error::{Error, Result};
