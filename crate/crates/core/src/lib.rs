//! Stein–Malliavin distance bounds for finite Wiener chaos expansions over a
//! finite-dimensional Gaussian model.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod breuer_major;
pub mod chaos;
pub mod cli;
pub mod combin;
pub mod error;
pub mod pearson;
pub mod quadrature;
pub mod simulate;
pub mod tensor;
pub mod wick;

pub use error::{Error, Result};
