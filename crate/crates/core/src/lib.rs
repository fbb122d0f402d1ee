// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod distributions;
pub mod error;
pub mod gjb;
pub mod io;
pub mod moments;
pub mod rng;
pub mod tables;
pub mod testing;

pub use error::{Error, Result};
