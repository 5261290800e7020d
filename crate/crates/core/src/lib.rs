// `!(x > 0.0)` is used deliberately so NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod datagen;
pub mod discovery;
pub mod effects;
pub mod error;
pub mod graph;
pub mod io;
pub mod scm;
pub mod stats;

pub use error::{Error, Result};
