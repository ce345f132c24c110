//! Samplers and statistical checks for critical percolation trees, random
//! walks on them, randomly trapped random walks and their scaling limits.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cluster;
pub mod continuum;
pub mod error;
pub mod harness;
pub mod infinite;
pub mod io;
pub mod rng;
pub mod stoch;
pub mod tree;
pub mod walk;

pub use error::{Error, Result};
