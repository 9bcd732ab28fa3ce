//! Ergodic capacity of a high-throughput satellite forward link with an
//! optical feeder hop and a multibeam RF user hop.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beamforming;
pub mod capacity;
pub mod channels;
pub mod cli;
pub mod error;
pub mod feeder;
pub mod quadrature;
pub mod rng;
pub mod specfun;
pub mod stats;

pub use error::{Error, Result};
