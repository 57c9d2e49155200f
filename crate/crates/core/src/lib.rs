//! Trajectory planning for a fleet of UAV aerial base stations serving
//! forecast ground demand over a grid of hexagonal regions.

pub mod baselines;
pub mod channel;
pub mod crs;
pub mod demand;
pub mod drs;
pub mod economics;
pub mod error;
pub mod evaluate;
pub mod harness;
pub mod quadrature;
pub mod scenario;
pub mod spgraph;

pub use error::{Error, Result};
