//! Gibbs measures over random combinatorial optimization problems.
//!
//! The math core (weights, models, oracles, limits, cluster) is generic over
//! the floating-point type; samplers and experiment statistics run in `f64`.
//! Aliases at the crate root name the `f64` instantiations.

pub mod cluster;
pub mod dual;
pub mod error;
pub mod limits;
pub mod models;
pub mod oracles;
pub mod rng;
pub mod samplers;
pub mod selftest;
pub mod stats;
mod scalar;
pub mod weights;

pub use error::{Error, Result};
pub use models::{Configuration, ModelConstants, ProblemModel};
pub use scalar::Scalar;

pub type Distribution = weights::WeightDistribution<f64>;
pub type Weights = weights::WeightVector<f64>;
pub type Partition = oracles::PartitionResult<f64>;
