//! Coefficient reduction for Ising and QUBO models, minor-embedding
//! coefficient assignment, and samplers that mimic a precision-limited
//! annealer.

pub mod embedding;
pub mod error;
pub mod harness;
pub mod io;
pub mod model;
pub mod problems;
pub mod reduction;
pub mod sampling;

pub use error::{Error, Result};
pub use model::{
    ground_states, rescale, scaling_factors, AcceptRanges, GroundStates, IsingModel, QuboModel,
    ScalingReport, SpinAssignment, Var,
};
pub use sampling::{SampleRecord, SampleSet, Sampler};
