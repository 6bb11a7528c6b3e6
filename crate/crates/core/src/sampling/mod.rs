//! Samplers standing in for the annealer: exhaustive enumeration, simulated
//! annealing, and a wrapper that rescales into the hardware range and adds
//! control noise.

mod exact;
mod noisy;
mod sa;
mod sampleset;

pub use exact::{exact_sample, ExactSampler};
pub use noisy::{noisy_sample, NoiseDistribution, NoiseModel, NoisySampler};
pub use sa::{auto_beta_range, sa_sample, BetaSchedule, SaParams, SimulatedAnnealer};
pub use sampleset::{SampleRecord, SampleSet};

use crate::error::Result;
use crate::model::IsingModel;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::ops::Range;

/// A sampler produces one or more records per read. Read `r` must draw all of
/// its randomness from [`read_rng`]`(seed, r)` so that splitting a run into
/// sub-ranges, or running reads in parallel, gives the same records.
pub trait Sampler: Send + Sync {
    fn sample_reads(&self, model: &IsingModel, seed: u64, reads: Range<u64>) -> Result<SampleSet>;

    fn sample(&self, model: &IsingModel, num_reads: u64, seed: u64) -> Result<SampleSet> {
        self.sample_reads(model, seed, 0..num_reads)
    }
}

impl<S: Sampler + ?Sized> Sampler for Box<S> {
    fn sample_reads(&self, model: &IsingModel, seed: u64, reads: Range<u64>) -> Result<SampleSet> {
        (**self).sample_reads(model, seed, reads)
    }
}

impl<S: Sampler + ?Sized> Sampler for &S {
    fn sample_reads(&self, model: &IsingModel, seed: u64, reads: Range<u64>) -> Result<SampleSet> {
        (**self).sample_reads(model, seed, reads)
    }
}

/// Independent stream per `(seed, read)`.
pub fn read_rng(seed: u64, read: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(read);
    rng
}
