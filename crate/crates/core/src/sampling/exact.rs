use super::{read_rng, SampleRecord, SampleSet, Sampler};
use crate::error::{Error, Result};
use crate::model::{degeneracy_tolerance, spins_from_index, IsingModel, DEFAULT_ENUMERATION_CAP};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::ops::Range;

/// Draws from the exact distribution by enumerating every state.
/// `temperature = 0` is uniform over ground states, `inf` uniform over all
/// states, anything in between Boltzmann.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactSampler {
    pub temperature: f64,
}

impl ExactSampler {
    pub fn zero_temperature() -> Self {
        ExactSampler { temperature: 0.0 }
    }
}

enum Table {
    Uniform(Vec<u64>),
    Weighted(WeightedIndex<f64>),
}

impl Sampler for ExactSampler {
    fn sample_reads(&self, model: &IsingModel, seed: u64, reads: Range<u64>) -> Result<SampleSet> {
        if !(self.temperature >= 0.0) {
            return Err(Error::param("temperature must be non-negative"));
        }
        let n = model.num_variables();
        if n > DEFAULT_ENUMERATION_CAP {
            return Err(Error::TooManyVariables {
                count: n,
                cap: DEFAULT_ENUMERATION_CAP,
            });
        }
        let c = model.compile();
        let total = 1u64 << n;
        let mut spins = vec![-1i8; n];
        let energies: Vec<f64> = (0..total)
            .map(|idx| {
                spins_from_index(idx, n, &mut spins);
                c.energy(&spins)
            })
            .collect();
        let best = energies.iter().copied().fold(f64::INFINITY, f64::min);
        let table = if self.temperature == 0.0 {
            let tol = degeneracy_tolerance(best);
            Table::Uniform((0..total).filter(|&i| energies[i as usize] <= best + tol).collect())
        } else if self.temperature.is_infinite() {
            Table::Uniform((0..total).collect())
        } else {
            let w = energies.iter().map(|e| (-(e - best) / self.temperature).exp());
            Table::Weighted(WeightedIndex::new(w).map_err(|e| Error::param(e.to_string()))?)
        };
        let mut out = SampleSet::for_model(model);
        for r in reads {
            let mut rng = read_rng(seed, r);
            let idx = match &table {
                Table::Uniform(states) => states[rng.random_range(0..states.len())],
                Table::Weighted(w) => w.sample(&mut rng) as u64,
            };
            spins_from_index(idx, n, &mut spins);
            out.push(SampleRecord {
                spins: spins.clone(),
                energy: energies[idx as usize],
                occurrences: 1,
                chain_broken: false,
            })?;
        }
        Ok(out)
    }
}

pub fn exact_sample(model: &IsingModel, temperature: f64, num_reads: u64, seed: u64) -> Result<SampleSet> {
    ExactSampler { temperature }.sample(model, num_reads, seed)
}
