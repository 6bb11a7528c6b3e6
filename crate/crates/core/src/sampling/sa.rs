use super::{read_rng, SampleRecord, SampleSet, Sampler};
use crate::error::{Error, Result};
use crate::model::{CompiledIsing, IsingModel, ZERO_TOL};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::ops::Range;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaParams {
    pub num_reads: u64,
    pub sweeps: u32,
    pub beta_start: f64,
    pub beta_end: f64,
    pub seed: u64,
}

impl Default for SaParams {
    fn default() -> Self {
        SaParams {
            num_reads: 100,
            sweeps: 1000,
            beta_start: 0.1,
            beta_end: 10.0,
            seed: 0,
        }
    }
}

impl SaParams {
    pub fn validate(&self) -> Result<()> {
        if self.num_reads == 0 {
            return Err(Error::param("num_reads must be at least 1"));
        }
        if self.sweeps == 0 {
            return Err(Error::param("sweeps must be at least 1"));
        }
        if !(self.beta_start > 0.0) || !(self.beta_end >= self.beta_start) || !self.beta_end.is_finite() {
            return Err(Error::param(format!(
                "need beta_end >= beta_start > 0, got {} and {}",
                self.beta_start, self.beta_end
            )));
        }
        Ok(())
    }
}

/// Inverse-temperature range scaled to the model: the hot end accepts the
/// largest single flip with probability 1/2, the cold end the smallest with
/// probability 1/100.
pub fn auto_beta_range(model: &IsingModel) -> (f64, f64) {
    let c = model.compile();
    let mut max_delta: f64 = 0.0;
    let mut min_delta = f64::INFINITY;
    for i in 0..c.len() {
        let mut total = c.h[i].abs();
        let mut smallest = if c.h[i].abs() >= ZERO_TOL { c.h[i].abs() } else { f64::INFINITY };
        for &(_, w) in &c.adj[i] {
            total += w.abs();
            if w.abs() >= ZERO_TOL {
                smallest = smallest.min(w.abs());
            }
        }
        max_delta = max_delta.max(2.0 * total);
        min_delta = min_delta.min(2.0 * smallest);
    }
    if max_delta <= 0.0 || !min_delta.is_finite() {
        return (0.1, 10.0);
    }
    let hot = std::f64::consts::LN_2 / max_delta;
    let cold = 100f64.ln() / min_delta;
    (hot, cold.max(hot))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BetaSchedule {
    Geometric { beta_start: f64, beta_end: f64 },
    /// [`auto_beta_range`] of whatever model is being sampled.
    Auto,
}

/// Single-spin-flip Metropolis annealer (random-scan) with a geometric
/// schedule; a sweep is `n` flip attempts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulatedAnnealer {
    pub sweeps: u32,
    pub schedule: BetaSchedule,
}

impl Default for SimulatedAnnealer {
    fn default() -> Self {
        SimulatedAnnealer {
            sweeps: 1000,
            schedule: BetaSchedule::Geometric {
                beta_start: 0.1,
                beta_end: 10.0,
            },
        }
    }
}

impl SimulatedAnnealer {
    pub fn auto(sweeps: u32) -> Self {
        SimulatedAnnealer {
            sweeps,
            schedule: BetaSchedule::Auto,
        }
    }

    fn betas(&self, model: &IsingModel) -> Result<Vec<f64>> {
        let (b0, b1) = match self.schedule {
            BetaSchedule::Geometric { beta_start, beta_end } => (beta_start, beta_end),
            BetaSchedule::Auto => auto_beta_range(model),
        };
        SaParams {
            num_reads: 1,
            sweeps: self.sweeps,
            beta_start: b0,
            beta_end: b1,
            seed: 0,
        }
        .validate()?;
        Ok(geometric(b0, b1, self.sweeps as usize))
    }
}

fn geometric(b0: f64, b1: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![b1];
    }
    let ratio = (b1 / b0).ln() / (n - 1) as f64;
    (0..n).map(|k| b0 * (ratio * k as f64).exp()).collect()
}

fn anneal(c: &CompiledIsing, betas: &[f64], seed: u64, read: u64) -> Vec<i8> {
    let mut rng = read_rng(seed, read);
    let n = c.len();
    let mut spins: Vec<i8> = (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
    // local fields kept incrementally
    let mut field: Vec<f64> = (0..n).map(|i| c.local_field(&spins, i)).collect();
    // Random-scan: a fixed sweep order can cycle forever through
    // zero-cost flips on plateaus.
    for &beta in betas {
        for _ in 0..n {
            let i = rng.random_range(0..n);
            let delta = -2.0 * f64::from(spins[i]) * field[i];
            if delta <= 0.0 || rng.random::<f64>() < (-beta * delta).exp() {
                spins[i] = -spins[i];
                let s = 2.0 * f64::from(spins[i]);
                for &(j, w) in &c.adj[i] {
                    field[j] += w * s;
                }
            }
        }
    }
    spins
}

impl Sampler for SimulatedAnnealer {
    fn sample_reads(&self, model: &IsingModel, seed: u64, reads: Range<u64>) -> Result<SampleSet> {
        let betas = self.betas(model)?;
        let c = model.compile();
        let records: Vec<SampleRecord> = reads
            .into_par_iter()
            .map(|r| {
                let spins = anneal(&c, &betas, seed, r);
                SampleRecord {
                    energy: c.energy(&spins),
                    spins,
                    occurrences: 1,
                    chain_broken: false,
                }
            })
            .collect();
        let mut out = SampleSet::for_model(model);
        for r in records {
            out.push(r)?;
        }
        Ok(out)
    }
}

pub fn sa_sample(model: &IsingModel, params: &SaParams) -> Result<SampleSet> {
    params.validate()?;
    SimulatedAnnealer {
        sweeps: params.sweeps,
        schedule: BetaSchedule::Geometric {
            beta_start: params.beta_start,
            beta_end: params.beta_end,
        },
    }
    .sample(model, params.num_reads, params.seed)
}
