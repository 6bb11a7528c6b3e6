use super::metrics::{compute_metrics, Checker, MetricOptions, MetricsRow};
use crate::embedding::{assign_coefficients, chain_expand, unembed, Embedding, HardwareGraph};
use crate::error::{Error, Result};
use crate::model::{AcceptRanges, GroundStates, IsingModel};
use crate::reduction::{project_samples, AuxRegistry};
use crate::sampling::{
    BetaSchedule, ExactSampler, NoiseModel, NoisySampler, SampleSet, Sampler, SimulatedAnnealer,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InnerSampler {
    Exact {
        #[serde(default)]
        temperature: f64,
    },
    Sa {
        sweeps: u32,
        #[serde(default)]
        schedule: Option<BetaSchedule>,
    },
}

/// Sampler description for config files. With `noise` set the inner sampler
/// runs behind the rescale-plus-noise wrapper.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerSpec {
    pub inner: InnerSampler,
    #[serde(default)]
    pub noise: Option<NoiseModel>,
    #[serde(default)]
    pub ranges: Option<AcceptRanges>,
}

impl SamplerSpec {
    pub fn build(&self) -> Box<dyn Sampler> {
        let inner: Box<dyn Sampler> = match self.inner {
            InnerSampler::Exact { temperature } => Box::new(ExactSampler { temperature }),
            InnerSampler::Sa { sweeps, schedule } => Box::new(SimulatedAnnealer {
                sweeps,
                schedule: schedule.unwrap_or(SimulatedAnnealer::default().schedule),
            }),
        };
        match self.noise {
            None => inner,
            Some(noise) => Box::new(NoisySampler::new(self.ranges.unwrap_or_default(), noise, inner)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub chain_strength_grid: Vec<f64>,
    pub embedding_seeds: Vec<u64>,
    pub reads_per_cell: u64,
    pub sampler: SamplerSpec,
    #[serde(default)]
    pub truncate_positive_to_zero: bool,
    #[serde(default)]
    pub plateau_threshold: Option<f64>,
    /// Base seed mixed into every cell's sampler seed.
    #[serde(default)]
    pub seed: u64,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.chain_strength_grid.is_empty() || self.embedding_seeds.is_empty() {
            return Err(Error::param("chain strength grid and embedding seeds must be nonempty"));
        }
        if let Some(c) = self.chain_strength_grid.iter().find(|c| !(**c > 0.0) || !c.is_finite()) {
            return Err(Error::param(format!("chain strengths must be positive, got {c}")));
        }
        if self.reads_per_cell == 0 {
            return Err(Error::param("reads_per_cell must be at least 1"));
        }
        Ok(())
    }

    pub fn selection_rule(&self) -> SelectionRule {
        match self.plateau_threshold {
            Some(theta) => SelectionRule::Plateau(theta),
            None => SelectionRule::ArgminEnergy,
        }
    }
}

/// Produces an embedding of a logical model for a given embedding seed.
pub trait Embedder: Send + Sync {
    fn embed(&self, logical: &IsingModel, seed: u64) -> Result<(HardwareGraph, Embedding)>;
}

pub struct ChainExpandEmbedder {
    pub chain_length: usize,
}

impl Embedder for ChainExpandEmbedder {
    fn embed(&self, logical: &IsingModel, seed: u64) -> Result<(HardwareGraph, Embedding)> {
        chain_expand(logical, self.chain_length, seed)
    }
}

/// A fixed embedding; the seed is ignored.
pub struct FixedEmbedder {
    pub hardware: HardwareGraph,
    pub embedding: Embedding,
}

impl Embedder for FixedEmbedder {
    fn embed(&self, _: &IsingModel, _: u64) -> Result<(HardwareGraph, Embedding)> {
        Ok((self.hardware.clone(), self.embedding.clone()))
    }
}

/// What a sweep embeds and how its samples are judged.
#[derive(Clone, Copy)]
pub struct SweepTarget<'a> {
    /// The model handed to the embedder (possibly a reduced model).
    pub model: &'a IsingModel,
    /// Auxiliary variables to drop and the original model to re-evaluate on.
    pub projection: Option<(&'a AuxRegistry, &'a IsingModel)>,
    pub oracle: Option<&'a GroundStates>,
    pub checker: Option<&'a dyn Checker>,
}

impl<'a> SweepTarget<'a> {
    pub fn plain(model: &'a IsingModel) -> Self {
        SweepTarget {
            model,
            projection: None,
            oracle: None,
            checker: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellRow {
    pub embedding_seed: u64,
    pub row: MetricsRow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub embedding_seed: u64,
    pub chain_strength: Option<f64>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepOutcome {
    /// One row per successful cell, sorted by (embedding seed, chain strength).
    pub cells: Vec<CellRow>,
    /// Samples of every seed pooled per chain strength.
    pub pooled: Vec<MetricsRow>,
    pub failures: Vec<CellFailure>,
}

/// splitmix64 finaliser.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Sampler seed of a grid cell, a function of its coordinates only.
pub fn cell_seed(base: u64, embedding_seed: u64, strength_index: usize) -> u64 {
    mix(mix(mix(base) ^ embedding_seed) ^ strength_index as u64)
}

fn run_cell(
    target: &SweepTarget,
    hw: &HardwareGraph,
    embedding: &Embedding,
    chain_strength: f64,
    sampler: &dyn Sampler,
    reads: u64,
    seed: u64,
) -> Result<SampleSet> {
    let embedded = assign_coefficients(target.model, embedding, hw, chain_strength)?;
    let physical = sampler.sample(&embedded.physical, reads, seed)?;
    let logical = unembed(&physical, &embedded, target.model)?;
    match target.projection {
        None => Ok(logical),
        Some((registry, original)) => project_samples(&logical, registry, original),
    }
}

/// Grid over (embedding seed, chain strength): embed, assign coefficients,
/// sample, unembed by majority vote, optionally project out auxiliary
/// variables, and score. Cells run in parallel; results depend only on the
/// config.
pub fn chain_strength_sweep(
    target: SweepTarget,
    config: &SweepConfig,
    embedder: &dyn Embedder,
    sampler: &dyn Sampler,
) -> Result<SweepOutcome> {
    config.validate()?;
    let options = MetricOptions {
        truncate_positive_to_zero: config.truncate_positive_to_zero,
        require_p_opt: false,
    };
    let mut failures = Vec::new();
    let mut embeddings = Vec::new();
    for &seed in &config.embedding_seeds {
        match embedder.embed(target.model, seed) {
            Ok(e) => embeddings.push((seed, e)),
            Err(e) => failures.push(CellFailure {
                embedding_seed: seed,
                chain_strength: None,
                message: e.to_string(),
            }),
        }
    }
    let jobs: Vec<(usize, usize)> = (0..embeddings.len())
        .flat_map(|e| (0..config.chain_strength_grid.len()).map(move |c| (e, c)))
        .collect();
    let results: Vec<Result<SampleSet>> = jobs
        .par_iter()
        .map(|&(e, c)| {
            let (seed, (hw, emb)) = &embeddings[e];
            run_cell(
                &target,
                hw,
                emb,
                config.chain_strength_grid[c],
                sampler,
                config.reads_per_cell,
                cell_seed(config.seed, *seed, c),
            )
        })
        .collect();
    let mut cells = Vec::new();
    let mut pools: Vec<Option<SampleSet>> = vec![None; config.chain_strength_grid.len()];
    for (&(e, c), result) in jobs.iter().zip(results) {
        let seed = embeddings[e].0;
        let strength = config.chain_strength_grid[c];
        let samples = match result {
            Ok(s) => s,
            Err(err) => {
                failures.push(CellFailure {
                    embedding_seed: seed,
                    chain_strength: Some(strength),
                    message: err.to_string(),
                });
                continue;
            }
        };
        let mut row = compute_metrics(&samples, &options, target.oracle, target.checker)?;
        row.chain_strength = Some(strength);
        cells.push(CellRow {
            embedding_seed: seed,
            row,
        });
        match &mut pools[c] {
            Some(pool) => pool.extend(samples)?,
            slot @ None => *slot = Some(samples),
        }
    }
    let mut pooled = Vec::new();
    for (c, pool) in pools.into_iter().enumerate() {
        if let Some(pool) = pool {
            let mut row = compute_metrics(&pool, &options, target.oracle, target.checker)?;
            row.chain_strength = Some(config.chain_strength_grid[c]);
            pooled.push(row);
        }
    }
    let strength = |r: &MetricsRow| r.chain_strength.unwrap_or(0.0);
    cells.sort_by(|a, b| {
        a.embedding_seed
            .cmp(&b.embedding_seed)
            .then(strength(&a.row).total_cmp(&strength(&b.row)))
    });
    pooled.sort_by(|a, b| strength(a).total_cmp(&strength(b)));
    Ok(SweepOutcome {
        cells,
        pooled,
        failures,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionRule {
    ArgminEnergy,
    /// Smallest chain strength whose best objective reaches the threshold.
    Plateau(f64),
}

/// Chain strength chosen from sweep rows; ties go to the smallest strength.
pub fn select_chain_strength(rows: &[MetricsRow], rule: SelectionRule) -> Result<f64> {
    let mut rows: Vec<(f64, &MetricsRow)> = rows
        .iter()
        .filter_map(|r| r.chain_strength.map(|c| (c, r)))
        .collect();
    if rows.is_empty() {
        return Err(Error::param("no rows with a chain strength to select from"));
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    match rule {
        SelectionRule::ArgminEnergy => {
            let mut best = rows[0];
            for &r in &rows[1..] {
                if r.1.avg_energy < best.1.avg_energy {
                    best = r;
                }
            }
            Ok(best.0)
        }
        SelectionRule::Plateau(theta) => rows
            .iter()
            .find(|(_, r)| r.best_objective.is_some_and(|b| b >= theta))
            .map(|&(c, _)| c)
            .ok_or(Error::NoPlateau { threshold: theta }),
    }
}
