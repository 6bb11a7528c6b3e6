//! Ready-made experiments on the small problems: noise-limited precision,
//! IEM under noise, the QAP penalty scan and the embedded ALM loop.

use super::alm::{alm_experiment, epsilon_grid_sweep, AlmProblem, AlmRun, AlmStep, GridCell};
use super::metrics::{compute_metrics, MetricOptions, MetricsRow, QapChecker};
use super::sweep::{chain_strength_sweep, ChainExpandEmbedder, SamplerSpec, SweepConfig, SweepTarget};
use crate::embedding::{assign_coefficients, chain_expand, unembed};
use crate::error::Result;
use crate::model::{ground_states, AcceptRanges, IsingModel};
use crate::problems::{qap_constraints, qap_to_qubo, trivial_ising, QapInstance};
use crate::reduction::{iem_reduce, AlmState};
use crate::sampling::{ExactSampler, NoiseModel, NoisySampler, SampleSet, Sampler};
use std::ops::Range;

/// `p_opt` of the trivial problem for each `J` under the noisy exact sampler.
pub fn noise_precision_scan(js: &[f64], noise: NoiseModel, reads: u64, seed: u64) -> Result<Vec<(f64, f64)>> {
    let sampler = NoisySampler::new(AcceptRanges::dwave(), noise, ExactSampler::zero_temperature());
    js.iter()
        .map(|&j| {
            let model = trivial_ising(j, false)?;
            let oracle = ground_states(&model)?;
            let samples = sampler.sample(&model, reads, seed)?;
            let row = compute_metrics(&samples, &MetricOptions::default(), Some(&oracle), None)?;
            Ok((j, row.p_opt.unwrap_or(0.0)))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RescueOutcome {
    pub unreduced: Vec<MetricsRow>,
    pub reduced: Vec<MetricsRow>,
}

fn best_p_opt(rows: &[MetricsRow]) -> f64 {
    rows.iter().filter_map(|r| r.p_opt).fold(0.0, f64::max)
}

impl RescueOutcome {
    pub fn best_unreduced(&self) -> f64 {
        best_p_opt(&self.unreduced)
    }

    pub fn best_reduced(&self) -> f64 {
        best_p_opt(&self.reduced)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RescueSetup {
    pub j: f64,
    pub bound: f64,
    pub chain_length: usize,
    /// Chain strengths are these multiples of the largest coupling.
    pub multipliers: Vec<f64>,
    pub sampler: SamplerSpec,
    pub embedding_seeds: Vec<u64>,
    pub reads_per_cell: u64,
    pub seed: u64,
}

/// Chain-strength sweeps of `J s0 s1 + s1 s2` with and without IEM, both
/// embedded with `chain_expand` and scored against the original ground
/// states (pooled over embedding seeds).
pub fn iem_rescue(setup: &RescueSetup) -> Result<RescueOutcome> {
    let original = trivial_ising(setup.j, true)?;
    let oracle = ground_states(&original)?;
    let reduced = iem_reduce(&original, setup.bound)?;
    let sampler = setup.sampler.build();
    let embedder = ChainExpandEmbedder {
        chain_length: setup.chain_length,
    };
    let config = |scale: f64| SweepConfig {
        chain_strength_grid: setup.multipliers.iter().map(|m| m * scale).collect(),
        embedding_seeds: setup.embedding_seeds.clone(),
        reads_per_cell: setup.reads_per_cell,
        sampler: setup.sampler,
        truncate_positive_to_zero: false,
        plateau_threshold: None,
        seed: setup.seed,
    };
    let plain = chain_strength_sweep(
        SweepTarget {
            oracle: Some(&oracle),
            ..SweepTarget::plain(&original)
        },
        &config(original.max_abs_coupling()),
        &embedder,
        &*sampler,
    )?;
    let rescued = chain_strength_sweep(
        SweepTarget {
            model: &reduced.model,
            projection: Some((&reduced.aux_registry, &original)),
            oracle: Some(&oracle),
            checker: None,
        },
        &config(reduced.model.max_abs_coupling()),
        &embedder,
        &*sampler,
    )?;
    Ok(RescueOutcome {
        unreduced: plain.pooled,
        reduced: rescued.pooled,
    })
}

/// Embeds every model it is given with `chain_expand`, samples the physical
/// model with `inner` and returns majority-vote logical samples.
pub struct EmbeddedSampler<S> {
    pub chain_length: usize,
    pub chain_strength: f64,
    pub embedding_seed: u64,
    pub inner: S,
}

impl<S: Sampler> Sampler for EmbeddedSampler<S> {
    fn sample_reads(&self, model: &IsingModel, seed: u64, reads: Range<u64>) -> Result<SampleSet> {
        let (hw, emb) = chain_expand(model, self.chain_length, self.embedding_seed)?;
        let embedded = assign_coefficients(model, &emb, &hw, self.chain_strength)?;
        let physical = self.inner.sample_reads(&embedded.physical, seed, reads)?;
        unembed(&physical, &embedded, model)
    }
}

fn qap_problem(inst: &QapInstance, lambda: f64, eps: f64) -> Result<AlmProblem> {
    Ok(AlmProblem {
        model: qap_to_qubo(inst, lambda, eps)?.to_ising(),
        constraints: qap_constraints(inst.n)?,
    })
}

/// Feasibility and objective over a `(lambda, eps)` grid of QAP penalties.
pub fn qap_penalty_scan(
    inst: &QapInstance,
    lambdas: &[f64],
    epsilons: &[f64],
    sampler: &dyn Sampler,
    reads: u64,
    seed: u64,
) -> Result<Vec<GridCell>> {
    let checker = QapChecker(inst);
    epsilon_grid_sweep(
        |l, e| qap_problem(inst, l, e),
        lambdas,
        epsilons,
        AlmRun {
            sampler,
            reads,
            seed,
            options: MetricOptions::default(),
            checker: Some(&checker),
        },
    )
}

/// ALM iterations on a QAP instance through any sampler (plain or embedded).
/// Exploratory: the embedded variant has no expected outcome.
pub fn qap_alm(
    inst: &QapInstance,
    state0: AlmState,
    iterations: usize,
    sampler: &dyn Sampler,
    reads: u64,
    seed: u64,
) -> Result<Vec<AlmStep>> {
    let checker = QapChecker(inst);
    alm_experiment(
        |l, e| qap_problem(inst, l, e),
        state0,
        iterations,
        AlmRun {
            sampler,
            reads,
            seed,
            options: MetricOptions::default(),
            checker: Some(&checker),
        },
    )
}
