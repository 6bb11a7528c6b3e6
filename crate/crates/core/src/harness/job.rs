//! Sweep jobs as read from config files: a `SweepConfig` plus where the model
//! comes from, an optional reduction and the embedder.

use super::metrics::{Checker, MkpChecker, QapChecker};
use super::report::{results_csv, sweep_rows};
use super::sweep::{chain_strength_sweep, ChainExpandEmbedder, Embedder, FixedEmbedder, SweepConfig, SweepOutcome, SweepTarget};
use crate::embedding::{Embedding, HardwareGraph};
use crate::error::Result;
use crate::io::read_model;
use crate::model::ground_states;
use crate::problems::{mkp_parse, mkp_to_qubo, qap_parse, qap_to_qubo, trivial_ising, MkpInstance, QapInstance};
use crate::reduction::{iem_reduce, ReductionResult};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSource {
    TrivialIsing {
        j: f64,
        #[serde(default)]
        rescaled: bool,
    },
    /// Ising JSON or QUBO text.
    File { path: PathBuf },
    Mkp { path: PathBuf, lambda: f64, mu: i64 },
    Qap {
        path: PathBuf,
        lambda: f64,
        #[serde(default)]
        epsilon: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReductionSpec {
    Iem { bound: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EmbeddingSpec {
    ChainExpand { chain_length: usize },
    File { embedding: PathBuf, hardware: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepJob {
    pub instance: String,
    #[serde(default)]
    pub method: String,
    #[serde(default)]
    pub param: String,
    pub model: ModelSource,
    #[serde(default)]
    pub reduction: Option<ReductionSpec>,
    pub embedding: EmbeddingSpec,
    /// Score `p_opt` against the exact ground states of the unreduced model.
    #[serde(default)]
    pub oracle: bool,
    #[serde(flatten)]
    pub config: SweepConfig,
}

enum Problem {
    None,
    Mkp(MkpInstance),
    Qap(QapInstance),
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobReport {
    pub outcome: SweepOutcome,
    pub csv: String,
}

impl SweepJob {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Runs the job; relative paths are taken from `base`.
    pub fn run(&self, base: &Path) -> Result<JobReport> {
        let (original, problem) = match &self.model {
            ModelSource::TrivialIsing { j, rescaled } => (trivial_ising(*j, *rescaled)?, Problem::None),
            ModelSource::File { path } => (read_model(&fs::read_to_string(resolve(base, path))?)?, Problem::None),
            ModelSource::Mkp { path, lambda, mu } => {
                let inst = mkp_parse(&fs::read_to_string(resolve(base, path))?)?;
                let q = mkp_to_qubo(&inst, *lambda, *mu)?;
                (q.qubo.to_ising(), Problem::Mkp(inst))
            }
            ModelSource::Qap { path, lambda, epsilon } => {
                let inst = qap_parse(&fs::read_to_string(resolve(base, path))?)?;
                (qap_to_qubo(&inst, *lambda, *epsilon)?.to_ising(), Problem::Qap(inst))
            }
        };
        let reduced: ReductionResult = match self.reduction {
            None => ReductionResult::unchanged(original.clone()),
            Some(ReductionSpec::Iem { bound }) => iem_reduce(&original, bound)?,
        };
        let oracle = if self.oracle { Some(ground_states(&original)?) } else { None };
        let mkp_checker;
        let qap_checker;
        let checker: Option<&dyn Checker> = match &problem {
            Problem::None => None,
            Problem::Mkp(inst) => {
                mkp_checker = MkpChecker(inst);
                Some(&mkp_checker)
            }
            Problem::Qap(inst) => {
                qap_checker = QapChecker(inst);
                Some(&qap_checker)
            }
        };
        let embedder: Box<dyn Embedder> = match &self.embedding {
            EmbeddingSpec::ChainExpand { chain_length } => Box::new(ChainExpandEmbedder {
                chain_length: *chain_length,
            }),
            EmbeddingSpec::File { embedding, hardware } => Box::new(FixedEmbedder {
                embedding: Embedding::from_json(&fs::read_to_string(resolve(base, embedding))?)?,
                hardware: HardwareGraph::from_json(&fs::read_to_string(resolve(base, hardware))?)?,
            }),
        };
        let projection = (!reduced.aux_registry.is_empty()).then_some((&reduced.aux_registry, &original));
        let target = SweepTarget {
            model: &reduced.model,
            projection,
            oracle: oracle.as_ref(),
            checker,
        };
        let sampler = self.config.sampler.build();
        let outcome = chain_strength_sweep(target, &self.config, &*embedder, &*sampler)?;
        let csv = results_csv(&sweep_rows(&self.instance, &self.method, &self.param, &outcome));
        Ok(JobReport { outcome, csv })
    }
}
