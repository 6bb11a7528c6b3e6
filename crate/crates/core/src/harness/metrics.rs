use crate::error::{Error, Result};
use crate::model::{GroundStates, SpinAssignment, Var};
use crate::problems::{mkp_check, qap_check, Check, MkpInstance, QapInstance};
use crate::sampling::SampleSet;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Maximize,
    Minimize,
}

/// Feasibility and objective of a sample in the original problem's terms.
pub trait Checker: Send + Sync {
    fn check(&self, assignment: &SpinAssignment) -> Result<Check>;
    fn sense(&self) -> Sense;
}

pub struct MkpChecker<'a>(pub &'a MkpInstance);

impl Checker for MkpChecker<'_> {
    fn check(&self, a: &SpinAssignment) -> Result<Check> {
        mkp_check(self.0, &self.0.item_bits(a)?)
    }

    fn sense(&self) -> Sense {
        Sense::Maximize
    }
}

pub struct QapChecker<'a>(pub &'a QapInstance);

impl Checker for QapChecker<'_> {
    fn check(&self, a: &SpinAssignment) -> Result<Check> {
        qap_check(self.0, &self.0.bits_from(a)?)
    }

    fn sense(&self) -> Sense {
        Sense::Minimize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricOptions {
    /// Count positive energies as 0 in the average.
    pub truncate_positive_to_zero: bool,
    /// Fail instead of leaving `p_opt` empty when no oracle is given.
    pub require_p_opt: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub chain_strength: Option<f64>,
    pub avg_energy: f64,
    pub p_opt: Option<f64>,
    pub feasibility_rate: Option<f64>,
    pub best_objective: Option<f64>,
    pub mean_objective: Option<f64>,
    pub chain_break_rate: f64,
}

/// Occurrence-weighted metrics of a sample set. Objective metrics are taken
/// over feasible samples only.
pub fn compute_metrics(
    samples: &SampleSet,
    options: &MetricOptions,
    oracle: Option<&GroundStates>,
    checker: Option<&dyn Checker>,
) -> Result<MetricsRow> {
    if options.require_p_opt && oracle.is_none() {
        return Err(Error::MissingOracle);
    }
    let total = samples.total_occurrences();
    if total == 0 {
        return Err(Error::param("cannot compute metrics of an empty sample set"));
    }
    let total_f = total as f64;
    let mut energy_sum = 0.0;
    let mut broken = 0u64;
    for r in samples.records() {
        let e = if options.truncate_positive_to_zero && r.energy > 0.0 {
            0.0
        } else {
            r.energy
        };
        energy_sum += e * r.occurrences as f64;
        if r.chain_broken {
            broken += r.occurrences;
        }
    }
    let p_opt = match oracle {
        None => None,
        Some(gs) => {
            let keep: BTreeSet<Var> = gs
                .states
                .iter()
                .next()
                .map(|s| s.iter().map(|(v, _)| v).collect())
                .unwrap_or_default();
            let mut hits = 0u64;
            for (i, r) in samples.records().iter().enumerate() {
                if gs.contains(&samples.assignment(i).restrict(&keep)) {
                    hits += r.occurrences;
                }
            }
            Some(hits as f64 / total_f)
        }
    };
    let (mut feasibility_rate, mut best_objective, mut mean_objective) = (None, None, None);
    if let Some(checker) = checker {
        let mut feasible = 0u64;
        let mut objective_sum = 0.0;
        let mut best: Option<f64> = None;
        for (i, r) in samples.records().iter().enumerate() {
            let c = checker.check(&samples.assignment(i))?;
            if !c.feasible {
                continue;
            }
            feasible += r.occurrences;
            objective_sum += c.objective * r.occurrences as f64;
            best = Some(match (best, checker.sense()) {
                (None, _) => c.objective,
                (Some(b), Sense::Maximize) => b.max(c.objective),
                (Some(b), Sense::Minimize) => b.min(c.objective),
            });
        }
        feasibility_rate = Some(feasible as f64 / total_f);
        best_objective = best;
        if feasible > 0 {
            mean_objective = Some(objective_sum / feasible as f64);
        }
    }
    Ok(MetricsRow {
        chain_strength: None,
        avg_energy: energy_sum / total_f,
        p_opt,
        feasibility_rate,
        best_objective,
        mean_objective,
        chain_break_rate: broken as f64 / total_f,
    })
}
