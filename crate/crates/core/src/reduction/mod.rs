//! Coefficient-reduction methods: interaction extension, bounded-coefficient
//! integer encoding and the perturbed penalty of the augmented Lagrangian.

mod alm;
mod bce;
mod iem;

pub use alm::{perturbed_penalty, AlmState, Domain, LinearConstraint};
pub use bce::{bce_decode, bce_encode, IntegerEncoding};
pub use iem::iem_reduce;

use crate::error::Result;
use crate::io::IsingJson;
use crate::model::{IsingModel, Var};
use crate::sampling::{SampleRecord, SampleSet};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};

/// Why an auxiliary variable exists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    /// The `index`-th extension spin of the coupling between `a` and `b`.
    IemEdge { a: Var, b: Var, index: u32 },
    /// Bit `bit` of the integer encoding for slack or integer variable `owner`.
    IntegerBit { owner: String, bit: u32 },
}

pub type AuxRegistry = BTreeMap<Var, Provenance>;

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionResult {
    pub model: IsingModel,
    pub aux_registry: AuxRegistry,
}

#[derive(Serialize, Deserialize)]
struct AuxEntry {
    id: Var,
    #[serde(flatten)]
    provenance: Provenance,
}

// Same keys as the plain Ising JSON plus `aux`. Not a flattened `IsingJson`:
// flattening turns the integer map keys of `h` into strings on the way back.
#[derive(Serialize, Deserialize)]
struct ReductionJson {
    h: BTreeMap<u64, f64>,
    #[serde(rename = "J")]
    j: Vec<(u64, u64, f64)>,
    #[serde(default)]
    offset: f64,
    aux: Vec<AuxEntry>,
}

impl ReductionResult {
    pub fn unchanged(model: IsingModel) -> Self {
        ReductionResult {
            model,
            aux_registry: AuxRegistry::new(),
        }
    }

    /// Variables of the reduced model that are not auxiliary.
    pub fn original_variables(&self) -> BTreeSet<Var> {
        self.model
            .variables()
            .iter()
            .copied()
            .filter(|v| !self.aux_registry.contains_key(v))
            .collect()
    }

    /// Ising JSON with an extra `aux` list of ids and provenance.
    pub fn to_json(&self) -> Result<String> {
        let model = IsingJson::from(&self.model);
        let js = ReductionJson {
            h: model.h,
            j: model.j,
            offset: model.offset,
            aux: self
                .aux_registry
                .iter()
                .map(|(&id, p)| AuxEntry {
                    id,
                    provenance: p.clone(),
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&js)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let js: ReductionJson = serde_json::from_str(text)?;
        Ok(ReductionResult {
            model: IsingModel::from(&IsingJson {
                h: js.h,
                j: js.j,
                offset: js.offset,
            }),
            aux_registry: js.aux.into_iter().map(|e| (e.id, e.provenance)).collect(),
        })
    }
}

/// Drops auxiliary variables, re-evaluates energies against `original` and
/// merges records that become identical (same spins and chain-break flag).
pub fn project_samples(
    samples: &SampleSet,
    registry: &AuxRegistry,
    original: &IsingModel,
) -> Result<SampleSet> {
    let keep: Vec<(usize, Var)> = samples
        .variables()
        .iter()
        .enumerate()
        .filter(|(_, v)| !registry.contains_key(v))
        .map(|(i, &v)| (i, v))
        .collect();
    let mut out = SampleSet::new(keep.iter().map(|&(_, v)| v).collect());
    let mut seen: HashMap<(Vec<i8>, bool), usize> = HashMap::new();
    let mut merged: Vec<SampleRecord> = Vec::new();
    for r in samples.records() {
        let spins: Vec<i8> = keep.iter().map(|&(i, _)| r.spins[i]).collect();
        match seen.get(&(spins.clone(), r.chain_broken)) {
            Some(&i) => merged[i].occurrences += r.occurrences,
            None => {
                let assignment = crate::model::SpinAssignment::from_slices(out.variables(), &spins)?;
                let energy = original.energy(&assignment)?;
                seen.insert((spins.clone(), r.chain_broken), merged.len());
                merged.push(SampleRecord {
                    spins,
                    energy,
                    occurrences: r.occurrences,
                    chain_broken: r.chain_broken,
                });
            }
        }
    }
    for r in merged {
        out.push(r)?;
    }
    Ok(out)
}
