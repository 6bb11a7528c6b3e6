//! Minor-embedding: chain validation, balanced coefficient assignment with a
//! uniform chain strength, majority-vote unembedding, a synthetic
//! chain-expansion embedder and the clique-embedding size estimate for
//! Pegasus targets.

use crate::error::{Error, Result};
use crate::model::{scaling_factors, AcceptRanges, IsingModel, ScalingReport, SpinAssignment, Var};
use crate::sampling::{SampleRecord, SampleSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

fn ordered(a: Var, b: Var) -> (Var, Var) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct HardwareGraph {
    nodes: BTreeSet<Var>,
    edges: BTreeSet<(Var, Var)>,
}

#[derive(Serialize, Deserialize)]
struct HardwareJson {
    nodes: Vec<u64>,
    edges: Vec<(u64, u64)>,
}

impl HardwareGraph {
    pub fn new(
        nodes: impl IntoIterator<Item = Var>,
        edges: impl IntoIterator<Item = (Var, Var)>,
    ) -> Result<Self> {
        let nodes: BTreeSet<Var> = nodes.into_iter().collect();
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::param(format!("self-loop on hardware node {a}")));
            }
            if !nodes.contains(&a) || !nodes.contains(&b) {
                return Err(Error::param(format!("edge ({a}, {b}) references a missing node")));
            }
            set.insert(ordered(a, b));
        }
        Ok(HardwareGraph { nodes, edges: set })
    }

    /// Graph of a model's coupling structure.
    pub fn from_model(model: &IsingModel) -> Self {
        HardwareGraph {
            nodes: model.variables().clone(),
            edges: model.couplings().map(|(k, _)| k).collect(),
        }
    }

    pub fn nodes(&self) -> &BTreeSet<Var> {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeSet<(Var, Var)> {
        &self.edges
    }

    pub fn has_edge(&self, a: Var, b: Var) -> bool {
        self.edges.contains(&ordered(a, b))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&HardwareJson {
            nodes: self.nodes.iter().map(|v| v.0).collect(),
            edges: self.edges.iter().map(|&(a, b)| (a.0, b.0)).collect(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let js: HardwareJson = serde_json::from_str(text)?;
        HardwareGraph::new(
            js.nodes.into_iter().map(Var),
            js.edges.into_iter().map(|(a, b)| (Var(a), Var(b))),
        )
    }
}

/// Logical variable to chain of physical nodes.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Embedding {
    pub chains: BTreeMap<Var, BTreeSet<Var>>,
}

impl Embedding {
    pub fn new(chains: impl IntoIterator<Item = (Var, BTreeSet<Var>)>) -> Self {
        Embedding {
            chains: chains.into_iter().collect(),
        }
    }

    pub fn identity<'a>(vars: impl IntoIterator<Item = &'a Var>) -> Self {
        Embedding {
            chains: vars
                .into_iter()
                .map(|&v| (v, [v].into_iter().collect()))
                .collect(),
        }
    }

    pub fn chain(&self, v: Var) -> Option<&BTreeSet<Var>> {
        self.chains.get(&v)
    }

    pub fn to_json(&self) -> Result<String> {
        let js: BTreeMap<u64, Vec<u64>> = self
            .chains
            .iter()
            .map(|(k, c)| (k.0, c.iter().map(|v| v.0).collect()))
            .collect();
        Ok(serde_json::to_string_pretty(&js)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let js: BTreeMap<u64, Vec<u64>> = serde_json::from_str(text)?;
        Ok(Embedding {
            chains: js
                .into_iter()
                .map(|(k, c)| (Var(k), c.into_iter().map(Var).collect()))
                .collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    MissingChain(Var),
    EmptyChain(Var),
    UnknownNode { logical: Var, node: Var },
    Overlap { first: Var, second: Var, node: Var },
    DisconnectedChain(Var),
    MissingEdge { a: Var, b: Var },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingChain(v) => write!(f, "logical variable {v} has no chain"),
            Violation::EmptyChain(v) => write!(f, "chain of {v} is empty"),
            Violation::UnknownNode { logical, node } => {
                write!(f, "chain of {logical} uses node {node} absent from the hardware graph")
            }
            Violation::Overlap {
                first,
                second,
                node,
            } => write!(f, "chains of {first} and {second} share node {node}"),
            Violation::DisconnectedChain(v) => write!(f, "chain of {v} is not connected"),
            Violation::MissingEdge { a, b } => {
                write!(f, "no hardware edge joins the chains of {a} and {b}")
            }
        }
    }
}

fn chain_connected(chain: &BTreeSet<Var>, hw: &HardwareGraph) -> bool {
    let Some(&start) = chain.iter().next() else {
        return false;
    };
    let mut seen = BTreeSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for &u in chain {
            if !seen.contains(&u) && hw.has_edge(u, v) {
                seen.insert(u);
                queue.push_back(u);
            }
        }
    }
    seen.len() == chain.len()
}

/// Hardware edges joining two chains.
fn edges_between(a: &BTreeSet<Var>, b: &BTreeSet<Var>, hw: &HardwareGraph) -> Vec<(Var, Var)> {
    let mut out = Vec::new();
    for &k in a {
        for &l in b {
            if hw.has_edge(k, l) {
                out.push((k, l));
            }
        }
    }
    out
}

/// Every violation of chain disjointness, connectivity and edge coverage.
pub fn validate(embedding: &Embedding, logical: &IsingModel, hw: &HardwareGraph) -> Vec<Violation> {
    let mut out = Vec::new();
    for &v in logical.variables() {
        match embedding.chain(v) {
            None => out.push(Violation::MissingChain(v)),
            Some(c) if c.is_empty() => out.push(Violation::EmptyChain(v)),
            Some(_) => {}
        }
    }
    let mut owner: BTreeMap<Var, Var> = BTreeMap::new();
    for (&logical_var, chain) in &embedding.chains {
        for &node in chain {
            if !hw.nodes().contains(&node) {
                out.push(Violation::UnknownNode {
                    logical: logical_var,
                    node,
                });
            }
            if let Some(&first) = owner.get(&node) {
                out.push(Violation::Overlap {
                    first,
                    second: logical_var,
                    node,
                });
            } else {
                owner.insert(node, logical_var);
            }
        }
        if !chain.is_empty() && !chain_connected(chain, hw) {
            out.push(Violation::DisconnectedChain(logical_var));
        }
    }
    for ((a, b), _) in logical.couplings() {
        if let (Some(ca), Some(cb)) = (embedding.chain(a), embedding.chain(b)) {
            if edges_between(ca, cb, hw).is_empty() {
                out.push(Violation::MissingEdge { a, b });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedModel {
    pub physical: IsingModel,
    pub embedding: Embedding,
    pub chain_strength: f64,
    pub intra_chain_edges: BTreeSet<(Var, Var)>,
}

/// Balanced assignment: `h_i` is spread evenly over the chain, `J_ij` evenly
/// over every hardware edge between the two chains, and every hardware edge
/// inside a chain gets `-chain_strength`.
pub fn assign_coefficients(
    logical: &IsingModel,
    embedding: &Embedding,
    hw: &HardwareGraph,
    chain_strength: f64,
) -> Result<EmbeddedModel> {
    if !(chain_strength > 0.0) {
        return Err(Error::param("chain strength must be positive"));
    }
    let violations = validate(embedding, logical, hw);
    if !violations.is_empty() {
        return Err(Error::InvalidEmbedding(violations));
    }
    let mut physical = IsingModel::new();
    let mut intra = BTreeSet::new();
    for &v in logical.variables() {
        let chain = &embedding.chains[&v];
        for &k in chain {
            physical.add_variable(k);
        }
        let share = logical.field(v) / chain.len() as f64;
        if share != 0.0 {
            for &k in chain {
                physical.add_field(k, share);
            }
        }
        for &k in chain {
            for &l in chain.range(k..).skip(1) {
                if hw.has_edge(k, l) {
                    physical.add_coupling(k, l, -chain_strength);
                    intra.insert((k, l));
                }
            }
        }
    }
    for ((a, b), w) in logical.couplings() {
        let pairs = edges_between(&embedding.chains[&a], &embedding.chains[&b], hw);
        let share = w / pairs.len() as f64;
        for (k, l) in pairs {
            physical.add_coupling(k, l, share);
        }
    }
    physical.add_offset(logical.offset());
    Ok(EmbeddedModel {
        physical,
        embedding: embedding.clone(),
        chain_strength,
        intra_chain_edges: intra,
    })
}

impl EmbeddedModel {
    /// Physical state with every chain set to its logical spin.
    pub fn lift(&self, logical: &SpinAssignment) -> Result<SpinAssignment> {
        let mut out = SpinAssignment::new();
        for (&v, chain) in &self.embedding.chains {
            let s = logical.get(v).ok_or(Error::MissingVariable(v))?;
            for &k in chain {
                out.set(k, s)?;
            }
        }
        Ok(out)
    }
}

/// Majority vote per chain (ties resolve to -1). Samples with any
/// non-unanimous chain are flagged; energies are re-evaluated on `logical`.
pub fn unembed(samples: &SampleSet, embedded: &EmbeddedModel, logical: &IsingModel) -> Result<SampleSet> {
    let position: BTreeMap<Var, usize> = samples
        .variables()
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i))
        .collect();
    let mut chains: Vec<Vec<usize>> = Vec::new();
    for &v in logical.variables() {
        let chain = embedded
            .embedding
            .chain(v)
            .ok_or(Error::MissingVariable(v))?;
        chains.push(
            chain
                .iter()
                .map(|k| position.get(k).copied().ok_or(Error::MissingVariable(*k)))
                .collect::<Result<_>>()?,
        );
    }
    let mut out = SampleSet::for_model(logical);
    for r in samples.records() {
        let mut broken = r.chain_broken;
        let spins: Vec<i8> = chains
            .iter()
            .map(|chain| {
                let sum: i32 = chain.iter().map(|&i| i32::from(r.spins[i])).sum();
                if sum.unsigned_abs() as usize != chain.len() {
                    broken = true;
                }
                if sum > 0 {
                    1
                } else {
                    -1
                }
            })
            .collect();
        let energy = logical.energy(&SpinAssignment::from_slices(out.variables(), &spins)?)?;
        out.push(SampleRecord {
            spins,
            energy,
            occurrences: r.occurrences,
            chain_broken: broken,
        })?;
    }
    Ok(out)
}

/// Synthetic embedding target: every logical variable becomes a path of
/// `chain_length` nodes, and each logical edge gets one hardware edge between
/// chain positions chosen round-robin over each variable's edges, starting
/// from seeded offsets.
pub fn chain_expand(
    logical: &IsingModel,
    chain_length: usize,
    seed: u64,
) -> Result<(HardwareGraph, Embedding)> {
    if chain_length == 0 {
        return Err(Error::param("chain length must be at least 1"));
    }
    let len = chain_length as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (shift_a, shift_b) = (rng.random_range(0..len), rng.random_range(0..len));
    let index: BTreeMap<Var, u64> = logical
        .variables()
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i as u64))
        .collect();
    let node = |v: Var, p: u64| Var(index[&v] * len + p);
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let mut chains = BTreeMap::new();
    for &v in logical.variables() {
        let chain: BTreeSet<Var> = (0..len).map(|p| node(v, p)).collect();
        nodes.extend(chain.iter().copied());
        for p in 1..len {
            edges.push((node(v, p - 1), node(v, p)));
        }
        chains.insert(v, chain);
    }
    // Each endpoint cycles through its own chain, so every chain member
    // carries an equal share of the variable's edges.
    let mut seen: BTreeMap<Var, u64> = BTreeMap::new();
    let mut next = |v: Var| {
        let k = seen.entry(v).or_insert(0);
        *k += 1;
        *k - 1
    };
    for ((a, b), _) in logical.couplings() {
        let (ka, kb) = (next(a), next(b));
        edges.push((node(a, (ka + shift_a) % len), node(b, (kb + shift_b) % len)));
    }
    Ok((HardwareGraph::new(nodes, edges)?, Embedding { chains }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CliqueEstimate {
    pub m: u64,
    pub chain_len_lo: u64,
    pub chain_len_hi: u64,
    pub s_h_tilde_bound: f64,
}

/// Smallest Pegasus size `m >= n/12 + 1` holding an `n`-clique minor; chains
/// then have length `m` or `m + 1`, so the physical field factor is at most
/// `s_h / m`.
pub fn pegasus_clique_estimate(n: u64, s_h: f64) -> Result<CliqueEstimate> {
    if n == 0 {
        return Err(Error::param("clique size must be at least 1"));
    }
    let m = n.div_ceil(12) + 1;
    Ok(CliqueEstimate {
        m,
        chain_len_lo: m,
        chain_len_hi: m + 1,
        s_h_tilde_bound: s_h / m as f64,
    })
}

/// Scaling factors of the physical model; chain couplers `-c` count against
/// `j_min` like any other coupling.
pub fn physical_scaling(embedded: &EmbeddedModel, ranges: &AcceptRanges) -> ScalingReport {
    scaling_factors(&embedded.physical, ranges)
}

/// Physical-to-logical scaling ratios `s_h~ / s_J` and `s_J~ / s_J`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRatios {
    pub s_h_tilde_over_s_j: f64,
    pub s_j_tilde_over_s_j: f64,
}

pub fn scaling_ratios(logical: &IsingModel, embedded: &EmbeddedModel, ranges: &AcceptRanges) -> ScalingRatios {
    let l = scaling_factors(logical, ranges);
    let p = physical_scaling(embedded, ranges);
    ScalingRatios {
        s_h_tilde_over_s_j: p.s_h / l.s_j,
        s_j_tilde_over_s_j: p.s_j / l.s_j,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(ids: &[u64]) -> BTreeSet<Var> {
        ids.iter().copied().map(Var).collect()
    }

    fn triangle() -> IsingModel {
        let mut m = IsingModel::new();
        m.add_coupling(Var(0), Var(1), 1.0);
        m.add_coupling(Var(1), Var(2), -0.5);
        m.add_coupling(Var(0), Var(2), 0.25);
        m.add_field(Var(0), 2.0);
        m
    }

    #[test]
    fn identity_embedding_validates() {
        let m = triangle();
        let hw = HardwareGraph::from_model(&m);
        assert!(validate(&Embedding::identity(m.variables()), &m, &hw).is_empty());
    }

    #[test]
    fn overlap_names_both_variables() {
        let m = triangle();
        let hw = HardwareGraph::new(
            (0..4).map(Var),
            [(0, 1), (1, 2), (0, 2), (2, 3)].map(|(a, b)| (Var(a), Var(b))),
        )
        .unwrap();
        let emb = Embedding::new([(Var(0), set(&[0])), (Var(1), set(&[1, 2])), (Var(2), set(&[2, 3]))]);
        let v = validate(&emb, &m, &hw);
        assert!(v.contains(&Violation::Overlap {
            first: Var(1),
            second: Var(2),
            node: Var(2)
        }));
    }

    #[test]
    fn missing_connection_detected() {
        let m = triangle();
        let hw = HardwareGraph::new((0..3).map(Var), [(Var(0), Var(1)), (Var(1), Var(2))]).unwrap();
        let v = validate(&Embedding::identity(m.variables()), &m, &hw);
        assert_eq!(v, vec![Violation::MissingEdge { a: Var(0), b: Var(2) }]);
    }

    #[test]
    fn disconnected_chain_detected() {
        let mut m = IsingModel::new();
        m.add_variable(Var(0));
        let hw = HardwareGraph::new((0..3).map(Var), [(Var(0), Var(1))]).unwrap();
        let emb = Embedding::new([(Var(0), set(&[0, 2]))]);
        assert_eq!(validate(&emb, &m, &hw), vec![Violation::DisconnectedChain(Var(0))]);
    }

    #[test]
    fn hardware_graph_rejects_bad_edges() {
        assert!(HardwareGraph::new([Var(0)], [(Var(0), Var(0))]).is_err());
        assert!(HardwareGraph::new([Var(0)], [(Var(0), Var(1))]).is_err());
    }

    #[test]
    fn field_split_over_chain() {
        let mut m = IsingModel::new();
        m.add_field(Var(0), 2.0);
        let hw = HardwareGraph::new([Var(10), Var(11)], [(Var(10), Var(11))]).unwrap();
        let emb = Embedding::new([(Var(0), set(&[10, 11]))]);
        let e = assign_coefficients(&m, &emb, &hw, 3.0).unwrap();
        assert_eq!(e.physical.field(Var(10)), 1.0);
        assert_eq!(e.physical.field(Var(11)), 1.0);
        assert_eq!(e.physical.coupling(Var(10), Var(11)), -3.0);
        assert_eq!(e.intra_chain_edges.len(), 1);
    }

    #[test]
    fn coupling_split_over_edges() {
        let mut m = IsingModel::new();
        m.add_coupling(Var(0), Var(1), 1.0);
        let hw = HardwareGraph::new(
            (0..3).map(Var),
            [(0, 1), (1, 2), (0, 2)].map(|(a, b)| (Var(a), Var(b))),
        )
        .unwrap();
        let emb = Embedding::new([(Var(0), set(&[0])), (Var(1), set(&[1, 2]))]);
        let e = assign_coefficients(&m, &emb, &hw, 1.0).unwrap();
        assert_eq!(e.physical.coupling(Var(0), Var(1)), 0.5);
        assert_eq!(e.physical.coupling(Var(0), Var(2)), 0.5);
        assert_eq!(e.physical.coupling(Var(1), Var(2)), -1.0);
    }

    #[test]
    fn invalid_embedding_aborts_assignment() {
        let m = triangle();
        let hw = HardwareGraph::new((0..3).map(Var), [(Var(0), Var(1))]).unwrap();
        let err = assign_coefficients(&m, &Embedding::identity(m.variables()), &hw, 1.0).unwrap_err();
        assert!(matches!(err, Error::InvalidEmbedding(_)));
    }

    #[test]
    fn consistent_state_energy_identity() {
        let m = triangle();
        let (hw, emb) = chain_expand(&m, 4, 3).unwrap();
        let e = assign_coefficients(&m, &emb, &hw, 2.0).unwrap();
        let logical: SpinAssignment = [(Var(0), 1), (Var(1), -1), (Var(2), -1)].into_iter().collect();
        let phys = e.lift(&logical).unwrap();
        let expected = m.energy(&logical).unwrap() - 2.0 * e.intra_chain_edges.len() as f64;
        assert_eq!(e.physical.energy(&phys).unwrap(), expected);
    }

    fn one_chain_samples(chain_spins: Vec<i8>) -> (SampleSet, EmbeddedModel, IsingModel) {
        let mut m = IsingModel::new();
        m.add_field(Var(0), 1.0);
        let (hw, emb) = chain_expand(&m, chain_spins.len(), 0).unwrap();
        let e = assign_coefficients(&m, &emb, &hw, 1.0).unwrap();
        let mut s = SampleSet::for_model(&e.physical);
        s.push_evaluated(&e.physical, chain_spins).unwrap();
        (s, e, m)
    }

    #[test]
    fn majority_of_three() {
        let (s, e, m) = one_chain_samples(vec![1, 1, -1]);
        let u = unembed(&s, &e, &m).unwrap();
        assert_eq!(u.records()[0].spins, vec![1]);
        assert!(u.records()[0].chain_broken);
        assert_eq!(u.records()[0].energy, 1.0);
    }

    #[test]
    fn even_tie_goes_negative() {
        let (s, e, m) = one_chain_samples(vec![1, -1]);
        let u = unembed(&s, &e, &m).unwrap();
        assert_eq!(u.records()[0].spins, vec![-1]);
        assert!(u.records()[0].chain_broken);
    }

    #[test]
    fn unanimous_chains_unflagged() {
        let (s, e, m) = one_chain_samples(vec![-1, -1, -1]);
        let u = unembed(&s, &e, &m).unwrap();
        assert!(!u.records()[0].chain_broken);
        assert_eq!(u.records()[0].energy, -1.0);
    }

    #[test]
    fn chain_expand_length_one_is_identity_shape() {
        let m = triangle();
        let (hw, emb) = chain_expand(&m, 1, 9).unwrap();
        assert_eq!(hw, HardwareGraph::from_model(&m));
        assert!(emb.chains.values().all(|c| c.len() == 1));
    }

    #[test]
    fn chain_expand_triangle_counts() {
        let m = triangle();
        let (hw, emb) = chain_expand(&m, 2, 5).unwrap();
        assert_eq!(hw.nodes().len(), 6);
        assert_eq!(hw.edges().len(), 6);
        assert!(validate(&emb, &m, &hw).is_empty());
        let e = assign_coefficients(&m, &emb, &hw, 1.0).unwrap();
        assert_eq!(e.intra_chain_edges.len(), 3);
    }

    #[test]
    fn chain_expand_rejects_zero_length() {
        assert!(chain_expand(&triangle(), 0, 0).is_err());
    }

    #[test]
    fn pegasus_estimates() {
        let e = pegasus_clique_estimate(180, 8.0).unwrap();
        assert_eq!(e.m, 16);
        assert_eq!(e.s_h_tilde_bound, 0.5);
        let e = pegasus_clique_estimate(500, 1.0).unwrap();
        assert_eq!((e.m, e.chain_len_lo, e.chain_len_hi), (43, 43, 44));
        assert!(pegasus_clique_estimate(0, 1.0).is_err());
    }

    #[test]
    fn chain_coupler_counts_against_negative_bound() {
        let mut m = IsingModel::new();
        m.add_coupling(Var(0), Var(1), 1.0);
        let (hw, emb) = chain_expand(&m, 2, 0).unwrap();
        let e = assign_coefficients(&m, &emb, &hw, 4.0).unwrap();
        assert_eq!(physical_scaling(&e, &AcceptRanges::dwave()).s_j, 2.0);
    }

    #[test]
    fn long_chains_shrink_field_factor() {
        let mut m = IsingModel::new();
        m.add_field(Var(0), 8.0);
        m.add_field(Var(1), -6.0);
        m.add_coupling(Var(0), Var(1), 1.0);
        let (hw, emb) = chain_expand(&m, 5, 1).unwrap();
        let e = assign_coefficients(&m, &emb, &hw, 1.0).unwrap();
        let r = AcceptRanges::dwave();
        assert!(physical_scaling(&e, &r).s_h <= scaling_factors(&m, &r).s_h);
        let ratios = scaling_ratios(&m, &e, &r);
        assert_eq!(ratios.s_h_tilde_over_s_j, (8.0 / 5.0 / 4.0) / 1.0);
    }

    #[test]
    fn json_round_trips() {
        let m = triangle();
        let (hw, emb) = chain_expand(&m, 3, 2).unwrap();
        assert_eq!(HardwareGraph::from_json(&hw.to_json().unwrap()).unwrap(), hw);
        assert_eq!(Embedding::from_json(&emb.to_json().unwrap()).unwrap(), emb);
    }
}
