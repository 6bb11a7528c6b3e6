//! Ising and QUBO models, energy evaluation, conversion between the two,
//! hardware scaling factors and an exhaustive ground-state oracle.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Coefficients with magnitude below this are treated as absent.
pub const ZERO_TOL: f64 = 1e-12;

/// Default cap on the number of variables for exhaustive enumeration.
pub const DEFAULT_ENUMERATION_CAP: usize = 20;

/// First id of the auxiliary/slack namespace. Problem variables live below it.
pub const AUX_BASE: u64 = 1 << 32;

/// Opaque variable identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Var(pub u64);

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u64> for Var {
    fn from(v: u64) -> Self {
        Var(v)
    }
}

impl Var {
    pub fn is_aux(self) -> bool {
        self.0 >= AUX_BASE
    }
}

fn ordered(a: Var, b: Var) -> (Var, Var) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Hands out fresh auxiliary ids above every id already in use.
#[derive(Debug, Clone)]
pub struct AuxAllocator {
    next: u64,
}

impl AuxAllocator {
    pub fn after<'a>(used: impl IntoIterator<Item = &'a Var>) -> Self {
        let max = used.into_iter().map(|v| v.0 + 1).max().unwrap_or(0);
        AuxAllocator {
            next: max.max(AUX_BASE),
        }
    }

    pub fn fresh(&mut self) -> Var {
        let v = Var(self.next);
        self.next += 1;
        v
    }
}

/// A full assignment of spins to variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SpinAssignment {
    values: BTreeMap<Var, i8>,
}

impl SpinAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Var, i8)>) -> Result<Self> {
        let mut a = SpinAssignment::new();
        for (v, s) in pairs {
            a.set(v, s)?;
        }
        Ok(a)
    }

    /// Builds an assignment from variables and spins given in the same order.
    pub fn from_slices(vars: &[Var], spins: &[i8]) -> Result<Self> {
        if vars.len() != spins.len() {
            return Err(Error::LengthMismatch {
                expected: vars.len(),
                actual: spins.len(),
            });
        }
        Self::from_pairs(vars.iter().copied().zip(spins.iter().copied()))
    }

    pub fn set(&mut self, var: Var, spin: i8) -> Result<()> {
        if spin != 1 && spin != -1 {
            return Err(Error::InvalidSpin {
                var,
                value: spin as i64,
            });
        }
        self.values.insert(var, spin);
        Ok(())
    }

    pub fn get(&self, var: Var) -> Option<i8> {
        self.values.get(&var).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, i8)> + '_ {
        self.values.iter().map(|(&v, &s)| (v, s))
    }

    /// Restricts the assignment to the given variables.
    pub fn restrict<'a>(&self, vars: impl IntoIterator<Item = &'a Var>) -> SpinAssignment {
        SpinAssignment {
            values: vars
                .into_iter()
                .filter_map(|v| self.values.get(v).map(|&s| (*v, s)))
                .collect(),
        }
    }

    /// Binary view, `x = (s + 1) / 2`.
    pub fn to_bits(&self) -> BTreeMap<Var, u8> {
        self.values
            .iter()
            .map(|(&v, &s)| (v, u8::from(s > 0)))
            .collect()
    }

    pub fn from_bits(bits: &BTreeMap<Var, u8>) -> Self {
        SpinAssignment {
            values: bits
                .iter()
                .map(|(&v, &b)| (v, if b != 0 { 1 } else { -1 }))
                .collect(),
        }
    }
}

impl FromIterator<(Var, i8)> for SpinAssignment {
    /// Panics on a spin other than +1 or -1.
    fn from_iter<T: IntoIterator<Item = (Var, i8)>>(iter: T) -> Self {
        SpinAssignment::from_pairs(iter).expect("spins must be +1 or -1")
    }
}

/// Sparse Ising Hamiltonian `sum J_ij s_i s_j + sum h_i s_i + offset`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IsingModel {
    vars: BTreeSet<Var>,
    h: BTreeMap<Var, f64>,
    j: BTreeMap<(Var, Var), f64>,
    offset: f64,
}

impl IsingModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_variable(&mut self, v: Var) {
        self.vars.insert(v);
    }

    /// Accumulates `value` onto `h_v`.
    pub fn add_field(&mut self, v: Var, value: f64) {
        self.vars.insert(v);
        let e = self.h.entry(v).or_insert(0.0);
        *e += value;
        if e.abs() < ZERO_TOL {
            self.h.remove(&v);
        }
    }

    /// Accumulates `value` onto `J_ab`. A self-pair `a == b` is constant and
    /// goes to the offset since `s^2 = 1`.
    pub fn add_coupling(&mut self, a: Var, b: Var, value: f64) {
        self.vars.insert(a);
        self.vars.insert(b);
        if a == b {
            self.offset += value;
            return;
        }
        let key = ordered(a, b);
        let e = self.j.entry(key).or_insert(0.0);
        *e += value;
        if e.abs() < ZERO_TOL {
            self.j.remove(&key);
        }
    }

    pub fn add_offset(&mut self, value: f64) {
        self.offset += value;
    }

    pub fn variables(&self) -> &BTreeSet<Var> {
        &self.vars
    }

    pub fn num_variables(&self) -> usize {
        self.vars.len()
    }

    pub fn field(&self, v: Var) -> f64 {
        self.h.get(&v).copied().unwrap_or(0.0)
    }

    pub fn coupling(&self, a: Var, b: Var) -> f64 {
        self.j.get(&ordered(a, b)).copied().unwrap_or(0.0)
    }

    pub fn fields(&self) -> impl Iterator<Item = (Var, f64)> + '_ {
        self.h.iter().map(|(&v, &w)| (v, w))
    }

    pub fn couplings(&self) -> impl Iterator<Item = ((Var, Var), f64)> + '_ {
        self.j.iter().map(|(&k, &w)| (k, w))
    }

    pub fn num_couplings(&self) -> usize {
        self.j.len()
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    /// Returns a copy with every coefficient and the offset multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> IsingModel {
        let mut out = IsingModel::new();
        for &v in &self.vars {
            out.add_variable(v);
        }
        for (v, w) in self.fields() {
            out.add_field(v, w * factor);
        }
        for ((a, b), w) in self.couplings() {
            out.add_coupling(a, b, w * factor);
        }
        out.offset = self.offset * factor;
        out
    }

    /// Energy of a spin assignment. Every model variable must be assigned.
    pub fn energy(&self, assignment: &SpinAssignment) -> Result<f64> {
        if let Some(&missing) = self.vars.iter().find(|&&v| assignment.get(v).is_none()) {
            return Err(Error::MissingVariable(missing));
        }
        Ok(self.energy_with(|v| assignment.get(v).unwrap_or(0)))
    }

    // Summation order here and in `CompiledIsing::energy` must stay identical so
    // that both paths give bit-identical results.
    fn energy_with(&self, spin: impl Fn(Var) -> i8) -> f64 {
        let mut acc = 0.0;
        for (&(a, b), &w) in &self.j {
            acc += w * f64::from(spin(a) * spin(b));
        }
        for (&v, &w) in &self.h {
            acc += w * f64::from(spin(v));
        }
        acc + self.offset
    }

    pub fn compile(&self) -> CompiledIsing {
        CompiledIsing::new(self)
    }

    /// Neighbour lists, used by embedding and reduction code.
    pub fn adjacency(&self) -> BTreeMap<Var, BTreeSet<Var>> {
        let mut adj: BTreeMap<Var, BTreeSet<Var>> =
            self.vars.iter().map(|&v| (v, BTreeSet::new())).collect();
        for &(a, b) in self.j.keys() {
            adj.entry(a).or_default().insert(b);
            adj.entry(b).or_default().insert(a);
        }
        adj
    }

    pub fn max_abs_coupling(&self) -> f64 {
        self.j.values().fold(0.0, |m, w| m.max(w.abs()))
    }
}

/// Dense, index-based view of an [`IsingModel`] used in inner loops.
#[derive(Debug, Clone)]
pub struct CompiledIsing {
    pub vars: Vec<Var>,
    pub index: BTreeMap<Var, usize>,
    /// Fields in the same order as the source model's field map.
    pub fields: Vec<(usize, f64)>,
    /// Couplings in the same order as the source model's coupling map.
    pub couplings: Vec<(usize, usize, f64)>,
    pub h: Vec<f64>,
    pub adj: Vec<Vec<(usize, f64)>>,
    pub offset: f64,
}

impl CompiledIsing {
    fn new(model: &IsingModel) -> Self {
        let vars: Vec<Var> = model.vars.iter().copied().collect();
        let index: BTreeMap<Var, usize> = vars.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let fields: Vec<(usize, f64)> = model.h.iter().map(|(v, &w)| (index[v], w)).collect();
        let couplings: Vec<(usize, usize, f64)> = model
            .j
            .iter()
            .map(|(&(a, b), &w)| (index[&a], index[&b], w))
            .collect();
        let mut h = vec![0.0; vars.len()];
        for &(i, w) in &fields {
            h[i] = w;
        }
        let mut adj = vec![Vec::new(); vars.len()];
        for &(a, b, w) in &couplings {
            adj[a].push((b, w));
            adj[b].push((a, w));
        }
        CompiledIsing {
            vars,
            index,
            fields,
            couplings,
            h,
            adj,
            offset: model.offset,
        }
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    /// Energy of a dense spin vector, bit-identical to [`IsingModel::energy`].
    pub fn energy(&self, spins: &[i8]) -> f64 {
        let mut acc = 0.0;
        for &(a, b, w) in &self.couplings {
            acc += w * f64::from(spins[a] * spins[b]);
        }
        for &(i, w) in &self.fields {
            acc += w * f64::from(spins[i]);
        }
        acc + self.offset
    }

    pub fn local_field(&self, spins: &[i8], i: usize) -> f64 {
        self.adj[i]
            .iter()
            .fold(self.h[i], |acc, &(j, w)| acc + w * f64::from(spins[j]))
    }

    pub fn assignment(&self, spins: &[i8]) -> SpinAssignment {
        SpinAssignment {
            values: self.vars.iter().copied().zip(spins.iter().copied()).collect(),
        }
    }
}

/// Spin vector for the `index`-th state in enumeration order; bit `k` set means
/// variable `k` is +1.
pub fn spins_from_index(index: u64, n: usize, out: &mut [i8]) {
    for (k, s) in out.iter_mut().enumerate().take(n) {
        *s = if (index >> k) & 1 == 1 { 1 } else { -1 };
    }
}

/// Sparse upper-triangular QUBO `sum_{i<=j} Q_ij x_i x_j + offset`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QuboModel {
    vars: BTreeSet<Var>,
    q: BTreeMap<(Var, Var), f64>,
    offset: f64,
}

impl QuboModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_variable(&mut self, v: Var) {
        self.vars.insert(v);
    }

    /// Accumulates onto `Q_ij`; keys are normalised to `i <= j`.
    pub fn add_term(&mut self, i: Var, j: Var, value: f64) {
        self.vars.insert(i);
        self.vars.insert(j);
        let key = ordered(i, j);
        let e = self.q.entry(key).or_insert(0.0);
        *e += value;
        if e.abs() < ZERO_TOL {
            self.q.remove(&key);
        }
    }

    pub fn add_linear(&mut self, i: Var, value: f64) {
        self.add_term(i, i, value);
    }

    pub fn add_offset(&mut self, value: f64) {
        self.offset += value;
    }

    /// Adds every term of `other` into `self`.
    pub fn merge(&mut self, other: &QuboModel) {
        for &v in &other.vars {
            self.vars.insert(v);
        }
        for (&(i, j), &w) in &other.q {
            self.add_term(i, j, w);
        }
        self.offset += other.offset;
    }

    pub fn variables(&self) -> &BTreeSet<Var> {
        &self.vars
    }

    pub fn num_variables(&self) -> usize {
        self.vars.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = ((Var, Var), f64)> + '_ {
        self.q.iter().map(|(&k, &w)| (k, w))
    }

    pub fn num_terms(&self) -> usize {
        self.q.len()
    }

    pub fn get(&self, i: Var, j: Var) -> f64 {
        self.q.get(&ordered(i, j)).copied().unwrap_or(0.0)
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.q.values().fold(0.0, |m, w| m.max(w.abs()))
    }

    /// Energy of a 0/1 assignment. Every model variable must be assigned.
    pub fn energy(&self, bits: &BTreeMap<Var, u8>) -> Result<f64> {
        if let Some(&missing) = self.vars.iter().find(|v| !bits.contains_key(v)) {
            return Err(Error::MissingVariable(missing));
        }
        let mut acc = 0.0;
        for (&(i, j), &w) in &self.q {
            if bits[&i] != 0 && bits[&j] != 0 {
                acc += w;
            }
        }
        Ok(acc + self.offset)
    }

    /// Substitutes `x = (s + 1) / 2`.
    pub fn to_ising(&self) -> IsingModel {
        qubo_to_ising(self)
    }
}

/// Substitutes `x_i = (s_i + 1) / 2` into every QUBO term.
pub fn qubo_to_ising(q: &QuboModel) -> IsingModel {
    let mut m = IsingModel::new();
    for &v in &q.vars {
        m.add_variable(v);
    }
    for (&(i, j), &w) in &q.q {
        if i == j {
            m.add_field(i, w / 2.0);
            m.add_offset(w / 2.0);
        } else {
            let quarter = w / 4.0;
            m.add_coupling(i, j, quarter);
            m.add_field(i, quarter);
            m.add_field(j, quarter);
            m.add_offset(quarter);
        }
    }
    m.add_offset(q.offset);
    m
}

/// Substitutes `s_i = 2 x_i - 1` into every Ising term.
pub fn ising_to_qubo(m: &IsingModel) -> QuboModel {
    let mut q = QuboModel::new();
    for &v in &m.vars {
        q.add_variable(v);
    }
    for (&(a, b), &w) in &m.j {
        q.add_term(a, b, 4.0 * w);
        q.add_linear(a, -2.0 * w);
        q.add_linear(b, -2.0 * w);
        q.add_offset(w);
    }
    for (&v, &w) in &m.h {
        q.add_linear(v, 2.0 * w);
        q.add_offset(-w);
    }
    q.add_offset(m.offset);
    q
}

/// Hardware-acceptable coefficient ranges `[h_min, h_max]` and `[j_min, j_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcceptRanges {
    pub h_min: f64,
    pub h_max: f64,
    pub j_min: f64,
    pub j_max: f64,
}

impl AcceptRanges {
    pub fn new(h_min: f64, h_max: f64, j_min: f64, j_max: f64) -> Result<Self> {
        if !(h_min < 0.0 && h_max > 0.0 && j_min < 0.0 && j_max > 0.0) {
            return Err(Error::param(
                "accept ranges need h_min, j_min < 0 < h_max, j_max",
            ));
        }
        Ok(AcceptRanges {
            h_min,
            h_max,
            j_min,
            j_max,
        })
    }

    /// `h` in `[-4, 4]`, `J` in `[-2, 1]`.
    pub fn dwave() -> Self {
        AcceptRanges {
            h_min: -4.0,
            h_max: 4.0,
            j_min: -2.0,
            j_max: 1.0,
        }
    }

    /// Largest magnitude of the field range.
    pub fn h_scale(&self) -> f64 {
        self.h_max.max(-self.h_min)
    }

    /// Largest magnitude of the coupling range.
    pub fn j_scale(&self) -> f64 {
        self.j_max.max(-self.j_min)
    }
}

impl Default for AcceptRanges {
    fn default() -> Self {
        Self::dwave()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub s_h: f64,
    pub s_j: f64,
    pub s_hamiltonian: f64,
    /// `s_H / min |h_i|` over nonzero fields; infinite when there are none.
    pub dynamic_range_h: f64,
    /// `s_H / min |J_ij|` over nonzero couplings; infinite when there are none.
    pub dynamic_range_j: f64,
}

fn range_factor(values: impl Iterator<Item = f64> + Clone, lo: f64, hi: f64) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    let min = values.fold(f64::INFINITY, f64::min);
    if max == f64::NEG_INFINITY {
        return 0.0;
    }
    (max / hi).max(min / lo)
}

fn min_abs(values: impl Iterator<Item = f64>) -> f64 {
    values
        .filter(|w| w.abs() >= ZERO_TOL)
        .fold(f64::INFINITY, |m, w| m.min(w.abs()))
}

pub fn scaling_factors(model: &IsingModel, ranges: &AcceptRanges) -> ScalingReport {
    let s_h = range_factor(model.h.values().copied(), ranges.h_min, ranges.h_max);
    let s_j = range_factor(model.j.values().copied(), ranges.j_min, ranges.j_max);
    let s_hamiltonian = s_h.max(s_j);
    let dr = |m: f64| {
        if m.is_finite() {
            s_hamiltonian / m
        } else {
            f64::INFINITY
        }
    };
    ScalingReport {
        s_h,
        s_j,
        s_hamiltonian,
        dynamic_range_h: dr(min_abs(model.h.values().copied())),
        dynamic_range_j: dr(min_abs(model.j.values().copied())),
    }
}

/// Divides the model (offset included) by `max(s_H, 1)`.
pub fn rescale(model: &IsingModel, ranges: &AcceptRanges) -> IsingModel {
    let s = scaling_factors(model, ranges).s_hamiltonian;
    if s <= 1.0 {
        model.clone()
    } else {
        model.scaled(1.0 / s)
    }
}

/// Exact minimizers found by enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundStates {
    pub energy: f64,
    pub states: BTreeSet<SpinAssignment>,
}

impl GroundStates {
    pub fn contains(&self, a: &SpinAssignment) -> bool {
        self.states.contains(a)
    }
}

/// States within this distance of the minimum count as degenerate minimizers;
/// absorbs summation-order rounding only.
pub fn degeneracy_tolerance(min_energy: f64) -> f64 {
    1e-9 * (1.0 + min_energy.abs())
}

/// Exhaustive ground states under the default enumeration cap.
pub fn ground_states(model: &IsingModel) -> Result<GroundStates> {
    ground_states_capped(model, DEFAULT_ENUMERATION_CAP)
}

pub fn ground_states_capped(model: &IsingModel, cap: usize) -> Result<GroundStates> {
    let n = model.num_variables();
    if n > cap || n >= 63 {
        return Err(Error::TooManyVariables { count: n, cap });
    }
    let c = model.compile();
    let total = 1u64 << n;
    let mut spins = vec![-1i8; n];
    let mut energies = Vec::with_capacity(total as usize);
    let mut best = f64::INFINITY;
    for idx in 0..total {
        spins_from_index(idx, n, &mut spins);
        let e = c.energy(&spins);
        best = best.min(e);
        energies.push(e);
    }
    let tol = degeneracy_tolerance(best);
    let mut states = BTreeSet::new();
    for (idx, &e) in energies.iter().enumerate() {
        if e <= best + tol {
            spins_from_index(idx as u64, n, &mut spins);
            states.insert(c.assignment(&spins));
        }
    }
    Ok(GroundStates {
        energy: best,
        states,
    })
}

/// Ground states projected onto `keep`, exact when the remaining variables are
/// pairwise uncoupled: each of them is then minimised independently given the
/// kept spins, so only `2^|keep|` states are enumerated.
pub fn ground_states_marginal(
    model: &IsingModel,
    keep: &BTreeSet<Var>,
    cap: usize,
) -> Result<GroundStates> {
    let kept: Vec<Var> = model.vars.iter().copied().filter(|v| keep.contains(v)).collect();
    if kept.len() > cap || kept.len() >= 63 {
        return Err(Error::TooManyVariables {
            count: kept.len(),
            cap,
        });
    }
    for &(a, b) in model.j.keys() {
        if !keep.contains(&a) && !keep.contains(&b) {
            return Err(Error::param(format!(
                "eliminated variables {a} and {b} are coupled"
            )));
        }
    }
    let kept_index: BTreeMap<Var, usize> = kept.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    // Split terms: those among kept variables, and per eliminated variable its
    // own field plus couplings into the kept set.
    let mut inner: Vec<(usize, usize, f64)> = Vec::new();
    let mut inner_h: Vec<(usize, f64)> = Vec::new();
    let mut free: BTreeMap<Var, (f64, Vec<(usize, f64)>)> = model
        .vars
        .iter()
        .filter(|v| !keep.contains(v))
        .map(|&v| (v, (0.0, Vec::new())))
        .collect();
    for (&(a, b), &w) in &model.j {
        match (kept_index.get(&a), kept_index.get(&b)) {
            (Some(&ia), Some(&ib)) => inner.push((ia, ib, w)),
            (Some(&ia), None) => free.get_mut(&b).unwrap().1.push((ia, w)),
            (None, Some(&ib)) => free.get_mut(&a).unwrap().1.push((ib, w)),
            (None, None) => unreachable!(),
        }
    }
    for (&v, &w) in &model.h {
        match kept_index.get(&v) {
            Some(&i) => inner_h.push((i, w)),
            None => free.get_mut(&v).unwrap().0 = w,
        }
    }
    let free: Vec<(f64, Vec<(usize, f64)>)> = free.into_values().collect();
    let n = kept.len();
    let total = 1u64 << n;
    let mut spins = vec![-1i8; n];
    let mut energies = Vec::with_capacity(total as usize);
    let mut best = f64::INFINITY;
    for idx in 0..total {
        spins_from_index(idx, n, &mut spins);
        let mut e = model.offset;
        for &(a, b, w) in &inner {
            e += w * f64::from(spins[a] * spins[b]);
        }
        for &(i, w) in &inner_h {
            e += w * f64::from(spins[i]);
        }
        for (h, links) in &free {
            let f = links
                .iter()
                .fold(*h, |acc, &(i, w)| acc + w * f64::from(spins[i]));
            e -= f.abs();
        }
        best = best.min(e);
        energies.push(e);
    }
    let tol = degeneracy_tolerance(best);
    let mut states = BTreeSet::new();
    for (idx, &e) in energies.iter().enumerate() {
        if e <= best + tol {
            spins_from_index(idx as u64, n, &mut spins);
            states.insert(SpinAssignment::from_slices(&kept, &spins)?);
        }
    }
    Ok(GroundStates {
        energy: best,
        states,
    })
}
