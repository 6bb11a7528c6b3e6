use super::tokens::Tokens;
use super::Check;
use crate::error::{Error, Result};
use crate::model::{AuxAllocator, QuboModel, SpinAssignment, Var};
use crate::reduction::{bce_encode, perturbed_penalty, AuxRegistry, Domain, IntegerEncoding, LinearConstraint, Provenance};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write;

/// Maximise `sum p_j x_j` subject to `sum_j w_ij x_j <= C_i` for each of the
/// `m` constraints.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MkpInstance {
    pub n: usize,
    pub m: usize,
    pub profits: Vec<i64>,
    /// `m` rows of `n` weights.
    pub weights: Vec<Vec<i64>>,
    pub capacities: Vec<i64>,
    pub known_optimum: Option<i64>,
}

/// Format: `n m`, an optional known optimum (`0` for unknown), `n` profits,
/// `m` rows of `n` weights, `m` capacities. Whether the optimum is present is
/// decided by the token count.
pub fn mkp_parse(text: &str) -> Result<MkpInstance> {
    let mut t = Tokens::new(text);
    let n: usize = t.next("item count n")?;
    let m: usize = t.next("constraint count m")?;
    if n == 0 || m == 0 {
        return Err(Error::parse(1, "n and m must be positive"));
    }
    let body = n + m * n + m;
    let known_optimum = match t.len().checked_sub(2) {
        Some(rest) if rest == body + 1 => match t.next::<i64>("known optimum")? {
            0 => None,
            v => Some(v),
        },
        Some(rest) if rest == body => None,
        _ => {
            return Err(Error::parse(
                t.line(),
                format!("expected {body} or {} values after the header, found {}", body + 1, t.len().saturating_sub(2)),
            ))
        }
    };
    let mut profits = Vec::with_capacity(n);
    for j in 0..n {
        let line = t.line();
        let p: i64 = t.next(&format!("profit {j}"))?;
        if p <= 0 {
            return Err(Error::parse(line, format!("profit {j} must be positive, got {p}")));
        }
        profits.push(p);
    }
    let mut weights = Vec::with_capacity(m);
    for i in 0..m {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let line = t.line();
            let w: i64 = t.next(&format!("weight ({i}, {j})"))?;
            if w < 0 {
                return Err(Error::parse(line, format!("weight ({i}, {j}) is negative")));
            }
            row.push(w);
        }
        weights.push(row);
    }
    let mut capacities = Vec::with_capacity(m);
    for i in 0..m {
        let line = t.line();
        let c: i64 = t.next(&format!("capacity {i}"))?;
        if c <= 0 {
            return Err(Error::parse(line, format!("capacity {i} must be positive, got {c}")));
        }
        capacities.push(c);
    }
    t.finish()?;
    Ok(MkpInstance {
        n,
        m,
        profits,
        weights,
        capacities,
        known_optimum,
    })
}

pub fn write_mkp(inst: &MkpInstance) -> String {
    let mut s = String::new();
    let row = |v: &[i64]| v.iter().map(i64::to_string).collect::<Vec<_>>().join(" ");
    writeln!(s, "{} {}", inst.n, inst.m).unwrap();
    writeln!(s, "{}", inst.known_optimum.unwrap_or(0)).unwrap();
    writeln!(s, "{}", row(&inst.profits)).unwrap();
    for w in &inst.weights {
        writeln!(s, "{}", row(w)).unwrap();
    }
    writeln!(s, "{}", row(&inst.capacities)).unwrap();
    s
}

/// Feasibility of all constraints and the profit of `bits` (item bits only).
pub fn mkp_check(inst: &MkpInstance, bits: &[u8]) -> Result<Check> {
    if bits.len() != inst.n {
        return Err(Error::LengthMismatch {
            expected: inst.n,
            actual: bits.len(),
        });
    }
    let feasible = inst.weights.iter().zip(&inst.capacities).all(|(row, &c)| {
        row.iter().zip(bits).filter(|(_, &b)| b != 0).map(|(&w, _)| w).sum::<i64>() <= c
    });
    let objective = inst.profits.iter().zip(bits).filter(|(_, &b)| b != 0).map(|(&p, _)| p).sum::<i64>();
    Ok(Check {
        feasible,
        objective: objective as f64,
    })
}

impl MkpInstance {
    /// Item bits `Var(0..n)` read from a spin assignment.
    pub fn item_bits(&self, a: &SpinAssignment) -> Result<Vec<u8>> {
        (0..self.n as u64)
            .map(|j| a.get(Var(j)).map(|s| u8::from(s > 0)).ok_or(Error::MissingVariable(Var(j))))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MkpQubo {
    pub qubo: QuboModel,
    /// Slack encoding per constraint, bound to its auxiliary bits.
    pub slacks: Vec<IntegerEncoding>,
    pub aux_registry: AuxRegistry,
}

/// `-sum p_j x_j + sum_i lambda (sum_j w_ij x_j - z_i)^2` with item bits
/// `Var(j)` and slack `z_i in [0, C_i]` encoded with cap `min(mu, C_i)` on
/// auxiliary bits.
pub fn mkp_to_qubo(inst: &MkpInstance, lambda: f64, mu: i64) -> Result<MkpQubo> {
    let max_c = inst.capacities.iter().copied().max().unwrap_or(0);
    if mu < 1 || mu > max_c {
        return Err(Error::param(format!("mu must lie in [1, {max_c}], got {mu}")));
    }
    let items: Vec<Var> = (0..inst.n as u64).map(Var).collect();
    let mut alloc = AuxAllocator::after(&items);
    let mut q = QuboModel::new();
    let mut registry = AuxRegistry::new();
    let mut slacks = Vec::with_capacity(inst.m);
    for (&v, &p) in items.iter().zip(&inst.profits) {
        q.add_variable(v);
        q.add_linear(v, -(p as f64));
    }
    for (i, (row, &c)) in inst.weights.iter().zip(&inst.capacities).enumerate() {
        let enc = bce_encode(0, c, mu.min(c))?;
        let ids: Vec<Var> = (0..enc.len()).map(|_| alloc.fresh()).collect();
        for (bit, &id) in ids.iter().enumerate() {
            registry.insert(
                id,
                Provenance::IntegerBit {
                    owner: format!("slack{i}"),
                    bit: bit as u32,
                },
            );
        }
        let enc = enc.bind(ids)?;
        let terms = items
            .iter()
            .zip(row)
            .filter(|(_, &w)| w != 0)
            .map(|(&v, &w)| (v, w as f64))
            .chain(enc.terms().map(|(v, a)| (v, -(a as f64))));
        let g = LinearConstraint::new(terms, 0.0, Domain::Binary)?;
        q.merge(&perturbed_penalty(&g, lambda, 0.0)?);
        slacks.push(enc);
    }
    Ok(MkpQubo {
        qubo: q,
        slacks,
        aux_registry: registry,
    })
}

impl MkpQubo {
    /// Full QUBO assignment for item bits `x` with each tight slack
    /// `z_i = sum_j w_ij x_j`. `None` if some constraint is violated.
    pub fn tight_lift(&self, inst: &MkpInstance, x: &[u8]) -> Option<BTreeMap<Var, u8>> {
        let mut out: BTreeMap<Var, u8> = x.iter().enumerate().map(|(j, &b)| (Var(j as u64), b)).collect();
        for ((row, &c), enc) in inst.weights.iter().zip(&inst.capacities).zip(&self.slacks) {
            let used: i64 = row.iter().zip(x).filter(|(_, &b)| b != 0).map(|(&w, _)| w).sum();
            if used > c {
                return None;
            }
            for (v, b) in enc.variable_ids.iter().zip(enc.bits_for(used).ok()?) {
                out.insert(*v, b);
            }
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "# toy\n3 2\n7\n4 5 3\n2 3 1\n1 1 4\n5 5\n";

    #[test]
    fn parse_with_optimum() {
        let inst = mkp_parse(SMALL).unwrap();
        assert_eq!((inst.n, inst.m), (3, 2));
        assert_eq!(inst.known_optimum, Some(7));
        assert_eq!(inst.weights[1], vec![1, 1, 4]);
        assert_eq!(mkp_parse(&write_mkp(&inst)).unwrap(), inst);
    }

    #[test]
    fn parse_without_optimum() {
        let inst = mkp_parse("3 2\n4 5 3\n2 3 1\n1 1 4\n5 5").unwrap();
        assert_eq!(inst.known_optimum, None);
    }

    #[test]
    fn parse_errors_carry_lines() {
        match mkp_parse("3 2\n7\n4 x 3\n2 3 1\n1 1 4\n5 5\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match mkp_parse("3 2\n7\n4 5 3\n2 3 1\n1 1 4\n5 -5\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 6),
            other => panic!("{other:?}"),
        }
        assert!(mkp_parse("3 2\n1 2\n").is_err());
    }

    #[test]
    fn check_examples() {
        let inst = mkp_parse(SMALL).unwrap();
        assert_eq!(mkp_check(&inst, &[0, 0, 0]).unwrap(), Check { feasible: true, objective: 0.0 });
        let c = mkp_check(&inst, &[1, 1, 0]).unwrap();
        assert!(c.feasible);
        assert_eq!(c.objective, 9.0);
        let tight = mkp_parse("1 1\n3\n9\n4\n").unwrap();
        assert!(!mkp_check(&tight, &[1]).unwrap().feasible);
    }

    #[test]
    fn feasible_tight_energy_is_minus_profit() {
        let inst = mkp_parse(SMALL).unwrap();
        for mu in 1..=5 {
            let mq = mkp_to_qubo(&inst, 3.0, mu).unwrap();
            for mask in 0u8..8 {
                let x: Vec<u8> = (0..3).map(|j| (mask >> j) & 1).collect();
                let c = mkp_check(&inst, &x).unwrap();
                match mq.tight_lift(&inst, &x) {
                    Some(full) => {
                        assert!(c.feasible);
                        assert_eq!(mq.qubo.energy(&full).unwrap(), -c.objective);
                    }
                    None => assert!(!c.feasible),
                }
            }
        }
    }

    #[test]
    fn slack_bits_are_registered() {
        let inst = mkp_parse(SMALL).unwrap();
        let mq = mkp_to_qubo(&inst, 1.0, 2).unwrap();
        let total: usize = mq.slacks.iter().map(IntegerEncoding::len).sum();
        assert_eq!(mq.aux_registry.len(), total);
        assert_eq!(mq.qubo.num_variables(), 3 + total);
        assert!(mkp_to_qubo(&inst, 1.0, 0).is_err());
        assert!(mkp_to_qubo(&inst, 1.0, 6).is_err());
    }
}
