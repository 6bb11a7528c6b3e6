use super::tokens::Tokens;
use super::Check;
use crate::error::{Error, Result};
use crate::model::{QuboModel, SpinAssignment, Var};
use crate::reduction::{perturbed_penalty, LinearConstraint};
use serde::{Deserialize, Serialize};
use std::fmt::Write;

/// Facilities `i, j` with flow `f_ij` placed on locations `k, l` with
/// distance `d_kl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QapInstance {
    pub n: usize,
    pub flow: Vec<Vec<f64>>,
    pub distance: Vec<Vec<f64>>,
}

/// `n`, then the `n x n` flow matrix, then the `n x n` distance matrix.
pub fn qap_parse(text: &str) -> Result<QapInstance> {
    let mut t = Tokens::new(text);
    let n: usize = t.next("size n")?;
    if n == 0 {
        return Err(Error::parse(1, "n must be positive"));
    }
    let read = |name: &str, t: &mut Tokens| -> Result<Vec<Vec<f64>>> {
        let mut mat = Vec::with_capacity(n);
        for i in 0..n {
            let mut row = Vec::with_capacity(n);
            for j in 0..n {
                let line = t.line();
                let v: f64 = t.next(&format!("{name} ({i}, {j})"))?;
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::parse(line, format!("{name} ({i}, {j}) must be finite and >= 0")));
                }
                row.push(v);
            }
            mat.push(row);
        }
        Ok(mat)
    };
    let flow = read("flow", &mut t)?;
    let distance = read("distance", &mut t)?;
    t.finish()?;
    Ok(QapInstance { n, flow, distance })
}

pub fn write_qap(inst: &QapInstance) -> String {
    let mut s = format!("{}\n", inst.n);
    for mat in [&inst.flow, &inst.distance] {
        s.push('\n');
        for row in mat {
            let line: Vec<String> = row.iter().map(f64::to_string).collect();
            writeln!(s, "{}", line.join(" ")).unwrap();
        }
    }
    s
}

/// Binary variable `x_ik`: facility `i` at location `k`.
pub fn qap_variable(n: usize, i: usize, k: usize) -> Var {
    Var((i * n + k) as u64)
}

/// `sum f_ij d_kl x_ik x_jl` plus a perturbed one-hot penalty
/// `lambda (g - eps)^2 - lambda eps^2` for each of the `n` rows and `n`
/// columns of `x`.
pub fn qap_to_qubo(inst: &QapInstance, lambda: f64, eps: f64) -> Result<QuboModel> {
    if !(lambda > 0.0) {
        return Err(Error::param(format!(
            "lambda must be positive (lambda = 0 collapses to the all-zero string), got {lambda}"
        )));
    }
    let n = inst.n;
    let x = |i, k| qap_variable(n, i, k);
    let mut q = QuboModel::new();
    for i in 0..n {
        for k in 0..n {
            q.add_variable(x(i, k));
        }
    }
    for i in 0..n {
        for j in 0..n {
            let f = inst.flow[i][j];
            if f == 0.0 {
                continue;
            }
            for k in 0..n {
                for l in 0..n {
                    let d = inst.distance[k][l];
                    if d != 0.0 {
                        q.add_term(x(i, k), x(j, l), f * d);
                    }
                }
            }
        }
    }
    for c in qap_constraints(n)? {
        q.merge(&perturbed_penalty(&c, lambda, eps)?);
    }
    Ok(q)
}

/// Row constraints `sum_k x_ik = 1` then column constraints `sum_i x_ik = 1`.
pub fn qap_constraints(n: usize) -> Result<Vec<LinearConstraint>> {
    let mut out = Vec::with_capacity(2 * n);
    for i in 0..n {
        out.push(LinearConstraint::one_hot((0..n).map(|k| qap_variable(n, i, k)))?);
    }
    for k in 0..n {
        out.push(LinearConstraint::one_hot((0..n).map(|i| qap_variable(n, i, k)))?);
    }
    Ok(out)
}

fn objective_of(inst: &QapInstance, bits: &[u8]) -> f64 {
    let n = inst.n;
    let ones: Vec<(usize, usize)> = (0..n * n).filter(|&v| bits[v] != 0).map(|v| (v / n, v % n)).collect();
    let mut acc = 0.0;
    for &(i, k) in &ones {
        for &(j, l) in &ones {
            acc += inst.flow[i][j] * inst.distance[k][l];
        }
    }
    acc
}

/// Feasible iff every row and column of `x` has exactly one 1. The objective
/// is the quadratic cost of `bits` as given.
pub fn qap_check(inst: &QapInstance, bits: &[u8]) -> Result<Check> {
    let n = inst.n;
    if bits.len() != n * n {
        return Err(Error::LengthMismatch {
            expected: n * n,
            actual: bits.len(),
        });
    }
    let rows = (0..n).all(|i| (0..n).filter(|&k| bits[i * n + k] != 0).count() == 1);
    let cols = (0..n).all(|k| (0..n).filter(|&i| bits[i * n + k] != 0).count() == 1);
    Ok(Check {
        feasible: rows && cols,
        objective: objective_of(inst, bits),
    })
}

impl QapInstance {
    /// Cost of placing facility `i` at `perm[i]`.
    pub fn cost(&self, perm: &[usize]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                acc += self.flow[i][j] * self.distance[perm[i]][perm[j]];
            }
        }
        acc
    }

    pub fn bits_of(&self, perm: &[usize]) -> Vec<u8> {
        let mut bits = vec![0u8; self.n * self.n];
        for (i, &k) in perm.iter().enumerate() {
            bits[i * self.n + k] = 1;
        }
        bits
    }

    pub fn bits_from(&self, a: &SpinAssignment) -> Result<Vec<u8>> {
        (0..(self.n * self.n) as u64)
            .map(|v| a.get(Var(v)).map(|s| u8::from(s > 0)).ok_or(Error::MissingVariable(Var(v))))
            .collect()
    }
}

const BRUTE_FORCE_CAP: usize = 10;

/// Optimal cost and a minimising permutation by trying all `n!` of them.
pub fn qap_brute_force(inst: &QapInstance) -> Result<(f64, Vec<usize>)> {
    if inst.n > BRUTE_FORCE_CAP {
        return Err(Error::TooManyVariables {
            count: inst.n,
            cap: BRUTE_FORCE_CAP,
        });
    }
    let mut perm: Vec<usize> = (0..inst.n).collect();
    let mut best = (inst.cost(&perm), perm.clone());
    // Heap's algorithm
    let mut c = vec![0usize; inst.n];
    let mut i = 0;
    while i < inst.n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            let cost = inst.cost(&perm);
            if cost < best.0 {
                best = (cost, perm.clone());
            }
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    const TINY: &str = "3\n0 2 1\n2 0 3\n1 3 0\n\n0 4 7\n4 0 1\n7 1 0\n";

    fn as_map(bits: &[u8]) -> BTreeMap<Var, u8> {
        bits.iter().enumerate().map(|(i, &b)| (Var(i as u64), b)).collect()
    }

    #[test]
    fn parse_round_trip() {
        let inst = qap_parse(TINY).unwrap();
        assert_eq!(inst.n, 3);
        assert_eq!(inst.distance[0][2], 7.0);
        assert_eq!(qap_parse(&write_qap(&inst)).unwrap(), inst);
        assert!(qap_parse("2\n0 1\n1 0\n0 1\n").is_err());
        assert!(qap_parse("2\n0 1\n1 0\n0 1\n1 0\n9\n").is_err());
    }

    #[test]
    fn permutation_has_zero_penalty() {
        let inst = qap_parse(TINY).unwrap();
        for eps in [0.0, 0.2, 0.5] {
            let q = qap_to_qubo(&inst, 5.0, eps).unwrap();
            let perm = [2, 0, 1];
            let e = q.energy(&as_map(&inst.bits_of(&perm))).unwrap();
            assert!((e - inst.cost(&perm)).abs() < 1e-9);
        }
    }

    #[test]
    fn check_examples() {
        let inst = qap_parse(TINY).unwrap();
        let id = qap_check(&inst, &inst.bits_of(&[0, 1, 2])).unwrap();
        assert!(id.feasible);
        let direct: f64 = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| inst.flow[i][j] * inst.distance[i][j]).sum();
        assert_eq!(id.objective, direct);
        assert!(!qap_check(&inst, &[0; 9]).unwrap().feasible);
    }

    #[test]
    fn brute_force_small() {
        let inst = qap_parse(TINY).unwrap();
        let (best, perm) = qap_brute_force(&inst).unwrap();
        let all = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let min = all.iter().map(|p| inst.cost(p)).fold(f64::INFINITY, f64::min);
        assert_eq!(best, min);
        assert_eq!(inst.cost(&perm), best);
    }

    #[test]
    fn lambda_must_be_positive() {
        let inst = qap_parse(TINY).unwrap();
        assert!(qap_to_qubo(&inst, 0.0, 0.0).is_err());
    }
}
