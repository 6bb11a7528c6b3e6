use crate::error::{Error, Result};
use crate::model::{ising_to_qubo, IsingModel, QuboModel, SpinAssignment, Var};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Spin,
    Binary,
}

/// `g(v) = sum_i b_i v_i - c` over spin or binary variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    terms: BTreeMap<Var, f64>,
    constant: f64,
    domain: Domain,
}

impl LinearConstraint {
    pub fn new(
        terms: impl IntoIterator<Item = (Var, f64)>,
        constant: f64,
        domain: Domain,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (v, b) in terms {
            *map.entry(v).or_insert(0.0) += b;
        }
        if map.is_empty() {
            return Err(Error::param("a linear constraint needs at least one term"));
        }
        Ok(LinearConstraint {
            terms: map,
            constant,
            domain,
        })
    }

    /// One-hot `sum x_i = 1` over binary variables.
    pub fn one_hot(vars: impl IntoIterator<Item = Var>) -> Result<Self> {
        Self::new(vars.into_iter().map(|v| (v, 1.0)), 1.0, Domain::Binary)
    }

    pub fn terms(&self) -> impl Iterator<Item = (Var, f64)> + '_ {
        self.terms.iter().map(|(&v, &b)| (v, b))
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// Residual `g` for a spin assignment; binary constraints read `x = (s+1)/2`.
    pub fn evaluate(&self, assignment: &SpinAssignment) -> Result<f64> {
        let mut acc = -self.constant;
        for (&v, &b) in &self.terms {
            let s = assignment.get(v).ok_or(Error::MissingVariable(v))?;
            let value = match self.domain {
                Domain::Spin => f64::from(s),
                Domain::Binary => f64::from(u8::from(s > 0)),
            };
            acc += b * value;
        }
        Ok(acc)
    }
}

/// `lambda (g - eps)^2 - lambda eps^2 = lambda g^2 - 2 lambda eps g`, expanded
/// into a QUBO. For spin-domain constraints the result is expressed over the
/// same ids through `s = 2x - 1`, so energies agree pointwise.
pub fn perturbed_penalty(g: &LinearConstraint, lambda: f64, eps: f64) -> Result<QuboModel> {
    if !(lambda > 0.0) {
        return Err(Error::param(format!("penalty lambda must be positive, got {lambda}")));
    }
    let c = g.constant;
    let terms: Vec<(Var, f64)> = g.terms().collect();
    match g.domain {
        Domain::Binary => {
            let mut q = QuboModel::new();
            for (idx, &(vi, bi)) in terms.iter().enumerate() {
                // x^2 = x
                q.add_linear(vi, lambda * (bi * bi - 2.0 * c * bi) - 2.0 * lambda * eps * bi);
                for &(vj, bj) in &terms[idx + 1..] {
                    q.add_term(vi, vj, 2.0 * lambda * bi * bj);
                }
            }
            q.add_offset(lambda * c * c + 2.0 * lambda * eps * c);
            Ok(q)
        }
        Domain::Spin => {
            let mut m = IsingModel::new();
            let mut sum_sq = 0.0;
            for (idx, &(vi, bi)) in terms.iter().enumerate() {
                // s^2 = 1
                sum_sq += bi * bi;
                m.add_field(vi, -2.0 * lambda * c * bi - 2.0 * lambda * eps * bi);
                for &(vj, bj) in &terms[idx + 1..] {
                    m.add_coupling(vi, vj, 2.0 * lambda * bi * bj);
                }
            }
            m.add_offset(lambda * (sum_sq + c * c) + 2.0 * lambda * eps * c);
            Ok(ising_to_qubo(&m))
        }
    }
}

/// Multiplier `u`, penalty `lambda` and growth factor `alpha` of the
/// augmented-Lagrangian iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlmState {
    pub u: f64,
    pub lambda: f64,
    pub alpha: f64,
}

impl AlmState {
    pub fn new(u: f64, lambda: f64, alpha: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::param("ALM lambda must be positive"));
        }
        if !(alpha > 1.0) {
            return Err(Error::param("ALM alpha must exceed 1"));
        }
        Ok(AlmState { u, lambda, alpha })
    }

    /// Constraint shift `eps = -u / (2 lambda)`.
    pub fn epsilon(&self) -> f64 {
        -self.u / (2.0 * self.lambda)
    }

    /// `u <- u + 2 lambda g`, then `lambda <- alpha lambda`.
    pub fn update(&self, g_value: f64) -> AlmState {
        AlmState {
            u: self.u + 2.0 * self.lambda * g_value,
            lambda: self.alpha * self.lambda,
            alpha: self.alpha,
        }
    }
}
