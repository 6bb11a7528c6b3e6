#![allow(dead_code)]

use coefred::{IsingModel, QuboModel, Var};
use proptest::prelude::*;

pub fn ising(n: usize, fields: Vec<f64>, couplings: Vec<(usize, usize, f64)>) -> IsingModel {
    let mut m = IsingModel::new();
    for i in 0..n {
        m.add_variable(Var(i as u64));
    }
    for (i, h) in fields.into_iter().enumerate().take(n) {
        m.add_field(Var(i as u64), h);
    }
    for (a, b, w) in couplings {
        let (a, b) = (a % n, b % n);
        if a != b {
            m.add_coupling(Var(a as u64), Var(b as u64), w);
        }
    }
    m
}

/// Random Ising model on up to `max_n` variables.
pub fn arb_ising(max_n: usize, h: f64, j: f64) -> impl Strategy<Value = IsingModel> {
    (1..=max_n).prop_flat_map(move |n| {
        (
            Just(n),
            prop::collection::vec(-h..=h, n),
            prop::collection::vec((0..n, 0..n, -j..=j), 0..=n * (n - 1) / 2 + 1),
        )
            .prop_map(|(n, f, c)| ising(n, f, c))
    })
}

pub fn arb_qubo(max_n: usize) -> impl Strategy<Value = QuboModel> {
    (1..=max_n).prop_flat_map(|n| {
        (prop::collection::vec((0..n, 0..n, -10.0..10.0f64), 0..=2 * n), -5.0..5.0f64).prop_map(move |(terms, off)| {
            let mut q = QuboModel::new();
            for i in 0..n {
                q.add_variable(Var(i as u64));
            }
            for (i, j, w) in terms {
                q.add_term(Var(i as u64), Var(j as u64), w);
            }
            q.add_offset(off);
            q
        })
    })
}
