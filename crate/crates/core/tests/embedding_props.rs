mod common;

use coefred::embedding::{assign_coefficients, chain_expand, unembed, validate};
use coefred::sampling::SampleSet;
use coefred::{SpinAssignment, Var};
use common::arb_ising;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn balanced_assignment_sums(m in arb_ising(7, 5.0, 5.0), len in 1usize..5, seed in any::<u64>(), cs in 0.5..10.0f64) {
        let (hw, emb) = chain_expand(&m, len, seed).unwrap();
        prop_assert!(validate(&emb, &m, &hw).is_empty());
        let e = assign_coefficients(&m, &emb, &hw, cs).unwrap();
        for &v in m.variables() {
            let chain = emb.chain(v).unwrap();
            let sum: f64 = chain.iter().map(|&k| e.physical.field(k)).sum();
            prop_assert!((sum - m.field(v)).abs() <= 1e-9);
        }
        for ((a, b), w) in m.couplings() {
            let (ca, cb) = (emb.chain(a).unwrap(), emb.chain(b).unwrap());
            let mut sum = 0.0;
            for &k in ca {
                for &l in cb {
                    sum += e.physical.coupling(k, l);
                }
            }
            prop_assert!((sum - w).abs() <= 1e-9);
        }
    }

    #[test]
    fn unembed_inverts_lift(m in arb_ising(6, 5.0, 5.0), len in 1usize..4, seed in any::<u64>(), pick in any::<u64>()) {
        let (hw, emb) = chain_expand(&m, len, seed).unwrap();
        let e = assign_coefficients(&m, &emb, &hw, 3.0).unwrap();
        let vars: Vec<Var> = m.variables().iter().copied().collect();
        let spins: Vec<i8> = (0..vars.len()).map(|i| if pick >> (i % 64) & 1 == 1 { 1 } else { -1 }).collect();
        let logical = SpinAssignment::from_slices(&vars, &spins).unwrap();
        let physical = e.lift(&logical).unwrap();
        let mut s = SampleSet::for_model(&e.physical);
        let pspins: Vec<i8> = s.variables().iter().map(|&v| physical.get(v).unwrap()).collect();
        s.push_evaluated(&e.physical, pspins).unwrap();
        let back = unembed(&s, &e, &m).unwrap();
        prop_assert_eq!(back.assignment(0), logical.clone());
        prop_assert!(!back.records()[0].chain_broken);
        let shift = 3.0 * e.intra_chain_edges.len() as f64;
        let pe = e.physical.energy(&physical).unwrap();
        prop_assert!((pe - (m.energy(&logical).unwrap() - shift)).abs() <= 1e-9);
    }
}

#[test]
fn chain_members_share_edges_evenly() {
    let mut m = coefred::IsingModel::new();
    for k in 1..=8u64 {
        m.add_coupling(Var(0), Var(k), 1.0);
    }
    let (hw, emb) = chain_expand(&m, 4, 11).unwrap();
    for &node in emb.chain(Var(0)).unwrap() {
        let outside = hw
            .edges()
            .iter()
            .filter(|(a, b)| (*a == node) != (*b == node) && (*a == node || *b == node))
            .filter(|(a, b)| !(emb.chain(Var(0)).unwrap().contains(a) && emb.chain(Var(0)).unwrap().contains(b)))
            .count();
        assert_eq!(outside, 2);
    }
}
