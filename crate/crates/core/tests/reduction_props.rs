mod common;

use coefred::model::{ground_states_marginal, DEFAULT_ENUMERATION_CAP};
use coefred::reduction::{bce_decode, bce_encode, iem_reduce, perturbed_penalty, LinearConstraint};
use coefred::{ground_states, SpinAssignment, Var};
use common::arb_ising;
use proptest::prelude::*;
use std::collections::BTreeMap;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn iem_preserves_projected_ground_states(m in arb_ising(6, 5.0, 10.0), bound in 1.0..4.0f64) {
        let r = iem_reduce(&m, bound).unwrap();
        prop_assert!(r.model.max_abs_coupling() <= bound + 1e-12);
        let keep = r.original_variables();
        let projected = ground_states_marginal(&r.model, &keep, DEFAULT_ENUMERATION_CAP).unwrap();
        prop_assert_eq!(projected.states, ground_states(&m).unwrap().states);
    }

    #[test]
    fn bce_sums_and_bounds(lower in -50i64..50, d in 1i64..300, pick in 0.0..1.0f64) {
        let mu = 1 + (pick * (d - 1) as f64) as i64;
        let enc = bce_encode(lower, lower + d, mu).unwrap();
        prop_assert_eq!(enc.coefficients.iter().sum::<i64>(), d);
        prop_assert!(enc.coefficients.iter().all(|&a| a > 0 && a <= mu));
        prop_assert!(bce_encode(lower, lower + d, d + 1).is_err());
    }

    #[test]
    fn bce_bits_for_round_trips(d in 1i64..120, mu in 1i64..40, pick in 0.0..1.0f64) {
        let enc = bce_encode(0, d, mu.min(d)).unwrap();
        let value = (pick * d as f64).round() as i64;
        let bits = enc.bits_for(value).unwrap();
        prop_assert_eq!(bce_decode(&enc, &bits).unwrap(), value);
    }

    #[test]
    fn perturbed_penalty_is_shifted_square(lambda in 0.1..10.0f64, eps in -0.5..0.5f64, bits in prop::collection::vec(0u8..=1, 4)) {
        let g = LinearConstraint::one_hot((0..4).map(Var)).unwrap();
        let q = perturbed_penalty(&g, lambda, eps).unwrap();
        let map: BTreeMap<Var, u8> = bits.iter().enumerate().map(|(i, &b)| (Var(i as u64), b)).collect();
        let gv = g.evaluate(&SpinAssignment::from_bits(&map)).unwrap();
        let expect = lambda * gv * gv - 2.0 * lambda * eps * gv;
        prop_assert!((q.energy(&map).unwrap() - expect).abs() < 1e-9);
    }
}
