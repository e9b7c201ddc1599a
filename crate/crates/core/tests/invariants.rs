use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use subjaccard::cli::{spec_digest, FunctionSpecFile};
use subjaccard::setfun::{is_submodular_pairwise, random_monotone_function};
use subjaccard::{
    jaccard_distance, jaccard_index, sub_jaccard_cap, sub_jaccard_delta, sub_jaccard_index, Family,
    GroundSet, RandomMode, SetFunctionSpec, SubsetMask, Tolerance, Value,
};

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Weighted modular specs with small fractional weights, plus two masks.
fn modular_case() -> impl Strategy<Value = (SetFunctionSpec, u64, u64)> {
    (1usize..=6).prop_flat_map(|n| {
        (
            0i64..5,
            prop::collection::vec((0i64..20, 1i64..5), n),
            0u64..1 << n,
            0u64..1 << n,
        )
            .prop_map(move |(gamma, weights, a, b)| {
                let g = GroundSet::numbered(n).unwrap();
                let weights = weights.into_iter().map(|(p, d)| q(p, d)).collect();
                let spec = SetFunctionSpec::new(
                    g,
                    Family::WeightedModular {
                        gamma: q(gamma, 1),
                        weights,
                    },
                )
                .unwrap();
                (spec, a, b)
            })
    })
}

/// Submodular, non-modular budgeted specs.
fn budgeted_case() -> impl Strategy<Value = (SetFunctionSpec, u64, u64, u64)> {
    (1usize..=6).prop_flat_map(|n| {
        (
            1i64..15,
            prop::collection::vec(0i64..6, n),
            0u64..1 << n,
            0u64..1 << n,
            0u64..1 << n,
        )
            .prop_map(move |(budget, weights, a, b, c)| {
                let g = GroundSet::numbered(n).unwrap();
                let weights = weights.into_iter().map(|w| q(w, 1)).collect();
                let spec = SetFunctionSpec::new(
                    g,
                    Family::BudgetedLinear {
                        budget: q(budget, 1),
                        weights,
                    },
                )
                .unwrap();
                (spec, a, b, c)
            })
    })
}

fn masks(spec: &SetFunctionSpec, bits: &[u64]) -> Vec<SubsetMask> {
    bits.iter()
        .map(|&b| SubsetMask::from_bits(spec.ground(), b).unwrap())
        .collect()
}

proptest! {
    #[test]
    fn distances_are_symmetric_and_vanish_on_the_diagonal((spec, a, b, _) in budgeted_case()) {
        let m = masks(&spec, &[a, b]);
        prop_assert_eq!(sub_jaccard_cap(&spec, &m[0], &m[1]).unwrap(), sub_jaccard_cap(&spec, &m[1], &m[0]).unwrap());
        prop_assert_eq!(sub_jaccard_delta(&spec, &m[0], &m[1]).unwrap(), sub_jaccard_delta(&spec, &m[1], &m[0]).unwrap());
        prop_assert_eq!(sub_jaccard_cap(&spec, &m[0], &m[0]).unwrap(), Value::int(0));
        prop_assert_eq!(sub_jaccard_delta(&spec, &m[0], &m[0]).unwrap(), Value::int(0));
    }

    #[test]
    fn cap_never_exceeds_delta((spec, a, b, _) in budgeted_case()) {
        let m = masks(&spec, &[a, b]);
        let cap = sub_jaccard_cap(&spec, &m[0], &m[1]).unwrap();
        let delta = sub_jaccard_delta(&spec, &m[0], &m[1]).unwrap();
        let tol = Tolerance::default();
        prop_assert!(cap.compare(&Value::int(0), tol).unwrap().is_ge());
        prop_assert!(cap.compare(&delta, tol).unwrap().is_le(), "{} > {}", cap, delta);
        prop_assert!(delta.compare(&Value::int(1), tol).unwrap().is_le());
    }

    #[test]
    fn delta_triangle_on_budgeted_functions((spec, a, b, c) in budgeted_case()) {
        let m = masks(&spec, &[a, b, c]);
        let d = |x: &SubsetMask, y: &SubsetMask| sub_jaccard_delta(&spec, x, y).unwrap();
        let rhs = d(&m[0], &m[2]).checked_add(&d(&m[2], &m[1])).unwrap();
        prop_assert!(d(&m[0], &m[1]).compare(&rhs, Tolerance::default()).unwrap().is_le());
    }

    #[test]
    fn modular_distances_coincide((spec, a, b) in modular_case()) {
        let m = masks(&spec, &[a, b]);
        prop_assert_eq!(sub_jaccard_cap(&spec, &m[0], &m[1]).unwrap(), sub_jaccard_delta(&spec, &m[0], &m[1]).unwrap());
    }

    #[test]
    fn index_complements_delta((spec, a, b, _) in budgeted_case()) {
        let m = masks(&spec, &[a, b]);
        let one_minus = Value::int(1).checked_sub(&sub_jaccard_delta(&spec, &m[0], &m[1]).unwrap()).unwrap();
        prop_assert_eq!(sub_jaccard_index(&spec, &m[0], &m[1]).unwrap(), one_minus);
    }

    #[test]
    fn set_identities(n in 1usize..=64, a in any::<u64>(), b in any::<u64>()) {
        let g = GroundSet::numbered(n).unwrap();
        let mask = if n == 64 { u64::MAX } else { (1 << n) - 1 };
        let (sa, sb) = (SubsetMask::from_bits(&g, a & mask).unwrap(), SubsetMask::from_bits(&g, b & mask).unwrap());
        let (u, i, s) = (sa.union(&sb).unwrap(), sa.intersection(&sb).unwrap(), sa.sym_difference(&sb).unwrap());
        prop_assert_eq!(s.len(), u.len() - i.len());
        prop_assert_eq!(sa.complement().complement(), sa.clone());
        prop_assert!(i.is_subset(&sa).unwrap() && sa.is_subset(&u).unwrap());
        let index = jaccard_index(&sa, &sb).unwrap();
        prop_assert_eq!(Value::int(1).checked_sub(&index).unwrap(), jaccard_distance(&sa, &sb).unwrap());
    }

    #[test]
    fn spec_files_round_trip((spec, _, _) in modular_case()) {
        let text = FunctionSpecFile::from_spec(&spec).to_json();
        let again = FunctionSpecFile::parse(&text).unwrap().to_spec(Tolerance::default()).unwrap();
        prop_assert_eq!(spec_digest(&spec), spec_digest(&again));
        prop_assert_eq!(&spec, &again);
    }

    #[test]
    fn random_tables_round_trip(n in 1usize..=4, seed in any::<u64>()) {
        let g = GroundSet::numbered(n).unwrap();
        let spec = random_monotone_function(&g, seed, RandomMode::Free).unwrap();
        let again = FunctionSpecFile::parse(&FunctionSpecFile::from_spec(&spec).to_json())
            .unwrap()
            .to_spec(Tolerance::default())
            .unwrap();
        prop_assert_eq!(spec_digest(&spec), spec_digest(&again));
        prop_assert_eq!(
            is_submodular_pairwise(&spec).unwrap().verdict,
            is_submodular_pairwise(&again).unwrap().verdict
        );
    }

    #[test]
    fn values_print_and_parse_back(p in -1000i64..1000, d in 1i64..1000, x in -1e12f64..1e12) {
        let exact = Value::Exact(q(p, d));
        prop_assert_eq!(exact.to_string().parse::<Value>().unwrap(), exact);
        let approx = Value::Approx(x);
        prop_assert_eq!(approx.to_string().parse::<Value>().unwrap(), approx);
    }
}

#[test]
fn ground_sets_compare_by_labels() {
    let g1 = GroundSet::new(["a", "b"]).unwrap();
    let g2 = GroundSet::new(["a", "b"]).unwrap();
    let a = SubsetMask::from_labels(&g1, ["a"]).unwrap();
    let b = SubsetMask::from_labels(&g2, ["b"]).unwrap();
    assert_eq!(a.union(&b).unwrap().bits(), 0b11);
    let other = GroundSet::new(["a", "c"]).unwrap();
    assert!(a.union(&SubsetMask::full(&other)).is_err());
    assert!(Arc::ptr_eq(a.ground(), &g1));
}
