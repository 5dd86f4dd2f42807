use std::collections::BTreeMap;

use proptest::prelude::*;
use torbun_core::document::{emit, parse, Document};
use torbun_core::{
    apply_gauge, equivalent, ivec, projective_plane, weight_invariants, AdmissibleCollection, BigInt, Equivalence,
    GaugeWitness, GroupTag, QMatrix, Rational, TorusHom,
};

fn q(rows: [[i64; 2]; 2]) -> QMatrix {
    QMatrix::from_i64(&[&rows[0], &rows[1]])
}

fn invertible() -> impl Strategy<Value = QMatrix> {
    prop::array::uniform2(prop::array::uniform2(-3i64..=3))
        .prop_map(q)
        .prop_filter("invertible", QMatrix::is_invertible)
}

/// `O(a) ⊕ O(b)` on P² with the standard Cartier data, P ≡ 1.
fn split_p2(a: i64, b: i64) -> AdmissibleCollection {
    let fan = projective_plane();
    let m = fan.maximal().to_vec();
    let support = |k: i64| [ivec(&[0, 0]), ivec(&[k, 0]), ivec(&[0, k])];
    let (ua, ub) = (support(a), support(b));
    let rho = (0..3)
        .map(|i| (m[i], TorusHom::diagonal(vec![ua[i].clone(), ub[i].clone()], 2)))
        .collect();
    let p = m
        .iter()
        .flat_map(|&t| m.iter().map(move |&s| ((t, s), QMatrix::identity(2))))
        .collect();
    AdmissibleCollection::new(fan, GroupTag::GeneralLinear(2), rho, p).unwrap()
}

fn gauge_on(c: &AdmissibleCollection, gs: [QMatrix; 3]) -> GaugeWitness {
    GaugeWitness {
        g: c.maximal().iter().copied().zip(gs).collect(),
    }
}

fn witness(a: &AdmissibleCollection, b: &AdmissibleCollection) -> GaugeWitness {
    match equivalent(a, b).unwrap() {
        Equivalence::Equivalent(w) => w,
        other => panic!("expected a witness, got {other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn equivalence_is_an_equivalence_relation(
        a in -2i64..=2,
        b in -2i64..=2,
        g1 in prop::array::uniform3(invertible()),
        g2 in prop::array::uniform3(invertible()),
    ) {
        let c0 = split_p2(a, b);
        let c1 = apply_gauge(&c0, &gauge_on(&c0, g1)).unwrap();
        let c2 = apply_gauge(&c1, &gauge_on(&c1, g2)).unwrap();

        prop_assert_eq!(apply_gauge(&c1, &witness(&c1, &c1)).unwrap(), c1.clone());
        let w01 = witness(&c0, &c1);
        prop_assert_eq!(apply_gauge(&c1, &w01.inverse().unwrap()).unwrap(), c0.clone());
        let w12 = witness(&c1, &c2);
        prop_assert_eq!(apply_gauge(&c0, &w01.compose(&w12).unwrap()).unwrap(), c2.clone());
        prop_assert_eq!(weight_invariants(&c2), weight_invariants(&c0));
    }

    #[test]
    fn different_twists_are_separated(a in -2i64..=2, b in -2i64..=2, g in prop::array::uniform3(invertible())) {
        let c = split_p2(a, b);
        let d = apply_gauge(&split_p2(a + 1, b), &gauge_on(&c, g)).unwrap();
        prop_assert!(!matches!(equivalent(&c, &d).unwrap(), Equivalence::Equivalent(_)));
    }

    #[test]
    fn gauged_collections_survive_the_file_format(
        a in -2i64..=2,
        g in prop::array::uniform3(invertible()),
    ) {
        let c0 = split_p2(a, 0);
        let c = apply_gauge(&c0, &gauge_on(&c0, g)).unwrap();
        let doc = Document {
            fan: c.fan().clone(),
            group: c.group(),
            collections: BTreeMap::from([("c".to_string(), c.clone())]),
        };
        let text = emit(&doc).unwrap();
        let back = parse(&text).unwrap();
        prop_assert_eq!(&back.collections["c"], &c);
        prop_assert_eq!(emit(&back).unwrap(), text);
    }
}

#[test]
fn rational_gauge_entries_are_exact() {
    let c0 = split_p2(1, -1);
    let third = Rational::new(BigInt::from(1), BigInt::from(3));
    let g = QMatrix::from_rows(vec![
        vec![third.clone(), Rational::from_integer(BigInt::from(2))],
        vec![Rational::from_integer(BigInt::from(0)), third],
    ])
    .unwrap();
    let w = gauge_on(&c0, [g.clone(), QMatrix::identity(2), g]);
    let c1 = apply_gauge(&c0, &w).unwrap();
    assert!(c1.validate().ok);
    let found = witness(&c0, &c1);
    assert_eq!(apply_gauge(&c0, &found).unwrap(), c1);
}
