use proptest::prelude::*;

use pillowcase::characters::{character, dimension};
use pillowcase::limitshape::{contour_difference, rescaled_contour, sobolev_norm_sq, Contour};
use pillowcase::partitions::{enumerate_partitions, Partition, PartitionFilter, TwoQuotient};
use pillowcase::qseries::{AsymptoticPoly, QSeries};
use pillowcase::volumes::ObservableId;
use pillowcase::weights::{pillowcase_weight, pillowcase_weight_hooks};
use pillowcase::Rational;

fn partition_strategy(max_size: u32) -> impl Strategy<Value = Partition> {
    prop::collection::vec(1u32..=12, 0..12).prop_filter_map("size bound", move |mut parts| {
        parts.sort_unstable_by(|a, b| b.cmp(a));
        let p = Partition::new(parts).ok()?;
        (p.size() <= max_size).then_some(p)
    })
}

fn quotient_strategy(max_size: u32) -> impl Strategy<Value = (Partition, Partition)> {
    (partition_strategy(max_size / 2), partition_strategy(max_size / 2))
}

#[test]
fn balance_criteria_agree_exhaustively() {
    for n in 0..=20 {
        for lambda in enumerate_partitions(n, PartitionFilter::All) {
            let c = lambda.balance_criteria();
            assert!(c.agree(), "{lambda:?}: {c:?}");
            assert_eq!(c.core_empty, lambda.is_balanced());
        }
    }
}

#[test]
fn quotient_facts_exhaustively() {
    for n in 0..=20 {
        for lambda in enumerate_partitions(n, PartitionFilter::All) {
            let q = lambda.two_core_quotient();
            assert_eq!(lambda.size(), q.core.size() + 2 * (q.alpha.size() + q.beta.size()));
            assert_eq!(Partition::from_core_quotient(&q), lambda);
            if !lambda.is_balanced() {
                continue;
            }
            let hooks = lambda.hook_lengths();
            let even: Vec<u32> = hooks.iter().filter(|h| *h % 2 == 0).map(|h| h / 2).collect();
            assert_eq!(2 * even.len(), hooks.len(), "{lambda:?}");
            let mut halves = even;
            halves.sort_unstable();
            let mut quotient_hooks = q.alpha.hook_lengths();
            quotient_hooks.extend(q.beta.hook_lengths());
            quotient_hooks.sort_unstable();
            assert_eq!(halves, quotient_hooks, "{lambda:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn literal_round_trip(lambda in partition_strategy(40)) {
        let text = lambda.to_string();
        prop_assert_eq!(text.parse::<Partition>().unwrap(), lambda);
    }

    #[test]
    fn quotient_round_trip_beyond_exhaustive(lambda in partition_strategy(30)) {
        let q = lambda.two_core_quotient();
        prop_assert_eq!(Partition::from_core_quotient(&q), lambda.clone());
        prop_assert!(lambda.balance_criteria().agree());
        prop_assert_eq!(lambda.conjugate().conjugate(), lambda);
    }

    #[test]
    fn balanced_from_any_quotient((alpha, beta) in quotient_strategy(16)) {
        let lambda = Partition::from_core_quotient(&TwoQuotient::balanced(alpha.clone(), beta.clone()));
        prop_assert!(lambda.is_balanced());
        let back = lambda.two_core_quotient();
        prop_assert_eq!((back.alpha, back.beta), (alpha, beta));
    }

    #[test]
    fn weight_formulas_agree((alpha, beta) in quotient_strategy(12)) {
        let lambda = Partition::from_core_quotient(&TwoQuotient::balanced(alpha, beta));
        prop_assert_eq!(pillowcase_weight(&lambda), pillowcase_weight_hooks(&lambda).unwrap());
    }

    #[test]
    fn weight_is_conjugation_invariant((alpha, beta) in quotient_strategy(12)) {
        let lambda = Partition::from_core_quotient(&TwoQuotient::balanced(alpha, beta));
        prop_assert_eq!(pillowcase_weight(&lambda), pillowcase_weight(&lambda.conjugate()));
    }

    #[test]
    fn identity_character_is_dimension(lambda in partition_strategy(14)) {
        let ones = Partition::all_ones(lambda.size() as usize);
        let chi = character(&lambda, &ones).unwrap();
        prop_assert_eq!(chi, dimension(&lambda).into());
    }

    #[test]
    fn conjugate_character_sign(lambda in partition_strategy(10)) {
        let n = lambda.size() as usize;
        if n >= 2 {
            let rho = Partition::all_ones(n - 2).padded_with_twos(1);
            let a = character(&lambda, &rho).unwrap();
            let b = character(&lambda.conjugate(), &rho).unwrap();
            prop_assert_eq!(a, -b);
        }
    }

    #[test]
    fn sobolev_norm_properties(
        a in partition_strategy(10).prop_filter("non-empty", |p| !p.is_empty()),
        b in partition_strategy(10),
        c in 0.1f64..5.0,
    ) {
        let n = a.size().max(b.size());
        let la = Contour::at_scale(&a, n).unwrap();
        let lb = Contour::at_scale(&b, n).unwrap();
        let f = contour_difference(&la, &lb).unwrap();
        let g = contour_difference(&lb, &la).unwrap();
        let v = sobolev_norm_sq(&f);
        prop_assert!(v >= -1e-12);
        prop_assert_eq!(v.abs() < 1e-12, a == b);
        prop_assert!((sobolev_norm_sq(&g) - v).abs() <= 1e-9 * v.max(1.0));
        let scaled = sobolev_norm_sq(&f.scale_values(c));
        prop_assert!((scaled - c * c * v).abs() <= 1e-9 * (c * c * v).max(1.0));
    }

    #[test]
    fn contours_are_normalized_and_mirrored(lambda in partition_strategy(25).prop_filter("non-empty", |p| !p.is_empty())) {
        let c = rescaled_contour(&lambda).unwrap();
        prop_assert_eq!(c.area(), Rational::from_integer(1.into()));
        let m = rescaled_contour(&lambda.conjugate()).unwrap();
        for k in -30..=30 {
            let u = k as f64 * 0.05;
            prop_assert!((c.value(u) - m.value(-u)).abs() < 1e-12);
            prop_assert!(c.value(u) + 1e-12 >= u.abs());
        }
    }

    #[test]
    fn observable_grammar_round_trip(
        ks in prop::collection::vec(1u32..6, 0..4),
        nu in partition_strategy(6).prop_filter("even size", |p| p.size() % 2 == 0),
    ) {
        let mut text: Vec<String> = ks.iter().map(|k| format!("p{k}")).collect();
        text.push(format!("g[{nu}]"));
        let f: ObservableId = text.join("*").parse().unwrap();
        let again: ObservableId = f.canonical().parse().unwrap();
        prop_assert_eq!(again.hash(), f.hash());
        prop_assert_eq!(again, f);
    }

    #[test]
    fn series_inverse(coeffs in prop::collection::vec(-5i64..5, 1..10)) {
        let mut c: Vec<Rational> = coeffs.iter().map(|&x| Rational::from_integer(x.into())).collect();
        c[0] = Rational::from_integer(1.into());
        let s = QSeries::from_coeffs(c);
        let product = &s * &s.invert().unwrap();
        prop_assert_eq!(product, QSeries::one(s.precision()));
    }

    #[test]
    fn asymptotic_json_round_trip(terms in prop::collection::vec((0u32..8, 0u32..5, -50i64..50, 1i64..60), 0..6)) {
        let p = terms.iter().fold(AsymptoticPoly::zero(), |acc, &(j, k, n, d)| {
            &acc + &AsymptoticPoly::term(j, k, Rational::new(n.into(), d.into()))
        });
        let json = serde_json::to_string(&p.to_json()).unwrap();
        let back = AsymptoticPoly::from_json(&serde_json::from_str(&json).unwrap()).unwrap();
        prop_assert_eq!(back, p);
    }
}
