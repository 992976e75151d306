//! Invariants checked on random inputs.

mod common;

use std::collections::{BTreeMap, HashMap};

use proptest::prelude::*;

use axiomtest::catalog;
use axiomtest::harness::{run_suite, IutAdapter, Verdict};
use axiomtest::observe::{generate_observational, ObservationPlan};
use axiomtest::rewrite::{orient, Fuel, NormalStatus, TriState};
use axiomtest::select::{self, decompose, generate, unify, Hypotheses, TestSuite};
use axiomtest::term::match_term;
use axiomtest::{parse_term, Specification, Term};

fn spec() -> Specification {
    catalog::containers()
}

fn nat() -> impl Strategy<Value = String> {
    (0u8..4).prop_map(|n| n.to_string())
}

fn container_text() -> impl Strategy<Value = String> {
    let leaf = Just("[]".to_string());
    leaf.prop_recursive(5, 24, 2, |inner| {
        prop_oneof![
            (nat(), inner.clone()).prop_map(|(n, c)| format!("{n} :: {c}")),
            (nat(), inner).prop_map(|(n, c)| format!("remove({n}, {c})")),
        ]
    })
}

fn bool_text() -> impl Strategy<Value = String> {
    let base = prop_oneof![
        Just("true".to_string()),
        Just("false".to_string()),
        (nat(), nat()).prop_map(|(a, b)| format!("eq({a}, {b})")),
        (nat(), container_text()).prop_map(|(n, c)| format!("isin({n}, {c})")),
    ];
    base.prop_recursive(2, 8, 1, |inner| inner.prop_map(|b| format!("notb({b})")))
}

fn ground_text() -> impl Strategy<Value = String> {
    prop_oneof![nat(), bool_text(), container_text()]
}

// Terms with variables, for unification.
fn open_container() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![Just("[]".to_string()), Just("c".to_string())];
    leaf.prop_recursive(3, 8, 2, |inner| {
        prop_oneof![
            (prop_oneof![nat(), Just("x".to_string()), Just("y".to_string())], inner.clone())
                .prop_map(|(n, c)| format!("{n} :: {c}")),
            inner.prop_map(|c| format!("succ(x) :: {c}")),
        ]
    })
}

fn hypotheses() -> impl Strategy<Value = Hypotheses> {
    (0usize..=2, 2usize..=7, 1usize..=3, any::<u64>(), any::<bool>()).prop_map(|(d, b, r, seed, random)| Hypotheses {
        unfold_depth: d,
        regularity_bound: b,
        representatives_per_subdomain: r,
        seed,
        strategy: if random {
            select::Strategy::SeededRandom
        } else {
            select::Strategy::ExhaustiveFirst
        },
        ..Hypotheses::default()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn render_parse_round_trip(text in ground_text()) {
        let s = spec();
        let t = parse_term(&text, &s.signature).unwrap();
        prop_assert_eq!(t.to_string(), text.clone());
        prop_assert_eq!(parse_term(&t.to_string(), &s.signature).unwrap(), t);
    }

    #[test]
    fn normal_forms_are_idempotent_constructor_terms(text in ground_text()) {
        let s = spec();
        let crs = orient(&s);
        let t = parse_term(&text, &s.signature).unwrap();
        let (nf, status) = crs.normalize(&t, Fuel::default());
        prop_assert_eq!(status, NormalStatus::Normal);
        prop_assert!(nf.is_constructor_term());
        prop_assert_eq!(nf.sort(), t.sort());
        let (again, _) = crs.normalize(&nf, Fuel::default());
        prop_assert_eq!(again, nf.clone());
        let v = common::eval(&t, &HashMap::new());
        prop_assert_eq!(nf.to_string(), v.render());
    }

    #[test]
    fn holds_is_reflexive_and_symmetric(a in ground_text(), b in ground_text()) {
        let s = spec();
        let crs = orient(&s);
        let ta = parse_term(&a, &s.signature).unwrap();
        let tb = parse_term(&b, &s.signature).unwrap();
        let refl = axiomtest::Equation::new(ta.clone(), ta.clone()).unwrap();
        prop_assert_eq!(crs.holds(&refl, Fuel::default()), TriState::Holds);
        if let Ok(e) = axiomtest::Equation::new(ta, tb) {
            prop_assert_eq!(crs.holds(&e, Fuel::default()), crs.holds(&e.swapped(), Fuel::default()));
        }
    }

    #[test]
    fn unifiers_unify(a in open_container(), b in open_container()) {
        let s = spec();
        let ta = parse_term(&a, &s.signature).unwrap();
        let tb = parse_term(&b, &s.signature).unwrap();
        if let Some(theta) = unify(&ta, &tb) {
            prop_assert_eq!(ta.apply(&theta), tb.apply(&theta));
        }
        // a term unifies with any of its instances
        let ground = ta.apply(&[("c", "0 :: []"), ("x", "2"), ("y", "1")]
            .iter()
            .filter_map(|(v, t)| Some((s.signature.var(v)?.clone(), parse_term(t, &s.signature).ok()?)))
            .collect());
        prop_assert!(unify(&ta, &ground).is_some());
        prop_assert!(match_term(&ta, &ground).is_some());
    }

    #[test]
    fn reference_passes_every_generated_suite(hyp in hypotheses()) {
        let s = spec();
        let suite = generate(&s, &hyp).unwrap();
        let report = run_suite(&IutAdapter::reference(&s), &s.signature, &suite, 2).unwrap();
        prop_assert!(report.summary.all_pass, "{:?}", report.failures().map(|r| r.test.to_string()).collect::<Vec<_>>());
    }

    #[test]
    fn generation_is_deterministic(hyp in hypotheses()) {
        let s = spec();
        prop_assert_eq!(generate(&s, &hyp).unwrap().to_json(), generate(&s, &hyp).unwrap().to_json());
    }

    #[test]
    fn suites_survive_json(hyp in hypotheses()) {
        let s = spec();
        let suite = generate(&s, &hyp).unwrap();
        let back = TestSuite::from_json(&suite.to_json(), &s).unwrap();
        prop_assert_eq!(back, suite);
    }

    #[test]
    fn generated_tests_lie_in_their_subdomain(hyp in hypotheses()) {
        let s = spec();
        let crs = orient(&s);
        let dec = decompose(&s, &hyp);
        let suite = generate(&s, &hyp).unwrap();
        for t in &suite.tests {
            let d = dec.leaves.iter().find(|d| d.id == t.subdomain_id).unwrap();
            prop_assert!(d.admits(&crs, &t.equation, hyp.fuel), "{}", t);
            prop_assert!(t.equation.is_ground());
            for p in &t.premises {
                prop_assert_eq!(crs.holds(p, hyp.fuel), TriState::Holds);
            }
        }
    }

    #[test]
    fn report_does_not_depend_on_order_or_workers(hyp in hypotheses(), jobs in 1usize..5, rot in 0usize..50, m in 0usize..6) {
        let s = spec();
        let suite = generate(&s, &hyp).unwrap();
        let adapter = IutAdapter::mutant(&s, &format!("M{m}")).unwrap();
        let one = run_suite(&adapter, &s.signature, &suite, 1).unwrap();
        let many = run_suite(&adapter, &s.signature, &suite, jobs).unwrap();
        prop_assert_eq!(one.to_json(false), many.to_json(false));
        let mut permuted = suite.clone();
        if !permuted.tests.is_empty() {
            let k = rot % permuted.tests.len();
            permuted.tests.rotate_left(k);
            permuted.tests.reverse();
        }
        let p = run_suite(&adapter, &s.signature, &permuted, jobs).unwrap();
        let by_id = |r: &axiomtest::harness::RunReport| -> BTreeMap<String, Verdict> {
            r.results.iter().map(|x| (x.test.id.clone(), x.verdict.clone())).collect()
        };
        prop_assert_eq!(by_id(&one), by_id(&p));
        prop_assert_eq!(one.summary, p.summary);
        let s = one.summary;
        prop_assert_eq!(s.pass + s.fail + s.error + s.inconclusive, s.total);
    }

    #[test]
    fn observational_suites_are_observable(hyp in hypotheses(), depth in 1usize..=5, per in 1usize..=4) {
        let s = spec();
        let plan = ObservationPlan { context_depth: depth, contexts_per_test: per, parameter_bound: 3 };
        let suite = generate_observational(&s, &hyp, &plan).unwrap();
        let plain = generate(&s, &hyp).unwrap();
        for t in &suite.tests {
            prop_assert!(s.signature.is_observable(t.sort()), "{}", t);
            // premises are discharged as generated, never wrapped
            let base = t.id.split('@').next().unwrap();
            let orig = plain.tests.iter().find(|o| o.id == base).unwrap();
            prop_assert_eq!(&t.premises, &orig.premises);
            let hole_free = |e: &axiomtest::Equation| !format!("{e}").contains('z');
            prop_assert!(t.premises.iter().all(hole_free));
            prop_assert_eq!(t.applied_context.is_some(), !s.signature.is_observable(orig.sort()));
        }
        let report = run_suite(&IutAdapter::reference(&s), &s.signature, &suite, 1).unwrap();
        prop_assert!(report.summary.all_pass);
    }
}

#[test]
fn equal_terms_from_both_strategies() {
    // the reversed strategy reaches the same normal form on random-looking terms
    let s = spec();
    let crs = orient(&s);
    for g in common::ground_up_to("Container", 8, true) {
        let t: Term = parse_term(&g.text, &s.signature).unwrap();
        let (a, _) = crs.normalize_with(&t, Fuel::default(), axiomtest::rewrite::RewriteStrategy::Leftmost);
        let (b, _) = crs.normalize_with(&t, Fuel::default(), axiomtest::rewrite::RewriteStrategy::Rightmost);
        assert_eq!(a, b);
    }
}
