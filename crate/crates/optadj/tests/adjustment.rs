mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;
use optadj::adjustment::{
    causal_nodes, compare_adjustment_sets, enumerate_adjustment_sets, forbidden,
    is_minimal_adjustment, is_valid_adjustment, minimal_subset, optimal_minimal_set, optimal_set,
    prune_adjustment, Reason, VerdictKind, DEFAULT_MAX_CANDIDATES,
};
use optadj::oracle::{interventional_mean, outcome_regression, search_witness, Joint, RandomLawSpec};
use optadj::{Dag, Error, Query, VertexSet};

/// `E[b(Z)]` with `b(Z) = E[Y | A=1, Z]`, against the interventional mean.
fn adjustment_gap(j: &Joint, q: &Query, z: &VertexSet) -> f64 {
    let chi = interventional_mean(j.law(), q, &[1.0]).unwrap();
    let b = outcome_regression(j, q, &[1.0], z).unwrap();
    (j.expect(&b) - chi).abs()
}

#[test]
fn fig3_examples() {
    let (g, q) = point("fig3");
    assert_eq!(causal_nodes(&g, &q), set(&g, &["Y"]));
    assert_eq!(forbidden(&g, &q), set(&g, &["A", "Y"]));
    assert_eq!(optimal_set(&g, &q).unwrap(), set(&g, &["O1", "O2"]));
    assert_eq!(optimal_minimal_set(&g, &q).unwrap(), set(&g, &["O1", "O2"]));
    let r = is_minimal_adjustment(&g, &q, &set(&g, &["O1", "W2"])).unwrap();
    assert!(r.valid && r.minimal);
    let r = is_valid_adjustment(&g, &q, &set(&g, &["O1"])).unwrap();
    assert!(!r.valid);
    assert!(matches!(r.reason, Reason::OpenPath { .. }));
    let r = is_minimal_adjustment(&g, &q, &set(&g, &["O1", "O2", "W1"])).unwrap();
    assert!(r.valid && !r.minimal);
    assert!(matches!(r.reason, Reason::Removable { .. }));
}

#[test]
fn forbidden_vertices_are_reported() {
    let (g, q) = point("fig7");
    let r = is_valid_adjustment(&g, &q, &set(&g, &["M"])).unwrap();
    assert_eq!(r.reason, Reason::Forbidden { vertex: "M".into() });
    assert!(matches!(
        is_valid_adjustment(&g, &q, &set(&g, &["A"])),
        Err(Error::Overlap(_))
    ));
}

#[test]
fn optimal_set_fails_without_a_time_independent_set() {
    let g = load("fig1");
    let q = query(&g, &["A0", "A1"], "Y");
    assert!(matches!(optimal_set(&g, &q), Err(Error::NoAdjustmentSet)));
    assert!(enumerate_adjustment_sets(&g, &q, DEFAULT_MAX_CANDIDATES).unwrap().is_empty());
}

#[test]
fn valid_sets_identify_the_interventional_mean() {
    for name in ["fig2", "fig3", "fig6", "fig8", "fig9"] {
        let (g, q) = point(name);
        let sets = enumerate_adjustment_sets(&g, &q, DEFAULT_MAX_CANDIDATES).unwrap();
        assert!(!sets.is_empty(), "{name}");
        for seed in 0..10 {
            let law = optadj::oracle::DiscreteLaw::random(&g, &RandomLawSpec::new(seed)).unwrap();
            let j = Joint::new(&law).unwrap();
            for z in &sets {
                assert!(adjustment_gap(&j, &q, z) < 1e-10, "{name} {}", g.format_set(z));
            }
        }
    }
}

#[test]
fn invalid_sets_have_witness_laws() {
    for name in ["fig3", "fig6", "fig8"] {
        let (g, q) = point(name);
        let pool = g.all().difference(&forbidden(&g, &q));
        for z in subsets(&pool) {
            if is_valid_adjustment(&g, &q, &z).unwrap().valid {
                continue;
            }
            let hit = search_witness(&g, &RandomLawSpec::new(7), 50, |law| {
                Ok(adjustment_gap(&Joint::new(law)?, &q, &z) > 1e-6)
            })
            .unwrap();
            assert!(hit.is_some(), "{name} {}", g.format_set(&z));
        }
    }
}

#[test]
fn minimality_matches_brute_force() {
    for name in POINT_FIGURES {
        let (g, q) = point(name);
        let valid = enumerate_adjustment_sets(&g, &q, DEFAULT_MAX_CANDIDATES).unwrap();
        for z in &valid {
            let brute = !valid.iter().any(|s| s != z && s.is_subset(z));
            let single = is_minimal_adjustment(&g, &q, z).unwrap().minimal;
            assert_eq!(brute, single, "{name} {}", g.format_set(z));
        }
    }
}

#[test]
fn minimal_optimal_set_is_order_invariant() {
    for name in POINT_FIGURES {
        let (g, q) = point(name);
        let o = optimal_set(&g, &q).unwrap();
        let reference = optimal_minimal_set(&g, &q).unwrap();
        let mut order = o.to_vec();
        for _ in 0..order.len() {
            order.rotate_left(1);
            let a = q.point().unwrap();
            assert_eq!(minimal_subset(&g, a, &o, &order), reference, "{name}");
            let mut rev = order.clone();
            rev.reverse();
            assert_eq!(minimal_subset(&g, a, &o, &rev), reference, "{name}");
        }
    }
}

#[test]
fn optimal_set_dominates_every_valid_set() {
    for name in POINT_FIGURES {
        let (g, q) = point(name);
        let o = optimal_set(&g, &q).unwrap();
        for z in enumerate_adjustment_sets(&g, &q, DEFAULT_MAX_CANDIDATES).unwrap() {
            let v = compare_adjustment_sets(&g, &q, &o, &z).unwrap().verdict;
            assert!(
                matches!(v, VerdictKind::FirstDominates | VerdictKind::Equivalent),
                "{name} {}: {v:?}",
                g.format_set(&z)
            );
        }
    }
}

#[test]
fn graphical_dominance_orders_variances() {
    for name in ["fig3", "fig6", "fig9"] {
        let (g, q) = point(name);
        let sets = enumerate_adjustment_sets(&g, &q, DEFAULT_MAX_CANDIDATES).unwrap();
        let laws: Vec<_> = (0..5)
            .map(|s| optadj::oracle::DiscreteLaw::random(&g, &RandomLawSpec::new(100 + s)).unwrap())
            .collect();
        let joints: Vec<_> = laws.iter().map(|l| Joint::new(l).unwrap()).collect();
        for x in &sets {
            for y in &sets {
                if compare_adjustment_sets(&g, &q, x, y).unwrap().verdict != VerdictKind::FirstDominates {
                    continue;
                }
                for j in &joints {
                    let (vx, vy) = (ti_variance(j, &q, 1.0, x), ti_variance(j, &q, 1.0, y));
                    assert!(vx <= vy + 1e-10, "{name} {} vs {}", g.format_set(x), g.format_set(y));
                }
            }
        }
    }
}

#[test]
fn comparison_rejects_invalid_sets() {
    let (g, q) = point("fig3");
    let r = compare_adjustment_sets(&g, &q, &set(&g, &["O1"]), &set(&g, &["O1", "O2"]));
    assert!(matches!(r, Err(Error::InvalidSet(_))));
}

#[test]
fn pruned_sets_stay_valid_and_dominate() {
    for name in POINT_FIGURES {
        let (g, q) = point(name);
        for z in enumerate_adjustment_sets(&g, &q, DEFAULT_MAX_CANDIDATES).unwrap() {
            let p = prune_adjustment(&g, &q, &z).unwrap();
            assert!(p.is_subset(&z));
            assert!(is_valid_adjustment(&g, &q, &p).unwrap().valid, "{name}");
            let v = compare_adjustment_sets(&g, &q, &p, &z).unwrap().verdict;
            assert!(matches!(v, VerdictKind::FirstDominates | VerdictKind::Equivalent));
        }
    }
    let (g, q) = point("fig3");
    let z = set(&g, &["O1", "O2", "W1", "W2"]);
    assert_eq!(prune_adjustment(&g, &q, &z).unwrap(), set(&g, &["O1", "O2"]));
}

fn random_point_query(g: &Dag) -> Option<Query> {
    let n = g.len();
    let y = n - 1;
    let a = (0..y).rev().find(|&a| g.ancestors(&VertexSet::singleton(y)).contains(a))?;
    Query::new(g, vec![a], y).ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn optimal_set_is_valid_and_dominant(seed in any::<u64>(), n in 3usize..8, density in 0.2..0.7f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_dag(&mut rng, n, density);
        let Some(q) = random_point_query(&g) else { return Ok(()) };
        let o = optimal_set(&g, &q).unwrap();
        prop_assert!(is_valid_adjustment(&g, &q, &o).unwrap().valid);
        let om = optimal_minimal_set(&g, &q).unwrap();
        prop_assert!(om.is_subset(&o));
        prop_assert!(is_valid_adjustment(&g, &q, &om).unwrap().valid);
        for z in enumerate_adjustment_sets(&g, &q, DEFAULT_MAX_CANDIDATES).unwrap() {
            prop_assert!(z.intersection(&forbidden(&g, &q)).is_empty());
            let v = compare_adjustment_sets(&g, &q, &o, &z).unwrap().verdict;
            prop_assert!(matches!(v, VerdictKind::FirstDominates | VerdictKind::Equivalent));
        }
    }
}
