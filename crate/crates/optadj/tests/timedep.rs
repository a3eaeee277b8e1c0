mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;
use optadj::adjustment::{enumerate_adjustment_sets, VerdictKind};
use optadj::oracle::{falsify_time_dep, DiscreteLaw, Joint, RandomLawSpec};
use optadj::timedep::{
    canonical_time_dep_set, compare_time_dep_sets, enumerate_time_dep, is_valid_time_dep,
    step_graph, Falsification, TimeDepSet, DEFAULT_MAX_CANDIDATES,
};
use optadj::{Error, Query, VertexSet};

fn fig4() -> (optadj::Dag, Query) {
    let g = load("fig4");
    let q = query(&g, &["A0", "A1"], "Y");
    (g, q)
}

fn blocks(g: &optadj::Dag, z0: &[&str], z1: &[&str]) -> TimeDepSet {
    TimeDepSet::from_names(g, &[z0, z1]).unwrap()
}

#[test]
fn fig4_examples() {
    let (g, q) = fig4();
    assert!(is_valid_time_dep(&g, &q, &blocks(&g, &[], &["Q"])).unwrap().sufficient_criterion);
    assert!(is_valid_time_dep(&g, &q, &blocks(&g, &["H"], &[])).unwrap().sufficient_criterion);
    let r = is_valid_time_dep(&g, &q, &blocks(&g, &["R"], &[])).unwrap();
    assert!(!r.sufficient_criterion);
    assert_eq!(r.failing_step, Some(0));
    assert_eq!(r.oracle_falsified, Falsification::NotRequested);
    let r = is_valid_time_dep(&g, &q, &blocks(&g, &[], &[])).unwrap();
    assert_eq!(r.failing_step, Some(1));
}

#[test]
fn fig1_examples() {
    let g = load("fig1");
    let q = query(&g, &["A0", "A1"], "Y");
    let z = blocks(&g, &["L0"], &["L1"]);
    assert!(is_valid_time_dep(&g, &q, &z).unwrap().sufficient_criterion);
    assert!(!is_valid_time_dep(&g, &q, &blocks(&g, &["L0", "L1"], &[])).unwrap().sufficient_criterion);
    assert_eq!(canonical_time_dep_set(&g, &q), blocks(&g, &["L0"], &["L1"]));
}

#[test]
fn malformed_sets_are_rejected() {
    let (g, q) = fig4();
    let one = TimeDepSet::point(set(&g, &["H"]));
    assert!(matches!(is_valid_time_dep(&g, &q, &one), Err(Error::InvalidSet(_))));
    let twice = blocks(&g, &["H"], &["H"]);
    assert!(matches!(is_valid_time_dep(&g, &q, &twice), Err(Error::Overlap(_))));
    let treated = blocks(&g, &["A1"], &[]);
    assert!(matches!(is_valid_time_dep(&g, &q, &treated), Err(Error::Overlap(_))));
}

#[test]
fn canonical_set_is_accepted_on_figures() {
    for (name, treatments) in [("fig1", vec!["A0", "A1"]), ("fig4", vec!["A0", "A1"])] {
        let g = load(name);
        let q = query(&g, &treatments, "Y");
        let c = canonical_time_dep_set(&g, &q);
        assert!(is_valid_time_dep(&g, &q, &c).unwrap().sufficient_criterion, "{name}");
    }
}

#[test]
fn step_graph_cuts_the_current_treatment_and_later_treatment_parents() {
    let (g, q) = fig4();
    let g0 = step_graph(&g, &q, 0);
    let v = |name: &str| g0.vertex(name).unwrap();
    assert!(g0.children(v("A0")).is_empty());
    assert!(g0.parents(v("A1")).is_empty());
    assert!(g0.has_edge(v("A1"), v("Y")));
    let g1 = step_graph(&g, &q, 1);
    assert!(g1.has_edge(v("A0"), v("R")));
    assert!(g1.has_edge(v("H"), v("A1")));
    assert!(g1.children(v("A1")).is_empty());
}

#[test]
fn single_treatment_enumeration_matches_adjustment_sets() {
    for name in POINT_FIGURES {
        let (g, q) = point(name);
        let mut ti: Vec<VertexSet> = enumerate_adjustment_sets(&g, &q, 16).unwrap();
        let mut td: Vec<VertexSet> = enumerate_time_dep(&g, &q, DEFAULT_MAX_CANDIDATES)
            .unwrap()
            .into_iter()
            .map(|z| z.blocks[0].clone())
            .collect();
        ti.sort();
        td.sort();
        assert_eq!(ti, td, "{name}");
    }
}

#[test]
fn enumeration_guard_is_enforced() {
    let (g, q) = fig4();
    assert!(matches!(enumerate_time_dep(&g, &q, 2), Err(Error::GuardExceeded { .. })));
}

#[test]
fn dominance_orders_variances_on_fig4() {
    let (g, q) = fig4();
    let sets = enumerate_time_dep(&g, &q, DEFAULT_MAX_CANDIDATES).unwrap();
    let laws: Vec<DiscreteLaw> = (0..50)
        .map(|s| DiscreteLaw::random(&g, &RandomLawSpec::new(300 + s)).unwrap())
        .collect();
    let joints: Vec<Joint> = laws.iter().map(|l| Joint::new(l).unwrap()).collect();
    let mut pairs = 0;
    for x in &sets {
        for y in &sets {
            if x == y {
                continue;
            }
            let v = compare_time_dep_sets(&g, &q, x, y).unwrap().verdict;
            if !matches!(v, VerdictKind::FirstDominates | VerdictKind::Equivalent) {
                continue;
            }
            pairs += 1;
            for j in &joints {
                let (vx, vy) = (
                    td_variance(j, &q, &[1.0, 1.0], x),
                    td_variance(j, &q, &[1.0, 1.0], y),
                );
                assert!(vx <= vy + 1e-10, "{} vs {}", x.format(&g), y.format(&g));
            }
        }
    }
    assert!(pairs > 10);
}

#[test]
fn equivalent_rows_have_equal_variance() {
    let (g, q) = fig4();
    let x = blocks(&g, &["H"], &["Q"]);
    let y = blocks(&g, &["H"], &["R", "Q"]);
    assert_eq!(compare_time_dep_sets(&g, &q, &x, &y).unwrap().verdict, VerdictKind::Equivalent);
    for seed in 0..20 {
        let law = DiscreteLaw::random(&g, &RandomLawSpec::new(seed)).unwrap();
        let j = Joint::new(&law).unwrap();
        let (vx, vy) = (td_variance(&j, &q, &[1.0, 1.0], &x), td_variance(&j, &q, &[1.0, 1.0], &y));
        assert!((vx - vy).abs() < 1e-10);
    }
}

#[test]
fn comparison_rejects_sets_failing_the_criterion() {
    let (g, q) = fig4();
    let r = compare_time_dep_sets(&g, &q, &blocks(&g, &["R"], &[]), &blocks(&g, &["H"], &[]));
    assert!(matches!(r, Err(Error::InvalidSet(_))));
}

#[test]
fn falsifier_never_contradicts_accepted_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut checked = 0;
    while checked < 40 {
        let g = random_dag(&mut rng, 5, 0.5);
        let [a0, a1, y] = [1, 3, 4];
        let Ok(q) = Query::new(&g, vec![a0, a1], y) else { continue };
        let spec = RandomLawSpec::new(checked as u64);
        for z in enumerate_time_dep(&g, &q, DEFAULT_MAX_CANDIDATES).unwrap() {
            let r = falsify_time_dep(&g, &q, &z, &spec, 5).unwrap();
            assert_eq!(r.oracle_falsified, Falsification::NotFalsified, "{}\n{}", z.format(&g), g.to_text());
        }
        checked += 1;
    }
}

#[test]
fn falsifier_finds_counterexamples_on_fig4() {
    let (g, q) = fig4();
    let spec = RandomLawSpec::new(9);
    let r = falsify_time_dep(&g, &q, &blocks(&g, &[], &[]), &spec, 50).unwrap();
    assert!(matches!(r.oracle_falsified, Falsification::Falsified { .. }));
}
