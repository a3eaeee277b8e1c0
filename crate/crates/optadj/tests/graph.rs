mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;
use optadj::{Dag, Error, VertexSet};

fn arb_dag(max: usize) -> impl Strategy<Value = Dag> {
    (2..=max, 0.0..0.8f64, any::<u64>()).prop_map(|(n, density, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_dag(&mut rng, n, density)
    })
}

/// A graph with two distinct vertices and a conditioning set avoiding both.
fn arb_query(max: usize) -> impl Strategy<Value = (Dag, usize, usize, VertexSet)> {
    arb_dag(max).prop_flat_map(|g| {
        let n = g.len();
        (Just(g), 0..n, 0..n - 1, proptest::collection::vec(any::<bool>(), n)).prop_map(
            |(g, x, y, mask)| {
                let y = if y >= x { y + 1 } else { y };
                let z = (0..g.len()).filter(|&v| v != x && v != y && mask[v]).collect();
                (g, x, y, z)
            },
        )
    })
}

fn reach(g: &Dag, from: usize, to: usize) -> bool {
    let mut stack = vec![from];
    let mut seen = vec![false; g.len()];
    while let Some(v) = stack.pop() {
        if v == to {
            return true;
        }
        for &c in g.children(v) {
            if !seen[c] {
                seen[c] = true;
                stack.push(c);
            }
        }
    }
    false
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn dsep_matches_path_enumeration((g, x, y, z) in arb_query(9)) {
        let fast = g.d_separated(&VertexSet::singleton(x), &VertexSet::singleton(y), &z).unwrap();
        prop_assert_eq!(fast, dsep_by_paths(&g, x, y, &z));
    }

    #[test]
    fn dsep_is_symmetric((g, x, y, z) in arb_query(9)) {
        let (sx, sy) = (VertexSet::singleton(x), VertexSet::singleton(y));
        prop_assert_eq!(g.d_separated(&sx, &sy, &z).unwrap(), g.d_separated(&sy, &sx, &z).unwrap());
    }

    #[test]
    fn topological_sort_respects_edges(g in arb_dag(10), mask in proptest::collection::vec(any::<bool>(), 10)) {
        let subset: VertexSet = (0..g.len()).filter(|&v| mask[v]).collect();
        let order = g.topological_sort(&subset);
        prop_assert_eq!(order.iter().copied().collect::<VertexSet>(), subset);
        let pos = |v: usize| order.iter().position(|&u| u == v);
        for (t, h) in g.edges() {
            if let (Some(i), Some(j)) = (pos(t), pos(h)) {
                prop_assert!(i < j);
            }
        }
        for (i, &u) in order.iter().enumerate() {
            for &v in &order[i + 1..] {
                prop_assert!(!reach(&g, v, u));
            }
        }
    }

    #[test]
    fn ancestry_matches_reachability(g in arb_dag(10)) {
        for v in 0..g.len() {
            let an = g.ancestors(&VertexSet::singleton(v));
            let de = g.descendants(&VertexSet::singleton(v));
            for u in 0..g.len() {
                prop_assert_eq!(an.contains(u), reach(&g, u, v));
                prop_assert_eq!(de.contains(u), reach(&g, v, u));
            }
            prop_assert_eq!(g.ancestors(&an), an);
            prop_assert_eq!(g.non_descendants(&VertexSet::singleton(v)), g.all().difference(&de));
        }
    }

    #[test]
    fn exogenize_rewires_single_child_vertices(g in arb_dag(8)) {
        for u in 0..g.len() {
            if g.children(u).len() != 1 {
                prop_assert!(g.exogenize(u).is_err());
                continue;
            }
            let child = g.name(g.children(u)[0]).to_string();
            let h = g.exogenize(u).unwrap();
            prop_assert_eq!(h.len(), g.len() - 1);
            prop_assert!(h.vertex(g.name(u)).is_err());
            for &p in g.parents(u) {
                prop_assert!(h.has_edge(h.vertex(g.name(p)).unwrap(), h.vertex(&child).unwrap()));
            }
            for (t, hd) in g.edges() {
                if t != u && hd != u {
                    prop_assert!(h.has_edge(h.vertex(g.name(t)).unwrap(), h.vertex(g.name(hd)).unwrap()));
                }
            }
        }
    }

    #[test]
    fn text_format_round_trips(g in arb_dag(10)) {
        prop_assert_eq!(Dag::parse(&g.to_text()).unwrap(), g);
    }
}

#[test]
fn figure_files_parse() {
    let sizes = [
        ("fig1", 6, 9),
        ("fig2", 4, 4),
        ("fig3", 6, 7),
        ("fig4", 6, 6),
        ("fig5", 5, 5),
        ("fig6", 4, 5),
        ("fig7", 3, 2),
        ("fig8", 4, 4),
        ("fig9", 7, 12),
        ("fig10", 13, 36),
        ("fig11", 6, 8),
    ];
    for (name, vertices, edges) in sizes {
        let g = load(name);
        assert_eq!((g.len(), g.edge_count()), (vertices, edges), "{name}");
    }
}

#[test]
fn parse_examples() {
    let g = Dag::parse("node A\nnode Y\nedge A Y").unwrap();
    assert_eq!(g.names(), ["A", "Y"]);
    assert!(g.has_edge(0, 1));
    assert!(matches!(Dag::parse("edge A Y\nedge Y A"), Err(Error::Cycle(_))));
}

#[test]
fn topological_examples() {
    let g = load("fig7");
    assert_eq!(g.topological_sort(&g.all()), set(&g, &["A", "M", "Y"]).to_vec());
    assert!(g.topological_sort(&VertexSet::new()).is_empty());
}

#[test]
fn ancestry_examples() {
    let g = load("fig7");
    assert_eq!(g.descendants(&set(&g, &["A"])), g.all());
    let g = load("fig3");
    assert_eq!(g.ancestors(&set(&g, &["Y"])), g.all());
    let g = load("fig4");
    assert_eq!(g.non_descendants(&set(&g, &["A1"])), set(&g, &["A0", "R", "H", "Q"]));
}

#[test]
fn dsep_examples() {
    let g = load("fig6");
    assert!(g.d_separated(&set(&g, &["O1"]), &set(&g, &["O2"]), &VertexSet::new()).unwrap());
    let g = load("fig3");
    assert!(!g.d_separated(&set(&g, &["A"]), &set(&g, &["O2"]), &set(&g, &["O1"])).unwrap());
    let g = Dag::parse("X -> Y\nnode U\nnode V").unwrap();
    assert!(g.d_separated(&set(&g, &["U"]), &set(&g, &["Y"]), &VertexSet::new()).unwrap());
    assert!(matches!(
        g.d_separated(&set(&g, &["U"]), &set(&g, &["U"]), &VertexSet::new()),
        Err(Error::Overlap(_))
    ));
}

#[test]
fn exogenize_examples() {
    let g = Dag::parse("X -> U\nU -> R").unwrap();
    let h = g.exogenize(g.vertex("U").unwrap()).unwrap();
    assert_eq!(h.to_text(), "node X\nnode R\nX -> R\n");
    let g = load("fig8");
    assert!(g.exogenize(g.vertex("O").unwrap()).is_err());
}

#[test]
fn induced_subgraph_examples() {
    let g = load("fig4");
    assert_eq!(g.induced_subgraph(&g.all()), g);
    let h = g.induced_subgraph(&set(&g, &["A0", "R", "Q"]));
    assert_eq!(h.to_text(), "node A0\nnode R\nnode Q\nA0 -> R\nR -> Q\n");
    assert!(g.induced_subgraph(&VertexSet::new()).is_empty());
}
