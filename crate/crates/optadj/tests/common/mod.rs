#![allow(dead_code)]

use std::path::PathBuf;

use optadj::{Dag, Query, Vertex, VertexSet};

pub fn dag_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../dags")
        .join(format!("{name}.dag"))
}

pub fn load(name: &str) -> Dag {
    let path = dag_path(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    Dag::parse(&text).unwrap()
}

pub fn query(g: &Dag, treatments: &[&str], outcome: &str) -> Query {
    Query::from_names(g, treatments, outcome).unwrap()
}

pub fn point(name: &str) -> (Dag, Query) {
    let g = load(name);
    let q = query(&g, &["A"], "Y");
    (g, q)
}

pub fn set(g: &Dag, names: &[&str]) -> VertexSet {
    g.set(names.iter().copied()).unwrap()
}

/// Figures with a single treatment `A` and outcome `Y`.
pub const POINT_FIGURES: [&str; 9] = [
    "fig2", "fig3", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "fig11",
];

/// Every subset of `pool`, smallest first.
pub fn subsets(pool: &VertexSet) -> Vec<VertexSet> {
    let items = pool.to_vec();
    let mut out: Vec<VertexSet> = (0u32..1 << items.len())
        .map(|mask| {
            items
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &v)| v)
                .collect()
        })
        .collect();
    out.sort_by_key(|s| (s.len(), s.to_vec()));
    out
}

/// d-separation by enumerating every simple path between `x` and `y` and
/// testing it for blocking given `z`.
pub fn dsep_by_paths(g: &Dag, x: Vertex, y: Vertex, z: &VertexSet) -> bool {
    let an_z = g.ancestors(z);
    let mut path = vec![x];
    let mut on_path = vec![false; g.len()];
    on_path[x] = true;
    !open_path_exists(g, y, z, &an_z, &mut path, &mut on_path)
}

fn open_path_exists(
    g: &Dag,
    target: Vertex,
    z: &VertexSet,
    an_z: &VertexSet,
    path: &mut Vec<Vertex>,
    on_path: &mut [bool],
) -> bool {
    let last = *path.last().unwrap();
    if last == target {
        return path_is_open(g, path, z, an_z);
    }
    let neighbours: Vec<Vertex> = g.parents(last).iter().chain(g.children(last)).copied().collect();
    for n in neighbours {
        if on_path[n] {
            continue;
        }
        path.push(n);
        on_path[n] = true;
        let found = open_path_exists(g, target, z, an_z, path, on_path);
        on_path[n] = false;
        path.pop();
        if found {
            return true;
        }
    }
    false
}

fn path_is_open(g: &Dag, path: &[Vertex], z: &VertexSet, an_z: &VertexSet) -> bool {
    for w in path.windows(3) {
        let (a, m, b) = (w[0], w[1], w[2]);
        let collider = g.has_edge(a, m) && g.has_edge(b, m);
        if collider {
            if !an_z.contains(m) {
                return false;
            }
        } else if z.contains(m) {
            return false;
        }
    }
    true
}

/// Random graph on `n` vertices named `V0..`, each forward pair joined with
/// probability `density`.
pub fn random_dag<R: rand::Rng>(rng: &mut R, n: usize, density: f64) -> Dag {
    let names: Vec<String> = (0..n).map(|i| format!("V{i}")).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(density) {
                edges.push((names[i].clone(), names[j].clone()));
            }
        }
    }
    Dag::new(names.clone(), edges).unwrap()
}

/// Variance of the influence function of the estimator adjusting for `z`.
pub fn ti_variance(j: &optadj::oracle::Joint, q: &Query, level: f64, z: &VertexSet) -> f64 {
    j.variance(&optadj::oracle::psi_ti(j, q, &[level], z).unwrap())
}

/// Variance of the influence function of the sequential estimator.
pub fn td_variance(
    j: &optadj::oracle::Joint,
    q: &Query,
    levels: &[f64],
    z: &optadj::timedep::TimeDepSet,
) -> f64 {
    j.variance(&optadj::oracle::psi_td(j, q, levels, z).unwrap())
}
