//! Time independent adjustment sets.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Dag, Query, Vertex, VertexSet};

/// Why a set is or is not a (minimal) adjustment set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Reason {
    /// Valid, and minimal when minimality was asked for.
    Holds,
    /// The set contains a forbidden vertex.
    Forbidden { vertex: String },
    /// A proper non-causal path left open by the set.
    OpenPath { path: String },
    /// Valid but this vertex can be dropped.
    Removable { vertex: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AdjustmentReport {
    pub set: Vec<String>,
    pub valid: bool,
    pub minimal: bool,
    pub reason: Reason,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum VerdictKind {
    FirstDominates,
    SecondDominates,
    Equivalent,
    Inconclusive,
}

/// One d-separation statement checked during a comparison.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Condition {
    pub dsep: String,
    pub holds: bool,
}

/// Outcome of a graphical comparison of two adjustment sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub verdict: VerdictKind,
    pub conditions: Vec<Condition>,
}

impl Verdict {
    pub(crate) fn from_directions(first: bool, second: bool, conditions: Vec<Condition>) -> Self {
        let verdict = match (first, second) {
            (true, true) => VerdictKind::Equivalent,
            (true, false) => VerdictKind::FirstDominates,
            (false, true) => VerdictKind::SecondDominates,
            (false, false) => VerdictKind::Inconclusive,
        };
        Verdict {
            verdict,
            conditions,
        }
    }
}

/// Records `x ⟂ y | z` as a condition and returns whether it holds.
pub(crate) fn check(
    g: &Dag,
    conditions: &mut Vec<Condition>,
    x: &VertexSet,
    y: &VertexSet,
    z: &VertexSet,
) -> bool {
    let holds = g.independent(x, y, z);
    conditions.push(Condition {
        dsep: format!(
            "{} _||_ {} | {}",
            g.format_set(x),
            g.format_set(y),
            g.format_set(z)
        ),
        holds,
    });
    holds
}

/// Vertices reachable from some treatment by a directed path that avoids the
/// other treatments, intersected with those reaching the outcome without
/// passing a treatment.
pub fn causal_nodes(g: &Dag, q: &Query) -> VertexSet {
    let treatments = q.treatment_set();
    let mut forward = VertexSet::new();
    let mut stack: Vec<Vertex> = q.treatments().to_vec();
    while let Some(v) = stack.pop() {
        for &c in g.children(v) {
            if !treatments.contains(c) && forward.insert(c) {
                stack.push(c);
            }
        }
    }
    let mut backward = VertexSet::singleton(q.outcome());
    let mut stack = vec![q.outcome()];
    while let Some(v) = stack.pop() {
        for &p in g.parents(v) {
            if !treatments.contains(p) && backward.insert(p) {
                stack.push(p);
            }
        }
    }
    forward.intersection(&backward)
}

/// Descendants of the causal nodes together with the treatments.
pub fn forbidden(g: &Dag, q: &Query) -> VertexSet {
    g.descendants(&causal_nodes(g, q)).union(&q.treatment_set())
}

/// Removes the first edge of every proper causal path.
pub fn proper_backdoor_graph(g: &Dag, q: &Query) -> Dag {
    let cn = causal_nodes(g, q);
    let treatments = q.treatment_set();
    g.without_edges(|t, h| treatments.contains(t) && cn.contains(h))
}

fn check_input(g: &Dag, q: &Query, z: &VertexSet) -> Result<()> {
    if let Some(v) = z.iter().find(|&v| v >= g.len()) {
        return Err(Error::UnknownVertex(format!("#{v}")));
    }
    let reserved = q.treatment_set().with(q.outcome());
    if let Some(v) = z.intersection(&reserved).first() {
        return Err(Error::Overlap(g.name(v).to_string()));
    }
    Ok(())
}

fn validity(g: &Dag, q: &Query, z: &VertexSet) -> Reason {
    if let Some(v) = z.intersection(&forbidden(g, q)).first() {
        return Reason::Forbidden {
            vertex: g.name(v).to_string(),
        };
    }
    let pbd = proper_backdoor_graph(g, q);
    let y = VertexSet::singleton(q.outcome());
    if pbd.d_separated(&q.treatment_set(), &y, z).unwrap_or(false) {
        return Reason::Holds;
    }
    match open_path(&pbd, q, z) {
        Some(path) => Reason::OpenPath { path },
        None => Reason::OpenPath {
            path: "unavailable".to_string(),
        },
    }
}

fn is_valid(g: &Dag, q: &Query, z: &VertexSet) -> bool {
    validity(g, q, z) == Reason::Holds
}

/// Depth-first search for an open path from a treatment to the outcome whose
/// interior avoids the treatments.
fn open_path(g: &Dag, q: &Query, z: &VertexSet) -> Option<String> {
    let anc_z = g.ancestors(z);
    let treatments = q.treatment_set();
    let y = q.outcome();

    fn extend(
        g: &Dag,
        path: &mut Vec<Vertex>,
        on_path: &mut VertexSet,
        y: Vertex,
        z: &VertexSet,
        anc_z: &VertexSet,
        treatments: &VertexSet,
    ) -> bool {
        let last = *path.last().unwrap();
        if last == y {
            return true;
        }
        let neighbours: Vec<Vertex> = g
            .parents(last)
            .iter()
            .chain(g.children(last))
            .copied()
            .collect();
        for next in neighbours {
            if on_path.contains(next) || (treatments.contains(next) && path.len() > 0) {
                continue;
            }
            if path.len() >= 2 {
                let prev = path[path.len() - 2];
                let collider = g.has_edge(prev, last) && g.has_edge(next, last);
                let open = if collider {
                    anc_z.contains(last)
                } else {
                    !z.contains(last)
                };
                if !open {
                    continue;
                }
            }
            path.push(next);
            on_path.insert(next);
            if extend(g, path, on_path, y, z, anc_z, treatments) {
                return true;
            }
            path.pop();
            on_path.remove(next);
        }
        false
    }

    for &a in q.treatments() {
        let mut path = vec![a];
        let mut on_path = VertexSet::singleton(a);
        if extend(g, &mut path, &mut on_path, y, z, &anc_z, &treatments) {
            let mut out = g.name(path[0]).to_string();
            for w in path.windows(2) {
                let arrow = if g.has_edge(w[0], w[1]) { "->" } else { "<-" };
                out.push_str(&format!(" {arrow} {}", g.name(w[1])));
            }
            return Some(out);
        }
    }
    None
}

/// Generalized adjustment criterion: no forbidden vertex, and every proper
/// non-causal path blocked.
pub fn is_valid_adjustment(g: &Dag, q: &Query, z: &VertexSet) -> Result<AdjustmentReport> {
    check_input(g, q, z)?;
    let reason = validity(g, q, z);
    Ok(AdjustmentReport {
        set: g.labels(z),
        valid: reason == Reason::Holds,
        minimal: false,
        reason,
    })
}

/// Valid and no single vertex can be removed while staying valid.
pub fn is_minimal_adjustment(g: &Dag, q: &Query, z: &VertexSet) -> Result<AdjustmentReport> {
    let mut report = is_valid_adjustment(g, q, z)?;
    if !report.valid {
        return Ok(report);
    }
    match z.iter().find(|&v| is_valid(g, q, &z.without(v))) {
        Some(v) => {
            report.reason = Reason::Removable {
                vertex: g.name(v).to_string(),
            }
        }
        None => report.minimal = true,
    }
    Ok(report)
}

/// Parents of the causal nodes outside the forbidden set.
///
/// Fails when this set is not valid, in which case no valid time independent
/// adjustment set exists.
pub fn optimal_set(g: &Dag, q: &Query) -> Result<VertexSet> {
    let o = g
        .parents_of(&causal_nodes(g, q))
        .difference(&forbidden(g, q));
    if is_valid(g, q, &o) {
        Ok(o)
    } else {
        Err(Error::NoAdjustmentSet)
    }
}

/// Smallest `S ⊆ O` with the treatment d-separated from `O \ S` given `S`.
pub fn optimal_minimal_set(g: &Dag, q: &Query) -> Result<VertexSet> {
    let a = q.point()?;
    let o = optimal_set(g, q)?;
    let mut order = g.topological_sort(&o);
    order.reverse();
    Ok(minimal_subset(g, a, &o, &order))
}

/// Greedy removal from `o` in the given order, repeated to a fixpoint.
pub fn minimal_subset(g: &Dag, a: Vertex, o: &VertexSet, order: &[Vertex]) -> VertexSet {
    let a = VertexSet::singleton(a);
    let mut s = o.clone();
    loop {
        let mut changed = false;
        for &v in order {
            if !s.contains(v) {
                continue;
            }
            let t = s.without(v);
            if g.independent(&a, &o.difference(&t), &t) {
                s = t;
                changed = true;
            }
        }
        if !changed {
            return s;
        }
    }
}

/// Graphical variance comparison of two valid adjustment sets.
pub fn compare_adjustment_sets(
    g: &Dag,
    q: &Query,
    first: &VertexSet,
    second: &VertexSet,
) -> Result<Verdict> {
    for s in [first, second] {
        let report = is_valid_adjustment(g, q, s)?;
        if !report.valid {
            return Err(Error::InvalidSet(g.format_set(s)));
        }
    }
    let a = q.treatment_set();
    let y = VertexSet::singleton(q.outcome());
    let mut conditions = Vec::new();
    let directed = |c: &mut Vec<Condition>, good: &VertexSet, bad: &VertexSet| {
        let on_a = check(g, c, &a, &good.difference(bad), bad);
        let on_y = check(g, c, &y, &bad.difference(good), &good.union(&a));
        on_a && on_y
    };
    let first_wins = directed(&mut conditions, first, second);
    let second_wins = directed(&mut conditions, second, first);
    Ok(Verdict::from_directions(first_wins, second_wins, conditions))
}

/// Drops vertices that are independent of the outcome given the rest of the
/// set and the treatments, scanning in reverse topological order until no
/// further vertex can be dropped.
pub fn prune_adjustment(g: &Dag, q: &Query, z: &VertexSet) -> Result<VertexSet> {
    let report = is_valid_adjustment(g, q, z)?;
    if !report.valid {
        return Err(Error::InvalidSet(g.format_set(z)));
    }
    let a = q.treatment_set();
    let y = VertexSet::singleton(q.outcome());
    let mut order = g.topological_sort(z);
    order.reverse();
    let mut s = z.clone();
    loop {
        let mut changed = false;
        for &v in &order {
            if !s.contains(v) {
                continue;
            }
            let t = s.without(v);
            if g.independent(&y, &z.difference(&t), &t.union(&a)) {
                s = t;
                changed = true;
            }
        }
        if !changed {
            return Ok(s);
        }
    }
}

/// Default limit on candidate covariates for exhaustive enumeration.
pub const DEFAULT_MAX_CANDIDATES: usize = 16;

/// All valid adjustment sets among the non-treatment, non-outcome vertices.
pub fn enumerate_adjustment_sets(
    g: &Dag,
    q: &Query,
    max_vertices: usize,
) -> Result<Vec<VertexSet>> {
    let candidates = g
        .all()
        .difference(&q.treatment_set())
        .without(q.outcome());
    enumerate_adjustment_sets_within(g, q, &candidates, max_vertices)
}

/// All valid adjustment sets drawn from `candidates`, ordered by size and
/// then by declaration index.
pub fn enumerate_adjustment_sets_within(
    g: &Dag,
    q: &Query,
    candidates: &VertexSet,
    max_vertices: usize,
) -> Result<Vec<VertexSet>> {
    let reserved = q.treatment_set().with(q.outcome());
    let candidates = candidates.difference(&reserved);
    if candidates.len() > max_vertices {
        return Err(Error::GuardExceeded {
            what: "candidate count",
            size: candidates.len() as u128,
            limit: max_vertices as u128,
        });
    }
    let pool = candidates.to_vec();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << pool.len()) {
        let z: VertexSet = pool
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &v)| v)
            .collect();
        if is_valid(g, q, &z) {
            out.push(z);
        }
    }
    out.sort_by(|x, y| (x.len(), x.to_vec()).cmp(&(y.len(), y.to_vec())));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG3: &str = "node W1\nnode W2\nnode A\nnode Y\nnode O1\nnode O2\n\
        A -> Y\nW2 -> A\nW2 -> O2\nW1 -> O1\nW1 -> A\nO2 -> Y\nO1 -> Y\n";

    fn setup(text: &str, a: &[&str], y: &str) -> (Dag, Query) {
        let g = Dag::parse(text).unwrap();
        let q = Query::from_names(&g, a, y).unwrap();
        (g, q)
    }

    #[test]
    fn chain_causal_and_forbidden() {
        let (g, q) = setup("A -> M\nM -> Y", &["A"], "Y");
        assert_eq!(causal_nodes(&g, &q), g.set(["M", "Y"]).unwrap());
        assert_eq!(forbidden(&g, &q), g.all());
        assert_eq!(optimal_set(&g, &q).unwrap(), VertexSet::new());
        assert_eq!(optimal_minimal_set(&g, &q).unwrap(), VertexSet::new());
    }

    #[test]
    fn no_causal_path_gives_empty_cn() {
        let (g, q) = setup("A -> X\nY -> X", &["A"], "Y");
        assert!(causal_nodes(&g, &q).is_empty());
    }

    #[test]
    fn fig3_validity_and_witness() {
        let (g, q) = setup(FIG3, &["A"], "Y");
        let s = |n: &[&str]| g.set(n.iter().copied()).unwrap();
        assert!(is_valid_adjustment(&g, &q, &s(&["O1", "W2"])).unwrap().valid);
        let bad = is_valid_adjustment(&g, &q, &s(&["O1"])).unwrap();
        assert!(!bad.valid);
        assert_eq!(
            bad.reason,
            Reason::OpenPath {
                path: "A <- W2 -> O2 -> Y".into()
            }
        );
        let r = is_minimal_adjustment(&g, &q, &s(&["O1", "O2", "W1"])).unwrap();
        assert!(r.valid && !r.minimal);
        assert_eq!(r.reason, Reason::Removable { vertex: "W1".into() });
    }

    #[test]
    fn forbidden_mediator_is_reported() {
        let (g, q) = setup("A -> M\nM -> Y\nO -> A\nO -> Y", &["A"], "Y");
        let r = is_valid_adjustment(&g, &q, &g.set(["M"]).unwrap()).unwrap();
        assert_eq!(r.reason, Reason::Forbidden { vertex: "M".into() });
    }

    #[test]
    fn overlap_with_treatment_is_an_error() {
        let (g, q) = setup(FIG3, &["A"], "Y");
        assert!(is_valid_adjustment(&g, &q, &g.set(["A"]).unwrap()).is_err());
    }

    #[test]
    fn self_comparison_is_equivalent() {
        let (g, q) = setup(FIG3, &["A"], "Y");
        let o = optimal_set(&g, &q).unwrap();
        let v = compare_adjustment_sets(&g, &q, &o, &o).unwrap();
        assert_eq!(v.verdict, VerdictKind::Equivalent);
    }

    #[test]
    fn enumeration_guard() {
        let (g, q) = setup(FIG3, &["A"], "Y");
        assert!(matches!(
            enumerate_adjustment_sets(&g, &q, 3),
            Err(Error::GuardExceeded { .. })
        ));
    }
}
