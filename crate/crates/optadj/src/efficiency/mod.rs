//! Pruning of irrelevant vertices and the global efficiency check for the
//! optimally adjusted estimator of a point treatment mean.

mod eif;

use std::collections::BTreeSet;

use serde_json::{json, Value};

use crate::adjustment::{optimal_minimal_set, optimal_set};
use crate::error::{Error, Result};
use crate::graph::{Dag, Query, Vertex, VertexSet};

pub use eif::{Basis, EifExpr, Term};

/// Vertices whose every causal path to the outcome passes the treatment.
pub fn indirect_nodes(g: &Dag, q: &Query) -> Result<VertexSet> {
    let a = q.point()?;
    let without_a = g.induced_subgraph(&g.all().without(a));
    let y = without_a.vertex(g.name(q.outcome()))?;
    let reach_y = without_a.ancestors(&VertexSet::singleton(y));
    let reach_y = without_a.translate(&reach_y, g)?;
    Ok(g.ancestors(&VertexSet::singleton(a))
        .without(a)
        .difference(&reach_y))
}

/// Indirect vertices together with the non-ancestors of the outcome.
pub fn irrelevant_nodes(g: &Dag, q: &Query) -> Result<VertexSet> {
    let an_y = g.ancestors(&VertexSet::singleton(q.outcome()));
    Ok(indirect_nodes(g, q)?.union(&g.all().difference(&an_y)))
}

fn require_ancestor(g: &Dag, q: &Query) -> Result<Vertex> {
    let a = q.point()?;
    if !g.ancestors(&VertexSet::singleton(q.outcome())).contains(a) {
        return Err(Error::NotAncestor(g.name(a).to_string()));
    }
    Ok(a)
}

/// Restricts to ancestors of the outcome, then exogenizes the indirect
/// vertices in reverse topological order.
pub fn prune(g: &Dag, q: &Query) -> Result<Dag> {
    require_ancestor(g, q)?;
    let indir = indirect_nodes(g, q)?;
    let mut order = g.topological_sort(&indir);
    order.reverse();
    let mut h = g.induced_subgraph(&g.ancestors(&VertexSet::singleton(q.outcome())));
    for u in order {
        let local = h.vertex(g.name(u))?;
        h = h.exogenize(local).map_err(|e| {
            Error::Internal(format!("pruning `{}` failed: {e}", g.name(u)))
        })?;
    }
    Ok(h)
}

/// Which parent set the treatment-and-`O_min` inclusion is tested against
/// when scanning mediators for offenders.
///
/// Anchoring at `pa(M_1)` can drop a difference term that does not vanish,
/// e.g. `E[T|A,M1,O] - E[T|M1,O]` on `O -> {A,M1,M2}, A -> M1 -> M2 -> M3
/// -> Y, M1 -> Y`, so the per-mediator anchor is the default.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MediatorAnchor {
    /// Always `pa(M_1)`.
    FirstMediator,
    /// `pa(M_i)` for the mediator being scanned.
    #[default]
    EachMediator,
}

/// Indices `i` in `init..=1` (1-based) at which `O \ I_i` is not
/// d-separated from `(pa(W_i) ∪ {W_i}) Δ pa(W_{i+1})` given
/// `I_i = (pa(W_i) ∪ {W_i}) ∩ pa(W_{i+1})`.
pub fn offenders_nondesc(
    g: &Dag,
    w: &[Vertex],
    o: &VertexSet,
    init: usize,
) -> BTreeSet<usize> {
    let closed = |i: usize| parents(g, w[i - 1]).with(w[i - 1]);
    (1..=init)
        .rev()
        .filter(|&i| {
            let upper = closed(i);
            let next = parents(g, w[i]);
            let shared = upper.intersection(&next);
            let moved = upper.symmetric_difference(&next);
            !g.independent(&o.difference(&shared), &moved, &shared)
        })
        .collect()
}

/// Indices `i` in `init..=2` (1-based over `M_1..M_{K+1}`, the last being
/// the outcome) failing the anchored inclusion, `pa(M_i) ⊆ pa(M_{i-1}) ∪
/// {M_{i-1}}`, or `Y ⟂ (pa(M_{i-1}) ∪ {M_{i-1}}) \ pa(M_i) | pa(M_i)`.
pub fn offenders_desc(
    g: &Dag,
    a: Vertex,
    m: &[Vertex],
    o_min: &VertexSet,
    init: usize,
    anchor: MediatorAnchor,
) -> BTreeSet<usize> {
    let y = VertexSet::singleton(*m.last().expect("outcome closes the mediator list"));
    let required = o_min.with(a);
    (2..=init)
        .rev()
        .filter(|&i| {
            let pa_i = parents(g, m[i - 1]);
            let closed_prev = parents(g, m[i - 2]).with(m[i - 2]);
            let anchored = match anchor {
                MediatorAnchor::FirstMediator => parents(g, m[0]),
                MediatorAnchor::EachMediator => pa_i.clone(),
            };
            !required.is_subset(&anchored)
                || !pa_i.is_subset(&closed_prev)
                || !g.independent(&y, &closed_prev.difference(&pa_i), &pa_i)
        })
        .collect()
}

fn parents(g: &Dag, v: Vertex) -> VertexSet {
    g.parents(v).iter().copied().collect()
}

/// Topological partition of the pruned graph around the treatment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub non_descendants: Vec<String>,
    pub treatment: String,
    pub mediators: Vec<String>,
    pub outcome: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EfficiencyReport {
    pub efficient: bool,
    pub efficient_nondesc: bool,
    pub efficient_desc: bool,
    pub offenders_nondesc: BTreeSet<usize>,
    pub offenders_desc: BTreeSet<usize>,
    pub eif: EifExpr,
    pub pruned_graph: Dag,
    pub partition: Partition,
    /// Vertices of the input graph that no term of `eif` depends on.
    pub uninformative: Vec<String>,
}

impl EfficiencyReport {
    pub fn to_json(&self) -> Value {
        let g = &self.pruned_graph;
        let edges: Vec<Value> = g
            .edges()
            .into_iter()
            .map(|(t, h)| json!([g.name(t), g.name(h)]))
            .collect();
        let basis = self.eif.basis();
        json!({
            "efficient": self.efficient,
            "efficient_nondesc": self.efficient_nondesc,
            "efficient_desc": self.efficient_desc,
            "offenders_nondesc": self.offenders_nondesc,
            "offenders_desc": self.offenders_desc,
            "eif": self.eif.to_json(),
            "uninformative": self.uninformative,
            "O": basis.adjustment,
            "O_min": basis.minimal,
            "partition": {
                "W": self.partition.non_descendants,
                "A": self.partition.treatment,
                "M": self.partition.mediators,
                "Y": self.partition.outcome,
            },
            "pruned_dag": { "vertices": g.names(), "edges": edges },
        })
    }
}

/// [`check_efficient_with`] using the per-mediator anchor.
pub fn check_efficient(g: &Dag, q: &Query) -> Result<EfficiencyReport> {
    check_efficient_with(g, q, MediatorAnchor::default())
}

/// Decides whether the optimally adjusted estimator attains the efficiency
/// bound in every law of the model and builds the efficient influence
/// function symbolically.
pub fn check_efficient_with(
    g: &Dag,
    q: &Query,
    anchor: MediatorAnchor,
) -> Result<EfficiencyReport> {
    require_ancestor(g, q)?;
    let h = prune(g, q)?;
    let hq = q.translate(g, &h)?;
    let a = hq.point()?;
    let y = hq.outcome();

    let order = h.topological_sort(&h.all());
    let de_a = h.descendants(&VertexSet::singleton(a));
    let w: Vec<Vertex> = order.iter().copied().filter(|&v| !de_a.contains(v)).collect();
    let mut m: Vec<Vertex> = order
        .iter()
        .copied()
        .filter(|&v| de_a.contains(v) && v != a && v != y)
        .collect();

    let o = optimal_set(&h, &hq)?;
    let o_min = optimal_minimal_set(&h, &hq)?;
    let names = |s: &VertexSet| -> BTreeSet<String> { h.labels(s).into_iter().collect() };
    let basis = Basis {
        treatment: h.name(a).to_string(),
        outcome: h.name(y).to_string(),
        adjustment: names(&o),
        minimal: names(&o_min),
    };
    let labels = |s: &VertexSet| h.labels(s);
    let closed = |v: Vertex| labels(&parents(&h, v).with(v));
    let pa = |v: Vertex| labels(&parents(&h, v));

    let mut nondesc = EifExpr::zero(basis.clone());
    let mut offenders_nd = BTreeSet::new();
    let jn = w.len();
    let efficient_nondesc = if jn == 0 {
        true
    } else if jn == 1 {
        nondesc.add(Term::BAtom, 1);
        nondesc.add(Term::Chi, -1);
        true
    } else {
        let o_t = *h.topological_sort(&o).last().expect("O is nonempty when W is");
        let wv = |i: usize| w[i - 1];
        let efficient;
        if o.without(o_t).is_subset(&parents(&h, o_t)) {
            let mut j = jn - 1;
            while j >= 2 && parents(&h, wv(j + 1)).without(wv(j)).is_subset(&parents(&h, wv(j))) {
                j -= 1;
            }
            nondesc.add(Term::BAtom, 1);
            nondesc.add(Term::Chi, -1);
            if j >= 2 {
                offenders_nd.insert(j);
                offenders_nd.extend(offenders_nondesc(&h, &w, &o, j - 1));
                efficient = false;
            } else {
                efficient = true;
            }
        } else {
            offenders_nd = offenders_nondesc(&h, &w, &o, jn - 1);
            nondesc.add(Term::BCond(closed(wv(jn))), 1);
            nondesc.add(Term::Chi, -1);
            efficient = false;
        }
        for &i in &offenders_nd {
            nondesc.add(Term::BCond(closed(wv(i))), 1);
            nondesc.add(Term::BCond(pa(wv(i + 1))), -1);
        }
        efficient
    };

    let kn = m.len();
    m.push(y);
    let mv = |i: usize| m[i - 1];
    let mut desc = EifExpr::zero(basis.clone());
    let mut offenders_d = BTreeSet::new();
    let first_mediator_term = |e: &mut EifExpr| {
        if parents(&h, mv(1)) == o.with(a) {
            e.add(Term::IpwB, -1);
        } else {
            e.add(Term::TCond(pa(mv(1))), -1);
        }
    };
    let required = o_min.with(a);
    let efficient_desc = if kn == 0 {
        desc.add(Term::IpwResidual, 1);
        true
    } else if required.is_subset(&parents(&h, y)) {
        desc.add(Term::IpwY, 1);
        let mut k = kn + 1;
        while k >= 2 && parents(&h, mv(k)).is_subset(&parents(&h, mv(k - 1)).with(mv(k - 1))) {
            k -= 1;
        }
        if k >= 2 {
            offenders_d.insert(k);
            offenders_d.extend(offenders_desc(&h, a, &m, &o_min, k - 1, anchor));
            first_mediator_term(&mut desc);
            false
        } else {
            desc.add(Term::IpwB, -1);
            true
        }
    } else {
        offenders_d.insert(kn + 1);
        offenders_d.extend(offenders_desc(&h, a, &m, &o_min, kn, anchor));
        desc.add(Term::TCond(closed(y)), 1);
        first_mediator_term(&mut desc);
        false
    };
    for &i in &offenders_d {
        desc.add(Term::TCond(closed(mv(i - 1))), 1);
        desc.add(Term::TCond(pa(mv(i))), -1);
    }

    let mut eif = nondesc;
    eif.add_expr(&desc, 1);
    let used = eif.variables();
    let uninformative = g
        .labels(&g.all())
        .into_iter()
        .filter(|v| !used.contains(v))
        .collect();
    m.pop();
    Ok(EfficiencyReport {
        efficient: efficient_nondesc && efficient_desc,
        efficient_nondesc,
        efficient_desc,
        offenders_nondesc: offenders_nd,
        offenders_desc: offenders_d,
        eif,
        partition: Partition {
            non_descendants: w.iter().map(|&v| h.name(v).to_string()).collect(),
            treatment: h.name(a).to_string(),
            mediators: m.iter().map(|&v| h.name(v).to_string()).collect(),
            outcome: h.name(y).to_string(),
        },
        pruned_graph: h,
        uninformative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(text: &str) -> (Dag, Query) {
        let g = Dag::parse(text).unwrap();
        let q = Query::from_names(&g, &["A"], "Y").unwrap();
        (g, q)
    }

    #[test]
    fn chain_with_instrument_is_pruned() {
        let (g, q) = setup("Z -> A\nA -> Y");
        assert_eq!(indirect_nodes(&g, &q).unwrap(), g.set(["Z"]).unwrap());
        assert_eq!(irrelevant_nodes(&g, &q).unwrap(), g.set(["Z"]).unwrap());
        let h = prune(&g, &q).unwrap();
        assert_eq!(h.names(), ["A", "Y"]);
        assert_eq!(h.edge_count(), 1);
    }

    #[test]
    fn pruning_rewires_instrument_parent() {
        let (g, q) = setup("P1 -> Z\nZ -> A\nP1 -> Y\nA -> Y");
        let h = prune(&g, &q).unwrap();
        assert_eq!(h.names(), ["P1", "A", "Y"]);
        assert!(h.has_edge(h.vertex("P1").unwrap(), h.vertex("A").unwrap()));
    }

    #[test]
    fn non_ancestor_is_irrelevant() {
        let (g, q) = setup("node X\nW1 -> O1\nW1 -> A\nA -> Y\nO1 -> Y");
        assert_eq!(irrelevant_nodes(&g, &q).unwrap(), g.set(["X"]).unwrap());
        assert!(indirect_nodes(&g, &q).unwrap().is_empty());
    }

    #[test]
    fn treatment_must_reach_outcome() {
        let (g, q) = setup("Y -> A");
        assert!(matches!(check_efficient(&g, &q), Err(Error::NotAncestor(_))));
    }

    #[test]
    fn randomized_treatment_without_mediators_is_efficient() {
        let (g, q) = setup("A -> Y");
        let r = check_efficient(&g, &q).unwrap();
        assert!(r.efficient);
        assert_eq!(r.eif.to_text(), "IPW*(Y - b)");
    }

    #[test]
    fn chain_is_inefficient() {
        let (g, q) = setup("A -> M\nM -> Y");
        let r = check_efficient(&g, &q).unwrap();
        assert!(!r.efficient);
        assert_eq!(r.offenders_desc, BTreeSet::from([2]));
        assert_eq!(r.eif.to_text(), "E[T|{A,M}] - E[T|{M}] + E[T|{M,Y}] - IPW*b");
    }
}
