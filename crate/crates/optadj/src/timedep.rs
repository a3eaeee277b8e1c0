//! Time dependent adjustment sets: one covariate block per treatment.

use serde::Serialize;

use crate::adjustment::{check, Verdict};
use crate::error::{Error, Result};
use crate::graph::{Dag, Query, VertexSet};

/// Covariate blocks `(Z_0, ..., Z_p)`, one per treatment.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TimeDepSet {
    pub blocks: Vec<VertexSet>,
}

impl TimeDepSet {
    pub fn new(blocks: Vec<VertexSet>) -> Self {
        TimeDepSet { blocks }
    }

    /// A single block holding a time independent set.
    pub fn point(z: VertexSet) -> Self {
        TimeDepSet { blocks: vec![z] }
    }

    /// Resolves blocks given by vertex names.
    pub fn from_names<S: AsRef<str>>(g: &Dag, blocks: &[&[S]]) -> Result<Self> {
        let blocks = blocks
            .iter()
            .map(|b| g.set(b.iter().map(|s| s.as_ref())))
            .collect::<Result<Vec<_>>>()?;
        Ok(TimeDepSet { blocks })
    }

    /// Union of blocks `0..=k`.
    pub fn cumulative(&self, k: usize) -> VertexSet {
        self.blocks[..=k]
            .iter()
            .fold(VertexSet::new(), |acc, b| acc.union(b))
    }

    /// Union of all blocks.
    pub fn all(&self) -> VertexSet {
        self.cumulative(self.blocks.len() - 1)
    }

    /// Blockwise union, each vertex kept in the earliest block that has it.
    pub fn merge(&self, other: &TimeDepSet) -> TimeDepSet {
        let mut seen = VertexSet::new();
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(x, y)| {
                let b = x.union(y).difference(&seen);
                seen = seen.union(&b);
                b
            })
            .collect();
        TimeDepSet { blocks }
    }

    /// Blockwise difference, removing anything present anywhere in `other`.
    pub fn minus(&self, other: &TimeDepSet) -> TimeDepSet {
        let rest = other.all();
        TimeDepSet {
            blocks: self.blocks.iter().map(|b| b.difference(&rest)).collect(),
        }
    }

    /// Blocks rendered as sorted vertex names.
    pub fn labels(&self, g: &Dag) -> Vec<Vec<String>> {
        self.blocks.iter().map(|b| g.labels(b)).collect()
    }

    pub fn format(&self, g: &Dag) -> String {
        let parts: Vec<String> = self.blocks.iter().map(|b| g.format_set(b)).collect();
        format!("({})", parts.join(", "))
    }

    /// Checks block count and disjointness from each other, the treatments
    /// and the outcome.
    pub fn validate(&self, g: &Dag, q: &Query) -> Result<()> {
        if self.blocks.len() != q.treatments().len() {
            return Err(Error::InvalidSet(format!(
                "expected {} blocks, found {}",
                q.treatments().len(),
                self.blocks.len()
            )));
        }
        let mut seen = q.treatment_set().with(q.outcome());
        for b in &self.blocks {
            if let Some(v) = b.iter().find(|&v| v >= g.len()) {
                return Err(Error::UnknownVertex(format!("#{v}")));
            }
            if let Some(v) = b.intersection(&seen).first() {
                return Err(Error::Overlap(g.name(v).to_string()));
            }
            seen = seen.union(b);
        }
        Ok(())
    }
}

/// Outcome of the oracle search for a counterexample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Falsification {
    NotRequested,
    /// A sampled law violates the identification identity.
    Falsified { trial: usize },
    /// Criterion accepted and no sampled law violated the identity.
    NotFalsified,
    /// Criterion rejected and no counterexample was found.
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TimeDepReport {
    pub blocks: Vec<Vec<String>>,
    pub sufficient_criterion: bool,
    /// First treatment index at which the criterion fails.
    pub failing_step: Option<usize>,
    pub oracle_falsified: Falsification,
}

/// `Z_0 = pa(A_0)`, `Z_k = pa(A_k)` minus earlier treatment parents, with
/// treatments removed.
pub fn canonical_time_dep_set(g: &Dag, q: &Query) -> TimeDepSet {
    let treatments = q.treatment_set();
    let mut earlier = VertexSet::new();
    let blocks = q
        .treatments()
        .iter()
        .map(|&a| {
            let pa: VertexSet = g.parents(a).iter().copied().collect();
            let block = pa.difference(&earlier).difference(&treatments);
            earlier = earlier.union(&pa);
            block
        })
        .collect();
    TimeDepSet { blocks }
}

/// Graph for step `k`: edges out of `A_k` and edges into later treatments
/// removed.
pub fn step_graph(g: &Dag, q: &Query, k: usize) -> Dag {
    let ak = q.treatments()[k];
    let later: VertexSet = q.treatments()[k + 1..].iter().copied().collect();
    g.without_edges(|t, h| t == ak || later.contains(h))
}

/// First step at which the sequential criterion fails, if any.
fn failing_step(g: &Dag, q: &Query, z: &TimeDepSet) -> Option<usize> {
    let y = VertexSet::singleton(q.outcome());
    let treatments = q.treatments();
    (0..treatments.len()).find(|&k| {
        let ak = VertexSet::singleton(treatments[k]);
        let not_descendant = z.blocks[k].is_disjoint(&g.descendants(&ak));
        let past: VertexSet = treatments[..k].iter().copied().collect();
        let cond = past.union(&z.cumulative(k));
        let gk = step_graph(g, q, k);
        !(not_descendant && gk.independent(&y, &ak, &cond))
    })
}

/// Sequential back-door criterion: for each `k`, `Z_k` has no descendant of
/// `A_k` and `Y ⟂ A_k | Ā_{k-1}, Z̄_k` in the step graph.
pub fn is_valid_time_dep(g: &Dag, q: &Query, z: &TimeDepSet) -> Result<TimeDepReport> {
    z.validate(g, q)?;
    let step = failing_step(g, q, z);
    Ok(TimeDepReport {
        blocks: z.labels(g),
        sufficient_criterion: step.is_none(),
        failing_step: step,
        oracle_falsified: Falsification::NotRequested,
    })
}

/// Default limit on candidate covariates for block enumeration.
pub const DEFAULT_MAX_CANDIDATES: usize = 12;

/// Every assignment of candidate vertices to a block or to no block that
/// passes the criterion.
pub fn enumerate_time_dep(g: &Dag, q: &Query, max_vertices: usize) -> Result<Vec<TimeDepSet>> {
    let candidates = g
        .all()
        .difference(&q.treatment_set())
        .without(q.outcome());
    enumerate_time_dep_within(g, q, &candidates, max_vertices)
}

/// As [`enumerate_time_dep`] restricted to `candidates`. Results are ordered
/// by total size, then blockwise by declaration index.
pub fn enumerate_time_dep_within(
    g: &Dag,
    q: &Query,
    candidates: &VertexSet,
    max_vertices: usize,
) -> Result<Vec<TimeDepSet>> {
    let candidates = candidates
        .difference(&q.treatment_set())
        .without(q.outcome());
    if candidates.len() > max_vertices {
        return Err(Error::GuardExceeded {
            what: "candidate count",
            size: candidates.len() as u128,
            limit: max_vertices as u128,
        });
    }
    let pool = candidates.to_vec();
    let slots = q.treatments().len() + 1;
    let mut choice = vec![0usize; pool.len()];
    let mut out = Vec::new();
    loop {
        let mut blocks = vec![VertexSet::new(); slots - 1];
        for (i, &c) in choice.iter().enumerate() {
            if c > 0 {
                blocks[c - 1].insert(pool[i]);
            }
        }
        let z = TimeDepSet { blocks };
        if failing_step(g, q, &z).is_none() {
            out.push(z);
        }
        let mut i = 0;
        while i < choice.len() && choice[i] + 1 == slots {
            choice[i] = 0;
            i += 1;
        }
        if i == choice.len() {
            break;
        }
        choice[i] += 1;
    }
    out.sort_by(|x, y| {
        let key = |s: &TimeDepSet| {
            (
                s.all().len(),
                s.blocks.iter().map(VertexSet::to_vec).collect::<Vec<_>>(),
            )
        };
        key(x).cmp(&key(y))
    });
    Ok(out)
}

/// Graphical variance comparison of two time dependent sets, with `first`
/// in the role of the candidate winner.
pub fn compare_time_dep_sets(
    g: &Dag,
    q: &Query,
    first: &TimeDepSet,
    second: &TimeDepSet,
) -> Result<Verdict> {
    for s in [first, second] {
        if !is_valid_time_dep(g, q, s)?.sufficient_criterion {
            return Err(Error::InvalidSet(s.format(g)));
        }
    }
    let mut conditions = Vec::new();
    let first_wins = dominates(g, q, first, second, &mut conditions);
    let second_wins = dominates(g, q, second, first, &mut conditions);
    Ok(Verdict::from_directions(first_wins, second_wins, conditions))
}

/// The three condition families with `good` as G and `bad` as B. Every
/// condition is evaluated and recorded.
fn dominates(
    g: &Dag,
    q: &Query,
    good: &TimeDepSet,
    bad: &TimeDepSet,
    conditions: &mut Vec<crate::adjustment::Condition>,
) -> bool {
    let treatments = q.treatments();
    let past = |j: usize| -> VertexSet { treatments[..j].iter().copied().collect() };
    let mut holds = true;
    for (j, &aj) in treatments.iter().enumerate() {
        let gj = good.cumulative(j);
        let bj = bad.cumulative(j);
        holds &= check(
            g,
            conditions,
            &VertexSet::singleton(aj),
            &gj.difference(&bj),
            &bj.union(&past(j)),
        );
    }
    let y = VertexSet::singleton(q.outcome());
    holds &= check(
        g,
        conditions,
        &y,
        &bad.all().difference(&good.all()),
        &good.all().union(&q.treatment_set()),
    );
    for j in 1..treatments.len() {
        let gprev = good.cumulative(j - 1);
        let bprev = bad.cumulative(j - 1);
        holds &= check(
            g,
            conditions,
            &good.blocks[j],
            &bprev.difference(&gprev),
            &gprev.union(&past(j)),
        );
    }
    holds
}
