use crate::adjustment::{optimal_set, optimal_minimal_set};
use crate::error::{Error, Result};
use crate::graph::{Dag, Query, Vertex};
use crate::timedep::{is_valid_time_dep, Falsification, TimeDepReport, TimeDepSet};

use super::estimands::{interventional_mean, iterated_identity_gap};
use super::joint::{Joint, RandomVar};
use super::law::{DiscreteLaw, RandomLawSpec};

/// A sampled law satisfying a search predicate.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    /// Zero-based trial index.
    pub trial: usize,
    pub law: DiscreteLaw,
}

/// The law sampled at `trial` of a search under `spec`.
pub fn law_for_trial(dag: &Dag, spec: &RandomLawSpec, trial: usize) -> Result<DiscreteLaw> {
    DiscreteLaw::random_stream(dag, spec, trial as u64)
}

/// Returns the first of `max_trials` sampled laws satisfying `predicate`.
pub fn search_witness<F>(
    dag: &Dag,
    spec: &RandomLawSpec,
    max_trials: usize,
    mut predicate: F,
) -> Result<Option<Witness>>
where
    F: FnMut(&DiscreteLaw) -> Result<bool>,
{
    for trial in 0..max_trials {
        let law = law_for_trial(dag, spec, trial)?;
        if predicate(&law)? {
            return Ok(Some(Witness { trial, law }));
        }
    }
    Ok(None)
}

/// Gap above which a sampled law counts as violating the identification
/// identity of a time dependent set.
pub const FALSIFICATION_TOLERANCE: f64 = 1e-9;

/// Every combination of treatment levels in the law's supports.
pub fn treatment_levels(law: &DiscreteLaw, q: &Query) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = vec![Vec::new()];
    for &a in q.treatments() {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                law.support(a).iter().map(move |&x| {
                    let mut next = prefix.clone();
                    next.push(x);
                    next
                })
            })
            .collect();
    }
    out
}

/// Runs the graphical criterion, then samples up to `trials` laws looking
/// for one where the iterated-expectation functional of `z` differs from the
/// interventional distribution at some treatment level.
pub fn falsify_time_dep(
    g: &Dag,
    q: &Query,
    z: &TimeDepSet,
    spec: &RandomLawSpec,
    trials: usize,
) -> Result<TimeDepReport> {
    let mut report = is_valid_time_dep(g, q, z)?;
    let witness = search_witness(g, spec, trials, |law| {
        let joint = Joint::new(law)?;
        for levels in treatment_levels(law, q) {
            if iterated_identity_gap(&joint, q, &levels, z)? > FALSIFICATION_TOLERANCE {
                return Ok(true);
            }
        }
        Ok(false)
    })?;
    report.oracle_falsified = match (witness, report.sufficient_criterion) {
        (Some(w), _) => Falsification::Falsified { trial: w.trial },
        (None, true) => Falsification::NotFalsified,
        (None, false) => Falsification::Unknown,
    };
    Ok(report)
}

/// Zero-mean direction `s(x) = x_index - E[x_index]` under row `config` of `v`.
pub fn centered_direction(law: &DiscreteLaw, v: Vertex, config: usize) -> Vec<f64> {
    let row = &law.rows(v)[config];
    let mean: f64 = row.iter().enumerate().map(|(i, p)| i as f64 * p).sum();
    (0..row.len()).map(|i| i as f64 - mean).collect()
}

/// Score of the submodel that tilts row `config` of `v` along `direction`:
/// `I(pa(v) = config) s(v)`.
pub fn row_score(joint: &Joint, v: Vertex, config: usize, direction: &[f64]) -> RandomVar {
    let law = joint.law();
    (0..joint.len())
        .map(|s| {
            let state = joint.state(s);
            if law.config_index(v, &state) == config {
                direction[state[v]]
            } else {
                0.0
            }
        })
        .collect()
}

/// Central difference of the interventional mean along the tilted row.
pub fn pathwise_derivative(
    law: &DiscreteLaw,
    q: &Query,
    levels: &[f64],
    v: Vertex,
    config: usize,
    direction: &[f64],
    h: f64,
) -> Result<f64> {
    let up = interventional_mean(&law.perturb_row(v, config, direction, h)?, q, levels)?;
    let down = interventional_mean(&law.perturb_row(v, config, direction, -h)?, q, levels)?;
    Ok((up - down) / (2.0 * h))
}

/// Law on a graph with two exogenous confounders `O1, O2`, both parents of
/// treatment and outcome, for which `E[Y | A, O] = O1 + O2 + α O1 O2`.
///
/// The confounders are uniform on `{-1, 1}`, the treatment table is fixed
/// and `Y` is that mean plus or minus one with equal probability. `Y` is the
/// only vertex with zero entries in its table.
pub fn interaction_law(g: &Dag, q: &Query, alpha: f64) -> Result<DiscreteLaw> {
    let a = q.point()?;
    let y = q.outcome();
    let o = optimal_set(g, q)?;
    let shape_ok = g.len() == 4
        && o.len() == 2
        && optimal_minimal_set(g, q)? == o
        && o.iter().all(|v| g.parents(v).is_empty())
        && g.parents(a).len() == 2
        && g.parents(y).len() == 3;
    if !shape_ok {
        return Err(Error::InvalidLaw(
            "expected two exogenous confounders of treatment and outcome".into(),
        ));
    }
    let [o1, o2]: [Vertex; 2] = o.to_vec().try_into().expect("two confounders");
    let mean = |x1: f64, x2: f64| x1 + x2 + alpha * x1 * x2;
    let mut outcomes: Vec<f64> = Vec::new();
    for x1 in [-1.0, 1.0] {
        for x2 in [-1.0, 1.0] {
            for d in [-1.0, 1.0] {
                let v = mean(x1, x2) + d;
                if !outcomes.contains(&v) {
                    outcomes.push(v);
                }
            }
        }
    }
    outcomes.sort_by(f64::total_cmp);
    let mut support = vec![Vec::new(); 4];
    let mut cpt = vec![Vec::new(); 4];
    let mut epsilon = vec![0.05; 4];
    for v in [o1, o2] {
        support[v] = vec![-1.0, 1.0];
        cpt[v] = vec![vec![0.5, 0.5]];
    }
    support[a] = vec![0.0, 1.0];
    cpt[a] = [0.3, 0.6, 0.5, 0.75]
        .iter()
        .map(|&p| vec![1.0 - p, p])
        .collect();
    support[y] = outcomes.clone();
    epsilon[y] = 0.0;
    let index = |v: f64| outcomes.iter().position(|&x| x == v).expect("listed outcome");
    let values = |v: Vertex| support[v].clone();
    let parents = g.parents(y).to_vec();
    let mut rows = Vec::new();
    let radix: Vec<Vec<f64>> = parents.iter().map(|&p| values(p)).collect();
    let configs: usize = radix.iter().map(Vec::len).product();
    for c in 0..configs {
        let mut rest = c;
        let mut assignment = vec![0.0; parents.len()];
        for i in (0..parents.len()).rev() {
            let k = radix[i].len();
            assignment[i] = radix[i][rest % k];
            rest /= k;
        }
        let pick = |v: Vertex| assignment[parents.iter().position(|&p| p == v).expect("parent")];
        let m = mean(pick(o1), pick(o2));
        let mut row = vec![0.0; outcomes.len()];
        row[index(m - 1.0)] += 0.5;
        row[index(m + 1.0)] += 0.5;
        rows.push(row);
    }
    cpt[y] = rows;
    DiscreteLaw::with_positivity(g.clone(), support, cpt, &epsilon)
}
