use crate::efficiency::{irrelevant_nodes, EifExpr, Term};
use crate::error::{Error, Result};
use crate::graph::{Query, Vertex, VertexSet};
use crate::timedep::TimeDepSet;

use super::joint::{Joint, RandomVar};
use super::law::DiscreteLaw;

fn check_levels(q: &Query, levels: &[f64]) -> Result<()> {
    if levels.len() != q.treatments().len() {
        return Err(Error::InvalidQuery(format!(
            "{} treatment levels given for {} treatments",
            levels.len(),
            q.treatments().len()
        )));
    }
    Ok(())
}

fn pairs(q: &Query, levels: &[f64]) -> Vec<(Vertex, f64)> {
    q.treatments().iter().copied().zip(levels.iter().copied()).collect()
}

/// `E[Y_a]` by the truncated factorization: treatments are fixed at their
/// levels and every other vertex follows its conditional table.
pub fn interventional_mean(law: &DiscreteLaw, q: &Query, levels: &[f64]) -> Result<f64> {
    check_levels(q, levels)?;
    let g = law.dag();
    let mut fixed = vec![None; g.len()];
    for (v, x) in pairs(q, levels) {
        fixed[v] = Some(law.value_index(v, x)?);
    }
    let free: u128 = (0..g.len())
        .filter(|&v| fixed[v].is_none())
        .map(|v| law.support(v).len() as u128)
        .product();
    if free > super::law::DEFAULT_MAX_STATES {
        return Err(Error::GuardExceeded {
            what: "joint state space",
            size: free,
            limit: super::law::DEFAULT_MAX_STATES,
        });
    }
    let order = g.topological_sort(&g.all());
    let mut state = vec![0usize; g.len()];
    Ok(truncated(law, &order, &fixed, q.outcome(), 0, 1.0, &mut state))
}

fn truncated(
    law: &DiscreteLaw,
    order: &[Vertex],
    fixed: &[Option<usize>],
    y: Vertex,
    depth: usize,
    mass: f64,
    state: &mut [usize],
) -> f64 {
    if depth == order.len() {
        return mass * law.support(y)[state[y]];
    }
    let v = order[depth];
    if let Some(i) = fixed[v] {
        state[v] = i;
        return truncated(law, order, fixed, y, depth + 1, mass, state);
    }
    let row = law.rows(v)[law.config_index(v, state)].clone();
    let mut total = 0.0;
    for (i, p) in row.into_iter().enumerate() {
        if p > 0.0 {
            state[v] = i;
            total += truncated(law, order, fixed, y, depth + 1, mass * p, state);
        }
    }
    total
}

/// `E[∏ I(A_k = a_k) / P(A_k = a_k | pa(A_k)) · f]` using the conditional
/// tables for the treatment probabilities.
pub fn ipw_mean_of(joint: &Joint, q: &Query, levels: &[f64], f: &[f64]) -> Result<f64> {
    check_levels(q, levels)?;
    let law = joint.law();
    let mut w = joint.constant(1.0);
    for (v, x) in pairs(q, levels) {
        let i = law.value_index(v, x)?;
        for (s, ws) in w.iter_mut().enumerate() {
            if joint.index(s, v) == i {
                *ws /= law.prob(v, &joint.state(s), i);
            } else {
                *ws = 0.0;
            }
        }
    }
    Ok(joint.expect(&w.iter().zip(f).map(|(a, b)| a * b).collect::<Vec<_>>()))
}

/// [`ipw_mean_of`] applied to the outcome.
pub fn ipw_mean(joint: &Joint, q: &Query, levels: &[f64]) -> Result<f64> {
    ipw_mean_of(joint, q, levels, &joint.value(q.outcome()))
}

/// `I_a(A)`, the joint treatment indicator.
pub fn treatment_indicator(joint: &Joint, q: &Query, levels: &[f64]) -> Result<RandomVar> {
    check_levels(q, levels)?;
    joint.indicator_all(&pairs(q, levels))
}

/// `P(A = a | Z)`.
pub fn propensity(joint: &Joint, q: &Query, levels: &[f64], z: &VertexSet) -> Result<RandomVar> {
    Ok(joint.cond_expect(&treatment_indicator(joint, q, levels)?, z))
}

/// `E[Y | A = a, Z]`.
pub fn outcome_regression(joint: &Joint, q: &Query, levels: &[f64], z: &VertexSet) -> Result<RandomVar> {
    let ind = treatment_indicator(joint, q, levels)?;
    Ok(joint.cond_expect_given(&joint.value(q.outcome()), z, &ind))
}

/// The influence function of the estimator adjusting for `z`:
/// `I/π(Z) (Y - b(Z)) + b(Z) - χ`.
pub fn psi_ti(joint: &Joint, q: &Query, levels: &[f64], z: &VertexSet) -> Result<RandomVar> {
    let chi = interventional_mean(joint.law(), q, levels)?;
    let ind = treatment_indicator(joint, q, levels)?;
    let pi = joint.cond_expect(&ind, z);
    let y = joint.value(q.outcome());
    let b = joint.cond_expect_given(&y, z, &ind);
    Ok((0..joint.len())
        .map(|s| ind[s] / pi[s] * (y[s] - b[s]) + b[s] - chi)
        .collect())
}

/// Iterated regressions and propensities for a time dependent set.
///
/// Index `k` runs over treatments; `cum_ind[k]` is `I(Ā_k = ā_k)` and
/// `lambda[k]` is `∏_{j≤k} π_j`.
#[derive(Clone, Debug)]
pub struct Sequential {
    pub b: Vec<RandomVar>,
    pub pi: Vec<RandomVar>,
    pub ind: Vec<RandomVar>,
    pub cum_ind: Vec<RandomVar>,
    pub lambda: Vec<RandomVar>,
    /// Cumulative blocks `Z̄_k`.
    pub past: Vec<VertexSet>,
}

impl Sequential {
    /// `I(Ā_{k-1} = ā_{k-1}) / λ_{k-1}` with the empty product equal to one.
    pub fn weight_before(&self, k: usize, s: usize) -> f64 {
        if k == 0 {
            1.0
        } else {
            self.cum_ind[k - 1][s] / self.lambda[k - 1][s]
        }
    }
}

/// Builds `b_{ā_k}(Z̄_k)`, `π_{a_k}(Z̄_k)` and the cumulative weights, with
/// the innermost regression taken of `f`.
pub fn sequential_of(
    joint: &Joint,
    q: &Query,
    levels: &[f64],
    z: &TimeDepSet,
    f: &[f64],
) -> Result<Sequential> {
    check_levels(q, levels)?;
    let p1 = q.treatments().len();
    if z.blocks.len() != p1 {
        return Err(Error::InvalidSet(format!(
            "{} blocks given for {} treatments",
            z.blocks.len(),
            p1
        )));
    }
    let n = joint.len();
    let mut ind = Vec::with_capacity(p1);
    let mut cum_ind: Vec<RandomVar> = Vec::with_capacity(p1);
    for (k, (v, x)) in pairs(q, levels).into_iter().enumerate() {
        let i = joint.indicator(v, x)?;
        let c = match k {
            0 => i.clone(),
            _ => (0..n).map(|s| cum_ind[k - 1][s] * i[s]).collect(),
        };
        ind.push(i);
        cum_ind.push(c);
    }
    let past: Vec<VertexSet> = (0..p1).map(|k| z.cumulative(k)).collect();
    let mut pi = Vec::with_capacity(p1);
    let mut lambda: Vec<RandomVar> = Vec::with_capacity(p1);
    for k in 0..p1 {
        let p = match k {
            0 => joint.cond_expect(&ind[0], &past[0]),
            _ => joint.cond_expect_given(&ind[k], &past[k], &cum_ind[k - 1]),
        };
        let l = match k {
            0 => p.clone(),
            _ => (0..n).map(|s| lambda[k - 1][s] * p[s]).collect(),
        };
        pi.push(p);
        lambda.push(l);
    }
    let mut b = vec![Vec::new(); p1];
    let mut inner = f.to_vec();
    for k in (0..p1).rev() {
        b[k] = joint.cond_expect_given(&inner, &past[k], &cum_ind[k]);
        inner = b[k].clone();
    }
    Ok(Sequential {
        b,
        pi,
        ind,
        cum_ind,
        lambda,
        past,
    })
}

/// [`sequential_of`] applied to the outcome.
pub fn sequential(joint: &Joint, q: &Query, levels: &[f64], z: &TimeDepSet) -> Result<Sequential> {
    sequential_of(joint, q, levels, z, &joint.value(q.outcome()))
}

/// The iterated-expectation functional of `f` for a time dependent set.
pub fn iterated_mean_of(
    joint: &Joint,
    q: &Query,
    levels: &[f64],
    z: &TimeDepSet,
    f: &[f64],
) -> Result<f64> {
    let seq = sequential_of(joint, q, levels, z, f)?;
    Ok(joint.expect(&seq.b[0]))
}

/// The influence function of the sequential estimator adjusting for `z`:
/// `I_a/λ_p (Y - χ) - Σ_k g_k`.
pub fn psi_td(joint: &Joint, q: &Query, levels: &[f64], z: &TimeDepSet) -> Result<RandomVar> {
    let chi = interventional_mean(joint.law(), q, levels)?;
    let seq = sequential(joint, q, levels, z)?;
    let y = joint.value(q.outcome());
    let p = q.treatments().len() - 1;
    Ok((0..joint.len())
        .map(|s| {
            let lead = seq.cum_ind[p][s] / seq.lambda[p][s] * (y[s] - chi);
            let correction: f64 = (0..=p)
                .map(|k| {
                    seq.weight_before(k, s)
                        * (seq.ind[k][s] / seq.pi[k][s] - 1.0)
                        * (seq.b[k][s] - chi)
                })
                .sum();
            lead - correction
        })
        .collect())
}

/// Largest gap, over outcome thresholds, between the inverse probability
/// weighted and iterated-expectation functionals of `I(Y ≤ y)`.
pub fn iterated_identity_gap(
    joint: &Joint,
    q: &Query,
    levels: &[f64],
    z: &TimeDepSet,
) -> Result<f64> {
    let y = q.outcome();
    let values = joint.value(y);
    let mut gap: f64 = 0.0;
    for &t in joint.law().support(y) {
        let f: RandomVar = values.iter().map(|&v| if v <= t { 1.0 } else { 0.0 }).collect();
        let ipw = ipw_mean_of(joint, q, levels, &f)?;
        let iterated = iterated_mean_of(joint, q, levels, z, &f)?;
        gap = gap.max((ipw - iterated).abs());
    }
    Ok(gap)
}

/// Pointwise value of a symbolic influence function.
pub fn eval_eif(joint: &Joint, q: &Query, level: f64, e: &EifExpr) -> Result<RandomVar> {
    let g = joint.law().dag();
    let basis = e.basis();
    let a = g.vertex(&basis.treatment)?;
    let y = g.vertex(&basis.outcome)?;
    if q.point()? != a || q.outcome() != y {
        return Err(Error::InvalidQuery("expression was built for another query".into()));
    }
    let o = g.set(&basis.adjustment)?;
    let o_min = g.set(&basis.minimal)?;
    let chi = interventional_mean(joint.law(), q, &[level])?;
    let ind = joint.indicator(a, level)?;
    let yv = joint.value(y);
    let b = joint.cond_expect_given(&yv, &o, &ind);
    let pi = joint.cond_expect(&ind, &o_min);
    let ipw: RandomVar = (0..joint.len()).map(|s| ind[s] / pi[s]).collect();
    let t: RandomVar = (0..joint.len()).map(|s| ipw[s] * yv[s]).collect();
    let mut out = joint.constant(0.0);
    for (term, c) in e.terms() {
        let value: RandomVar = match term {
            Term::Chi => joint.constant(chi),
            Term::BAtom => b.clone(),
            Term::BCond(s) => joint.cond_expect(&b, &g.set(s)?),
            Term::TCond(s) => joint.cond_expect(&t, &g.set(s)?),
            Term::IpwY => t.clone(),
            Term::IpwB => (0..joint.len()).map(|s| ipw[s] * b[s]).collect(),
            Term::IpwResidual => (0..joint.len()).map(|s| ipw[s] * (yv[s] - b[s])).collect(),
        };
        out.iter_mut()
            .zip(value)
            .for_each(|(o, v)| *o += c as f64 * v);
    }
    Ok(out)
}

/// The efficient influence function as the sum over relevant non-treatment
/// vertices of `E[J | V, pa(V)] - E[J | pa(V)]`, with
/// `J = I_a(A) Y / P(A = a | pa(A))`.
pub fn reference_eif(joint: &Joint, q: &Query, level: f64) -> Result<RandomVar> {
    let g = joint.law().dag();
    let a = q.point()?;
    let irrel = irrelevant_nodes(g, q)?;
    let ind = joint.indicator(a, level)?;
    let pa_a: VertexSet = g.parents(a).iter().copied().collect();
    let pi = joint.cond_expect(&ind, &pa_a);
    let yv = joint.value(q.outcome());
    let j: RandomVar = (0..joint.len()).map(|s| ind[s] * yv[s] / pi[s]).collect();
    let mut out = joint.constant(0.0);
    for v in 0..g.len() {
        if v == a || irrel.contains(v) {
            continue;
        }
        let pa: VertexSet = g.parents(v).iter().copied().collect();
        let with = joint.cond_expect(&j, &pa.with(v));
        let without = joint.cond_expect(&j, &pa);
        for s in 0..joint.len() {
            out[s] += with[s] - without[s];
        }
    }
    Ok(out)
}
