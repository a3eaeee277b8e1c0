//! Variance decompositions for adjusted estimators, each verified by
//! computing both sides independently on an enumerated law.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::adjustment::is_valid_adjustment;
use crate::error::{Error, Result};
use crate::graph::{Dag, Query, VertexSet};
use crate::timedep::{is_valid_time_dep, TimeDepSet};

use super::estimands::{psi_td, psi_ti, sequential, treatment_indicator};
use super::joint::{Joint, RandomVar};

/// Absolute tolerance for a verified identity.
pub const IDENTITY_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Identity {
    /// Adding precision covariates `G` to a valid set `B`.
    Supplementation,
    /// Dropping overadjustment covariates `B` from a valid set `G ∪ B`.
    Deletion,
    /// Comparing valid sets `B` and `G` through `G ∪ B`.
    Comparison,
    /// Blockwise supplementation of a time dependent set.
    TimeDepSupplementation,
    /// Blockwise deletion from a time dependent set.
    TimeDepDeletion,
    /// Comparison of two time dependent sets.
    TimeDepComparison,
    /// `E[1/π(Z₂) | A = a, Z₁] = 1/π(Z₁)` when `A ⟂ Z₁ \ Z₂ | Z₂`.
    InversePropensity,
}

impl Identity {
    pub const ALL: [Identity; 7] = [
        Identity::Supplementation,
        Identity::Deletion,
        Identity::Comparison,
        Identity::TimeDepSupplementation,
        Identity::TimeDepDeletion,
        Identity::TimeDepComparison,
        Identity::InversePropensity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Identity::Supplementation => "supplementation",
            Identity::Deletion => "deletion",
            Identity::Comparison => "comparison",
            Identity::TimeDepSupplementation => "td-supplementation",
            Identity::TimeDepDeletion => "td-deletion",
            Identity::TimeDepComparison => "td-comparison",
            Identity::InversePropensity => "inverse-propensity",
        }
    }

    fn time_dependent(self) -> bool {
        matches!(
            self,
            Identity::TimeDepSupplementation | Identity::TimeDepDeletion | Identity::TimeDepComparison
        )
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Identity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Identity::ALL
            .into_iter()
            .find(|i| i.name() == s)
            .ok_or_else(|| Error::InvalidQuery(format!("unknown identity `{s}`")))
    }
}

/// Which functional the variances refer to.
#[derive(Clone, Debug, PartialEq)]
pub enum Contrast {
    /// A single interventional mean at the given treatment levels.
    Level(Vec<f64>),
    /// `E[Y_1] - E[Y_0]` for binary treatments, checked against its
    /// dedicated display.
    Ate,
    /// `Σ c_a E[Y_a]`.
    General(Vec<(f64, Vec<f64>)>),
}

impl Contrast {
    fn terms(&self, q: &Query) -> Vec<(f64, Vec<f64>)> {
        let p = q.treatments().len();
        match self {
            Contrast::Level(a) => vec![(1.0, a.clone())],
            Contrast::Ate => vec![(1.0, vec![1.0; p]), (-1.0, vec![0.0; p])],
            Contrast::General(t) => t.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityReport {
    pub identity: Identity,
    pub lhs: f64,
    pub rhs: f64,
    pub discrepancy: f64,
    pub pass: bool,
}

impl IdentityReport {
    fn new(identity: Identity, lhs: f64, rhs: f64) -> Self {
        let discrepancy = (lhs - rhs).abs();
        IdentityReport {
            identity,
            lhs,
            rhs,
            discrepancy,
            pass: discrepancy <= IDENTITY_TOLERANCE,
        }
    }
}

fn require(holds: bool, what: impl FnOnce() -> String) -> Result<()> {
    if holds {
        Ok(())
    } else {
        Err(Error::Hypothesis(what()))
    }
}

fn require_dsep(g: &Dag, x: &VertexSet, y: &VertexSet, z: &VertexSet) -> Result<()> {
    require(g.independent(x, y, z), || {
        format!(
            "{} _||_ {} | {} fails",
            g.format_set(x),
            g.format_set(y),
            g.format_set(z)
        )
    })
}

fn require_valid(g: &Dag, q: &Query, z: &VertexSet) -> Result<()> {
    let report = is_valid_adjustment(g, q, z)?;
    require(report.valid, || format!("{} is not an adjustment set", g.format_set(z)))
}

fn require_valid_td(g: &Dag, q: &Query, z: &TimeDepSet) -> Result<()> {
    let report = is_valid_time_dep(g, q, z)?;
    require(report.sufficient_criterion, || {
        format!("{} fails the sequential criterion", z.format(g))
    })
}

fn require_disjoint(g: &Dag, x: &VertexSet, y: &VertexSet) -> Result<()> {
    match x.intersection(y).first() {
        Some(v) => Err(Error::Overlap(g.name(v).to_string())),
        None => Ok(()),
    }
}

fn map2(a: &[f64], b: &[f64], f: impl Fn(f64, f64) -> f64) -> RandomVar {
    a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect()
}

/// Checks that the graph satisfies the identity's hypotheses, then compares
/// the variance difference with its closed form.
///
/// Time independent identities use `g.all()` and `b.all()`. For
/// [`Identity::InversePropensity`], `g` is `Z₁`, `b` is `Z₂` and the
/// report holds the largest pointwise gap, with `lhs` and `rhs` the means
/// of both sides.
pub fn verify_identity(
    joint: &Joint,
    q: &Query,
    identity: Identity,
    g_set: &TimeDepSet,
    b_set: &TimeDepSet,
    contrast: &Contrast,
) -> Result<IdentityReport> {
    let dag = joint.law().dag();
    let terms = contrast.terms(q);
    if identity.time_dependent() {
        g_set.validate(dag, q)?;
        b_set.validate(dag, q)?;
    }
    let gs = g_set.all();
    let bs = b_set.all();
    let a = q.treatment_set();
    let y = VertexSet::singleton(q.outcome());
    match identity {
        Identity::Supplementation => {
            require_valid(dag, q, &bs)?;
            require_disjoint(dag, &gs, &bs)?;
            require_dsep(dag, &a, &gs, &bs)?;
            let union = gs.union(&bs);
            let lhs = ti_variance(joint, q, &terms, &bs)? - ti_variance(joint, q, &terms, &union)?;
            let rhs = match contrast {
                Contrast::Level(l) => supplementation_level(joint, q, l, &gs, &bs)?,
                Contrast::Ate => supplementation_ate(joint, q, &gs, &bs)?,
                Contrast::General(_) => supplementation_contrast(joint, q, &terms, &gs, &bs)?,
            };
            Ok(IdentityReport::new(identity, lhs, rhs))
        }
        Identity::Deletion => {
            let union = gs.union(&bs);
            require_disjoint(dag, &gs, &bs)?;
            require_valid(dag, q, &union)?;
            require_dsep(dag, &y, &bs, &gs.union(&a))?;
            let lhs = ti_variance(joint, q, &terms, &union)? - ti_variance(joint, q, &terms, &gs)?;
            let rhs = deletion(joint, q, &terms, &gs, &bs)?;
            Ok(IdentityReport::new(identity, lhs, rhs))
        }
        Identity::Comparison => {
            require_valid(dag, q, &gs)?;
            require_valid(dag, q, &bs)?;
            require_dsep(dag, &a, &gs.difference(&bs), &bs)?;
            require_dsep(dag, &y, &bs.difference(&gs), &gs.union(&a))?;
            let lhs = ti_variance(joint, q, &terms, &bs)? - ti_variance(joint, q, &terms, &gs)?;
            let precision = gs.difference(&bs);
            let first = match contrast {
                Contrast::Level(l) => supplementation_level(joint, q, l, &precision, &bs)?,
                Contrast::Ate => supplementation_ate(joint, q, &precision, &bs)?,
                Contrast::General(_) => supplementation_contrast(joint, q, &terms, &precision, &bs)?,
            };
            let second = deletion(joint, q, &terms, &gs, &bs.difference(&gs))?;
            Ok(IdentityReport::new(identity, lhs, first + second))
        }
        Identity::TimeDepSupplementation => {
            require_valid_td(dag, q, b_set)?;
            require_disjoint(dag, &gs, &bs)?;
            for (j, &aj) in q.treatments().iter().enumerate() {
                let past: VertexSet = q.treatments()[..j].iter().copied().collect();
                require_dsep(
                    dag,
                    &VertexSet::singleton(aj),
                    &g_set.cumulative(j),
                    &b_set.cumulative(j).union(&past),
                )?;
            }
            let union = g_set.merge(b_set);
            let lhs = td_variance(joint, q, &terms, b_set)? - td_variance(joint, q, &terms, &union)?;
            let rhs = match contrast {
                Contrast::Level(l) => td_supplementation_level(joint, q, l, &union, b_set)?,
                _ => td_supplementation_contrast(joint, q, &terms, &union, b_set)?,
            };
            Ok(IdentityReport::new(identity, lhs, rhs))
        }
        Identity::TimeDepDeletion => {
            require_disjoint(dag, &gs, &bs)?;
            let union = g_set.merge(b_set);
            require_valid_td(dag, q, &union)?;
            require_dsep(dag, &y, &bs, &gs.union(&a))?;
            for (j, _) in q.treatments().iter().enumerate().skip(1) {
                let past: VertexSet = q.treatments()[..j].iter().copied().collect();
                require_dsep(
                    dag,
                    &g_set.blocks[j],
                    &b_set.cumulative(j - 1),
                    &g_set.cumulative(j - 1).union(&past),
                )?;
            }
            let lhs = td_variance(joint, q, &terms, &union)? - td_variance(joint, q, &terms, g_set)?;
            let rhs = td_deletion(joint, q, &terms, g_set, &union)?;
            Ok(IdentityReport::new(identity, lhs, rhs))
        }
        Identity::TimeDepComparison => {
            require_valid_td(dag, q, g_set)?;
            require_valid_td(dag, q, b_set)?;
            for (j, &aj) in q.treatments().iter().enumerate() {
                let past: VertexSet = q.treatments()[..j].iter().copied().collect();
                let bj = b_set.cumulative(j);
                require_dsep(
                    dag,
                    &VertexSet::singleton(aj),
                    &g_set.cumulative(j).difference(&bj),
                    &bj.union(&past),
                )?;
            }
            require_dsep(dag, &y, &bs.difference(&gs), &gs.union(&a))?;
            for (j, _) in q.treatments().iter().enumerate().skip(1) {
                let past: VertexSet = q.treatments()[..j].iter().copied().collect();
                let gprev = g_set.cumulative(j - 1);
                require_dsep(
                    dag,
                    &g_set.blocks[j],
                    &b_set.cumulative(j - 1).difference(&gprev),
                    &gprev.union(&past),
                )?;
            }
            let union = g_set.merge(b_set);
            let lhs = td_variance(joint, q, &terms, b_set)? - td_variance(joint, q, &terms, g_set)?;
            let first = match contrast {
                Contrast::Level(l) => td_supplementation_level(joint, q, l, &union, b_set)?,
                _ => td_supplementation_contrast(joint, q, &terms, &union, b_set)?,
            };
            let second = td_deletion(joint, q, &terms, g_set, &union)?;
            Ok(IdentityReport::new(identity, lhs, first + second))
        }
        Identity::InversePropensity => {
            let levels = match contrast {
                Contrast::Level(l) => l.clone(),
                _ => {
                    return Err(Error::InvalidQuery(
                        "inverse-propensity needs a single treatment level".into(),
                    ))
                }
            };
            require_dsep(dag, &a, &gs.difference(&bs), &bs)?;
            let ind = treatment_indicator(joint, q, &levels)?;
            let pi_z2 = joint.cond_expect(&ind, &bs);
            let inv_z2: RandomVar = pi_z2.iter().map(|p| 1.0 / p).collect();
            let lhs = joint.cond_expect_given(&inv_z2, &gs, &ind);
            let rhs: RandomVar = joint.cond_expect(&ind, &gs).iter().map(|p| 1.0 / p).collect();
            let gap = lhs
                .iter()
                .zip(&rhs)
                .map(|(l, r)| (l - r).abs())
                .fold(0.0, f64::max);
            Ok(IdentityReport {
                identity,
                lhs: joint.expect(&lhs),
                rhs: joint.expect(&rhs),
                discrepancy: gap,
                pass: gap <= IDENTITY_TOLERANCE,
            })
        }
    }
}

fn combine(joint: &Joint, parts: Vec<(f64, RandomVar)>) -> RandomVar {
    let mut out = joint.constant(0.0);
    for (c, f) in parts {
        out.iter_mut().zip(f).for_each(|(o, x)| *o += c * x);
    }
    out
}

fn ti_variance(joint: &Joint, q: &Query, terms: &[(f64, Vec<f64>)], z: &VertexSet) -> Result<f64> {
    let parts = terms
        .iter()
        .map(|(c, a)| Ok((*c, psi_ti(joint, q, a, z)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(joint.variance(&combine(joint, parts)))
}

fn td_variance(joint: &Joint, q: &Query, terms: &[(f64, Vec<f64>)], z: &TimeDepSet) -> Result<f64> {
    let parts = terms
        .iter()
        .map(|(c, a)| Ok((*c, psi_td(joint, q, a, z)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(joint.variance(&combine(joint, parts)))
}

struct Nuisance {
    ind: RandomVar,
    b: RandomVar,
}

fn nuisance(joint: &Joint, q: &Query, levels: &[f64], z: &VertexSet) -> Result<Nuisance> {
    let ind = treatment_indicator(joint, q, levels)?;
    let b = joint.cond_expect_given(&joint.value(q.outcome()), z, &ind);
    Ok(Nuisance { ind, b })
}

/// `E[(1/π(B) - 1) var(b(G,B) | B)]`.
fn supplementation_level(
    joint: &Joint,
    q: &Query,
    levels: &[f64],
    g: &VertexSet,
    b: &VertexSet,
) -> Result<f64> {
    let full = nuisance(joint, q, levels, &g.union(b))?;
    let pi_b = joint.cond_expect(&full.ind, b);
    let v = joint.cond_variance(&full.b, b);
    Ok(joint.expect(&map2(&pi_b, &v, |p, v| (1.0 / p - 1.0) * v)))
}

/// The binary-treatment display: both level terms plus
/// `2 E[cov(b_1(G,B), b_0(G,B) | B)]`.
fn supplementation_ate(joint: &Joint, q: &Query, g: &VertexSet, b: &VertexSet) -> Result<f64> {
    let p = q.treatments().len();
    let one = vec![1.0; p];
    let zero = vec![0.0; p];
    let union = g.union(b);
    let b1 = nuisance(joint, q, &one, &union)?.b;
    let b0 = nuisance(joint, q, &zero, &union)?.b;
    let cov = joint.expect(&joint.cond_covariance(&b1, &b0, b));
    Ok(supplementation_level(joint, q, &one, g, b)?
        + supplementation_level(joint, q, &zero, g, b)?
        + 2.0 * cov)
}

/// `c' var(Q) c` with `Q_a = (I_a/π_a(G,B) - 1)(b_a(G,B) - b_a(B))`.
fn supplementation_contrast(
    joint: &Joint,
    q: &Query,
    terms: &[(f64, Vec<f64>)],
    g: &VertexSet,
    b: &VertexSet,
) -> Result<f64> {
    let union = g.union(b);
    let parts = terms
        .iter()
        .map(|(c, a)| {
            let full = nuisance(joint, q, a, &union)?;
            let reduced = nuisance(joint, q, a, b)?;
            let pi = joint.cond_expect(&full.ind, &union);
            let qa: RandomVar = (0..joint.len())
                .map(|s| (full.ind[s] / pi[s] - 1.0) * (full.b[s] - reduced.b[s]))
                .collect();
            Ok((*c, qa))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(joint.variance(&combine(joint, parts)))
}

/// `Σ c_a² E[π_a(G) var(Y | A=a, G) var(1/π_a(G,B) | A=a, G)]`.
fn deletion(
    joint: &Joint,
    q: &Query,
    terms: &[(f64, Vec<f64>)],
    g: &VertexSet,
    b: &VertexSet,
) -> Result<f64> {
    let union = g.union(b);
    let y = joint.value(q.outcome());
    let mut total = 0.0;
    for (c, a) in terms {
        let ind = treatment_indicator(joint, q, a)?;
        let pi_g = joint.cond_expect(&ind, g);
        let inv: RandomVar = joint.cond_expect(&ind, &union).iter().map(|p| 1.0 / p).collect();
        let var_y = joint.cond_variance_given(&y, g, &ind);
        let var_inv = joint.cond_variance_given(&inv, g, &ind);
        let integrand: RandomVar = (0..joint.len()).map(|s| pi_g[s] * var_y[s] * var_inv[s]).collect();
        total += c * c * joint.expect(&integrand);
    }
    Ok(total)
}

/// `Σ_k E[I_{k-1}/λ_{k-1}(B)² (1/π_k(B̄_k) - 1) var(b_k(Ḡ,B̄) | Ā_{k-1}=ā, B̄_k)]`.
fn td_supplementation_level(
    joint: &Joint,
    q: &Query,
    levels: &[f64],
    union: &TimeDepSet,
    b: &TimeDepSet,
) -> Result<f64> {
    let full = sequential(joint, q, levels, union)?;
    let reduced = sequential(joint, q, levels, b)?;
    let mut total = 0.0;
    for k in 0..q.treatments().len() {
        let event = match k {
            0 => joint.constant(1.0),
            _ => reduced.cum_ind[k - 1].clone(),
        };
        let v = joint.cond_variance_given(&full.b[k], &reduced.past[k], &event);
        let integrand: RandomVar = (0..joint.len())
            .map(|s| {
                let w = reduced.weight_before(k, s);
                if w == 0.0 {
                    return 0.0;
                }
                let w2 = if k == 0 { 1.0 } else { w / reduced.lambda[k - 1][s] };
                w2 * (1.0 / reduced.pi[k][s] - 1.0) * v[s]
            })
            .collect();
        total += joint.expect(&integrand);
    }
    Ok(total)
}

/// `Σ_k var(t_k)` with
/// `t_k = Σ_a c_a I_{k-1}/λ_{k-1}(B) (I_k/π_k(B̄_k) - 1)(b_k(Ḡ,B̄) - b_k(B̄))`.
fn td_supplementation_contrast(
    joint: &Joint,
    q: &Query,
    terms: &[(f64, Vec<f64>)],
    union: &TimeDepSet,
    b: &TimeDepSet,
) -> Result<f64> {
    let seqs = terms
        .iter()
        .map(|(c, a)| Ok((*c, sequential(joint, q, a, union)?, sequential(joint, q, a, b)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut total = 0.0;
    for k in 0..q.treatments().len() {
        let parts = seqs
            .iter()
            .map(|(c, full, reduced)| {
                let t: RandomVar = (0..joint.len())
                    .map(|s| {
                        let w = reduced.weight_before(k, s);
                        if w == 0.0 {
                            return 0.0;
                        }
                        w * (reduced.ind[k][s] / reduced.pi[k][s] - 1.0)
                            * (full.b[k][s] - reduced.b[k][s])
                    })
                    .collect();
                (*c, t)
            })
            .collect();
        total += joint.variance(&combine(joint, parts));
    }
    Ok(total)
}

/// `E[var(Σ c_a I_a/λ_p(G,B)(Y - b_p(G,B)) | Y, Ḡ_p, Ā_p)]` plus
/// `Σ_k E[var(Σ c_a I_{k-1}/λ_{k-1}(G,B)(b_k(G,B) - b_{k-1}(G,B)) | Ḡ_k, Ā_{k-1})]`.
fn td_deletion(
    joint: &Joint,
    q: &Query,
    terms: &[(f64, Vec<f64>)],
    g: &TimeDepSet,
    union: &TimeDepSet,
) -> Result<f64> {
    let p = q.treatments().len() - 1;
    let y = joint.value(q.outcome());
    let seqs = terms
        .iter()
        .map(|(c, a)| {
            let chi = super::estimands::interventional_mean(joint.law(), q, a)?;
            Ok((*c, chi, sequential(joint, q, a, union)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let last: RandomVar = combine(
        joint,
        seqs.iter()
            .map(|(c, _, full)| {
                let f = (0..joint.len())
                    .map(|s| full.cum_ind[p][s] / full.lambda[p][s] * (y[s] - full.b[p][s]))
                    .collect();
                (*c, f)
            })
            .collect(),
    );
    let given = g.all().union(&q.treatment_set()).with(q.outcome());
    let mut total = joint.expect(&joint.cond_variance(&last, &given));
    for k in 0..=p {
        let f = combine(
            joint,
            seqs.iter()
                .map(|(c, chi, full)| {
                    let f = (0..joint.len())
                        .map(|s| {
                            let prev = if k == 0 { *chi } else { full.b[k - 1][s] };
                            full.weight_before(k, s) * (full.b[k][s] - prev)
                        })
                        .collect();
                    (*c, f)
                })
                .collect(),
        );
        let past: VertexSet = q.treatments()[..k].iter().copied().collect();
        let given = g.cumulative(k).union(&past);
        total += joint.expect(&joint.cond_variance(&f, &given));
    }
    Ok(total)
}
