//! Symbolic influence functions as signed sums of conditional expectations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde_json::{json, Value};

/// One summand. `b` is `E[Y | A=a, O]`, `T` is `I_a(A) Y / P(A=a | O_min)`
/// and `IPW` is `I_a(A) / P(A=a | O_min)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    /// `b` itself.
    BAtom,
    /// The interventional mean.
    Chi,
    /// `E[b | S]`.
    BCond(Vec<String>),
    /// `E[T | S]`.
    TCond(Vec<String>),
    /// `IPW * Y`.
    IpwY,
    /// `IPW * b`.
    IpwB,
    /// `IPW * (Y - b)`.
    IpwResidual,
}

impl Term {
    pub fn kind(&self) -> &'static str {
        match self {
            Term::BAtom => "b",
            Term::Chi => "chi",
            Term::BCond(_) => "b_cond",
            Term::TCond(_) => "t_cond",
            Term::IpwY => "ipw_y",
            Term::IpwB => "ipw_b",
            Term::IpwResidual => "ipw_residual",
        }
    }

    fn render(&self) -> String {
        match self {
            Term::BAtom => "b".into(),
            Term::Chi => "chi".into(),
            Term::BCond(s) => format!("E[b|{{{}}}]", s.join(",")),
            Term::TCond(s) => format!("E[T|{{{}}}]", s.join(",")),
            Term::IpwY => "IPW*Y".into(),
            Term::IpwB => "IPW*b".into(),
            Term::IpwResidual => "IPW*(Y - b)".into(),
        }
    }
}

/// The variables a formula is built from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Basis {
    pub treatment: String,
    pub outcome: String,
    /// The optimal adjustment set `O`.
    pub adjustment: BTreeSet<String>,
    /// The optimal minimal adjustment set `O_min`.
    pub minimal: BTreeSet<String>,
}

/// A canonical signed sum of [`Term`]s with integer coefficients.
///
/// Conditioning sets are kept sorted. Definitional rewrites are applied on
/// insertion: `E[b|∅]` and `E[T|∅]` become `chi`, `E[b|S]` with `O ⊆ S`
/// becomes `b`, and `E[T|S]` with `{A,Y} ∪ O_min ⊆ S` becomes `IPW*Y`.
/// Matching `IPW*Y` and `-IPW*b` are folded into `IPW*(Y - b)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EifExpr {
    basis: Basis,
    terms: BTreeMap<Term, i64>,
}

impl EifExpr {
    pub fn zero(basis: Basis) -> Self {
        EifExpr {
            basis,
            terms: BTreeMap::new(),
        }
    }

    /// `b - chi + IPW*(Y - b)`, the influence function of the optimally
    /// adjusted estimator.
    pub fn optimal_adjusted(basis: Basis) -> Self {
        let mut e = EifExpr::zero(basis);
        e.add(Term::BAtom, 1);
        e.add(Term::Chi, -1);
        e.add(Term::IpwResidual, 1);
        e
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms with their nonzero coefficients in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&Term, i64)> {
        self.terms.iter().map(|(t, &c)| (t, c))
    }

    fn normalize(&self, term: Term) -> Term {
        match term {
            Term::BCond(s) if s.is_empty() => Term::Chi,
            Term::TCond(s) if s.is_empty() => Term::Chi,
            Term::BCond(s) if self.basis.adjustment.iter().all(|o| s.contains(o)) => Term::BAtom,
            Term::TCond(s)
                if s.contains(&self.basis.treatment)
                    && s.contains(&self.basis.outcome)
                    && self.basis.minimal.iter().all(|o| s.contains(o)) =>
            {
                Term::IpwY
            }
            Term::BCond(mut s) => {
                s.sort();
                s.dedup();
                Term::BCond(s)
            }
            Term::TCond(mut s) => {
                s.sort();
                s.dedup();
                Term::TCond(s)
            }
            other => other,
        }
    }

    /// Adds `coefficient * term`, cancelling opposite entries.
    pub fn add(&mut self, term: Term, coefficient: i64) {
        if coefficient == 0 {
            return;
        }
        let term = self.normalize(term);
        let c = self.terms.entry(term.clone()).or_insert(0);
        *c += coefficient;
        if *c == 0 {
            self.terms.remove(&term);
        }
        if matches!(term, Term::IpwY | Term::IpwB | Term::IpwResidual) {
            self.fold_ipw();
        }
    }

    fn fold_ipw(&mut self) {
        let mut take = |t: &Term| self.terms.remove(t).unwrap_or(0);
        let r = take(&Term::IpwResidual);
        let y = take(&Term::IpwY) + r;
        let b = take(&Term::IpwB) - r;
        let r = if y.signum() * b.signum() == -1 {
            y.signum() * y.abs().min(b.abs())
        } else {
            0
        };
        for (t, c) in [(Term::IpwY, y - r), (Term::IpwB, b + r), (Term::IpwResidual, r)] {
            if c != 0 {
                self.terms.insert(t, c);
            }
        }
    }

    pub fn add_expr(&mut self, other: &EifExpr, coefficient: i64) {
        for (t, c) in other.terms() {
            self.add(t.clone(), c * coefficient);
        }
    }

    /// Vertex names some term depends on.
    pub fn variables(&self) -> BTreeSet<String> {
        let b = &self.basis;
        let mut out = BTreeSet::new();
        for t in self.terms.keys() {
            match t {
                Term::Chi => {}
                Term::BAtom => out.extend(b.adjustment.iter().cloned()),
                Term::BCond(s) | Term::TCond(s) => out.extend(s.iter().cloned()),
                Term::IpwY => {
                    out.extend([b.treatment.clone(), b.outcome.clone()]);
                    out.extend(b.minimal.iter().cloned());
                }
                Term::IpwB => {
                    out.insert(b.treatment.clone());
                    out.extend(b.adjustment.iter().chain(&b.minimal).cloned());
                }
                Term::IpwResidual => {
                    out.extend([b.treatment.clone(), b.outcome.clone()]);
                    out.extend(b.adjustment.iter().chain(&b.minimal).cloned());
                }
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (t, c)) in self.terms().enumerate() {
            let body = match c.abs() {
                1 => t.render(),
                n => format!("{n}*{}", t.render()),
            };
            match (i, c < 0) {
                (0, false) => out.push_str(&body),
                (0, true) => out.push_str(&format!("-{body}")),
                (_, false) => out.push_str(&format!(" + {body}")),
                (_, true) => out.push_str(&format!(" - {body}")),
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms()
            .map(|(t, c)| {
                let mut v = json!({ "kind": t.kind(), "coefficient": c });
                if let Term::BCond(s) | Term::TCond(s) = t {
                    v["set"] = json!(s);
                }
                if let Term::TCond(s) = t {
                    v["includes_outcome"] = json!(s.contains(&self.basis.outcome));
                }
                v
            })
            .collect();
        json!({ "terms": terms, "text": self.to_text() })
    }
}

impl fmt::Display for EifExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis() -> Basis {
        Basis {
            treatment: "A".into(),
            outcome: "Y".into(),
            adjustment: ["O1".to_string(), "O2".to_string()].into(),
            minimal: ["O1".to_string()].into(),
        }
    }

    fn set(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn renders_optimal_and_zero() {
        assert_eq!(EifExpr::optimal_adjusted(basis()).to_text(), "b - chi + IPW*(Y - b)");
        assert_eq!(EifExpr::zero(basis()).to_text(), "0");
    }

    #[test]
    fn opposite_terms_cancel() {
        let mut e = EifExpr::zero(basis());
        e.add(Term::BCond(set(&["W2", "W1"])), 1);
        e.add(Term::BCond(set(&["W1", "W2"])), -1);
        assert!(e.is_zero());
    }

    #[test]
    fn definitional_rewrites() {
        let mut e = EifExpr::zero(basis());
        e.add(Term::BCond(vec![]), 1);
        e.add(Term::BCond(set(&["O2", "W", "O1"])), 1);
        e.add(Term::TCond(set(&["Y", "A", "O1"])), 1);
        e.add(Term::TCond(vec![]), 1);
        assert_eq!(e.to_text(), "b + 2*chi + IPW*Y");
    }

    #[test]
    fn ipw_pairs_fold_into_residual() {
        let mut e = EifExpr::zero(basis());
        e.add(Term::IpwY, 1);
        e.add(Term::IpwB, -1);
        assert_eq!(e.to_text(), "IPW*(Y - b)");
        e.add(Term::IpwB, -1);
        assert_eq!(e.to_text(), "-IPW*b + IPW*(Y - b)");
        e.add(Term::IpwResidual, -1);
        assert_eq!(e.to_text(), "-IPW*b");
        e.add(Term::IpwB, 1);
        assert!(e.is_zero());
    }

    #[test]
    fn json_lists_terms() {
        let mut e = EifExpr::zero(basis());
        e.add(Term::TCond(set(&["M", "Y"])), -1);
        let v = e.to_json();
        assert_eq!(v["terms"][0]["kind"], "t_cond");
        assert_eq!(v["terms"][0]["coefficient"], -1);
        assert_eq!(v["terms"][0]["includes_outcome"], true);
        assert_eq!(v["text"], "-E[T|{M,Y}]");
    }
}
