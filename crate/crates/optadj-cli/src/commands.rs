use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use optadj::adjustment::{
    compare_adjustment_sets, enumerate_adjustment_sets_within, is_minimal_adjustment,
    optimal_minimal_set, optimal_set, prune_adjustment, Verdict,
};
use optadj::efficiency::{check_efficient_with, indirect_nodes, irrelevant_nodes, prune, MediatorAnchor};
use optadj::oracle::{
    falsify_time_dep, law_for_trial, psi_td, psi_ti, verify_identity, Contrast, DiscreteLaw,
    Identity, Joint, RandomLawSpec,
};
use optadj::timedep::{
    compare_time_dep_sets, enumerate_time_dep_within, is_valid_time_dep, TimeDepSet,
};
use optadj::{Dag, Query, VertexSet};

use crate::cli::{Anchor, Command, ContrastTerm, LawArgs, Names, PairArgs, Predicate, QueryArgs};

/// Message attached to an empty time independent enumeration.
pub const NO_SET_NOTE: &str = "no time independent adjustment set exists";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Domain(#[from] optadj::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use optadj::Error as E;
        match self {
            CliError::Io { .. } | CliError::Usage(_) => 2,
            CliError::Domain(e) => match e {
                E::Syntax { .. }
                | E::DuplicateVertex(_)
                | E::UnknownVertex(_)
                | E::Cycle(_)
                | E::Overlap(_)
                | E::InvalidQuery(_)
                | E::InvalidLaw(_) => 2,
                _ => 1,
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        use optadj::Error as E;
        match self {
            CliError::Io { .. } => "io",
            CliError::Usage(_) => "usage",
            CliError::Domain(e) => match e {
                E::Syntax { .. } => "syntax",
                E::DuplicateVertex(_) => "duplicate_vertex",
                E::UnknownVertex(_) => "unknown_vertex",
                E::Cycle(_) => "cycle",
                E::Overlap(_) => "overlap",
                E::NotSingleChild { .. } => "not_single_child",
                E::InvalidQuery(_) => "invalid_query",
                E::JointTreatment => "joint_treatment",
                E::NotAncestor(_) => "not_ancestor",
                E::NoAdjustmentSet => "no_adjustment_set",
                E::InvalidSet(_) => "invalid_set",
                E::GuardExceeded { .. } => "guard_exceeded",
                E::InvalidLaw(_) => "invalid_law",
                E::Hypothesis(_) => "hypothesis",
                E::Internal(_) => "internal",
            },
        }
    }

    pub fn to_json(&self) -> Value {
        json!({ "error": { "kind": self.kind(), "message": self.to_string() } })
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// A command result in both renderings.
pub struct Output {
    pub json: Value,
    pub text: String,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn load(q: &QueryArgs) -> Result<(Dag, Query)> {
    let g = Dag::parse(&read(&q.dag)?)?;
    let query = Query::from_names(&g, &q.treatments, &q.outcome)?;
    Ok((g, query))
}

fn vertex_set(g: &Dag, names: &Names) -> Result<VertexSet> {
    Ok(g.set(names.0.iter().map(String::as_str))?)
}

fn time_dep_set(g: &Dag, blocks: &[Names]) -> Result<TimeDepSet> {
    let blocks = blocks
        .iter()
        .map(|b| vertex_set(g, b))
        .collect::<Result<Vec<_>>>()?;
    Ok(TimeDepSet::new(blocks))
}

fn braces(names: &[String]) -> String {
    format!("{{{}}}", names.join(","))
}

fn blocks_json(g: &Dag, z: &TimeDepSet) -> Value {
    json!({ "blocks": z.labels(g) })
}

fn dag_json(g: &Dag) -> Value {
    let edges: Vec<Value> = g
        .edges()
        .into_iter()
        .map(|(t, h)| json!([g.name(t), g.name(h)]))
        .collect();
    json!({ "vertices": g.names(), "edges": edges })
}

fn verdict_output(verdict: &Verdict) -> Output {
    let mut text = format!("{:?}\n", verdict.verdict);
    for c in &verdict.conditions {
        text.push_str(&format!("  [{}] {}\n", if c.holds { "x" } else { " " }, c.dsep));
    }
    Output {
        json: serde_json::to_value(verdict).expect("verdict serializes"),
        text,
    }
}

fn candidates(g: &Dag, observable: &Option<Names>) -> Result<VertexSet> {
    match observable {
        Some(names) => vertex_set(g, names),
        None => Ok(g.all()),
    }
}

fn random_spec(seed: u64, args: &LawArgs) -> RandomLawSpec {
    args.support.iter().fold(
        RandomLawSpec::new(seed).with_epsilon(args.epsilon),
        |spec, s| spec.with_support(&s.vertex, s.values.clone()),
    )
}

fn levels_or_ones(q: &Query, level: &[f64]) -> Result<Vec<f64>> {
    let p = q.treatments().len();
    match level.len() {
        0 => Ok(vec![1.0; p]),
        n if n == p => Ok(level.to_vec()),
        n => Err(CliError::Usage(format!("expected {p} treatment levels, found {n}"))),
    }
}

/// The pair as two time dependent sets, wrapping plain sets as single blocks.
fn pair_sets(g: &Dag, pair: &PairArgs) -> Result<(TimeDepSet, TimeDepSet, bool)> {
    match (&pair.set1, &pair.set2) {
        (Some(a), Some(b)) => Ok((
            TimeDepSet::point(vertex_set(g, a)?),
            TimeDepSet::point(vertex_set(g, b)?),
            false,
        )),
        (None, None) if !pair.block1.is_empty() && !pair.block2.is_empty() => {
            Ok((time_dep_set(g, &pair.block1)?, time_dep_set(g, &pair.block2)?, true))
        }
        _ => Err(CliError::Usage(
            "give either --set1 and --set2 or --block1 and --block2".into(),
        )),
    }
}

pub fn execute(command: &Command) -> Result<Output> {
    match command {
        Command::AdjustCheck { query, set } => {
            let (g, q) = load(query)?;
            let z = vertex_set(&g, set)?;
            let r = is_minimal_adjustment(&g, &q, &z)?;
            let status = match (r.valid, r.minimal) {
                (true, true) => "valid and minimal",
                (true, false) => "valid, not minimal",
                _ => "not valid",
            };
            let reason = serde_json::to_value(&r.reason).expect("reason serializes");
            Ok(Output {
                text: format!("{}: {status}\nreason: {reason}\n", braces(&r.set)),
                json: serde_json::to_value(&r).expect("report serializes"),
            })
        }
        Command::AdjustOptimal { query } => {
            let (g, q) = load(query)?;
            let o = g.labels(&optimal_set(&g, &q)?);
            let mut json = json!({ "O": o });
            let mut text = format!("O = {}\n", braces(&o));
            if q.point().is_ok() {
                let o_min = g.labels(&optimal_minimal_set(&g, &q)?);
                text.push_str(&format!("O_min = {}\n", braces(&o_min)));
                json["O_min"] = json!(o_min);
            }
            Ok(Output { json, text })
        }
        Command::AdjustEnumerate { query, enumerate } => {
            let (g, q) = load(query)?;
            let pool = candidates(&g, &enumerate.observable)?;
            let max = enumerate
                .max_vertices
                .unwrap_or(optadj::adjustment::DEFAULT_MAX_CANDIDATES);
            let sets: Vec<Vec<String>> = enumerate_adjustment_sets_within(&g, &q, &pool, max)?
                .iter()
                .map(|z| g.labels(z))
                .collect();
            let mut json = json!({ "sets": sets });
            let text = if sets.is_empty() {
                json["note"] = json!(NO_SET_NOTE);
                format!("{NO_SET_NOTE}\n")
            } else {
                sets.iter().map(|s| braces(s) + "\n").collect()
            };
            Ok(Output { json, text })
        }
        Command::AdjustCompare { query, set1, set2 } => {
            let (g, q) = load(query)?;
            let v = compare_adjustment_sets(&g, &q, &vertex_set(&g, set1)?, &vertex_set(&g, set2)?)?;
            Ok(verdict_output(&v))
        }
        Command::AdjustPrune { query, set } => {
            let (g, q) = load(query)?;
            let z = vertex_set(&g, set)?;
            let pruned = g.labels(&prune_adjustment(&g, &q, &z)?);
            Ok(Output {
                text: format!("{}\n", braces(&pruned)),
                json: json!({ "set": g.labels(&z), "pruned": pruned }),
            })
        }
        Command::TimedepCheck {
            query,
            blocks,
            falsify,
            trials,
            seed,
        } => {
            let (g, q) = load(query)?;
            let z = time_dep_set(&g, blocks)?;
            let r = if *falsify {
                falsify_time_dep(&g, &q, &z, &RandomLawSpec::new(*seed), *trials)?
            } else {
                is_valid_time_dep(&g, &q, &z)?
            };
            let mut text = format!(
                "{}: criterion {}\n",
                z.format(&g),
                if r.sufficient_criterion { "holds" } else { "fails" }
            );
            if let Some(k) = r.failing_step {
                text.push_str(&format!("fails at treatment {}\n", g.name(q.treatments()[k])));
            }
            let oracle = serde_json::to_value(r.oracle_falsified).expect("status serializes");
            text.push_str(&format!("oracle: {oracle}\n"));
            Ok(Output {
                json: serde_json::to_value(&r).expect("report serializes"),
                text,
            })
        }
        Command::TimedepEnumerate { query, enumerate } => {
            let (g, q) = load(query)?;
            let pool = candidates(&g, &enumerate.observable)?;
            let max = enumerate
                .max_vertices
                .unwrap_or(optadj::timedep::DEFAULT_MAX_CANDIDATES);
            let sets = enumerate_time_dep_within(&g, &q, &pool, max)?;
            Ok(Output {
                text: sets.iter().map(|z| z.format(&g) + "\n").collect(),
                json: json!({ "sets": sets.iter().map(|z| blocks_json(&g, z)).collect::<Vec<_>>() }),
            })
        }
        Command::TimedepCompare { query, block1, block2 } => {
            let (g, q) = load(query)?;
            let v = compare_time_dep_sets(&g, &q, &time_dep_set(&g, block1)?, &time_dep_set(&g, block2)?)?;
            Ok(verdict_output(&v))
        }
        Command::EffCheck { query, anchor } => {
            let (g, q) = load(query)?;
            let anchor = match anchor {
                Anchor::EachMediator => MediatorAnchor::EachMediator,
                Anchor::FirstMediator => MediatorAnchor::FirstMediator,
            };
            let r = check_efficient_with(&g, &q, anchor)?;
            let list = |s: &std::collections::BTreeSet<usize>| {
                s.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
            };
            let p = &r.partition;
            let text = format!(
                "efficient: {}\n\
                 W = ({}), A = {}, M = ({}), Y = {}\n\
                 offenders before treatment: {{{}}}\n\
                 offenders after treatment: {{{}}}\n\
                 EIF = {}\n\
                 uninformative: {}\n",
                r.efficient,
                p.non_descendants.join(", "),
                p.treatment,
                p.mediators.join(", "),
                p.outcome,
                list(&r.offenders_nondesc),
                list(&r.offenders_desc),
                r.eif,
                braces(&r.uninformative),
            );
            Ok(Output { json: r.to_json(), text })
        }
        Command::EffPrune { query } => {
            let (g, q) = load(query)?;
            let h = prune(&g, &q)?;
            let indirect = g.labels(&indirect_nodes(&g, &q)?);
            let irrelevant = g.labels(&irrelevant_nodes(&g, &q)?);
            Ok(Output {
                text: format!("irrelevant: {}\n{}", braces(&irrelevant), h.to_text()),
                json: json!({
                    "indirect": indirect,
                    "irrelevant": irrelevant,
                    "pruned_dag": dag_json(&h),
                }),
            })
        }
        Command::OracleVerify {
            query,
            identity,
            law,
            seed,
            law_args,
            pair,
            level,
            ate,
            term,
        } => {
            let (g, q) = load(query)?;
            let identity: Identity = identity.parse()?;
            let law = match law {
                Some(path) => DiscreteLaw::from_json(g.clone(), &read(path)?, law_args.epsilon)?,
                None => DiscreteLaw::random(&g, &random_spec(*seed, law_args))?,
            };
            let joint = Joint::new(&law)?;
            let (first, second, _) = pair_sets(&g, pair)?;
            let contrast = if *ate {
                Contrast::Ate
            } else if !term.is_empty() {
                Contrast::General(
                    term.iter()
                        .map(|ContrastTerm { coefficient, levels }| (*coefficient, levels.clone()))
                        .collect(),
                )
            } else {
                Contrast::Level(levels_or_ones(&q, level)?)
            };
            let r = verify_identity(&joint, &q, identity, &first, &second, &contrast)?;
            Ok(Output {
                text: format!(
                    "{}: lhs {:.12} rhs {:.12} discrepancy {:.3e} {}\n",
                    r.identity,
                    r.lhs,
                    r.rhs,
                    r.discrepancy,
                    if r.pass { "PASS" } else { "FAIL" }
                ),
                json: serde_json::to_value(&r).expect("report serializes"),
            })
        }
        Command::OracleSearch {
            query,
            predicate,
            pair,
            seed,
            trials,
            law_args,
            level,
        } => {
            let (g, q) = load(query)?;
            let Predicate::VarianceReversal = predicate;
            let (first, second, time_dependent) = pair_sets(&g, pair)?;
            let levels = levels_or_ones(&q, level)?;
            let spec = random_spec(*seed, law_args);
            let variance = |j: &Joint, z: &TimeDepSet| -> Result<f64> {
                let psi = if time_dependent {
                    psi_td(j, &q, &levels, z)?
                } else {
                    psi_ti(j, &q, &levels, &z.blocks[0])?
                };
                Ok(j.variance(&psi))
            };
            let mut smaller: Option<Value> = None;
            let mut larger: Option<Value> = None;
            for trial in 0..*trials {
                let law = law_for_trial(&g, &spec, trial)?;
                let j = Joint::new(&law)?;
                let (v1, v2) = (variance(&j, &first)?, variance(&j, &second)?);
                let hit = || {
                    json!({
                        "trial": trial,
                        "variance1": v1,
                        "variance2": v2,
                        "ratio": v1 / v2,
                        "law": law.to_json(),
                    })
                };
                if v1 - v2 < -1e-9 && smaller.is_none() {
                    smaller = Some(hit());
                }
                if v1 - v2 > 1e-9 && larger.is_none() {
                    larger = Some(hit());
                }
                if smaller.is_some() && larger.is_some() {
                    break;
                }
            }
            let found = smaller.is_some() && larger.is_some();
            let describe = |v: &Option<Value>| match v {
                Some(v) => format!("trial {} (ratio {:.4})", v["trial"], v["ratio"].as_f64().unwrap_or(f64::NAN)),
                None => "none".into(),
            };
            Ok(Output {
                text: format!(
                    "set1 smaller: {}\nset1 larger: {}\nreversal found: {found}\n",
                    describe(&smaller),
                    describe(&larger)
                ),
                json: json!({
                    "predicate": "variance-reversal",
                    "seed": seed,
                    "trials": trials,
                    "set1": first.labels(&g),
                    "set2": second.labels(&g),
                    "set1_smaller": smaller,
                    "set1_larger": larger,
                    "found": found,
                }),
            })
        }
    }
}
