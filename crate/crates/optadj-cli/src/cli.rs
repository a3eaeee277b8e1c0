use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

const FORMATS: &str = "\
DAG file format:
  One statement per line; `#` starts a comment.
    node <name>            declare a vertex (optional)
    edge <tail> <head>     add an edge
    <tail> -> <head>       add an edge
  Vertices are declared in order of first appearance. Names may not
  contain commas. Cycles and duplicate `node` lines are rejected.

Law file format (JSON):
  {\"vertex\":{\"support\":[...],\"cpt\":{\"<parent-config-key>\":[p0,p1,...]}}}
  One entry per vertex. A parent-config key is the comma-joined parent
  values in parent declaration order (empty string for a root). Each row
  lists probabilities in support order and must sum to one.

Sets and blocks:
  --set O1,W2      comma-separated vertex names; `-` is the empty set
  --block L0 --block L1,U
                   one block per treatment, in treatment order

Exit codes:
  0 success, 1 domain error (invalid set, no adjustment set, failed
  hypothesis, guard exceeded), 2 usage or input parse error.";

#[derive(Parser, Debug)]
#[command(
    name = "optadj",
    version,
    about = "Adjustment sets, time dependent adjustment and efficiency checks on causal DAGs",
    after_long_help = FORMATS
)]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

/// Comma-separated vertex names; `-` for none.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Names(pub Vec<String>);

pub fn parse_names(s: &str) -> Result<Names, String> {
    let s = s.trim();
    if s == "-" || s.is_empty() {
        return Ok(Names(Vec::new()));
    }
    let names: Vec<String> = s.split(',').map(|p| p.trim().to_string()).collect();
    if names.iter().any(String::is_empty) {
        return Err(format!("empty name in `{s}`"));
    }
    Ok(Names(names))
}

/// A `VERTEX=v1,v2,...` support override.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportOverride {
    pub vertex: String,
    pub values: Vec<f64>,
}

pub fn parse_support(s: &str) -> Result<SupportOverride, String> {
    let (vertex, values) = s
        .split_once('=')
        .ok_or_else(|| format!("expected VERTEX=v1,v2,... in `{s}`"))?;
    let values = values
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SupportOverride {
        vertex: vertex.trim().to_string(),
        values,
    })
}

/// A `COEF@l1,l2,...` contrast term.
#[derive(Clone, Debug, PartialEq)]
pub struct ContrastTerm {
    pub coefficient: f64,
    pub levels: Vec<f64>,
}

pub fn parse_term(s: &str) -> Result<ContrastTerm, String> {
    let (c, levels) = s
        .split_once('@')
        .ok_or_else(|| format!("expected COEF@l1,l2,... in `{s}`"))?;
    let coefficient = c.trim().parse::<f64>().map_err(|e| format!("`{c}`: {e}"))?;
    let levels = levels
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ContrastTerm { coefficient, levels })
}

#[derive(Args, Debug)]
pub struct QueryArgs {
    /// DAG file.
    #[arg(long)]
    pub dag: PathBuf,
    /// Treatment; repeat in temporal order for joint treatments.
    #[arg(short = 'A', long = "treatment", required = true)]
    pub treatments: Vec<String>,
    /// Outcome.
    #[arg(short = 'Y', long = "outcome")]
    pub outcome: String,
}

#[derive(Args, Debug)]
pub struct EnumerateArgs {
    /// Restrict candidates to these vertices.
    #[arg(long, value_parser = parse_names)]
    pub observable: Option<Names>,
    /// Largest number of candidate vertices to enumerate over.
    #[arg(long)]
    pub max_vertices: Option<usize>,
}

#[derive(Args, Debug)]
pub struct PairArgs {
    /// First time independent set.
    #[arg(long, value_parser = parse_names, conflicts_with = "block1")]
    pub set1: Option<Names>,
    /// Second time independent set.
    #[arg(long, value_parser = parse_names, conflicts_with = "block2")]
    pub set2: Option<Names>,
    /// Block of the first time dependent set; repeat per treatment.
    #[arg(long, value_parser = parse_names)]
    pub block1: Vec<Names>,
    /// Block of the second time dependent set; repeat per treatment.
    #[arg(long, value_parser = parse_names)]
    pub block2: Vec<Names>,
}

#[derive(Args, Debug)]
pub struct LawArgs {
    /// Lower bound on every conditional probability.
    #[arg(long, default_value_t = 0.05)]
    pub epsilon: f64,
    /// Support override for sampled laws, `VERTEX=v1,v2,...`.
    #[arg(long, value_parser = parse_support)]
    pub support: Vec<SupportOverride>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Anchor {
    EachMediator,
    FirstMediator,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Predicate {
    /// Laws under which each set has the strictly smaller variance.
    VarianceReversal,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check whether a set is a valid and minimal adjustment set.
    AdjustCheck {
        #[command(flatten)]
        query: QueryArgs,
        #[arg(long, value_parser = parse_names)]
        set: Names,
    },
    /// The optimal set O and its minimal subset O_min.
    AdjustOptimal {
        #[command(flatten)]
        query: QueryArgs,
    },
    /// List every valid time independent adjustment set.
    AdjustEnumerate {
        #[command(flatten)]
        query: QueryArgs,
        #[command(flatten)]
        enumerate: EnumerateArgs,
    },
    /// Graphical variance comparison of two valid sets.
    AdjustCompare {
        #[command(flatten)]
        query: QueryArgs,
        #[arg(long, value_parser = parse_names)]
        set1: Names,
        #[arg(long, value_parser = parse_names)]
        set2: Names,
    },
    /// Drop vertices of a valid set that carry no outcome information.
    AdjustPrune {
        #[command(flatten)]
        query: QueryArgs,
        #[arg(long, value_parser = parse_names)]
        set: Names,
    },
    /// Check a time dependent set against the sequential criterion.
    TimedepCheck {
        #[command(flatten)]
        query: QueryArgs,
        /// One block per treatment.
        #[arg(long = "block", value_parser = parse_names, required = true)]
        blocks: Vec<Names>,
        /// Also search random laws for a counterexample.
        #[arg(long)]
        falsify: bool,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// List every time dependent set passing the criterion.
    TimedepEnumerate {
        #[command(flatten)]
        query: QueryArgs,
        #[command(flatten)]
        enumerate: EnumerateArgs,
    },
    /// Graphical variance comparison of two time dependent sets.
    TimedepCompare {
        #[command(flatten)]
        query: QueryArgs,
        #[arg(long, value_parser = parse_names, required = true)]
        block1: Vec<Names>,
        #[arg(long, value_parser = parse_names, required = true)]
        block2: Vec<Names>,
    },
    /// Decide whether the optimally adjusted estimator is efficient.
    EffCheck {
        #[command(flatten)]
        query: QueryArgs,
        /// Parent set used for the mediator inclusion test.
        #[arg(long, value_enum, default_value_t = Anchor::EachMediator)]
        anchor: Anchor,
    },
    /// Remove vertices irrelevant to the efficiency bound.
    EffPrune {
        #[command(flatten)]
        query: QueryArgs,
    },
    /// Verify a variance identity on a law.
    OracleVerify {
        #[command(flatten)]
        query: QueryArgs,
        /// Identity name, e.g. supplementation or td-comparison.
        #[arg(long)]
        identity: String,
        /// Law file; a random law is sampled from --seed otherwise.
        #[arg(long)]
        law: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        law_args: LawArgs,
        /// The G role (set1/block1) and B role (set2/block2).
        #[command(flatten)]
        pair: PairArgs,
        /// Treatment level, one per treatment.
        #[arg(long, allow_hyphen_values = true)]
        level: Vec<f64>,
        /// Use the average treatment effect of binary treatments.
        #[arg(long, conflicts_with_all = ["level", "term"])]
        ate: bool,
        /// General contrast term `COEF@l1,l2,...`; repeatable.
        #[arg(long, value_parser = parse_term, allow_hyphen_values = true, conflicts_with = "level")]
        term: Vec<ContrastTerm>,
    },
    /// Seeded search for laws satisfying a predicate.
    OracleSearch {
        #[command(flatten)]
        query: QueryArgs,
        #[arg(long, value_enum)]
        predicate: Predicate,
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        trials: usize,
        #[command(flatten)]
        law_args: LawArgs,
        /// Treatment level, one per treatment.
        #[arg(long, allow_hyphen_values = true)]
        level: Vec<f64>,
    },
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn names_parse() {
        assert_eq!(parse_names("-").unwrap(), Names(vec![]));
        assert_eq!(parse_names("L1, U").unwrap().0, ["L1", "U"]);
        assert!(parse_names("A,,B").is_err());
    }

    #[test]
    fn supports_and_terms_parse() {
        let s = parse_support("Y=-1,0.5,4").unwrap();
        assert_eq!((s.vertex.as_str(), s.values), ("Y", vec![-1.0, 0.5, 4.0]));
        assert!(parse_support("Y").is_err());
        let t = parse_term("-0.5@1,0").unwrap();
        assert_eq!((t.coefficient, t.levels), (-0.5, vec![1.0, 0.0]));
        assert!(parse_term("2@x").is_err());
    }

    #[test]
    fn repeated_blocks_keep_their_order() {
        let cli = Cli::try_parse_from([
            "optadj", "timedep-check", "--dag", "g.dag", "-A", "A0", "-A", "A1", "-Y", "Y",
            "--block", "L0", "--block", "L1,U",
        ])
        .unwrap();
        let Command::TimedepCheck { blocks, query, .. } = cli.command else {
            panic!("wrong subcommand")
        };
        assert_eq!(query.treatments, ["A0", "A1"]);
        assert_eq!(blocks, [Names(vec!["L0".into()]), Names(vec!["L1".into(), "U".into()])]);
    }
}
