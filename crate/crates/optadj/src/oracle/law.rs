use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::graph::{Dag, Vertex};

/// Lower bound on every conditional probability unless overridden.
pub const DEFAULT_EPSILON: f64 = 0.05;
/// Largest joint state space the oracle will enumerate.
pub const DEFAULT_MAX_STATES: u128 = 1 << 20;

const ROW_TOLERANCE: f64 = 1e-9;

/// A law over finitely supported variables factorizing along a [`Dag`].
///
/// Conditional probability tables are indexed by the parent configuration in
/// mixed radix over the parents in declaration order, the last parent varying
/// fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteLaw {
    dag: Dag,
    support: Vec<Vec<f64>>,
    cpt: Vec<Vec<Vec<f64>>>,
}

pub(crate) fn format_value(v: f64) -> String {
    format!("{v}")
}

fn number(v: f64) -> Value {
    if v.fract() == 0.0 && v.abs() < 9.0e15 {
        Value::from(v as i64)
    } else {
        Value::from(v)
    }
}

impl DiscreteLaw {
    /// Builds a law requiring every probability to lie in `[epsilon, 1 - epsilon]`.
    pub fn new(
        dag: Dag,
        support: Vec<Vec<f64>>,
        cpt: Vec<Vec<Vec<f64>>>,
        epsilon: f64,
    ) -> Result<Self> {
        let eps = vec![epsilon; dag.len()];
        Self::with_positivity(dag, support, cpt, &eps)
    }

    /// Like [`DiscreteLaw::new`] with a separate bound per vertex.
    pub fn with_positivity(
        dag: Dag,
        support: Vec<Vec<f64>>,
        cpt: Vec<Vec<Vec<f64>>>,
        epsilon: &[f64],
    ) -> Result<Self> {
        let n = dag.len();
        if support.len() != n || cpt.len() != n || epsilon.len() != n {
            return Err(Error::InvalidLaw(format!(
                "expected tables for {n} vertices"
            )));
        }
        let law = DiscreteLaw { dag, support, cpt };
        for v in 0..n {
            law.check_vertex(v, epsilon[v])?;
        }
        Ok(law)
    }

    fn check_vertex(&self, v: Vertex, eps: f64) -> Result<()> {
        let name = self.dag.name(v);
        let values = &self.support[v];
        if values.is_empty() || values.len() > u16::MAX as usize {
            return Err(Error::InvalidLaw(format!("`{name}` has an empty or oversized support")));
        }
        for (i, x) in values.iter().enumerate() {
            if !x.is_finite() || values[..i].contains(x) {
                return Err(Error::InvalidLaw(format!(
                    "`{name}` support contains a repeated or non-finite value"
                )));
            }
        }
        let configs = self.configs_checked(v)?;
        if self.cpt[v].len() != configs {
            return Err(Error::InvalidLaw(format!(
                "`{name}` needs {configs} rows, found {}",
                self.cpt[v].len()
            )));
        }
        let k = values.len();
        for (c, row) in self.cpt[v].iter().enumerate() {
            if row.len() != k {
                return Err(Error::InvalidLaw(format!("`{name}` row {c} has the wrong length")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_TOLERANCE {
                return Err(Error::InvalidLaw(format!("`{name}` row {c} sums to {sum}")));
            }
            let upper = if k == 1 { 1.0 } else { 1.0 - eps };
            if row
                .iter()
                .any(|&p| !p.is_finite() || p < eps - ROW_TOLERANCE || p > upper + ROW_TOLERANCE)
            {
                return Err(Error::InvalidLaw(format!(
                    "`{name}` row {c} leaves [{eps}, {upper}]"
                )));
            }
        }
        Ok(())
    }

    fn configs_checked(&self, v: Vertex) -> Result<usize> {
        let mut total: u128 = 1;
        for &p in self.dag.parents(v) {
            total *= self.support[p].len() as u128;
            if total > DEFAULT_MAX_STATES {
                return Err(Error::GuardExceeded {
                    what: "parent configurations",
                    size: total,
                    limit: DEFAULT_MAX_STATES,
                });
            }
        }
        Ok(total as usize)
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn support(&self, v: Vertex) -> &[f64] {
        &self.support[v]
    }

    pub fn rows(&self, v: Vertex) -> &[Vec<f64>] {
        &self.cpt[v]
    }

    /// Number of parent configurations of `v`.
    pub fn configs(&self, v: Vertex) -> usize {
        self.cpt[v].len()
    }

    /// Parent configuration of `v` in a full assignment of value indices.
    pub fn config_index(&self, v: Vertex, state: &[usize]) -> usize {
        self.dag
            .parents(v)
            .iter()
            .fold(0, |acc, &p| acc * self.support[p].len() + state[p])
    }

    /// Value indices of the parents of `v` in configuration `config`.
    pub fn config_values(&self, v: Vertex, mut config: usize) -> Vec<usize> {
        let parents = self.dag.parents(v);
        let mut out = vec![0; parents.len()];
        for (i, &p) in parents.iter().enumerate().rev() {
            let k = self.support[p].len();
            out[i] = config % k;
            config /= k;
        }
        out
    }

    /// `P(v = support[value] | parents in state)`.
    pub fn prob(&self, v: Vertex, state: &[usize], value: usize) -> f64 {
        self.cpt[v][self.config_index(v, state)][value]
    }

    pub fn value_index(&self, v: Vertex, value: f64) -> Result<usize> {
        self.support[v]
            .iter()
            .position(|&x| x == value)
            .ok_or_else(|| {
                Error::InvalidLaw(format!(
                    "{} is not in the support of `{}`",
                    format_value(value),
                    self.dag.name(v)
                ))
            })
    }

    /// Size of the product of all supports.
    pub fn state_space(&self) -> u128 {
        self.support
            .iter()
            .map(|s| s.len() as u128)
            .fold(1u128, |a, b| a.saturating_mul(b))
    }

    fn config_key(&self, v: Vertex, config: usize) -> String {
        let parents = self.dag.parents(v);
        self.config_values(v, config)
            .iter()
            .zip(parents)
            .map(|(&i, &p)| format_value(self.support[p][i]))
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Parses the JSON law format against `dag`.
    pub fn from_json(dag: Dag, text: &str, epsilon: f64) -> Result<Self> {
        let root: Value = serde_json::from_str(text)
            .map_err(|e| Error::InvalidLaw(format!("malformed JSON: {e}")))?;
        let obj = root
            .as_object()
            .ok_or_else(|| Error::InvalidLaw("top level must be an object".into()))?;
        for key in obj.keys() {
            dag.vertex(key)?;
        }
        let n = dag.len();
        let mut support = Vec::with_capacity(n);
        for v in 0..n {
            let name = dag.name(v);
            let entry = obj
                .get(name)
                .ok_or_else(|| Error::InvalidLaw(format!("missing vertex `{name}`")))?;
            let values = entry
                .get("support")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::InvalidLaw(format!("`{name}` lacks a support array")))?;
            let values = values
                .iter()
                .map(|x| {
                    x.as_f64()
                        .ok_or_else(|| Error::InvalidLaw(format!("`{name}` support must be numeric")))
                })
                .collect::<Result<Vec<f64>>>()?;
            support.push(values);
        }
        let mut law = DiscreteLaw {
            dag,
            support,
            cpt: vec![Vec::new(); n],
        };
        for v in 0..n {
            let name = law.dag.name(v).to_string();
            let table = obj[&name]
                .get("cpt")
                .and_then(Value::as_object)
                .ok_or_else(|| Error::InvalidLaw(format!("`{name}` lacks a cpt object")))?;
            let configs = law.configs_checked(v)?;
            let mut rows = Vec::with_capacity(configs);
            for c in 0..configs {
                let key = law.config_key(v, c);
                let row = table
                    .get(&key)
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::InvalidLaw(format!("`{name}` lacks row `{key}`")))?;
                rows.push(
                    row.iter()
                        .map(|x| {
                            x.as_f64().ok_or_else(|| {
                                Error::InvalidLaw(format!("`{name}` row `{key}` must be numeric"))
                            })
                        })
                        .collect::<Result<Vec<f64>>>()?,
                );
            }
            if table.len() != configs {
                return Err(Error::InvalidLaw(format!(
                    "`{name}` has {} rows, expected {configs}",
                    table.len()
                )));
            }
            law.cpt[v] = rows;
        }
        let eps = vec![epsilon; n];
        Self::with_positivity(law.dag, law.support, law.cpt, &eps)
    }

    pub fn to_json(&self) -> Value {
        let mut out = Map::new();
        for v in 0..self.dag.len() {
            let mut table = Map::new();
            for (c, row) in self.cpt[v].iter().enumerate() {
                table.insert(
                    self.config_key(v, c),
                    Value::Array(row.iter().map(|&p| number(p)).collect()),
                );
            }
            let mut entry = Map::new();
            entry.insert(
                "support".into(),
                Value::Array(self.support[v].iter().map(|&x| number(x)).collect()),
            );
            entry.insert("cpt".into(), Value::Object(table));
            out.insert(self.dag.name(v).to_string(), Value::Object(entry));
        }
        Value::Object(out)
    }

    /// Replaces row `config` of `v` by `p(x)(1 + t s(x))`.
    ///
    /// The direction must have zero mean under the row. The result is only
    /// checked for being a probability table.
    pub fn perturb_row(&self, v: Vertex, config: usize, direction: &[f64], t: f64) -> Result<Self> {
        let mut law = self.clone();
        let row = &mut law.cpt[v][config];
        if direction.len() != row.len() {
            return Err(Error::InvalidLaw("direction has the wrong length".into()));
        }
        for (p, s) in row.iter_mut().zip(direction) {
            *p *= 1.0 + t * s;
        }
        law.check_vertex(v, 0.0)?;
        Ok(law)
    }

    /// Samples a law with every row drawn from a symmetric Dirichlet, then
    /// clamped into `[epsilon, 1 - epsilon]`.
    pub fn random(dag: &Dag, spec: &RandomLawSpec) -> Result<Self> {
        Self::random_stream(dag, spec, 0)
    }

    pub(crate) fn random_stream(dag: &Dag, spec: &RandomLawSpec, stream: u64) -> Result<Self> {
        for name in spec.supports.keys() {
            dag.vertex(name)?;
        }
        let support: Vec<Vec<f64>> = dag
            .names()
            .iter()
            .map(|n| spec.supports.get(n).cloned().unwrap_or_else(|| vec![0.0, 1.0]))
            .collect();
        let gamma = Gamma::new(spec.concentration, 1.0)
            .map_err(|e| Error::InvalidLaw(format!("bad concentration: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(stream);
        let mut law = DiscreteLaw {
            dag: dag.clone(),
            support,
            cpt: vec![Vec::new(); dag.len()],
        };
        for v in 0..dag.len() {
            let k = law.support[v].len();
            if k as f64 * spec.epsilon > 1.0 {
                return Err(Error::InvalidLaw(format!(
                    "epsilon {} is too large for `{}`",
                    spec.epsilon,
                    dag.name(v)
                )));
            }
            let configs = law.configs_checked(v)?;
            law.cpt[v] = (0..configs)
                .map(|_| {
                    let draw: Vec<f64> = (0..k).map(|_| gamma.sample(&mut rng)).collect();
                    clamp_row(draw, spec.epsilon)
                })
                .collect();
        }
        let eps = vec![spec.epsilon; dag.len()];
        Self::with_positivity(law.dag, law.support, law.cpt, &eps)
    }
}

fn clamp_row(mut row: Vec<f64>, eps: f64) -> Vec<f64> {
    let k = row.len();
    if k == 1 {
        return vec![1.0];
    }
    let total: f64 = row.iter().sum();
    if total > 0.0 {
        row.iter_mut().for_each(|p| *p /= total);
    } else {
        row = vec![1.0 / k as f64; k];
    }
    for _ in 0..64 {
        row.iter_mut().for_each(|p| *p = p.clamp(eps, 1.0 - eps));
        let total: f64 = row.iter().sum();
        row.iter_mut().for_each(|p| *p /= total);
        if row.iter().all(|&p| p >= eps && p <= 1.0 - eps) {
            return row;
        }
    }
    let slack = 1.0 - k as f64 * eps;
    let total: f64 = row.iter().sum();
    row.iter().map(|p| eps + slack * p / total).collect()
}

/// Seeded recipe for [`DiscreteLaw::random`].
#[derive(Clone, Debug, PartialEq)]
pub struct RandomLawSpec {
    pub seed: u64,
    pub epsilon: f64,
    /// Dirichlet concentration shared by every entry of a row.
    pub concentration: f64,
    /// Support overrides by vertex name; other vertices are binary `{0, 1}`.
    pub supports: BTreeMap<String, Vec<f64>>,
}

impl RandomLawSpec {
    pub fn new(seed: u64) -> Self {
        RandomLawSpec {
            seed,
            epsilon: DEFAULT_EPSILON,
            concentration: 1.0,
            supports: BTreeMap::new(),
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_support(mut self, vertex: &str, values: Vec<f64>) -> Self {
        self.supports.insert(vertex.to_string(), values);
        self
    }
}
