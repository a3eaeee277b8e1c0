use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::{Vertex, VertexSet};

use super::law::{DiscreteLaw, DEFAULT_MAX_STATES};

/// A real function of the full configuration, one entry per joint state.
pub type RandomVar = Vec<f64>;

/// The positive-probability states of a [`DiscreteLaw`] with their masses.
#[derive(Clone, Debug)]
pub struct Joint<'a> {
    law: &'a DiscreteLaw,
    width: usize,
    states: Vec<u16>,
    prob: Vec<f64>,
}

impl<'a> Joint<'a> {
    pub fn new(law: &'a DiscreteLaw) -> Result<Self> {
        Self::with_guard(law, DEFAULT_MAX_STATES)
    }

    /// Enumerates the joint, failing if the product of supports exceeds `limit`.
    pub fn with_guard(law: &'a DiscreteLaw, limit: u128) -> Result<Self> {
        let size = law.state_space();
        if size > limit {
            return Err(Error::GuardExceeded {
                what: "joint state space",
                size,
                limit,
            });
        }
        let g = law.dag();
        let order = g.topological_sort(&g.all());
        let width = g.len();
        let mut joint = Joint {
            law,
            width,
            states: Vec::new(),
            prob: Vec::new(),
        };
        let mut state = vec![0usize; width];
        joint.enumerate(&order, 0, 1.0, &mut state);
        Ok(joint)
    }

    fn enumerate(&mut self, order: &[Vertex], depth: usize, mass: f64, state: &mut [usize]) {
        if depth == order.len() {
            self.states.extend(state.iter().map(|&i| i as u16));
            self.prob.push(mass);
            return;
        }
        let v = order[depth];
        let row = &self.law.rows(v)[self.law.config_index(v, state)];
        for (i, &p) in row.iter().enumerate() {
            if p > 0.0 {
                state[v] = i;
                self.enumerate(order, depth + 1, mass * p, state);
            }
        }
        state[v] = 0;
    }

    pub fn law(&self) -> &'a DiscreteLaw {
        self.law
    }

    /// Number of positive-probability states.
    pub fn len(&self) -> usize {
        self.prob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prob.is_empty()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.prob
    }

    /// Support index of `v` in state `s`.
    pub fn index(&self, s: usize, v: Vertex) -> usize {
        self.states[s * self.width + v] as usize
    }

    /// Support indices of every vertex in state `s`.
    pub fn state(&self, s: usize) -> Vec<usize> {
        self.states[s * self.width..(s + 1) * self.width]
            .iter()
            .map(|&i| i as usize)
            .collect()
    }

    pub fn constant(&self, c: f64) -> RandomVar {
        vec![c; self.len()]
    }

    pub fn value(&self, v: Vertex) -> RandomVar {
        let support = self.law.support(v);
        (0..self.len()).map(|s| support[self.index(s, v)]).collect()
    }

    /// `I(v = value)`.
    pub fn indicator(&self, v: Vertex, value: f64) -> Result<RandomVar> {
        let i = self.law.value_index(v, value)?;
        Ok((0..self.len())
            .map(|s| if self.index(s, v) == i { 1.0 } else { 0.0 })
            .collect())
    }

    /// Product of indicators `I(v_k = x_k)`.
    pub fn indicator_all(&self, levels: &[(Vertex, f64)]) -> Result<RandomVar> {
        let mut out = self.constant(1.0);
        for &(v, x) in levels {
            let ind = self.indicator(v, x)?;
            out.iter_mut().zip(ind).for_each(|(o, i)| *o *= i);
        }
        Ok(out)
    }

    pub fn expect(&self, f: &[f64]) -> f64 {
        self.prob.iter().zip(f).map(|(p, x)| p * x).sum()
    }

    pub fn variance(&self, f: &[f64]) -> f64 {
        let m = self.expect(f);
        self.prob.iter().zip(f).map(|(p, x)| p * (x - m) * (x - m)).sum()
    }

    pub fn covariance(&self, f: &[f64], g: &[f64]) -> f64 {
        let mf = self.expect(f);
        let mg = self.expect(g);
        self.prob
            .iter()
            .zip(f.iter().zip(g))
            .map(|(p, (x, y))| p * (x - mf) * (y - mg))
            .sum()
    }

    fn keys(&self, set: &VertexSet) -> Vec<u64> {
        let law = self.law;
        (0..self.len())
            .map(|s| {
                set.iter().fold(0u64, |acc, v| {
                    acc * law.support(v).len() as u64 + self.index(s, v) as u64
                })
            })
            .collect()
    }

    /// `E[f | S]` as a function of the state.
    pub fn cond_expect(&self, f: &[f64], set: &VertexSet) -> RandomVar {
        self.cond_expect_given(f, set, &self.constant(1.0))
    }

    /// `E[f | event, S]` with `event` a 0/1 random variable, as a function of
    /// `S`. Values of `S` where the event has no mass yield NaN.
    pub fn cond_expect_given(&self, f: &[f64], set: &VertexSet, event: &[f64]) -> RandomVar {
        let keys = self.keys(set);
        let mut acc: HashMap<u64, (f64, f64)> = HashMap::new();
        for s in 0..self.len() {
            let w = self.prob[s] * event[s];
            if w > 0.0 {
                let e = acc.entry(keys[s]).or_insert((0.0, 0.0));
                e.0 += w * f[s];
                e.1 += w;
            }
        }
        keys.iter()
            .map(|k| match acc.get(k) {
                Some(&(num, den)) => num / den,
                None => f64::NAN,
            })
            .collect()
    }

    /// `var(f | S)`.
    pub fn cond_variance(&self, f: &[f64], set: &VertexSet) -> RandomVar {
        self.cond_variance_given(f, set, &self.constant(1.0))
    }

    /// `var(f | event, S)`.
    pub fn cond_variance_given(&self, f: &[f64], set: &VertexSet, event: &[f64]) -> RandomVar {
        self.cond_covariance_given(f, f, set, event)
    }

    /// `cov(f, g | S)`.
    pub fn cond_covariance(&self, f: &[f64], g: &[f64], set: &VertexSet) -> RandomVar {
        self.cond_covariance_given(f, g, set, &self.constant(1.0))
    }

    fn cond_covariance_given(&self, f: &[f64], g: &[f64], set: &VertexSet, event: &[f64]) -> RandomVar {
        let mf = self.cond_expect_given(f, set, event);
        let mg = self.cond_expect_given(g, set, event);
        let centered: RandomVar = (0..self.len()).map(|s| (f[s] - mf[s]) * (g[s] - mg[s])).collect();
        self.cond_expect_given(&centered, set, event)
    }
}
