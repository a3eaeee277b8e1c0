//! Python bindings: graphs, laws, adjustment sets, time dependent sets and
//! the efficiency check. Structured results come back as plain dicts.

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

use optadj::adjustment;
use optadj::efficiency;
use optadj::oracle::{self, DiscreteLaw, Joint, RandomLawSpec};
use optadj::timedep::{self, TimeDepSet};
use optadj::{Query, VertexSet};

create_exception!(optadj_py, OptadjError, PyException);

fn err(e: optadj::Error) -> PyErr {
    OptadjError::new_err(e.to_string())
}

/// Hands a JSON document to Python's `json.loads`.
fn to_py<'py>(py: Python<'py>, value: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (value.to_string(),))
}

/// A causal DAG.
#[pyclass(name = "Dag", module = "optadj_py", frozen)]
pub struct PyDag {
    inner: optadj::Dag,
}

impl PyDag {
    fn query(&self, treatments: Vec<String>, outcome: &str) -> PyResult<Query> {
        Query::from_names(&self.inner, &treatments, outcome).map_err(err)
    }

    fn set(&self, names: Vec<String>) -> PyResult<VertexSet> {
        self.inner.set(names.iter().map(String::as_str)).map_err(err)
    }

    fn blocks(&self, blocks: Vec<Vec<String>>) -> PyResult<TimeDepSet> {
        let blocks = blocks
            .into_iter()
            .map(|b| self.set(b))
            .collect::<PyResult<Vec<_>>>()?;
        Ok(TimeDepSet::new(blocks))
    }
}

#[pymethods]
impl PyDag {
    /// Parses the line-oriented DAG format.
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(PyDag {
            inner: optadj::Dag::parse(text).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| OptadjError::new_err(format!("cannot read `{path}`: {e}")))?;
        Self::new(&text)
    }

    fn names(&self) -> Vec<String> {
        self.inner.names().to_vec()
    }

    fn edges(&self) -> Vec<(String, String)> {
        let g = &self.inner;
        g.edges()
            .into_iter()
            .map(|(t, h)| (g.name(t).to_string(), g.name(h).to_string()))
            .collect()
    }

    fn parents(&self, name: &str) -> PyResult<Vec<String>> {
        let g = &self.inner;
        let v = g.vertex(name).map_err(err)?;
        Ok(g.parents(v).iter().map(|&p| g.name(p).to_string()).collect())
    }

    fn d_separated(&self, x: Vec<String>, y: Vec<String>, z: Vec<String>) -> PyResult<bool> {
        self.inner
            .d_separated(&self.set(x)?, &self.set(y)?, &self.set(z)?)
            .map_err(err)
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Dag({} vertices, {} edges)", self.inner.len(), self.inner.edge_count())
    }
}

/// A finite discrete law factorizing along a DAG.
#[pyclass(name = "Law", module = "optadj_py", frozen)]
pub struct PyLaw {
    inner: DiscreteLaw,
}

#[pymethods]
impl PyLaw {
    /// Seeded random law with binary supports unless overridden.
    #[staticmethod]
    #[pyo3(signature = (dag, seed, epsilon = oracle::DEFAULT_EPSILON))]
    fn random(dag: &PyDag, seed: u64, epsilon: f64) -> PyResult<Self> {
        let spec = RandomLawSpec::new(seed).with_epsilon(epsilon);
        Ok(PyLaw {
            inner: DiscreteLaw::random(&dag.inner, &spec).map_err(err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (dag, text, epsilon = oracle::DEFAULT_EPSILON))]
    fn from_json(dag: &PyDag, text: &str, epsilon: f64) -> PyResult<Self> {
        Ok(PyLaw {
            inner: DiscreteLaw::from_json(dag.inner.clone(), text, epsilon).map_err(err)?,
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }

    /// `E[Y_a]` by the truncated factorization.
    fn interventional_mean(&self, treatments: Vec<String>, outcome: &str, levels: Vec<f64>) -> PyResult<f64> {
        let q = Query::from_names(self.inner.dag(), &treatments, outcome).map_err(err)?;
        oracle::interventional_mean(&self.inner, &q, &levels).map_err(err)
    }

    /// Variance of the influence function of the estimator adjusting for `z`.
    #[pyo3(signature = (treatment, outcome, z, level = 1.0))]
    fn adjusted_variance(&self, treatment: String, outcome: &str, z: Vec<String>, level: f64) -> PyResult<f64> {
        let g = self.inner.dag();
        let q = Query::from_names(g, &[treatment], outcome).map_err(err)?;
        let z = g.set(z.iter().map(String::as_str)).map_err(err)?;
        let j = Joint::new(&self.inner).map_err(err)?;
        let psi = oracle::psi_ti(&j, &q, &[level], &z).map_err(err)?;
        Ok(j.variance(&psi))
    }
}

/// The optimal set `O` and, for a single treatment, `O_min`.
#[pyfunction]
fn optimal_set<'py>(
    py: Python<'py>,
    dag: &PyDag,
    treatments: Vec<String>,
    outcome: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let g = &dag.inner;
    let q = dag.query(treatments, outcome)?;
    let o = g.labels(&adjustment::optimal_set(g, &q).map_err(err)?);
    let mut out = serde_json::json!({ "O": o });
    if q.point().is_ok() {
        out["O_min"] = g.labels(&adjustment::optimal_minimal_set(g, &q).map_err(err)?).into();
    }
    to_py(py, &out)
}

/// Validity and minimality of an adjustment set.
#[pyfunction]
fn check_adjustment<'py>(
    py: Python<'py>,
    dag: &PyDag,
    treatments: Vec<String>,
    outcome: &str,
    z: Vec<String>,
) -> PyResult<Bound<'py, PyAny>> {
    let q = dag.query(treatments, outcome)?;
    let r = adjustment::is_minimal_adjustment(&dag.inner, &q, &dag.set(z)?).map_err(err)?;
    to_py(py, &serde_json::to_value(&r).expect("report serializes"))
}

/// Every valid time independent adjustment set.
#[pyfunction]
fn enumerate_adjustment_sets(dag: &PyDag, treatments: Vec<String>, outcome: &str) -> PyResult<Vec<Vec<String>>> {
    let g = &dag.inner;
    let q = dag.query(treatments, outcome)?;
    let sets = adjustment::enumerate_adjustment_sets(g, &q, adjustment::DEFAULT_MAX_CANDIDATES)
        .map_err(err)?;
    Ok(sets.iter().map(|z| g.labels(z)).collect())
}

/// Graphical comparison of two valid adjustment sets.
#[pyfunction]
fn compare_adjustment_sets<'py>(
    py: Python<'py>,
    dag: &PyDag,
    treatments: Vec<String>,
    outcome: &str,
    first: Vec<String>,
    second: Vec<String>,
) -> PyResult<Bound<'py, PyAny>> {
    let q = dag.query(treatments, outcome)?;
    let v = adjustment::compare_adjustment_sets(&dag.inner, &q, &dag.set(first)?, &dag.set(second)?)
        .map_err(err)?;
    to_py(py, &serde_json::to_value(&v).expect("verdict serializes"))
}

/// Sequential criterion for one block per treatment.
#[pyfunction]
fn check_time_dep<'py>(
    py: Python<'py>,
    dag: &PyDag,
    treatments: Vec<String>,
    outcome: &str,
    blocks: Vec<Vec<String>>,
) -> PyResult<Bound<'py, PyAny>> {
    let q = dag.query(treatments, outcome)?;
    let r = timedep::is_valid_time_dep(&dag.inner, &q, &dag.blocks(blocks)?).map_err(err)?;
    to_py(py, &serde_json::to_value(&r).expect("report serializes"))
}

/// Every time dependent set passing the sequential criterion.
#[pyfunction]
fn enumerate_time_dep(
    dag: &PyDag,
    treatments: Vec<String>,
    outcome: &str,
) -> PyResult<Vec<Vec<Vec<String>>>> {
    let q = dag.query(treatments, outcome)?;
    let sets = timedep::enumerate_time_dep(&dag.inner, &q, timedep::DEFAULT_MAX_CANDIDATES)
        .map_err(err)?;
    Ok(sets.iter().map(|z| z.labels(&dag.inner)).collect())
}

/// Global efficiency check with the symbolic efficient influence function.
#[pyfunction]
fn check_efficient<'py>(
    py: Python<'py>,
    dag: &PyDag,
    treatment: String,
    outcome: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let q = dag.query(vec![treatment], outcome)?;
    let r = efficiency::check_efficient(&dag.inner, &q).map_err(err)?;
    to_py(py, &r.to_json())
}

#[pymodule]
fn optadj_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("OptadjError", m.py().get_type::<OptadjError>())?;
    m.add_class::<PyDag>()?;
    m.add_class::<PyLaw>()?;
    m.add_function(wrap_pyfunction!(optimal_set, m)?)?;
    m.add_function(wrap_pyfunction!(check_adjustment, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_adjustment_sets, m)?)?;
    m.add_function(wrap_pyfunction!(compare_adjustment_sets, m)?)?;
    m.add_function(wrap_pyfunction!(check_time_dep, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_time_dep, m)?)?;
    m.add_function(wrap_pyfunction!(check_efficient, m)?)?;
    Ok(())
}
