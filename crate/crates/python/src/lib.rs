//! Python bindings for the matsec library.

use std::collections::BTreeMap;

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use matsec::buckets::{Bucketing, RandomBucketingParams, WeightClassing};
use matsec::experiment::{self, Settings, VerifyMode};
use matsec::matroid::{
    greedy_max_weight, io, ElementId, LaminarSet, Matroid as _, MatroidInstance, WeightedGroundSet,
};
use matsec::Error;

fn to_py(err: Error) -> PyErr {
    match err {
        Error::Io(e) => PyOSError::new_err(e.to_string()),
        Error::VerificationFailed(_) | Error::InfeasibleSelection { .. } | Error::AuditViolation(_) => {
            PyRuntimeError::new_err(err.to_string())
        }
        other => PyValueError::new_err(other.to_string()),
    }
}

fn ids(raw: Vec<usize>) -> Vec<ElementId> {
    raw.into_iter().map(ElementId).collect()
}

/// A matroid from one of the built-in families.
#[pyclass(name = "Matroid", module = "matsec_py", frozen)]
struct PyMatroid {
    inner: MatroidInstance,
}

#[pymethods]
impl PyMatroid {
    #[staticmethod]
    fn uniform(n: usize, k: usize) -> PyResult<Self> {
        Self::wrap(MatroidInstance::uniform(n, k))
    }

    /// `blocks` is a list of `(capacity, [element ids])`.
    #[staticmethod]
    fn partition(n: usize, blocks: Vec<(usize, Vec<usize>)>) -> PyResult<Self> {
        Self::wrap(MatroidInstance::partition(
            n,
            blocks.into_iter().map(|(cap, b)| (cap, ids(b))).collect(),
        ))
    }

    /// Element `i` is the edge `edges[i]`.
    #[staticmethod]
    fn graphic(vertices: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        Self::wrap(MatroidInstance::graphic(vertices, edges))
    }

    /// `sets` is a list of `(capacity, [element ids])` forming a laminar family.
    #[staticmethod]
    fn laminar(n: usize, sets: Vec<(usize, Vec<usize>)>) -> PyResult<Self> {
        Self::wrap(MatroidInstance::laminar(
            n,
            sets.into_iter()
                .map(|(capacity, members)| LaminarSet {
                    capacity,
                    members: ids(members),
                })
                .collect(),
        ))
    }

    /// `left[j]` lists the elements adjacent to left vertex `j`.
    #[staticmethod]
    fn transversal(n: usize, left: Vec<Vec<usize>>) -> PyResult<Self> {
        Self::wrap(MatroidInstance::transversal(n, left.into_iter().map(ids).collect()))
    }

    #[staticmethod]
    fn from_file(path: std::path::PathBuf) -> PyResult<Self> {
        Self::wrap(io::read_instance(&path))
    }

    #[getter]
    fn family(&self) -> &'static str {
        self.inner.family_name()
    }

    fn __len__(&self) -> usize {
        self.inner.ground_size()
    }

    fn rank(&self, set: Vec<usize>) -> PyResult<usize> {
        self.inner.rank(&ids(set)).map_err(to_py)
    }

    fn is_independent(&self, set: Vec<usize>) -> PyResult<bool> {
        self.inner.is_independent(&ids(set)).map_err(to_py)
    }

    fn span_contains(&self, set: Vec<usize>, element: usize) -> PyResult<bool> {
        self.inner.span_contains(&ids(set), ElementId(element)).map_err(to_py)
    }

    /// Maximum-weight basis (sorted ids) and its weight.
    fn max_weight_basis(&self, weights: Vec<f64>) -> PyResult<(Vec<usize>, f64)> {
        let w = WeightedGroundSet::new(weights).map_err(to_py)?;
        if w.len() != self.inner.ground_size() {
            return Err(PyValueError::new_err(format!(
                "{} weights for a ground set of size {}",
                w.len(),
                self.inner.ground_size()
            )));
        }
        let basis = greedy_max_weight(&self.inner, &w, &self.inner.ground_set()).map_err(to_py)?;
        let total = w.total(&basis);
        let mut out: Vec<usize> = basis.into_iter().map(|e| e.0).collect();
        out.sort_unstable();
        Ok((out, total))
    }

    fn __repr__(&self) -> String {
        format!("Matroid({}, n={})", self.inner.family_name(), self.inner.ground_size())
    }
}

impl PyMatroid {
    fn wrap(m: matsec::Result<MatroidInstance>) -> PyResult<Self> {
        m.map(|inner| Self { inner }).map_err(to_py)
    }
}

fn settings(entries: BTreeMap<String, Bound<'_, PyAny>>) -> PyResult<Settings> {
    let mut s = Settings::new();
    for (k, v) in entries {
        s.set(&k, v.str()?.to_cow()?.into_owned());
    }
    Ok(s)
}

/// Runs an experiment described by `key = value` settings, as in a config
/// file. Returns the CSV text and the summary as a dict (empty for zero
/// trials).
#[pyfunction]
fn run_experiment(config: BTreeMap<String, Bound<'_, PyAny>>) -> PyResult<(String, BTreeMap<String, String>)> {
    let config = settings(config)?.to_config().map_err(to_py)?;
    let out = experiment::run(&config).map_err(to_py)?;
    let summary = out
        .summary
        .map(|s| {
            s.to_key_values()
                .lines()
                .filter_map(|l| l.split_once('='))
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect()
        })
        .unwrap_or_default();
    Ok((out.csv, summary))
}

/// Checks the selection bounds (`mode` "exact" or "monte-carlo") or the
/// matroid axioms (`mode` "axioms"). Returns whether every check passed and
/// the report text.
#[pyfunction]
#[pyo3(signature = (config, mode = "exact"))]
fn verify(config: BTreeMap<String, Bound<'_, PyAny>>, mode: &str) -> PyResult<(bool, String)> {
    let mode = match mode {
        "exact" => VerifyMode::Exact,
        "monte-carlo" => VerifyMode::MonteCarlo,
        "axioms" => VerifyMode::Axioms,
        other => return Err(PyValueError::new_err(format!("unknown mode `{other}`"))),
    };
    let config = settings(config)?.to_config().map_err(to_py)?;
    let out = experiment::verify(&config, mode).map_err(to_py)?;
    Ok((out.passed(), out.to_text()))
}

/// Weight class of `weight` under the promise `(W, ρ̃)`.
#[pyfunction]
fn weight_class(max_weight: f64, rho_tilde: u64, weight: f64) -> PyResult<usize> {
    WeightClassing::new(max_weight, rho_tilde)
        .and_then(|c| c.class_of(weight))
        .map_err(to_py)
}

/// Class ranges `(first, last)` of the buckets for `h` classes and `(τ, Δ)`.
#[pyfunction]
fn bucketing(h: usize, tau: u32, delta: u64) -> PyResult<Vec<(usize, usize)>> {
    Bucketing::from_params(h, RandomBucketingParams { tau, delta })
        .map(|b| b.endpoints().to_vec())
        .map_err(to_py)
}

#[pyfunction]
fn competitive_bound(h: usize) -> f64 {
    matsec::analysis::competitive_bound(h)
}

#[pyfunction]
fn end_to_end_bound(rank: usize) -> f64 {
    matsec::analysis::end_to_end_bound(rank)
}

#[pymodule]
fn matsec_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMatroid>()?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(weight_class, m)?)?;
    m.add_function(wrap_pyfunction!(bucketing, m)?)?;
    m.add_function(wrap_pyfunction!(competitive_bound, m)?)?;
    m.add_function(wrap_pyfunction!(end_to_end_bound, m)?)?;
    Ok(())
}
