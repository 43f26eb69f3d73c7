//! Python bindings: the job-sequence model, the online schedulers, the
//! exact-optimum oracle, the input generators, the stability checker, and
//! the random-order harness, exposed as plain functions returning dicts.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use pyo3::IntoPyObjectExt;

use rom_sched::algorithms::{self, AlgConfig, HRule, SchedulerRegistry};
use rom_sched::generators::{self, Dist};
use rom_sched::harness::{self, RomMode};
use rom_sched::model::{self, ratio_r};
use rom_sched::opt_oracle::{self, OracleLimits};
use rom_sched::stability::{self, AnalysisConstants, StabilityParams};

fn err(e: rom_sched::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json_to_py(py: Python<'_>, value: &serde_json::Value) -> PyResult<Py<PyAny>> {
    match value {
        serde_json::Value::Null => Ok(py.None()),
        serde_json::Value::Bool(b) => b.into_py_any(py),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_py_any(py)
            } else if let Some(u) = n.as_u64() {
                u.into_py_any(py)
            } else {
                n.as_f64().unwrap_or(f64::NAN).into_py_any(py)
            }
        }
        serde_json::Value::String(s) => s.into_py_any(py),
        serde_json::Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_py_any(py)
        }
        serde_json::Value::Object(map) => {
            let dict = PyDict::new(py);
            for (key, val) in map {
                dict.set_item(key, json_to_py(py, val)?)?;
            }
            dict.into_py_any(py)
        }
    }
}

fn serialize_to_py<T: serde::Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let json = serde_json::to_value(value)
        .map_err(|e| PyValueError::new_err(format!("serialization failed: {e}")))?;
    json_to_py(py, &json)
}

fn rule_for(h: Option<usize>) -> HRule {
    h.map(HRule::Explicit).unwrap_or_default()
}

fn parse_dist(spec: Option<&str>) -> PyResult<Option<Dist>> {
    spec.map(Dist::parse).transpose().map_err(err)
}

/// A job sequence in arrival order plus its machine count.
#[pyclass(name = "JobSequence", from_py_object)]
#[derive(Clone)]
struct PyJobSequence {
    inner: model::JobSequence,
}

#[pymethods]
impl PyJobSequence {
    #[new]
    fn new(m: usize, processing_times: Vec<f64>) -> PyResult<Self> {
        Ok(PyJobSequence {
            inner: model::JobSequence::from_times(m, &processing_times).map_err(err)?,
        })
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn processing_times(&self) -> Vec<f64> {
        self.inner.processing_times()
    }

    /// Job ids in arrival order (the identity for a freshly built sequence).
    fn job_ids(&self) -> Vec<usize> {
        self.inner.jobs().iter().map(|j| j.id).collect()
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyJobSequence {
            inner: model::JobSequence::from_json_str(text).map_err(err)?,
        })
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    #[staticmethod]
    fn from_csv(text: &str) -> PyResult<Self> {
        Ok(PyJobSequence {
            inner: model::JobSequence::from_csv_str(text).map_err(err)?,
        })
    }

    /// Uniformly permuted copy, deterministic per seed.
    fn permuted(&self, seed: u64) -> Self {
        PyJobSequence {
            inner: harness::permute(&self.inner, seed),
        }
    }

    /// `R = min(L/p_max, p_max/L)`.
    fn ratio_r(&self) -> PyResult<f64> {
        ratio_r(&self.inner).map_err(err)
    }

    fn is_proper(&self) -> bool {
        model::classify_plain(&self.inner, algorithms::competitive_ratio()).is_proper()
    }

    fn __len__(&self) -> usize {
        self.inner.n()
    }

    fn __repr__(&self) -> String {
        format!("JobSequence(m={}, n={})", self.inner.m(), self.inner.n())
    }
}

fn build_scheduler(
    name: &str,
    seq: &model::JobSequence,
    h: Option<usize>,
) -> PyResult<Box<dyn algorithms::Scheduler>> {
    SchedulerRegistry::with_defaults(rule_for(h))
        .build(name, seq)
        .map_err(err)
}

/// The derived constants for a machine count: c, h, i, k, alpha and the
/// analysis thresholds.
#[pyfunction]
#[pyo3(signature = (m = 100, h = None))]
fn constants(py: Python<'_>, m: usize, h: Option<usize>) -> PyResult<Py<PyAny>> {
    let cfg = AlgConfig::derive(m, rule_for(h)).map_err(err)?;
    let k = AnalysisConstants::new(cfg.c);
    let dict = PyDict::new(py);
    dict.set_item("c", cfg.c)?;
    dict.set_item("m", cfg.m)?;
    dict.set_item("h", cfg.h)?;
    dict.set_item("i", cfg.i)?;
    dict.set_item("k", cfg.k)?;
    dict.set_item("alpha", cfg.alpha)?;
    dict.set_item("lambda_start", k.lambda_start())?;
    dict.set_item("lambda_end_limit", k.lambda_end_limit())?;
    dict.set_item("min_valid_m", algorithms::min_valid_m(rule_for(h)))?;
    dict.into_py_any(py)
}

/// Grid verification of the analysis inequalities; mirrors the CLI's
/// `run --verify-constants`.
#[pyfunction]
#[pyo3(signature = (m = 100, h = None, lambda_grid = 10_000, eps_grid = 1_000))]
fn verify_constants(
    py: Python<'_>,
    m: usize,
    h: Option<usize>,
    lambda_grid: usize,
    eps_grid: usize,
) -> PyResult<Py<PyAny>> {
    let cfg = AlgConfig::derive(m, rule_for(h)).map_err(err)?;
    let report = stability::verify_analysis_constants(&cfg, lambda_grid, eps_grid);
    serialize_to_py(py, &report)
}

#[pyfunction]
fn uniform_jobs(r: usize, m: usize) -> PyResult<PyJobSequence> {
    Ok(PyJobSequence {
        inner: generators::uniform_jobs(r, m).map_err(err)?,
    })
}

#[pyfunction]
fn lb_four_thirds(m: usize) -> PyResult<PyJobSequence> {
    Ok(PyJobSequence {
        inner: generators::lb_four_thirds(m).map_err(err)?,
    })
}

#[pyfunction]
fn lb_three_halves(m: usize) -> PyResult<PyJobSequence> {
    Ok(PyJobSequence {
        inner: generators::lb_three_halves(m).map_err(err)?,
    })
}

#[pyfunction]
fn greedy_adversarial(m: usize) -> PyResult<PyJobSequence> {
    Ok(PyJobSequence {
        inner: generators::greedy_adversarial(m).map_err(err)?,
    })
}

/// Draw i.i.d. processing times until the sequence is proper. `dist` uses
/// the CLI syntax, e.g. "uniform:1,2".
#[pyfunction]
#[pyo3(signature = (m, n, seed = 0, dist = None))]
fn random_proper(m: usize, n: usize, seed: u64, dist: Option<&str>) -> PyResult<PyJobSequence> {
    Ok(PyJobSequence {
        inner: generators::random_proper(m, n, parse_dist(dist)?, seed).map_err(err)?,
    })
}

/// Run a scheduler ("greedy" or "alg") over the sequence in its given
/// order; returns makespan, per-job machine assignment and sorted loads.
#[pyfunction]
#[pyo3(signature = (scheduler, seq, h = None))]
fn run(py: Python<'_>, scheduler: &str, seq: &PyJobSequence, h: Option<usize>) -> PyResult<Py<PyAny>> {
    let sched = build_scheduler(scheduler, &seq.inner, h)?;
    let out = algorithms::run_online(sched.as_ref(), &seq.inner).map_err(err)?;
    let dict = PyDict::new(py);
    dict.set_item("makespan", out.makespan)?;
    dict.set_item("assignment", out.assignment)?;
    dict.set_item("sorted_loads", out.sorted_loads)?;
    dict.into_py_any(py)
}

/// Step traces of a run in the given order, as a list of dicts.
#[pyfunction]
#[pyo3(signature = (scheduler, seq, h = None))]
fn run_traces(
    py: Python<'_>,
    scheduler: &str,
    seq: &PyJobSequence,
    h: Option<usize>,
) -> PyResult<Py<PyAny>> {
    let sched = build_scheduler(scheduler, &seq.inner, h)?;
    let out = algorithms::run_online(sched.as_ref(), &seq.inner).map_err(err)?;
    serialize_to_py(py, &out.traces)
}

#[pyfunction]
fn opt_lower_bound(seq: &PyJobSequence) -> f64 {
    opt_oracle::opt_lower_bound(&seq.inner)
}

#[pyfunction]
fn lpt_upper_bound(seq: &PyJobSequence) -> f64 {
    opt_oracle::lpt_upper_bound(&seq.inner)
}

/// Exact minimum makespan by branch-and-bound.
#[pyfunction]
#[pyo3(signature = (seq, max_n = 24, node_budget = 50_000_000))]
fn exact_opt(
    py: Python<'_>,
    seq: &PyJobSequence,
    max_n: usize,
    node_budget: u64,
) -> PyResult<Py<PyAny>> {
    let limits = OracleLimits { max_n, node_budget };
    let result = opt_oracle::exact_opt(&seq.inner, &limits).map_err(err)?;
    serialize_to_py(py, &result)
}

/// Random-order expected makespan plus optimum bounds and the ratio
/// interval. `trials=None` enumerates distinct arrangements exactly.
#[pyfunction]
#[pyo3(signature = (scheduler, seq, trials = None, seed = 0, h = None, max_n = 24, node_budget = 50_000_000))]
fn rom_report(
    py: Python<'_>,
    scheduler: &str,
    seq: &PyJobSequence,
    trials: Option<u64>,
    seed: u64,
    h: Option<usize>,
    max_n: usize,
    node_budget: u64,
) -> PyResult<Py<PyAny>> {
    let sched = build_scheduler(scheduler, &seq.inner, h)?;
    let mode = match trials {
        None => RomMode::exact(),
        Some(t) => RomMode::mc(t, seed),
    };
    let limits = OracleLimits { max_n, node_budget };
    let stats = harness::ratio_report(sched.as_ref(), &seq.inner, mode, &limits).map_err(err)?;
    serialize_to_py(py, &stats)
}

/// `P[makespan >= threshold * OPT]` over arrival orders.
#[pyfunction]
#[pyo3(signature = (scheduler, seq, threshold, trials = None, seed = 0, h = None, max_n = 24))]
fn tail_probability(
    py: Python<'_>,
    scheduler: &str,
    seq: &PyJobSequence,
    threshold: f64,
    trials: Option<u64>,
    seed: u64,
    h: Option<usize>,
    max_n: usize,
) -> PyResult<Py<PyAny>> {
    let sched = build_scheduler(scheduler, &seq.inner, h)?;
    let mode = match trials {
        None => RomMode::exact(),
        Some(t) => RomMode::mc(t, seed),
    };
    let limits = OracleLimits {
        max_n,
        ..Default::default()
    };
    let opt = harness::opt_bounds(&seq.inner, &limits);
    let tail =
        harness::tail_probability(sched.as_ref(), &seq.inner, threshold, mode, &opt).map_err(err)?;
    serialize_to_py(py, &tail)
}

/// Evaluate the four stable-sequence conditions on the given arrival order.
#[pyfunction]
#[pyo3(signature = (seq, epsilon, h = None))]
fn check_stable(
    py: Python<'_>,
    seq: &PyJobSequence,
    epsilon: f64,
    h: Option<usize>,
) -> PyResult<Py<PyAny>> {
    let cfg = AlgConfig::derive(seq.inner.m(), rule_for(h)).map_err(err)?;
    let params = StabilityParams::new(epsilon, cfg).map_err(err)?;
    let report = stability::check_stable(&seq.inner, &params);
    serialize_to_py(py, &report)
}

/// Monte-Carlo (or tiny-n exact) estimate of the probability that a random
/// permutation of a proper sequence is stable.
#[pyfunction]
#[pyo3(signature = (seq, epsilon, trials = 200, seed = 0, h = None))]
fn stability_probability(
    py: Python<'_>,
    seq: &PyJobSequence,
    epsilon: f64,
    trials: u64,
    seed: u64,
    h: Option<usize>,
) -> PyResult<Py<PyAny>> {
    let cfg = AlgConfig::derive(seq.inner.m(), rule_for(h)).map_err(err)?;
    let params = StabilityParams::new(epsilon, cfg).map_err(err)?;
    let estimate =
        stability::estimate_stability_probability(&seq.inner, &params, trials, seed).map_err(err)?;
    serialize_to_py(py, &estimate)
}

/// `|L^{floor(phi n)} / (phi L) - 1|` for the sequence's own order.
#[pyfunction]
fn load_lemma_deviation(seq: &PyJobSequence, phi: f64) -> PyResult<f64> {
    stability::load_lemma_deviation(&seq.inner, phi).map_err(err)
}

/// Ids of the j largest jobs under the fixed tie-break.
#[pyfunction]
fn largest_job_set(seq: &PyJobSequence, j: usize) -> PyResult<Vec<usize>> {
    stability::largest_job_set(&seq.inner, j).map_err(err)
}

/// Unit-job probe: rounds of m unit jobs all placed on least loaded
/// machines. Returns {"kind": "at_least"|"exactly", "r": int}.
#[pyfunction]
#[pyo3(signature = (scheduler, m, r_max, h = None))]
fn probe_r(
    py: Python<'_>,
    scheduler: &str,
    m: usize,
    r_max: usize,
    h: Option<usize>,
) -> PyResult<Py<PyAny>> {
    let seq = generators::uniform_jobs(1, m).map_err(err)?;
    let sched = build_scheduler(scheduler, &seq, h)?;
    let outcome = generators::probe_r(sched.as_ref(), m, r_max).map_err(err)?;
    let dict = PyDict::new(py);
    match outcome {
        generators::ProbeOutcome::AtLeast(r) => {
            dict.set_item("kind", "at_least")?;
            dict.set_item("r", r)?;
        }
        generators::ProbeOutcome::Exactly(r) => {
            dict.set_item("kind", "exactly")?;
            dict.set_item("r", r)?;
        }
    }
    dict.into_py_any(py)
}

#[pymodule]
#[pyo3(name = "rom_sched")]
fn rom_sched_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyJobSequence>()?;
    m.add_function(wrap_pyfunction!(constants, m)?)?;
    m.add_function(wrap_pyfunction!(verify_constants, m)?)?;
    m.add_function(wrap_pyfunction!(uniform_jobs, m)?)?;
    m.add_function(wrap_pyfunction!(lb_four_thirds, m)?)?;
    m.add_function(wrap_pyfunction!(lb_three_halves, m)?)?;
    m.add_function(wrap_pyfunction!(greedy_adversarial, m)?)?;
    m.add_function(wrap_pyfunction!(random_proper, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(run_traces, m)?)?;
    m.add_function(wrap_pyfunction!(opt_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(lpt_upper_bound, m)?)?;
    m.add_function(wrap_pyfunction!(exact_opt, m)?)?;
    m.add_function(wrap_pyfunction!(rom_report, m)?)?;
    m.add_function(wrap_pyfunction!(tail_probability, m)?)?;
    m.add_function(wrap_pyfunction!(check_stable, m)?)?;
    m.add_function(wrap_pyfunction!(stability_probability, m)?)?;
    m.add_function(wrap_pyfunction!(load_lemma_deviation, m)?)?;
    m.add_function(wrap_pyfunction!(largest_job_set, m)?)?;
    m.add_function(wrap_pyfunction!(probe_r, m)?)?;
    Ok(())
}
