//! Python module `hiermc`: instance generation, recovery, thresholds, the
//! exhaustive oracle and the Monte Carlo harness.

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use hiermc::harness::{self, GaussianSpec, RmseMethod, SweepSpec};
use hiermc::model::{DeltaPair, Entry, HierarchyConfig, Observation, Partition, SideGraph};
use hiermc::oracle::{self, Candidate, MleOptions, TruthParams};
use hiermc::recovery::{self, RecoveryOptions, RecoveryResult, RefineFlag};
use hiermc::synth::{self, ColumnSectionProfile, GraphParams, InstanceSpec, ObservationParams, ProfileMode};
use hiermc::theory::{self, GraphInfo};

fn py_err(e: hiermc::Error) -> PyErr {
    match e {
        hiermc::Error::Io { .. } => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn json_err(e: serde_json::Error) -> PyErr {
    PyValueError::new_err(format!("json: {e}"))
}

fn flag_of(bit: u8) -> PyResult<RefineFlag> {
    RefineFlag::from_bit(bit).map_err(py_err)
}

fn slots(part: &Partition) -> Vec<(usize, usize)> {
    (0..part.n()).map(|u| (part.cluster_of(u), part.group_of(u))).collect()
}

fn rows(m: &hiermc::model::BinaryMatrix) -> Vec<Vec<u8>> {
    (0..m.rows()).map(|r| m.row(r).to_vec()).collect()
}

/// Synthetic instance with its ground truth.
#[pyclass(module = "hiermc", frozen)]
struct Instance {
    spec: InstanceSpec,
    inner: synth::Instance,
}

#[pymethods]
impl Instance {
    #[getter]
    fn n(&self) -> usize {
        self.spec.config.n
    }
    #[getter]
    fn m(&self) -> usize {
        self.spec.config.m
    }
    /// Ground-truth n x m binary matrix.
    #[getter]
    fn matrix(&self) -> Vec<Vec<u8>> {
        rows(&self.inner.matrix)
    }
    /// (cluster, group) per user.
    #[getter]
    fn partition(&self) -> Vec<(usize, usize)> {
        slots(&self.inner.partition)
    }
    #[getter]
    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.graph.edges().to_vec()
    }
    /// Observed (row, col, value) triplets.
    #[getter]
    fn observations(&self) -> Vec<(usize, usize, u8)> {
        self.inner.observations.entries().iter().map(|e| (e.row, e.col, e.value)).collect()
    }
    #[getter]
    fn deltas(&self) -> (f64, f64) {
        (self.inner.deltas.delta_g, self.inner.deltas.delta_c)
    }

    #[pyo3(signature = (flag = 1, iterations = None, seed = 0))]
    fn recover(&self, flag: u8, iterations: Option<usize>, seed: u64) -> PyResult<Recovery> {
        let options = RecoveryOptions { flag: flag_of(flag)?, iterations, seed };
        let res = recovery::recover(&self.inner.observations, &self.inner.graph, &self.spec.config, &options)
            .map_err(py_err)?;
        Ok(Recovery::build(res, Some(&self.inner)))
    }

    /// Exhaustive MLE under the generating parameters (tiny n, m only).
    #[pyo3(signature = (cap = 10_000_000))]
    fn oracle<'py>(&self, py: Python<'py>, cap: u128) -> PyResult<Bound<'py, PyDict>> {
        let g = self.spec.graph;
        let params = TruthParams::new(g.alpha, g.beta, g.gamma, self.spec.observation.theta).map_err(py_err)?;
        let options = MleOptions { cap, ..Default::default() };
        let obs = &self.inner.observations;
        let graph = &self.inner.graph;
        let mle = oracle::exhaustive_mle(obs, graph, &params, &self.spec.config, &options).map_err(py_err)?;
        let truth = Candidate::new(self.inner.partition.clone(), self.inner.model.clone()).map_err(py_err)?;
        let truth_l = oracle::neg_log_likelihood(&truth, obs, graph, &params).map_err(py_err)?;
        let d = PyDict::new(py);
        d.set_item("candidates", mle.candidates)?;
        d.set_item("min_l", mle.min_l)?;
        d.set_item("tie", mle.tie)?;
        d.set_item("truth_l", truth_l)?;
        d.set_item("mle_is_truth", mle.candidate.matrix() == self.inner.matrix)?;
        d.set_item("partition", slots(&mle.candidate.partition))?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(n={}, m={}, edges={}, observed={})",
            self.n(),
            self.m(),
            self.inner.graph.edge_count(),
            self.inner.observations.len()
        )
    }
}

/// Output of the recovery pipeline.
#[pyclass(module = "hiermc", frozen, get_all)]
struct Recovery {
    matrix: Vec<Vec<u8>>,
    partition: Vec<(usize, usize)>,
    alpha_hat: f64,
    beta_hat: f64,
    theta_hat: f64,
    iterations: usize,
    moves: Vec<usize>,
    warnings: Vec<String>,
    /// Exact recovery against the instance's truth; None without one.
    success: Option<bool>,
}

impl Recovery {
    fn build(res: RecoveryResult, truth: Option<&synth::Instance>) -> Self {
        let d = &res.diagnostics;
        Recovery {
            matrix: rows(&res.matrix),
            partition: slots(&res.partition),
            alpha_hat: d.params.alpha_hat,
            beta_hat: d.params.beta_hat,
            theta_hat: d.params.theta_hat,
            iterations: d.iterations,
            moves: d.moves.clone(),
            warnings: d.warnings.clone(),
            success: truth.map(|t| t.matrix == res.matrix),
        }
    }
}

#[pymethods]
impl Recovery {
    fn __repr__(&self) -> String {
        format!(
            "Recovery(success={}, alpha_hat={:.4}, beta_hat={:.4}, theta_hat={:.4})",
            match self.success {
                Some(true) => "True",
                Some(false) => "False",
                None => "None",
            },
            self.alpha_hat, self.beta_hat, self.theta_hat
        )
    }
}

/// Draw an instance. Graph parameters are absolute unless `tilde` is set,
/// in which case each is scaled by ln(n)/n.
#[pyfunction]
#[pyo3(signature = (n, m, p, theta, alpha, beta, gamma, seed = 0, tilde = false, exact_profile = true))]
#[allow(clippy::too_many_arguments)]
fn generate(
    n: usize,
    m: usize,
    p: f64,
    theta: f64,
    alpha: f64,
    beta: f64,
    gamma: f64,
    seed: u64,
    tilde: bool,
    exact_profile: bool,
) -> PyResult<Instance> {
    let graph = if tilde {
        GraphParams::from_tilde(n, alpha, beta, gamma)
    } else {
        GraphParams::new(alpha, beta, gamma)
    }
    .map_err(py_err)?;
    let spec = InstanceSpec {
        config: HierarchyConfig::standard(n, m).map_err(py_err)?,
        graph,
        observation: ObservationParams::new(p, theta).map_err(py_err)?,
        profile: ColumnSectionProfile::uniform(),
        mode: if exact_profile { ProfileMode::Exact } else { ProfileMode::Sampled },
    };
    let inner = synth::generate_instance(&spec, seed).map_err(py_err)?;
    Ok(Instance { spec, inner })
}

/// Recover from raw edges and (row, col, value) observations.
#[pyfunction]
#[pyo3(signature = (n, m, edges, observations, flag = 1, iterations = None, seed = 0))]
fn recover(
    n: usize,
    m: usize,
    edges: Vec<(usize, usize)>,
    observations: Vec<(usize, usize, u8)>,
    flag: u8,
    iterations: Option<usize>,
    seed: u64,
) -> PyResult<Recovery> {
    let graph = SideGraph::new(n, edges).map_err(py_err)?;
    let entries = observations.into_iter().map(|(row, col, value)| Entry { row, col, value }).collect();
    let obs = Observation::new(n, m, entries).map_err(py_err)?;
    let config = HierarchyConfig::standard(n, m).map_err(py_err)?;
    let options = RecoveryOptions { flag: flag_of(flag)?, iterations, seed };
    let res = recovery::recover(&obs, &graph, &config, &options).map_err(py_err)?;
    Ok(Recovery::build(res, None))
}

/// (I_g, I_c1, I_c2) of absolute graph parameters.
#[pyfunction]
fn graph_info(alpha: f64, beta: f64, gamma: f64) -> PyResult<(f64, f64, f64)> {
    let g = GraphInfo::from(&GraphParams::new(alpha, beta, gamma).map_err(py_err)?);
    Ok((g.i_g, g.i_c1, g.i_c2))
}

/// Threshold p* for (c, g, r, q) = (2, 3, 2, 2).
#[pyfunction]
#[pyo3(signature = (n, m, theta, delta_g, delta_c, i_g = 0.0, i_c1 = 0.0, i_c2 = 0.0))]
#[allow(clippy::too_many_arguments)]
fn p_star<'py>(
    py: Python<'py>,
    n: usize,
    m: usize,
    theta: f64,
    delta_g: f64,
    delta_c: f64,
    i_g: f64,
    i_c1: f64,
    i_c2: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let deltas = DeltaPair::new(delta_g, delta_c).map_err(py_err)?;
    let ps = theory::p_star_232(n, m, theta, &GraphInfo { i_g, i_c1, i_c2 }, &deltas).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("p_star", ps.value)?;
    d.set_item("raw", ps.raw)?;
    d.set_item("prefactor", ps.prefactor)?;
    d.set_item("terms", ps.terms.to_vec())?;
    d.set_item("regime", ps.regime.kind.label())?;
    d.set_item("active_term", ps.regime.active_term)?;
    d.set_item("tie", ps.regime.is_tie)?;
    Ok(d)
}

/// Success-rate sweep; `spec_json` uses the CLI's sweep spec format.
/// Returns the CSV text.
#[pyfunction]
#[pyo3(signature = (spec_json, jobs = None))]
fn sweep(py: Python<'_>, spec_json: &str, jobs: Option<usize>) -> PyResult<String> {
    let spec: SweepSpec = serde_json::from_str(spec_json).map_err(json_err)?;
    py.detach(|| harness::sweep(&spec, jobs)).map(|t| t.to_csv()).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (spec_json, jobs = None))]
fn compare_flags(py: Python<'_>, spec_json: &str, jobs: Option<usize>) -> PyResult<String> {
    let spec: SweepSpec = serde_json::from_str(spec_json).map_err(json_err)?;
    py.detach(|| harness::compare_flags(&spec, jobs)).map(|t| t.to_csv()).map_err(py_err)
}

/// RMSE of the Gaussian variant and both average baselines for one seed.
#[pyfunction]
#[pyo3(signature = (spec_json, seed = 0))]
fn rmse<'py>(py: Python<'py>, spec_json: &str, seed: u64) -> PyResult<Bound<'py, PyDict>> {
    let spec: GaussianSpec = serde_json::from_str(spec_json).map_err(json_err)?;
    let table = py.detach(|| harness::rmse_eval(&spec, seed)).map_err(py_err)?;
    let d = PyDict::new(py);
    for method in [RmseMethod::Proposed, RmseMethod::UserAverage, RmseMethod::ItemAverage] {
        d.set_item(method.label(), table.rmse(method))?;
    }
    Ok(d)
}

#[pymodule]
#[pyo3(name = "hiermc")]
fn hiermc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Instance>()?;
    m.add_class::<Recovery>()?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(recover, m)?)?;
    m.add_function(wrap_pyfunction!(graph_info, m)?)?;
    m.add_function(wrap_pyfunction!(p_star, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(compare_flags, m)?)?;
    m.add_function(wrap_pyfunction!(rmse, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
