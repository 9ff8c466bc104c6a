//! Python bindings. Labels cross the boundary 1-indexed.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use mlsbm::sequential::{critical_value, default_k_max, statistic_profile};
use mlsbm::{
    Adjacency, AggregationMatrix, CommunityLabels, Error, ExperimentConfig, ExperimentKind,
    GeneratorConfig, Matrix, MultiLayerNetwork, Recipe,
};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyIOError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn labels_from_py(labels: &[usize]) -> PyResult<CommunityLabels> {
    let k = labels.iter().copied().max().unwrap_or(0);
    CommunityLabels::from_one_based(labels, k).map_err(py_err)
}

/// Binary undirected multi-layer network on a shared node set.
#[pyclass(name = "Network", frozen)]
struct PyNetwork {
    inner: MultiLayerNetwork,
}

#[pymethods]
impl PyNetwork {
    /// Build from per-layer lists of 1-indexed `(src, dst)` pairs.
    #[new]
    fn new(n: usize, layers: Vec<Vec<(usize, usize)>>) -> PyResult<Self> {
        let adjs = layers
            .iter()
            .map(|edges| {
                let zero: Vec<(usize, usize)> = edges
                    .iter()
                    .map(|&(a, b)| {
                        if a == 0 || b == 0 {
                            Err(PyValueError::new_err("node indices are 1-indexed"))
                        } else {
                            Ok((a - 1, b - 1))
                        }
                    })
                    .collect::<PyResult<_>>()?;
                Adjacency::from_edges(n, &zero).map_err(py_err)
            })
            .collect::<PyResult<Vec<_>>>()?;
        Ok(Self {
            inner: MultiLayerNetwork::new(adjs).map_err(py_err)?,
        })
    }

    /// Sample a network; returns `(network, planted_labels)`.
    #[staticmethod]
    #[pyo3(signature = (n, layers, k, recipe = "exp2or3", rho = 1.0, seed = 0))]
    fn generate(
        n: usize,
        layers: usize,
        k: usize,
        recipe: &str,
        rho: f64,
        seed: u64,
    ) -> PyResult<(Self, Vec<usize>)> {
        let recipe: Recipe = recipe.parse().map_err(py_err)?;
        let cfg = GeneratorConfig::recipe(n, layers, k, recipe, rho, seed);
        let (inner, labels) = mlsbm::generate_msbm(&cfg).map_err(py_err)?;
        Ok((Self { inner }, labels.to_one_based()))
    }

    #[staticmethod]
    #[pyo3(signature = (path, n = None, layers = None))]
    fn load(path: &str, n: Option<usize>, layers: Option<usize>) -> PyResult<Self> {
        Ok(Self {
            inner: mlsbm::load_multilayer_edgelist(path, n, layers).map_err(py_err)?,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        let file = std::fs::File::create(path).map_err(|e| PyIOError::new_err(e.to_string()))?;
        mlsbm::write_edgelist(&self.inner, file).map_err(|e| PyIOError::new_err(e.to_string()))
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn num_layers(&self) -> usize {
        self.inner.num_layers()
    }

    /// Undirected edges of `layer` (0-indexed layer, 1-indexed nodes).
    fn edges(&self, layer: usize) -> PyResult<Vec<(usize, usize)>> {
        if layer >= self.inner.num_layers() {
            return Err(PyValueError::new_err("layer out of range"));
        }
        Ok(self
            .inner
            .layer(layer)
            .edges()
            .into_iter()
            .map(|(a, b)| (a + 1, b + 1))
            .collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "Network(n={}, L={})",
            self.inner.n(),
            self.inner.num_layers()
        )
    }
}

#[pyclass(name = "TestOutcome", frozen, get_all)]
struct PyTestOutcome {
    k0: usize,
    t: f64,
    z_crit: f64,
    reject: bool,
    labels: Vec<usize>,
}

#[pyclass(name = "NastResult", frozen, get_all)]
struct PyNastResult {
    /// `None` when every candidate up to `k_max` was rejected.
    k_hat: Option<usize>,
    t_values: Vec<f64>,
    terminated_by: String,
}

#[pyfunction]
#[pyo3(signature = (net, k0, seed = 0))]
fn detect_communities(net: &PyNetwork, k0: usize, seed: u64) -> PyResult<Vec<usize>> {
    let labels = mlsbm::detect_communities(&net.inner, k0, seed).map_err(py_err)?;
    Ok(labels.to_one_based())
}

/// Per-layer `K0 x K0` block estimates for the given 1-indexed labels.
#[pyfunction]
fn estimate_connectivity(net: &PyNetwork, labels: Vec<usize>) -> PyResult<Vec<Vec<Vec<f64>>>> {
    let labels = labels_from_py(&labels)?;
    let est = mlsbm::estimate_connectivity(&net.inner, &labels).map_err(py_err)?;
    Ok(est.blocks().iter().map(Matrix::to_rows).collect())
}

#[pyfunction]
#[pyo3(signature = (net, k0, alpha = 0.05, seed = 0))]
fn test_at_k0(net: &PyNetwork, k0: usize, alpha: f64, seed: u64) -> PyResult<PyTestOutcome> {
    let o = mlsbm::test_at_k0(&net.inner, k0, alpha, seed).map_err(py_err)?;
    Ok(PyTestOutcome {
        k0: o.k0,
        t: o.t,
        z_crit: o.z_crit,
        reject: o.reject,
        labels: o.labels.to_one_based(),
    })
}

#[pyfunction]
#[pyo3(signature = (net, alpha = 0.05, k_max = None, seed = 0))]
fn nast(net: &PyNetwork, alpha: f64, k_max: Option<usize>, seed: u64) -> PyResult<PyNastResult> {
    let k_max = k_max.unwrap_or_else(|| default_k_max(net.inner.n()));
    let r = mlsbm::nast(&net.inner, alpha, k_max, seed).map_err(py_err)?;
    Ok(PyNastResult {
        k_hat: r.k_hat,
        t_values: r.trace.iter().map(|o| o.t).collect(),
        terminated_by: r.terminated_by.to_string(),
    })
}

/// `T(K0)` for `K0 = 1..=k_max`.
#[pyfunction]
#[pyo3(signature = (net, k_max = None, seed = 0))]
fn statistic_sequence(net: &PyNetwork, k_max: Option<usize>, seed: u64) -> PyResult<Vec<f64>> {
    let k_max = k_max.unwrap_or_else(|| default_k_max(net.inner.n()));
    statistic_profile(&net.inner, k_max, seed).map_err(py_err)
}

/// Returns `(k_hat, etas)` where `etas[i]` belongs to `K0 = i + 2`.
#[pyfunction]
fn eta_from_statistics(t_values: Vec<f64>) -> PyResult<(usize, Vec<f64>)> {
    let r = mlsbm::eta_from_statistics(&t_values).map_err(py_err)?;
    Ok((r.k_hat, r.etas))
}

/// `tr(M^3) / sqrt(6)` for a symmetric zero-diagonal matrix.
#[pyfunction]
fn trace_cubed_statistic(matrix: Vec<Vec<f64>>) -> PyResult<f64> {
    let m = Matrix::from_rows(&matrix).map_err(py_err)?;
    let agg = AggregationMatrix::from_matrix(m).map_err(py_err)?;
    Ok(mlsbm::trace_cubed_statistic(&agg).value())
}

#[pyfunction]
fn normal_quantile(p: f64) -> PyResult<f64> {
    mlsbm::normal_quantile(p).map_err(py_err)
}

#[pyfunction]
fn z_critical(alpha: f64) -> PyResult<f64> {
    critical_value(alpha).map_err(py_err)
}

#[pyfunction]
fn misclustering_error(a: Vec<usize>, b: Vec<usize>) -> PyResult<usize> {
    let (a, b) = (labels_from_py(&a)?, labels_from_py(&b)?);
    Ok(mlsbm::misclustering_error(&a, &b).map_err(py_err)?.m)
}

/// Run a simulation study and return its summary as
/// `(cell_id, statistic, value)` rows.
#[pyfunction]
#[pyo3(signature = (kind, n, layers, ks, rhos, replicates, alpha = 0.05, seed = 0, recipe = None))]
#[allow(clippy::too_many_arguments)]
fn run_experiment(
    kind: &str,
    n: usize,
    layers: usize,
    ks: Vec<usize>,
    rhos: Vec<f64>,
    replicates: usize,
    alpha: f64,
    seed: u64,
    recipe: Option<&str>,
) -> PyResult<Vec<(String, String, f64)>> {
    let kind: ExperimentKind = kind.parse().map_err(py_err)?;
    let mut cfg = ExperimentConfig {
        ns: vec![n],
        layers,
        ks,
        rhos,
        replicates,
        alpha,
        seed,
        ..ExperimentConfig::desk(kind)
    };
    if let Some(r) = recipe {
        cfg.recipe = r.parse().map_err(py_err)?;
    }
    let report = mlsbm::run_experiment(&cfg).map_err(py_err)?;
    Ok(report
        .summary
        .into_iter()
        .map(|r| (r.cell_id, r.statistic.to_string(), r.value))
        .collect())
}

#[pymodule]
fn pymlsbm(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyNetwork>()?;
    m.add_class::<PyTestOutcome>()?;
    m.add_class::<PyNastResult>()?;
    m.add_function(wrap_pyfunction!(detect_communities, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_connectivity, m)?)?;
    m.add_function(wrap_pyfunction!(test_at_k0, m)?)?;
    m.add_function(wrap_pyfunction!(nast, m)?)?;
    m.add_function(wrap_pyfunction!(statistic_sequence, m)?)?;
    m.add_function(wrap_pyfunction!(eta_from_statistics, m)?)?;
    m.add_function(wrap_pyfunction!(trace_cubed_statistic, m)?)?;
    m.add_function(wrap_pyfunction!(normal_quantile, m)?)?;
    m.add_function(wrap_pyfunction!(z_critical, m)?)?;
    m.add_function(wrap_pyfunction!(misclustering_error, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
