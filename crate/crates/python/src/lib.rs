//! Python bindings: circuits, transpilation, structure recovery and
//! parameter recovery.

use std::collections::BTreeMap;

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use qrev::circuit::{parse, serialize};
use qrev::neural::TrainConfig;
use qrev::qnn::{self, Entangle};
use qrev::recovery::{self, EvalConfig, Method, ModelStore};
use qrev::structlut::{self, kinds_from_str, kinds_to_string};
use qrev::transpiler::{self, CouplingMap, TranspileOptions};

create_exception!(qrev, QrevError, PyException);

fn err(e: qrev::Error) -> PyErr {
    QrevError::new_err(e.to_string())
}

fn options(n: usize, level: u8, edges: Option<Vec<(usize, usize)>>, n_physical: Option<usize>) -> PyResult<TranspileOptions> {
    let coupling = match edges {
        None => CouplingMap::linear(n_physical.unwrap_or(n)),
        Some(e) => CouplingMap::from_edges(n_physical.unwrap_or(n), &e).map_err(err)?,
    };
    TranspileOptions::new(level, coupling, 1e-9).map_err(err)
}

fn json_to_py(py: Python<'_>, text: &str) -> PyResult<Py<PyAny>> {
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

#[pyclass(name = "Circuit", module = "qrev", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyCircuit {
    inner: qrev::Circuit,
}

#[pymethods]
impl PyCircuit {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(PyCircuit { inner: parse(text).map_err(err)? })
    }

    fn to_text(&self) -> String {
        serialize(&self.inner)
    }

    #[getter]
    fn n_qubits(&self) -> usize {
        self.inner.n_qubits()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Gate names with their counts.
    fn gate_counts(&self) -> BTreeMap<String, usize> {
        let mut m = BTreeMap::new();
        for g in self.inner.gates() {
            *m.entry(g.kind().name().to_string()).or_default() += 1;
        }
        m
    }

    fn bind(&self, params: Vec<f64>) -> PyResult<Self> {
        Ok(PyCircuit {
            inner: self.inner.bind_values(&params).map_err(err)?,
        })
    }

    /// Row-major unitary, little-endian basis order.
    fn unitary(&self) -> PyResult<Vec<Vec<Complex64>>> {
        let u = qrev::simulator::unitary_of(&self.inner).map_err(err)?;
        Ok((0..u.dim()).map(|r| (0..u.dim()).map(|c| u.get(r, c)).collect()).collect())
    }

    fn expval_z(&self, qubit: usize) -> PyResult<f64> {
        let init = qrev::simulator::Statevector::zero(self.inner.n_qubits());
        qrev::simulator::expval_z(&self.inner, qubit, &init).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Circuit(n_qubits={}, gates={})", self.inner.n_qubits(), self.inner.len())
    }
}

#[pyclass(name = "AnsatzSpec", module = "qrev", frozen)]
struct PySpec {
    inner: qnn::AnsatzSpec,
}

#[pymethods]
impl PySpec {
    #[new]
    #[pyo3(signature = (n_qubits, n_layers, rotations = "rx,ry,rz", entangle = "linear_chain"))]
    fn new(n_qubits: usize, n_layers: usize, rotations: &str, entangle: &str) -> PyResult<Self> {
        let mut inner = qnn::AnsatzSpec::new(n_qubits, n_layers, kinds_from_str(rotations).map_err(err)?);
        inner.entangle = match entangle {
            "linear_chain" => Entangle::LinearChain,
            "ring" => Entangle::Ring,
            "none" => Entangle::None,
            other => return Err(QrevError::new_err(format!("unknown entangler {other:?}"))),
        };
        inner.validate().map_err(err)?;
        Ok(PySpec { inner })
    }

    #[getter]
    fn n_params(&self) -> usize {
        self.inner.n_params()
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label()
    }

    fn build(&self) -> PyResult<PyCircuit> {
        Ok(PyCircuit {
            inner: qnn::build_ansatz(&self.inner).map_err(err)?,
        })
    }
}

#[pyclass(name = "Dataset", module = "qrev", frozen)]
struct PyDataset {
    inner: qnn::Dataset,
}

#[pymethods]
impl PyDataset {
    #[new]
    fn new(features: Vec<Vec<f64>>, labels: Vec<u8>) -> PyResult<Self> {
        Ok(PyDataset {
            inner: qnn::Dataset::new(features, labels).map_err(err)?,
        })
    }

    #[staticmethod]
    fn synthetic_blobs(n_samples: usize, n_features: usize, seed: u64) -> PyResult<Self> {
        Ok(PyDataset {
            inner: qnn::synthetic_blobs(n_samples, n_features, seed).map_err(err)?,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

#[pyclass(name = "TrainedQnn", module = "qrev", frozen)]
struct PyTrainedQnn {
    inner: qnn::TrainedQnn,
}

#[pymethods]
impl PyTrainedQnn {
    #[getter]
    fn params(&self) -> Vec<f64> {
        self.inner.params.clone()
    }

    #[getter]
    fn ansatz(&self) -> PyCircuit {
        PyCircuit {
            inner: self.inner.ansatz.clone(),
        }
    }

    fn bound(&self) -> PyResult<PyCircuit> {
        Ok(PyCircuit {
            inner: self.inner.bound().map_err(err)?,
        })
    }

    fn accuracy(&self, data: PyRef<'_, PyDataset>) -> PyResult<f64> {
        qnn::accuracy(&self.inner.ansatz, &self.inner.params, &data.inner).map_err(err)
    }

    /// Per-epoch `(loss, accuracy)`.
    fn history(&self) -> Vec<(f64, f64)> {
        self.inner.log.iter().map(|e| (e.loss, e.accuracy)).collect()
    }
}

#[pyfunction]
#[pyo3(signature = (spec, data, epochs = 30, learning_rate = 0.05, seed = 0))]
fn train_qnn(
    spec: PyRef<'_, PySpec>,
    data: PyRef<'_, PyDataset>,
    epochs: usize,
    learning_rate: f64,
    seed: u64,
) -> PyResult<PyTrainedQnn> {
    Ok(PyTrainedQnn {
        inner: qnn::train_qnn(&spec.inner, &data.inner, epochs, learning_rate, seed).map_err(err)?,
    })
}

/// Returns the transpiled circuit and the final layout.
#[pyfunction]
#[pyo3(signature = (circuit, optimization_level = 1, edges = None, n_physical = None))]
fn transpile(
    circuit: PyRef<'_, PyCircuit>,
    optimization_level: u8,
    edges: Option<Vec<(usize, usize)>>,
    n_physical: Option<usize>,
) -> PyResult<(PyCircuit, Vec<usize>)> {
    let opts = options(circuit.inner.n_qubits(), optimization_level, edges, n_physical)?;
    let r = transpiler::transpile(&circuit.inner, &opts).map_err(err)?;
    Ok((PyCircuit { inner: r.circuit }, r.final_layout))
}

#[pyclass(name = "Lut", module = "qrev", frozen)]
struct PyLut {
    inner: structlut::Lut,
}

#[pymethods]
impl PyLut {
    /// `templates` are comma-separated rotation lists such as `"ry,rz"`.
    #[staticmethod]
    #[pyo3(signature = (templates, optimization_level = 1, n_qubits = 1))]
    fn build(templates: Vec<String>, optimization_level: u8, n_qubits: usize) -> PyResult<Self> {
        let ts = templates
            .iter()
            .map(|t| kinds_from_str(t).map_err(err))
            .collect::<PyResult<Vec<_>>>()?;
        let opts = options(n_qubits, optimization_level, None, None)?;
        Ok(PyLut {
            inner: structlut::build_lut(&ts, &opts).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(PyLut {
            inner: structlut::Lut::from_text(text).map_err(err)?,
        })
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn __len__(&self) -> usize {
        self.inner.records.len()
    }
}

#[pyclass(name = "RecoveredStructure", module = "qrev", frozen)]
struct PyStructure {
    inner: structlut::RecoveredStructure,
}

#[pymethods]
impl PyStructure {
    #[getter]
    fn n_params(&self) -> usize {
        self.inner.n_params()
    }

    #[getter]
    fn ansatz(&self) -> PyCircuit {
        PyCircuit {
            inner: self.inner.ansatz.clone(),
        }
    }

    /// `(wire, template, tags)` per matched segment.
    fn matches(&self) -> Vec<(usize, String, Vec<usize>)> {
        self.inner
            .matches
            .iter()
            .map(|m| (m.wire, kinds_to_string(&m.template), m.tags.clone()))
            .collect()
    }

    fn to_text(&self) -> String {
        self.inner.serialize()
    }
}

#[pyfunction]
fn recover_structure(circuit: PyRef<'_, PyCircuit>, lut: PyRef<'_, PyLut>) -> PyResult<PyStructure> {
    Ok(PyStructure {
        inner: structlut::recover_structure(&circuit.inner, &lut.inner).map_err(err)?,
    })
}

/// Returns the recovered parameters and the number of candidates scored.
#[pyfunction]
#[pyo3(signature = (structure, optimization_level = 1, step = 0.1, edges = None, n_physical = None))]
fn recover_params_bf(
    structure: PyRef<'_, PyStructure>,
    optimization_level: u8,
    step: f64,
    edges: Option<Vec<(usize, usize)>>,
    n_physical: Option<usize>,
) -> PyResult<(Vec<f64>, usize)> {
    let opts = options(structure.inner.ansatz.n_qubits(), optimization_level, edges, n_physical)?;
    let (p, stats) = recovery::recover_params_bf(&structure.inner, &opts, step).map_err(err)?;
    Ok((p, stats.candidates_evaluated))
}

#[pyclass(name = "ParamDataset", module = "qrev", frozen)]
struct PyParamDataset {
    inner: recovery::ParamDataset,
}

#[pymethods]
impl PyParamDataset {
    #[getter]
    fn template(&self) -> String {
        kinds_to_string(&self.inner.template)
    }

    #[getter]
    fn duplicate_inputs(&self) -> usize {
        self.inner.duplicate_inputs
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }
}

#[pyfunction]
#[pyo3(signature = (template, step = 0.1))]
fn gen_dataset(template: &str, step: f64) -> PyResult<PyParamDataset> {
    let t = kinds_from_str(template).map_err(err)?;
    Ok(PyParamDataset {
        inner: recovery::gen_dataset(&t, step).map_err(err)?,
    })
}

#[pyclass(name = "RecoveryModel", module = "qrev", frozen)]
struct PyModel {
    inner: recovery::RecoveryModel,
}

#[pymethods]
impl PyModel {
    /// Returns the model and its per-epoch validation MAE.
    #[staticmethod]
    #[pyo3(signature = (dataset, epochs = 100, batch_size = 1024, learning_rate = 1e-3, seed = 0))]
    fn train(
        dataset: PyRef<'_, PyParamDataset>,
        epochs: usize,
        batch_size: usize,
        learning_rate: f64,
        seed: u64,
    ) -> PyResult<(Self, Vec<f64>)> {
        let cfg = TrainConfig {
            epochs,
            batch_size,
            learning_rate,
            seed,
            ..TrainConfig::default()
        };
        let (m, trace) = recovery::train_recovery_model(&dataset.inner, &cfg).map_err(err)?;
        Ok((PyModel { inner: m }, trace.val_mae))
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(PyModel {
            inner: recovery::RecoveryModel::from_text(text).map_err(err)?,
        })
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    #[getter]
    fn template(&self) -> String {
        kinds_to_string(&self.inner.template)
    }
}

#[pyfunction]
fn recover_params_ae(structure: PyRef<'_, PyStructure>, models: Vec<PyRef<'_, PyModel>>) -> PyResult<Vec<f64>> {
    let store: ModelStore = models
        .iter()
        .map(|m| (m.inner.template.clone(), m.inner.clone()))
        .collect();
    recovery::recover_params_ae(&structure.inner, &store).map_err(err)
}

/// End-to-end run; returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (spec, data, method = "ae", seed = 0, qnn_epochs = 30, retrain_epochs = 30, ae_epochs = 100, optimization_level = 1))]
#[allow(clippy::too_many_arguments)]
fn evaluate(
    py: Python<'_>,
    spec: PyRef<'_, PySpec>,
    data: PyRef<'_, PyDataset>,
    method: &str,
    seed: u64,
    qnn_epochs: usize,
    retrain_epochs: usize,
    ae_epochs: usize,
    optimization_level: u8,
) -> PyResult<Py<PyAny>> {
    let method = Method::parse(method).map_err(err)?;
    let cfg = EvalConfig {
        seed,
        qnn_epochs,
        retrain_epochs,
        transpile: options(spec.inner.n_qubits, optimization_level, None, None)?,
        ae: TrainConfig {
            epochs: ae_epochs,
            seed,
            ..TrainConfig::default()
        },
        ..EvalConfig::default()
    };
    let mut store = ModelStore::new();
    let ev = recovery::evaluate(&spec.inner, &data.inner, method, &cfg, &mut store).map_err(err)?;
    let text = serde_json::to_string(&ev.report).expect("report serializes");
    json_to_py(py, &text)
}

#[pymodule]
#[pyo3(name = "qrev")]
fn qrev_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("QrevError", m.py().get_type::<QrevError>())?;
    m.add_class::<PyCircuit>()?;
    m.add_class::<PySpec>()?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PyTrainedQnn>()?;
    m.add_class::<PyLut>()?;
    m.add_class::<PyStructure>()?;
    m.add_class::<PyParamDataset>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(train_qnn, m)?)?;
    m.add_function(wrap_pyfunction!(transpile, m)?)?;
    m.add_function(wrap_pyfunction!(recover_structure, m)?)?;
    m.add_function(wrap_pyfunction!(recover_params_bf, m)?)?;
    m.add_function(wrap_pyfunction!(gen_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(recover_params_ae, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    Ok(())
}
