use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyAny;

use norden_core::files::ModelFile;
use norden_core::generator::{self, GeneratorConfig, ModelKind};
use norden_core::{Geometry, Tolerances};

fn py_err(e: norden_core::Error) -> PyErr {
    PyValueError::new_err(format!("{}: {e}", e.kind()))
}

fn to_py<T: serde::Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn rows(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect()
}

fn kind(name: &str) -> PyResult<ModelKind> {
    match name {
        "kahler" => Ok(ModelKind::Kahler),
        "random" => Ok(ModelKind::Random),
        "w3" => Ok(ModelKind::W3),
        "isotropic-w3" => Ok(ModelKind::IsotropicW3),
        other => Err(PyValueError::new_err(format!("unknown kind {other:?}"))),
    }
}

/// A validated homogeneous Norden model with its derived geometry.
#[pyclass(name = "Model", frozen)]
struct PyModel {
    geom: Geometry,
    label: Option<String>,
}

impl PyModel {
    fn from_file(file: ModelFile) -> PyResult<Self> {
        let tol = Tolerances::default();
        let (model, s) = file.to_model(&tol).map_err(py_err)?;
        let geom = Geometry::new(model, s, &tol).map_err(py_err)?;
        Ok(PyModel { geom, label: file.label })
    }
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Self::from_file(ModelFile::from_json(text).map_err(py_err)?)
    }

    #[staticmethod]
    #[pyo3(signature = (kind_name, dim = 4, seed = 0))]
    fn generate(kind_name: &str, dim: usize, seed: u64) -> PyResult<Self> {
        let tol = Tolerances::default();
        let g = generator::generate(kind(kind_name)?, &GeneratorConfig::new(dim, seed), &tol).map_err(py_err)?;
        let geom = Geometry::new(g.model, g.structure, &tol).map_err(py_err)?;
        Ok(PyModel {
            geom,
            label: Some(g.label),
        })
    }

    fn to_json(&self) -> String {
        ModelFile::from_model(&self.geom.model, &self.geom.structure, self.label.clone()).to_json()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.geom.dim()
    }

    #[getter]
    fn label(&self) -> Option<String> {
        self.label.clone()
    }

    #[getter]
    fn j(&self) -> Vec<Vec<f64>> {
        rows(self.geom.structure.j())
    }

    #[getter]
    fn metric(&self) -> Vec<Vec<f64>> {
        rows(self.geom.structure.g())
    }

    /// `C^k_{ij}` as a nested list indexed `[i][j][k]`.
    fn structure_constants(&self) -> Vec<Vec<Vec<f64>>> {
        let d = self.dim();
        (0..d)
            .map(|i| (0..d).map(|j| (0..d).map(|k| self.geom.model.c(i, j, k)).collect()).collect())
            .collect()
    }

    fn classify(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.geom.classes)
    }

    #[pyo3(signature = (eps = 1e-8))]
    fn invariants(&self, py: Python<'_>, eps: f64) -> PyResult<Py<PyAny>> {
        to_py(py, &self.geom.invariants(eps))
    }

    #[pyo3(signature = (tolerance = 1e-8, samples = 500, seed = 0))]
    fn verify(&self, py: Python<'_>, tolerance: f64, samples: usize, seed: u64) -> PyResult<Py<PyAny>> {
        let tol = Tolerances::default().with_check(tolerance);
        to_py(py, &norden_core::verify(&self.geom, &tol, samples, seed))
    }

    /// `R(x, Jx, y, Jy)`.
    fn holomorphic_quartic(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
        let d = self.dim();
        if x.len() != d || y.len() != d {
            return Err(PyValueError::new_err(format!("vectors must have length {d}")));
        }
        Ok(self
            .geom
            .holomorphic_quartic(&nalgebra::DVector::from_vec(x), &nalgebra::DVector::from_vec(y)))
    }

    fn __repr__(&self) -> String {
        format!("Model(dim={}, label={:?})", self.dim(), self.label)
    }
}

/// `(J, g)` of the canonical pair `J e_i = e_{n+i}`, `g = diag(I, -I)`.
#[pyfunction]
fn canonical_norden(dim: usize) -> PyResult<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let s = generator::canonical_norden(dim).map_err(py_err)?;
    Ok((rows(s.j()), rows(s.g())))
}

#[pymodule]
fn norden(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(canonical_norden, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
