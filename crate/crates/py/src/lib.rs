//! Python module `senc`: meshes, self-intersection analysis, volume loss,
//! proximity pairs, cloth energies, gradient checks and simulation.
//!
//! Structured inputs and reports cross the boundary as plain dicts, converted
//! through JSON with the same schemas as the command-line tool.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

use senc_core::closure::{close_selected, LoopSelection};
use senc_core::energy::{BodySdf, EnergyModel, EnergyParams, SimState};
use senc_core::fixtures::{self, FoldParams};
use senc_core::gradcheck::GradcheckOptions;
use senc_core::mesh::find_boundary_loops;
use senc_core::obj::{load_obj, parse_obj, save_obj, to_obj_string};
use senc_core::pipeline::run_pipeline;
use senc_core::proximity::build_self_collision_edges;
use senc_core::report::AnalysisReport;
use senc_core::sim::{run_sequence, SimConfig};
use senc_core::{Error, TriMesh, Vec3};

fn err(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyIOError::new_err(io.to_string()),
        Error::Json(_)
        | Error::Parse { .. }
        | Error::InvalidParameter(_)
        | Error::LoopNotInMesh(_)
        | Error::EmptyMesh
        | Error::InvalidFace { .. }
        | Error::NonManifoldEdges { .. }
        | Error::RestLength { .. } => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn to_points(x: &[Vec3]) -> Vec<[f64; 3]> {
    x.iter().map(|p| [p.x, p.y, p.z]).collect()
}

fn from_points(x: Vec<[f64; 3]>) -> Vec<Vec3> {
    x.into_iter().map(Vec3::from).collect()
}

fn to_py(py: Python<'_>, value: &impl Serialize) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

/// Reads an optional dict into `T`, starting from its defaults.
fn from_py<T: DeserializeOwned + Default>(obj: Option<&Bound<'_, PyAny>>) -> PyResult<T> {
    let Some(obj) = obj else { return Ok(T::default()) };
    let text: String = obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn selection(text: &str) -> PyResult<LoopSelection> {
    LoopSelection::parse(text).map_err(err)
}

/// Triangle mesh with optional rest positions.
#[pyclass(name = "Mesh", module = "senc", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyMesh {
    inner: TriMesh,
}

impl From<TriMesh> for PyMesh {
    fn from(inner: TriMesh) -> Self {
        Self { inner }
    }
}

#[pymethods]
impl PyMesh {
    #[new]
    #[pyo3(signature = (vertices, faces, rest=None))]
    fn new(vertices: Vec<[f64; 3]>, faces: Vec<[usize; 3]>, rest: Option<Vec<[f64; 3]>>) -> PyResult<Self> {
        let mut mesh = TriMesh::new(from_points(vertices), faces).map_err(err)?;
        if let Some(r) = rest {
            mesh = mesh.with_rest(from_points(r)).map_err(err)?;
        }
        Ok(mesh.into())
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(load_obj(path).map_err(err)?.mesh.into())
    }

    #[staticmethod]
    fn from_obj(text: &str) -> PyResult<Self> {
        Ok(parse_obj(text).map_err(err)?.mesh.into())
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        save_obj(&self.inner, path).map_err(err)
    }

    fn to_obj(&self) -> String {
        to_obj_string(&self.inner)
    }

    #[staticmethod]
    fn unit_cube() -> Self {
        fixtures::unit_cube().into()
    }

    #[staticmethod]
    fn grid_sheet(nx: usize, ny: usize, width: f64, height: f64) -> Self {
        fixtures::grid_sheet(nx, ny, width, height).into()
    }

    /// Closed torus whose long sides pass through each other.
    #[staticmethod]
    fn torus() -> Self {
        fixtures::torus_through_itself(Default::default()).into()
    }

    /// Sheet with a pleat curled back through itself; its rest state is flat.
    #[staticmethod]
    #[pyo3(signature = (nx=20, ny=20, curl=2.0, scale=0.1))]
    fn folded_sheet(nx: usize, ny: usize, curl: f64, scale: f64) -> Self {
        fixtures::folded_sheet(FoldParams { nx, ny, curl, scale }).into()
    }

    #[getter]
    fn vertices(&self) -> Vec<[f64; 3]> {
        to_points(self.inner.vertices())
    }

    #[getter]
    fn faces(&self) -> Vec<[usize; 3]> {
        self.inner.faces().to_vec()
    }

    #[getter]
    fn rest_vertices(&self) -> Option<Vec<[f64; 3]>> {
        self.inner.rest_vertices().map(to_points)
    }

    #[getter]
    fn num_vertices(&self) -> usize {
        self.inner.num_vertices()
    }

    #[getter]
    fn num_faces(&self) -> usize {
        self.inner.num_faces()
    }

    fn surface_area(&self) -> f64 {
        self.inner.surface_area()
    }

    /// Same connectivity and rest state at new positions.
    fn with_positions(&self, positions: Vec<[f64; 3]>) -> PyResult<Self> {
        Ok(self.inner.with_positions(from_points(positions)).map_err(err)?.into())
    }

    /// Current positions become the rest state.
    fn rest_from_current(&self) -> Self {
        self.inner.clone().rest_from_current().into()
    }

    fn boundary_loops(&self) -> PyResult<Vec<Vec<usize>>> {
        Ok(find_boundary_loops(&self.inner)
            .map_err(err)?
            .into_iter()
            .map(|l| l.vertex_indices)
            .collect())
    }

    /// Closes the selected boundary loops with centroid fans.
    #[pyo3(signature = (loops="all"))]
    fn close(&self, loops: &str) -> PyResult<Self> {
        let (closed, _) = close_selected(&self.inner, &selection(loops)?).map_err(err)?;
        Ok(closed.closed_mesh.into())
    }

    fn __repr__(&self) -> String {
        format!("Mesh({} vertices, {} faces)", self.inner.num_vertices(), self.inner.num_faces())
    }
}

/// Full analysis report as a dict.
#[pyfunction]
#[pyo3(signature = (mesh, close_loops="all"))]
fn analyze(py: Python<'_>, mesh: &PyMesh, close_loops: &str) -> PyResult<Py<PyAny>> {
    let sel = selection(close_loops)?;
    let r = py.detach(|| run_pipeline(&mesh.inner, &sel)).map_err(err)?;
    to_py(py, &AnalysisReport::new(mesh.inner.num_faces(), mesh.inner.num_vertices(), &r))
}

/// Penetration volume and its gradient per input vertex.
#[pyfunction]
#[pyo3(signature = (mesh, close_loops="all"))]
fn self_collision_loss(py: Python<'_>, mesh: &PyMesh, close_loops: &str) -> PyResult<(f64, Vec<[f64; 3]>)> {
    let sel = selection(close_loops)?;
    let r = py.detach(|| run_pipeline(&mesh.inner, &sel)).map_err(err)?;
    Ok((r.loss.value, to_points(&r.loss.gradient)))
}

/// Signed volume enclosed by the mesh's faces.
#[pyfunction]
fn signed_volume(mesh: &PyMesh) -> f64 {
    senc_core::volume::signed_volume(mesh.inner.faces(), mesh.inner.vertices())
}

/// Vertex pairs closer than `radius` that are not mesh edges.
#[pyfunction]
#[pyo3(signature = (mesh, radius=0.02))]
fn self_collision_edges(mesh: &PyMesh, radius: f64) -> PyResult<Vec<[usize; 2]>> {
    Ok(build_self_collision_edges(&mesh.inner, radius).map_err(err)?.pairs)
}

/// Weighted energy at `positions` (default: the mesh's own) for a cloth
/// with zero velocity at the mesh's current positions, under gravity.
#[pyfunction]
#[pyo3(signature = (mesh, positions=None, params=None, body=None, close_loops="all"))]
fn energy(
    py: Python<'_>,
    mesh: &PyMesh,
    positions: Option<Vec<[f64; 3]>>,
    params: Option<&Bound<'_, PyAny>>,
    body: Option<&Bound<'_, PyAny>>,
    close_loops: &str,
) -> PyResult<Py<PyAny>> {
    let params: EnergyParams = from_py(params)?;
    let body: BodySdf = from_py(body)?;
    let model = EnergyModel::new(&mesh.inner, params, body)
        .map_err(err)?
        .with_loops(selection(close_loops)?);
    let x = positions.map(from_points).unwrap_or_else(|| mesh.inner.vertices().to_vec());
    let mut state = SimState::at_rest(mesh.inner.vertices());
    state.external_force = model.external_forces(&vec![Vec3::zeros(); x.len()]);
    let out = py.detach(|| model.total(&state, &x, None)).map_err(err)?;
    to_py(py, &out)
}

/// Analytic gradients against central differences, one entry per term.
#[pyfunction]
#[pyo3(signature = (mesh, seed=0, params=None, body=None, close_loops="all", perturbation=1e-3))]
fn gradcheck(
    py: Python<'_>,
    mesh: &PyMesh,
    seed: u64,
    params: Option<&Bound<'_, PyAny>>,
    body: Option<&Bound<'_, PyAny>>,
    close_loops: &str,
    perturbation: f64,
) -> PyResult<Py<PyAny>> {
    let params: EnergyParams = from_py(params)?;
    let body: BodySdf = from_py(body)?;
    let sel = selection(close_loops)?;
    let options = GradcheckOptions {
        seed,
        perturbation,
        ..Default::default()
    };
    let rep = py
        .detach(|| senc_core::gradcheck::gradcheck(&mesh.inner, &params, &body, &sel, &options))
        .map_err(err)?;
    to_py(py, &rep)
}

/// Runs a sequence from rest and returns the report with the final positions.
#[pyfunction]
#[pyo3(signature = (mesh, config=None, params=None, body=None, close_loops="all"))]
fn simulate(
    py: Python<'_>,
    mesh: &PyMesh,
    config: Option<&Bound<'_, PyAny>>,
    params: Option<&Bound<'_, PyAny>>,
    body: Option<&Bound<'_, PyAny>>,
    close_loops: &str,
) -> PyResult<(Py<PyAny>, Vec<[f64; 3]>)> {
    let config: SimConfig = from_py(config)?;
    let params: EnergyParams = from_py(params)?;
    let body: BodySdf = from_py(body)?;
    let model = EnergyModel::new(&mesh.inner, params, body)
        .map_err(err)?
        .with_loops(selection(close_loops)?);
    let mut last = mesh.inner.vertices().to_vec();
    let rep = py
        .detach(|| {
            run_sequence(&model, mesh.inner.vertices(), &config, |_, state| {
                last.clone_from(&state.x_curr);
                Ok(())
            })
        })
        .map_err(err)?;
    Ok((to_py(py, &rep)?, to_points(&last)))
}

#[pymodule]
fn senc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMesh>()?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(self_collision_loss, m)?)?;
    m.add_function(wrap_pyfunction!(signed_volume, m)?)?;
    m.add_function(wrap_pyfunction!(self_collision_edges, m)?)?;
    m.add_function(wrap_pyfunction!(energy, m)?)?;
    m.add_function(wrap_pyfunction!(gradcheck, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
