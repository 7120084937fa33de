//! Python bindings: meshes, the incident wave, and the one-body and
//! many-body solvers.

use emscatter::diagnostics::{self, QResidualMode};
use emscatter::geometry::{self, WeightRule};
use emscatter::linalg::GmresOptions;
use emscatter::many_body::{self, Domain, ManyBodyLayout, TauMode};
use emscatter::one_body::{self, GammaFrame, GammaMatrix, GammaSource, OneBodySolution};
use emscatter::{CMat3, CVec3, CollocationMesh, IncidentWave, Vec3, C64};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: emscatter::Error) -> PyErr {
    match e {
        emscatter::Error::NotConverged { .. } => PyRuntimeError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

type P3 = (f64, f64, f64);
type C3 = (C64, C64, C64);

fn v3(p: P3) -> Vec3 {
    Vec3::new(p.0, p.1, p.2)
}

fn p3(v: Vec3) -> P3 {
    (v.x, v.y, v.z)
}

fn c3(v: CVec3) -> C3 {
    (v.x, v.y, v.z)
}

fn m3(m: &CMat3) -> Vec<Vec<C64>> {
    (0..3).map(|p| (0..3).map(|q| m.get(p, q)).collect()).collect()
}

fn weight_rule(name: &str) -> PyResult<WeightRule> {
    match name {
        "equal-area" => Ok(WeightRule::EqualArea),
        "surface-element" => Ok(WeightRule::SurfaceElement),
        other => Err(PyValueError::new_err(format!("unknown weight rule '{other}'"))),
    }
}

fn gamma_source(name: &str) -> PyResult<GammaSource> {
    match name {
        "sphere" => Ok(GammaSource::SphereAnalytic),
        "local" => Ok(GammaSource::Numeric(GammaFrame::Local)),
        "global" => Ok(GammaSource::Numeric(GammaFrame::Global)),
        other => Err(PyValueError::new_err(format!("unknown gamma '{other}'; use sphere, local or global"))),
    }
}

#[pyclass(name = "Wave", frozen, from_py_object)]
#[derive(Clone)]
struct PyWave(IncidentWave);

#[pymethods]
impl PyWave {
    #[new]
    #[pyo3(signature = (amplitude, direction, k, omega=5.0e14, mu=1.0, epsilon=1.0))]
    fn new(amplitude: P3, direction: P3, k: f64, omega: f64, mu: f64, epsilon: f64) -> PyResult<Self> {
        IncidentWave::new(v3(amplitude), v3(direction), k, omega, mu, epsilon).map(Self).map_err(to_py)
    }

    /// E = (1,0,0), direction (0,1,0), λ = 6e-5 cm.
    #[staticmethod]
    fn reference() -> Self {
        Self(IncidentWave::reference())
    }

    #[getter]
    fn k(&self) -> f64 {
        self.0.wavenumber()
    }

    fn e0(&self, x: P3) -> C3 {
        c3(self.0.e0(v3(x)))
    }

    fn __repr__(&self) -> String {
        format!("Wave(k={:e}, direction={:?}, amplitude={:?})", self.0.wavenumber(), p3(self.0.direction()), p3(self.0.amplitude()))
    }
}

#[pyclass(name = "Mesh", frozen)]
struct PyMesh {
    mesh: CollocationMesh,
    sphere: bool,
}

#[pymethods]
impl PyMesh {
    #[staticmethod]
    #[pyo3(signature = (radius, m_phi=12, weights="equal-area"))]
    fn sphere(radius: f64, m_phi: usize, weights: &str) -> PyResult<Self> {
        let mesh = geometry::mesh_sphere(radius, m_phi, weight_rule(weights)?).map_err(to_py)?;
        Ok(Self { mesh, sphere: true })
    }

    #[staticmethod]
    #[pyo3(signature = (a, b, c, m_phi=14, weights="equal-area"))]
    fn ellipsoid(a: f64, b: f64, c: f64, m_phi: usize, weights: &str) -> PyResult<Self> {
        let mesh = geometry::mesh_ellipsoid(a, b, c, m_phi, weight_rule(weights)?).map_err(to_py)?;
        Ok(Self { mesh, sphere: false })
    }

    /// Cube of half side `half_side`; by default one vertex sits at the origin.
    #[staticmethod]
    #[pyo3(signature = (half_side, n_per_face=10, center=None))]
    fn cube(half_side: f64, n_per_face: usize, center: Option<P3>) -> PyResult<Self> {
        let c = center.map(v3).unwrap_or(Vec3::new(half_side, half_side, half_side));
        let mesh = geometry::mesh_cube(half_side, n_per_face, c).map_err(to_py)?;
        Ok(Self { mesh, sphere: false })
    }

    /// Smallest band count whose sphere mesh has exactly `points` points.
    #[staticmethod]
    fn m_phi_for_points(points: usize) -> Option<usize> {
        geometry::m_phi_for_points(points)
    }

    fn __len__(&self) -> usize {
        self.mesh.len()
    }

    #[getter]
    fn points(&self) -> Vec<P3> {
        self.mesh.points().iter().map(|&p| p3(p)).collect()
    }

    #[getter]
    fn normals(&self) -> Vec<P3> {
        self.mesh.normals().iter().map(|&p| p3(p)).collect()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.mesh.weights().to_vec()
    }

    #[getter]
    fn area(&self) -> f64 {
        self.mesh.area()
    }

    #[getter]
    fn volume(&self) -> f64 {
        self.mesh.volume()
    }

    #[getter]
    fn center(&self) -> P3 {
        p3(self.mesh.center())
    }

    /// Γ averaged over the mesh in the per-source local frame, or the global frame.
    #[pyo3(signature = (frame="local"))]
    fn gamma(&self, frame: &str) -> PyResult<Vec<Vec<C64>>> {
        let f = match frame {
            "local" => GammaFrame::Local,
            "global" => GammaFrame::Global,
            other => return Err(PyValueError::new_err(format!("unknown frame '{other}'"))),
        };
        Ok(m3(&one_body::gamma_numeric(&self.mesh, f).map_err(to_py)?.gamma))
    }

    fn write_csv(&self, path: std::path::PathBuf) -> PyResult<()> {
        let file = std::fs::File::create(&path)?;
        self.mesh.write_csv(std::io::BufWriter::new(file))?;
        Ok(())
    }

    fn __repr__(&self) -> String {
        format!("Mesh(points={}, area={:e}, volume={:e})", self.mesh.len(), self.mesh.area(), self.mesh.volume())
    }
}

#[pyclass(name = "OneBodySolution", frozen)]
struct PyOneBody {
    solution: OneBodySolution,
    mesh: CollocationMesh,
    wave: IncidentWave,
}

#[pymethods]
impl PyOneBody {
    #[getter]
    fn q_exact(&self) -> C3 {
        c3(self.solution.q_exact)
    }

    #[getter]
    fn q_asymptotic(&self) -> C3 {
        c3(self.solution.q_asymptotic)
    }

    #[getter]
    fn current(&self) -> Vec<C3> {
        self.solution.current.values.iter().map(|&v| c3(v)).collect()
    }

    #[getter]
    fn gamma(&self) -> Vec<Vec<C64>> {
        m3(&self.solution.gamma.gamma)
    }

    #[getter]
    fn tau(&self) -> Vec<Vec<C64>> {
        m3(&self.solution.gamma.tau)
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.solution.current.report.iterations
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.solution.current.report.final_residual
    }

    fn e_exact(&self, x: P3) -> PyResult<C3> {
        self.solution.e_exact(&self.mesh, &self.wave, v3(x)).map(c3).map_err(to_py)
    }

    fn e_asymptotic(&self, x: P3) -> PyResult<C3> {
        self.solution.e_asymptotic(&self.mesh, &self.wave, v3(x)).map(c3).map_err(to_py)
    }

    /// Tangentiality, Q residual, Q and E errors at the given points.
    #[pyo3(signature = (points=Vec::new()))]
    fn validate<'py>(&self, py: Python<'py>, points: Vec<P3>) -> PyResult<Bound<'py, PyDict>> {
        let pts: Vec<Vec3> = points.into_iter().map(v3).collect();
        let r = diagnostics::validate(&self.mesh, &self.wave, &self.solution, QResidualMode::Applied, &pts)
            .map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("tangentiality_max", r.tangentiality_max)?;
        d.set_item("q_residual", r.q_residual_rel)?;
        d.set_item("q_exact_vs_asymptotic", r.q_asym_rel)?;
        d.set_item("e_exact_vs_asymptotic", r.e_asym_rel)?;
        Ok(d)
    }
}

/// Solves the one-body problem. `gamma` defaults to the analytic sphere
/// value for sphere meshes and the local-frame numeric value otherwise.
#[pyfunction]
#[pyo3(signature = (mesh, wave=None, gamma=None, tol=1e-10, restart=50, max_iter=1000))]
fn solve_one_body(
    py: Python<'_>,
    mesh: &PyMesh,
    wave: Option<PyWave>,
    gamma: Option<&str>,
    tol: f64,
    restart: usize,
    max_iter: usize,
) -> PyResult<PyOneBody> {
    let wave = wave.map(|w| w.0).unwrap_or_else(IncidentWave::reference);
    let source = match gamma {
        Some(g) => gamma_source(g)?,
        None if mesh.sphere => GammaSource::SphereAnalytic,
        None => GammaSource::Numeric(GammaFrame::Local),
    };
    let opts = GmresOptions { tol, restart, max_iter };
    let m = mesh.mesh.clone();
    let solution = py.detach(|| one_body::solve_one_body(&m, &wave, source, opts)).map_err(to_py)?;
    Ok(PyOneBody { solution, mesh: m, wave })
}

#[pyclass(name = "Layout", frozen)]
struct PyLayout(ManyBodyLayout);

#[pymethods]
impl PyLayout {
    /// n×n×n lattice (m = n³) with spacing d inside the unit cube.
    #[staticmethod]
    fn lattice(m: usize, d: f64, a: f64) -> PyResult<Self> {
        many_body::lattice_layout(m, d, a, Domain::unit_cube()).map(Self).map_err(to_py)
    }

    #[staticmethod]
    #[pyo3(signature = (centers, radius, volumes=None, domain_min=(0.0, 0.0, 0.0), domain_max=(1.0, 1.0, 1.0)))]
    fn from_centers(centers: Vec<P3>, radius: f64, volumes: Option<Vec<f64>>, domain_min: P3, domain_max: P3) -> PyResult<Self> {
        let domain = Domain::new(v3(domain_min), v3(domain_max)).map_err(to_py)?;
        ManyBodyLayout::new(centers.into_iter().map(v3).collect(), radius, volumes, domain).map(Self).map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    #[getter]
    fn centers(&self) -> Vec<P3> {
        self.0.centers().iter().map(|&c| p3(c)).collect()
    }

    #[getter]
    fn volumes(&self) -> Vec<f64> {
        self.0.volumes().to_vec()
    }
}

#[pyclass(name = "ManyBodyResult", frozen)]
struct PyManyBody {
    result: many_body::ManyBodyResult,
    layout: ManyBodyLayout,
    wave: IncidentWave,
}

#[pymethods]
impl PyManyBody {
    #[getter]
    fn norm(&self) -> f64 {
        self.result.norm
    }

    #[getter]
    fn error_estimate(&self) -> f64 {
        self.result.error_estimate
    }

    #[getter]
    fn fields(&self) -> Vec<C3> {
        self.result.fields.iter().map(|&v| c3(v)).collect()
    }

    #[getter]
    fn moments(&self) -> Vec<C3> {
        self.result.solution.q.iter().map(|&v| c3(v)).collect()
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.result.solution.report.iterations
    }

    /// Field at an arbitrary point away from the centers.
    fn field_at(&self, x: P3) -> PyResult<C3> {
        many_body::field_e_many(&self.layout, &self.wave, &self.result.solution, v3(x)).map(c3).map_err(to_py)
    }
}

#[pyfunction]
#[pyo3(signature = (layout, wave=None, tau_mode="diagonal", tol=1e-10, restart=50, max_iter=1000))]
fn run_many_body(
    py: Python<'_>,
    layout: &PyLayout,
    wave: Option<PyWave>,
    tau_mode: &str,
    tol: f64,
    restart: usize,
    max_iter: usize,
) -> PyResult<PyManyBody> {
    let wave = wave.map(|w| w.0).unwrap_or_else(IncidentWave::reference);
    let mode = match tau_mode {
        "diagonal" => TauMode::Diagonal,
        "full" => TauMode::Full,
        other => return Err(PyValueError::new_err(format!("unknown tau mode '{other}'"))),
    };
    let opts = GmresOptions { tol, restart, max_iter };
    let l = layout.0.clone();
    let result = py
        .detach(|| many_body::run_many_body(&l, &wave, &GammaMatrix::sphere(), mode, opts))
        .map_err(to_py)?;
    Ok(PyManyBody { result, layout: l, wave })
}

#[pymodule]
#[pyo3(name = "emscatter")]
fn emscatter_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyWave>()?;
    m.add_class::<PyMesh>()?;
    m.add_class::<PyOneBody>()?;
    m.add_class::<PyLayout>()?;
    m.add_class::<PyManyBody>()?;
    m.add_function(wrap_pyfunction!(solve_one_body, m)?)?;
    m.add_function(wrap_pyfunction!(run_many_body, m)?)?;
    Ok(())
}
