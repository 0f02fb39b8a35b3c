//! Python bindings. Fields cross the boundary as lists of floats sampled on
//! the uniform interval grid with `len(values)` nodes.

use std::sync::Arc;

use lpfr_core::dens_geo::{distance_dens, geodesic_bvp_dens, geodesic_ivp_dens, DensGeodesicResult};
use lpfr_core::grid::{alpha_from_p, exponents_from_alpha, fp_norm as core_fp_norm};
use lpfr_core::parametric::{
    alpha_normal_rhs, lp_geodesic_rhs, shoot_bvp, NormalModel, NormalTrajectory, ShootOptions,
};
use lpfr_core::prob_alpha::{alpha_geodesic_prob, AlphaTarget};
use lpfr_core::prob_lp::{lp_geodesic_prob_bvp, LpBvpOptions, MinimizerStatus};
use lpfr_core::tensors::{self, TensorContext};
use lpfr_core::{DensityField, Error, GridSpec, PathGrid, TangentField};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::ShootingFailed(_) | Error::DegenerateDenominator(_) | Error::NonPositiveSigma(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn uniform_times(steps: usize, t_end: f64) -> PyResult<Vec<f64>> {
    if steps < 2 {
        return Err(PyValueError::new_err("steps must be at least 2"));
    }
    let m = (steps - 1) as f64;
    Ok((0..steps).map(|k| t_end * k as f64 / m).collect())
}

fn interval(n: usize) -> PyResult<Arc<GridSpec>> {
    GridSpec::interval(n).map_err(to_py)
}

fn density(values: Vec<f64>) -> PyResult<DensityField> {
    DensityField::new(interval(values.len())?, values).map_err(to_py)
}

fn probability(values: Vec<f64>) -> PyResult<DensityField> {
    Ok(density(values)?.normalized().0)
}

fn tangent(grid: &Arc<GridSpec>, values: Vec<f64>) -> PyResult<TangentField> {
    TangentField::new(grid.clone(), values).map_err(to_py)
}

/// Uniform trapezoid grid on `[0, 1]`.
#[pyclass(name = "Grid", frozen)]
struct PyGrid {
    inner: Arc<GridSpec>,
}

#[pymethods]
impl PyGrid {
    #[new]
    fn new(n: usize) -> PyResult<Self> {
        Ok(Self { inner: interval(n)? })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn nodes(&self) -> Vec<f64> {
        self.inner.nodes().to_vec()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.weights().to_vec()
    }

    /// Density from a named family: `uniform`, `bump(m,s)` or
    /// `mixture(m1,s1,m2,s2,w)`, normalized to unit mass.
    fn named_density(&self, source: &str) -> PyResult<Vec<f64>> {
        let (mu, _) = lpfr_core::io::named_density(source, &self.inner).map_err(to_py)?;
        Ok(mu.into_values())
    }

    /// Mean-free velocity `sin(k,amp)` or `cos(k,amp)`.
    fn named_velocity(&self, source: &str) -> PyResult<Vec<f64>> {
        Ok(lpfr_core::io::named_velocity(source, &self.inner)
            .map_err(to_py)?
            .values()
            .to_vec())
    }

    fn integrate(&self, values: Vec<f64>) -> PyResult<f64> {
        lpfr_core::grid::integrate(&values, &self.inner).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("Grid(n={})", self.inner.n())
    }
}

/// Sampled curve of densities.
#[pyclass(name = "Path", frozen, get_all)]
struct PyPath {
    times: Vec<f64>,
    frames: Vec<Vec<f64>>,
    /// Whether the requested time range crossed the edge of the space.
    left_space: bool,
    blowup_time: Option<f64>,
}

#[pymethods]
impl PyPath {
    fn __len__(&self) -> usize {
        self.times.len()
    }

    fn __repr__(&self) -> String {
        format!("Path(len={}, left_space={})", self.times.len(), self.left_space)
    }
}

impl PyPath {
    fn from_grid(path: &PathGrid) -> Self {
        Self {
            times: path.times().to_vec(),
            frames: path.frames().iter().map(|f| f.values().to_vec()).collect(),
            left_space: false,
            blowup_time: None,
        }
    }

    fn from_result(r: &DensGeodesicResult) -> Self {
        Self {
            left_space: r.left_space,
            blowup_time: r.blowup_time,
            ..Self::from_grid(&r.path)
        }
    }
}

/// Result of the L^p-Fisher-Rao energy minimizer.
#[pyclass(name = "LpGeodesic", frozen, get_all)]
struct PyLpGeodesic {
    path: Py<PyPath>,
    energy_trace: Vec<f64>,
    iterations: usize,
    /// `converged`, `max_iter` or `stalled`.
    status: &'static str,
}

/// Trajectory in normal-family coordinates `(m, sigma)`.
#[pyclass(name = "NormalPath", frozen, get_all)]
struct PyNormalPath {
    times: Vec<f64>,
    m: Vec<f64>,
    sigma: Vec<f64>,
    m_dot: Vec<f64>,
    sigma_dot: Vec<f64>,
    newton_iterations: usize,
    miss: f64,
}

impl From<NormalTrajectory> for PyNormalPath {
    fn from(t: NormalTrajectory) -> Self {
        Self {
            m: t.states.iter().map(|s| s.m).collect(),
            sigma: t.states.iter().map(|s| s.sigma).collect(),
            m_dot: t.states.iter().map(|s| s.m_dot).collect(),
            sigma_dot: t.states.iter().map(|s| s.sigma_dot).collect(),
            times: t.times,
            newton_iterations: t.newton_iterations,
            miss: t.miss,
        }
    }
}

/// `p = 2/(1 − α)`.
#[pyfunction]
fn p_from_alpha(alpha: f64) -> PyResult<f64> {
    Ok(exponents_from_alpha(alpha).map_err(to_py)?.0)
}

/// `α = 1 − 2/p`.
#[pyfunction(name = "alpha_from_p")]
fn py_alpha_from_p(p: f64) -> PyResult<f64> {
    alpha_from_p(p).map_err(to_py)
}

/// `F_p(μ, a) = (∫ |a/μ|^p μ)^{1/p}`.
#[pyfunction]
fn fp_norm(mu: Vec<f64>, a: Vec<f64>, p: f64) -> PyResult<f64> {
    let mu = density(mu)?;
    let a = tangent(mu.grid(), a)?;
    core_fp_norm(&mu, &a, p).map_err(to_py)
}

/// Geodesic distance between two positive densities.
#[pyfunction]
fn distance(mu0: Vec<f64>, mu1: Vec<f64>, p: f64) -> PyResult<f64> {
    distance_dens(&density(mu0)?, &density(mu1)?, p).map_err(to_py)
}

/// Closed-form geodesic between two positive densities.
#[pyfunction]
#[pyo3(signature = (mu0, mu1, p, steps = 30))]
fn dens_geodesic(mu0: Vec<f64>, mu1: Vec<f64>, p: f64, steps: usize) -> PyResult<PyPath> {
    let path = geodesic_bvp_dens(&density(mu0)?, &density(mu1)?, p, &uniform_times(steps, 1.0)?).map_err(to_py)?;
    Ok(PyPath::from_grid(&path))
}

/// Exponential map on positive densities; stops where positivity is lost.
#[pyfunction]
#[pyo3(signature = (mu0, velocity, p, steps = 30, t_max = 1.0))]
fn dens_exp(mu0: Vec<f64>, velocity: Vec<f64>, p: f64, steps: usize, t_max: f64) -> PyResult<PyPath> {
    let mu0 = density(mu0)?;
    let a = tangent(mu0.grid(), velocity)?;
    let r = geodesic_ivp_dens(&mu0, &a, p, &uniform_times(steps, t_max)?).map_err(to_py)?;
    Ok(PyPath::from_result(&r))
}

/// α-geodesic (`α = 1 − 2/p`) between probability densities. Inputs are
/// normalized to unit mass.
#[pyfunction]
#[pyo3(signature = (mu0, mu1, p, steps = 30))]
fn prob_alpha_geodesic(mu0: Vec<f64>, mu1: Vec<f64>, p: f64, steps: usize) -> PyResult<PyPath> {
    let target = AlphaTarget::Endpoint(probability(mu1)?);
    let r = alpha_geodesic_prob(&probability(mu0)?, &target, p, &uniform_times(steps, 1.0)?).map_err(to_py)?;
    Ok(PyPath::from_result(&r))
}

/// α-geodesic from `mu0` with initial velocity `velocity` (mean-free).
#[pyfunction]
#[pyo3(signature = (mu0, velocity, p, steps = 30, t_max = 1.0))]
fn prob_alpha_exp(mu0: Vec<f64>, velocity: Vec<f64>, p: f64, steps: usize, t_max: f64) -> PyResult<PyPath> {
    let mu0 = probability(mu0)?;
    let target = AlphaTarget::Velocity(tangent(mu0.grid(), velocity)?);
    let r = alpha_geodesic_prob(&mu0, &target, p, &uniform_times(steps, t_max)?).map_err(to_py)?;
    Ok(PyPath::from_result(&r))
}

/// L^p-Fisher-Rao geodesic between probability densities by energy
/// minimization on the L^p sphere.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (mu0, mu1, p, steps = 30, tol = 1e-8, max_iter = 20_000, eta0 = 0.1))]
fn prob_lp_geodesic(
    py: Python<'_>,
    mu0: Vec<f64>,
    mu1: Vec<f64>,
    p: f64,
    steps: usize,
    tol: f64,
    max_iter: usize,
    eta0: f64,
) -> PyResult<PyLpGeodesic> {
    let opts = LpBvpOptions {
        t_steps: steps,
        max_iter,
        tol,
        eta0,
    };
    let (mu0, mu1) = (probability(mu0)?, probability(mu1)?);
    let r = py
        .detach(|| lp_geodesic_prob_bvp(&mu0, &mu1, p, &opts))
        .map_err(to_py)?;
    let status = match r.status {
        MinimizerStatus::Converged => "converged",
        MinimizerStatus::MaxIter => "max_iter",
        MinimizerStatus::Stalled => "stalled",
    };
    Ok(PyLpGeodesic {
        path: Py::new(py, PyPath::from_grid(&r.path))?,
        energy_trace: r.energy_trace,
        iterations: r.iterations,
        status,
    })
}

/// Geodesic between normal distributions `theta = (m, sigma)`.
/// `connection` is `"lp"` for the Finsler metric or `"alpha"` for the
/// α-connection with `α = 1 − 2/p`.
#[pyfunction]
#[pyo3(signature = (theta0, theta1, p, connection = "lp", steps = 50, tol = 1e-10, quadrature = 64))]
fn normal_geodesic(
    theta0: [f64; 2],
    theta1: [f64; 2],
    p: f64,
    connection: &str,
    steps: usize,
    tol: f64,
    quadrature: usize,
) -> PyResult<PyNormalPath> {
    let opts = ShootOptions {
        steps,
        tol,
        ..Default::default()
    };
    let traj = match connection {
        "lp" => {
            let model = NormalModel::new(quadrature).map_err(to_py)?;
            shoot_bvp(|s| lp_geodesic_rhs(&model, s, p), theta0, theta1, &opts)
        }
        "alpha" => {
            let alpha = alpha_from_p(p).map_err(to_py)?;
            shoot_bvp(|s| alpha_normal_rhs(s, alpha), theta0, theta1, &opts)
        }
        other => return Err(PyValueError::new_err(format!("unknown connection `{other}`"))),
    };
    Ok(traj.map_err(to_py)?.into())
}

/// Fundamental tensor `g^ν_μ(a, b)` of `F_p^2` at `(μ, ν)`.
#[pyfunction]
fn hessian_g(mu: Vec<f64>, nu: Vec<f64>, a: Vec<f64>, b: Vec<f64>, p: f64) -> PyResult<f64> {
    let mu = density(mu)?;
    let g = mu.grid().clone();
    let ctx = TensorContext::new(mu, tangent(&g, nu)?, p).map_err(to_py)?;
    tensors::hessian_g(&ctx, &tangent(&g, a)?, &tangent(&g, b)?).map_err(to_py)
}

/// Cartan tensor `C^ν_μ(a, b, c)`.
#[pyfunction]
fn cartan_c(mu: Vec<f64>, nu: Vec<f64>, a: Vec<f64>, b: Vec<f64>, c: Vec<f64>, p: f64) -> PyResult<f64> {
    let mu = density(mu)?;
    let g = mu.grid().clone();
    let ctx = TensorContext::new(mu, tangent(&g, nu)?, p).map_err(to_py)?;
    tensors::cartan_c(&ctx, &tangent(&g, a)?, &tangent(&g, b)?, &tangent(&g, c)?).map_err(to_py)
}

#[pymodule]
fn lpfr(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyPath>()?;
    m.add_class::<PyLpGeodesic>()?;
    m.add_class::<PyNormalPath>()?;
    m.add_function(wrap_pyfunction!(p_from_alpha, m)?)?;
    m.add_function(wrap_pyfunction!(py_alpha_from_p, m)?)?;
    m.add_function(wrap_pyfunction!(fp_norm, m)?)?;
    m.add_function(wrap_pyfunction!(distance, m)?)?;
    m.add_function(wrap_pyfunction!(dens_geodesic, m)?)?;
    m.add_function(wrap_pyfunction!(dens_exp, m)?)?;
    m.add_function(wrap_pyfunction!(prob_alpha_geodesic, m)?)?;
    m.add_function(wrap_pyfunction!(prob_alpha_exp, m)?)?;
    m.add_function(wrap_pyfunction!(prob_lp_geodesic, m)?)?;
    m.add_function(wrap_pyfunction!(normal_geodesic, m)?)?;
    m.add_function(wrap_pyfunction!(hessian_g, m)?)?;
    m.add_function(wrap_pyfunction!(cartan_c, m)?)?;
    Ok(())
}
