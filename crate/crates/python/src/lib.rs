//! Python bindings for the threshold-dynamics toolkit: reaction terms,
//! the stationary bump, traveling-front speeds, and the critical
//! ignition width, exposed as the extension module `sharpfront_py`.
//!
//! Build with `cargo build -p sharpfront-python --release` and import
//! the resulting `libsharpfront_py.so` as `sharpfront_py` (see
//! `python/smoke_test.py` for a self-contained loader).

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use sharpfront::{Boundary, Grid, NonlinearitySpec, SimParams, StationaryProfile};

fn value_error(err: sharpfront::Error) -> PyErr {
    PyValueError::new_err(err.to_string())
}

/// A reaction term f on [0, 1], vanishing at 0 and 1.
#[pyclass]
struct Nonlinearity {
    spec: NonlinearitySpec,
}

#[pymethods]
impl Nonlinearity {
    /// Ignition hump: 0 up to the cutoff `theta0`, then
    /// theta (theta - theta0)(1 - theta).
    #[staticmethod]
    fn ignition(theta0: f64) -> PyResult<Self> {
        Ok(Self { spec: NonlinearitySpec::ignition(theta0).map_err(value_error)? })
    }

    /// Logistic growth theta (1 - theta).
    #[staticmethod]
    fn kpp_logistic() -> PyResult<Self> {
        Ok(Self { spec: NonlinearitySpec::kpp_logistic().map_err(value_error)? })
    }

    /// Degenerate monostable growth theta^p (1 - theta).
    #[staticmethod]
    fn kpp_power(p: f64) -> PyResult<Self> {
        Ok(Self { spec: NonlinearitySpec::kpp_power(p).map_err(value_error)? })
    }

    /// Combustion-type term with an exponential activation factor.
    #[staticmethod]
    fn arrhenius(activation: f64) -> PyResult<Self> {
        Ok(Self { spec: NonlinearitySpec::arrhenius(activation).map_err(value_error)? })
    }

    /// Cubic theta (theta - a)(1 - theta) with sign change at `a`.
    #[staticmethod]
    fn bistable_cubic(a: f64) -> PyResult<Self> {
        Ok(Self { spec: NonlinearitySpec::bistable_cubic(a).map_err(value_error)? })
    }

    /// f(theta).
    fn eval(&self, theta: f64) -> PyResult<f64> {
        self.spec.eval_f(theta).map_err(value_error)
    }

    /// Integral of f from 0 to theta.
    fn potential(&self, theta: f64) -> PyResult<f64> {
        self.spec.potential(theta).map_err(value_error)
    }

    /// Balance temperature: the interior zero of the potential
    /// (bistable terms only).
    fn theta2(&self) -> PyResult<f64> {
        self.spec.theta2().map_err(value_error)
    }

    fn lipschitz_constant(&self) -> f64 {
        self.spec.lipschitz_constant()
    }

    /// The same shape scaled by `amplitude`.
    fn with_amplitude(&self, amplitude: f64) -> PyResult<Self> {
        Ok(Self { spec: self.spec.with_amplitude(amplitude).map_err(value_error)? })
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.spec)
    }
}

/// The symmetric stationary profile dividing extinction from
/// propagation for a bistable reaction.
#[pyclass]
struct Bump {
    profile: StationaryProfile,
}

#[pymethods]
impl Bump {
    /// Peak value U(0).
    #[getter]
    fn theta2(&self) -> f64 {
        self.profile.theta2()
    }

    /// Exponential tail rate of U.
    #[getter]
    fn decay_rate(&self) -> f64 {
        self.profile.decay_rate()
    }

    /// Radius of the tabulated part of the profile.
    #[getter]
    fn table_radius(&self) -> f64 {
        self.profile.table_radius()
    }

    /// U(x), with the exponential tail beyond the table.
    fn eval(&self, x: f64) -> f64 {
        self.profile.eval(x)
    }

    /// Sup of |U'' + f(U)| sampled on a grid of spacing `h`.
    #[pyo3(signature = (nonlinearity, h = 0.01))]
    fn residual(&self, nonlinearity: PyRef<'_, Nonlinearity>, h: f64) -> PyResult<f64> {
        self.profile.residual_sup(&nonlinearity.spec, h).map_err(value_error)
    }
}

/// Solve for the stationary bump of a bistable reaction.
#[pyfunction]
fn solve_bump(nonlinearity: PyRef<'_, Nonlinearity>) -> PyResult<Bump> {
    Ok(Bump { profile: sharpfront::solve_bump(&nonlinearity.spec).map_err(value_error)? })
}

/// Speed of the traveling front connecting 1 to 0 (bistable terms).
#[pyfunction]
#[pyo3(signature = (nonlinearity, tol = 1e-6))]
fn front_speed(nonlinearity: PyRef<'_, Nonlinearity>, tol: f64) -> PyResult<f64> {
    Ok(sharpfront::front_speed(&nonlinearity.spec, tol).map_err(value_error)?.speed)
}

/// Bisect for the critical half-width of indicator data on
/// [-half_width, half_width]. Returns (l_lo, l_hi, estimate,
/// hair_trigger).
#[pyfunction]
#[pyo3(signature = (
    nonlinearity, l_min, l_max,
    gap_tol = 1e-3, half_width = 40.0, n_cells = 800, t_max = 100.0,
))]
fn find_threshold(
    nonlinearity: PyRef<'_, Nonlinearity>,
    l_min: f64,
    l_max: f64,
    gap_tol: f64,
    half_width: f64,
    n_cells: usize,
    t_max: f64,
) -> PyResult<(f64, f64, f64, bool)> {
    let grid = Grid::new(half_width, n_cells).map_err(value_error)?;
    let spec = &nonlinearity.spec;
    let mut params = SimParams::with_default_dt(grid, spec, t_max, Boundary::DirichletZero)
        .map_err(value_error)?;
    params.probe_every = ((0.02 / params.dt).round() as usize).max(1);
    let result = sharpfront::find_threshold(spec, grid, &params, (l_min, l_max), gap_tol)
        .map_err(value_error)?;
    Ok((result.l_lo, result.l_hi, result.l0_estimate, result.hair_trigger))
}

#[pymodule]
mod sharpfront_py {
    #[pymodule_export]
    use super::{find_threshold, front_speed, solve_bump, Bump, Nonlinearity};
}
