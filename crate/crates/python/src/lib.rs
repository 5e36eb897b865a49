//! Python bindings. Documents such as reports and chart dumps are handed over
//! as plain dicts through the `json` module.

use pyo3::exceptions::{PyIndexError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use toric_ball as core;
use core::homeo::{param_boundary_point, phi_global, BaryPoint};
use core::verify::VerifyConfig;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(value_error)?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(frozen, module = "toric_ball")]
struct Fan {
    inner: core::Fan,
}

#[pymethods]
impl Fan {
    #[new]
    fn new(dim: usize, rays: Vec<Vec<i64>>, max_cones: Vec<Vec<usize>>) -> PyResult<Self> {
        let inner = core::Fan::new(dim, rays, max_cones).map_err(value_error)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = core::Fan::from_json(text).map_err(value_error)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn bundled(name: &str) -> PyResult<Self> {
        let text = core::bundled::source(name)
            .ok_or_else(|| PyValueError::new_err(format!("no bundled fan named {name}")))?;
        Self::from_json(text)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn rays(&self) -> Vec<Vec<i64>> {
        self.inner.rays().to_vec()
    }

    /// Ray-index sets of all cones; index 0 is the zero cone.
    #[getter]
    fn cones(&self) -> Vec<Vec<usize>> {
        self.inner.cones().iter().map(|c| c.rays.clone()).collect()
    }

    #[getter]
    fn maximal(&self) -> Vec<Vec<usize>> {
        self.inner
            .maximal()
            .iter()
            .map(|&c| self.inner.cone(c).rays.clone())
            .collect()
    }

    fn is_complete(&self) -> bool {
        self.inner.is_complete().is_ok()
    }

    fn barycenter(&self, rays: Vec<usize>) -> PyResult<Vec<i64>> {
        let c = self.cone(&rays)?;
        Ok(self.inner.barycenter(c))
    }

    fn hilbert_basis(&self, rays: Vec<usize>) -> PyResult<Vec<Vec<i64>>> {
        let c = self.cone(&rays)?;
        Ok(core::hilbert_basis(&self.inner, c).elements)
    }

    /// Maximal flags as lists of ray-index sets.
    fn flags(&self) -> Vec<Vec<Vec<usize>>> {
        core::enumerate_flags(&self.inner, true)
            .iter()
            .map(|f| f.ray_sets(&self.inner))
            .collect()
    }

    /// `(χ, χ of the boundary, number of maximal simplices)` of the ball model.
    fn ball_model(&self) -> (i64, i64, usize) {
        let b = core::BallModel::build(&self.inner);
        (
            b.euler_characteristic(),
            b.boundary_euler_characteristic(),
            b.maximal().len(),
        )
    }

    /// `(χ, number of top cells)` of the orbit complex.
    fn orbit_complex(&self) -> (i64, usize) {
        let o = core::OrbitComplex::build(&self.inner);
        (o.euler_characteristic(), o.top_cells())
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner.description()).map_err(value_error)
    }

    fn __repr__(&self) -> String {
        format!(
            "Fan(dim={}, rays={}, cones={})",
            self.inner.dim(),
            self.inner.rays().len(),
            self.inner.num_cones()
        )
    }
}

impl Fan {
    fn cone(&self, rays: &[usize]) -> PyResult<usize> {
        let mut r = rays.to_vec();
        r.sort_unstable();
        self.inner
            .cone_index(&r)
            .ok_or_else(|| PyValueError::new_err(format!("{rays:?} is not a cone of the fan")))
    }
}

#[pyclass(frozen, module = "toric_ball")]
struct Atlas {
    inner: core::Atlas,
}

#[pymethods]
impl Atlas {
    #[new]
    fn new(fan: &Fan) -> PyResult<Self> {
        if let Err(v) = fan.inner.is_complete() {
            return Err(value_error(v));
        }
        let inner = core::Atlas::new(&fan.inner).map_err(value_error)?;
        Ok(Self { inner })
    }

    fn __len__(&self) -> usize {
        self.inner.charts().len()
    }

    /// Flag, generators, `c`, `b` and the monomial formulas of one chart.
    fn chart<'py>(&self, py: Python<'py>, index: usize) -> PyResult<Bound<'py, PyAny>> {
        let ch = self.get(index)?;
        let fan = self.inner.fan();
        let doc = serde_json::json!({
            "flag": ch.flag.ray_sets(fan),
            "alpha": &ch.generators[..ch.n()],
            "generators": ch.generators,
            "barycenters": ch.barycenters,
            "c": ch.c,
            "b": ch.b(),
            "psi": ch.psi.formulas(),
        });
        to_py(py, &doc)
    }

    fn psi_eval(&self, index: usize, w: Vec<f64>) -> PyResult<Vec<f64>> {
        let ch = self.get(index)?;
        if w.len() != ch.n() {
            return Err(PyValueError::new_err(format!("expected {} coordinates", ch.n())));
        }
        Ok(ch.psi_eval(&w))
    }

    #[pyo3(signature = (index, y, tol = 1e-9))]
    fn psi_invert(&self, index: usize, y: Vec<f64>, tol: f64) -> PyResult<Vec<f64>> {
        let ch = self.get(index)?;
        ch.psi_invert(&y, tol)
            .map(|w| w.into_vec())
            .map_err(value_error)
    }

    /// `Φ̄_F(ξ)` as `(carrier rays, values on its Hilbert basis)`.
    fn param(&self, index: usize, xi: Vec<f64>) -> PyResult<(Vec<usize>, Vec<f64>)> {
        self.get(index)?;
        let xi = BaryPoint::new(xi).map_err(value_error)?;
        let p = param_boundary_point(&self.inner, index, &xi).map_err(value_error)?;
        Ok((self.inner.fan().cone(p.carrier).rays.clone(), p.values))
    }

    /// `Φ(x)` with the index of the maximal flag used.
    fn phi(&self, x: Vec<f64>) -> PyResult<(usize, Vec<f64>)> {
        if x.len() != self.inner.fan().dim() {
            return Err(PyValueError::new_err("point has the wrong dimension"));
        }
        Ok(phi_global(self.inner.subdivision(), &x, 1e-12))
    }

    #[pyo3(signature = (index, u, delta = 0))]
    fn commutativity_residual(&self, index: usize, u: Vec<f64>, delta: i64) -> PyResult<f64> {
        let ch = self.get(index)?;
        let ch = if delta == 0 {
            ch.clone()
        } else {
            ch.perturbed(0, ch.n() - 1, delta)
        };
        ch.commutativity_residual(&u).map_err(value_error)
    }
}

impl Atlas {
    fn get(&self, index: usize) -> PyResult<&core::charts::Chart> {
        self.inner
            .charts()
            .get(index)
            .ok_or_else(|| PyIndexError::new_err(format!("no chart {index}")))
    }
}

/// Runs the full check suite and returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (fan, tol = 1e-9, samples = 50, seed = 0, perturb_b = false))]
fn verify<'py>(
    py: Python<'py>,
    fan: &Fan,
    tol: f64,
    samples: usize,
    seed: u64,
    perturb_b: bool,
) -> PyResult<Bound<'py, PyAny>> {
    if !(tol > 0.0) {
        return Err(PyValueError::new_err("tolerance must be positive"));
    }
    let cfg = VerifyConfig {
        tol,
        samples,
        seed,
        perturb_b,
    };
    let report = py
        .detach(|| core::verify::run(&fan.inner, &cfg))
        .map_err(value_error)?;
    to_py(py, &report)
}

#[pyfunction]
fn bundled_names() -> Vec<&'static str> {
    core::bundled::names()
}

#[pyfunction]
fn phi_flag(u: Vec<f64>) -> Vec<f64> {
    core::homeo::phi_flag(&u)
}

#[pyfunction]
fn phi_flag_inverse(v: Vec<f64>) -> Vec<f64> {
    core::homeo::phi_flag_inverse(&v)
}

#[pymodule]
#[pyo3(name = "toric_ball")]
fn toric_ball_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Fan>()?;
    m.add_class::<Atlas>()?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(bundled_names, m)?)?;
    m.add_function(wrap_pyfunction!(phi_flag, m)?)?;
    m.add_function(wrap_pyfunction!(phi_flag_inverse, m)?)?;
    Ok(())
}
