//! Python bindings: grids, spectral fields, the multiplier symbols, the
//! conserved/almost-conserved diagnostics, and the time steppers.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use nlscyl::diagnostics::{self, QuarticMode};
use nlscyl::dynamics::{self, SolverConfig};
use nlscyl::estimate_lab::{make_localized_data, DataSpec};
use nlscyl::multiplier::{self, MultiplierSpec};
use nlscyl::num_complex::Complex64;
use nlscyl::{Freq, SpectralField};

fn err(e: nlscyl::Error) -> PyErr {
    match e.exit_code() {
        2 => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn freq(t: (f64, f64)) -> Freq {
    Freq::new(t.0, t.1)
}

#[pyclass(name = "Grid")]
#[derive(Clone)]
struct PyGrid {
    inner: nlscyl::Grid,
}

#[pymethods]
impl PyGrid {
    #[new]
    fn new(l_x: f64, n_x: usize, n_y: usize) -> PyResult<Self> {
        Ok(PyGrid {
            inner: nlscyl::Grid::new(l_x, n_x, n_y).map_err(err)?,
        })
    }

    #[getter]
    fn l_x(&self) -> f64 {
        self.inner.l_x()
    }

    #[getter]
    fn n_x(&self) -> usize {
        self.inner.n_x()
    }

    #[getter]
    fn n_y(&self) -> usize {
        self.inner.n_y()
    }

    /// Riemann weight 2 pi / L_x of one xi lattice step.
    #[getter]
    fn weight(&self) -> f64 {
        self.inner.weight()
    }

    #[getter]
    fn dxi(&self) -> f64 {
        self.inner.dxi()
    }

    fn __repr__(&self) -> String {
        format!(
            "Grid(l_x={}, n_x={}, n_y={})",
            self.inner.l_x(),
            self.inner.n_x(),
            self.inner.n_y()
        )
    }
}

#[pyclass(name = "Field")]
#[derive(Clone)]
struct PyField {
    inner: SpectralField,
}

impl PyField {
    fn indices(&self, xi_index: i64, eta_index: i64) -> PyResult<(usize, usize)> {
        let grid = self.inner.grid();
        let i = grid
            .col_of_xi_index(xi_index)
            .ok_or_else(|| PyValueError::new_err(format!("xi index {xi_index} outside grid")))?;
        let j = grid
            .row_of_eta_index(eta_index)
            .ok_or_else(|| PyValueError::new_err(format!("eta index {eta_index} outside grid")))?;
        Ok((j, i))
    }
}

#[pymethods]
impl PyField {
    #[staticmethod]
    fn zeros(grid: &PyGrid) -> Self {
        PyField {
            inner: SpectralField::zeros(&grid.inner),
        }
    }

    /// Unit-L^2 Gaussian random data supported on |zeta| in [n, 2n).
    #[staticmethod]
    fn random_band(grid: &PyGrid, n: f64, seed: u64) -> PyResult<Self> {
        Ok(PyField {
            inner: make_localized_data(&grid.inner, &DataSpec::band(n), seed).map_err(err)?,
        })
    }

    #[getter]
    fn grid(&self) -> PyGrid {
        PyGrid {
            inner: self.inner.grid().clone(),
        }
    }

    /// Set the coefficient at centered indices (xi_index, eta_index).
    fn set_coeff(&mut self, xi_index: i64, eta_index: i64, re: f64, im: f64) -> PyResult<()> {
        let (j, i) = self.indices(xi_index, eta_index)?;
        self.inner.set_coeff(j, i, Complex64::new(re, im));
        Ok(())
    }

    fn coeff(&self, xi_index: i64, eta_index: i64) -> PyResult<(f64, f64)> {
        let (j, i) = self.indices(xi_index, eta_index)?;
        let c = self.inner.coeff(j, i);
        Ok((c.re, c.im))
    }

    fn l2_norm(&self) -> f64 {
        self.inner.l2_norm()
    }

    fn scale(&mut self, re: f64, im: f64) {
        self.inner.scale(Complex64::new(re, im));
    }

    /// Physical samples, row-major (y outer, x inner), as (re, im) pairs.
    fn to_physical(&self) -> Vec<(f64, f64)> {
        self.inner
            .to_physical()
            .into_iter()
            .map(|c| (c.re, c.im))
            .collect()
    }

    #[staticmethod]
    fn from_physical(grid: &PyGrid, values: Vec<(f64, f64)>) -> PyResult<Self> {
        let phys: Vec<Complex64> = values
            .into_iter()
            .map(|(re, im)| Complex64::new(re, im))
            .collect();
        Ok(PyField {
            inner: nlscyl::forward_transform(&grid.inner, &phys).map_err(err)?,
        })
    }
}

/// The multiplier m(zeta) for threshold N and Sobolev index s.
#[pyfunction]
fn m_eval(s: f64, n: f64, xi: f64, eta: f64) -> PyResult<f64> {
    let spec = MultiplierSpec::new(s, n).map_err(err)?;
    Ok(spec.m(&Freq::new(xi, eta)))
}

/// Angular threshold theta_0 of a frequency quadruple.
#[pyfunction]
fn theta0(z1: (f64, f64), z2: (f64, f64), z3: (f64, f64), z4: (f64, f64)) -> f64 {
    multiplier::theta0(&freq(z1), &freq(z2), &freq(z3), &freq(z4))
}

#[pyfunction]
fn lambda4(
    s: f64,
    n: f64,
    z1: (f64, f64),
    z2: (f64, f64),
    z3: (f64, f64),
    z4: (f64, f64),
) -> PyResult<f64> {
    let spec = MultiplierSpec::new(s, n).map_err(err)?;
    Ok(multiplier::lambda4(&spec, &[freq(z1), freq(z2), freq(z3), freq(z4)]))
}

#[pyfunction]
fn lambda4_tilde(
    s: f64,
    n: f64,
    z1: (f64, f64),
    z2: (f64, f64),
    z3: (f64, f64),
    z4: (f64, f64),
) -> PyResult<f64> {
    let spec = MultiplierSpec::new(s, n).map_err(err)?;
    Ok(multiplier::lambda4_tilde(&spec, &[freq(z1), freq(z2), freq(z3), freq(z4)]))
}

#[pyfunction]
fn lambda6(s: f64, n: f64, z: Vec<(f64, f64)>) -> PyResult<f64> {
    if z.len() != 6 {
        return Err(PyValueError::new_err("lambda6 needs six frequencies"));
    }
    let spec = MultiplierSpec::new(s, n).map_err(err)?;
    let zs = [
        freq(z[0]),
        freq(z[1]),
        freq(z[2]),
        freq(z[3]),
        freq(z[4]),
        freq(z[5]),
    ];
    Ok(multiplier::lambda6(&spec, &zs))
}

#[pyfunction]
fn mass(f: &PyField) -> f64 {
    diagnostics::mass(&f.inner)
}

#[pyfunction]
fn energy(f: &PyField) -> f64 {
    diagnostics::energy(&f.inner)
}

#[pyfunction]
fn hs_norm(f: &PyField, s: f64) -> f64 {
    diagnostics::hs_norm(&f.inner, s)
}

/// Modified energy (quadratic, quartic, total) with the split-low quartic
/// evaluation.
#[pyfunction]
fn modified_energy(f: &PyField, s: f64, n: f64) -> PyResult<(f64, f64, f64)> {
    let spec = MultiplierSpec::new(s, n).map_err(err)?;
    let b = diagnostics::modified_energy(&f.inner, &spec, QuarticMode::SplitLow, None)
        .map_err(err)?;
    Ok((b.quadratic, b.quartic, b.total))
}

#[pyfunction]
fn linear_propagate(f: &PyField, t: f64) -> PyField {
    PyField {
        inner: dynamics::linear_propagate(&f.inner, t),
    }
}

#[pyfunction]
#[pyo3(signature = (f, dt, dealias = true))]
fn strang_step(f: &PyField, dt: f64, dealias: bool) -> PyResult<PyField> {
    let config = SolverConfig {
        dt,
        dealias,
        ..SolverConfig::default()
    };
    Ok(PyField {
        inner: dynamics::strang_step(&f.inner, dt, &config).map_err(err)?,
    })
}

/// Integrate to t_end and return diagnostic rows
/// (t, mass, energy, hs_norm) sampled every `diag_every` steps.
#[pyfunction]
#[pyo3(signature = (f, dt, t_end, s = 1.0, diag_every = 1, linear_only = false))]
fn simulate(
    f: &PyField,
    dt: f64,
    t_end: f64,
    s: f64,
    diag_every: usize,
    linear_only: bool,
) -> PyResult<Vec<(f64, f64, f64, f64)>> {
    let config = SolverConfig {
        dt,
        t_end,
        linear_only,
        ..SolverConfig::default()
    };
    let sim = dynamics::simulate(&f.inner, &config, s, usize::MAX, diag_every, |_, _| None)
        .map_err(err)?;
    if let Some((t, message)) = sim.abort {
        return Err(PyRuntimeError::new_err(format!(
            "run aborted at t = {t}: {message}"
        )));
    }
    Ok(sim
        .diagnostics
        .iter()
        .map(|d| (d.t, d.mass, d.energy, d.hs_norm))
        .collect())
}

#[pymodule]
fn nlscyl_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyField>()?;
    m.add_function(wrap_pyfunction!(m_eval, m)?)?;
    m.add_function(wrap_pyfunction!(theta0, m)?)?;
    m.add_function(wrap_pyfunction!(lambda4, m)?)?;
    m.add_function(wrap_pyfunction!(lambda4_tilde, m)?)?;
    m.add_function(wrap_pyfunction!(lambda6, m)?)?;
    m.add_function(wrap_pyfunction!(mass, m)?)?;
    m.add_function(wrap_pyfunction!(energy, m)?)?;
    m.add_function(wrap_pyfunction!(hs_norm, m)?)?;
    m.add_function(wrap_pyfunction!(modified_energy, m)?)?;
    m.add_function(wrap_pyfunction!(linear_propagate, m)?)?;
    m.add_function(wrap_pyfunction!(strang_step, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
