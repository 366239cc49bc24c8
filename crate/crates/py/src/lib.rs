//! Python bindings for the gaplab spectral-gap laboratory.
//!
//! Exposes domain and potential constructors, the eigensolver, the gap
//! bound formulas, and the full JSON-config pipeline. Build with
//! `cargo build -p gaplab-py --release`; the cdylib in `target/release`
//! imports as the `gaplab_py` module (see python/smoke_test.py).

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use gaplab::eigen::smallest_two;
use gaplab::gap::{theta as theta_impl, thm1_objective, thm32_bound};
use gaplab::geometry::{build_grid, metrics, DomainSpec};
use gaplab::operator::{assemble, BoundaryCondition};
use gaplab::potential::{sample, PotentialSpec};
use gaplab::report::{run, RunConfig};

fn to_py_err(e: gaplab::Error) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn parse_bc(bc: &str) -> PyResult<BoundaryCondition> {
    match bc {
        "dirichlet" => Ok(BoundaryCondition::Dirichlet),
        "neumann" => Ok(BoundaryCondition::Neumann),
        other => Err(PyValueError::new_err(format!(
            "bc must be 'dirichlet' or 'neumann', got '{other}'"
        ))),
    }
}

/// A convex domain with its lattice resolution.
#[pyclass(name = "Domain")]
#[derive(Clone)]
struct PyDomain {
    spec: DomainSpec,
}

#[pymethods]
impl PyDomain {
    #[staticmethod]
    fn interval(a: f64, b: f64, resolution: usize) -> PyDomain {
        PyDomain { spec: DomainSpec::Interval { bounds: [a, b], resolution } }
    }

    #[staticmethod]
    fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64, nx: usize, ny: usize) -> PyDomain {
        PyDomain {
            spec: DomainSpec::Rectangle { extents: [[x0, x1], [y0, y1]], resolution: [nx, ny] },
        }
    }

    #[staticmethod]
    fn disk(radius: f64, radial: usize, angular: usize) -> PyDomain {
        PyDomain { spec: DomainSpec::Disk { radius, resolution: [radial, angular] } }
    }

    /// Exact diameter of the continuous shape.
    fn diameter(&self) -> PyResult<f64> {
        let grid = build_grid(&self.spec).map_err(to_py_err)?;
        Ok(metrics(&grid).diameter)
    }

    fn __repr__(&self) -> String {
        format!("Domain({})", self.spec.label())
    }
}

/// A potential family with its parameters.
#[pyclass(name = "Potential")]
#[derive(Clone)]
struct PyPotential {
    spec: PotentialSpec,
}

#[pymethods]
impl PyPotential {
    #[staticmethod]
    fn zero() -> PyPotential {
        PyPotential { spec: PotentialSpec::Zero }
    }

    #[staticmethod]
    fn harmonic(c: f64) -> PyPotential {
        PyPotential { spec: PotentialSpec::Harmonic { c } }
    }

    #[staticmethod]
    fn shifted_harmonic(c: f64, center: Vec<f64>) -> PyPotential {
        PyPotential { spec: PotentialSpec::ShiftedHarmonic { c, center } }
    }

    #[staticmethod]
    fn double_well(a4: f64, a2: f64) -> PyPotential {
        PyPotential { spec: PotentialSpec::DoubleWell { a4, a2 } }
    }

    #[staticmethod]
    fn tilted(slope: Vec<f64>) -> PyPotential {
        PyPotential { spec: PotentialSpec::Tilted { slope } }
    }

    #[staticmethod]
    fn random_smooth(seed: u64, amplitude: f64, wavenumber: u32) -> PyPotential {
        PyPotential { spec: PotentialSpec::RandomSmooth { seed, amplitude, wavenumber } }
    }

    fn __repr__(&self) -> String {
        format!("Potential({})", self.spec.label())
    }
}

/// The two lowest eigenpairs of a solved operator.
#[pyclass(name = "Spectrum")]
struct PySpectrum {
    #[pyo3(get)]
    lambda1: f64,
    #[pyo3(get)]
    lambda2: f64,
    #[pyo3(get)]
    gap: f64,
    #[pyo3(get)]
    residual1: f64,
    #[pyo3(get)]
    residual2: f64,
    #[pyo3(get)]
    iterations: usize,
    #[pyo3(get)]
    near_degenerate: bool,
    /// Node-space eigenvector values per degree of freedom.
    #[pyo3(get)]
    u1: Vec<f64>,
    #[pyo3(get)]
    u2: Vec<f64>,
    /// Coordinates of the degrees of freedom, matching u1/u2.
    #[pyo3(get)]
    coords: Vec<(f64, f64)>,
}

#[pymethods]
impl PySpectrum {
    fn __repr__(&self) -> String {
        format!(
            "Spectrum(lambda1={}, lambda2={}, gap={})",
            self.lambda1, self.lambda2, self.gap
        )
    }
}

/// Solve -Δ + V for the two lowest eigenpairs.
#[pyfunction]
#[pyo3(signature = (domain, potential, bc, tol=1e-10, max_iter=10_000, seed=24029))]
fn solve(
    domain: PyDomain,
    potential: PyPotential,
    bc: &str,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> PyResult<PySpectrum> {
    let bc = parse_bc(bc)?;
    let grid = build_grid(&domain.spec).map_err(to_py_err)?;
    let field = sample(&potential.spec, &grid).map_err(to_py_err)?;
    let op = assemble(&grid, &field, bc).map_err(to_py_err)?;
    let s = smallest_two(&op, tol, max_iter, seed).map_err(to_py_err)?;
    let coords = s
        .dof_to_node
        .iter()
        .map(|&id| {
            let [x, y] = grid.coord(id);
            (x, y)
        })
        .collect();
    Ok(PySpectrum {
        lambda1: s.lambda1,
        lambda2: s.lambda2,
        gap: s.gap(),
        residual1: s.residual1,
        residual2: s.residual2,
        iterations: s.iterations,
        near_degenerate: s.near_degenerate,
        u1: s.u1,
        u2: s.u2,
        coords,
    })
}

/// Run the full pipeline on a JSON config and return the report as JSON.
#[pyfunction]
fn run_report(config_json: &str) -> PyResult<String> {
    let cfg = RunConfig::from_json(config_json).map_err(to_py_err)?;
    let report = run(&cfg).map_err(to_py_err)?;
    serde_json::to_string_pretty(&report).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// theta(beta) = arcsin 1/sqrt(1 + beta/(sqrt(2) - beta)).
#[pyfunction]
fn theta(beta: f64) -> PyResult<f64> {
    theta_impl(beta).map_err(to_py_err)
}

/// The universal gap bound sqrt(2c) for c > 0.
#[pyfunction]
fn universal_bound(c: f64) -> PyResult<f64> {
    if c <= 0.0 {
        return Err(PyValueError::new_err("universal bound needs c > 0"));
    }
    Ok((2.0 * c).sqrt())
}

/// The theta/diameter bound objective theta(beta)^2/d^2 + beta sqrt(c).
#[pyfunction]
fn theta_bound(beta: f64, diameter: f64, c: f64) -> PyResult<f64> {
    theta_impl(beta).map_err(to_py_err)?;
    Ok(thm1_objective(beta, diameter, c))
}

/// The barrier gap bound 2 d^-2 exp(-a d^2).
#[pyfunction]
fn barrier_bound(a: f64, diameter: f64) -> f64 {
    thm32_bound(a, diameter)
}

#[pymodule]
fn gaplab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDomain>()?;
    m.add_class::<PyPotential>()?;
    m.add_class::<PySpectrum>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(run_report, m)?)?;
    m.add_function(wrap_pyfunction!(theta, m)?)?;
    m.add_function(wrap_pyfunction!(universal_bound, m)?)?;
    m.add_function(wrap_pyfunction!(theta_bound, m)?)?;
    m.add_function(wrap_pyfunction!(barrier_bound, m)?)?;
    Ok(())
}
