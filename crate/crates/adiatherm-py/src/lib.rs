//! Python bindings for the core engine: system parameters, drive schedules,
//! motional distributions, the Dicke response matrix, and the metrology
//! helpers built on top of them.
//!
//! Frequencies cross the boundary in the same display units the command-line
//! tool uses (MHz for trap modes, kHz for drive parameters, μs for times);
//! everything is converted to angular rad/s internally.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use std::f64::consts::TAU;

use adiatherm::dynamics;
use adiatherm::metrology;
use adiatherm::motion;
use adiatherm::protocol;
use adiatherm::{JcModel, Spin};

fn err(e: adiatherm::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn khz(v: f64) -> f64 {
    TAU * v * 1e3
}

fn mhz(v: f64) -> f64 {
    TAU * v * 1e6
}

/// Ion chain and coupling-model parameters.
#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PhysicalParams {
    inner: adiatherm::PhysicalParams,
}

#[pymethods]
impl PhysicalParams {
    #[new]
    #[pyo3(signature = (num_ions, mode_freq_mhz, lamb_dicke = 0.0, axial_freq_mhz = None, model = "linear"))]
    fn new(
        num_ions: u32,
        mode_freq_mhz: f64,
        lamb_dicke: f64,
        axial_freq_mhz: Option<f64>,
        model: &str,
    ) -> PyResult<Self> {
        let model = match model {
            "linear" => JcModel::LinearJC,
            "nonlinear" => JcModel::NonlinearJC,
            other => {
                return Err(PyValueError::new_err(format!(
                    "model must be \"linear\" or \"nonlinear\", got {other:?}"
                )))
            }
        };
        let mut inner = adiatherm::PhysicalParams::new(num_ions, lamb_dicke, mhz(mode_freq_mhz), model)
            .map_err(err)?;
        if let Some(axial) = axial_freq_mhz {
            inner = inner.with_axial_freq(mhz(axial)).map_err(err)?;
        }
        Ok(PhysicalParams { inner })
    }

    #[getter]
    fn num_ions(&self) -> u32 {
        self.inner.num_ions
    }

    #[getter]
    fn lamb_dicke(&self) -> f64 {
        self.inner.lamb_dicke
    }

    #[getter]
    fn model(&self) -> &'static str {
        match self.inner.model {
            JcModel::LinearJC => "linear",
            JcModel::NonlinearJC => "nonlinear",
        }
    }

    /// Number of Dicke levels, 2S + 1.
    #[getter]
    fn num_levels(&self) -> usize {
        self.inner.spin().num_levels()
    }
}

/// Δ(t) = Δ₀ sin(γt/2), λ(t) = λ₀ cos²(γt/2) over t ∈ [−π/γ, π/γ].
#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct Schedule {
    inner: dynamics::Schedule,
}

#[pymethods]
impl Schedule {
    #[new]
    fn new(lambda0_khz: f64, delta0_khz: f64, gamma_khz: f64) -> PyResult<Self> {
        Ok(Schedule {
            inner: dynamics::Schedule::new(khz(delta0_khz), khz(lambda0_khz), khz(gamma_khz))
                .map_err(err)?,
        })
    }

    #[getter]
    fn t_max_us(&self) -> f64 {
        self.inner.t_max() * 1e6
    }

    /// (Δ, λ)/2π in kHz at time t (μs).
    fn eval(&self, t_us: f64) -> PyResult<(f64, f64)> {
        let (d, l) = self.inner.eval(t_us * 1e-6).map_err(err)?;
        Ok((d / khz(1.0), l / khz(1.0)))
    }
}

/// Truncated Fock-weight list with its residual tail mass.
#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone)]
struct MotionDistribution {
    inner: motion::MotionDistribution,
}

#[pymethods]
impl MotionDistribution {
    #[staticmethod]
    #[pyo3(signature = (nbar, tail_tol = 1e-8))]
    fn thermal(nbar: f64, tail_tol: f64) -> PyResult<Self> {
        Ok(MotionDistribution {
            inner: motion::thermal_weights(nbar, tail_tol).map_err(err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (alpha, tail_tol = 1e-8))]
    fn coherent(alpha: f64, tail_tol: f64) -> PyResult<Self> {
        Ok(MotionDistribution {
            inner: motion::coherent_weights(alpha, tail_tol).map_err(err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (alpha, theta, tail_tol = 1e-8))]
    fn cat(alpha: f64, theta: f64, tail_tol: f64) -> PyResult<Self> {
        Ok(MotionDistribution {
            inner: motion::cat_weights(alpha, theta, tail_tol).map_err(err)?,
        })
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.weights.clone()
    }

    #[getter]
    fn tail_mass(&self) -> f64 {
        self.inner.tail_mass
    }

    #[getter]
    fn n_max(&self) -> usize {
        self.inner.n_max()
    }

    /// Same distribution with the cutoff raised to at least `min_n_max`.
    fn extended(&self, min_n_max: usize) -> PyResult<Self> {
        Ok(MotionDistribution {
            inner: self.inner.extended(min_n_max).map_err(err)?,
        })
    }
}

/// Transfer-probability matrix R[l][n] for the full sweep.
#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone)]
struct DickeResponse {
    inner: dynamics::DickeResponse,
}

#[pymethods]
impl DickeResponse {
    #[getter]
    fn n_max(&self) -> usize {
        self.inner.n_max()
    }

    #[getter]
    fn num_levels(&self) -> usize {
        self.inner.num_levels()
    }

    fn entry(&self, l: usize, n: usize) -> f64 {
        self.inner.entry(l, n)
    }

    fn column(&self, n: usize) -> Vec<f64> {
        self.inner.column(n).to_vec()
    }

    fn column_sums(&self) -> Vec<f64> {
        self.inner.column_sums()
    }
}

fn spin_of(num_ions: u32) -> PyResult<Spin> {
    Spin::from_ion_count(num_ions).map_err(err)
}

/// Build the response matrix by evolving every sector up to n_max.
#[pyfunction]
#[pyo3(signature = (params, schedule, n_max, steps = None))]
fn dicke_response(
    params: &PhysicalParams,
    schedule: &Schedule,
    n_max: usize,
    steps: Option<usize>,
) -> PyResult<DickeResponse> {
    Ok(DickeResponse {
        inner: dynamics::dicke_response(&params.inner, &schedule.inner, n_max, steps)
            .map_err(err)?,
    })
}

/// Final Dicke-level populations of sector M started from |D₀⟩|M⟩.
#[pyfunction]
#[pyo3(signature = (params, schedule, m, steps = None))]
fn evolve_sector(
    params: &PhysicalParams,
    schedule: &Schedule,
    m: usize,
    steps: Option<usize>,
) -> PyResult<Vec<f64>> {
    Ok(dynamics::evolve_sector(&params.inner, &schedule.inner, m, steps)
        .map_err(err)?
        .populations())
}

/// Instantaneous eigenvalues (kHz, ascending) of sector M on a μs time grid.
#[pyfunction]
fn instantaneous_spectrum(
    params: &PhysicalParams,
    schedule: &Schedule,
    m: usize,
    t_us: Vec<f64>,
) -> PyResult<Vec<Vec<f64>>> {
    let grid: Vec<f64> = t_us.iter().map(|t| t * 1e-6).collect();
    let spec = dynamics::instantaneous_spectrum(&params.inner, &schedule.inner, m, &grid)
        .map_err(err)?;
    Ok(spec
        .into_iter()
        .map(|evs| evs.into_iter().map(|e| e / khz(1.0)).collect())
        .collect())
}

/// Dicke-level populations of a motional mixture pushed through the response.
#[pyfunction]
fn final_dicke_populations(
    response: &DickeResponse,
    dist: &MotionDistribution,
) -> PyResult<Vec<f64>> {
    metrology::final_dicke_populations(&response.inner, &dist.inner).map_err(err)
}

/// Mixed-state fidelity between the achieved and ideal final states.
#[pyfunction]
fn transfer_fidelity(response: &DickeResponse, dist: &MotionDistribution) -> PyResult<f64> {
    metrology::transfer_fidelity(&response.inner, &dist.inner).map_err(err)
}

/// ⟨Ŝz⟩ of a Dicke-level distribution for an N-ion chain.
#[pyfunction]
fn expected_sz(num_ions: u32, populations: Vec<f64>) -> PyResult<f64> {
    metrology::expected_sz(spin_of(num_ions)?, &populations).map_err(err)
}

/// Var(Ŝz) of a Dicke-level distribution for an N-ion chain.
#[pyfunction]
fn variance_sz(num_ions: u32, populations: Vec<f64>) -> PyResult<f64> {
    metrology::variance_sz(spin_of(num_ions)?, &populations).map_err(err)
}

/// (mean, variance) of Ŝz under the ideal saturating transfer.
#[pyfunction]
fn perfect_transfer_moments(num_ions: u32, dist: &MotionDistribution) -> PyResult<(f64, f64)> {
    metrology::perfect_transfer_moments(spin_of(num_ions)?, &dist.inner).map_err(err)
}

/// T²F_C of the Dicke-level measurement for a thermal input at occupation n̄.
#[pyfunction]
fn thermal_cfi(response: &DickeResponse, dist: &MotionDistribution, nbar: f64) -> PyResult<f64> {
    if !(nbar > 0.0) {
        return Err(PyValueError::new_err(format!(
            "nbar must be > 0, got {nbar}"
        )));
    }
    let x = (1.0 + 1.0 / nbar).ln();
    metrology::thermal_cfi_dimensionless(&response.inner, &dist.inner, x).map_err(err)
}

/// T²F_Q of a thermal oscillator at occupation n̄ (the quantum bound).
#[pyfunction]
fn qfi_thermal(nbar: f64) -> PyResult<f64> {
    if !(nbar > 0.0) {
        return Err(PyValueError::new_err(format!(
            "nbar must be > 0, got {nbar}"
        )));
    }
    let x = (1.0 + 1.0 / nbar).ln();
    metrology::qfi_thermal_dimensionless(x).map_err(err)
}

/// Check the drive addresses a single mode; returns
/// (gap_khz, pass, used_scaling_formula).
#[pyfunction]
#[pyo3(signature = (num_ions, mode_freq_mhz, lambda0_khz, delta0_khz, axial_freq_mhz = None, threshold = protocol::ADDRESSABILITY_FACTOR))]
fn validate_addressability(
    num_ions: u32,
    mode_freq_mhz: f64,
    lambda0_khz: f64,
    delta0_khz: f64,
    axial_freq_mhz: Option<f64>,
    threshold: f64,
) -> PyResult<(f64, bool, bool)> {
    let report = protocol::validate_addressability(
        num_ions,
        mhz(mode_freq_mhz),
        axial_freq_mhz.map(mhz),
        khz(lambda0_khz),
        khz(delta0_khz),
        threshold,
    )
    .map_err(err)?;
    Ok((report.gap / khz(1.0), report.pass, report.used_scaling_formula))
}

#[pymodule]
fn adiatherm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PhysicalParams>()?;
    m.add_class::<Schedule>()?;
    m.add_class::<MotionDistribution>()?;
    m.add_class::<DickeResponse>()?;
    m.add_function(wrap_pyfunction!(dicke_response, m)?)?;
    m.add_function(wrap_pyfunction!(evolve_sector, m)?)?;
    m.add_function(wrap_pyfunction!(instantaneous_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(final_dicke_populations, m)?)?;
    m.add_function(wrap_pyfunction!(transfer_fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(expected_sz, m)?)?;
    m.add_function(wrap_pyfunction!(variance_sz, m)?)?;
    m.add_function(wrap_pyfunction!(perfect_transfer_moments, m)?)?;
    m.add_function(wrap_pyfunction!(thermal_cfi, m)?)?;
    m.add_function(wrap_pyfunction!(qfi_thermal, m)?)?;
    m.add_function(wrap_pyfunction!(validate_addressability, m)?)?;
    Ok(())
}
