//! Python bindings. Every rate is an angular frequency in ps⁻¹; use
//! `omega0()` to convert from units of Ω₀.

use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

use slowlight_core::bath;
use slowlight_core::dressed;
use slowlight_core::response::{self, ChiForm, DotOpticalParams};
use slowlight_core::scenario::{self, Format, ScenarioConfig};
use slowlight_core::{units, Error};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Config { .. } | Error::Io(_) | Error::Domain(_) | Error::Shape(_) => PyValueError::new_err(e.to_string()),
        Error::AtGridPoint { .. } if e.is_config() => PyValueError::new_err(e.to_string()),
        _ => PyArithmeticError::new_err(e.to_string()),
    }
}

fn chi_form(name: &str) -> PyResult<ChiForm> {
    match name {
        "consistent" => Ok(ChiForm::Consistent),
        "as_printed" => Ok(ChiForm::AsPrinted),
        other => Err(PyValueError::new_err(format!(
            "unknown form `{other}` (consistent or as_printed)"
        ))),
    }
}

/// One dephasing reservoir.
#[pyclass(name = "BathSpec", module = "slowlight", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyBathSpec(bath::BathSpec);

#[pymethods]
impl PyBathSpec {
    /// Acoustic phonons with the standard GaAs coupling, at `temperature` K.
    #[staticmethod]
    fn acoustic_phonons(temperature: f64) -> PyResult<Self> {
        bath::BathSpec::acoustic_phonons(temperature).map(Self).map_err(to_py)
    }

    /// `J(w) = alpha w³ exp(-w²/2cutoff²)`; alpha in ps², cutoff in ps⁻¹.
    #[staticmethod]
    fn super_ohmic(alpha: f64, cutoff: f64, temperature: f64) -> PyResult<Self> {
        bath::BathSpec::super_ohmic(alpha, cutoff, temperature).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn flat(level: f64) -> PyResult<Self> {
        bath::BathSpec::flat(level).map(Self).map_err(to_py)
    }

    #[getter]
    fn temperature(&self) -> f64 {
        self.0.temperature
    }

    fn spectral_density(&self, w: f64) -> PyResult<f64> {
        bath::spectral_density(w, &self.0).map_err(to_py)
    }

    fn effective_spectrum(&self, w: f64) -> f64 {
        bath::effective_spectrum(w, &self.0)
    }

    /// Bath correlation function at lag `u` (ps).
    fn correlation(&self, u: f64) -> PyResult<Complex64> {
        bath::correlation_function(u, &self.0).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.0)
    }
}

/// The reservoirs of levels 2 and 3 and their cross-correlation.
#[pyclass(name = "Reservoirs", module = "slowlight", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyReservoirs(bath::Reservoirs);

#[pymethods]
impl PyReservoirs {
    #[new]
    #[pyo3(signature = (r2, r3, kappa_23 = 0.0))]
    fn new(r2: &PyBathSpec, r3: &PyBathSpec, kappa_23: f64) -> PyResult<Self> {
        bath::Reservoirs::new(r2.0.clone(), r3.0.clone(), kappa_23).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn identical(spec: &PyBathSpec, kappa_23: f64) -> PyResult<Self> {
        bath::Reservoirs::identical(spec.0.clone(), kappa_23).map(Self).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.0)
    }
}

/// Pump and signal fields.
#[pyclass(name = "DriveConfig", module = "slowlight", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyDriveConfig(dressed::DriveConfig);

#[pymethods]
impl PyDriveConfig {
    #[new]
    #[pyo3(signature = (omega_p, delta_p = 0.0, omega_s = None, delta_s = 0.0))]
    fn new(omega_p: f64, delta_p: f64, omega_s: Option<f64>, delta_s: f64) -> PyResult<Self> {
        let omega_s = omega_s.unwrap_or(1e-3 * units::omega0());
        dressed::DriveConfig::new(omega_p, delta_p, omega_s, delta_s).map(Self).map_err(to_py)
    }

    #[getter]
    fn omega_p(&self) -> f64 {
        self.0.omega_p
    }

    #[getter]
    fn delta_p(&self) -> f64 {
        self.0.delta_p
    }

    #[getter]
    fn omega_s(&self) -> f64 {
        self.0.omega_s
    }

    #[getter]
    fn delta_s(&self) -> f64 {
        self.0.delta_s
    }

    fn rabi(&self) -> f64 {
        self.0.rabi()
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.0)
    }
}

/// Dephasing rates and couplings at one operating point.
#[pyclass(name = "RateSet", module = "slowlight", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyRateSet(dressed::RateSet);

#[pymethods]
impl PyRateSet {
    #[staticmethod]
    fn markovian(gamma2: f64, gamma3: f64, nu2: f64, nu3: f64, drive: &PyDriveConfig) -> Self {
        Self(dressed::RateSet::markovian(gamma2, gamma3, nu2, nu3, &drive.0))
    }

    #[getter]
    fn gamma2(&self) -> Complex64 {
        self.0.gamma2
    }

    #[getter]
    fn gamma3(&self) -> Complex64 {
        self.0.gamma3
    }

    #[getter]
    fn nu2(&self) -> Complex64 {
        self.0.nu2
    }

    #[getter]
    fn nu3(&self) -> Complex64 {
        self.0.nu3
    }

    /// Modified signal detuning.
    #[getter]
    fn delta_s(&self) -> f64 {
        self.0.delta_s
    }

    /// Modified pump detuning.
    #[getter]
    fn delta_p(&self) -> f64 {
        self.0.delta_p
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.0)
    }
}

/// Second-order expansion coefficients of the rates in the pump.
#[pyclass(name = "WeakNmCoefficients", module = "slowlight", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyWeakNm(dressed::WeakNmCoefficients);

#[pymethods]
impl PyWeakNm {
    #[new]
    #[pyo3(signature = (gamma0_2, gamma0_3, f2, f3, g2 = 0.0, g3 = 0.0))]
    fn new(gamma0_2: f64, gamma0_3: f64, f2: f64, f3: f64, g2: f64, g3: f64) -> Self {
        Self(dressed::WeakNmCoefficients::real(gamma0_2, gamma0_3, f2, f3, g2, g3))
    }

    #[getter]
    fn gamma0_2(&self) -> Complex64 {
        self.0.gamma0_2
    }

    #[getter]
    fn gamma0_3(&self) -> Complex64 {
        self.0.gamma0_3
    }

    #[getter]
    fn f2(&self) -> Complex64 {
        self.0.f2
    }

    #[getter]
    fn f3(&self) -> Complex64 {
        self.0.f3
    }

    #[getter]
    fn g2(&self) -> Complex64 {
        self.0.g2
    }

    #[getter]
    fn g3(&self) -> Complex64 {
        self.0.g3
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.0)
    }
}

/// Ω₀ in ps⁻¹.
#[pyfunction]
fn omega0() -> f64 {
    units::omega0()
}

#[pyfunction]
fn rates_asymptotic(drive: &PyDriveConfig, reservoirs: &PyReservoirs) -> PyResult<PyRateSet> {
    dressed::rates_asymptotic(&drive.0, &reservoirs.0).map(PyRateSet).map_err(to_py)
}

/// Rates at time `t` (ps) after the pump is switched on.
#[pyfunction]
fn rates_time_dependent(t: f64, drive: &PyDriveConfig, reservoirs: &PyReservoirs) -> PyResult<PyRateSet> {
    dressed::rates_time_dependent(t, &drive.0, &reservoirs.0).map(PyRateSet).map_err(to_py)
}

#[pyfunction]
fn weak_nm_coefficients(reservoirs: &PyReservoirs) -> PyResult<PyWeakNm> {
    dressed::weak_nm_coefficients(&reservoirs.0).map(PyWeakNm).map_err(to_py)
}

#[pyfunction]
fn rates_phenomenological(drive: &PyDriveConfig, coefficients: &PyWeakNm) -> PyRateSet {
    PyRateSet(dressed::rates_phenomenological(&drive.0, &coefficients.0))
}

/// Stationary `(rho12, rho13)` of the weak-signal coherence equations.
#[pyfunction]
#[pyo3(signature = (rates, drive, inversion = 1.0))]
fn stationary_coherences(rates: &PyRateSet, drive: &PyDriveConfig, inversion: f64) -> PyResult<(Complex64, Complex64)> {
    response::stationary_coherences(&rates.0, &drive.0, inversion).map_err(to_py)
}

/// Susceptibility at modified signal detuning `delta_s` with the default dot
/// parameters. `form` is "consistent" or "as_printed".
#[pyfunction]
#[pyo3(signature = (delta_s, rates, drive, form = "consistent"))]
fn susceptibility(delta_s: f64, rates: &PyRateSet, drive: &PyDriveConfig, form: &str) -> PyResult<Complex64> {
    let optical = DotOpticalParams::default();
    response::evaluate_chi(delta_s, &rates.0, &drive.0, &optical, chi_form(form)?)
        .map(|p| p.chi())
        .map_err(to_py)
}

#[pyfunction]
fn refractive_index(chi: Complex64) -> Complex64 {
    response::refractive_index(chi)
}

/// Group slow-down factor at `delta_s`, holding the rates fixed.
#[pyfunction]
#[pyo3(signature = (delta_s, rates, drive, form = "consistent"))]
fn slow_down_factor(delta_s: f64, rates: &PyRateSet, drive: &PyDriveConfig, form: &str) -> PyResult<f64> {
    let rates = rates.0;
    response::slow_down_factor(
        delta_s,
        |d| Ok(dressed::RateSet { delta_s: d, ..rates }),
        &drive.0,
        &DotOpticalParams::default(),
        chi_form(form)?,
        response::default_slowdown_step(),
    )
    .map_err(to_py)
}

#[pyfunction]
fn preset_names() -> Vec<&'static str> {
    scenario::PRESET_NAMES.to_vec()
}

/// TOML scenario of a named preset.
#[pyfunction]
fn preset_config(name: &str) -> PyResult<String> {
    scenario::preset(name).map(|c| c.to_toml_string()).map_err(to_py)
}

fn render(config: &ScenarioConfig, format: &str) -> PyResult<String> {
    let format: Format = format.parse().map_err(to_py)?;
    let result = scenario::run_sweep(config).map_err(to_py)?;
    let mut buf = Vec::new();
    match format {
        Format::Csv => scenario::write_csv(&result, &mut buf),
        Format::Json => scenario::write_json(&result, &mut buf),
    }
    .map_err(to_py)?;
    Ok(String::from_utf8(buf).expect("emitters write UTF-8"))
}

/// Run a TOML scenario with optional `key=value` overrides; returns the table
/// as CSV or JSON text.
#[pyfunction]
#[pyo3(signature = (toml, overrides = Vec::new(), format = "csv"))]
fn run_scenario(py: Python<'_>, toml: &str, overrides: Vec<String>, format: &str) -> PyResult<String> {
    let config = ScenarioConfig::from_toml_str(toml, &overrides).map_err(to_py)?;
    py.detach(|| render(&config, format))
}

#[pyfunction]
#[pyo3(signature = (name, format = "csv"))]
fn run_preset(py: Python<'_>, name: &str, format: &str) -> PyResult<String> {
    let config = scenario::preset(name).map_err(to_py)?;
    py.detach(|| render(&config, format))
}

#[pymodule]
fn slowlight(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBathSpec>()?;
    m.add_class::<PyReservoirs>()?;
    m.add_class::<PyDriveConfig>()?;
    m.add_class::<PyRateSet>()?;
    m.add_class::<PyWeakNm>()?;
    m.add_function(wrap_pyfunction!(omega0, m)?)?;
    m.add_function(wrap_pyfunction!(rates_asymptotic, m)?)?;
    m.add_function(wrap_pyfunction!(rates_time_dependent, m)?)?;
    m.add_function(wrap_pyfunction!(weak_nm_coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(rates_phenomenological, m)?)?;
    m.add_function(wrap_pyfunction!(stationary_coherences, m)?)?;
    m.add_function(wrap_pyfunction!(susceptibility, m)?)?;
    m.add_function(wrap_pyfunction!(refractive_index, m)?)?;
    m.add_function(wrap_pyfunction!(slow_down_factor, m)?)?;
    m.add_function(wrap_pyfunction!(preset_names, m)?)?;
    m.add_function(wrap_pyfunction!(preset_config, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(run_preset, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
