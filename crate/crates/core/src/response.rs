//! Stationary coherences, linear susceptibility, refractive index, group
//! slow-down factor and transmission-window metrics.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dressed::{DriveConfig, RateSet};
use crate::error::{Error, Result};
use crate::units::{omega0, optical_rate, ELEMENTARY_CHARGE, HBAR_SI, VACUUM_PERMITTIVITY};

/// Optical constants of the dot and its host.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DotOpticalParams {
    /// Background dielectric constant.
    pub eps_bac: f64,
    /// Transition dipole |μ₁₂|/e in nm.
    pub mu12_nm: f64,
    /// Optical confinement factor.
    pub gamma_conf: f64,
    /// Dot volume in nm³.
    pub theta_nm3: f64,
    /// Signal wavelength in μm.
    pub lambda_s_um: f64,
    /// Population inversion ρ₁₁ − ρ₂₂.
    pub inversion: f64,
}

impl Default for DotOpticalParams {
    /// Cylindrical strained GaAs–InGaAs–InAs dot at 1.36 μm.
    fn default() -> Self {
        DotOpticalParams {
            eps_bac: 13.0,
            mu12_nm: 2.1,
            gamma_conf: 0.006,
            theta_nm3: 890.64,
            lambda_s_um: 1.36,
            inversion: 1.0,
        }
    }
}

impl DotOpticalParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: String| Err(Error::config(format!("optical.{field}"), msg));
        if !(self.eps_bac >= 1.0) || !self.eps_bac.is_finite() {
            return bad("eps_bac", format!("must be finite and >= 1, got {}", self.eps_bac));
        }
        if !(self.gamma_conf > 0.0 && self.gamma_conf <= 1.0) {
            return bad("gamma_conf", format!("must lie in (0, 1], got {}", self.gamma_conf));
        }
        if !(self.theta_nm3 > 0.0) || !self.theta_nm3.is_finite() {
            return bad("theta_nm3", format!("must be > 0, got {}", self.theta_nm3));
        }
        if !(self.inversion >= 0.0 && self.inversion <= 1.0) {
            return bad("inversion", format!("must lie in [0, 1], got {}", self.inversion));
        }
        if !(self.lambda_s_um > 0.0) || !self.lambda_s_um.is_finite() {
            return bad("lambda_s_um", format!("must be > 0, got {}", self.lambda_s_um));
        }
        if !self.mu12_nm.is_finite() {
            return bad("mu12_nm", format!("must be finite, got {}", self.mu12_nm));
        }
        Ok(())
    }

    /// `Φ/ħ = Γ|μ₁₂|²(ρ₁₁−ρ₂₂)/(ε₀Θħ)` in s⁻¹.
    pub fn phi_over_hbar(&self) -> f64 {
        let mu = self.mu12_nm * 1e-9 * ELEMENTARY_CHARGE;
        let theta = self.theta_nm3 * 1e-27;
        self.gamma_conf * mu * mu * self.inversion / (VACUUM_PERMITTIVITY * theta * HBAR_SI)
    }

    /// Dimensionless coupling `A = Φ/(ħΩ₀)`.
    pub fn prefactor(&self) -> f64 {
        self.phi_over_hbar() / (omega0() * 1e12)
    }

    /// Signal angular frequency `ω_s = 2πc/λ_s` in ps⁻¹.
    pub fn signal_frequency(&self) -> f64 {
        optical_rate(self.lambda_s_um)
    }

    /// Same constants with the coupling switched off.
    pub fn uncoupled(mut self) -> Self {
        self.mu12_nm = 0.0;
        self
    }
}

/// Which closed form to use for the absorptive part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChiForm {
    /// Exact linear response of the coherence equations: the absorptive
    /// numerator carries `+(δ_s+δ_p)Ω_p(ν₂+ν₃)/2`.
    #[default]
    Consistent,
    /// The closed form without that term.
    AsPrinted,
}

/// Response at one signal detuning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SusceptibilityPoint {
    /// Modified signal detuning (ps⁻¹).
    pub delta_s: f64,
    pub chi_re: f64,
    pub chi_im: f64,
    pub n: Complex64,
    pub slowdown: Option<f64>,
}

impl SusceptibilityPoint {
    pub fn chi(&self) -> Complex64 {
        Complex64::new(self.chi_re, self.chi_im)
    }

    fn new(delta_s: f64, chi: Complex64) -> Self {
        SusceptibilityPoint {
            delta_s,
            chi_re: chi.re,
            chi_im: chi.im,
            n: refractive_index(chi),
            slowdown: None,
        }
    }
}

/// Stationary `(ρ₁₂, ρ₁₃)` of the weak-signal coherence equations at the
/// detunings carried by `rates`, with `ρ₂₂ − ρ₁₁ = −inversion`.
pub fn stationary_coherences(rates: &RateSet, drive: &DriveConfig, inversion: f64) -> Result<(Complex64, Complex64)> {
    let i = Complex64::i();
    let (ds, dp) = (rates.delta_s, rates.delta_p);
    let d2 = Complex64::new(rates.gamma2.re, -ds);
    let d3 = Complex64::new(rates.gamma3.re, -(ds + dp));
    let p2 = rates.nu2 - i * (0.5 * drive.omega_p);
    let p3 = rates.nu3 - i * (0.5 * drive.omega_p);
    let det = d2 * d3 - p2 * p3;
    let scale = (d2.norm() * d3.norm()).max((p2 * p3).norm());
    if !(det.norm() >= 1e-14 * scale) || scale == 0.0 {
        return Err(Error::Singular {
            delta_s: ds,
            delta_p: dp,
        });
    }
    let source = -i * (0.5 * drive.omega_s * inversion);
    let rho12 = source * d3 / det;
    let rho13 = p3 * rho12 / d3;
    Ok((rho12, rho13))
}

/// Closed-form susceptibility at modified signal detuning `delta_s`, with
/// all rates expressed in units of Ω₀. Requires real couplings.
pub fn susceptibility(
    delta_s: f64,
    rates: &RateSet,
    drive: &DriveConfig,
    optical: &DotOpticalParams,
    form: ChiForm,
) -> Result<SusceptibilityPoint> {
    if !rates.has_real_couplings() {
        return Err(Error::Domain(
            "closed-form susceptibility needs real couplings; use susceptibility_oracle".into(),
        ));
    }
    let w0 = omega0();
    let g2 = rates.gamma2.re / w0;
    let g3 = rates.gamma3.re / w0;
    let (n2, n3) = (rates.nu2.re / w0, rates.nu3.re / w0);
    let wp = drive.omega_p / w0;
    let ds = delta_s / w0;
    let dt = ds + rates.delta_p / w0;
    let a = optical.prefactor();

    let x = g3 * g2 + 0.25 * wp * wp - n2 * n3 - dt * ds;
    let y = g2 * dt + g3 * ds + 0.5 * wp * (n2 + n3);
    let xi = x * x + y * y;
    if !(xi > 0.0) {
        return Err(Error::Singular {
            delta_s,
            delta_p: rates.delta_p,
        });
    }
    let chi_re = optical.eps_bac
        + a / xi * g3 * (g3 * ds + 0.5 * wp * (n2 + n3))
        + a / xi * dt * (n2 * n3 - 0.25 * wp * wp + dt * ds);
    let mut chi_im = a / xi * g3 * (g3 * g2 + 0.25 * wp * wp) + a / xi * (g2 * dt * dt - g3 * n2 * n3);
    if form == ChiForm::Consistent {
        chi_im += a / xi * dt * 0.5 * wp * (n2 + n3);
    }
    Ok(SusceptibilityPoint::new(delta_s, Complex64::new(chi_re, chi_im)))
}

/// Susceptibility from the linear solve of the coherence equations; admits
/// complex rates and couplings.
///
/// The signal response at detuning `δ` is carried by the coherence at the
/// mirrored detunings, `χ = ε_bac − 2A·Ω₀·ρ₁₂(−δ_s, −δ_p)/Ω_s` with unit
/// inversion (the inversion is already inside `A`).
pub fn susceptibility_oracle(
    delta_s: f64,
    rates: &RateSet,
    drive: &DriveConfig,
    optical: &DotOpticalParams,
) -> Result<SusceptibilityPoint> {
    let probe = if drive.omega_s != 0.0 { drive.omega_s } else { 1e-3 * omega0() };
    let mirrored = RateSet {
        delta_s: -delta_s,
        delta_p: -rates.delta_p,
        ..*rates
    };
    let d = DriveConfig {
        omega_s: probe,
        ..*drive
    };
    let (rho12, _) = stationary_coherences(&mirrored, &d, 1.0).map_err(|e| match e {
        Error::Singular { .. } => Error::Singular {
            delta_s,
            delta_p: rates.delta_p,
        },
        other => other,
    })?;
    let chi = Complex64::new(optical.eps_bac, 0.0) - rho12 * (2.0 * optical.prefactor() * omega0() / probe);
    Ok(SusceptibilityPoint::new(delta_s, chi))
}

/// Closed form when the couplings are real, linear solve otherwise.
pub fn evaluate_chi(
    delta_s: f64,
    rates: &RateSet,
    drive: &DriveConfig,
    optical: &DotOpticalParams,
    form: ChiForm,
) -> Result<SusceptibilityPoint> {
    if rates.has_real_couplings() {
        susceptibility(delta_s, rates, drive, optical, form)
    } else {
        susceptibility_oracle(delta_s, rates, drive, optical)
    }
}

/// Principal square root, `Re n >= 0`.
pub fn refractive_index(chi: Complex64) -> Complex64 {
    chi.sqrt()
}

/// Group slow-down factor `Υ = Re n + ω_s Re(dn/dω_s)` with
/// `dn/dω_s = −dn/dδ_s`, by Richardson-extrapolated central differences
/// starting at `step` and halving until two estimates agree to 1e-6.
///
/// `rates_at` supplies the rate set at a given modified signal detuning.
pub fn slow_down_factor<F>(
    delta_s: f64,
    rates_at: F,
    drive: &DriveConfig,
    optical: &DotOpticalParams,
    form: ChiForm,
    step: f64,
) -> Result<f64>
where
    F: Fn(f64) -> Result<RateSet>,
{
    if !(step > 0.0) {
        return Err(Error::Domain(format!("derivative step must be > 0, got {step}")));
    }
    let n_at = |d: f64| -> Result<Complex64> { Ok(evaluate_chi(d, &rates_at(d)?, drive, optical, form)?.n) };
    let centre = n_at(delta_s)?;
    let slope = |h: f64| -> Result<Complex64> {
        let diff = |h: f64| -> Result<Complex64> { Ok((n_at(delta_s + h)? - n_at(delta_s - h)?) / (2.0 * h)) };
        Ok((diff(0.5 * h)? * 4.0 - diff(h)?) / 3.0)
    };
    // Converged when successive estimates of Υ agree relative to the size of
    // its two terms; the slope alone can pass through zero.
    let ws = optical.signal_frequency();
    let mut h = step;
    let mut previous = slope(h)?.re;
    for _ in 0..6 {
        h *= 0.5;
        let current = slope(h)?.re;
        let scale = centre.re.abs() + ws * current.abs();
        if ws * (current - previous).abs() <= 1e-6 * scale {
            return Ok(centre.re - ws * current);
        }
        previous = current;
    }
    Err(Error::Stencil(format!(
        "slow-down derivative unstable at delta_s = {delta_s:e} after 6 halvings"
    )))
}

/// Default first step of [`slow_down_factor`].
pub fn default_slowdown_step() -> f64 {
    1e-3 * omega0()
}

/// Transparency window between the two strongest absorption peaks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmissionWindow {
    /// Midpoint of the window (ps⁻¹).
    pub center: f64,
    /// Width of the window (ps⁻¹).
    pub width: f64,
    /// Absorption at the bottom of the window.
    pub depth: f64,
}

/// Locate the absorption minimum between the two largest local maxima of
/// `χ″` and measure the interval around it where `χ″` stays below
/// `min + threshold·(lower peak − min)`.
pub fn transmission_window(spectrum: &[SusceptibilityPoint], threshold: f64) -> Result<TransmissionWindow> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::Domain(format!("threshold must lie in (0, 1], got {threshold}")));
    }
    if spectrum.windows(2).any(|w| !(w[1].delta_s > w[0].delta_s)) {
        return Err(Error::Shape("spectrum must be sampled on an increasing detuning grid".into()));
    }
    let x: Vec<f64> = spectrum.iter().map(|p| p.delta_s).collect();
    let y: Vec<f64> = spectrum.iter().map(|p| p.chi_im).collect();
    let mut peaks: Vec<usize> = (1..y.len().saturating_sub(1))
        .filter(|&i| y[i] > y[i - 1] && y[i] >= y[i + 1])
        .collect();
    if peaks.len() < 2 {
        return Err(Error::Shape(format!(
            "found {} absorption peak(s); a transparency window needs two",
            peaks.len()
        )));
    }
    peaks.sort_by(|a, b| y[*b].total_cmp(&y[*a]));
    let (p, q) = (peaks[0].min(peaks[1]), peaks[0].max(peaks[1]));
    let m = (p..=q).min_by(|a, b| y[*a].total_cmp(&y[*b])).unwrap();
    let floor = y[m];
    let level = floor + threshold * (y[p].min(y[q]) - floor);
    let crossing = |i: usize, j: usize| x[i] + (level - y[i]) * (x[j] - x[i]) / (y[j] - y[i]);

    let mut l = m;
    while l > p && y[l - 1] < level {
        l -= 1;
    }
    let left = if l == m && y[m] >= level { x[m] } else { crossing(l, l - 1) };
    let mut r = m;
    while r < q && y[r + 1] < level {
        r += 1;
    }
    let right = if r == m && y[m] >= level { x[m] } else { crossing(r, r + 1) };
    Ok(TransmissionWindow {
        center: 0.5 * (left + right),
        width: right - left,
        depth: floor,
    })
}
