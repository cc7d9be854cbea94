//! Dressed-state population functions and the pump-dependent decay rates
//! `γ_k` and cross-coherence couplings `ν_k`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bath::{half_fourier_spectral, smooth_kernel_triplet, spectral_derivatives, Level, Reservoirs};
use crate::error::{Error, Result};
use crate::quad::{integrate, CVec, QuadOptions};

/// Pump and signal fields. All quantities are angular frequencies (ps⁻¹).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveConfig {
    /// Pump Rabi frequency `Ω_p`.
    pub omega_p: f64,
    /// Bare pump detuning `Δ_p`.
    pub delta_p: f64,
    /// Signal Rabi frequency `Ω_s`.
    pub omega_s: f64,
    /// Bare signal detuning `Δ_s`.
    pub delta_s: f64,
}

impl DriveConfig {
    pub fn new(omega_p: f64, delta_p: f64, omega_s: f64, delta_s: f64) -> Result<Self> {
        let d = DriveConfig {
            omega_p,
            delta_p,
            omega_s,
            delta_s,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("omega_p", self.omega_p),
            ("delta_p", self.delta_p),
            ("omega_s", self.omega_s),
            ("delta_s", self.delta_s),
        ] {
            if !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be finite, got {v}")));
            }
        }
        Ok(())
    }

    /// Generalized Rabi frequency `Ω_R = √(Δ_p² + Ω_p²)`.
    pub fn rabi(&self) -> f64 {
        self.delta_p.hypot(self.omega_p)
    }

    /// Mixing coefficients `(c, s) = (Δ_p, Ω_p)/Ω_R`, with `(1, 0)` at `Ω_R = 0`.
    pub fn mixing(&self) -> (f64, f64) {
        let r = self.rabi();
        if r == 0.0 {
            (1.0, 0.0)
        } else {
            (self.delta_p / r, self.omega_p / r)
        }
    }

    /// Message when the signal is too strong for linear response.
    pub fn weak_signal_warning(&self) -> Option<String> {
        (self.omega_s.abs() > 0.1 * self.omega_p.abs()).then(|| {
            format!(
                "signal Rabi frequency {} exceeds 0.1 x pump Rabi frequency {}; linear response may not hold",
                self.omega_s, self.omega_p
            )
        })
    }

    pub fn with_omega_p(mut self, omega_p: f64) -> Self {
        self.omega_p = omega_p;
        self
    }

    pub fn with_delta_s(mut self, delta_s: f64) -> Self {
        self.delta_s = delta_s;
        self
    }
}

/// Dephasing rates and couplings at one operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSet {
    pub gamma2: Complex64,
    pub gamma3: Complex64,
    pub nu2: Complex64,
    pub nu3: Complex64,
    /// Modified signal detuning `Δ_s + Im γ₂`.
    pub delta_s: f64,
    /// Modified pump detuning `Δ_p + Im γ₃`.
    pub delta_p: f64,
}

impl RateSet {
    /// Assemble from complex rates; the imaginary parts of `γ` shift the
    /// detunings.
    pub fn from_complex(gamma2: Complex64, gamma3: Complex64, nu2: Complex64, nu3: Complex64, drive: &DriveConfig) -> Self {
        RateSet {
            gamma2,
            gamma3,
            nu2,
            nu3,
            delta_s: drive.delta_s + gamma2.im,
            delta_p: drive.delta_p + gamma3.im,
        }
    }

    /// Real rates and couplings with unshifted detunings.
    pub fn markovian(gamma2: f64, gamma3: f64, nu2: f64, nu3: f64, drive: &DriveConfig) -> Self {
        let c = |x| Complex64::new(x, 0.0);
        Self::from_complex(c(gamma2), c(gamma3), c(nu2), c(nu3), drive)
    }

    pub fn gamma2_re(&self) -> f64 {
        self.gamma2.re
    }

    pub fn gamma3_re(&self) -> f64 {
        self.gamma3.re
    }

    /// True when both couplings are real to within `1e-10` of their size.
    pub fn has_real_couplings(&self) -> bool {
        [self.nu2, self.nu3].iter().all(|n| n.im.abs() <= 1e-10 * n.norm())
    }

    /// Same rates with the signal detuning re-referenced to a new bare value.
    pub fn with_bare_signal_detuning(mut self, delta_s: f64) -> Self {
        self.delta_s = delta_s + self.gamma2.im;
        self
    }

    pub fn is_finite(&self) -> bool {
        [self.gamma2, self.gamma3, self.nu2, self.nu3].iter().all(|z| z.is_finite())
            && self.delta_s.is_finite()
            && self.delta_p.is_finite()
    }
}

/// Coefficients of the second-order expansion of the rates in `Ω_p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakNmCoefficients {
    pub gamma0_2: Complex64,
    pub gamma0_3: Complex64,
    /// Dimensionless.
    pub f2: Complex64,
    pub f3: Complex64,
    /// Inverse rate (ps).
    pub g2: Complex64,
    pub g3: Complex64,
}

impl WeakNmCoefficients {
    /// Real-valued coefficients as used for phenomenological scenarios.
    pub fn real(gamma0_2: f64, gamma0_3: f64, f2: f64, f3: f64, g2: f64, g3: f64) -> Self {
        let c = |x| Complex64::new(x, 0.0);
        WeakNmCoefficients {
            gamma0_2: c(gamma0_2),
            gamma0_3: c(gamma0_3),
            f2: c(f2),
            f3: c(f3),
            g2: c(g2),
            g3: c(g3),
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.gamma0_2, self.gamma0_3, self.f2, self.f3, self.g2, self.g3]
            .iter()
            .all(|z| z.is_finite())
    }
}

/// Which transform closes the last bracket of the `ν₃` expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Nu3Bracket {
    /// `D₃₃(−Ω_R) − D₂₃(−Ω_R)`, mirroring the `ν₂` expression.
    #[default]
    Symmetric,
    /// `D₃₃(−Ω_R) − D₃₂(−Ω_R)`.
    AsPrinted,
}

/// Dressed population functions `(S₃₃, S₂₂, S₂₃)` at time `t`;
/// `S₃₂ = conj(S₂₃)`.
pub fn dressed_populations(t: f64, drive: &DriveConfig) -> (f64, f64, Complex64) {
    let (c, s) = drive.mixing();
    let (sin, cos) = (drive.rabi() * t).sin_cos();
    let s33 = 0.5 * (1.0 + c * c + s * s * cos);
    let s22 = 0.5 * s * s * (1.0 - cos);
    let s23 = Complex64::new(0.5 * s * c * (1.0 - cos), 0.5 * s * sin);
    (s33, s22, s23)
}

/// Long-time (local Markovian) rates from the transforms at `0` and `±Ω_R`.
pub fn rates_asymptotic(drive: &DriveConfig, res: &Reservoirs) -> Result<RateSet> {
    rates_asymptotic_with(drive, res, Nu3Bracket::default())
}

pub fn rates_asymptotic_with(drive: &DriveConfig, res: &Reservoirs, bracket: Nu3Bracket) -> Result<RateSet> {
    drive.validate()?;
    let (c, s) = drive.mixing();
    let r = drive.rabi();
    let d = |delta: f64, k: Level, l: Level| half_fourier_spectral(delta, k, l, res).map(|t| t.value);
    let (two, three) = (Level::Two, Level::Three);

    let d22_0 = d(0.0, two, two)?;
    let d33_0 = d(0.0, three, three)?;
    if s == 0.0 {
        let zero = Complex64::new(0.0, 0.0);
        return Ok(RateSet::from_complex(d22_0, d33_0, zero, zero, drive));
    }
    // The cross spectrum is symmetric, so D₃₂ and D₂₃ are the same function.
    let d23_0 = d(0.0, two, three)?;
    let d32_0 = d23_0;
    let d22_p = d(r, two, two)?;
    let d22_m = d(-r, two, two)?;
    let d33_p = d(r, three, three)?;
    let d33_m = d(-r, three, three)?;
    let d23_p = d(r, two, three)?;
    let d23_m = d(-r, two, three)?;
    let (d32_p, d32_m) = (d23_p, d23_m);

    let s2 = s * s;
    let gamma2 = d22_0 + (d32_0 - d22_0) * (s2 / 2.0) - (d32_p - d22_p + d32_m - d22_m) * (s2 / 4.0);
    let gamma3 = d33_0 + (d23_0 - d33_0) * (s2 / 2.0) - (d23_p - d33_p + d23_m - d33_m) * (s2 / 4.0);
    let nu2 = (d32_0 - d22_0) * (s * c / 2.0) - (d32_p - d22_p) * (s / 4.0 * (1.0 + c))
        + (d32_m - d22_m) * (s / 4.0 * (1.0 - c));
    let last = match bracket {
        Nu3Bracket::Symmetric => d23_m,
        Nu3Bracket::AsPrinted => d32_m,
    };
    let nu3 = (d33_0 - d23_0) * (s * c / 2.0) + (d33_p - d23_p) * (s / 4.0 * (1.0 - c))
        - (d33_m - last) * (s / 4.0 * (1.0 + c));
    Ok(RateSet::from_complex(gamma2, gamma3, nu2, nu3, drive))
}

/// Integrands of `(γ₂, γ₃, ν₂, ν₃)` at lag `u = t − τ`, smooth parts only.
fn rate_integrands(u: f64, drive: &DriveConfig, res: &Reservoirs, opts: &QuadOptions) -> Result<[Complex64; 4]> {
    let [k22, k33, k23] = smooth_kernel_triplet(u, res, opts)?;
    let k32 = k23;
    let (s33, s22, s23) = dressed_populations(u, drive);
    Ok([
        k22 + (k32 - k22) * s22,
        k33 + (k23 - k33) * (1.0 - s33),
        (k32 - k22) * s23.conj(),
        (k33 - k23) * s23,
    ])
}

/// Contributions of delta-correlated (flat) reservoirs for `t > 0`: the
/// population weights vanish at `u = 0` except for the bare `γ^M` term.
fn delta_contributions(res: &Reservoirs) -> [Complex64; 4] {
    let zero = Complex64::new(0.0, 0.0);
    [
        Complex64::new(res.delta_weight(Level::Two, Level::Two), 0.0),
        Complex64::new(res.delta_weight(Level::Three, Level::Three), 0.0),
        zero,
        zero,
    ]
}

/// Lag beyond which no kernel is integrated; reservoirs at T > 0 have
/// decayed far earlier.
const MAX_LAG: f64 = 200.0;
const LAG_PANEL: f64 = 1.0;

/// Rates at time `t` after the pump is switched on, from the memory
/// integrals over `u ∈ [0, t]`.
pub fn rates_time_dependent(t: f64, drive: &DriveConfig, res: &Reservoirs) -> Result<RateSet> {
    drive.validate()?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("time must be finite and >= 0, got {t}")));
    }
    let zero = Complex64::new(0.0, 0.0);
    if t == 0.0 {
        return Ok(RateSet::from_complex(zero, zero, zero, zero, drive));
    }
    let opts = QuadOptions::default();
    let mut total = delta_contributions(res);
    let end = t.min(MAX_LAG);
    let mut start = 0.0;
    let mut quiet = 0;
    while start < end {
        let stop = (start + LAG_PANEL).min(end);
        let piece = lag_integral(start, stop, drive, res, &opts)?;
        let size = piece.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for (acc, p) in total.iter_mut().zip(piece) {
            *acc += p;
        }
        quiet = if size < 1e-3 * opts.abs_tol { quiet + 1 } else { 0 };
        if quiet >= 3 {
            break;
        }
        start = stop;
    }
    let [g2, g3, n2, n3] = total;
    Ok(RateSet::from_complex(g2, g3, n2, n3, drive))
}

fn lag_integral(a: f64, b: f64, drive: &DriveConfig, res: &Reservoirs, opts: &QuadOptions) -> Result<[Complex64; 4]> {
    let mut failure = None;
    let r = integrate(
        |u: f64| match rate_integrands(u, drive, res, opts) {
            Ok(v) => CVec(v),
            Err(e) => {
                failure.get_or_insert(e);
                CVec([Complex64::new(0.0, 0.0); 4])
            }
        },
        a,
        b,
        opts,
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(r.value.0),
    }
}

/// Time-dependent rates tabulated once and interpolated, for repeated
/// queries from an ODE integrator.
#[derive(Debug, Clone)]
pub struct TimeDependentRates {
    drive: DriveConfig,
    step: f64,
    /// Cumulative integrals at `i·step`.
    cumulative: Vec<[Complex64; 4]>,
    /// Integrands at `i·step`.
    slopes: Vec<[Complex64; 4]>,
    delta: [Complex64; 4],
}

impl TimeDependentRates {
    /// Default tabulation step (ps).
    pub const STEP: f64 = 0.05;

    pub fn new(drive: &DriveConfig, res: &Reservoirs) -> Result<Self> {
        Self::with_step(drive, res, Self::STEP)
    }

    pub fn with_step(drive: &DriveConfig, res: &Reservoirs, step: f64) -> Result<Self> {
        drive.validate()?;
        if !(step > 0.0) {
            return Err(Error::Domain(format!("tabulation step must be > 0, got {step}")));
        }
        let opts = QuadOptions::default();
        let mut cumulative = vec![[Complex64::new(0.0, 0.0); 4]];
        let mut slopes = vec![rate_integrands(0.0, drive, res, &opts)?];
        let quiet_cells = (3.0 / step).ceil() as usize;
        let mut quiet = 0;
        let max_cells = (MAX_LAG / step).ceil() as usize;
        for i in 0..max_cells {
            let (a, b) = (i as f64 * step, (i + 1) as f64 * step);
            let piece = lag_integral(a, b, drive, res, &opts)?;
            let mut next = *cumulative.last().unwrap();
            for (acc, p) in next.iter_mut().zip(piece) {
                *acc += p;
            }
            let slope = rate_integrands(b, drive, res, &opts)?;
            let size = piece.iter().map(|z| z.norm()).fold(0.0, f64::max);
            cumulative.push(next);
            slopes.push(slope);
            quiet = if size < 1e-3 * opts.abs_tol * step { quiet + 1 } else { 0 };
            if quiet >= quiet_cells {
                break;
            }
        }
        Ok(TimeDependentRates {
            drive: *drive,
            step,
            cumulative,
            slopes,
            delta: delta_contributions(res),
        })
    }

    /// Lag beyond which the rates are held at their last tabulated value.
    pub fn horizon(&self) -> f64 {
        (self.cumulative.len() - 1) as f64 * self.step
    }

    pub fn drive(&self) -> &DriveConfig {
        &self.drive
    }

    /// Rates at time `t`, by cubic Hermite interpolation of the cumulative
    /// integrals.
    pub fn at(&self, t: f64) -> RateSet {
        let zero = Complex64::new(0.0, 0.0);
        if t <= 0.0 {
            return RateSet::from_complex(zero, zero, zero, zero, &self.drive);
        }
        let mut v = [zero; 4];
        let last = self.cumulative.len() - 1;
        let x = t / self.step;
        if x >= last as f64 {
            v = self.cumulative[last];
        } else {
            let i = x.floor() as usize;
            let th = x - i as f64;
            let (h00, h10, h01, h11) = (
                (1.0 + 2.0 * th) * (1.0 - th) * (1.0 - th),
                th * (1.0 - th) * (1.0 - th),
                th * th * (3.0 - 2.0 * th),
                th * th * (th - 1.0),
            );
            for (j, out) in v.iter_mut().enumerate() {
                *out = self.cumulative[i][j] * h00
                    + self.slopes[i][j] * (h10 * self.step)
                    + self.cumulative[i + 1][j] * h01
                    + self.slopes[i + 1][j] * (h11 * self.step);
            }
        }
        for (out, d) in v.iter_mut().zip(self.delta) {
            *out += d;
        }
        RateSet::from_complex(v[0], v[1], v[2], v[3], &self.drive)
    }
}

/// Expansion coefficients of the rates in the pump Rabi frequency from the
/// transforms and their derivatives at zero frequency.
pub fn weak_nm_coefficients(res: &Reservoirs) -> Result<WeakNmCoefficients> {
    let (two, three) = (Level::Two, Level::Three);
    let gamma0_2 = half_fourier_spectral(0.0, two, two, res)?.value;
    let gamma0_3 = half_fourier_spectral(0.0, three, three, res)?.value;
    let d = |k, l, order| spectral_derivatives(k, l, res, order);
    let cross1 = d(two, three, 1)?;
    let cross2 = d(two, three, 2)?;
    Ok(WeakNmCoefficients {
        gamma0_2,
        gamma0_3,
        f2: (d(two, two, 1)? - cross1) * 0.5,
        f3: (d(three, three, 1)? - cross1) * 0.5,
        g2: (d(two, two, 2)? - cross2) * 0.5,
        g3: (d(three, three, 2)? - cross2) * 0.5,
    })
}

/// Rates from the second-order expansion:
/// `γ_k = γ_k⁽⁰⁾ + (g_k/2)Ω_p²`, `ν_k = f_kΩ_p + g_kΔ_pΩ_p`.
pub fn rates_phenomenological(drive: &DriveConfig, coeffs: &WeakNmCoefficients) -> RateSet {
    let (wp, dp) = (drive.omega_p, drive.delta_p);
    let gamma2 = coeffs.gamma0_2 + coeffs.g2 * (0.5 * wp * wp);
    let gamma3 = coeffs.gamma0_3 + coeffs.g3 * (0.5 * wp * wp);
    let nu2 = coeffs.f2 * wp + coeffs.g2 * (dp * wp);
    let nu3 = coeffs.f3 * wp + coeffs.g3 * (dp * wp);
    RateSet::from_complex(gamma2, gamma3, nu2, nu3, drive)
}
