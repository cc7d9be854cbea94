//! Dephasing reservoirs: spectral densities, thermal correlation functions
//! and their half-sided Fourier transforms.
//!
//! Conventions: the two-sided effective spectrum is
//! `S(w) = J(w)(n(w)+1)` for `w > 0` and `S(w) = J(|w|) n(|w|)` for `w < 0`,
//! the stationary kernel is `K(u) = ∫ S(w) e^{-iwu} dw`, and
//! `D(δ) = ∫_0^∞ K(u) e^{iδu} du = π S(δ) + i PV∫ S(w)/(δ - w) dw`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_with_breaks, CVec, QuadOptions};
use crate::units::{inverse_temperature, mev_to_rate};

/// Support half-width of a super-Ohmic spectrum in units of its cutoff.
/// `J(12 w_c)` is below 1e-28 of its peak; the cross spectrum (a square root)
/// stays below 1e-14.
const SUPPORT_CUTOFFS: f64 = 12.0;

/// Default damping sequence (ps⁻¹) for [`half_fourier_time`].
pub const DEFAULT_DAMPING: [f64; 3] = [0.04, 0.02, 0.01];

/// Mean phonon number convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OccupationMode {
    /// `1/(exp(ħw/k_BT) - 1)`.
    #[default]
    BoseEinstein,
    /// `coth(ħw/2k_BT)`, kept for comparison with the literal printed form.
    LiteralCoth,
}

/// What the values of a [`SpectralTable`] represent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableKind {
    /// Density of states `J(w)` on `w >= 0`; thermal weighting is applied.
    Density,
    /// The two-sided effective spectrum `S(w)` directly; temperature is ignored.
    Effective,
}

/// Piecewise-linear spectrum, zero outside the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralTable {
    freqs: Vec<f64>,
    values: Vec<f64>,
    kind: TableKind,
}

impl SpectralTable {
    pub fn new(freqs: Vec<f64>, values: Vec<f64>, kind: TableKind) -> Result<Self> {
        let table = SpectralTable { freqs, values, kind };
        table.validate()?;
        Ok(table)
    }

    fn validate(&self) -> Result<()> {
        if self.freqs.len() < 2 || self.freqs.len() != self.values.len() {
            return Err(Error::Domain(
                "tabulated spectrum needs at least two (frequency, value) pairs".into(),
            ));
        }
        if self.freqs.windows(2).any(|w| !(w[1] > w[0])) || self.freqs.iter().any(|w| !w.is_finite()) {
            return Err(Error::Domain("tabulated grid must be strictly increasing".into()));
        }
        if self.values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::Domain("tabulated values must be finite and non-negative".into()));
        }
        if self.kind == TableKind::Density && self.freqs[0] < 0.0 {
            return Err(Error::Domain("density tables are defined on w >= 0".into()));
        }
        Ok(())
    }

    pub fn kind(&self) -> TableKind {
        self.kind
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn interpolate(&self, w: f64) -> f64 {
        let f = &self.freqs;
        if w < f[0] || w > f[f.len() - 1] {
            return 0.0;
        }
        let i = f.partition_point(|x| *x <= w).clamp(1, f.len() - 1);
        let (x0, x1) = (f[i - 1], f[i]);
        let (y0, y1) = (self.values[i - 1], self.values[i]);
        y0 + (y1 - y0) * (w - x0) / (x1 - x0)
    }

    /// Slope of the first segment when the grid starts at zero.
    fn slope_at_origin(&self) -> f64 {
        if self.freqs[0] == 0.0 {
            (self.values[1] - self.values[0]) / (self.freqs[1] - self.freqs[0])
        } else {
            0.0
        }
    }

    fn extent(&self) -> f64 {
        self.freqs[0].abs().max(self.freqs[self.freqs.len() - 1].abs())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum SpectralShape {
    /// `J(w) = α w³ exp(-w²/2w_c²)` with `alpha` in ps² and `cutoff` in ps⁻¹.
    SuperOhmic { alpha: f64, cutoff: f64 },
    /// Frequency-independent reservoir with `D(δ) = level` (ps⁻¹).
    Flat { level: f64 },
    Tabulated(SpectralTable),
}

/// One dephasing reservoir.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BathSpec {
    pub shape: SpectralShape,
    /// Kelvin.
    pub temperature: f64,
    #[serde(default)]
    pub occupation: OccupationMode,
}

impl BathSpec {
    pub fn super_ohmic(alpha: f64, cutoff: f64, temperature: f64) -> Result<Self> {
        let spec = BathSpec {
            shape: SpectralShape::SuperOhmic { alpha, cutoff },
            temperature,
            occupation: OccupationMode::BoseEinstein,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Acoustic-phonon reservoir with `α = 0.4π² ps²` and `w_c = 1 meV`.
    pub fn acoustic_phonons(temperature: f64) -> Result<Self> {
        Self::super_ohmic(0.4 * PI * PI, mev_to_rate(1.0), temperature)
    }

    pub fn flat(level: f64) -> Result<Self> {
        let spec = BathSpec {
            shape: SpectralShape::Flat { level },
            temperature: 0.0,
            occupation: OccupationMode::BoseEinstein,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn tabulated(table: SpectralTable, temperature: f64) -> Result<Self> {
        let spec = BathSpec {
            shape: SpectralShape::Tabulated(table),
            temperature,
            occupation: OccupationMode::BoseEinstein,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_occupation(mut self, occupation: OccupationMode) -> Self {
        self.occupation = occupation;
        self
    }

    pub fn with_temperature(mut self, temperature: f64) -> Result<Self> {
        self.temperature = temperature;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature >= 0.0) || !self.temperature.is_finite() {
            return Err(Error::Domain(format!(
                "temperature must be finite and >= 0, got {}",
                self.temperature
            )));
        }
        match &self.shape {
            SpectralShape::SuperOhmic { alpha, cutoff } => {
                if !(*alpha >= 0.0) || !alpha.is_finite() {
                    return Err(Error::Domain(format!("alpha must be >= 0, got {alpha}")));
                }
                if !(*cutoff > 0.0) || !cutoff.is_finite() {
                    return Err(Error::Domain(format!("cutoff must be > 0, got {cutoff}")));
                }
            }
            SpectralShape::Flat { level } => {
                if !(*level >= 0.0) || !level.is_finite() {
                    return Err(Error::Domain(format!("flat level must be >= 0, got {level}")));
                }
            }
            SpectralShape::Tabulated(table) => {
                table.validate()?;
                if table.kind == TableKind::Density
                    && self.temperature > 0.0
                    && table.freqs[0] == 0.0
                    && table.values[0] > 0.0
                {
                    return Err(Error::Domain(
                        "a density table must vanish at w = 0 for T > 0 (S would diverge as 1/w)".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    fn flat_level(&self) -> Option<f64> {
        match self.shape {
            SpectralShape::Flat { level } => Some(level),
            _ => None,
        }
    }

    /// Frequency beyond which the effective spectrum is negligible.
    fn support(&self) -> Option<f64> {
        match &self.shape {
            SpectralShape::SuperOhmic { cutoff, .. } => Some(SUPPORT_CUTOFFS * cutoff),
            SpectralShape::Flat { .. } => None,
            SpectralShape::Tabulated(t) => Some(t.extent()),
        }
    }

    /// Characteristic frequency scale used for finite-difference steps.
    fn frequency_scale(&self) -> Option<f64> {
        match &self.shape {
            SpectralShape::SuperOhmic { cutoff, .. } => Some(*cutoff),
            SpectralShape::Flat { .. } => None,
            SpectralShape::Tabulated(t) => Some(t.freqs[t.freqs.len() - 1] - t.freqs[0]),
        }
    }

    /// Non-smooth points of the spectrum (table nodes).
    fn nodes(&self) -> Vec<f64> {
        match &self.shape {
            SpectralShape::Tabulated(t) => match t.kind {
                TableKind::Density => t.freqs.iter().flat_map(|w| [*w, -*w]).collect(),
                TableKind::Effective => t.freqs.clone(),
            },
            _ => Vec::new(),
        }
    }
}

/// Correlation between the reservoirs of levels 2 and 3.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CrossCorrelation {
    pub kappa_23: f64,
}

impl CrossCorrelation {
    pub fn new(kappa_23: f64) -> Result<Self> {
        if !(kappa_23.abs() <= 1.0) {
            return Err(Error::Domain(format!("|kappa_23| must be <= 1, got {kappa_23}")));
        }
        Ok(CrossCorrelation { kappa_23 })
    }
}

/// Excited level index (`|2⟩` or `|3⟩`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    Two,
    Three,
}

/// The pair of reservoirs acting on levels 2 and 3.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reservoirs {
    pub r2: BathSpec,
    pub r3: BathSpec,
    #[serde(default)]
    pub cross: CrossCorrelation,
}

impl Reservoirs {
    pub fn new(r2: BathSpec, r3: BathSpec, kappa_23: f64) -> Result<Self> {
        r2.validate()?;
        r3.validate()?;
        Ok(Reservoirs {
            r2,
            r3,
            cross: CrossCorrelation::new(kappa_23)?,
        })
    }

    pub fn uncorrelated(r2: BathSpec, r3: BathSpec) -> Result<Self> {
        Self::new(r2, r3, 0.0)
    }

    /// Both levels coupled to copies of `spec` with correlation `kappa_23`.
    pub fn identical(spec: BathSpec, kappa_23: f64) -> Result<Self> {
        Self::new(spec.clone(), spec, kappa_23)
    }

    pub fn validate(&self) -> Result<()> {
        self.r2.validate()?;
        self.r3.validate()?;
        CrossCorrelation::new(self.cross.kappa_23).map(|_| ())
    }

    pub fn bath(&self, level: Level) -> &BathSpec {
        match level {
            Level::Two => &self.r2,
            Level::Three => &self.r3,
        }
    }

    /// Effective (cross-)spectrum `S_kl(w)`; the cross term is
    /// `κ √(S_22 S_33)`.
    pub fn spectrum(&self, w: f64, k: Level, l: Level) -> f64 {
        if k == l {
            return effective_spectrum(w, self.bath(k));
        }
        let kappa = self.cross.kappa_23;
        if kappa == 0.0 {
            return 0.0;
        }
        if self.r2 == self.r3 {
            kappa * effective_spectrum(w, &self.r2)
        } else {
            kappa * effective_spectrum(w, &self.r2).sqrt() * effective_spectrum(w, &self.r3).sqrt()
        }
    }

    /// Weight `c` of a delta-correlated kernel `K(u) = 2c δ(u)`, whose
    /// half-sided transform is the constant `c`.
    pub(crate) fn delta_weight(&self, k: Level, l: Level) -> f64 {
        if k == l {
            return self.bath(k).flat_level().unwrap_or(0.0);
        }
        match (self.r2.flat_level(), self.r3.flat_level()) {
            (Some(a), Some(b)) => self.cross.kappa_23 * (a * b).sqrt(),
            _ => 0.0,
        }
    }

    /// True when the (cross-)kernel has no smooth part at all.
    fn is_delta_only(&self, k: Level, l: Level) -> bool {
        if k == l {
            self.bath(k).flat_level().is_some()
        } else {
            self.cross.kappa_23 == 0.0 || (self.r2.flat_level().is_some() && self.r3.flat_level().is_some())
        }
    }

    fn support(&self, k: Level, l: Level) -> f64 {
        let a = self.bath(k).support();
        let b = self.bath(l).support();
        match (a, b) {
            (Some(a), Some(b)) => a.max(b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => 0.0,
        }
    }

    fn frequency_scale(&self, k: Level, l: Level) -> f64 {
        [self.bath(k).frequency_scale(), self.bath(l).frequency_scale()]
            .into_iter()
            .flatten()
            .fold(f64::INFINITY, f64::min)
    }

    fn nodes(&self, k: Level, l: Level) -> Vec<f64> {
        let mut n = self.bath(k).nodes();
        if k != l {
            n.extend(self.bath(l).nodes());
        }
        n
    }
}

/// Density of states `J(w)` (ps⁻¹). A flat reservoir returns its level.
pub fn spectral_density(w: f64, spec: &BathSpec) -> Result<f64> {
    if !(w >= 0.0) {
        return Err(Error::Domain(format!("spectral density needs w >= 0, got {w}")));
    }
    Ok(density(w, spec))
}

fn density(w: f64, spec: &BathSpec) -> f64 {
    match &spec.shape {
        SpectralShape::SuperOhmic { alpha, cutoff } => alpha * w.powi(3) * (-0.5 * (w / cutoff).powi(2)).exp(),
        SpectralShape::Flat { level } => *level,
        SpectralShape::Tabulated(t) => t.interpolate(w),
    }
}

/// Mean thermal occupation of a mode of angular frequency `w` (ps⁻¹) at
/// temperature `kelvin`.
pub fn thermal_occupation(w: f64, kelvin: f64, mode: OccupationMode) -> Result<f64> {
    if !(w >= 0.0) || !(kelvin >= 0.0) {
        return Err(Error::Domain(format!(
            "occupation needs w >= 0 and T >= 0, got w = {w}, T = {kelvin}"
        )));
    }
    if kelvin > 0.0 && w == 0.0 {
        return Err(Error::Divergence("occupation diverges at w = 0 for T > 0".into()));
    }
    Ok(occupation(w, inverse_temperature(kelvin), mode))
}

/// Occupation for `w > 0` and `beta = ħ/k_BT` in ps (infinite at T = 0).
fn occupation(w: f64, beta: f64, mode: OccupationMode) -> f64 {
    let x = beta * w;
    match mode {
        OccupationMode::BoseEinstein => {
            if x.is_infinite() {
                0.0
            } else {
                1.0 / x.exp_m1()
            }
        }
        OccupationMode::LiteralCoth => {
            if x.is_infinite() {
                1.0
            } else {
                1.0 / (0.5 * x).tanh()
            }
        }
    }
}

/// Two-sided effective spectrum `S(w)` for signed `w`, with the analytic
/// limit at `w = 0`.
pub fn effective_spectrum(w: f64, spec: &BathSpec) -> f64 {
    match &spec.shape {
        SpectralShape::Flat { level } => return level / PI,
        SpectralShape::Tabulated(t) if t.kind == TableKind::Effective => return t.interpolate(w),
        _ => {}
    }
    let beta = inverse_temperature(spec.temperature);
    if w == 0.0 {
        return zero_frequency_limit(spec, beta);
    }
    let a = w.abs();
    let j = density(a, spec);
    if j == 0.0 {
        return 0.0;
    }
    match spec.occupation {
        OccupationMode::BoseEinstein => {
            if beta.is_infinite() {
                if w > 0.0 {
                    j
                } else {
                    0.0
                }
            } else if w > 0.0 {
                // J (n + 1) = J / (1 - e^{-βw})
                -j / (-beta * a).exp_m1()
            } else {
                j / (beta * a).exp_m1()
            }
        }
        OccupationMode::LiteralCoth => {
            let n = occupation(a, beta, OccupationMode::LiteralCoth);
            if w > 0.0 {
                j * (n + 1.0)
            } else {
                j * n
            }
        }
    }
}

fn zero_frequency_limit(spec: &BathSpec, beta: f64) -> f64 {
    let (j0, slope) = match &spec.shape {
        SpectralShape::SuperOhmic { .. } => (0.0, 0.0),
        SpectralShape::Tabulated(t) => (t.interpolate(0.0), t.slope_at_origin()),
        SpectralShape::Flat { .. } => unreachable!(),
    };
    if beta.is_infinite() {
        return j0;
    }
    // J(w) n(w) -> J'(0)/β (Bose) or 2J'(0)/β (coth) as w -> 0.
    match spec.occupation {
        OccupationMode::BoseEinstein => slope / beta,
        OccupationMode::LiteralCoth => 2.0 * slope / beta,
    }
}

/// Stationary correlation function of one reservoir,
/// `K(u) = ∫_0^∞ J(w)[(n+1) e^{-iwu} + n e^{iwu}] dw`.
pub fn correlation_function(u: f64, spec: &BathSpec) -> Result<Complex64> {
    let res = Reservoirs::identical(spec.clone(), 0.0)?;
    cross_correlation_function(u, Level::Two, Level::Two, &res)
}

/// Stationary (cross-)correlation `K_kl(u) = ∫ S_kl(w) e^{-iwu} dw`.
pub fn cross_correlation_function(u: f64, k: Level, l: Level, res: &Reservoirs) -> Result<Complex64> {
    if !u.is_finite() {
        return Err(Error::Domain(format!("correlation function needs finite u, got {u}")));
    }
    if res.delta_weight(k, l) != 0.0 {
        return Err(Error::Domain(
            "flat reservoir is delta-correlated; K(u) has no pointwise value".into(),
        ));
    }
    smooth_kernel(u, k, l, res, &QuadOptions::default())
}

/// Kernel without its delta-correlated part (zero for flat reservoirs).
pub(crate) fn smooth_kernel(u: f64, k: Level, l: Level, res: &Reservoirs, opts: &QuadOptions) -> Result<Complex64> {
    if res.is_delta_only(k, l) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let w_max = res.support(k, l);
    // Half an oscillation per initial panel keeps the first pass accurate.
    let panels = ((w_max * u.abs() / PI).ceil() as usize).clamp(1, opts.max_panels / 2);
    let mut breaks: Vec<f64> = (0..=panels).map(|i| w_max * i as f64 / panels as f64).collect();
    breaks.extend(res.nodes(k, l).into_iter().map(f64::abs).filter(|w| *w > 0.0 && *w < w_max));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let r = integrate_with_breaks(
        |w: f64| {
            let sp = res.spectrum(w, k, l);
            let sm = res.spectrum(-w, k, l);
            let (s, c) = (w * u).sin_cos();
            Complex64::new((sp + sm) * c, -(sp - sm) * s)
        },
        &breaks,
        opts,
    )?;
    Ok(r.value)
}

/// Smooth parts of `K_22`, `K_33` and `K_23 (= K_32)` at `u`, sharing one
/// quadrature.
pub(crate) fn smooth_kernel_triplet(u: f64, res: &Reservoirs, opts: &QuadOptions) -> Result<[Complex64; 3]> {
    let pairs = [(Level::Two, Level::Two), (Level::Three, Level::Three), (Level::Two, Level::Three)];
    let w_max = pairs
        .iter()
        .filter(|(k, l)| !res.is_delta_only(*k, *l))
        .map(|(k, l)| res.support(*k, *l))
        .fold(0.0, f64::max);
    if w_max == 0.0 {
        return Ok([Complex64::new(0.0, 0.0); 3]);
    }
    let panels = ((w_max * u.abs() / PI).ceil() as usize).clamp(1, opts.max_panels / 2);
    let mut breaks: Vec<f64> = (0..=panels).map(|i| w_max * i as f64 / panels as f64).collect();
    breaks.extend(
        res.nodes(Level::Two, Level::Three)
            .into_iter()
            .map(f64::abs)
            .filter(|w| *w > 0.0 && *w < w_max),
    );
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let r = integrate_with_breaks(
        |w: f64| {
            let (s, c) = (w * u).sin_cos();
            CVec(pairs.map(|(k, l)| {
                if res.is_delta_only(k, l) {
                    return Complex64::new(0.0, 0.0);
                }
                let sp = res.spectrum(w, k, l);
                let sm = res.spectrum(-w, k, l);
                Complex64::new((sp + sm) * c, -(sp - sm) * s)
            }))
        },
        &breaks,
        opts,
    )?;
    Ok(r.value.0)
}

/// Half-sided transform of a reservoir kernel at frequency `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralTransform {
    pub delta: f64,
    /// Real part: decay contribution; imaginary part: frequency shift.
    pub value: Complex64,
}

/// `D⁻_kl(δ) = π S_kl(δ) + i PV∫ S_kl(w)/(δ - w) dw`, with the principal
/// value taken by symmetric subtraction about the singularity.
pub fn half_fourier_spectral(delta: f64, k: Level, l: Level, res: &Reservoirs) -> Result<SpectralTransform> {
    half_fourier_spectral_with(delta, k, l, res, &QuadOptions::default())
}

pub fn half_fourier_spectral_with(
    delta: f64,
    k: Level,
    l: Level,
    res: &Reservoirs,
    opts: &QuadOptions,
) -> Result<SpectralTransform> {
    if !delta.is_finite() {
        return Err(Error::Domain(format!("transform needs finite delta, got {delta}")));
    }
    let mut value = Complex64::new(res.delta_weight(k, l), 0.0);
    if !res.is_delta_only(k, l) {
        let re = PI * res.spectrum(delta, k, l);
        let reach = delta.abs() + res.support(k, l);
        // Integrand of PV∫ S(w)/(δ-w) dw = -∫_0^∞ [S(δ+x) - S(δ-x)]/x dx.
        let mut breaks = vec![0.0, reach];
        if delta != 0.0 {
            breaks.push(delta.abs());
        }
        breaks.extend(
            res.nodes(k, l)
                .into_iter()
                .map(|w| (w - delta).abs())
                .filter(|x| *x > 0.0 && *x < reach),
        );
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let pv = integrate_with_breaks(
            |x: f64| (res.spectrum(delta + x, k, l) - res.spectrum(delta - x, k, l)) / x,
            &breaks,
            opts,
        )?;
        value += Complex64::new(re, -pv.value);
    }
    Ok(SpectralTransform { delta, value })
}

/// Time-domain route to the same transform: `∫_0^∞ K(u) e^{iδu} e^{-ηu} du`
/// for each damping `η` of a decreasing sequence, extrapolated to `η → 0`
/// through the last three values.
pub fn half_fourier_time(
    delta: f64,
    k: Level,
    l: Level,
    res: &Reservoirs,
    damping: &[f64],
) -> Result<SpectralTransform> {
    if damping.len() < 3 {
        return Err(Error::Domain("damping sequence needs at least three values".into()));
    }
    if damping.iter().any(|e| !(*e > 0.0)) || damping.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Domain("damping sequence must be positive and strictly decreasing".into()));
    }
    let base = Complex64::new(res.delta_weight(k, l), 0.0);
    if res.is_delta_only(k, l) {
        return Ok(SpectralTransform { delta, value: base });
    }

    let opts = QuadOptions::default();
    let cache: RefCell<HashMap<u64, Complex64>> = RefCell::new(HashMap::new());
    let kernel = |u: f64| -> Result<Complex64> {
        if let Some(v) = cache.borrow().get(&u.to_bits()) {
            return Ok(*v);
        }
        let v = smooth_kernel(u, k, l, res, &opts)?;
        cache.borrow_mut().insert(u.to_bits(), v);
        Ok(v)
    };

    let values = damping
        .iter()
        .map(|&eta| damped_transform(delta, eta, &kernel, &opts).map(|v| v + base))
        .collect::<Result<Vec<_>>>()?;

    let n = values.len();
    let (e, f) = (&damping[n - 3..], &values[n - 3..]);
    let d1 = (f[1] - f[0]).norm();
    let d2 = (f[2] - f[1]).norm();
    if d2 > d1 && d2 > 1e-12 * f[2].norm() {
        return Err(Error::Extrapolation(format!(
            "damped transforms do not settle as η → 0 (successive changes {d1:.3e}, {d2:.3e})"
        )));
    }
    // Quadratic (Lagrange) extrapolation to η = 0.
    let mut value = Complex64::new(0.0, 0.0);
    for i in 0..3 {
        let mut weight = 1.0;
        for j in 0..3 {
            if i != j {
                weight *= e[j] / (e[j] - e[i]);
            }
        }
        value += f[i] * weight;
    }
    if !value.is_finite() {
        return Err(Error::Extrapolation("non-finite extrapolated transform".into()));
    }
    Ok(SpectralTransform { delta, value })
}

/// Integrate `K(u) e^{(iδ-η)u}` panel by panel until the kernel has decayed.
fn damped_transform<F>(delta: f64, eta: f64, kernel: &F, opts: &QuadOptions) -> Result<Complex64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    const PANEL: f64 = 1.0;
    const MAX_TIME: f64 = 500.0;
    let mut total = Complex64::new(0.0, 0.0);
    let mut quiet = 0;
    let mut start = 0.0;
    let mut failure = None;
    while start < MAX_TIME {
        let end = start + PANEL;
        let r = integrate(
            |u: f64| match kernel(u) {
                Ok(kv) => kv * Complex64::new(-eta * u, delta * u).exp(),
                Err(e) => {
                    failure.get_or_insert(e);
                    Complex64::new(0.0, 0.0)
                }
            },
            start,
            end,
            opts,
        )?;
        if let Some(e) = failure.take() {
            return Err(e);
        }
        total += r.value;
        if r.value.norm() < 1e-3 * opts.abs_tol {
            quiet += 1;
            if quiet >= 3 {
                return Ok(total);
            }
        } else {
            quiet = 0;
        }
        start = end;
    }
    Err(Error::Quadrature {
        estimate: kernel(MAX_TIME)?.norm() * MAX_TIME,
        tolerance: opts.abs_tol,
    })
}

/// Derivative of order 1 or 2 of `D⁻_kl(ω)` at `ω = 0` from Richardson-
/// extrapolated central differences, halving the step until two successive
/// estimates agree to 1e-6 relative.
pub fn spectral_derivatives(k: Level, l: Level, res: &Reservoirs, order: u8) -> Result<Complex64> {
    if order != 1 && order != 2 {
        return Err(Error::Domain(format!("derivative order must be 1 or 2, got {order}")));
    }
    if res.is_delta_only(k, l) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut memo: HashMap<u64, Complex64> = HashMap::new();
    let mut eval = |w: f64| -> Result<Complex64> {
        if let Some(v) = memo.get(&w.to_bits()) {
            return Ok(*v);
        }
        let v = half_fourier_spectral(w, k, l, res)?.value;
        memo.insert(w.to_bits(), v);
        Ok(v)
    };
    let mut stencil = |h: f64| -> Result<Complex64> {
        Ok(match order {
            1 => (eval(h)? - eval(-h)?) / (2.0 * h),
            _ => (eval(h)? - eval(0.0)? * 2.0 + eval(-h)?) / (h * h),
        })
    };
    let mut h = 1e-2 * res.frequency_scale(k, l);
    let mut richardson = |h: f64| -> Result<Complex64> {
        let coarse = stencil(h)?;
        let fine = stencil(0.5 * h)?;
        Ok((fine * 4.0 - coarse) / 3.0)
    };
    let mut previous = richardson(h)?;
    for _ in 0..30 {
        h *= 0.5;
        let current = richardson(h)?;
        let change = (current - previous).norm();
        if change <= 1e-6 * current.norm() || change <= 1e-13 {
            return Ok(current);
        }
        if h < 1e-8 {
            break;
        }
        previous = current;
    }
    Err(Error::Stencil(format!(
        "order-{order} derivative did not settle before h = {h:.3e}"
    )))
}
