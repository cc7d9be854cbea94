//! Scenario files: TOML with unit-suffixed quantities, per-curve branches and
//! dotted-key overrides.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bath::{BathSpec, OccupationMode, Reservoirs, SpectralShape};
use crate::dressed::{DriveConfig, Nu3Bracket, WeakNmCoefficients};
use crate::error::{Error, Result};
use crate::response::{ChiForm, DotOpticalParams};
use crate::units::{format_inverse_rate, format_rate, parse_quantity, Dimension};

/// Angular frequency held in ps⁻¹, written with a unit suffix.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Rate(pub f64);

/// Inverse angular frequency held in ps, written with a unit suffix.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InverseRate(pub f64);

/// Temperature in kelvin; accepts `"45 K"` or a bare number.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Kelvin(pub f64);

impl Serialize for Rate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rate(self.0))
    }
}

impl Serialize for InverseRate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_inverse_rate(self.0))
    }
}

impl Serialize for Kelvin {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{:?} K", self.0))
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawQuantity {
    Number(f64),
    Text(String),
}

fn parse_raw<'de, D: Deserializer<'de>>(d: D, dim: Dimension) -> std::result::Result<f64, D::Error> {
    match RawQuantity::deserialize(d)? {
        RawQuantity::Text(t) => parse_quantity(&t, dim).map_err(serde::de::Error::custom),
        RawQuantity::Number(x) if dim == Dimension::Temperature => Ok(x),
        RawQuantity::Number(x) => Err(serde::de::Error::custom(format!(
            "`{x}` needs a unit suffix (ueV, meV, ps^-1 or Omega0)"
        ))),
    }
}

impl<'de> Deserialize<'de> for Rate {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        parse_raw(d, Dimension::Rate).map(Rate)
    }
}

impl<'de> Deserialize<'de> for InverseRate {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        parse_raw(d, Dimension::InverseRate).map(InverseRate)
    }
}

impl<'de> Deserialize<'de> for Kelvin {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        parse_raw(d, Dimension::Temperature).map(Kelvin)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Rates from reservoir spectra.
    Microscopic,
    /// Rates from expansion coefficients.
    Phenomenological,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    DeltaS,
    OmegaP,
    Temperature,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::DeltaS => "delta_s",
            Axis::OmegaP => "omega_p",
            Axis::Temperature => "temperature",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    Chi,
    N,
    Slowdown,
    Rates,
    Window,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSection {
    pub omega_p: Rate,
    #[serde(default)]
    pub delta_p: Rate,
    pub omega_s: Rate,
    #[serde(default)]
    pub delta_s: Rate,
}

impl DriveSection {
    pub fn to_drive(&self) -> DriveConfig {
        DriveConfig {
            omega_p: self.omega_p.0,
            delta_p: self.delta_p.0,
            omega_s: self.omega_s.0,
            delta_s: self.delta_s.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    SuperOhmic,
    Flat,
}

/// One reservoir. `alpha_ps2` is the coupling strength in ps².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathSection {
    pub shape: ShapeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_ps2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<Rate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<Rate>,
    #[serde(default)]
    pub temperature: Kelvin,
    #[serde(default)]
    pub occupation: OccupationMode,
}

impl BathSection {
    pub fn to_spec(&self, field: &str) -> Result<BathSpec> {
        let missing = |name: &str| Error::config(format!("{field}.{name}"), "required for this shape");
        let spec = match self.shape {
            ShapeKind::SuperOhmic => BathSpec {
                shape: SpectralShape::SuperOhmic {
                    alpha: self.alpha_ps2.ok_or_else(|| missing("alpha_ps2"))?,
                    cutoff: self.cutoff.ok_or_else(|| missing("cutoff"))?.0,
                },
                temperature: self.temperature.0,
                occupation: self.occupation,
            },
            ShapeKind::Flat => BathSpec {
                shape: SpectralShape::Flat {
                    level: self.level.ok_or_else(|| missing("level"))?.0,
                },
                temperature: self.temperature.0,
                occupation: self.occupation,
            },
        };
        spec.validate().map_err(|e| Error::config(field, e.to_string()))?;
        Ok(spec)
    }
}

/// Expansion coefficients; `f` is dimensionless and `g` an inverse rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSection {
    pub gamma0_2: Rate,
    pub gamma0_3: Rate,
    #[serde(default)]
    pub f2: f64,
    #[serde(default)]
    pub f3: f64,
    #[serde(default)]
    pub g2: InverseRate,
    #[serde(default)]
    pub g3: InverseRate,
}

impl CoefficientSection {
    pub fn to_coefficients(&self) -> WeakNmCoefficients {
        WeakNmCoefficients::real(self.gamma0_2.0, self.gamma0_3.0, self.f2, self.f3, self.g2.0, self.g3.0)
    }
}

/// Partial coefficient override carried by a branch.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma0_2: Option<Rate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma0_3: Option<Rate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f3: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g2: Option<InverseRate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g3: Option<InverseRate>,
}

/// One curve of a multi-curve scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Branch {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<Kelvin>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<CoefficientOverride>,
}

/// Sweep bounds are rates for `delta_s`/`omega_p` and kelvin for
/// `temperature`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: Axis,
    pub start: String,
    pub stop: String,
    pub points: usize,
}

impl SweepSection {
    pub fn new(axis: Axis, start: &str, stop: &str, points: usize) -> Self {
        SweepSection {
            axis,
            start: start.into(),
            stop: stop.into(),
            points,
        }
    }

    fn dimension(&self) -> Dimension {
        match self.axis {
            Axis::Temperature => Dimension::Temperature,
            _ => Dimension::Rate,
        }
    }

    /// Evenly spaced grid in internal units.
    pub fn grid(&self) -> Result<Vec<f64>> {
        let dim = self.dimension();
        let start = parse_quantity(&self.start, dim).map_err(|e| Error::config("sweep.start", e.to_string()))?;
        let stop = parse_quantity(&self.stop, dim).map_err(|e| Error::config("sweep.stop", e.to_string()))?;
        if !start.is_finite() || !stop.is_finite() {
            return Err(Error::config("sweep", "range bounds must be finite"));
        }
        if !(stop > start) {
            return Err(Error::config("sweep.stop", "must exceed sweep.start"));
        }
        if !(2..=1_000_000).contains(&self.points) {
            return Err(Error::config("sweep.points", format!("must lie in [2, 1000000], got {}", self.points)));
        }
        let n = self.points - 1;
        Ok((0..=n)
            .map(|i| if i == n { stop } else { start + (stop - start) * i as f64 / n as f64 })
            .collect())
    }
}

fn default_threshold() -> f64 {
    0.5
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

/// A complete scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub mode: Mode,
    #[serde(default)]
    pub chi_form: ChiForm,
    #[serde(default, skip_serializing_if = "is_default")]
    pub nu3_bracket: Nu3Bracket,
    pub outputs: Vec<Output>,
    #[serde(default = "default_threshold")]
    pub window_threshold: f64,
    pub drive: DriveSection,
    #[serde(default)]
    pub optical: DotOpticalParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bath: Option<BathSection>,
    /// Reservoir of level 3 when it differs from `bath`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bath3: Option<BathSection>,
    #[serde(default)]
    pub kappa_23: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<CoefficientSection>,
    pub sweep: SweepSection,
    #[serde(default, rename = "branch", skip_serializing_if = "Vec::is_empty")]
    pub branches: Vec<Branch>,
}

/// Where the rates of one branch come from.
#[derive(Debug, Clone, PartialEq)]
pub enum RateModel {
    Microscopic { reservoirs: Reservoirs, bracket: Nu3Bracket },
    Phenomenological(WeakNmCoefficients),
}

/// A branch with every override applied.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedBranch {
    pub name: Option<String>,
    pub model: RateModel,
}

impl ScenarioConfig {
    /// Parse TOML text, applying `key=value` overrides of dotted keys first.
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self> {
        let mut doc: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::config("<file>", e.message().to_string()))?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let config: ScenarioConfig = toml::Value::Table(doc)
            .try_into()
            .map_err(|e: toml::de::Error| Error::config(error_field(&e), e.message().to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &std::path::Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::config("--config", format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text, overrides)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario configs always serialize")
    }

    pub fn validate(&self) -> Result<()> {
        self.sweep.grid()?;
        if self.outputs.is_empty() {
            return Err(Error::config("outputs", "request at least one output"));
        }
        if !(self.window_threshold > 0.0 && self.window_threshold <= 1.0) {
            return Err(Error::config("window_threshold", "must lie in (0, 1]"));
        }
        if self.outputs.contains(&Output::Window) && self.sweep.axis != Axis::DeltaS {
            return Err(Error::config("outputs", "the window metric needs a delta_s sweep"));
        }
        self.drive.to_drive().validate().map_err(|e| Error::config("drive", e.to_string()))?;
        self.optical.validate()?;
        if !(self.kappa_23.abs() <= 1.0) {
            return Err(Error::config("kappa_23", "must lie in [-1, 1]"));
        }
        match self.mode {
            Mode::Phenomenological => {
                if self.sweep.axis == Axis::Temperature {
                    return Err(Error::config(
                        "sweep.axis",
                        "temperature sweeps need a reservoir (microscopic mode)",
                    ));
                }
                if self.coefficients.is_none() {
                    return Err(Error::config("coefficients", "required in phenomenological mode"));
                }
                if self.bath.is_some() || self.bath3.is_some() {
                    return Err(Error::config("bath", "not used in phenomenological mode"));
                }
            }
            Mode::Microscopic => {
                if self.bath.is_none() {
                    return Err(Error::config("bath", "required in microscopic mode"));
                }
                if self.coefficients.is_some() {
                    return Err(Error::config("coefficients", "not used in microscopic mode"));
                }
            }
        }
        let mut names = std::collections::BTreeSet::new();
        for (i, b) in self.branches.iter().enumerate() {
            let field = format!("branch[{i}]");
            if !names.insert(b.name.as_str()) {
                return Err(Error::config(format!("{field}.name"), format!("duplicate branch `{}`", b.name)));
            }
            if b.name.is_empty() || b.name.contains([',', '"', '\n', '\r']) {
                return Err(Error::config(format!("{field}.name"), "must be non-empty without commas or quotes"));
            }
            match self.mode {
                Mode::Phenomenological if b.temperature.is_some() => {
                    return Err(Error::config(format!("{field}.temperature"), "no reservoir in phenomenological mode"))
                }
                Mode::Microscopic if b.coefficients.is_some() => {
                    return Err(Error::config(format!("{field}.coefficients"), "not used in microscopic mode"))
                }
                _ => {}
            }
        }
        self.resolve()?;
        Ok(())
    }

    fn reservoirs(&self, temperature: Option<f64>) -> Result<Reservoirs> {
        let base = self.bath.as_ref().ok_or_else(|| Error::config("bath", "required in microscopic mode"))?;
        let mut r2 = base.to_spec("bath")?;
        let mut r3 = match &self.bath3 {
            Some(b) => b.to_spec("bath3")?,
            None => r2.clone(),
        };
        if let Some(t) = temperature {
            r2 = r2.with_temperature(t).map_err(|e| Error::config("temperature", e.to_string()))?;
            r3 = r3.with_temperature(t).map_err(|e| Error::config("temperature", e.to_string()))?;
        }
        Reservoirs::new(r2, r3, self.kappa_23).map_err(|e| Error::config("kappa_23", e.to_string()))
    }

    /// One entry per branch (a single unnamed entry without branches).
    pub fn resolve(&self) -> Result<Vec<ResolvedBranch>> {
        let model = |b: Option<&Branch>| -> Result<RateModel> {
            match self.mode {
                Mode::Microscopic => Ok(RateModel::Microscopic {
                    reservoirs: self.reservoirs(b.and_then(|b| b.temperature).map(|t| t.0))?,
                    bracket: self.nu3_bracket,
                }),
                Mode::Phenomenological => {
                    let mut c = self
                        .coefficients
                        .ok_or_else(|| Error::config("coefficients", "required in phenomenological mode"))?;
                    if let Some(o) = b.and_then(|b| b.coefficients) {
                        c.gamma0_2 = o.gamma0_2.unwrap_or(c.gamma0_2);
                        c.gamma0_3 = o.gamma0_3.unwrap_or(c.gamma0_3);
                        c.f2 = o.f2.unwrap_or(c.f2);
                        c.f3 = o.f3.unwrap_or(c.f3);
                        c.g2 = o.g2.unwrap_or(c.g2);
                        c.g3 = o.g3.unwrap_or(c.g3);
                    }
                    let coeffs = c.to_coefficients();
                    if !coeffs.is_finite() {
                        return Err(Error::config("coefficients", "must be finite"));
                    }
                    Ok(RateModel::Phenomenological(coeffs))
                }
            }
        };
        if self.branches.is_empty() {
            return Ok(vec![ResolvedBranch {
                name: None,
                model: model(None)?,
            }]);
        }
        self.branches
            .iter()
            .map(|b| {
                Ok(ResolvedBranch {
                    name: Some(b.name.clone()),
                    model: model(Some(b))?,
                })
            })
            .collect()
    }
}

fn error_field(e: &toml::de::Error) -> String {
    // toml reports the failing key path inside its message; keep it as the
    // field when present.
    let msg = e.message();
    msg.split('`').nth(1).unwrap_or("<file>").to_string()
}

/// Set `a.b.c = value` in a TOML table; the value is parsed as TOML when it
/// can be and taken as a string otherwise.
pub fn apply_override(doc: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::config("--set", format!("expected key=value, got `{assignment}`")))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::config("--set", format!("malformed key `{key}`")));
    }
    let mut table = doc;
    for part in &parts[..parts.len() - 1] {
        let entry = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| Error::config(key, format!("`{part}` is not a section")))?;
    }
    table.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}
