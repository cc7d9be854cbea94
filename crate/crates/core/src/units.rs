//! Physical constants and unit handling.
//!
//! Internally every frequency is an angular frequency in ps⁻¹ and every time
//! is in ps. Energies are converted with ħ.

use crate::error::{Error, Result};

/// ħ in meV·ps.
pub const HBAR_MEV_PS: f64 = 0.6582119569;
/// Boltzmann constant in meV/K.
pub const KB_MEV_PER_K: f64 = 0.0861733;
/// Reference Rabi energy Ω₀ in μeV.
pub const OMEGA0_UEV: f64 = 6.6;
/// Speed of light in μm/ps.
pub const SPEED_OF_LIGHT_UM_PS: f64 = 299.792458;

// SI constants used by the susceptibility prefactor.
pub const ELEMENTARY_CHARGE: f64 = 1.602176634e-19;
pub const VACUUM_PERMITTIVITY: f64 = 8.8541878128e-12;
pub const HBAR_SI: f64 = 1.054571817e-34;

/// Ω₀ as an angular frequency in ps⁻¹.
pub fn omega0() -> f64 {
    mev_to_rate(OMEGA0_UEV * 1e-3)
}

pub fn mev_to_rate(e: f64) -> f64 {
    e / HBAR_MEV_PS
}

pub fn uev_to_rate(e: f64) -> f64 {
    mev_to_rate(e * 1e-3)
}

pub fn rate_to_mev(w: f64) -> f64 {
    w * HBAR_MEV_PS
}

/// ħ/(k_B T) in ps. Infinite at T = 0.
pub fn inverse_temperature(kelvin: f64) -> f64 {
    if kelvin == 0.0 {
        f64::INFINITY
    } else {
        HBAR_MEV_PS / (KB_MEV_PER_K * kelvin)
    }
}

/// Angular optical frequency 2πc/λ in ps⁻¹ for a wavelength in μm.
pub fn optical_rate(lambda_um: f64) -> f64 {
    2.0 * std::f64::consts::PI * SPEED_OF_LIGHT_UM_PS / lambda_um
}

/// The kind of quantity a unit-suffixed string is expected to hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    /// Angular frequency (returned in ps⁻¹).
    Rate,
    /// Inverse angular frequency (returned in ps).
    InverseRate,
    /// Temperature (returned in K).
    Temperature,
}

/// Parse a quantity such as `"3 Omega0"`, `"6.6 ueV"`, `"1 meV"`, `"0.5 ps^-1"`,
/// `"0.15 Omega0^-1"` or `"45 K"` into internal units.
pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64> {
    let text = text.trim();
    let split = text
        .find(|c: char| c.is_whitespace() || (c.is_alphabetic() && c != 'e' && c != 'E') || c == '/')
        .unwrap_or(text.len());
    let (num, unit) = text.split_at(split);
    let value: f64 = num
        .trim()
        .parse()
        .map_err(|_| Error::config(text, format!("cannot parse number `{}`", num.trim())))?;
    let unit = unit.trim();
    let factor = match (dim, unit) {
        (Dimension::Rate, "Omega0") => omega0(),
        (Dimension::Rate, "ueV") => uev_to_rate(1.0),
        (Dimension::Rate, "meV") => mev_to_rate(1.0),
        (Dimension::Rate, "ps^-1") => 1.0,
        (Dimension::InverseRate, "Omega0^-1") | (Dimension::InverseRate, "/Omega0") => 1.0 / omega0(),
        (Dimension::InverseRate, "ueV^-1") => 1.0 / uev_to_rate(1.0),
        (Dimension::InverseRate, "meV^-1") => 1.0 / mev_to_rate(1.0),
        (Dimension::InverseRate, "ps") => 1.0,
        (Dimension::Temperature, "K") | (Dimension::Temperature, "") => 1.0,
        (Dimension::Rate, "") | (Dimension::InverseRate, "") => {
            return Err(Error::config(
                text,
                "missing unit suffix (use ueV, meV, ps^-1 or Omega0)",
            ))
        }
        _ => return Err(Error::config(text, format!("unknown unit `{unit}` for {dim:?}"))),
    };
    Ok(value * factor)
}

/// Render a rate in Ω₀ units with a round-trippable mantissa.
pub fn format_rate(w: f64) -> String {
    format!("{:?} Omega0", w / omega0())
}

pub fn format_inverse_rate(x: f64) -> String {
    format!("{:?} Omega0^-1", x * omega0())
}
