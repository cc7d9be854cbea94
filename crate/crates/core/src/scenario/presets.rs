//! Ready-made scenarios reproducing each figure's parameter set.

use std::f64::consts::PI;

use crate::bath::OccupationMode;
use crate::dressed::Nu3Bracket;
use crate::error::{Error, Result};
use crate::response::{ChiForm, DotOpticalParams};
use crate::units::{mev_to_rate, omega0};

use super::config::{
    Axis, BathSection, Branch, CoefficientOverride, CoefficientSection, DriveSection, InverseRate, Kelvin, Mode,
    Output, Rate, ScenarioConfig, ShapeKind, SweepSection,
};

pub const PRESET_NAMES: [&str; 6] = ["fig2", "fig3", "fig4", "fig5", "fig6", "fig7"];

/// Pump axis range shared by the Ω_p presets.
pub const OMEGA_P_RANGE: (&str, &str) = ("0 Omega0", "5 Omega0");
/// Signal-detuning range shared by the spectral presets.
pub const DELTA_S_RANGE: (&str, &str) = ("-6 Omega0", "6 Omega0");

fn w0(x: f64) -> Rate {
    Rate(x * omega0())
}

fn drive(omega_p: f64) -> DriveSection {
    DriveSection {
        omega_p: w0(omega_p),
        delta_p: Rate(0.0),
        omega_s: w0(1e-3),
        delta_s: Rate(0.0),
    }
}

fn markov_coefficients() -> CoefficientSection {
    CoefficientSection {
        gamma0_2: w0(1.0),
        gamma0_3: w0(2.0),
        f2: 0.0,
        f3: 0.0,
        g2: InverseRate(0.0),
        g3: InverseRate(0.0),
    }
}

fn coefficient_branch(name: String, f2: f64, f3: f64, g2: f64, g3: f64) -> Branch {
    Branch {
        name,
        temperature: None,
        coefficients: Some(CoefficientOverride {
            f2: Some(f2),
            f3: Some(f3),
            g2: Some(InverseRate(g2 / omega0())),
            g3: Some(InverseRate(g3 / omega0())),
            ..Default::default()
        }),
    }
}

/// `f₂ ∈ {0, 0.1, 0.2}` with `f₃ = 2f₂`, `g = 0`.
fn slope_branches() -> Vec<Branch> {
    [0.0, 0.1, 0.2]
        .into_iter()
        .map(|f2| coefficient_branch(format!("f2={f2}"), f2, 2.0 * f2, 0.0, 0.0))
        .collect()
}

/// Sign combinations of `(f₂, f₃)`.
fn sign_branches() -> Vec<Branch> {
    [(0.0, 0.0), (-0.2, -0.4), (-0.2, 0.4), (0.2, -0.4)]
        .into_iter()
        .map(|(f2, f3)| coefficient_branch(format!("f2={f2} f3={f3}"), f2, f3, 0.0, 0.0))
        .collect()
}

/// `(f₂, g₂·Ω₀)` pairs with `f₃ = 2f₂`, `g₃ = 2g₂`.
fn curvature_branches() -> Vec<Branch> {
    [(0.0, 0.0), (0.2, 0.0001), (0.2, 0.1), (0.2, 0.15)]
        .into_iter()
        .map(|(f2, g2)| coefficient_branch(format!("f2={f2} g2={g2}"), f2, 2.0 * f2, g2, 2.0 * g2))
        .collect()
}

fn phenomenological(omega_p: f64, sweep: SweepSection, outputs: Vec<Output>, branches: Vec<Branch>) -> ScenarioConfig {
    ScenarioConfig {
        mode: Mode::Phenomenological,
        chi_form: ChiForm::default(),
        nu3_bracket: Nu3Bracket::default(),
        outputs,
        window_threshold: 0.5,
        drive: drive(omega_p),
        optical: DotOpticalParams::default(),
        bath: None,
        bath3: None,
        kappa_23: 0.0,
        coefficients: Some(markov_coefficients()),
        sweep,
        branches,
    }
}

fn spectral_sweep() -> SweepSection {
    SweepSection::new(Axis::DeltaS, DELTA_S_RANGE.0, DELTA_S_RANGE.1, 1201)
}

fn pump_sweep(points: usize) -> SweepSection {
    SweepSection::new(Axis::OmegaP, OMEGA_P_RANGE.0, OMEGA_P_RANGE.1, points)
}

/// Scenario for the named figure.
pub fn preset(name: &str) -> Result<ScenarioConfig> {
    let spectra = vec![Output::Chi, Output::N, Output::Window];
    let slowdown = vec![Output::Chi, Output::N, Output::Slowdown];
    let config = match name {
        "fig2" => ScenarioConfig {
            mode: Mode::Microscopic,
            chi_form: ChiForm::default(),
            nu3_bracket: Nu3Bracket::default(),
            outputs: vec![Output::Rates],
            window_threshold: 0.5,
            drive: drive(1.0),
            optical: DotOpticalParams::default(),
            bath: Some(BathSection {
                shape: ShapeKind::SuperOhmic,
                alpha_ps2: Some(0.4 * PI * PI),
                cutoff: Some(Rate(mev_to_rate(1.0))),
                level: None,
                temperature: Kelvin(5.0),
                occupation: OccupationMode::BoseEinstein,
            }),
            bath3: None,
            kappa_23: 0.0,
            coefficients: None,
            sweep: pump_sweep(51),
            branches: [5.0, 15.0, 45.0]
                .into_iter()
                .map(|t| Branch {
                    name: format!("T={t}K"),
                    temperature: Some(Kelvin(t)),
                    coefficients: None,
                })
                .collect(),
        },
        "fig3" => phenomenological(3.0, spectral_sweep(), spectra, slope_branches()),
        "fig4" => phenomenological(3.0, pump_sweep(101), slowdown, slope_branches()),
        "fig5" => phenomenological(3.0, spectral_sweep(), spectra, sign_branches()),
        "fig6" => phenomenological(3.0, pump_sweep(101), slowdown, sign_branches()),
        "fig7" => phenomenological(3.0, pump_sweep(101), slowdown, curvature_branches()),
        other => {
            return Err(Error::config(
                "--name",
                format!("unknown preset `{other}`; valid names: {}", PRESET_NAMES.join(", ")),
            ))
        }
    };
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates_and_round_trips() {
        for name in PRESET_NAMES {
            let c = preset(name).unwrap();
            let text = c.to_toml_string();
            let back = ScenarioConfig::from_toml_str(&text, &[]).unwrap();
            assert_eq!(back.branches.len(), c.branches.len(), "{name}");
        }
    }

    #[test]
    fn unknown_preset_lists_names() {
        let e = preset("fig9").unwrap_err();
        assert!(e.is_config());
        assert!(e.to_string().contains("fig2, fig3"));
    }
}
