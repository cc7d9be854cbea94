//! Grid evaluation of a scenario.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dressed::{rates_asymptotic_with, rates_phenomenological, DriveConfig, RateSet};
use crate::error::{Error, Result};
use crate::response::{default_slowdown_step, evaluate_chi, slow_down_factor, transmission_window, SusceptibilityPoint};
use crate::units::omega0;

use super::config::{Axis, Output, RateModel, ResolvedBranch, ScenarioConfig};

/// Provenance of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub version: String,
    /// SHA-256 of the canonical TOML rendering of the scenario.
    pub config_hash: String,
    pub axis: String,
    pub axis_unit: String,
    /// Unit of every rate-valued column.
    pub rate_unit: String,
    pub columns: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub branch: Option<String>,
    /// Aligned with [`SweepMetadata::columns`].
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub metadata: SweepMetadata,
    pub rows: Vec<SweepRow>,
    /// Non-fatal conditions (e.g. no transparency window on a branch).
    pub warnings: Vec<String>,
}

impl SweepResult {
    pub fn has_branches(&self) -> bool {
        self.rows.iter().any(|r| r.branch.is_some())
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.metadata.columns.iter().position(|c| c == name)
    }

    /// Values of one column, optionally restricted to one branch.
    pub fn series(&self, name: &str, branch: Option<&str>) -> Vec<f64> {
        let Some(i) = self.column(name) else {
            return Vec::new();
        };
        self.rows
            .iter()
            .filter(|r| branch.is_none() || r.branch.as_deref() == branch)
            .map(|r| r.values[i])
            .collect()
    }
}

pub fn config_hash(config: &ScenarioConfig) -> String {
    hex::encode(Sha256::digest(config.to_toml_string().as_bytes()))
}

fn columns(outputs: &[Output]) -> Vec<String> {
    let mut cols = vec!["axis_value"];
    let has = |o| outputs.contains(&o);
    if has(Output::Chi) {
        cols.extend(["chi_re", "chi_im"]);
    }
    if has(Output::N) {
        cols.extend(["n_re", "n_im"]);
    }
    if has(Output::Slowdown) {
        cols.push("slowdown");
    }
    if has(Output::Rates) {
        cols.extend(["gamma2_re", "gamma3_re", "nu2_re", "nu3_re"]);
    }
    if has(Output::Window) {
        cols.extend(["window_center", "window_width"]);
    }
    cols.into_iter().map(String::from).collect()
}

/// Rate set of `model` at `drive`; `temperature` overrides the reservoirs.
pub fn rates_for(model: &RateModel, drive: &DriveConfig, temperature: Option<f64>) -> Result<RateSet> {
    match model {
        RateModel::Phenomenological(c) => Ok(rates_phenomenological(drive, c)),
        RateModel::Microscopic { reservoirs, bracket } => match temperature {
            None => rates_asymptotic_with(drive, reservoirs, *bracket),
            Some(t) => {
                let mut r = reservoirs.clone();
                r.r2 = r.r2.with_temperature(t)?;
                r.r3 = r.r3.with_temperature(t)?;
                rates_asymptotic_with(drive, &r, *bracket)
            }
        },
    }
}

struct PointValues {
    response: Option<SusceptibilityPoint>,
    rates: RateSet,
}

fn evaluate_point(
    config: &ScenarioConfig,
    model: &RateModel,
    shared: Option<&RateSet>,
    x: f64,
) -> Result<PointValues> {
    let mut drive = config.drive.to_drive();
    let mut temperature = None;
    match config.sweep.axis {
        Axis::DeltaS => drive.delta_s = x,
        Axis::OmegaP => drive.omega_p = x,
        Axis::Temperature => temperature = Some(x),
    }
    let rates = match shared {
        Some(r) => r.with_bare_signal_detuning(drive.delta_s),
        None => rates_for(model, &drive, temperature)?,
    };
    let wants = |o| config.outputs.contains(&o);
    let response = if wants(Output::Chi) || wants(Output::N) || wants(Output::Slowdown) || wants(Output::Window) {
        let mut p = evaluate_chi(rates.delta_s, &rates, &drive, &config.optical, config.chi_form)?;
        if wants(Output::Slowdown) {
            p.slowdown = Some(slow_down_factor(
                rates.delta_s,
                |_| Ok(rates),
                &drive,
                &config.optical,
                config.chi_form,
                default_slowdown_step(),
            )?);
        }
        Some(p)
    } else {
        None
    };
    Ok(PointValues { response, rates })
}

/// Evaluate every requested output on the grid of every branch.
pub fn run_sweep(config: &ScenarioConfig) -> Result<SweepResult> {
    config.validate()?;
    let grid = config.sweep.grid()?;
    let branches = config.resolve()?;
    let cols = columns(&config.outputs);
    let axis_scale = match config.sweep.axis {
        Axis::Temperature => 1.0,
        _ => omega0(),
    };
    let w0 = omega0();
    let mut rows = Vec::with_capacity(grid.len() * branches.len());
    let mut warnings = Vec::new();

    for ResolvedBranch { name, model } in &branches {
        let label = name.as_deref().map(|n| format!("branch {n}, ")).unwrap_or_default();
        let at = |x: f64, e: Error| Error::AtGridPoint {
            coordinate: format!("{label}{} = {:e} {}", config.sweep.axis, x / axis_scale, axis_unit(config.sweep.axis)),
            source: Box::new(e),
        };
        // Signal detuning does not enter the rates; compute them once.
        let shared = match config.sweep.axis {
            Axis::DeltaS => Some(rates_for(model, &config.drive.to_drive(), None).map_err(|e| at(grid[0], e))?),
            _ => None,
        };
        let points = grid
            .par_iter()
            .map(|&x| evaluate_point(config, model, shared.as_ref(), x).map_err(|e| at(x, e)))
            .collect::<Result<Vec<_>>>()?;

        let window = if config.outputs.contains(&Output::Window) {
            let spectrum: Vec<SusceptibilityPoint> = points.iter().filter_map(|p| p.response).collect();
            match transmission_window(&spectrum, config.window_threshold) {
                Ok(w) => Some((w.center / w0, w.width / w0)),
                Err(e @ Error::Shape(_)) => {
                    warnings.push(format!("{label}no transparency window: {e}"));
                    Some((f64::NAN, f64::NAN))
                }
                Err(e) => return Err(e),
            }
        } else {
            None
        };

        for (&x, p) in grid.iter().zip(&points) {
            let mut v = vec![x / axis_scale];
            if let Some(r) = &p.response {
                if config.outputs.contains(&Output::Chi) {
                    v.extend([r.chi_re, r.chi_im]);
                }
                if config.outputs.contains(&Output::N) {
                    v.extend([r.n.re, r.n.im]);
                }
                if let Some(s) = r.slowdown {
                    v.push(s);
                }
            }
            if config.outputs.contains(&Output::Rates) {
                let r = &p.rates;
                v.extend([r.gamma2.re / w0, r.gamma3.re / w0, r.nu2.re / w0, r.nu3.re / w0]);
            }
            if let Some((c, w)) = window {
                v.extend([c, w]);
            }
            debug_assert_eq!(v.len(), cols.len());
            rows.push(SweepRow {
                branch: name.clone(),
                values: v,
            });
        }
    }

    Ok(SweepResult {
        metadata: SweepMetadata {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: config_hash(config),
            axis: config.sweep.axis.to_string(),
            axis_unit: axis_unit(config.sweep.axis).to_string(),
            rate_unit: "Omega0".into(),
            columns: cols,
        },
        rows,
        warnings,
    })
}

fn axis_unit(axis: Axis) -> &'static str {
    match axis {
        Axis::Temperature => "K",
        _ => "Omega0",
    }
}
