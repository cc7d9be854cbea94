//! Slow-light observables of a driven three-level ladder quantum dot whose
//! excited levels dephase through non-Markovian, possibly correlated,
//! phonon reservoirs.
//!
//! Layers, bottom-up: [`bath`] (spectra and their transforms), [`dressed`]
//! (dressed-state dephasing rates), [`response`] (coherences, susceptibility,
//! refractive index, group slow-down), [`dynamics`] (coherence equations of
//! motion) and [`scenario`] (configuration, sweeps and output).

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bath;
pub mod dressed;
pub mod dynamics;
pub mod error;
pub mod quad;
pub mod response;
pub mod scenario;
pub mod units;

pub use error::{Error, Result};
