//! Driven transmon coupled to a radiative and a nonradiative bath.
//!
//! The Lindblad generator in [`lindblad`] is the numerical reference; the
//! closed forms in [`observables`] and the moment equations in [`bloch`] are
//! checked against it. [`fit`] turns measured (or synthetic) spectra,
//! reflection traces and power-loss curves back into rates and occupations,
//! and [`spectrometer`] implements the two-channel noise spectrometer.
//!
//! Everything is generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix the precision.

// `!(x > 0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// The dense linear algebra reads best with explicit indices.
#![allow(clippy::needless_range_loop)]

pub mod bloch;
pub mod error;
pub mod fit;
pub mod io;
pub mod linalg;
pub mod lindblad;
pub mod model;
pub mod observables;
pub mod scalar;
pub mod spectrometer;
pub mod spectrum;

pub use error::{Error, Result};
pub use scalar::Real;

pub type SystemConfig64 = model::SystemConfig<f64>;
pub type SystemConfig32 = model::SystemConfig<f32>;
pub type Rates64 = model::DerivedRates<f64>;
pub type Rates32 = model::DerivedRates<f32>;
pub type Spectrum64 = spectrum::Spectrum<f64>;
pub type Spectrum32 = spectrum::Spectrum<f32>;
pub type FitResult64 = fit::FitResult<f64>;
pub type FitResult32 = fit::FitResult<f32>;
pub type SpectrometerConfig64 = spectrometer::SpectrometerConfig<f64>;
pub type SpectrometerConfig32 = spectrometer::SpectrometerConfig<f32>;
