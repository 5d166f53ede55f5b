//! Measurement-side analysis: PSD estimation, least-squares fits of
//! spectra, reflection and power-loss data, and their reconciliation.

mod lineshape;
mod lm;
mod power;
mod reflection;
mod surrogate;
mod synth;
mod table1;
mod welch;

pub use lineshape::{
    fit_lorentzian, fit_lorentzian_with, fit_mollow, fit_mollow_with, fit_thermal,
    fit_thermal_with, thermal_power_from_fit, LineFitOptions, Weights,
};
pub use lm::{levenberg_marquardt, FitResult, LmOptions};
pub use power::{fit_power_loss, fit_power_loss_with, PowerLossFixed, RadiativeOccupation};
pub use reflection::{fit_reflection, fit_reflection_with, ReflectionMode};
pub use surrogate::{lorentzian_noise, surrogate_timeseries};
pub use synth::{noisy_spectrum, synth_table1, synth_thermal, NoiseLevels, SynthGrids};
pub use table1::{
    fit_table1, occupations_from_population, reconcile_table1, DephasingCheck, Estimate,
    Table1Data, Table1FitOptions, Table1Fits, Table1Record,
};
pub use welch::{default_segment_len, subtract_background, welch_psd, TimeSeries, Window};
