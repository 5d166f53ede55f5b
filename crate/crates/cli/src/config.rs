//! Run configuration: a strict JSON envelope plus per-scenario parameters.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use twobath::fit::{ReflectionMode, Window};
use twobath::io::SystemFile;

use crate::failure::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Spectrum,
    Reflection,
    PowerLoss,
    Budget,
    Autler,
    Qp,
    Welch,
    Fit,
    Table1,
    Spectrometer,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Spectrum => "spectrum",
            Scenario::Reflection => "reflection",
            Scenario::PowerLoss => "power-loss",
            Scenario::Budget => "budget",
            Scenario::Autler => "autler",
            Scenario::Qp => "qp",
            Scenario::Welch => "welch",
            Scenario::Fit => "fit",
            Scenario::Table1 => "table1",
            Scenario::Spectrometer => "spectrometer",
        }
    }
}

/// The file as written by the user. `params` is checked against the
/// scenario's own schema in [`Resolved::from_file`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Scenario,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Basename of the output files; defaults to the scenario name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_prefix: Option<String>,
    #[serde(default)]
    pub params: Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumParams {
    #[serde(default = "d_span4")]
    pub half_span_hz: f64,
    #[serde(default = "d_points801")]
    pub points: usize,
    /// Strong 0↔1 drive for the drive-on spectrum, Ω/2π.
    #[serde(default = "d_rabi10m")]
    pub rabi_hz: f64,
    #[serde(default = "d_true")]
    pub numeric: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReflectionParams {
    #[serde(default = "d_span15")]
    pub half_span_hz: f64,
    #[serde(default = "d_points301")]
    pub points: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepParams {
    #[serde(default = "d_rabi_min")]
    pub rabi_min_hz: f64,
    #[serde(default = "d_rabi_max")]
    pub rabi_max_hz: f64,
    #[serde(default = "d_points61")]
    pub points: usize,
    /// Also evaluate each point from the Lindblad steady state.
    #[serde(default)]
    pub numeric: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutlerParams {
    /// 1↔2 drive Ω2/2π.
    #[serde(default = "d_rabi10m")]
    pub rabi12_hz: f64,
    #[serde(default = "d_span10m")]
    pub half_span_hz: f64,
    #[serde(default = "d_points2001")]
    pub points: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QpParams {
    /// Quasiparticle temperature; defaults to the nonradiative bath's.
    #[serde(default)]
    pub temperature_mk: Option<f64>,
    /// Excited population attributed to quasiparticles; defaults to the
    /// thermal Γ+/Γ1.
    #[serde(default)]
    pub rho11_qp: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WelchParams {
    /// CSV (`t_s,volts`) or raw f64 stream (`.f64`/`.bin`, sidecar
    /// `<input>.json`). A Lorentzian surrogate is generated when absent.
    #[serde(default)]
    pub input: Option<String>,
    /// Drive-off record subtracted after estimation.
    #[serde(default)]
    pub background: Option<String>,
    /// W per volt² for CSV input.
    #[serde(default = "d_one")]
    pub gain: f64,
    #[serde(default)]
    pub segment_len: Option<usize>,
    #[serde(default = "d_half")]
    pub overlap: f64,
    #[serde(default)]
    pub window: Window,
    /// Expected half-width used for the default segment length; defaults
    /// to Γ2/2π.
    #[serde(default)]
    pub linewidth_hz: Option<f64>,
    #[serde(default = "d_one")]
    pub duration_s: f64,
    #[serde(default = "d_fs")]
    pub sample_rate_hz: f64,
    #[serde(default = "d_true")]
    pub fit: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitKind {
    Lorentzian,
    Thermal,
    Mollow,
    Reflection,
    PowerLoss,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitParams {
    pub kind: FitKind,
    pub input: String,
    #[serde(default = "d_one_usize")]
    pub peaks: usize,
    #[serde(default)]
    pub mode: ReflectionMode,
    /// Relative noise of spectral points (two-pass model weighting).
    #[serde(default)]
    pub relative_noise: Option<f64>,
    /// Constant absolute noise per point.
    #[serde(default)]
    pub sigma: Option<f64>,
    /// Held quantities of the power-loss fit; default to the system's.
    #[serde(default)]
    pub gamma_2_hz: Option<f64>,
    #[serde(default)]
    pub gamma_r_hz: Option<f64>,
    #[serde(default)]
    pub n_r: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseChoice {
    #[default]
    Measured,
    None,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table1Params {
    /// Measured inputs; all three or none (synthetic from the system).
    #[serde(default)]
    pub mollow: Option<String>,
    #[serde(default)]
    pub reflection: Option<String>,
    #[serde(default)]
    pub power_loss: Option<String>,
    /// Fitted Γ2 used for the synthetic data; defaults to the system's.
    #[serde(default)]
    pub gamma_2_hz: Option<f64>,
    #[serde(default)]
    pub noise: NoiseChoice,
    #[serde(default)]
    pub reflection_mode: ReflectionMode,
    /// Noise levels used as fit weights for measured data.
    #[serde(default = "d_rel")]
    pub spectrum_relative_noise: f64,
    #[serde(default)]
    pub reflection_sigma: Option<f64>,
    #[serde(default)]
    pub power_sigma_w: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Profile {
    Flat {
        n_th: f64,
    },
    Step {
        below: f64,
        above: f64,
        at_hz: f64,
    },
    Gaussian {
        base: f64,
        peak: f64,
        center_hz: f64,
        width_hz: f64,
    },
}

impl Profile {
    pub fn eval(&self, f: f64) -> f64 {
        match *self {
            Profile::Flat { n_th } => n_th,
            Profile::Step {
                below,
                above,
                at_hz,
            } => {
                if f < at_hz {
                    below
                } else {
                    above
                }
            }
            Profile::Gaussian {
                base,
                peak,
                center_hz,
                width_hz,
            } => base + (peak - base) * (-0.5 * ((f - center_hz) / width_hz).powi(2)).exp(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrometerParams {
    #[serde(default = "d_sgr")]
    pub gamma_r_hz: f64,
    #[serde(default)]
    pub gamma_n_hz: f64,
    #[serde(default)]
    pub gamma_phi_hz: f64,
    /// Detection-line occupation; defaults to the system's n_r.
    #[serde(default)]
    pub n_r: Option<f64>,
    pub profile: Profile,
    pub f_start_hz: f64,
    pub f_stop_hz: f64,
    #[serde(default = "d_points101")]
    pub points: usize,
    #[serde(default)]
    pub noise_rel: f64,
    #[serde(default = "d_points201")]
    pub line_points: usize,
}

#[derive(Debug, Clone)]
pub enum Params {
    Spectrum(SpectrumParams),
    Reflection(ReflectionParams),
    PowerLoss(SweepParams),
    Budget(SweepParams),
    Autler(AutlerParams),
    Qp(QpParams),
    Welch(WelchParams),
    Fit(FitParams),
    Table1(Table1Params),
    Spectrometer(SpectrometerParams),
}

/// Config with every default filled in; this is what sidecars record.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub scenario: Scenario,
    pub system: SystemFile,
    pub seed: u64,
    pub prefix: String,
    pub params: Params,
}

fn parse<P: DeserializeOwned>(scenario: Scenario, v: &Value) -> Result<P, Failure> {
    let v = if v.is_null() {
        Value::Object(Default::default())
    } else {
        v.clone()
    };
    serde_json::from_value(v)
        .map_err(|e| Failure::Config(format!("params for `{}`: {e}", scenario.name())))
}

impl Resolved {
    pub fn from_json(text: &str, seed_override: Option<u64>) -> Result<Self, Failure> {
        let file: RunConfig =
            serde_json::from_str(text).map_err(|e| Failure::Config(format!("config: {e}")))?;
        Self::from_file(file, seed_override)
    }

    pub fn from_file(file: RunConfig, seed_override: Option<u64>) -> Result<Self, Failure> {
        let s = file.scenario;
        let p = &file.params;
        let params = match s {
            Scenario::Spectrum => Params::Spectrum(parse(s, p)?),
            Scenario::Reflection => Params::Reflection(parse(s, p)?),
            Scenario::PowerLoss => Params::PowerLoss(parse(s, p)?),
            Scenario::Budget => Params::Budget(parse(s, p)?),
            Scenario::Autler => Params::Autler(parse(s, p)?),
            Scenario::Qp => Params::Qp(parse(s, p)?),
            Scenario::Welch => Params::Welch(parse(s, p)?),
            Scenario::Fit => Params::Fit(parse(s, p)?),
            Scenario::Table1 => Params::Table1(parse(s, p)?),
            Scenario::Spectrometer => Params::Spectrometer(parse(s, p)?),
        };
        let prefix = file.output_prefix.unwrap_or_else(|| s.name().to_string());
        if prefix.is_empty() || prefix.contains(['/', '\\']) {
            return Err(Failure::Config(
                "output_prefix must be a plain file name".into(),
            ));
        }
        Ok(Self {
            scenario: s,
            system: file.system.unwrap_or_else(SystemFile::table1),
            seed: seed_override.or(file.seed).unwrap_or(0),
            prefix,
            params,
        })
    }

    pub fn params_value(&self) -> Value {
        let v = match &self.params {
            Params::Spectrum(p) => serde_json::to_value(p),
            Params::Reflection(p) => serde_json::to_value(p),
            Params::PowerLoss(p) | Params::Budget(p) => serde_json::to_value(p),
            Params::Autler(p) => serde_json::to_value(p),
            Params::Qp(p) => serde_json::to_value(p),
            Params::Welch(p) => serde_json::to_value(p),
            Params::Fit(p) => serde_json::to_value(p),
            Params::Table1(p) => serde_json::to_value(p),
            Params::Spectrometer(p) => serde_json::to_value(p),
        };
        v.expect("parameter structs serialize")
    }

    /// The full resolved config as a [`RunConfig`] value.
    pub fn to_value(&self) -> Value {
        serde_json::to_value(RunConfig {
            scenario: self.scenario,
            system: Some(self.system.clone()),
            seed: Some(self.seed),
            output_prefix: Some(self.prefix.clone()),
            params: self.params_value(),
        })
        .expect("config serializes")
    }
}

fn d_true() -> bool {
    true
}
fn d_one() -> f64 {
    1.0
}
fn d_one_usize() -> usize {
    1
}
fn d_half() -> f64 {
    0.5
}
fn d_rel() -> f64 {
    0.05
}
fn d_fs() -> f64 {
    3e6
}
fn d_span4() -> f64 {
    4e6
}
fn d_span15() -> f64 {
    1.5e6
}
fn d_span10m() -> f64 {
    10e6
}
fn d_rabi10m() -> f64 {
    10e6
}
fn d_rabi_min() -> f64 {
    1e4
}
fn d_rabi_max() -> f64 {
    1e7
}
fn d_sgr() -> f64 {
    1e6
}
fn d_points61() -> usize {
    61
}
fn d_points101() -> usize {
    101
}
fn d_points201() -> usize {
    201
}
fn d_points301() -> usize {
    301
}
fn d_points801() -> usize {
    801
}
fn d_points2001() -> usize {
    2001
}
