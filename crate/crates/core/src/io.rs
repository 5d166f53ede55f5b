//! File formats. Files carry SI units with explicit `_hz`/`_mk` suffixes and
//! no hidden 2π: a rate stored as `gamma_hz` is Γ/2π.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::TimeSeries;
use crate::lindblad::CorrelationTrace;
use crate::model::{
    occupation_from_temperature, BathLabel, BathSpec, BathStatistics, DriveSpec, QuasiparticleSpec,
    SystemConfig, Transition, TransitionOccupations, TransmonSpec,
};
use crate::scalar::{hz_to_rad, lit, rad_to_hz, Real, C, E_CHARGE};
use crate::spectrometer::SweepPoint;
use crate::spectrum::Spectrum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatisticsFile {
    #[default]
    Bosonic,
    Tls,
}

impl From<StatisticsFile> for BathStatistics {
    fn from(s: StatisticsFile) -> Self {
        match s {
            StatisticsFile::Bosonic => BathStatistics::Bosonic,
            StatisticsFile::Tls => BathStatistics::Tls,
        }
    }
}

impl From<BathStatistics> for StatisticsFile {
    fn from(s: BathStatistics) -> Self {
        match s {
            BathStatistics::Bosonic => StatisticsFile::Bosonic,
            BathStatistics::Tls => StatisticsFile::Tls,
        }
    }
}

/// A bath given by occupation or by temperature (exactly one).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathFile {
    pub gamma_hz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub occupation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature_mk: Option<f64>,
    #[serde(default)]
    pub statistics: StatisticsFile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransitionFile {
    #[serde(rename = "01")]
    T01,
    #[serde(rename = "12")]
    T12,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveFile {
    pub transition: TransitionFile,
    #[serde(default)]
    pub detuning_hz: f64,
    /// Ω/2π.
    pub rabi_hz: f64,
    #[serde(default)]
    pub phase_rad: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuasiparticleFile {
    pub gamma_up_hz: f64,
    pub gamma_down_hz: f64,
    #[serde(default = "default_gap")]
    pub gap_uev: f64,
    #[serde(default = "default_rn")]
    pub r_n_ohm: f64,
    #[serde(default = "default_cap")]
    pub capacitance_ff: f64,
}

fn default_gap() -> f64 {
    170.0
}
fn default_rn() -> f64 {
    6.3e3
}
fn default_cap() -> f64 {
    78.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Occupations12File {
    pub radiative: f64,
    pub nonradiative: f64,
}

/// JSON form of [`SystemConfig`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub omega01_hz: f64,
    #[serde(default = "default_anharmonicity")]
    pub anharmonicity_hz: f64,
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default)]
    pub gamma_phi_hz: f64,
    pub radiative: BathFile,
    pub nonradiative: BathFile,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub drives: Vec<DriveFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quasiparticles: Option<QuasiparticleFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub occupations_12: Option<Occupations12File>,
}

fn default_anharmonicity() -> f64 {
    -250e6
}
fn default_levels() -> usize {
    2
}

impl SystemFile {
    pub fn table1() -> Self {
        Self::from_model(&SystemConfig::<f64>::table1())
    }

    pub fn from_model<T: Real>(c: &SystemConfig<T>) -> Self {
        let bath = |b: &BathSpec<T>| BathFile {
            gamma_hz: rad_to_hz(b.gamma).as_f64(),
            occupation: Some(b.occupation.as_f64()),
            temperature_mk: None,
            statistics: b.statistics.into(),
        };
        Self {
            omega01_hz: rad_to_hz(c.transmon.omega01).as_f64(),
            anharmonicity_hz: rad_to_hz(c.transmon.anharmonicity).as_f64(),
            levels: c.transmon.levels,
            gamma_phi_hz: rad_to_hz(c.transmon.gamma_phi).as_f64(),
            radiative: bath(&c.radiative),
            nonradiative: bath(&c.nonradiative),
            drives: c
                .drives
                .iter()
                .map(|d| DriveFile {
                    transition: match d.transition {
                        Transition::T01 => TransitionFile::T01,
                        Transition::T12 => TransitionFile::T12,
                    },
                    detuning_hz: rad_to_hz(d.detuning).as_f64(),
                    rabi_hz: rad_to_hz(d.amplitude.norm()).as_f64(),
                    phase_rad: d.amplitude.arg().as_f64(),
                })
                .collect(),
            quasiparticles: c.quasiparticles.map(|q| QuasiparticleFile {
                gamma_up_hz: rad_to_hz(q.gamma_up).as_f64(),
                gamma_down_hz: rad_to_hz(q.gamma_down).as_f64(),
                gap_uev: q.gap.as_f64() / E_CHARGE * 1e6,
                r_n_ohm: q.r_n.as_f64(),
                capacitance_ff: q.capacitance.as_f64() * 1e15,
            }),
            occupations_12: c.occupations_12.map(|o| Occupations12File {
                radiative: o.radiative.as_f64(),
                nonradiative: o.nonradiative.as_f64(),
            }),
        }
    }

    /// Converts to the model in rad/s and validates it.
    pub fn to_model<T: Real>(&self) -> Result<SystemConfig<T>> {
        let omega01 = hz_to_rad(lit::<T>(self.omega01_hz));
        let bath = |b: &BathFile, label: BathLabel, name: &'static str| -> Result<BathSpec<T>> {
            let stats: BathStatistics = b.statistics.into();
            let occupation = match (b.occupation, b.temperature_mk) {
                (Some(n), None) => lit(n),
                (None, Some(t)) => occupation_from_temperature(lit(t * 1e-3), omega01, stats)?,
                _ => {
                    return Err(Error::param(
                        name,
                        "give exactly one of occupation, temperature_mk",
                    ))
                }
            };
            Ok(BathSpec::new(
                label,
                hz_to_rad(lit(b.gamma_hz)),
                occupation,
                stats,
            ))
        };
        let mut c = SystemConfig::new(
            TransmonSpec {
                omega01,
                anharmonicity: hz_to_rad(lit(self.anharmonicity_hz)),
                levels: self.levels,
                gamma_phi: hz_to_rad(lit(self.gamma_phi_hz)),
            },
            bath(&self.radiative, BathLabel::Radiative, "radiative")?,
            bath(&self.nonradiative, BathLabel::Nonradiative, "nonradiative")?,
        );
        c.drives = self
            .drives
            .iter()
            .map(|d| {
                let transition = match d.transition {
                    TransitionFile::T01 => Transition::T01,
                    TransitionFile::T12 => Transition::T12,
                };
                let amp = C::from_polar(hz_to_rad(lit::<T>(d.rabi_hz)), lit(d.phase_rad));
                DriveSpec::new(transition, hz_to_rad(lit(d.detuning_hz)), amp)
            })
            .collect();
        c.quasiparticles = self.quasiparticles.as_ref().map(|q| QuasiparticleSpec {
            gamma_up: hz_to_rad(lit(q.gamma_up_hz)),
            gamma_down: hz_to_rad(lit(q.gamma_down_hz)),
            gap: lit(q.gap_uev * 1e-6 * E_CHARGE),
            r_n: lit(q.r_n_ohm),
            capacitance: lit(q.capacitance_ff * 1e-15),
        });
        c.occupations_12 = self.occupations_12.as_ref().map(|o| TransitionOccupations {
            radiative: lit(o.radiative),
            nonradiative: lit(o.nonradiative),
        });
        c.validate()?;
        Ok(c)
    }
}

/// Sidecar of a raw little-endian f64 sample stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSidecar {
    pub sample_rate_hz: f64,
    pub gain: f64,
}

fn writer<W: Write>(w: W, header: &[&str]) -> Result<csv::Writer<W>> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    Ok(out)
}

fn rows<R: Read>(r: R, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut rd = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(r);
    let got: Vec<String> = rd.headers()?.iter().map(str::to_owned).collect();
    if got != header {
        return Err(Error::Parse(format!(
            "expected header {}, found {}",
            header.join(","),
            got.join(",")
        )));
    }
    rd.records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec?;
            rec.iter()
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|e| Error::Parse(format!("row {}: `{f}`: {e}", i + 1)))
                })
                .collect()
        })
        .collect()
}

fn flush<W: Write>(mut w: csv::Writer<W>) -> Result<()> {
    w.flush()?;
    Ok(())
}

pub const SPECTRUM_HEADER: [&str; 2] = ["freq_hz", "psd_w_per_hz"];
pub const REFLECTION_HEADER: [&str; 3] = ["delta_hz", "re", "im"];
pub const POWER_HEADER: [&str; 2] = ["rabi_hz", "watts"];
pub const TIMESERIES_HEADER: [&str; 2] = ["t_s", "volts"];
pub const PROFILE_HEADER: [&str; 2] = ["omega01_hz", "delta_n"];
pub const CORRELATION_HEADER: [&str; 3] = ["t_s", "re", "im"];

/// `freq_hz,psd_w_per_hz`, values in the 2πS convention (∫ dν = power).
pub fn write_spectrum<T: Real, W: Write>(w: W, s: &Spectrum<T>) -> Result<()> {
    let mut out = writer(w, &SPECTRUM_HEADER)?;
    for (f, v) in s.freqs().iter().zip(s.values()) {
        out.serialize((f.as_f64(), v.as_f64()))?;
    }
    flush(out)
}

pub fn read_spectrum<T: Real, R: Read>(r: R) -> Result<Spectrum<T>> {
    let rows = rows(r, &SPECTRUM_HEADER)?;
    Spectrum::new(
        rows.iter().map(|x| lit(x[0])).collect(),
        rows.iter().map(|x| lit(x[1])).collect(),
    )
}

/// `delta_hz,re,im`.
pub fn write_reflection<T: Real, W: Write>(w: W, trace: &[(T, C<T>)]) -> Result<()> {
    let mut out = writer(w, &REFLECTION_HEADER)?;
    for (d, r) in trace {
        out.serialize((d.as_f64(), r.re.as_f64(), r.im.as_f64()))?;
    }
    flush(out)
}

pub fn read_reflection<T: Real, R: Read>(r: R) -> Result<Vec<(T, C<T>)>> {
    Ok(rows(r, &REFLECTION_HEADER)?
        .into_iter()
        .map(|x| (lit(x[0]), C::new(lit(x[1]), lit(x[2]))))
        .collect())
}

/// `rabi_hz,watts` from points (Ω in rad/s, W).
pub fn write_power_loss<T: Real, W: Write>(w: W, points: &[(T, T)]) -> Result<()> {
    let mut out = writer(w, &POWER_HEADER)?;
    for (o, p) in points {
        out.serialize((rad_to_hz(*o).as_f64(), p.as_f64()))?;
    }
    flush(out)
}

/// Points as (Ω in rad/s, W).
pub fn read_power_loss<T: Real, R: Read>(r: R) -> Result<Vec<(T, T)>> {
    Ok(rows(r, &POWER_HEADER)?
        .into_iter()
        .map(|x| (hz_to_rad(lit(x[0])), lit(x[1])))
        .collect())
}

/// `t_s,volts`.
pub fn write_timeseries_csv<T: Real, W: Write>(w: W, ts: &TimeSeries<T>) -> Result<()> {
    let mut out = writer(w, &TIMESERIES_HEADER)?;
    let dt = T::one() / ts.sample_rate();
    for (k, v) in ts.samples().iter().enumerate() {
        out.serialize(((T::from_usize(k).unwrap() * dt).as_f64(), v.as_f64()))?;
    }
    flush(out)
}

/// Reads `t_s,volts`; the sample rate comes from the mean spacing.
pub fn read_timeseries_csv<T: Real, R: Read>(r: R, gain: T) -> Result<TimeSeries<T>> {
    let rows = rows(r, &TIMESERIES_HEADER)?;
    if rows.len() < 2 {
        return Err(Error::TooShort(
            "time series needs at least two samples".into(),
        ));
    }
    let span = rows[rows.len() - 1][0] - rows[0][0];
    let fs = (rows.len() - 1) as f64 / span;
    TimeSeries::new(lit(fs), rows.iter().map(|x| lit(x[1])).collect(), gain)
}

/// Raw little-endian f64 samples plus the JSON sidecar.
pub fn write_timeseries_raw<T: Real, W: Write>(mut w: W, ts: &TimeSeries<T>) -> Result<RawSidecar> {
    let mut buf = Vec::with_capacity(8 * ts.len());
    for v in ts.samples() {
        buf.extend_from_slice(&v.as_f64().to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(RawSidecar {
        sample_rate_hz: ts.sample_rate().as_f64(),
        gain: ts.gain().as_f64(),
    })
}

pub fn read_timeseries_raw<T: Real, R: Read>(
    mut r: R,
    sidecar: &RawSidecar,
) -> Result<TimeSeries<T>> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    if buf.len() % 8 != 0 {
        return Err(Error::Parse(format!(
            "raw stream of {} bytes is not a whole number of f64",
            buf.len()
        )));
    }
    let samples = buf
        .chunks_exact(8)
        .map(|c| lit(f64::from_le_bytes(c.try_into().unwrap())))
        .collect();
    TimeSeries::new(lit(sidecar.sample_rate_hz), samples, lit(sidecar.gain))
}

/// `omega01_hz,delta_n`.
pub fn write_profile<T: Real, W: Write>(w: W, points: &[SweepPoint<T>]) -> Result<()> {
    let mut out = writer(w, &PROFILE_HEADER)?;
    for p in points {
        out.serialize((p.omega01_hz.as_f64(), p.delta_n.as_f64()))?;
    }
    flush(out)
}

/// `t_s,re,im`.
pub fn write_correlation<T: Real, W: Write>(w: W, trace: &CorrelationTrace<T>) -> Result<()> {
    let mut out = writer(w, &CORRELATION_HEADER)?;
    for (t, v) in trace.times.iter().zip(&trace.values) {
        out.serialize((t.as_f64(), v.re.as_f64(), v.im.as_f64()))?;
    }
    flush(out)
}

/// Arbitrary numeric table with the given header.
pub fn write_table<W: Write>(w: W, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut out = writer(w, header)?;
    for r in rows {
        if r.len() != header.len() {
            return Err(Error::param("rows", "row length differs from header"));
        }
        out.serialize(r)?;
    }
    flush(out)
}
