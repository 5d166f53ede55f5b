//! Scenario checks and execution.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde_json::json;

use twobath::fit::{
    default_segment_len, fit_lorentzian_with, fit_mollow_with, fit_power_loss_with,
    fit_reflection_with, fit_table1, fit_thermal_with, surrogate_timeseries, synth_table1,
    thermal_power_from_fit, welch_psd, LineFitOptions, NoiseLevels, PowerLossFixed,
    RadiativeOccupation, SynthGrids, Table1Data, Table1FitOptions, TimeSeries, Weights,
};
use twobath::io::{self, RawSidecar};
use twobath::lindblad::{output_intensity_numeric, output_psd_numeric, psd_grid_check};
use twobath::model::{
    DerivedRates, DriveSpec, QuasiparticleSpec, SystemConfig, ThreeLevelRates, Transition,
};
use twobath::observables::{
    autler_sidepeaks, heat_rates, mollow_center_psd, mollow_center_three_level, power_loss,
    power_loss_zero_crossing, qp_gamma_down, qp_power_loss, qp_thermal_rate,
    reflection_three_level, reflection_two_level, thermal_psd, thermal_psd_three_level,
};
use twobath::scalar::{hz_to_rad, photon_energy, rad_to_hz, C};
use twobath::spectrometer::{sweep_spectrometer, SpectrometerConfig, SweepOptions};
use twobath::spectrum::{centered_grid, linspace, logspace, Spectrum};

use crate::config::{FitKind, NoiseChoice, Params, Resolved, Scenario};
use crate::failure::Failure;
use crate::output::Outputs;

/// Rabi rates below this multiple of Γ1 are not in the strong-drive regime
/// the driven-spectrum formulas assume.
const STRONG_DRIVE: f64 = 30.0;
/// Rabi rates below this fraction of Γ2 count as a weak probe.
const WEAK_PROBE: f64 = 0.1;

fn cfg_err(m: impl Into<String>) -> Failure {
    Failure::Config(m.into())
}

fn require_file(path: &str) -> Result<(), Failure> {
    if Path::new(path).is_file() {
        Ok(())
    } else {
        Err(Failure::Io(format!(
            "input `{path}` is not a readable file"
        )))
    }
}

fn open(path: &str) -> Result<fs::File, Failure> {
    fs::File::open(path).map_err(|e| Failure::Io(format!("{path}: {e}")))
}

/// Schema and regime checks without computation. Returns regime notes.
pub fn check(r: &Resolved) -> Result<Vec<String>, Failure> {
    let sys: SystemConfig<f64> = r.system.to_model()?;
    let rates = sys.rates();
    let g1_hz = rad_to_hz(rates.gamma_1);
    let g2_hz = rad_to_hz(rates.gamma_2);
    let mut notes = vec![format!(
        "rates: Γ1/2π = {g1_hz:.4e} Hz, Γ2/2π = {g2_hz:.4e} Hz, ρ11 = {:.4}",
        rates.rho11_thermal()
    )];
    if rates.gamma_r < 2.0 * rates.gamma_n {
        notes.push("warning: Γr < 2Γn, the drive-on line is nonradiatively limited".into());
    }
    let strong = |what: &str, rabi_hz: f64, notes: &mut Vec<String>| {
        if rabi_hz < STRONG_DRIVE * g1_hz {
            notes.push(format!(
                "warning: {what} Ω/2π = {rabi_hz:.4e} Hz is not a strong drive (needs Ω ≥ {STRONG_DRIVE}Γ1, {:.4e} Hz)",
                STRONG_DRIVE * g1_hz
            ));
        }
    };
    for d in &r.system.drives {
        let kind = if d.rabi_hz < WEAK_PROBE * g2_hz {
            "weak probe"
        } else if d.rabi_hz >= STRONG_DRIVE * g1_hz {
            "strong drive"
        } else {
            "intermediate drive"
        };
        notes.push(format!(
            "drive {:?} at Ω/2π = {:.4e} Hz: {kind}",
            d.transition, d.rabi_hz
        ));
        if kind == "intermediate drive" {
            strong("drive", d.rabi_hz, &mut notes);
        }
    }
    let positive = |name: &str, v: f64| {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(cfg_err(format!("{name} must be positive")))
        }
    };
    let min_points = |name: &str, n: usize, min: usize| {
        if n >= min {
            Ok(())
        } else {
            Err(cfg_err(format!("{name} must be at least {min}")))
        }
    };
    match &r.params {
        Params::Spectrum(p) => {
            positive("half_span_hz", p.half_span_hz)?;
            min_points("points", p.points, 3)?;
            positive("rabi_hz", p.rabi_hz)?;
            strong("spectrum", p.rabi_hz, &mut notes);
            if p.numeric {
                let f0 = rad_to_hz(sys.transmon.omega01);
                psd_grid_check(&sys, &centered_grid(f0, p.half_span_hz, p.points))?;
            }
        }
        Params::Reflection(p) => {
            positive("half_span_hz", p.half_span_hz)?;
            min_points("points", p.points, 2)?;
        }
        Params::PowerLoss(p) | Params::Budget(p) => {
            positive("rabi_min_hz", p.rabi_min_hz)?;
            if !(p.rabi_max_hz > p.rabi_min_hz) {
                return Err(cfg_err("rabi_max_hz must exceed rabi_min_hz"));
            }
            min_points("points", p.points, 2)?;
            if sys.transmon.levels != 2 {
                return Err(cfg_err("power-loss and budget scenarios need levels = 2"));
            }
        }
        Params::Autler(p) => {
            positive("rabi12_hz", p.rabi12_hz)?;
            positive("half_span_hz", p.half_span_hz)?;
            min_points("points", p.points, 3)?;
            strong("1-2", p.rabi12_hz, &mut notes);
            let reach = p.rabi12_hz / 2f64.sqrt() + 10.0 * g2_hz;
            if p.half_span_hz < reach {
                notes.push(format!(
                    "warning: grid ±{:.3e} Hz clips the side peaks (need ±{reach:.3e})",
                    p.half_span_hz
                ));
            }
        }
        Params::Qp(p) => {
            if let Some(t) = p.temperature_mk {
                positive("temperature_mk", t)?;
            }
            if let Some(x) = p.rho11_qp {
                if !(0.0..0.5).contains(&x) {
                    return Err(cfg_err("rho11_qp must lie in [0, 1/2)"));
                }
            }
        }
        Params::Welch(p) => {
            if !(0.0..1.0).contains(&p.overlap) {
                return Err(cfg_err("overlap must lie in [0, 1)"));
            }
            positive("gain", p.gain)?;
            if let Some(n) = p.segment_len {
                min_points("segment_len", n, 2)?;
            }
            match &p.input {
                Some(path) => require_file(path)?,
                None => {
                    positive("duration_s", p.duration_s)?;
                    positive("sample_rate_hz", p.sample_rate_hz)?;
                    if p.sample_rate_hz <= 10.0 * g2_hz {
                        return Err(cfg_err(format!(
                            "sample_rate_hz {:.3e} undersamples the line (needs > 10Γ2/2π = {:.3e})",
                            p.sample_rate_hz,
                            10.0 * g2_hz
                        )));
                    }
                }
            }
            if let Some(b) = &p.background {
                require_file(b)?;
            }
        }
        Params::Fit(p) => {
            if p.relative_noise.is_some() && p.sigma.is_some() {
                return Err(cfg_err("give at most one of relative_noise, sigma"));
            }
            if !(1..=2).contains(&p.peaks) {
                return Err(cfg_err("peaks must be 1 or 2"));
            }
            require_file(&p.input)?;
        }
        Params::Table1(p) => {
            let given = [&p.mollow, &p.reflection, &p.power_loss];
            match given.iter().filter(|x| x.is_some()).count() {
                0 => notes.push("table1: synthetic inputs from the system config".into()),
                3 => {
                    for path in given.into_iter().flatten() {
                        require_file(path)?;
                    }
                }
                _ => {
                    return Err(cfg_err(
                        "table1 needs all of mollow, reflection, power_loss or none",
                    ))
                }
            }
        }
        Params::Spectrometer(p) => {
            let cfg = spectrometer_config(r, &sys)?;
            cfg.validate()?;
            notes.extend(cfg.warnings().into_iter().map(|w| format!("warning: {w}")));
            if !(p.f_stop_hz > p.f_start_hz) || !(p.f_start_hz > 0.0) {
                return Err(cfg_err("need 0 < f_start_hz < f_stop_hz"));
            }
            min_points("points", p.points, 1)?;
            min_points("line_points", p.line_points, 3)?;
            if !(p.noise_rel >= 0.0) {
                return Err(cfg_err("noise_rel must be nonnegative"));
            }
        }
    }
    Ok(notes)
}

fn spectrometer_config(
    r: &Resolved,
    sys: &SystemConfig<f64>,
) -> Result<SpectrometerConfig<f64>, Failure> {
    let Params::Spectrometer(p) = &r.params else {
        return Err(cfg_err("not a spectrometer config"));
    };
    Ok(SpectrometerConfig {
        gamma_r: hz_to_rad(p.gamma_r_hz),
        gamma_n: hz_to_rad(p.gamma_n_hz),
        gamma_phi: hz_to_rad(p.gamma_phi_hz),
        n_th: p.profile.eval(0.5 * (p.f_start_hz + p.f_stop_hz)),
        n_r: p.n_r.unwrap_or(sys.radiative.occupation),
        omega01: sys.transmon.omega01,
    })
}

/// Scenarios a subcommand accepts.
pub fn accepts(command: &str, s: Scenario) -> bool {
    match command {
        "simulate" => matches!(
            s,
            Scenario::Spectrum
                | Scenario::Reflection
                | Scenario::PowerLoss
                | Scenario::Budget
                | Scenario::Autler
                | Scenario::Qp
        ),
        "welch" => s == Scenario::Welch,
        "fit" => s == Scenario::Fit,
        "table1" => s == Scenario::Table1,
        "spectrometer" => s == Scenario::Spectrometer,
        _ => true,
    }
}

pub fn execute(r: &Resolved, out: &mut Outputs) -> Result<(), Failure> {
    let sys: SystemConfig<f64> = r.system.to_model()?;
    let base = sys.clone().without_drives();
    let w01 = sys.transmon.omega01;
    let f0 = rad_to_hz(w01);
    let pre = &r.prefix;
    match &r.params {
        Params::Spectrum(p) => {
            let f = centered_grid(f0, p.half_span_hz, p.points);
            let (thermal, mollow) = if sys.transmon.levels == 3 {
                let t = ThreeLevelRates::from_config(&base);
                (
                    thermal_psd_three_level(&f, &t, w01)?,
                    mollow_center_three_level(&f, &t, w01)?,
                )
            } else {
                let rates = base.rates();
                (
                    thermal_psd(&f, &rates, w01)?,
                    mollow_center_psd(&f, &rates, w01)?,
                )
            };
            out.csv(&format!("{pre}_thermal.csv"), |w| {
                io::write_spectrum(w, &thermal)
            })?;
            out.csv(&format!("{pre}_mollow.csv"), |w| {
                io::write_spectrum(w, &mollow)
            })?;
            if p.numeric {
                let driven = base.clone().with_drive(DriveSpec::real(
                    Transition::T01,
                    0.0,
                    hz_to_rad(p.rabi_hz),
                ));
                let th = output_psd_numeric(&base, &f)?;
                let on = output_psd_numeric(&driven, &f)?;
                out.csv(&format!("{pre}_thermal_numeric.csv"), |w| {
                    io::write_spectrum(w, &th)
                })?;
                out.csv(&format!("{pre}_mollow_numeric.csv"), |w| {
                    io::write_spectrum(w, &on)
                })?;
            }
        }
        Params::Reflection(p) => {
            let d = centered_grid(0.0, p.half_span_hz, p.points);
            let trace: Vec<(f64, C<f64>)> = if sys.transmon.levels == 3 {
                let t = ThreeLevelRates::from_config(&base);
                d.iter()
                    .map(|&x| Ok((x, reflection_three_level(hz_to_rad(x), &t)?)))
                    .collect::<twobath::Result<_>>()?
            } else {
                let rates = base.rates();
                d.iter()
                    .map(|&x| Ok((x, reflection_two_level(hz_to_rad(x), &rates)?)))
                    .collect::<twobath::Result<_>>()?
            };
            out.csv(&format!("{pre}.csv"), |w| io::write_reflection(w, &trace))?;
        }
        Params::PowerLoss(p) => {
            let rates = base.rates();
            let omegas: Vec<f64> = logspace(p.rabi_min_hz, p.rabi_max_hz, p.points)
                .into_iter()
                .map(hz_to_rad)
                .collect();
            let pts: Vec<(f64, f64)> = omegas
                .iter()
                .map(|&o| (o, power_loss(o, &rates, w01)))
                .collect();
            out.csv(&format!("{pre}.csv"), |w| io::write_power_loss(w, &pts))?;
            if p.numeric {
                let num: Vec<(f64, f64)> = omegas
                    .par_iter()
                    .map(|&o| {
                        let c = base
                            .clone()
                            .with_drive(DriveSpec::real(Transition::T01, 0.0, o));
                        Ok((o, output_intensity_numeric(&c)?))
                    })
                    .collect::<twobath::Result<_>>()?;
                out.csv(&format!("{pre}_numeric.csv"), |w| {
                    io::write_power_loss(w, &num)
                })?;
            }
            let summary = json!({
                "zero_crossing_hz": power_loss_zero_crossing(&rates).map(rad_to_hz),
                "p_loss_at_zero_w": power_loss(0.0, &rates, w01),
                "p_loss_saturated_w": photon_energy(w01) * rates.gamma_n / 2.0,
            });
            out.json(&format!("{pre}_summary.json"), &summary)?;
        }
        Params::Budget(p) => {
            let rates = base.rates();
            let rows: Vec<Vec<f64>> = logspace(p.rabi_min_hz, p.rabi_max_hz, p.points)
                .into_iter()
                .map(|f| {
                    let b = heat_rates(C::new(hz_to_rad(f), 0.0), 0.0, &rates, w01);
                    vec![f, b.p_loss, b.w_dot, b.q_dot_r, b.q_dot_n, b.u_dot]
                })
                .collect();
            let header = [
                "rabi_hz",
                "p_loss_w",
                "w_dot_w",
                "q_dot_r_w",
                "q_dot_n_w",
                "u_dot_w",
            ];
            out.csv(&format!("{pre}.csv"), |w| {
                io::write_table(w, &header, &rows)
            })?;
        }
        Params::Autler(p) => {
            let three = base.clone().with_levels(3);
            let f = centered_grid(f0, p.half_span_hz, p.points);
            let on = three.clone().with_drive(DriveSpec::real(
                Transition::T12,
                0.0,
                hz_to_rad(p.rabi12_hz),
            ));
            let diff = output_psd_numeric(&on, &f)?.difference(&output_psd_numeric(&three, &f)?)?;
            let side = autler_sidepeaks(
                &f,
                &ThreeLevelRates::from_config(&three),
                hz_to_rad(p.rabi12_hz),
                w01,
            )?;
            out.csv(&format!("{pre}_difference.csv"), |w| {
                io::write_spectrum(w, &diff)
            })?;
            out.csv(&format!("{pre}_sidepeaks.csv"), |w| {
                io::write_spectrum(w, &side)
            })?;
        }
        Params::Qp(p) => {
            let rates = base.rates();
            let qp = sys
                .quasiparticles
                .unwrap_or_else(|| QuasiparticleSpec::aluminium(0.0, 0.0));
            let temp = match p.temperature_mk {
                Some(t) => t * 1e-3,
                None => base.nonradiative.temperature(w01)?,
            };
            let rho = p.rho11_qp.unwrap_or_else(|| rates.rho11_thermal());
            let th = qp_thermal_rate(temp, qp.gap, w01)?;
            let implied = qp_gamma_down(rho, qp.r_n, qp.capacitance, qp.gap, w01)?;
            let summary = json!({
                "temperature_mk": temp * 1e3,
                "x_qp": th.x_qp,
                "gamma_qp_per_s": th.gamma_qp,
                "rho11_qp": rho,
                "gamma_down_hz": rad_to_hz(implied.gamma_down),
                "gamma_up_hz": rad_to_hz(implied.gamma_up),
                "p_loss_undriven_w": sys.quasiparticles.map(|q| qp_power_loss(&rates, &q, w01)),
            });
            out.json(&format!("{pre}.json"), &summary)?;
        }
        Params::Welch(p) => {
            let rates = base.rates();
            let ts = match &p.input {
                Some(path) => read_series(path, p.gain)?,
                None => surrogate_timeseries(&rates, w01, p.duration_s, p.sample_rate_hz, r.seed)?,
            };
            let lw = p.linewidth_hz.unwrap_or_else(|| rad_to_hz(rates.gamma_2));
            let seg = p
                .segment_len
                .unwrap_or_else(|| default_segment_len(ts.sample_rate(), lw, ts.len()));
            let mut psd = welch_psd(&ts, seg, p.overlap, p.window)?;
            if let Some(bg) = &p.background {
                let off = read_series(bg, p.gain)?;
                psd = psd.difference(&welch_psd(&off, seg, p.overlap, p.window)?)?;
            }
            out.csv(&format!("{pre}.csv"), |w| io::write_spectrum(w, &psd))?;
            if p.fit {
                let fit = fit_lorentzian_with(&psd, 1, &Weights::Uniform)?;
                let summary = json!({
                    "segment_len": seg,
                    "integrated_power_w": psd.integrate(),
                    "fit": fit,
                });
                out.json(&format!("{pre}_fit.json"), &summary)?;
            }
        }
        Params::Fit(p) => {
            let weights = |n: usize| match (p.relative_noise, p.sigma) {
                (Some(x), _) => Weights::Relative(x),
                (_, Some(s)) => Weights::Sigma(vec![s; n]),
                _ => Weights::Uniform,
            };
            let fit = match p.kind {
                FitKind::Lorentzian | FitKind::Thermal | FitKind::Mollow => {
                    let s: Spectrum<f64> = io::read_spectrum(open(&p.input)?)?;
                    let opts = LineFitOptions {
                        weights: weights(s.len()),
                        ..Default::default()
                    };
                    match p.kind {
                        FitKind::Lorentzian => fit_lorentzian_with(&s, p.peaks, &opts.weights)?,
                        FitKind::Thermal => fit_thermal_with(&s, &opts)?,
                        _ => fit_mollow_with(&s, &opts)?,
                    }
                }
                FitKind::Reflection => {
                    let trace = io::read_reflection(open(&p.input)?)?;
                    fit_reflection_with(&trace, p.mode, &weights(trace.len()))?
                }
                FitKind::PowerLoss => {
                    let pts = io::read_power_loss(open(&p.input)?)?;
                    let rates = base.rates();
                    let fixed = PowerLossFixed {
                        gamma_2: p.gamma_2_hz.map_or(rates.gamma_2, hz_to_rad),
                        gamma_r: p.gamma_r_hz.map_or(rates.gamma_r, hz_to_rad),
                        n_r: RadiativeOccupation::Known(p.n_r.unwrap_or(rates.n_r)),
                        omega01: w01,
                    };
                    fit_power_loss_with(&pts, fixed, &weights(pts.len()))?
                }
            };
            if p.kind == FitKind::Thermal {
                let (pw, sp) = thermal_power_from_fit(&fit);
                out.json(
                    &format!("{pre}.json"),
                    &json!({"fit": fit, "thermal_power_w": pw, "thermal_power_sigma_w": sp}),
                )?;
            } else {
                out.json(&format!("{pre}.json"), &json!({ "fit": fit }))?;
            }
        }
        Params::Table1(p) => {
            let rates = base.rates();
            let (data, opts) = match (&p.mollow, &p.reflection, &p.power_loss) {
                (Some(m), Some(rf), Some(pl)) => {
                    let data = Table1Data {
                        mollow: io::read_spectrum(open(m)?)?,
                        reflection: io::read_reflection(open(rf)?)?,
                        power_loss: io::read_power_loss(open(pl)?)?,
                        omega01: w01,
                    };
                    let opts = Table1FitOptions {
                        mollow_weights: Weights::Relative(p.spectrum_relative_noise),
                        reflection_weights: p.reflection_sigma.map_or(Weights::Uniform, |s| {
                            Weights::Sigma(vec![s; data.reflection.len()])
                        }),
                        power_weights: p.power_sigma_w.map_or(Weights::Uniform, |s| {
                            Weights::Sigma(vec![s; data.power_loss.len()])
                        }),
                        reflection_mode: p.reflection_mode,
                    };
                    (data, opts)
                }
                _ => {
                    let truth = DerivedRates::from_linewidth(
                        rates.gamma_r,
                        rates.n_r,
                        rates.gamma_n,
                        rates.n_n,
                        p.gamma_2_hz.map_or(rates.gamma_2, hz_to_rad),
                    );
                    let noise = match p.noise {
                        NoiseChoice::Measured => NoiseLevels::measured(),
                        NoiseChoice::None => NoiseLevels::none(),
                    };
                    let grids = SynthGrids::default();
                    let data = synth_table1(&truth, w01, &grids, &noise, r.seed)?;
                    let noisy = noise.spectrum_rel > 0.0;
                    let opts = Table1FitOptions {
                        mollow_weights: if noisy {
                            Weights::Relative(noise.spectrum_rel)
                        } else {
                            Weights::Uniform
                        },
                        reflection_weights: if noisy {
                            Weights::Sigma(vec![noise.reflection_abs; grids.reflection_points])
                        } else {
                            Weights::Uniform
                        },
                        power_weights: if noisy {
                            Weights::Sigma(vec![noise.power_abs; grids.rabi_points])
                        } else {
                            Weights::Uniform
                        },
                        reflection_mode: p.reflection_mode,
                    };
                    out.csv(&format!("{pre}_mollow.csv"), |w| {
                        io::write_spectrum(w, &data.mollow)
                    })?;
                    out.csv(&format!("{pre}_reflection.csv"), |w| {
                        io::write_reflection(w, &data.reflection)
                    })?;
                    out.csv(&format!("{pre}_power_loss.csv"), |w| {
                        io::write_power_loss(w, &data.power_loss)
                    })?;
                    (data, opts)
                }
            };
            let fits = fit_table1(&data, &opts)?;
            out.json(&format!("{pre}.json"), &fits)?;
        }
        Params::Spectrometer(p) => {
            let cfg = spectrometer_config(r, &sys)?;
            let grid: Vec<f64> = linspace(p.f_start_hz, p.f_stop_hz, p.points)
                .into_iter()
                .map(hz_to_rad)
                .collect();
            let opts = SweepOptions {
                points: p.line_points,
                noise_rel: p.noise_rel,
                seed: r.seed,
                ..Default::default()
            };
            let profile = p.profile.clone();
            let pts = sweep_spectrometer(&cfg, &grid, move |f| profile.eval(f), &opts)?;
            out.csv(&format!("{pre}.csv"), |w| io::write_profile(w, &pts))?;
        }
    }
    Ok(())
}

fn read_series(path: &str, gain: f64) -> Result<TimeSeries<f64>, Failure> {
    if path.ends_with(".csv") {
        return Ok(io::read_timeseries_csv(open(path)?, gain)?);
    }
    let side_path = format!("{path}.json");
    let side: RawSidecar = serde_json::from_reader(open(&side_path)?)
        .map_err(|e| Failure::Io(format!("{side_path}: {e}")))?;
    Ok(io::read_timeseries_raw(open(path)?, &side)?)
}
