//! Statistical behaviour of the estimators on synthetic data.
//!
//! Seeds are fixed, so every run sees the same draws. Two-sigma hit counts
//! are checked against the nominal 95.45% coverage of a calibrated
//! estimator, allowing three binomial standard deviations either way: too
//! few hits means optimistic errors, too many means inflated ones.

use num_complex::Complex;
use rayon::prelude::*;

use twobath::fit::{
    fit_lorentzian, fit_lorentzian_with, fit_mollow, fit_mollow_with, fit_power_loss,
    fit_reflection_with, fit_thermal, fit_thermal_with, noisy_spectrum, surrogate_timeseries,
    synth_table1, synth_thermal, thermal_power_from_fit, welch_psd, LineFitOptions, NoiseLevels,
    PowerLossFixed, RadiativeOccupation, ReflectionMode, SynthGrids, Weights, Window,
};
use twobath::model::{DerivedRates, ThreeLevelRates};
use twobath::observables::{autler_sidepeaks, power_loss, reflection_two_level, thermal_psd};
use twobath::scalar::{hz_to_rad, rad_to_hz};
use twobath::spectrum::{centered_grid, linspace, logspace, Spectrum};

const F01: f64 = 5.5e9;
const ZW: f64 = 1e-21;

fn w01() -> f64 {
    hz_to_rad(F01)
}

fn measured() -> DerivedRates<f64> {
    DerivedRates::table1_measured()
}

/// Two-sigma hits of `hit` over seeds `first..first + n`, with the
/// binomial standard deviation of the rate expected at nominal coverage.
fn hit_rate(label: &str, first: u64, n: u64, hit: impl Fn(u64) -> bool + Sync) -> (f64, f64) {
    let k = (first..first + n)
        .into_par_iter()
        .filter(|&s| hit(s))
        .count();
    println!("{label}: {k}/{n} within 2σ");
    (
        k as f64 / n as f64,
        (NOMINAL * (1.0 - NOMINAL) / n as f64).sqrt(),
    )
}

const NOMINAL: f64 = 0.9545;

fn coverage(label: &str, first: u64, n: u64, hit: impl Fn(u64) -> bool + Sync) {
    let (rate, sd) = hit_rate(label, first, n, hit);
    assert!((rate - NOMINAL).abs() <= 3.0 * sd, "{label}: rate {rate}");
}

#[test]
fn lorentzian_width_coverage_at_five_percent() {
    let f = centered_grid(F01, 2e6, 401);
    let clean = thermal_psd(&f, &measured(), w01()).unwrap();
    coverage("Lorentzian width", 1000, 1000, |s| {
        let noisy = noisy_spectrum(&clean, 0.05, s).unwrap();
        let fit = fit_lorentzian_with(&noisy, 1, &Weights::Relative(0.05)).unwrap();
        (fit.get("hwhm_hz").unwrap() - 143e3).abs() <= 2.0 * fit.sigma("hwhm_hz").unwrap()
    });
}

#[test]
fn thermal_coefficient_and_power() {
    let grids = SynthGrids::default();
    let (ks, ps): (Vec<f64>, Vec<f64>) = (0..50u64)
        .into_par_iter()
        .map(|s| {
            let spec = synth_thermal(&measured(), w01(), &grids, 0.05, s).unwrap();
            let fit = fit_thermal(&spec).unwrap();
            assert!(fit.converged);
            (
                fit.get("coefficient_hz").unwrap(),
                thermal_power_from_fit(&fit).0,
            )
        })
        .unzip();
    for (k, p) in ks.iter().zip(&ps) {
        assert!((k - 5.6e3).abs() <= 0.2e3, "K = {k}");
        assert!((p - 132.0 * ZW).abs() <= 5.0 * ZW, "P = {p}");
    }
}

#[test]
fn no_population_difference_gives_null_amplitude() {
    let r = DerivedRates::from_linewidth(
        hz_to_rad(227e3),
        0.05,
        hz_to_rad(55e3),
        0.05,
        hz_to_rad(143e3),
    );
    let f = centered_grid(F01, 2e6, 401);
    let clean = thermal_psd(&f, &r, w01()).unwrap();
    assert!(clean.values().iter().all(|v| *v == 0.0));
    // Additive noise at 5% of the Table-type peak, width and centre held.
    let scale = 0.05 * thermal_psd(&[F01], &measured(), w01()).unwrap().values()[0];
    let opts = LineFitOptions {
        fixed_center_hz: Some(F01),
        fixed_width_hz: Some(143e3),
        ..Default::default()
    };
    coverage("null amplitude", 0, 1000, |s| {
        let unit = noisy_spectrum(
            &Spectrum::new(f.clone(), vec![1.0; f.len()]).unwrap(),
            1.0,
            s,
        )
        .unwrap();
        let values = unit.values().iter().map(|v| (v - 1.0) * scale).collect();
        let fit = fit_thermal_with(&Spectrum::new(f.clone(), values).unwrap(), &opts).unwrap();
        fit.get("coefficient_hz").unwrap().abs() <= 2.0 * fit.sigma("coefficient_hz").unwrap()
    });
}

#[test]
fn mollow_fit_recovers_quoted_rates() {
    let grids = SynthGrids::default();
    let noise = NoiseLevels::measured();
    let opts = LineFitOptions {
        weights: Weights::Relative(noise.spectrum_rel),
        ..Default::default()
    };
    for s in 0..50 {
        let data = synth_table1(&measured(), w01(), &grids, &noise, s).unwrap();
        let fit = fit_mollow_with(&data.mollow, &opts).unwrap();
        for (name, want) in [("gamma_r_hz", 227e3), ("gamma_2_hz", 143e3)] {
            let (v, e) = (fit.get(name).unwrap(), fit.sigma(name).unwrap());
            assert!(
                (v - want).abs() <= 4e3 && e <= 4e3,
                "seed {s}: {name} {v} ± {e}"
            );
        }
    }
}

#[test]
fn uniform_weights_understate_multiplicative_noise() {
    // Unweighted least squares assumes equal scatter everywhere; under
    // multiplicative noise the line centre is noisier than the tails, so the
    // reported width error comes out well below the true scatter.
    let grids = SynthGrids::default();
    let fits: Vec<(f64, f64)> = (0..200u64)
        .into_par_iter()
        .map(|s| {
            let data =
                synth_table1(&measured(), w01(), &grids, &NoiseLevels::measured(), s).unwrap();
            let fit = fit_mollow(&data.mollow).unwrap();
            (
                fit.get("gamma_2_hz").unwrap(),
                fit.sigma("gamma_2_hz").unwrap(),
            )
        })
        .collect();
    let n = fits.len() as f64;
    let mean = fits.iter().map(|f| f.0).sum::<f64>() / n;
    let scatter = (fits.iter().map(|f| (f.0 - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let reported = fits.iter().map(|f| f.1).sum::<f64>() / n;
    assert!(
        (mean - 143e3).abs() < 4.0 * scatter / n.sqrt(),
        "biased: {mean}"
    );
    assert!(scatter > 2.0 * reported, "{scatter} vs {reported}");
}

fn power_fixed(r: &DerivedRates<f64>) -> PowerLossFixed<f64> {
    PowerLossFixed {
        gamma_2: r.gamma_2,
        gamma_r: r.gamma_r,
        n_r: RadiativeOccupation::Known(r.n_r),
        omega01: w01(),
    }
}

fn power_points(r: &DerivedRates<f64>, noise: f64, seed: u64) -> Vec<(f64, f64)> {
    let clean: Vec<(f64, f64)> = logspace(hz_to_rad(1e4), hz_to_rad(1e7), 40)
        .into_iter()
        .map(|o| (o, power_loss(o, r, w01())))
        .collect();
    let f: Vec<f64> = (0..clean.len()).map(|i| i as f64).collect();
    let unit = noisy_spectrum(
        &Spectrum::new(f, vec![1.0; clean.len()]).unwrap(),
        1.0,
        seed,
    )
    .unwrap();
    clean
        .iter()
        .zip(unit.values())
        .map(|(&(o, p), u)| (o, p + noise * (u - 1.0)))
        .collect()
}

#[test]
fn power_loss_recovers_quoted_rates() {
    let r = measured();
    for s in 0..50 {
        let fit = fit_power_loss(&power_points(&r, 1e-20, s), power_fixed(&r)).unwrap();
        let (gn, dn) = (fit.get("gamma_n_hz").unwrap(), fit.get("delta_n").unwrap());
        assert!((gn - 55e3).abs() <= 3e3, "seed {s}: Γn {gn}");
        assert!((dn - 0.135).abs() <= 0.01, "seed {s}: Δn {dn}");
    }
}

#[test]
fn four_isolator_line_has_no_population_difference() {
    // Extra isolation cools the line until the two baths hold equal occupation.
    let r = DerivedRates::new(hz_to_rad(227e3), 0.01, hz_to_rad(53e3), 0.01, 0.0);
    coverage("Δn = 0", 500, 1000, |s| {
        let fit = fit_power_loss(&power_points(&r, 1e-20, s), power_fixed(&r)).unwrap();
        let (gn, dn) = (fit.get("gamma_n_hz").unwrap(), fit.get("delta_n").unwrap());
        assert!((gn - 53e3).abs() <= 4e3, "seed {s}: Γn {gn}");
        dn.abs() <= 2.0 * fit.sigma("delta_n").unwrap()
    });
}

#[test]
fn reflection_phase_and_magnitude_agree() {
    const NOISE: f64 = 0.05;
    let r = measured();
    let d = linspace(-1.5e6, 1.5e6, 301);
    let clean: Vec<(f64, Complex<f64>)> = d
        .iter()
        .map(|&x| (x, reflection_two_level(hz_to_rad(x), &r).unwrap()))
        .collect();
    // Both fits see the same draws, so their errors are positively
    // correlated and the combined band is conservative: only a shortfall
    // signals a problem.
    let (rate, sd) = hit_rate("phase vs magnitude", 0, 1000, |s| {
        let re = noisy_spectrum(
            &Spectrum::new(d.clone(), vec![1.0; d.len()]).unwrap(),
            1.0,
            2 * s,
        )
        .unwrap();
        let im = noisy_spectrum(
            &Spectrum::new(d.clone(), vec![1.0; d.len()]).unwrap(),
            1.0,
            2 * s + 1,
        )
        .unwrap();
        let trace: Vec<(f64, Complex<f64>)> = clean
            .iter()
            .zip(re.values().iter().zip(im.values()))
            .map(|(&(x, z), (a, b))| (x, z + Complex::new(a - 1.0, b - 1.0) * NOISE))
            .collect();
        // Quadrature noise ε gives |r| scatter ε and arg r scatter ε/|r|.
        let mag_sigma = Weights::Sigma(vec![NOISE; trace.len()]);
        let phase_sigma = Weights::Sigma(trace.iter().map(|p| NOISE / p.1.norm()).collect());
        let mag = fit_reflection_with(&trace, ReflectionMode::Magnitude, &mag_sigma).unwrap();
        let ph = fit_reflection_with(&trace, ReflectionMode::Phase, &phase_sigma).unwrap();
        let (a, sa) = (
            mag.get("gamma_2_hz").unwrap(),
            mag.sigma("gamma_2_hz").unwrap(),
        );
        let (b, sb) = (
            ph.get("gamma_2_hz").unwrap(),
            ph.sigma("gamma_2_hz").unwrap(),
        );
        (a - b).abs() <= 2.0 * (sa * sa + sb * sb).sqrt()
    });
    assert!(rate >= NOMINAL - 3.0 * sd, "rate {rate}");
}

#[test]
fn welch_windows_agree_and_seeds_share_a_spectrum() {
    let r = measured();
    let fs = 3e6;
    let a = surrogate_timeseries(&r, w01(), 4.0, fs, 21).unwrap();
    let b = surrogate_timeseries(&r, w01(), 4.0, fs, 22).unwrap();
    assert_ne!(a.samples(), b.samples());

    let width = |ts, w| {
        fit_lorentzian(&welch_psd(ts, 512, 0.5, w).unwrap(), 1)
            .unwrap()
            .get("hwhm_hz")
            .unwrap()
    };
    let (hann, hamming) = (width(&a, Window::Hann), width(&a, Window::Hamming));
    assert!((hann / hamming - 1.0).abs() < 0.03, "{hann} vs {hamming}");
    assert!((hann / rad_to_hz(r.gamma_2) - 1.0).abs() < 0.1, "{hann}");

    let pa = welch_psd(&a, 512, 0.5, Window::Hann).unwrap();
    let pb = welch_psd(&b, 512, 0.5, Window::Hann).unwrap();
    assert!((pa.integrate() / pb.integrate() - 1.0).abs() < 0.02);
    // Bins within a half width of the line: each is an average of ~47k
    // periodograms, so the two estimates differ by well under 5%.
    let (i, _) = pa.peak().unwrap();
    let half = (143e3 / (fs / 512.0)) as usize;
    for j in i - half..=i + half {
        let (x, y) = (pa.values()[j], pb.values()[j]);
        assert!((x / y - 1.0).abs() < 0.05, "bin {j}: {x} vs {y}");
    }
}

#[test]
fn autler_doublet_two_peak_fit() {
    let t = ThreeLevelRates::new(
        hz_to_rad(227e3),
        hz_to_rad(55e3),
        0.0,
        (0.004, 0.139),
        (0.004, 0.139),
    );
    let o2 = hz_to_rad(10e6);
    let f = centered_grid(F01, 10e6, 2001);
    let spec = autler_sidepeaks(&f, &t, o2, w01()).unwrap();
    let fit = fit_lorentzian(&spec, 2).unwrap();
    assert!(fit.converged);
    let step = f[1] - f[0];
    let split = 10e6 / 2f64.sqrt();
    let mut centers = [
        fit.get("center_hz").unwrap(),
        fit.get("center2_hz").unwrap(),
    ];
    centers.sort_by(f64::total_cmp);
    assert!((centers[0] - (F01 - split)).abs() <= step, "{centers:?}");
    assert!((centers[1] - (F01 + split)).abs() <= step, "{centers:?}");
}
