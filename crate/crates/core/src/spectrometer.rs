//! Two-channel noise spectrometer: a qubit coupled equally to a probe line
//! carrying the noise under test and to a detection line, with Γ1 = 2Γr.
//!
//! The thermal emission into the detection line and the strongly driven
//! emission share the width Γ2, so their ratio gives Δn = n_th − n_r without
//! a gain calibration. Sweeping ω01 maps Δn(ω).

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fit::noisy_spectrum;
use crate::model::DerivedRates;
use crate::observables::mollow_center_psd;
use crate::scalar::{hz_to_rad, lit, photon_energy, rad_to_hz, Real};
use crate::spectrum::{centered_grid, Spectrum};

/// Spectrometer parameters. Rates in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrometerConfig<T: Real> {
    /// Coupling of each channel (probe and detection).
    pub gamma_r: T,
    /// Residual nonradiative rate; only checked against Γr.
    pub gamma_n: T,
    pub gamma_phi: T,
    /// Occupation of the probe line at ω01.
    pub n_th: T,
    /// Occupation of the detection line.
    pub n_r: T,
    pub omega01: T,
}

impl<T: Real> SpectrometerConfig<T> {
    pub fn new(gamma_r: T, n_th: T, n_r: T, omega01: T) -> Self {
        Self {
            gamma_r,
            gamma_n: T::zero(),
            gamma_phi: T::zero(),
            n_th,
            n_r,
            omega01,
        }
    }

    pub fn gamma_1(&self) -> T {
        lit::<T>(2.0) * self.gamma_r
    }

    pub fn gamma_2(&self) -> T {
        self.gamma_r + self.gamma_phi
    }

    pub fn delta_n(&self) -> T {
        self.n_th - self.n_r
    }

    /// Two-level rates of the matched device: Γ1 = 2Γr and
    /// Γ+ = Γr(n_th + n_r), i.e. thermal enhancement of Γ1 neglected.
    pub fn rates(&self) -> DerivedRates<T> {
        let gamma_1 = self.gamma_1();
        let gamma_plus = self.gamma_r * (self.n_th + self.n_r);
        DerivedRates {
            gamma_r: self.gamma_r,
            gamma_n: self.gamma_r,
            n_r: self.n_r,
            n_n: self.n_th,
            gamma_phi: self.gamma_phi,
            gamma_plus,
            gamma_minus: gamma_1 - gamma_plus,
            gamma_1,
            gamma_2: self.gamma_2(),
        }
    }

    /// Rejects nonphysical values and Γr/Γn < 10.
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_r > T::zero()) || !self.gamma_r.is_finite() {
            return Err(Error::param("gamma_r", "must be positive"));
        }
        if !(self.gamma_n >= T::zero()) || !(self.gamma_phi >= T::zero()) {
            return Err(Error::param("gamma_n", "Γn and Γφ must be nonnegative"));
        }
        if !(self.n_th >= T::zero()) || !(self.n_r >= T::zero()) {
            return Err(Error::param("n_th", "occupations must be nonnegative"));
        }
        if !(self.omega01 > T::zero()) {
            return Err(Error::param("omega01", "must be positive"));
        }
        if self.gamma_n * lit(10.0) > self.gamma_r {
            return Err(Error::param(
                "gamma_n",
                "Γr/Γn below 10; the channels no longer dominate",
            ));
        }
        Ok(())
    }

    /// Regime notes for a valid config.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.gamma_n * lit(100.0) > self.gamma_r {
            out.push(format!(
                "Γr/Γn = {:.1} is below 100; Δn estimates carry an O(Γn/Γr) bias",
                (self.gamma_r / self.gamma_n).as_f64()
            ));
        }
        if self.gamma_phi * lit(10.0) > self.gamma_r {
            out.push("Γφ is not small against Γr; r = n_th + n_r does not hold".into());
        }
        out
    }
}

/// Thermal emission into the detection line, ħω01·Γr·Γ2Δn/(δω² + Γ2²)
/// in the 2πS convention. Integrates to ħω01ΓrΔn/2.
pub fn spectrometer_thermal_psd<T: Real>(
    freqs_hz: &[T],
    cfg: &SpectrometerConfig<T>,
) -> Result<Spectrum<T>> {
    thermal_line(freqs_hz, cfg, |_| cfg.delta_n())
}

/// Driven center peak ħω01·Γr·(Γ2/2)/(δω² + Γ2²). Integrates to ħω01Γr/4.
pub fn spectrometer_on_psd<T: Real>(
    freqs_hz: &[T],
    cfg: &SpectrometerConfig<T>,
) -> Result<Spectrum<T>> {
    mollow_center_psd(freqs_hz, &cfg.rates(), cfg.omega01)
}

/// Thermal line with a frequency-dependent Δn(f): the qubit response
/// filters a noise profile that may vary across the line.
fn thermal_line<T: Real>(
    freqs_hz: &[T],
    cfg: &SpectrometerConfig<T>,
    delta_n: impl Fn(T) -> T,
) -> Result<Spectrum<T>> {
    let g2 = cfg.gamma_2();
    let w = photon_energy(cfg.omega01) * cfg.gamma_r * g2;
    Spectrum::from_fn(freqs_hz, |f| {
        let d = hz_to_rad(f) - cfg.omega01;
        w * delta_n(f) / (d * d + g2 * g2)
    })
}

/// Output of [`estimate_delta_n_pointwise`].
#[derive(Debug, Clone, PartialEq)]
pub struct PointwiseEstimate<T> {
    pub freqs_hz: Vec<T>,
    /// S_th/(2S_on) per point; `None` where S_on is below 1e−3 of its peak.
    pub delta_n: Vec<Option<T>>,
    /// Value at the S_on peak.
    pub at_center: T,
    /// Least-squares ratio over the half-maximum region of S_on, /2.
    pub line_estimate: T,
    /// max − min of the pointwise values over the half-maximum region.
    pub spread: T,
}

impl<T: Real> PointwiseEstimate<T> {
    /// False when the ratio varies across the line by more than `rel_tol` of
    /// the line estimate, the signature of noise narrower than the qubit line.
    pub fn is_flat(&self, rel_tol: T) -> bool {
        self.spread
            <= rel_tol * self.line_estimate.abs()
                + T::epsilon() * self.line_estimate.abs().max(T::one())
    }
}

/// Δn = S_th/(2S_on) at each frequency.
pub fn estimate_delta_n_pointwise<T: Real>(
    s_th: &Spectrum<T>,
    s_on: &Spectrum<T>,
) -> Result<PointwiseEstimate<T>> {
    if !s_th.same_grid(s_on) {
        return Err(Error::GridMismatch(
            "S_th and S_on must share a grid".into(),
        ));
    }
    let (ipk, peak) = s_on
        .peak()
        .ok_or_else(|| Error::TooShort("empty spectra".into()))?;
    if !(peak > T::zero()) {
        return Err(Error::Domain("S_on has no positive peak".into()));
    }
    let floor = peak * lit(1e-3);
    let two = lit::<T>(2.0);
    let delta_n: Vec<Option<T>> = s_th
        .values()
        .iter()
        .zip(s_on.values())
        .map(|(&th, &on)| (on >= floor).then(|| th / (two * on)))
        .collect();
    let half = peak / two;
    let (mut num, mut den) = (T::zero(), T::zero());
    let (mut lo, mut hi) = (T::infinity(), T::neg_infinity());
    for ((&th, &on), est) in s_th.values().iter().zip(s_on.values()).zip(&delta_n) {
        if on >= half {
            num += th * on;
            den += on * on;
            if let Some(v) = *est {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
    }
    Ok(PointwiseEstimate {
        freqs_hz: s_th.freqs().to_vec(),
        at_center: delta_n[ipk].unwrap_or(T::zero()),
        line_estimate: num / (two * den),
        spread: hi - lo,
        delta_n,
    })
}

/// Δn = P_th/(2P_on). Any common gain cancels.
pub fn estimate_delta_n_integrated<T: Real>(p_th: T, p_on: T) -> Result<T> {
    if !(p_on > T::zero()) || !p_on.is_finite() {
        return Err(Error::param("p_on", "must be positive"));
    }
    Ok(p_th / (lit::<T>(2.0) * p_on))
}

/// (n_th, n_r) from Δn and the on-resonance reflection r = n_th + n_r.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitOccupations<T> {
    pub n_th: T,
    pub n_r: T,
    /// Either solution is negative: Δn and r are inconsistent.
    pub negative: bool,
}

/// Solves n_th + n_r = r, n_th − n_r = Δn. Valid for the matched device
/// with Γφ ≪ Γr, where on-resonance r = 2Γ+/Γ1 = n_th + n_r.
pub fn split_occupations<T: Real>(delta_n: T, r: T) -> SplitOccupations<T> {
    let two = lit::<T>(2.0);
    let n_th = (r + delta_n) / two;
    let n_r = (r - delta_n) / two;
    SplitOccupations {
        n_th,
        n_r,
        negative: n_th < T::zero() || n_r < T::zero(),
    }
}

/// Sampling and noise of a frequency sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions<T> {
    /// Local spectra span ω01 ± this many Γ2.
    pub half_span_linewidths: T,
    pub points: usize,
    /// Multiplicative Gaussian noise on both spectra; zero for none.
    pub noise_rel: T,
    pub seed: u64,
}

impl<T: Real> Default for SweepOptions<T> {
    fn default() -> Self {
        Self {
            half_span_linewidths: lit(5.0),
            points: 201,
            noise_rel: T::zero(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint<T> {
    pub omega01_hz: T,
    /// Reconstructed n_th − n_r.
    pub delta_n: T,
    pub spread: T,
}

/// Steps ω01 (rad/s) over `omega01_grid`, synthesizes S_th and S_on for a
/// probe-line occupation profile `n_th(f_hz)` and reconstructs Δn at each
/// step from the line estimate. The profile is sampled across the line, so
/// features narrower than ~Γ2 are smoothed.
pub fn sweep_spectrometer<T: Real>(
    cfg: &SpectrometerConfig<T>,
    omega01_grid: &[T],
    n_th: impl Fn(T) -> T + Sync,
    opts: &SweepOptions<T>,
) -> Result<Vec<SweepPoint<T>>> {
    cfg.validate()?;
    if opts.points < 3 || !(opts.half_span_linewidths > T::zero()) {
        return Err(Error::param(
            "points",
            "need ≥ 3 points over a positive span",
        ));
    }
    omega01_grid
        .par_iter()
        .enumerate()
        .map(|(k, &w)| {
            let local = SpectrometerConfig { omega01: w, ..*cfg };
            let f0 = rad_to_hz(w);
            let span = rad_to_hz(local.gamma_2()) * opts.half_span_linewidths;
            let f = centered_grid(f0, span, opts.points);
            let mut th = thermal_line(&f, &local, |x| n_th(x) - cfg.n_r)?;
            let mut on = spectrometer_on_psd(&f, &local)?;
            if opts.noise_rel > T::zero() {
                // Even stream for S_th, odd for S_on: shared noise would cancel in the ratio.
                let s = (opts.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ ((k as u64) << 1)) & !1;
                th = noisy_spectrum(&th, opts.noise_rel, s)?;
                on = noisy_spectrum(&on, opts.noise_rel, s | 1)?;
            }
            let est = estimate_delta_n_pointwise(&th, &on)?;
            Ok(SweepPoint {
                omega01_hz: f0,
                delta_n: est.line_estimate,
                spread: est.spread,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::reflection_two_level;
    use crate::spectrum::linspace;

    fn cfg() -> SpectrometerConfig<f64> {
        SpectrometerConfig::new(hz_to_rad(200e3), 0.139, 0.004, hz_to_rad(5.5e9))
    }

    fn grid(c: &SpectrometerConfig<f64>) -> Vec<f64> {
        centered_grid(rad_to_hz(c.omega01), 3e6, 1201)
    }

    #[test]
    fn matched_occupations_give_no_line() {
        let c = SpectrometerConfig {
            n_th: 0.004,
            ..cfg()
        };
        assert_eq!(
            spectrometer_thermal_psd(&grid(&c), &c).unwrap().max_abs(),
            0.0
        );
    }

    #[test]
    fn peak_ratio_and_powers() {
        let c = cfg();
        let f = grid(&c);
        let th = spectrometer_thermal_psd(&f, &c).unwrap();
        let on = spectrometer_on_psd(&f, &c).unwrap();
        let ratio = th.peak().unwrap().1 / on.peak().unwrap().1;
        assert!((ratio / (2.0 * 0.135) - 1.0).abs() < 1e-12);
        let e = photon_energy(c.omega01);
        let f0 = rad_to_hz(c.omega01);
        let p_th = th.integrate_with_tails(f0);
        let p_on = on.integrate_with_tails(f0);
        assert!((p_th / (e * c.gamma_r * 0.135 / 2.0) - 1.0).abs() < 1e-3);
        assert!((p_on / (e * c.gamma_r / 4.0) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn pointwise_exact_and_flat() {
        let c = cfg();
        let f = grid(&c);
        let est = estimate_delta_n_pointwise(
            &spectrometer_thermal_psd(&f, &c).unwrap(),
            &spectrometer_on_psd(&f, &c).unwrap(),
        )
        .unwrap();
        for v in est.delta_n.iter().flatten() {
            assert!((v - 0.135).abs() < 1e-12);
        }
        assert!((est.line_estimate - 0.135).abs() < 1e-12);
        assert!(est.is_flat(0.01));
    }

    #[test]
    fn narrowband_noise_is_not_flat() {
        let c = cfg();
        let f = grid(&c);
        let f0 = rad_to_hz(c.omega01);
        let w = rad_to_hz(c.gamma_2()) / 3.0;
        // Probe occupation falling off over a third of the qubit linewidth.
        let th = thermal_line(&f, &c, |x| 0.135 * w * w / ((x - f0).powi(2) + w * w)).unwrap();
        let est = estimate_delta_n_pointwise(&th, &spectrometer_on_psd(&f, &c).unwrap()).unwrap();
        assert!(!est.is_flat(0.05), "{}", est.spread);
    }

    #[test]
    fn pointwise_rejects_mismatch_and_guards() {
        let c = cfg();
        let f = grid(&c);
        let on = spectrometer_on_psd(&f, &c).unwrap();
        let other = spectrometer_on_psd(&f[1..], &c).unwrap();
        assert!(matches!(
            estimate_delta_n_pointwise(&on, &other),
            Err(Error::GridMismatch(_))
        ));
        let far = spectrometer_on_psd(&centered_grid(rad_to_hz(c.omega01), 100e6, 11), &c).unwrap();
        let est = estimate_delta_n_pointwise(&far, &far).unwrap();
        assert!(est.delta_n.iter().filter(|v| v.is_none()).count() > 0);
    }

    #[test]
    fn integrated_and_gain_invariance() {
        let c = cfg();
        let e = photon_energy(c.omega01);
        let p_th = e * c.gamma_r * 0.135 / 2.0;
        let p_on = e * c.gamma_r / 4.0;
        assert!((estimate_delta_n_integrated(p_th, p_on).unwrap() - 0.135).abs() < 1e-15);
        let g = 3.7e9;
        assert_eq!(
            estimate_delta_n_integrated(p_th * g, p_on * g).unwrap(),
            estimate_delta_n_integrated(p_th, p_on).unwrap()
        );
        assert!(estimate_delta_n_integrated(1.0, 0.0).is_err());
    }

    #[test]
    fn split() {
        let s = split_occupations(0.135_f64, 0.143);
        assert!((s.n_th - 0.139).abs() < 1e-15 && (s.n_r - 0.004).abs() < 1e-15);
        assert!(!s.negative);
        assert_eq!(
            split_occupations(0.0, 0.0),
            SplitOccupations {
                n_th: 0.0,
                n_r: 0.0,
                negative: false
            }
        );
        assert!(split_occupations(0.2, 0.1).negative);
    }

    #[test]
    fn reflection_on_resonance_is_occupation_sum() {
        for (nt, nr) in [(0.139_f64, 0.004_f64), (0.3, 0.0), (0.05, 0.02)] {
            let c = SpectrometerConfig::new(hz_to_rad(200e3), nt, nr, hz_to_rad(5.5e9));
            let r = reflection_two_level(0.0, &c.rates()).unwrap();
            assert!((r.re - (nt + nr)).abs() < 1e-14 && r.im.abs() < 1e-14);
        }
    }

    #[test]
    fn validation() {
        assert!(cfg().validate().is_ok() && cfg().warnings().is_empty());
        let weak = SpectrometerConfig {
            gamma_n: hz_to_rad(5e3),
            ..cfg()
        };
        assert!(weak.validate().is_ok() && weak.warnings().len() == 1);
        assert!(SpectrometerConfig {
            gamma_n: hz_to_rad(50e3),
            ..cfg()
        }
        .validate()
        .is_err());
        assert!(SpectrometerConfig {
            gamma_r: -1.0,
            ..cfg()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn sweep_flat_zero_and_step() {
        let c = cfg();
        let grid: Vec<f64> = linspace(5.49e9, 5.51e9, 41)
            .into_iter()
            .map(hz_to_rad)
            .collect();
        let flat = sweep_spectrometer(&c, &grid, |_| 0.139, &SweepOptions::default()).unwrap();
        assert!(flat.iter().all(|p| (p.delta_n - 0.135).abs() < 1e-12));
        let zero = sweep_spectrometer(&c, &grid, |_| 0.004, &SweepOptions::default()).unwrap();
        assert!(zero.iter().all(|p| p.delta_n.abs() < 1e-15));

        let step = sweep_spectrometer(
            &c,
            &grid,
            |f| if f < 5.5e9 { 0.004 } else { 0.139 },
            &SweepOptions::default(),
        )
        .unwrap();
        let gr = rad_to_hz(c.gamma_r);
        for p in &step {
            let d = p.omega01_hz - 5.5e9;
            if d < -gr {
                assert!(p.delta_n < 0.135 * 0.1, "{d} {}", p.delta_n);
            } else if d > gr {
                assert!(p.delta_n > 0.135 * 0.9, "{d} {}", p.delta_n);
            }
        }
    }

    #[test]
    fn sweep_noise_survives_the_ratio() {
        let c = cfg();
        let grid: Vec<f64> = linspace(5.4e9, 5.6e9, 16)
            .into_iter()
            .map(hz_to_rad)
            .collect();
        for seed in 0..4 {
            let opts = SweepOptions {
                noise_rel: 0.02,
                seed,
                ..Default::default()
            };
            let sweep = sweep_spectrometer(&c, &grid, |_| 0.139, &opts).unwrap();
            // Every step must carry its own noise, whatever the seed's parity.
            assert!(
                sweep.iter().all(|p| (p.delta_n - 0.135).abs() > 1e-9),
                "seed {seed}"
            );
        }
    }
}
