//! Classical stand-in for the emitted field: Gaussian noise with a
//! Lorentzian spectrum, used to exercise the Welch estimator.

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::FftPlanner;

use super::welch::TimeSeries;
use crate::error::{Error, Result};
use crate::model::DerivedRates;
use crate::observables::integrated_thermal_power;
use crate::scalar::{lit, rad_to_hz, Real};

const CHUNK: usize = 1 << 16;

/// Real series whose one-sided PSD is a Lorentzian of half width
/// `hwhm` (rad/s) centred on `center_hz`, carrying `power` watts.
///
/// Built by spectral synthesis: complex Gaussian bin amplitudes shaped by
/// the Lorentzian, inverse transformed, real part kept at unit variance;
/// `gain` then equals `power`. Unlike a sampled Ornstein–Uhlenbeck
/// recursion the line is band limited rather than aliased, so its wings stay
/// Lorentzian up to Nyquist (an AR(1) at hwhm·dt ≈ 0.3 fits ~10% wide).
/// Deviates come in fixed-size chunks, each from its own ChaCha stream, so
/// the result depends only on `seed` and not on the thread count.
pub fn lorentzian_noise<T: Real>(
    power: T,
    hwhm: T,
    center_hz: T,
    duration: T,
    sample_rate: T,
    seed: u64,
) -> Result<TimeSeries<T>> {
    if !(power >= T::zero()) {
        return Err(Error::Domain(format!("target power {power} W is negative")));
    }
    if !(duration > T::zero()) {
        return Err(Error::param("duration", "must be positive"));
    }
    if !(hwhm > T::zero()) {
        return Err(Error::param("hwhm", "must be positive"));
    }
    if !(sample_rate > lit::<T>(10.0) * rad_to_hz(hwhm)) {
        return Err(Error::param(
            "sample_rate",
            format!(
                "{sample_rate} Hz undersamples a {} Hz linewidth",
                rad_to_hz(hwhm)
            ),
        ));
    }
    if !(center_hz >= T::zero() && center_hz <= sample_rate / lit(2.0)) {
        return Err(Error::param("center_hz", "must lie in [0, fs/2]"));
    }
    let n = (duration * sample_rate).round().to_usize().unwrap_or(0);
    if n == 0 {
        return Err(Error::TooShort("duration shorter than one sample".into()));
    }
    if power == T::zero() {
        return TimeSeries::new(sample_rate, vec![T::zero(); n], T::one());
    }

    // Per-bin weights of the analytic line over the whole sampled band.
    let h = rad_to_hz(hwhm);
    let nf = lit::<T>(n as f64);
    let weights: Vec<T> = (0..n)
        .map(|k| {
            let k = if 2 * k < n {
                k as f64
            } else {
                k as f64 - n as f64
            };
            let d = (lit::<T>(k) * sample_rate / nf - center_hz) / h;
            T::one() / (T::one() + d * d)
        })
        .collect();
    let norm: T = weights.iter().copied().sum();
    let chunks = n.div_ceil(CHUNK);
    let noise: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64);
            (0..CHUNK.min(n - chunk * CHUNK))
                .map(|_| {
                    (
                        StandardNormal.sample(&mut rng),
                        StandardNormal.sample(&mut rng),
                    )
                })
                .collect::<Vec<_>>()
        })
        .collect();
    // E|Z_k|² = w_k / Σw, so the unnormalised inverse transform has E|z|² = 1.
    let mut buf: Vec<Complex<T>> = weights
        .into_iter()
        .zip(noise)
        .map(|(w, (u, v))| Complex::new(lit(u), lit(v)) * (w / (norm * lit(2.0))).sqrt())
        .collect();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let root2 = lit::<T>(2.0).sqrt();
    let samples = buf.into_iter().map(|z| root2 * z.re).collect();
    TimeSeries::new(sample_rate, samples, power)
}

/// Surrogate of the undriven emission: the thermal line with power
/// ħω01ΓrΓnΔn/Γ1 and half width Γ2, placed at fs/4 in baseband.
pub fn surrogate_timeseries<T: Real>(
    rates: &DerivedRates<T>,
    omega01: T,
    duration: T,
    sample_rate: T,
    seed: u64,
) -> Result<TimeSeries<T>> {
    let power = integrated_thermal_power(rates, omega01);
    lorentzian_noise(
        power,
        rates.gamma_2,
        sample_rate / lit(4.0),
        duration,
        sample_rate,
        seed,
    )
}
