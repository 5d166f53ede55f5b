//! Noisy synthetic measurements generated from a known rate set.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::table1::Table1Data;
use crate::error::Result;
use crate::model::DerivedRates;
use crate::observables::{mollow_center_psd, power_loss, reflection_two_level, thermal_psd};
use crate::scalar::{hz_to_rad, lit, rad_to_hz, Real, C};
use crate::spectrum::{centered_grid, linspace, logspace, Spectrum};

/// Noise added to each synthetic dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseLevels<T> {
    /// Relative (multiplicative) Gaussian noise on spectral points.
    pub spectrum_rel: T,
    /// Additive Gaussian noise on each quadrature of r.
    pub reflection_abs: T,
    /// Additive Gaussian noise on power-loss points, W.
    pub power_abs: T,
}

impl<T: Real> NoiseLevels<T> {
    /// Noise comparable to the scatter of the measured traces.
    pub fn measured() -> Self {
        Self {
            spectrum_rel: lit(0.05),
            reflection_abs: lit(0.01),
            power_abs: lit(1e-20),
        }
    }

    pub fn none() -> Self {
        Self {
            spectrum_rel: T::zero(),
            reflection_abs: T::zero(),
            power_abs: T::zero(),
        }
    }
}

/// Sampling of the synthetic measurements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthGrids<T> {
    /// Spectra span f01 ± this, Hz.
    pub spectrum_half_span_hz: T,
    pub spectrum_points: usize,
    pub reflection_half_span_hz: T,
    pub reflection_points: usize,
    /// Rabi range of the power-loss sweep, Hz, log-spaced.
    pub rabi_range_hz: (T, T),
    pub rabi_points: usize,
}

impl<T: Real> Default for SynthGrids<T> {
    fn default() -> Self {
        Self {
            spectrum_half_span_hz: lit(2e6),
            spectrum_points: 401,
            reflection_half_span_hz: lit(1.5e6),
            reflection_points: 301,
            rabi_range_hz: (lit(1e4), lit(1e7)),
            rabi_points: 40,
        }
    }
}

struct Noise(ChaCha8Rng);

impl Noise {
    fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self(rng)
    }

    fn normal<T: Real>(&mut self) -> T {
        let x: f64 = StandardNormal.sample(&mut self.0);
        lit(x)
    }
}

/// Applies multiplicative noise v·(1 + rel·ξ).
pub fn noisy_spectrum<T: Real>(clean: &Spectrum<T>, rel: T, seed: u64) -> Result<Spectrum<T>> {
    let mut rng = Noise::new(seed, 0);
    let values = clean
        .values()
        .iter()
        .map(|&v| v * (T::one() + rel * rng.normal::<T>()))
        .collect();
    Spectrum::new(clean.freqs().to_vec(), values)
}

/// Thermal (drive-off) spectrum with multiplicative noise.
pub fn synth_thermal<T: Real>(
    rates: &DerivedRates<T>,
    omega01: T,
    grids: &SynthGrids<T>,
    rel: T,
    seed: u64,
) -> Result<Spectrum<T>> {
    let f = centered_grid(
        rad_to_hz(omega01),
        grids.spectrum_half_span_hz,
        grids.spectrum_points,
    );
    noisy_spectrum(&thermal_psd(&f, rates, omega01)?, rel, seed ^ 0x7468)
}

/// The three datasets of the parameter extraction. Each uses its own
/// random stream, so changing one noise level leaves the others intact.
pub fn synth_table1<T: Real>(
    rates: &DerivedRates<T>,
    omega01: T,
    grids: &SynthGrids<T>,
    noise: &NoiseLevels<T>,
    seed: u64,
) -> Result<Table1Data<T>> {
    let f = centered_grid(
        rad_to_hz(omega01),
        grids.spectrum_half_span_hz,
        grids.spectrum_points,
    );
    let mollow = noisy_spectrum(
        &mollow_center_psd(&f, rates, omega01)?,
        noise.spectrum_rel,
        seed,
    )?;

    let mut rng = Noise::new(seed, 1);
    let h = grids.reflection_half_span_hz;
    let reflection = linspace(-h, h, grids.reflection_points)
        .into_iter()
        .map(|d| {
            let r = reflection_two_level(hz_to_rad(d), rates)?;
            let e = C::new(rng.normal::<T>(), rng.normal::<T>()) * noise.reflection_abs;
            Ok((d, r + e))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rng = Noise::new(seed, 2);
    let (lo, hi) = grids.rabi_range_hz;
    let power_loss = logspace(hz_to_rad(lo), hz_to_rad(hi), grids.rabi_points)
        .into_iter()
        .map(|o| {
            (
                o,
                power_loss(o, rates, omega01) + noise.power_abs * rng.normal::<T>(),
            )
        })
        .collect();
    Ok(Table1Data {
        mollow,
        reflection,
        power_loss,
        omega01,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_is_clean_and_seeded_is_deterministic() {
        let r = DerivedRates::<f64>::table1_measured();
        let w = hz_to_rad(5.5e9);
        let g = SynthGrids::default();
        let a = synth_table1(&r, w, &g, &NoiseLevels::none(), 1).unwrap();
        let b = synth_table1(&r, w, &g, &NoiseLevels::none(), 2).unwrap();
        assert_eq!(a.mollow, b.mollow);
        let c = synth_table1(&r, w, &g, &NoiseLevels::measured(), 3).unwrap();
        let d = synth_table1(&r, w, &g, &NoiseLevels::measured(), 3).unwrap();
        assert_eq!(c.power_loss, d.power_loss);
        assert_ne!(c.mollow, a.mollow);
    }
}
