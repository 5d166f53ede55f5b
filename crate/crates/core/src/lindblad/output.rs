use super::correlation::trace_with;
use super::{
    build_liouvillian, sigma_minus, sigma_plus, steady_state, vectorize, DensityMatrix,
    Superoperator,
};
use crate::error::{Error, Result};
use crate::model::{SystemConfig, ThreeLevelRates};
use crate::scalar::{cplx, hz_to_rad, photon_energy, rad_to_hz, Real, C};
use crate::spectrum::Spectrum;

use rayon::prelude::*;

/// Half-width of the band around ω01 that a spectrum grid must cover, in
/// units of the emission linewidth.
const COVERAGE_LINEWIDTHS: f64 = 20.0;

/// Connected (delta-free) Fourier transforms of the two stationary
/// correlators, Ĉ = FT⟨σ+(t)σ−⟩ and D̂ = FT⟨σ−σ+(t)⟩, in s per rad.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectedSpectra<T: Real> {
    pub freqs_hz: Vec<T>,
    pub sp_sm: Vec<T>,
    pub sm_sp: Vec<T>,
}

/// Fails unless `freqs_hz` spans ω01 ± 20·linewidth.
pub fn psd_grid_check<T: Real>(config: &SystemConfig<T>, freqs_hz: &[T]) -> Result<()> {
    let linewidth = if config.transmon.levels == 3 {
        ThreeLevelRates::from_config(config).gamma_2_t
    } else {
        config.rates().gamma_2
    };
    let f0 = rad_to_hz(config.transmon.omega01);
    let half = rad_to_hz(linewidth) * T::lit(COVERAGE_LINEWIDTHS);
    let (lo, hi) = match (freqs_hz.first(), freqs_hz.last()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => return Err(Error::GridCoverage("empty frequency grid".into())),
    };
    if lo > f0 - half || hi < f0 + half {
        return Err(Error::GridCoverage(format!(
            "grid [{lo}, {hi}] Hz must span {f0} ± {half} Hz"
        )));
    }
    Ok(())
}

/// Resolvent evaluation of the connected correlator spectra.
///
/// For ν = ω − ω_frame, ∫₀^∞ e^{−iνt} e^{Lt} x dt = (iν − L)⁻¹ x for traceless
/// x. The rank-one term s·|ρ⟩⟨⟨I| removes the stationary pole without
/// changing the solution on traceless inputs.
pub fn connected_spectra<T: Real>(
    l: &Superoperator<T>,
    steady: &DensityMatrix<T>,
    frame_omega: T,
    freqs_hz: &[T],
) -> Result<ConnectedSpectra<T>> {
    let d = l.dim();
    let n = d * d;
    let sm = sigma_minus::<T>(d);
    let sp = sigma_plus::<T>(d);
    let rho = steady.matrix();
    let mean_sm = steady.expect(&sm);
    let x_fwd = vectorize(&(&(&sm * rho) - &rho.scale(mean_sm)));
    let x_rev = vectorize(&(&(rho * &sm) - &rho.scale(mean_sm)));
    let rho_vec = steady.to_vec();
    let s = l.scale_of();
    let mut base = l.matrix().scale_re(-T::one());
    for k in 0..n {
        for i in 0..d {
            base[(k, i + d * i)] += rho_vec[k] * s;
        }
    }
    let two = T::lit(2.0);
    let results: Vec<Result<(T, T)>> = freqs_hz
        .par_iter()
        .map(|&f| {
            let nu = hz_to_rad(f) - frame_omega;
            let mut a = base.clone();
            for k in 0..n {
                a[(k, k)] += cplx(T::zero(), nu);
            }
            let lu = a.lu()?;
            let yf = lu.solve(&x_fwd);
            let yr = lu.solve(&x_rev);
            Ok((two * trace_with(&sp, &yf).re, two * trace_with(&sp, &yr).re))
        })
        .collect();
    let mut sp_sm = Vec::with_capacity(freqs_hz.len());
    let mut sm_sp = Vec::with_capacity(freqs_hz.len());
    for r in results {
        let (a, b) = r?;
        sp_sm.push(a);
        sm_sp.push(b);
    }
    Ok(ConnectedSpectra {
        freqs_hz: freqs_hz.to_vec(),
        sp_sm,
        sm_sp,
    })
}

/// Rotating-frame frequency of the 0↔1 operators, ω01 + Δ1.
fn frame_omega<T: Real>(config: &SystemConfig<T>) -> T {
    config.transmon.omega01 + config.drive01().0
}

/// Incoherent output spectrum from the full generator.
///
/// Combines (n_r+1)Γr·Ĉ − n_r Γr·D̂ and scales by ħω01, which gives the
/// 2πS(ω) display convention in W/Hz. Coherent delta peaks and the
/// waveguide's own black-body background are excluded. Only the 0↔1
/// transition is monitored for three-level models.
pub fn output_psd_numeric<T: Real>(
    config: &SystemConfig<T>,
    freqs_hz: &[T],
) -> Result<Spectrum<T>> {
    psd_grid_check(config, freqs_hz)?;
    let l = build_liouvillian(config)?;
    let rho = steady_state(&l)?;
    let cs = connected_spectra(&l, &rho, frame_omega(config), freqs_hz)?;
    let g = config.radiative.gamma;
    let nr = config.radiative.occupation;
    let e = photon_energy(config.transmon.omega01);
    let values = cs
        .sp_sm
        .iter()
        .zip(&cs.sm_sp)
        .map(|(&c, &d)| e * g * ((nr + T::one()) * c - nr * d))
        .collect();
    Spectrum::new(freqs_hz.to_vec(), values)
}

/// Power removed from the waveguide, ħω01(⟨b_in†b_in⟩ − ⟨b_out†b_out⟩), from
/// the numerical steady state, including the input-noise cross terms.
pub fn output_intensity_numeric<T: Real>(config: &SystemConfig<T>) -> Result<T> {
    let l = build_liouvillian(config)?;
    let rho = steady_state(&l)?;
    let d = l.dim();
    let s1 = rho.expect(&sigma_minus::<T>(d));
    let excited = rho.population(1);
    let ground = rho.population(0);
    let (_, omega) = config.drive01();
    let g = config.radiative.gamma;
    let nr = config.radiative.occupation;
    let i = C::new(T::zero(), T::one());
    let coherent = (i * omega.conj() * s1).re;
    Ok(photon_energy(config.transmon.omega01)
        * (-g * (nr + T::one()) * excited + g * nr * ground + coherent))
}
