use super::lorentzian_spectrum;
use crate::error::{Error, Result};
use crate::model::ThreeLevelRates;
use crate::scalar::{hz_to_rad, lit, photon_energy, Real, C};
use crate::spectrum::Spectrum;

/// Weak-probe reflection of the 0↔1 transition with the third level
/// thermally populated: r = 1 − iΓr(1 − 2Γ+01/Γ1_01)·𝒢/(Δ + iΓ2^T).
pub fn reflection_three_level<T: Real>(delta: T, rates: &ThreeLevelRates<T>) -> Result<C<T>> {
    let den = C::new(delta, rates.gamma_2_t);
    if den.norm() == T::zero() {
        return Err(Error::param("delta", "r has a pole at Δ = 0 when Γ2^T = 0"));
    }
    let num = rates.gamma_r
        * (T::one() - lit::<T>(2.0) * rates.gamma_plus_01 / rates.gamma_1_01)
        * rates.g_factor();
    Ok(C::new(T::one(), T::zero()) - C::new(T::zero(), num) / den)
}

/// Center peak under a strong 0↔1 drive, ħω01·Γr·Γ2^T·ℱ/(δω² + (Γ2^T)²).
pub fn mollow_center_three_level<T: Real>(
    freqs_hz: &[T],
    rates: &ThreeLevelRates<T>,
    omega01: T,
) -> Result<Spectrum<T>> {
    let w = photon_energy(omega01) * rates.gamma_r * rates.gamma_2_t * rates.f_factor();
    lorentzian_spectrum(freqs_hz, omega01, rates.gamma_2_t, w)
}

/// Undriven 0↔1 emission, ħω01·Γr·2Γ2^T·Γn·Δn·𝒴/(δω² + (Γ2^T)²).
pub fn thermal_psd_three_level<T: Real>(
    freqs_hz: &[T],
    rates: &ThreeLevelRates<T>,
    omega01: T,
) -> Result<Spectrum<T>> {
    let w = photon_energy(omega01)
        * rates.gamma_r
        * lit(2.0)
        * rates.gamma_2_t
        * rates.gamma_n
        * rates.delta_n()
        * rates.y_factor();
    lorentzian_spectrum(freqs_hz, omega01, rates.gamma_2_t, w)
}

/// Autler–Townes side peaks of the 0↔1 emission under a strong 1↔2 drive
/// Ω2: Lorentzians at ω01 ∓ Ω2/√2 with half width (Γ2^T + Γ2^(02))/2.
pub fn autler_sidepeaks<T: Real>(
    freqs_hz: &[T],
    rates: &ThreeLevelRates<T>,
    omega2_rabi: T,
    omega01: T,
) -> Result<Spectrum<T>> {
    let two = lit::<T>(2.0);
    let four = lit::<T>(4.0);
    let width = rates.gamma_2_t + rates.gamma_2_02;
    let pump = rates.gamma_plus_01 + rates.n_r01 * (rates.gamma_1_01 - two * rates.gamma_minus_12);
    let norm = two * (rates.gamma_minus_12 + rates.gamma_plus_01) - rates.gamma_minus_01;
    let w = photon_energy(omega01) * rates.gamma_r * two * width * pump / norm;
    let shift = omega2_rabi / two.sqrt();
    Spectrum::from_fn(freqs_hz, |f| {
        let d = hz_to_rad(f) - omega01;
        [d + shift, d - shift]
            .iter()
            .map(|&x| w / (four * x * x + width * width))
            .sum()
    })
}
