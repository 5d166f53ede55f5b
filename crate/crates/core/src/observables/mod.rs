//! Closed-form observables of the driven two-bath transmon.
//!
//! Spectra are returned over absolute lab frequency in Hz with values in the
//! 2πS(ω) convention (W/Hz); `Spectrum::raw_values` gives S(ω). Rates and
//! detunings are angular (rad/s). The validity regimes (weak probe, strong
//! drive) are the caller's responsibility: every formula is evaluable
//! everywhere so that regime breakdown can be plotted.

mod quasiparticle;
mod three_level;

pub use quasiparticle::{
    qp_gamma_down, qp_population, qp_population_inverse, qp_power_loss, qp_thermal_rate,
    QuasiparticleRates, ThermalQuasiparticles,
};
pub use three_level::{
    autler_sidepeaks, mollow_center_three_level, reflection_three_level, thermal_psd_three_level,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::DerivedRates;
use crate::scalar::{hz_to_rad, lit, photon_energy, Real, C};
use crate::spectrum::Spectrum;

/// Steady-state moments of the two-level system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyMoments<T: Real> {
    /// ⟨σ−⟩
    pub sm: C<T>,
    /// ⟨σ+σ−⟩, the excited population
    pub sp_sm: T,
    /// ⟨σ−σ+⟩, the ground population
    pub sm_sp: T,
}

/// Closed-form steady moments for detuning Δ = ω_p − ω01 and Rabi rate Ω.
pub fn steady_moments<T: Real>(delta: T, omega: C<T>, rates: &DerivedRates<T>) -> SteadyMoments<T> {
    let two = lit::<T>(2.0);
    let g2 = rates.gamma_2;
    let o2 = omega.norm_sqr();
    let lor = delta * delta + g2 * g2;
    let den = two * o2 * g2 + two * lor * rates.gamma_1;
    let sm = omega * C::new(delta, -g2) * ((rates.gamma_1 - two * rates.gamma_plus) / den);
    SteadyMoments {
        sm,
        sp_sm: (o2 * g2 + two * rates.gamma_plus * lor) / den,
        sm_sp: (o2 * g2 + two * rates.gamma_minus * lor) / den,
    }
}

/// Weak-probe reflection coefficient r = 1 − iΓr(1 − 2Γ+/Γ1)/(Δ + iΓ2).
pub fn reflection_two_level<T: Real>(delta: T, rates: &DerivedRates<T>) -> Result<C<T>> {
    let den = C::new(delta, rates.gamma_2);
    if den.norm() == T::zero() {
        return Err(Error::param("delta", "r has a pole at Δ = 0 when Γ2 = 0"));
    }
    let i = C::new(T::zero(), T::one());
    Ok(C::new(T::one(), T::zero()) - i * rates.reflection_numerator() / den)
}

fn lorentzian_spectrum<T: Real>(
    freqs_hz: &[T],
    omega01: T,
    width: T,
    weight: T,
) -> Result<Spectrum<T>> {
    Spectrum::from_fn(freqs_hz, |f| {
        let d = hz_to_rad(f) - omega01;
        weight / (d * d + width * width)
    })
}

/// Undriven emission spectrum ħω01·Γr·2Γ2ΓnΔn/Γ1 / (δω² + Γ2²).
pub fn thermal_psd<T: Real>(
    freqs_hz: &[T],
    rates: &DerivedRates<T>,
    omega01: T,
) -> Result<Spectrum<T>> {
    let w = photon_energy(omega01)
        * rates.gamma_r
        * lit(2.0)
        * rates.gamma_2
        * rates.gamma_n
        * rates.delta_n()
        / rates.gamma_1;
    lorentzian_spectrum(freqs_hz, omega01, rates.gamma_2, w)
}

/// Amplitude coefficient ΓrΓnΔn/(2πΓ1) of the thermal line, in Hz.
pub fn thermal_amplitude_hz<T: Real>(rates: &DerivedRates<T>) -> T {
    rates.gamma_r * rates.gamma_n * rates.delta_n() / (T::two_pi() * rates.gamma_1)
}

/// Center (elastic) peak of the strongly driven emission spectrum,
/// ħω01·Γr·(Γ2/2)/(δω² + Γ2²).
pub fn mollow_center_psd<T: Real>(
    freqs_hz: &[T],
    rates: &DerivedRates<T>,
    omega01: T,
) -> Result<Spectrum<T>> {
    let w = photon_energy(omega01) * rates.gamma_r * rates.gamma_2 / lit(2.0);
    lorentzian_spectrum(freqs_hz, omega01, rates.gamma_2, w)
}

/// Resonant power loss ħω01(Γn/2)(Ω² − 2Γ2ΓrΔn)/(Ω² + Γ2Γ1).
pub fn power_loss<T: Real>(omega_rabi: T, rates: &DerivedRates<T>, omega01: T) -> T {
    let o2 = omega_rabi * omega_rabi;
    let g2 = rates.gamma_2;
    photon_energy(omega01) * rates.gamma_n / lit(2.0)
        * (o2 - lit::<T>(2.0) * g2 * rates.gamma_r * rates.delta_n())
        / (o2 + g2 * rates.gamma_1)
}

/// Rabi rate at which the resonant power loss changes sign, √(2Γ2ΓrΔn).
/// `None` when Δn ≤ 0 (no crossing).
pub fn power_loss_zero_crossing<T: Real>(rates: &DerivedRates<T>) -> Option<T> {
    let x = lit::<T>(2.0) * rates.gamma_2 * rates.gamma_r * rates.delta_n();
    (x > T::zero()).then(|| x.sqrt())
}

/// Work rate ħω01·Re(iΩ*⟨σ−⟩). The energy scale ħω01 makes this a power in
/// watts; without it the expression is a rate.
pub fn work_rate<T: Real>(omega_rabi: C<T>, delta: T, rates: &DerivedRates<T>, omega01: T) -> T {
    let m = steady_moments(delta, omega_rabi, rates);
    photon_energy(omega01) * (C::new(T::zero(), T::one()) * omega_rabi.conj() * m.sm).re
}

/// Steady-state energy flows, all in watts.
///
/// Signs: Q̇ > 0 is heat flowing into the qubit, Ẇ > 0 is work done on it,
/// P_loss > 0 is power removed from the waveguide.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerBudget<T> {
    pub p_loss: T,
    pub w_dot: T,
    pub q_dot_r: T,
    pub q_dot_n: T,
    /// Q̇r + Q̇n + Ẇ; zero in steady state.
    pub u_dot: T,
}

impl<T: Real> PowerBudget<T> {
    /// Largest magnitude among the flows, the natural scale of `u_dot`.
    pub fn scale(&self) -> T {
        self.w_dot
            .abs()
            .max(self.q_dot_r.abs())
            .max(self.q_dot_n.abs())
    }
}

/// Heat currents Q̇_i = ħω01(Γi n_i⟨σ−σ+⟩ − Γi(n_i+1)⟨σ+σ−⟩), the work rate
/// and the power loss P_loss = Q̇r + Ẇ.
pub fn heat_rates<T: Real>(
    omega_rabi: C<T>,
    delta: T,
    rates: &DerivedRates<T>,
    omega01: T,
) -> PowerBudget<T> {
    let m = steady_moments(delta, omega_rabi, rates);
    let e = photon_energy(omega01);
    let one = T::one();
    let q = |g: T, n: T| e * (g * n * m.sm_sp - g * (n + one) * m.sp_sm);
    let q_dot_r = q(rates.gamma_r, rates.n_r);
    let q_dot_n = q(rates.gamma_n, rates.n_n);
    let w_dot = e * (C::new(T::zero(), one) * omega_rabi.conj() * m.sm).re;
    PowerBudget {
        p_loss: q_dot_r + w_dot,
        w_dot,
        q_dot_r,
        q_dot_n,
        u_dot: q_dot_r + q_dot_n + w_dot,
    }
}

/// Total power carried by the thermal line, ħω01ΓrΓnΔn/Γ1.
pub fn integrated_thermal_power<T: Real>(rates: &DerivedRates<T>, omega01: T) -> T {
    photon_energy(omega01) * rates.gamma_r * rates.gamma_n * rates.delta_n() / rates.gamma_1
}

/// Trapezoid quadrature of [`thermal_psd`] on a grid, with the analytic
/// Lorentzian tails beyond the grid ends added back.
pub fn integrated_thermal_power_quadrature<T: Real>(
    freqs_hz: &[T],
    rates: &DerivedRates<T>,
    omega01: T,
) -> Result<T> {
    let s = thermal_psd(freqs_hz, rates, omega01)?;
    Ok(s.integrate_with_tails(crate::scalar::rad_to_hz(omega01)))
}
