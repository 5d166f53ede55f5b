use crate::error::{Error, Result};
use crate::model::{DerivedRates, QuasiparticleSpec};
use crate::scalar::{k_b, lit, photon_energy, Real};

/// Prefactor and exponent of the quasiparticle excited-population law.
const POPULATION_PREFACTOR: f64 = 2.17;
const POPULATION_EXPONENT: f64 = 3.65;
const DECAY_EXPONENT: f64 = 1.5;

/// Undriven power loss with quasiparticle channels:
/// ħω01·{ΓrΓn(n_r − n_n) − Γr[(n_r+1)Γ↑ − n_rΓ↓]}/(Γ1 + Γ↑ + Γ↓).
pub fn qp_power_loss<T: Real>(rates: &DerivedRates<T>, qp: &QuasiparticleSpec<T>, omega01: T) -> T {
    let one = T::one();
    let num = rates.gamma_r * rates.gamma_n * (rates.n_r - rates.n_n)
        - rates.gamma_r * ((rates.n_r + one) * qp.gamma_up - rates.n_r * qp.gamma_down);
    photon_energy(omega01) * num / (rates.gamma_1 + qp.gamma_up + qp.gamma_down)
}

fn gap_ratio<T: Real>(gap: T, omega01: T) -> Result<T> {
    let e = photon_energy(omega01);
    if !(gap > e) {
        return Err(Error::param("gap", "must exceed ħω01"));
    }
    Ok(gap / e)
}

/// Excited population induced by a quasiparticle density n_qp/n_cp,
/// 2.17·(n_qp/n_cp)·(Δg/ħω01)^3.65.
pub fn qp_population<T: Real>(n_ratio: T, gap: T, omega01: T) -> Result<T> {
    if !(n_ratio >= T::zero()) {
        return Err(Error::param("n_ratio", "must be nonnegative"));
    }
    Ok(lit::<T>(POPULATION_PREFACTOR)
        * n_ratio
        * gap_ratio(gap, omega01)?.powf(lit(POPULATION_EXPONENT)))
}

/// Quasiparticle density n_qp/n_cp that produces excited population `rho11`.
pub fn qp_population_inverse<T: Real>(rho11: T, gap: T, omega01: T) -> Result<T> {
    if !(rho11 >= T::zero()) {
        return Err(Error::param("rho11", "must be nonnegative"));
    }
    Ok(rho11
        / (lit::<T>(POPULATION_PREFACTOR)
            * gap_ratio(gap, omega01)?.powf(lit(POPULATION_EXPONENT))))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiparticleRates<T> {
    pub gamma_down: T,
    pub gamma_up: T,
    /// Γ↓ − Γ↑
    pub gamma_qp: T,
}

/// Quasiparticle decay rate implied by an excited population ρ11^qp,
/// Γ↓ = √2/(2.17·R_N·C)·(Δg/ħω01)^(−2.15)·ρ11^qp, with Γ↑ = ρ11^qp·Γ↓.
pub fn qp_gamma_down<T: Real>(
    rho11_qp: T,
    r_n: T,
    capacitance: T,
    gap: T,
    omega01: T,
) -> Result<QuasiparticleRates<T>> {
    if !(r_n > T::zero()) || !(capacitance > T::zero()) {
        return Err(Error::param("r_n, capacitance", "must be positive"));
    }
    let n_ratio = qp_population_inverse(rho11_qp, gap, omega01)?;
    let gamma_down = lit::<T>(2.0).sqrt() / (r_n * capacitance)
        * n_ratio
        * gap_ratio(gap, omega01)?.powf(lit(DECAY_EXPONENT));
    let gamma_up = rho11_qp * gamma_down;
    Ok(QuasiparticleRates {
        gamma_down,
        gamma_up,
        gamma_qp: gamma_down - gamma_up,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalQuasiparticles<T> {
    /// Normalised density √(2πΔg·k_BT)/Δg·e^(−Δg/k_BT).
    pub x_qp: T,
    /// (ω01/π)·√(2Δg/ħω01)·x_qp, in s⁻¹.
    pub gamma_qp: T,
}

/// Thermal-equilibrium quasiparticle density and the decay rate it causes.
pub fn qp_thermal_rate<T: Real>(
    temperature: T,
    gap: T,
    omega01: T,
) -> Result<ThermalQuasiparticles<T>> {
    if !(temperature >= T::zero()) {
        return Err(Error::param("temperature", "must be nonnegative"));
    }
    let ratio = gap_ratio(gap, omega01)?;
    if temperature == T::zero() {
        return Ok(ThermalQuasiparticles {
            x_qp: T::zero(),
            gamma_qp: T::zero(),
        });
    }
    let kt = k_b::<T>() * temperature;
    let x_qp = (T::two_pi() * gap * kt).sqrt() / gap * (-gap / kt).exp();
    let gamma_qp = omega01 / T::PI() * (lit::<T>(2.0) * ratio).sqrt() * x_qp;
    Ok(ThermalQuasiparticles { x_qp, gamma_qp })
}
