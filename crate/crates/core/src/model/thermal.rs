//! Occupation/temperature conversions for bosonic and two-level-system baths.

use crate::error::{Error, Result};
use crate::scalar::{hbar, k_b, Real};

/// Bath statistics, which fix the occupation-temperature relation and the
/// thermal weights of the dissipators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum BathStatistics {
    #[default]
    Bosonic,
    /// Ensemble of two-level systems (Fermi-like occupation).
    Tls,
}

/// Which quantity `occupation_temperature` computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conversion {
    OccupationFromTemperature,
    TemperatureFromOccupation,
}

/// Thermal occupation of a mode at angular frequency `omega` (rad/s) for
/// temperature `temperature` (K).
///
/// Bosonic: n = 1/(e^x - 1); TLS: n = 1/(e^x + 1), with x = ħω/k_BT.
pub fn occupation_from_temperature<T: Real>(
    temperature: T,
    omega: T,
    statistics: BathStatistics,
) -> Result<T> {
    if !(omega > T::zero()) {
        return Err(Error::param("omega", "must be positive"));
    }
    if temperature < T::zero() || temperature.is_nan() {
        return Err(Error::param("temperature", "must be nonnegative"));
    }
    if temperature == T::zero() {
        return Ok(T::zero());
    }
    let x = hbar::<T>() * omega / (k_b::<T>() * temperature);
    Ok(match statistics {
        BathStatistics::Bosonic => x.exp_m1().recip(),
        BathStatistics::Tls => (x.exp() + T::one()).recip(),
    })
}

/// Inverse of [`occupation_from_temperature`]. Zero occupation maps to 0 K.
///
/// For TLS statistics the occupation must be below 1/2; above that no
/// positive temperature exists.
pub fn temperature_from_occupation<T: Real>(
    occupation: T,
    omega: T,
    statistics: BathStatistics,
) -> Result<T> {
    if !(omega > T::zero()) {
        return Err(Error::param("omega", "must be positive"));
    }
    if occupation < T::zero() || occupation.is_nan() {
        return Err(Error::param("occupation", "must be nonnegative"));
    }
    if occupation == T::zero() {
        return Ok(T::zero());
    }
    let energy = hbar::<T>() * omega;
    let log_ratio = match statistics {
        // ln(1 + n) - ln(n) = ln(1 + 1/n)
        BathStatistics::Bosonic => occupation.recip().ln_1p(),
        BathStatistics::Tls => {
            if occupation >= T::lit(0.5) {
                return Err(Error::Domain(format!(
                    "TLS occupation {occupation} >= 1/2 has no positive temperature"
                )));
            }
            (-occupation).ln_1p() - occupation.ln()
        }
    };
    Ok(energy / (k_b::<T>() * log_ratio))
}

/// Direction-selecting wrapper over the two conversions.
pub fn occupation_temperature<T: Real>(
    value: T,
    omega: T,
    statistics: BathStatistics,
    direction: Conversion,
) -> Result<T> {
    match direction {
        Conversion::OccupationFromTemperature => {
            occupation_from_temperature(value, omega, statistics)
        }
        Conversion::TemperatureFromOccupation => {
            temperature_from_occupation(value, omega, statistics)
        }
    }
}

/// Temperature dependence of a TLS-dominated decay rate,
/// Γ(T) = Γ(0)·tanh(ħω/k_BT).
pub fn tls_rate_scaling<T: Real>(gamma_zero: T, temperature: T, omega: T) -> T {
    if temperature <= T::zero() {
        return gamma_zero;
    }
    gamma_zero * (hbar::<T>() * omega / (k_b::<T>() * temperature)).tanh()
}

/// Thermal occupation equivalent to an excited-state population,
/// from ρ11 = n/(1 + 2n).
pub fn effective_qubit_occupation<T: Real>(rho11: T) -> Result<T> {
    if rho11 < T::zero() || rho11.is_nan() {
        return Err(Error::param("rho11", "must be nonnegative"));
    }
    if rho11 >= T::lit(0.5) {
        return Err(Error::Domain(format!(
            "population {rho11} >= 1/2 has no thermal occupation"
        )));
    }
    Ok(rho11 / (T::one() - T::lit(2.0) * rho11))
}

/// Down/up weights multiplying Γ for a bath of the given statistics:
/// bosonic (n + 1, n), TLS ((1 + n)/(1 + 2n), n/(1 + 2n)).
pub fn thermal_weights<T: Real>(occupation: T, statistics: BathStatistics) -> (T, T) {
    match statistics {
        BathStatistics::Bosonic => (occupation + T::one(), occupation),
        BathStatistics::Tls => {
            let norm = T::one() + T::lit(2.0) * occupation;
            ((T::one() + occupation) / norm, occupation / norm)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::hz_to_rad;

    fn omega() -> f64 {
        hz_to_rad(5.5e9)
    }

    #[test]
    fn reduced_temperatures_for_delta_n() {
        let w = omega();
        let e = crate::scalar::HBAR * w / crate::scalar::K_B;
        let tb = temperature_from_occupation(0.135, w, BathStatistics::Bosonic).unwrap();
        let tt = temperature_from_occupation(0.135, w, BathStatistics::Tls).unwrap();
        assert!((tb / e - 0.47).abs() < 0.01, "bosonic {}", tb / e);
        assert!((tt / e - 0.54).abs() < 0.01, "tls {}", tt / e);
    }

    #[test]
    fn zero_temperature_limits() {
        for stats in [BathStatistics::Bosonic, BathStatistics::Tls] {
            assert_eq!(
                occupation_from_temperature(0.0, omega(), stats).unwrap(),
                0.0
            );
            assert!(occupation_from_temperature(1e-4, omega(), stats).unwrap() < 1e-300);
            assert_eq!(
                temperature_from_occupation(0.0, omega(), stats).unwrap(),
                0.0
            );
        }
    }

    #[test]
    fn tls_rejects_inverted_occupation() {
        let err = temperature_from_occupation(0.5, omega(), BathStatistics::Tls).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
        assert!(temperature_from_occupation(0.7, omega(), BathStatistics::Bosonic).is_ok());
    }

    #[test]
    fn table_temperatures() {
        let w = omega();
        let tr = temperature_from_occupation(0.004, w, BathStatistics::Bosonic).unwrap();
        let tn = temperature_from_occupation(0.139, w, BathStatistics::Bosonic).unwrap();
        assert!((tr - 0.050).abs() / 0.050 < 0.06);
        assert!((tn - 0.131).abs() / 0.131 < 0.06);
    }

    #[test]
    fn tanh_scaling_limits() {
        let w = omega();
        assert_eq!(tls_rate_scaling(1.0, 0.0, w), 1.0);
        assert!(tls_rate_scaling(1.0, 1e6, w) < 1e-6);
        let mut last = 1.0;
        for k in 1..50 {
            let g = tls_rate_scaling(1.0, 0.01 * k as f64, w);
            assert!(g <= last);
            last = g;
        }
    }

    #[test]
    fn tanh_scaling_between_table_temperatures() {
        // Γ(131 mK) = 2π·55 kHz; the printed tanh(ħω/k_BT) law raises the rate
        // by only ~2 kHz on cooling to 50 mK.
        let w = omega();
        let g131 = hz_to_rad(55e3);
        let g0 = g131 / tls_rate_scaling(1.0, 0.131, w);
        let g50 = tls_rate_scaling(g0, 0.050, w);
        let increase_hz = (g50 - g131) / std::f64::consts::TAU;
        assert!(increase_hz > 0.0);
        assert!((increase_hz - 1.99e3).abs() < 0.05e3, "{increase_hz}");
    }

    #[test]
    fn qubit_occupation() {
        let nq = effective_qubit_occupation::<f64>(0.0286).unwrap();
        assert!((nq - 0.030).abs() < 0.001);
        assert_eq!(effective_qubit_occupation(0.0).unwrap(), 0.0);
        assert!(effective_qubit_occupation(0.5).is_err());
        let tq = temperature_from_occupation(nq, omega(), BathStatistics::Bosonic).unwrap();
        assert!((tq - 0.078).abs() / 0.078 < 0.06, "{tq}");
    }

    #[test]
    fn weights_have_equal_detailed_balance_ratio() {
        let (db, ub) = thermal_weights::<f64>(0.139, BathStatistics::Bosonic);
        let (dt, ut) = thermal_weights(0.139, BathStatistics::Tls);
        assert!((ub / db - ut / dt).abs() < 1e-15);
    }
}
