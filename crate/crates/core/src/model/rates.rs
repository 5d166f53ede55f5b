use super::{thermal_weights, BathStatistics, SystemConfig};
use crate::scalar::{hz_to_rad, lit, Real};

/// Composite rates of the two-level model.
///
/// Γ+ and Γ− are the total upward and downward transition rates,
/// Γ1 = Γ+ + Γ− the energy relaxation rate and Γ2 = Γφ + Γ1/2 the
/// coherence decay rate. The bare inputs are kept alongside so that every
/// closed form can be evaluated from this record alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedRates<T: Real> {
    pub gamma_r: T,
    pub gamma_n: T,
    pub n_r: T,
    pub n_n: T,
    pub gamma_phi: T,
    pub gamma_plus: T,
    pub gamma_minus: T,
    pub gamma_1: T,
    pub gamma_2: T,
}

impl<T: Real> DerivedRates<T> {
    /// Bosonic baths.
    pub fn new(gamma_r: T, n_r: T, gamma_n: T, n_n: T, gamma_phi: T) -> Self {
        Self::with_statistics(
            gamma_r,
            n_r,
            BathStatistics::Bosonic,
            gamma_n,
            n_n,
            BathStatistics::Bosonic,
            gamma_phi,
        )
    }

    pub fn with_statistics(
        gamma_r: T,
        n_r: T,
        stats_r: BathStatistics,
        gamma_n: T,
        n_n: T,
        stats_n: BathStatistics,
        gamma_phi: T,
    ) -> Self {
        let (down_r, up_r) = thermal_weights(n_r, stats_r);
        let (down_n, up_n) = thermal_weights(n_n, stats_n);
        let gamma_plus = gamma_r * up_r + gamma_n * up_n;
        let gamma_minus = gamma_r * down_r + gamma_n * down_n;
        let gamma_1 = gamma_plus + gamma_minus;
        Self {
            gamma_r,
            gamma_n,
            n_r,
            n_n,
            gamma_phi,
            gamma_plus,
            gamma_minus,
            gamma_1,
            gamma_2: gamma_phi + gamma_1 / lit(2.0),
        }
    }

    /// Rates with a measured linewidth Γ2 in place of a dephasing rate.
    /// The implied Γφ = Γ2 − Γ1/2 may come out slightly negative when the
    /// measured linewidth is narrower than Γ1/2; the closed forms accept that,
    /// the Lindblad generator does not.
    pub fn from_linewidth(gamma_r: T, n_r: T, gamma_n: T, n_n: T, gamma_2: T) -> Self {
        let mut rates = Self::new(gamma_r, n_r, gamma_n, n_n, T::zero());
        rates.gamma_phi = gamma_2 - rates.gamma_1 / lit(2.0);
        rates.gamma_2 = gamma_2;
        rates
    }

    pub fn from_config(config: &SystemConfig<T>) -> Self {
        Self::with_statistics(
            config.radiative.gamma,
            config.radiative.occupation,
            config.radiative.statistics,
            config.nonradiative.gamma,
            config.nonradiative.occupation,
            config.nonradiative.statistics,
            config.transmon.gamma_phi,
        )
    }

    /// The rate set of the measured device with the fitted linewidth
    /// Γ2/2π = 143 kHz instead of the Γφ = 0 value Γ1/2.
    pub fn table1_measured() -> Self {
        Self::from_linewidth(
            hz_to_rad(lit(227e3)),
            lit(0.004),
            hz_to_rad(lit(55e3)),
            lit(0.139),
            hz_to_rad(lit(143e3)),
        )
    }

    pub fn delta_n(&self) -> T {
        self.n_n - self.n_r
    }

    /// Thermal excited-state population Γ+/Γ1.
    pub fn rho11_thermal(&self) -> T {
        self.gamma_plus / self.gamma_1
    }

    /// Weak-probe reflection numerator Γr(1 − 2Γ+/Γ1).
    pub fn reflection_numerator(&self) -> T {
        self.gamma_r * (T::one() - lit::<T>(2.0) * self.gamma_plus / self.gamma_1)
    }
}

/// Rates of the three-level model.
///
/// The 1↔2 quantities follow the "convenience" convention: Γ±^(12) are built
/// from the same Γr, Γn as the 0↔1 transition, while the generator applies
/// twice these rates to the 1↔2 channels (larger dipole moment).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeLevelRates<T: Real> {
    pub gamma_r: T,
    pub gamma_n: T,
    pub gamma_phi: T,
    pub n_r01: T,
    pub n_n01: T,
    pub n_r12: T,
    pub n_n12: T,
    pub gamma_plus_01: T,
    pub gamma_minus_01: T,
    pub gamma_1_01: T,
    pub gamma_2_01: T,
    pub gamma_plus_12: T,
    pub gamma_minus_12: T,
    pub gamma_1_12: T,
    /// Γ2^(01) + Γ+^(12): 0↔1 coherence decay including thermal hopping to |2⟩.
    pub gamma_2_t: T,
    /// Γφ + Γ+^(01)/2 + Γ−^(12): decay of the 0↔2 coherence.
    pub gamma_2_02: T,
}

impl<T: Real> ThreeLevelRates<T> {
    pub fn new(gamma_r: T, gamma_n: T, gamma_phi: T, n01: (T, T), n12: (T, T)) -> Self {
        let (n_r01, n_n01) = n01;
        let (n_r12, n_n12) = n12;
        let one = T::one();
        let gamma_plus_01 = gamma_r * n_r01 + gamma_n * n_n01;
        let gamma_minus_01 = gamma_r * (n_r01 + one) + gamma_n * (n_n01 + one);
        let gamma_plus_12 = gamma_r * n_r12 + gamma_n * n_n12;
        let gamma_minus_12 = gamma_r * (n_r12 + one) + gamma_n * (n_n12 + one);
        let gamma_1_01 = gamma_plus_01 + gamma_minus_01;
        let gamma_2_01 = gamma_phi + gamma_1_01 / lit(2.0);
        Self {
            gamma_r,
            gamma_n,
            gamma_phi,
            n_r01,
            n_n01,
            n_r12,
            n_n12,
            gamma_plus_01,
            gamma_minus_01,
            gamma_1_01,
            gamma_2_01,
            gamma_plus_12,
            gamma_minus_12,
            gamma_1_12: gamma_plus_12 + gamma_minus_12,
            gamma_2_t: gamma_2_01 + gamma_plus_12,
            gamma_2_02: gamma_phi + gamma_plus_01 / lit(2.0) + gamma_minus_12,
        }
    }

    pub fn from_config(config: &SystemConfig<T>) -> Self {
        let o12 = config.occupations_12();
        Self::new(
            config.radiative.gamma,
            config.nonradiative.gamma,
            config.transmon.gamma_phi,
            (config.radiative.occupation, config.nonradiative.occupation),
            (o12.radiative, o12.nonradiative),
        )
    }

    pub fn delta_n(&self) -> T {
        self.n_n01 - self.n_r01
    }

    /// Reflection prefactor 𝒢 = Γ−12·Γ1_01 / (Γ+01·Γ+12 + Γ−12·Γ1_01).
    pub fn g_factor(&self) -> T {
        let a = self.gamma_minus_12 * self.gamma_1_01;
        a / (self.gamma_plus_01 * self.gamma_plus_12 + a)
    }

    /// Strong-drive center-peak prefactor ℱ = Γ−12/(2Γ−12 + Γ+12).
    pub fn f_factor(&self) -> T {
        self.gamma_minus_12 / (lit::<T>(2.0) * self.gamma_minus_12 + self.gamma_plus_12)
    }

    /// Thermal-spectrum prefactor 𝒴 = Γ−12/(Γ−12·Γ1_01 + Γ+12·Γ+01).
    pub fn y_factor(&self) -> T {
        self.gamma_minus_12
            / (self.gamma_minus_12 * self.gamma_1_01 + self.gamma_plus_12 * self.gamma_plus_01)
    }

    /// The two-level record seen by the 0↔1 transition alone.
    pub fn two_level(&self) -> DerivedRates<T> {
        DerivedRates::new(
            self.gamma_r,
            self.n_r01,
            self.gamma_n,
            self.n_n01,
            self.gamma_phi,
        )
    }
}
