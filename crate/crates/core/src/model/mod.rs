//! Parameter records for the driven transmon with a cold waveguide bath and a
//! hot nonradiative bath.
//!
//! Units: every rate and frequency is an angular quantity in rad/s,
//! temperatures are kelvin, energies joules. Conversions to and from Hz
//! happen only at the file boundary (see [`crate::io`]).

mod rates;
mod thermal;

pub use rates::{DerivedRates, ThreeLevelRates};
pub use thermal::{
    effective_qubit_occupation, occupation_from_temperature, occupation_temperature,
    temperature_from_occupation, thermal_weights, tls_rate_scaling, BathStatistics, Conversion,
};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{hz_to_rad, lit, Real, C, E_CHARGE};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmonSpec<T: Real> {
    pub omega01: T,
    /// ω12 − ω01; negative for a transmon.
    pub anharmonicity: T,
    pub levels: usize,
    pub gamma_phi: T,
}

impl<T: Real> TransmonSpec<T> {
    pub fn omega12(&self) -> T {
        self.omega01 + self.anharmonicity
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega01 > T::zero()) || !self.omega01.is_finite() {
            return Err(Error::param("omega01", "must be positive and finite"));
        }
        if !(self.gamma_phi >= T::zero()) || !self.gamma_phi.is_finite() {
            return Err(Error::param("gamma_phi", "must be nonnegative and finite"));
        }
        match self.levels {
            2 => Ok(()),
            3 if self.omega12() > T::zero() => Ok(()),
            3 => Err(Error::param(
                "anharmonicity",
                "omega01 + anharmonicity must be positive",
            )),
            n => Err(Error::param(
                "levels",
                format!("{n} levels unsupported; use 2 or 3"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BathLabel {
    Radiative,
    Nonradiative,
}

/// One Markovian bath: decay rate Γ_i and thermal occupation n_i at ω01.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec<T: Real> {
    pub label: BathLabel,
    pub gamma: T,
    pub occupation: T,
    pub statistics: BathStatistics,
}

impl<T: Real> BathSpec<T> {
    pub fn new(label: BathLabel, gamma: T, occupation: T, statistics: BathStatistics) -> Self {
        Self {
            label,
            gamma,
            occupation,
            statistics,
        }
    }

    pub fn radiative(gamma: T, occupation: T) -> Self {
        Self::new(
            BathLabel::Radiative,
            gamma,
            occupation,
            BathStatistics::Bosonic,
        )
    }

    pub fn nonradiative(gamma: T, occupation: T) -> Self {
        Self::new(
            BathLabel::Nonradiative,
            gamma,
            occupation,
            BathStatistics::Bosonic,
        )
    }

    pub fn with_statistics(mut self, statistics: BathStatistics) -> Self {
        self.statistics = statistics;
        self
    }

    /// Builds a bath from a temperature rather than an occupation.
    pub fn from_temperature(
        label: BathLabel,
        gamma: T,
        temperature: T,
        omega: T,
        statistics: BathStatistics,
    ) -> Result<Self> {
        let occupation = occupation_from_temperature(temperature, omega, statistics)?;
        Ok(Self::new(label, gamma, occupation, statistics))
    }

    /// Temperature implied by the stored occupation at frequency `omega`.
    pub fn temperature(&self, omega: T) -> Result<T> {
        temperature_from_occupation(self.occupation, omega, self.statistics)
    }

    /// (down, up) weights per unit Γ.
    pub fn weights(&self) -> (T, T) {
        thermal_weights(self.occupation, self.statistics)
    }

    pub fn validate(&self) -> Result<()> {
        let name = match self.label {
            BathLabel::Radiative => "radiative",
            BathLabel::Nonradiative => "nonradiative",
        };
        if !(self.gamma >= T::zero()) || !self.gamma.is_finite() {
            return Err(Error::param(name, "gamma must be nonnegative and finite"));
        }
        if !(self.occupation >= T::zero()) || !self.occupation.is_finite() {
            return Err(Error::param(
                name,
                "occupation must be nonnegative and finite",
            ));
        }
        if self.statistics == BathStatistics::Tls && self.occupation >= lit(0.5) {
            return Err(Error::param(name, "TLS occupation must be below 1/2"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Transition {
    T01,
    T12,
}

/// Coherent drive: Δ = ω_p − ω_transition and complex Rabi rate Ω.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveSpec<T: Real> {
    pub transition: Transition,
    pub detuning: T,
    pub amplitude: C<T>,
}

impl<T: Real> DriveSpec<T> {
    pub fn new(transition: Transition, detuning: T, amplitude: C<T>) -> Self {
        Self {
            transition,
            detuning,
            amplitude,
        }
    }

    /// Real-amplitude drive.
    pub fn real(transition: Transition, detuning: T, rabi: T) -> Self {
        Self::new(transition, detuning, Complex::new(rabi, T::zero()))
    }

    pub fn is_off(&self) -> bool {
        self.amplitude.norm() == T::zero()
    }
}

/// Optional quasiparticle excitation (Γ↑) and decay (Γ↓) channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiparticleSpec<T: Real> {
    pub gamma_up: T,
    pub gamma_down: T,
    /// Superconducting gap Δg in joules.
    pub gap: T,
    /// Junction normal-state resistance, Ω.
    pub r_n: T,
    /// Total qubit capacitance, F.
    pub capacitance: T,
}

impl<T: Real> QuasiparticleSpec<T> {
    /// Aluminium junction values used throughout the examples: Δg = 170 μeV,
    /// R_N = 6.3 kΩ, C = 78 fF.
    pub fn aluminium(gamma_up: T, gamma_down: T) -> Self {
        Self {
            gamma_up,
            gamma_down,
            gap: lit(170e-6 * E_CHARGE),
            r_n: lit(6.3e3),
            capacitance: lit(78e-15),
        }
    }

    pub fn validate(&self, omega01: T) -> Result<()> {
        for (name, v) in [
            ("gamma_up", self.gamma_up),
            ("gamma_down", self.gamma_down),
            ("gap", self.gap),
            ("r_n", self.r_n),
            ("capacitance", self.capacitance),
        ] {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(Error::param(name, "must be nonnegative and finite"));
            }
        }
        if self.gap <= crate::scalar::photon_energy(omega01) {
            return Err(Error::param("gap", "must exceed the qubit photon energy"));
        }
        Ok(())
    }
}

/// Bath occupations seen by the 1↔2 transition of a three-level transmon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionOccupations<T: Real> {
    pub radiative: T,
    pub nonradiative: T,
}

/// Complete description of one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig<T: Real> {
    pub transmon: TransmonSpec<T>,
    pub radiative: BathSpec<T>,
    pub nonradiative: BathSpec<T>,
    pub drives: Vec<DriveSpec<T>>,
    pub quasiparticles: Option<QuasiparticleSpec<T>>,
    /// 1↔2 occupations; defaults to the 0↔1 values when absent.
    pub occupations_12: Option<TransitionOccupations<T>>,
}

impl<T: Real> SystemConfig<T> {
    pub fn new(
        transmon: TransmonSpec<T>,
        radiative: BathSpec<T>,
        nonradiative: BathSpec<T>,
    ) -> Self {
        Self {
            transmon,
            radiative,
            nonradiative,
            drives: Vec::new(),
            quasiparticles: None,
            occupations_12: None,
        }
    }

    /// The sweet-spot device of the measurement: ω01/2π = 5.5 GHz,
    /// δ/2π = −250 MHz, Γr/2π = 227 kHz, Γn/2π = 55 kHz, n_r = 0.004,
    /// n_n = 0.139 and no pure dephasing.
    pub fn table1() -> Self {
        Self::new(
            TransmonSpec {
                omega01: hz_to_rad(lit(5.5e9)),
                anharmonicity: hz_to_rad(lit(-250e6)),
                levels: 2,
                gamma_phi: T::zero(),
            },
            BathSpec::radiative(hz_to_rad(lit(227e3)), lit(0.004)),
            BathSpec::nonradiative(hz_to_rad(lit(55e3)), lit(0.139)),
        )
    }

    pub fn with_levels(mut self, levels: usize) -> Self {
        self.transmon.levels = levels;
        self
    }

    pub fn with_drive(mut self, drive: DriveSpec<T>) -> Self {
        self.drives.retain(|d| d.transition != drive.transition);
        self.drives.push(drive);
        self
    }

    pub fn without_drives(mut self) -> Self {
        self.drives.clear();
        self
    }

    pub fn with_quasiparticles(mut self, qp: QuasiparticleSpec<T>) -> Self {
        self.quasiparticles = Some(qp);
        self
    }

    pub fn with_occupations(mut self, n_r: T, n_n: T) -> Self {
        self.radiative.occupation = n_r;
        self.nonradiative.occupation = n_n;
        self
    }

    pub fn drive(&self, transition: Transition) -> Option<&DriveSpec<T>> {
        self.drives.iter().find(|d| d.transition == transition)
    }

    /// Detuning and Rabi rate on 0↔1, zero when undriven.
    pub fn drive01(&self) -> (T, C<T>) {
        self.drive(Transition::T01)
            .map_or((T::zero(), Complex::new(T::zero(), T::zero())), |d| {
                (d.detuning, d.amplitude)
            })
    }

    pub fn occupations_12(&self) -> TransitionOccupations<T> {
        self.occupations_12.unwrap_or(TransitionOccupations {
            radiative: self.radiative.occupation,
            nonradiative: self.nonradiative.occupation,
        })
    }

    pub fn delta_n(&self) -> T {
        self.nonradiative.occupation - self.radiative.occupation
    }

    pub fn validate(&self) -> Result<()> {
        self.transmon.validate()?;
        if self.radiative.label != BathLabel::Radiative {
            return Err(Error::param("radiative", "bath label must be radiative"));
        }
        if self.nonradiative.label != BathLabel::Nonradiative {
            return Err(Error::param(
                "nonradiative",
                "bath label must be nonradiative",
            ));
        }
        self.radiative.validate()?;
        self.nonradiative.validate()?;
        if self.drives.len() > 2 {
            return Err(Error::param("drives", "at most two drives"));
        }
        for (i, d) in self.drives.iter().enumerate() {
            if !d.detuning.is_finite() || !d.amplitude.re.is_finite() || !d.amplitude.im.is_finite()
            {
                return Err(Error::param("drives", "drive parameters must be finite"));
            }
            if self.drives[..i]
                .iter()
                .any(|o| o.transition == d.transition)
            {
                return Err(Error::param("drives", "at most one drive per transition"));
            }
            if d.transition == Transition::T12 && self.transmon.levels < 3 {
                return Err(Error::param(
                    "drives",
                    "a 1-2 drive needs a three-level transmon",
                ));
            }
        }
        if let Some(qp) = &self.quasiparticles {
            qp.validate(self.transmon.omega01)?;
        }
        if let Some(o) = &self.occupations_12 {
            for v in [o.radiative, o.nonradiative] {
                if !(v >= T::zero()) || !v.is_finite() {
                    return Err(Error::param(
                        "occupations_12",
                        "must be nonnegative and finite",
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn rates(&self) -> DerivedRates<T> {
        DerivedRates::from_config(self)
    }
}

/// `derive_rates` entry point.
pub fn derive_rates<T: Real>(config: &SystemConfig<T>) -> DerivedRates<T> {
    DerivedRates::from_config(config)
}
