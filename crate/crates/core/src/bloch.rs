//! Closed Heisenberg equations of motion for low-order moments.
//!
//! Two levels: x = (s1, s1*, s2) with s1 = ⟨σ−⟩, s2 = ⟨σ+σ−⟩ and
//! dx/dt = M x + B. Weakly driven three levels: x = (w1, w1*, w2, w3) with
//! w1 = ⟨σ−01⟩, w2 = ⟨σ+01σ−01⟩ = ρ11, w3 = ⟨σ−01σ+01⟩ = ρ00, where the
//! normalisation ρ22 = 1 − w2 − w3 closes the set when the 1↔2 drive is off.

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::lindblad::{CorrelationTrace, CorrelatorKind};
use crate::model::{DerivedRates, ThreeLevelRates};
use crate::scalar::{cplx, creal, lit, Real, C};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentBasis {
    TwoLevel,
    ThreeLevelWeak,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentSystem<T: Real> {
    pub basis: MomentBasis,
    pub m: CMatrix<T>,
    pub b: Vec<C<T>>,
    pub labels: &'static [&'static str],
}

/// M and B of the two-level system for drive detuning Δ = ω_p − ω01 and
/// Rabi rate Ω.
pub fn eom_two_level<T: Real>(delta: T, omega: C<T>, rates: &DerivedRates<T>) -> MomentSystem<T> {
    let i = cplx(T::zero(), T::one());
    let half = lit::<T>(0.5);
    let g2 = rates.gamma_2;
    let z = C::new(T::zero(), T::zero());
    let m = CMatrix::from_rows(&[
        vec![i * delta - g2, z, i * omega],
        vec![z, -i * delta - g2, -i * omega.conj()],
        vec![
            i * omega.conj() * half,
            -i * omega * half,
            creal(-rates.gamma_1),
        ],
    ]);
    let b = vec![
        -i * omega * half,
        i * omega.conj() * half,
        creal(rates.gamma_plus),
    ];
    MomentSystem {
        basis: MomentBasis::TwoLevel,
        m,
        b,
        labels: &["s1", "s1*", "s2"],
    }
}

/// Closed 4×4 system of a three-level transmon probed on 0↔1 with the 1↔2
/// drive off.
///
/// The population rows carry the actual 1↔2 transition rates 2Γ±^(12); the
/// coherence rows use Γ2^T = Γ2^(01) + Γ+^(12). Both agree with the Lindblad
/// generator.
pub fn eom_three_level_weak<T: Real>(
    delta01: T,
    omega1: C<T>,
    omega2: C<T>,
    rates: &ThreeLevelRates<T>,
) -> Result<MomentSystem<T>> {
    if omega2.norm() != T::zero() {
        return Err(Error::param(
            "omega2",
            "the weak-drive moment set closes only with the 1-2 drive off",
        ));
    }
    let i = cplx(T::zero(), T::one());
    let half = lit::<T>(0.5);
    let two = lit::<T>(2.0);
    let z = C::new(T::zero(), T::zero());
    let o = omega1 * half;
    let oc = omega1.conj() * half;
    let g2t = rates.gamma_2_t;
    let up12 = two * rates.gamma_plus_12;
    let down12 = two * rates.gamma_minus_12;
    let m = CMatrix::from_rows(&[
        vec![i * delta01 - g2t, z, i * o, -i * o],
        vec![z, -i * delta01 - g2t, -i * oc, i * oc],
        vec![
            i * oc,
            -i * o,
            creal(-rates.gamma_minus_01 - up12 - down12),
            creal(rates.gamma_plus_01 - down12),
        ],
        vec![
            -i * oc,
            i * o,
            creal(rates.gamma_minus_01),
            creal(-rates.gamma_plus_01),
        ],
    ]);
    let b = vec![z, z, creal(down12), z];
    Ok(MomentSystem {
        basis: MomentBasis::ThreeLevelWeak,
        m,
        b,
        labels: &["w1", "w1*", "w2", "w3"],
    })
}

impl<T: Real> MomentSystem<T> {
    pub fn order(&self) -> usize {
        self.b.len()
    }

    /// Eigenvalues of M (the correlator poles).
    pub fn poles(&self) -> Vec<C<T>> {
        self.m.eigenvalues()
    }

    /// Largest real part among the poles.
    pub fn spectral_abscissa(&self) -> T {
        self.poles()
            .iter()
            .fold(T::neg_infinity(), |m, z| m.max(z.re))
    }

    fn check_stable(&self) -> Result<()> {
        let a = self.spectral_abscissa();
        if !(a < T::zero()) {
            return Err(Error::Unstable(a.as_f64()));
        }
        Ok(())
    }

    /// Response of the moments to an inhomogeneity scaled by `weight`:
    /// solves x(t) = e^{Mt}(x0 − x∞) + x∞ with x∞ = −M⁻¹B·weight.
    fn response(
        &self,
        x0: &[C<T>],
        weight: C<T>,
        times: &[T],
        component: usize,
    ) -> Result<Vec<C<T>>> {
        let neg_b: Vec<C<T>> = self.b.iter().map(|&v| -v * weight).collect();
        let x_inf = self
            .m
            .solve(&neg_b)
            .map_err(|_| Error::Singular("moment matrix"))?;
        let dx: Vec<C<T>> = x0.iter().zip(&x_inf).map(|(&a, &b)| a - b).collect();
        times
            .iter()
            .map(|&t| {
                if t < T::zero() {
                    return Err(Error::param("times", "must be nonnegative"));
                }
                let p = self.m.scale_re(t).expm()?;
                Ok(p.mul_vec(&dx)[component] + x_inf[component])
            })
            .collect()
    }
}

/// Steady moments, M x = −B.
pub fn moment_steady<T: Real>(system: &MomentSystem<T>) -> Result<Vec<C<T>>> {
    let neg_b: Vec<C<T>> = system.b.iter().map(|&v| -v).collect();
    system
        .m
        .solve(&neg_b)
        .map_err(|_| Error::Singular("moment matrix"))
}

/// Stationary two-time correlators from the moment equations via the
/// quantum regression theorem; `steady` is the output of [`moment_steady`].
pub fn correlator_from_eom<T: Real>(
    system: &MomentSystem<T>,
    steady: &[C<T>],
    kind: CorrelatorKind,
    times: &[T],
) -> Result<CorrelationTrace<T>> {
    system.check_stable()?;
    if steady.len() != system.order() {
        return Err(Error::param(
            "steady",
            "length differs from the moment order",
        ));
    }
    let z = C::new(T::zero(), T::zero());
    let s1 = steady[0];
    // ⟨X(t)σ−(0)⟩ and ⟨σ−(0)X(t)⟩ obey the moment equations with B scaled by ⟨σ−⟩.
    let (x0, component) = match (system.basis, kind) {
        (MomentBasis::TwoLevel, CorrelatorKind::SpSm) => (vec![z, steady[2], z], 1),
        (MomentBasis::TwoLevel, CorrelatorKind::SmSp) => {
            (vec![z, creal(T::one()) - steady[2], s1], 1)
        }
        (MomentBasis::ThreeLevelWeak, CorrelatorKind::SpSm) => (vec![z, steady[2], z, s1], 1),
        (MomentBasis::ThreeLevelWeak, CorrelatorKind::SmSp) => (vec![z, steady[3], s1, z], 1),
        _ => {
            return Err(Error::param(
                "kind",
                "only the two-time correlators are available",
            ))
        }
    };
    let values = system.response(&x0, s1, times, component)?;
    Ok(CorrelationTrace {
        times: times.to_vec(),
        values,
        kind,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SystemConfig;
    use crate::scalar::hz_to_rad;

    fn table1() -> DerivedRates<f64> {
        SystemConfig::<f64>::table1().rates()
    }

    #[test]
    fn undriven_structure() {
        let r = table1();
        let s = eom_two_level(0.3e6, C::new(0.0, 0.0), &r);
        assert_eq!(s.m[(0, 2)], C::new(0.0, 0.0));
        assert_eq!(s.m[(2, 0)], C::new(0.0, 0.0));
        assert_eq!(s.m[(0, 0)], C::new(-r.gamma_2, 0.3e6));
    }

    #[test]
    fn resonant_steady_coherence() {
        let r = table1();
        let w = hz_to_rad(95e3);
        let x = moment_steady(&eom_two_level(0.0, C::new(w, 0.0), &r)).unwrap();
        let expect = C::new(
            0.0,
            -w * (r.gamma_1 - 2.0 * r.gamma_plus) / (2.0 * (w * w + r.gamma_2 * r.gamma_1)),
        );
        assert!((x[0] - expect).norm() < 1e-12);
        assert!((x[1] - x[0].conj()).norm() < 1e-15);
    }

    #[test]
    fn limits() {
        let r = table1();
        let big = moment_steady(&eom_two_level(0.0, C::new(1e12, 0.0), &r)).unwrap();
        assert!((big[2].re - 0.5).abs() < 1e-9);
        let far = moment_steady(&eom_two_level(1e12, C::new(1e6, 0.0), &r)).unwrap();
        assert!((far[2].re - r.gamma_plus / r.gamma_1).abs() < 1e-9);
        assert!(far[0].norm() < 1e-5);
    }

    #[test]
    fn undriven_log_slope() {
        let r = table1();
        let s = eom_two_level(0.0, C::new(0.0, 0.0), &r);
        let x = moment_steady(&s).unwrap();
        let t1 = 1.0 / r.gamma_2;
        let tr = correlator_from_eom(&s, &x, CorrelatorKind::SpSm, &[0.0, t1]).unwrap();
        let slope = -(tr.values[1].re / tr.values[0].re).ln() / t1;
        assert!((slope - r.gamma_2).abs() < 1e-9 * r.gamma_2);
        assert!((tr.values[0] - x[2]).norm() < 1e-15);
    }

    #[test]
    fn strong_drive_has_three_poles() {
        let r = table1();
        let s = eom_two_level(0.0, C::new(hz_to_rad(8.8e6), 0.0), &r);
        let mut p = s.poles();
        p.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        assert!((p[1].im).abs() < 1e-3 * r.gamma_2);
        assert!((p[1].re + r.gamma_2).abs() < 1e-6 * r.gamma_2);
        assert!((p[2].im - hz_to_rad(8.8e6)).abs() < 1e-3 * hz_to_rad(8.8e6));
    }

    #[test]
    fn three_level_rejects_second_drive() {
        let r = ThreeLevelRates::from_config(&SystemConfig::<f64>::table1().with_levels(3));
        assert!(eom_three_level_weak(0.0, C::new(1.0, 0.0), C::new(1.0, 0.0), &r).is_err());
    }

    #[test]
    fn three_level_zero_temperature_ground() {
        let c = SystemConfig::<f64>::table1()
            .with_levels(3)
            .with_occupations(0.0, 0.0);
        let r = ThreeLevelRates::from_config(&c);
        let x = moment_steady(
            &eom_three_level_weak(0.0, C::new(0.0, 0.0), C::new(0.0, 0.0), &r).unwrap(),
        )
        .unwrap();
        assert!(x[2].norm() < 1e-15);
        assert!((x[3].re - 1.0).abs() < 1e-15);
    }

    fn lindblad_pair(
        c: &SystemConfig<f64>,
        times: &[f64],
    ) -> (crate::lindblad::DensityMatrix<f64>, Vec<Vec<C<f64>>>) {
        use crate::lindblad::{build_liouvillian, steady_state};
        let l = build_liouvillian(c).unwrap();
        let ss = steady_state(&l).unwrap();
        let v = [CorrelatorKind::SpSm, CorrelatorKind::SmSp]
            .iter()
            .map(|&k| {
                CorrelationTrace::stationary(&l, &ss, k, times)
                    .unwrap()
                    .values
            })
            .collect();
        (ss, v)
    }

    #[test]
    fn two_level_matches_lindblad() {
        use crate::model::{DriveSpec, Transition};
        let mut c = SystemConfig::<f64>::table1().with_drive(DriveSpec::new(
            Transition::T01,
            hz_to_rad(4e4),
            C::new(hz_to_rad(2e5), hz_to_rad(1e5)),
        ));
        c.transmon.gamma_phi = 3e4;
        let r = c.rates();
        let (d, o) = c.drive01();
        let s = eom_two_level(d, o, &r);
        let x = moment_steady(&s).unwrap();
        let ts: Vec<f64> = (0..12).map(|k| k as f64 * 0.4 / r.gamma_2).collect();
        let (ss, lv) = lindblad_pair(&c, &ts);
        let s1 = ss.expect(&crate::lindblad::sigma_minus(2));
        assert!((x[0] - s1).norm() < 1e-10);
        assert!((x[2].re - ss.population(1)).abs() < 1e-10);
        for (k, kind) in [CorrelatorKind::SpSm, CorrelatorKind::SmSp]
            .into_iter()
            .enumerate()
        {
            let tr = correlator_from_eom(&s, &x, kind, &ts).unwrap();
            for (a, b) in tr.values.iter().zip(&lv[k]) {
                assert!((a - b).norm() < 1e-9, "{kind:?} {a} {b}");
            }
        }
    }

    #[test]
    fn three_level_matches_lindblad() {
        use crate::model::{DriveSpec, Transition};
        let mut c = SystemConfig::<f64>::table1()
            .with_levels(3)
            .with_occupations(0.05, 0.2)
            .with_drive(DriveSpec::real(
                Transition::T01,
                hz_to_rad(-3e4),
                hz_to_rad(1.5e5),
            ));
        c.transmon.gamma_phi = 2e4;
        let r = ThreeLevelRates::from_config(&c);
        let (d, o) = c.drive01();
        let s = eom_three_level_weak(d, o, C::new(0.0, 0.0), &r).unwrap();
        let x = moment_steady(&s).unwrap();
        let ts: Vec<f64> = (0..12).map(|k| k as f64 * 0.4 / r.gamma_2_t).collect();
        let (ss, lv) = lindblad_pair(&c, &ts);
        assert!((x[0] - ss.expect(&crate::lindblad::sigma_minus(3))).norm() < 1e-10);
        assert!((x[2].re - ss.population(1)).abs() < 1e-10);
        assert!((x[3].re - ss.population(0)).abs() < 1e-10);
        for (k, kind) in [CorrelatorKind::SpSm, CorrelatorKind::SmSp]
            .into_iter()
            .enumerate()
        {
            let tr = correlator_from_eom(&s, &x, kind, &ts).unwrap();
            for (a, b) in tr.values.iter().zip(&lv[k]) {
                assert!((a - b).norm() < 1e-9, "{kind:?} {a} {b}");
            }
        }
    }

    #[test]
    fn unstable_system_rejected() {
        let mut r = table1();
        r.gamma_2 = -1.0;
        let s = eom_two_level(0.0, C::new(0.0, 0.0), &r);
        let x = vec![C::new(0.0, 0.0); 3];
        assert!(matches!(
            correlator_from_eom(&s, &x, CorrelatorKind::SpSm, &[0.0]),
            Err(Error::Unstable(_))
        ));
    }
}
