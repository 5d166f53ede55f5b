use super::{sigma_minus, sigma_plus, vectorize, DensityMatrix, Superoperator};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{tol, Real, C};

/// Which correlator a trace holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelatorKind {
    /// ⟨σ+(t)σ−(0)⟩
    SpSm,
    /// ⟨σ−(0)σ+(t)⟩
    SmSp,
    /// ⟨σ−(t)⟩ from a given initial state
    Sm,
    /// ⟨σ+(t)⟩ from a given initial state
    Sp,
}

/// Operator ordering of a two-time correlator ⟨·⟩ with A evaluated at t.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ordering {
    /// ⟨A(t)B(0)⟩ = Tr{A e^{Lt}[Bρ]}
    ABAtZero,
    /// ⟨B(0)A(t)⟩ = Tr{A e^{Lt}[ρB]}
    BAtZeroA,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTrace<T: Real> {
    pub times: Vec<T>,
    pub values: Vec<C<T>>,
    pub kind: CorrelatorKind,
}

impl<T: Real> CorrelationTrace<T> {
    /// ⟨σ+(t)σ−(0)⟩ or ⟨σ−(0)σ+(t)⟩ in the stationary state of `l`.
    pub fn stationary(
        l: &Superoperator<T>,
        steady: &DensityMatrix<T>,
        kind: CorrelatorKind,
        times: &[T],
    ) -> Result<Self> {
        let d = l.dim();
        let (a, b) = (sigma_plus::<T>(d), sigma_minus::<T>(d));
        let ordering = match kind {
            CorrelatorKind::SpSm => Ordering::ABAtZero,
            CorrelatorKind::SmSp => Ordering::BAtZeroA,
            _ => return Err(Error::param("kind", "not a two-time correlator")),
        };
        let values = regression_correlator(l, steady, &a, &b, ordering, times)?;
        Ok(Self {
            times: times.to_vec(),
            values,
            kind,
        })
    }

    /// ⟨σ∓(t)⟩ starting from `rho0`.
    pub fn mean(
        l: &Superoperator<T>,
        rho0: &DensityMatrix<T>,
        kind: CorrelatorKind,
        times: &[T],
    ) -> Result<Self> {
        let d = l.dim();
        let op = match kind {
            CorrelatorKind::Sm => sigma_minus::<T>(d),
            CorrelatorKind::Sp => sigma_plus::<T>(d),
            _ => return Err(Error::param("kind", "not a one-time mean")),
        };
        let x0 = rho0.to_vec();
        let values = times
            .iter()
            .map(|&t| {
                if t < T::zero() {
                    return Err(Error::param("times", "must be nonnegative"));
                }
                Ok(trace_with(&op, &propagate(l, t, &x0)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            times: times.to_vec(),
            values,
            kind,
        })
    }
}

/// Tr{A X} for vec(X) in column-stacked form.
pub(crate) fn trace_with<T: Real>(a: &CMatrix<T>, x: &[C<T>]) -> C<T> {
    let d = a.rows();
    let mut s = C::new(T::zero(), T::zero());
    for i in 0..d {
        for j in 0..d {
            s += a[(j, i)] * x[i + d * j];
        }
    }
    s
}

fn propagate<T: Real>(l: &Superoperator<T>, t: T, x: &[C<T>]) -> Result<Vec<C<T>>> {
    if t == T::zero() {
        return Ok(x.to_vec());
    }
    Ok(l.matrix().scale_re(t).expm()?.mul_vec(x))
}

/// Two-time correlator by the quantum regression theorem. Negative times use
/// the Hermitian symmetry of stationary correlators.
pub fn regression_correlator<T: Real>(
    l: &Superoperator<T>,
    steady: &DensityMatrix<T>,
    a: &CMatrix<T>,
    b: &CMatrix<T>,
    ordering: Ordering,
    times: &[T],
) -> Result<Vec<C<T>>> {
    let scale = l.scale_of();
    let residual = l
        .apply(&steady.to_vec())
        .iter()
        .fold(T::zero(), |m, z| m.max(z.norm()));
    let limit = tol::<T>(1e-8, 1e-3);
    if residual > limit * scale.max(T::min_positive_value()) {
        return Err(Error::NotStationary {
            residual: (residual / scale).as_f64(),
        });
    }
    let rho = steady.matrix();
    let seed = |op_left: &CMatrix<T>, op_right: &CMatrix<T>| match ordering {
        Ordering::ABAtZero => (op_left.clone(), vectorize(&(op_right * rho))),
        Ordering::BAtZeroA => (op_left.clone(), vectorize(&(rho * op_right))),
    };
    let (fa, fx) = seed(a, b);
    let (ba, bx) = seed(&b.adjoint(), &a.adjoint());
    times
        .iter()
        .map(|&t| {
            if t >= T::zero() {
                Ok(trace_with(&fa, &propagate(l, t, &fx)?))
            } else {
                Ok(trace_with(&ba, &propagate(l, -t, &bx)?).conj())
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::{build_liouvillian, steady_state};
    use crate::model::{DriveSpec, SystemConfig, Transition};
    use crate::scalar::hz_to_rad;
    use crate::spectrum::linspace;

    #[test]
    fn undriven_decay_matches_closed_form() {
        let delta = hz_to_rad(2e5);
        let mut c =
            SystemConfig::<f64>::table1().with_drive(DriveSpec::real(Transition::T01, delta, 0.0));
        c.transmon.gamma_phi = 1e5;
        let r = c.rates();
        let l = build_liouvillian(&c).unwrap();
        let ss = steady_state(&l).unwrap();
        let ts = linspace(-5.0 / r.gamma_2, 5.0 / r.gamma_2, 41);
        let tr = CorrelationTrace::stationary(&l, &ss, CorrelatorKind::SpSm, &ts).unwrap();
        let s2 = r.gamma_plus / r.gamma_1;
        for (&t, &v) in ts.iter().zip(&tr.values) {
            let expect = C::new(0.0, -delta * t).exp() * (-r.gamma_2 * t.abs()).exp() * s2;
            assert!((v - expect).norm() < 1e-8 * s2.max(1e-3), "t={t}");
        }
    }

    #[test]
    fn equal_time_values() {
        let c = SystemConfig::<f64>::table1().with_drive(DriveSpec::real(
            Transition::T01,
            0.0,
            hz_to_rad(3e5),
        ));
        let l = build_liouvillian(&c).unwrap();
        let ss = steady_state(&l).unwrap();
        let a = CorrelationTrace::stationary(&l, &ss, CorrelatorKind::SpSm, &[0.0]).unwrap();
        let b = CorrelationTrace::stationary(&l, &ss, CorrelatorKind::SmSp, &[0.0]).unwrap();
        assert!((a.values[0].re - ss.population(1)).abs() < 1e-12);
        assert!((b.values[0].re - ss.population(0)).abs() < 1e-12);
    }

    #[test]
    fn undriven_ratio_is_down_over_up() {
        let c = SystemConfig::<f64>::table1();
        let r = c.rates();
        let l = build_liouvillian(&c).unwrap();
        let ss = steady_state(&l).unwrap();
        let a = CorrelationTrace::stationary(&l, &ss, CorrelatorKind::SpSm, &[0.0]).unwrap();
        let b = CorrelationTrace::stationary(&l, &ss, CorrelatorKind::SmSp, &[0.0]).unwrap();
        let ratio = b.values[0].re / a.values[0].re;
        assert!((ratio - r.gamma_minus / r.gamma_plus).abs() < 1e-9 * ratio);
    }

    #[test]
    fn rejects_non_stationary_input() {
        let c = SystemConfig::<f64>::table1();
        let l = build_liouvillian(&c).unwrap();
        let rho = DensityMatrix::basis(2, 1);
        assert!(CorrelationTrace::stationary(&l, &rho, CorrelatorKind::SpSm, &[0.0]).is_err());
    }
}
