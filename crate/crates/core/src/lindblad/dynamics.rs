use super::{DensityMatrix, Superoperator};
use crate::error::{Error, Result};
use crate::scalar::{creal, lit, tol, Real, C};

fn positivity_tol<T: Real>() -> T {
    if T::epsilon() < lit(1e-10) {
        lit(1e-10)
    } else {
        lit(1e-5)
    }
}

/// Unique fixed point of `l`.
///
/// One row of the generator is replaced by the trace functional and the
/// resulting square system is solved directly. A (numerically) rank-deficient
/// system means the kernel is more than one-dimensional.
pub fn steady_state<T: Real>(l: &Superoperator<T>) -> Result<DensityMatrix<T>> {
    let d = l.dim();
    let scale = l.scale_of();
    if !(scale > T::zero()) {
        return Err(Error::DegenerateSteadyState(
            "generator is identically zero".into(),
        ));
    }
    if l.trace_defect() > scale * lit(1e-10) {
        return Err(Error::param("L", "generator is not trace preserving"));
    }
    let mut a = l.matrix().clone();
    for col in 0..d * d {
        a[(0, col)] = C::new(T::zero(), T::zero());
    }
    for i in 0..d {
        a[(0, i + d * i)] = creal(scale);
    }
    let lu = a
        .lu()
        .map_err(|_| Error::DegenerateSteadyState("generator kernel has dimension > 1".into()))?;
    let pivot_floor = scale * T::epsilon().powf(lit(0.75));
    if lu.min_pivot() < pivot_floor {
        return Err(Error::DegenerateSteadyState(format!(
            "generator kernel has dimension > 1 (pivot {:.3e} of scale {:.3e})",
            lu.min_pivot().as_f64(),
            scale.as_f64()
        )));
    }
    let mut b = vec![C::new(T::zero(), T::zero()); d * d];
    b[0] = creal(scale);
    let x = lu.solve(&b);
    let rho = DensityMatrix::from_vec(&x, d).hermitized();

    let residual = l
        .apply(&rho.to_vec())
        .iter()
        .fold(T::zero(), |m, z| m.max(z.norm()));
    let res_tol = tol::<T>(1e-10, 1e-4);
    if residual > res_tol * scale {
        return Err(Error::NotStationary {
            residual: (residual / scale).as_f64(),
        });
    }
    if !rho.is_positive(positivity_tol()) {
        return Err(Error::Domain(
            "steady state has a negative eigenvalue".into(),
        ));
    }
    Ok(rho)
}

#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions<T: Real> {
    pub rtol: T,
    pub atol: T,
    pub max_steps: usize,
}

impl<T: Real> Default for EvolveOptions<T> {
    fn default() -> Self {
        let f64_like = T::epsilon() < lit(1e-10);
        Self {
            rtol: if f64_like { lit(1e-9) } else { lit(1e-5) },
            atol: if f64_like { lit(1e-12) } else { lit(1e-7) },
            max_steps: 1_000_000,
        }
    }
}

/// ρ(t) on a strictly increasing grid starting at t_grid[0] with ρ(t_grid[0]) = rho0.
pub fn evolve<T: Real>(
    rho0: &DensityMatrix<T>,
    l: &Superoperator<T>,
    t_grid: &[T],
) -> Result<Vec<DensityMatrix<T>>> {
    evolve_with(rho0, l, t_grid, EvolveOptions::default())
}

// Dormand–Prince 5(4) tableau; the generator is time independent so the
// stage nodes never enter.
const A: [&[f64]; 6] = [
    &[1.0 / 5.0],
    &[3.0 / 40.0, 9.0 / 40.0],
    &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
    &[
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
    ],
    &[
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
    ],
    &[
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

pub fn evolve_with<T: Real>(
    rho0: &DensityMatrix<T>,
    l: &Superoperator<T>,
    t_grid: &[T],
    opts: EvolveOptions<T>,
) -> Result<Vec<DensityMatrix<T>>> {
    if rho0.dim() != l.dim() {
        return Err(Error::param(
            "rho0",
            "dimension does not match the generator",
        ));
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::param("t_grid", "must be strictly increasing"));
    }
    let Some(&t_start) = t_grid.first() else {
        return Ok(Vec::new());
    };
    let d = l.dim();
    let mut y = rho0.to_vec();
    let mut out = vec![rho0.clone()];
    let scale = l.scale_of();
    if scale == T::zero() {
        out.extend(t_grid[1..].iter().map(|_| rho0.clone()));
        return Ok(out);
    }

    let a: Vec<Vec<T>> = A
        .iter()
        .map(|row| row.iter().map(|&x| lit(x)).collect())
        .collect();
    let e: Vec<T> = E.iter().map(|&x| lit(x)).collect();

    let mut t = t_start;
    let mut h = lit::<T>(0.01) / scale;
    let mut steps = 0usize;
    let mut k1 = l.apply(&y);
    for &t_target in &t_grid[1..] {
        while t < t_target {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::StepUnderflow {
                    t: t.as_f64(),
                    h: h.as_f64(),
                });
            }
            let last = t + h >= t_target;
            let h_step = if last { t_target - t } else { h };
            if h_step <= t.abs().max(t_target.abs()) * T::epsilon() * lit(8.0) && !last {
                return Err(Error::StepUnderflow {
                    t: t.as_f64(),
                    h: h_step.as_f64(),
                });
            }

            let mut ks: Vec<Vec<C<T>>> = Vec::with_capacity(7);
            ks.push(k1.clone());
            let mut y_new = y.clone();
            for row in &a {
                let stage: Vec<C<T>> = (0..y.len())
                    .map(|i| {
                        let mut s = y[i];
                        for (j, &aij) in row.iter().enumerate() {
                            if aij != T::zero() {
                                s += ks[j][i] * h_step * aij;
                            }
                        }
                        s
                    })
                    .collect();
                ks.push(l.apply(&stage));
                y_new = stage;
            }
            // The last stage is evaluated at the 5th-order solution (FSAL).
            let mut err_sq = T::zero();
            for i in 0..y.len() {
                let mut ei = C::new(T::zero(), T::zero());
                for (j, &ej) in e.iter().enumerate() {
                    if ej != T::zero() {
                        ei += ks[j][i] * h_step * ej;
                    }
                }
                let sc = opts.atol + opts.rtol * y[i].norm().max(y_new[i].norm());
                err_sq += (ei.norm() / sc).powi(2);
            }
            let err = (err_sq / T::from_usize(y.len()).unwrap()).sqrt();
            if err <= T::one() {
                t = if last { t_target } else { t + h_step };
                y = y_new;
                k1 = ks.pop().expect("seven stages");
            }
            let factor = if err == T::zero() {
                lit(5.0)
            } else {
                (lit::<T>(0.9) * err.powf(lit(-0.2)))
                    .min(lit(5.0))
                    .max(lit(0.2))
            };
            if !last || err > T::one() {
                h = h_step * factor;
            }
            if h <= t.abs() * T::epsilon() * lit(8.0) || h <= T::min_positive_value() {
                return Err(Error::StepUnderflow {
                    t: t.as_f64(),
                    h: h.as_f64(),
                });
            }
        }
        out.push(DensityMatrix::from_vec(&y, d));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::build_liouvillian;
    use crate::model::{DriveSpec, SystemConfig, Transition};
    use crate::scalar::hz_to_rad;
    use crate::spectrum::linspace;

    #[test]
    fn ground_state_at_zero_temperature() {
        let c = SystemConfig::<f64>::table1().with_occupations(0.0, 0.0);
        let rho = steady_state(&build_liouvillian(&c).unwrap()).unwrap();
        assert!(rho.population(1).abs() < 1e-14);
    }

    #[test]
    fn thermal_population() {
        let c = SystemConfig::<f64>::table1();
        let r = c.rates();
        let rho = steady_state(&build_liouvillian(&c).unwrap()).unwrap();
        assert!((rho.population(1) - r.gamma_plus / r.gamma_1).abs() < 1e-12);
        assert!((rho.population(1) - 0.0286).abs() < 5e-4);
    }

    #[test]
    fn strong_drive_saturates() {
        let c = SystemConfig::<f64>::table1().with_drive(DriveSpec::real(
            Transition::T01,
            0.0,
            hz_to_rad(8.8e6),
        ));
        let rho = steady_state(&build_liouvillian(&c).unwrap()).unwrap();
        assert!((rho.population(1) - 0.5).abs() < 1e-3);
    }

    #[test]
    fn unitary_generator_is_degenerate() {
        let mut c = SystemConfig::<f64>::table1().with_drive(DriveSpec::real(
            Transition::T01,
            1e5,
            hz_to_rad(1e6),
        ));
        c.radiative.gamma = 0.0;
        c.nonradiative.gamma = 0.0;
        let err = steady_state(&build_liouvillian(&c).unwrap()).unwrap_err();
        assert!(matches!(err, Error::DegenerateSteadyState(_)), "{err:?}");
    }

    #[test]
    fn zero_generator_keeps_state() {
        let l = Superoperator::<f64>::zero(2);
        let rho0 = DensityMatrix::basis(2, 1);
        let out = evolve(&rho0, &l, &[0.0, 1.0, 2.0]).unwrap();
        assert!(out.iter().all(|r| *r == rho0));
    }

    #[test]
    fn relaxation_from_ground() {
        let c = SystemConfig::<f64>::table1();
        let r = c.rates();
        let l = build_liouvillian(&c).unwrap();
        let ts = linspace(0.0, 10.0 / r.gamma_1, 41);
        let traj = evolve(&DensityMatrix::ground(2), &l, &ts).unwrap();
        for (t, rho) in ts.iter().zip(&traj) {
            let expect = r.gamma_plus / r.gamma_1 * (1.0 - (-r.gamma_1 * t).exp());
            assert!((rho.population(1) - expect).abs() < 1e-6);
            assert!((rho.trace().re - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn long_time_limit_is_steady_state() {
        let c = SystemConfig::<f64>::table1().with_drive(DriveSpec::real(
            Transition::T01,
            hz_to_rad(5e4),
            hz_to_rad(3e5),
        ));
        let r = c.rates();
        let l = build_liouvillian(&c).unwrap();
        let ss = steady_state(&l).unwrap();
        let traj = evolve(&DensityMatrix::ground(2), &l, &[0.0, 60.0 / r.gamma_2]).unwrap();
        let last = traj.last().unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((last.get(i, j) - ss.get(i, j)).norm() < 1e-8);
            }
        }
        assert!(last.is_positive(1e-10));
    }
}
