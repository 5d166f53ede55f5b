//! Reconciliation of the Mollow, reflection and power-loss fits into one
//! consistent parameter set.

use serde::{Deserialize, Serialize};

use super::lineshape::{fit_mollow_with, LineFitOptions, Weights};
use super::lm::{solve_dense, FitResult};
use super::power::{fit_power_loss_with, PowerLossFixed, RadiativeOccupation};
use super::reflection::{fit_reflection_with, ReflectionMode};
use crate::error::{Error, Result};
use crate::model::{effective_qubit_occupation, temperature_from_occupation, BathStatistics};
use crate::scalar::{hz_to_rad, lit, Real, C};
use crate::spectrum::Spectrum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate<T> {
    pub value: T,
    pub sigma: T,
}

/// Γ1 from the reconciled occupations against 2Γ2 from the Mollow width;
/// equal when pure dephasing is negligible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DephasingCheck<T> {
    pub gamma_1_hz: T,
    pub two_gamma_2_hz: T,
    /// 1σ of Γ1 − 2Γ2.
    pub sigma_hz: T,
    /// |Γ1 − 2Γ2| ≤ 2σ.
    pub consistent: bool,
}

/// Reconciled device parameters. Rates in Hz, temperatures in mK; an
/// occupation of zero (or a negative estimate within 2σ of zero) maps to 0 mK.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Record<T> {
    pub gamma_r_hz: Estimate<T>,
    pub gamma_n_hz: Estimate<T>,
    /// Mollow linewidth, the primary Γ2.
    pub gamma_2_hz: Estimate<T>,
    pub gamma_2_reflection_hz: Estimate<T>,
    /// Reflection Γ2 minus Mollow Γ2.
    pub linewidth_discrepancy_hz: T,
    pub numerator_hz: Estimate<T>,
    pub delta_n: Estimate<T>,
    pub rho11: Estimate<T>,
    pub n_r: Estimate<T>,
    pub n_n: Estimate<T>,
    pub n_q: T,
    pub gamma_1_hz: Estimate<T>,
    pub t_r_mk: T,
    pub t_n_mk: T,
    pub t_q_mk: T,
    pub dephasing: DephasingCheck<T>,
    /// Occupations (`rho11`, `n_r`, `n_n`) negative by more than 2σ, which
    /// means the three fits disagree.
    pub negative_occupations: Vec<String>,
}

/// [ρ11, n_r, n_n, Γ1, Γ1 − 2Γ2] from [Γr, Γ2, Γn, Δn, N] (rates in Hz).
///
/// ρ11 = (1 − N/Γr)/2 from the reflection numerator; n_r then follows from
/// ρ11·Γ1 = n_nΓn + n_rΓr with n_n = n_r + Δn, which is linear in n_r.
fn occupations<T: Real>(q: &[T]) -> [T; 5] {
    let (gr, g2, gn, dn, num) = (q[0], q[1], q[2], q[3], q[4]);
    let one = T::one();
    let two = lit::<T>(2.0);
    let rho = (one - num / gr) / two;
    let s = gn + gr;
    let n_r = (rho * s + two * rho * dn * gn - dn * gn) / (s * (one - two * rho));
    let n_n = n_r + dn;
    let g1 = (one + two * n_n) * gn + (one + two * n_r) * gr;
    [rho, n_r, n_n, g1, g1 - two * g2]
}

fn require_converged<T: Real>(fit: &FitResult<T>, what: &str) -> Result<()> {
    if !fit.converged {
        return Err(Error::Inconsistent(format!("{what} fit did not converge")));
    }
    Ok(())
}

/// Combines the three fits. The Mollow width is the primary Γ2; the
/// reflection width is reported alongside.
pub fn reconcile_table1<T: Real>(
    mollow: &FitResult<T>,
    power_loss: &FitResult<T>,
    reflection: &FitResult<T>,
    omega01: T,
) -> Result<Table1Record<T>> {
    require_converged(mollow, "Mollow")?;
    require_converged(power_loss, "power-loss")?;
    require_converged(reflection, "reflection")?;
    let gr = mollow.pair("gamma_r_hz");
    let g2 = mollow.pair("gamma_2_hz");
    let gn = power_loss.pair("gamma_n_hz");
    let dn = power_loss.pair("delta_n");
    let num = reflection.pair("numerator_hz");
    let g2r = reflection.pair("gamma_2_hz");
    if !(gr.0 > T::zero()) {
        return Err(Error::Inconsistent("fitted Γr is not positive".into()));
    }

    let q = [gr.0, g2.0, gn.0, dn.0, num.0];
    let out = occupations(&q);
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Inconsistent(
            "occupations are not finite (ρ11 = 1/2?)".into(),
        ));
    }

    // Linear propagation with the fits' own covariances (the three fits are
    // independent; Γr/Γ2 and Γn/Δn are correlated within a fit).
    let mut cov = [[T::zero(); 5]; 5];
    let idx = |f: &FitResult<T>, n: &str| f.names.iter().position(|x| x == n).unwrap();
    let (ir, i2) = (idx(mollow, "gamma_r_hz"), idx(mollow, "gamma_2_hz"));
    let (in_, id) = (idx(power_loss, "gamma_n_hz"), idx(power_loss, "delta_n"));
    let m = &mollow.covariance;
    let p = &power_loss.covariance;
    cov[0][0] = m[ir][ir];
    cov[0][1] = m[ir][i2];
    cov[1][0] = m[i2][ir];
    cov[1][1] = m[i2][i2];
    cov[2][2] = p[in_][in_];
    cov[2][3] = p[in_][id];
    cov[3][2] = p[id][in_];
    cov[3][3] = p[id][id];
    cov[4][4] = num.1 * num.1;
    let mut jac = [[T::zero(); 5]; 5];
    for k in 0..5 {
        let h = q[k].abs().max(lit(1e-3)) * lit(1e-6);
        let mut up = q;
        let mut dn_ = q;
        up[k] += h;
        dn_[k] -= h;
        let (a, b) = (occupations(&up), occupations(&dn_));
        for i in 0..5 {
            jac[i][k] = (a[i] - b[i]) / (lit::<T>(2.0) * h);
        }
    }
    let sigma = |i: usize| -> T {
        let mut s = T::zero();
        for a in 0..5 {
            for b in 0..5 {
                s += jac[i][a] * cov[a][b] * jac[i][b];
            }
        }
        s.abs().sqrt()
    };
    let est = |i: usize| Estimate {
        value: out[i],
        sigma: sigma(i),
    };
    // Small negative estimates of a near-zero occupation are noise; only a
    // significantly negative one means the inputs disagree.
    let negative_occupations = [(0, "rho11"), (1, "n_r"), (2, "n_n")]
        .into_iter()
        .filter(|&(i, _)| {
            out[i] < -lit::<T>(2.0) * sigma(i) || (out[i] < T::zero() && sigma(i) == T::zero())
        })
        .map(|(_, name)| name.to_string())
        .collect();

    let n_q = effective_qubit_occupation(out[0].max(T::zero()))?;
    let temp = |n: T| -> Result<T> {
        Ok(
            temperature_from_occupation(n.max(T::zero()), omega01, BathStatistics::Bosonic)?
                * lit(1e3),
        )
    };
    let diff_sigma = sigma(4);
    Ok(Table1Record {
        gamma_r_hz: Estimate {
            value: gr.0,
            sigma: gr.1,
        },
        gamma_n_hz: Estimate {
            value: gn.0,
            sigma: gn.1,
        },
        gamma_2_hz: Estimate {
            value: g2.0,
            sigma: g2.1,
        },
        gamma_2_reflection_hz: Estimate {
            value: g2r.0,
            sigma: g2r.1,
        },
        linewidth_discrepancy_hz: g2r.0 - g2.0,
        numerator_hz: Estimate {
            value: num.0,
            sigma: num.1,
        },
        delta_n: Estimate {
            value: dn.0,
            sigma: dn.1,
        },
        rho11: est(0),
        n_r: est(1),
        n_n: est(2),
        n_q,
        gamma_1_hz: est(3),
        t_r_mk: temp(out[1])?,
        t_n_mk: temp(out[2])?,
        t_q_mk: temp(n_q)?,
        dephasing: DephasingCheck {
            gamma_1_hz: out[3],
            two_gamma_2_hz: lit::<T>(2.0) * g2.0,
            sigma_hz: diff_sigma,
            consistent: out[4].abs() <= lit::<T>(2.0) * diff_sigma,
        },
        negative_occupations,
    })
}

/// Measured (or synthetic) inputs of the full extraction.
#[derive(Debug, Clone)]
pub struct Table1Data<T: Real> {
    /// Drive-on minus drive-off spectrum around ω01 (strong drive).
    pub mollow: Spectrum<T>,
    /// (detuning in Hz, r) under weak probing.
    pub reflection: Vec<(T, C<T>)>,
    /// (Ω in rad/s, P_loss in W) on resonance.
    pub power_loss: Vec<(T, T)>,
    pub omega01: T,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table1FitOptions<T> {
    pub mollow_weights: Weights<T>,
    pub reflection_weights: Weights<T>,
    pub power_weights: Weights<T>,
    pub reflection_mode: ReflectionMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Fits<T> {
    pub mollow: FitResult<T>,
    pub reflection: FitResult<T>,
    pub power_loss: FitResult<T>,
    pub record: Table1Record<T>,
}

/// Runs the three fits and reconciles them.
///
/// The power-loss model takes n_r from the reflection population
/// ρ11 = (1 − N/Γr)/2 at every trial (Γn, Δn), so the result is
/// self-consistent without iteration. Its covariance then gains the
/// contribution of the Mollow Γr, Γ2 and reflection N it holds fixed.
pub fn fit_table1<T: Real>(
    data: &Table1Data<T>,
    opts: &Table1FitOptions<T>,
) -> Result<Table1Fits<T>> {
    let mollow = fit_mollow_with(
        &data.mollow,
        &LineFitOptions {
            weights: opts.mollow_weights.clone(),
            ..Default::default()
        },
    )?;
    let reflection = fit_reflection_with(
        &data.reflection,
        opts.reflection_mode,
        &opts.reflection_weights,
    )?;
    let idx = |f: &FitResult<T>, n: &str| f.names.iter().position(|x| x == n).unwrap();
    let (ir, i2, inum) = (
        idx(&mollow, "gamma_r_hz"),
        idx(&mollow, "gamma_2_hz"),
        idx(&reflection, "numerator_hz"),
    );
    let q0 = [
        mollow.values[ir],
        mollow.values[i2],
        reflection.values[inum],
    ];
    let run = |q: [T; 3]| {
        let rho = (T::one() - q[2] / q[0]) / lit(2.0);
        let fixed = PowerLossFixed {
            gamma_2: hz_to_rad(q[1]),
            gamma_r: hz_to_rad(q[0]),
            n_r: RadiativeOccupation::FromPopulation(rho),
            omega01: data.omega01,
        };
        fit_power_loss_with(&data.power_loss, fixed, &opts.power_weights)
    };
    let mut power = run(q0)?;

    // d(Γn, Δn)/d(Γr, Γ2, N) by refitting, then Cov += D·Σ·Dᵀ.
    let mut sq = [[T::zero(); 3]; 3];
    sq[0][0] = mollow.covariance[ir][ir];
    sq[0][1] = mollow.covariance[ir][i2];
    sq[1][0] = mollow.covariance[i2][ir];
    sq[1][1] = mollow.covariance[i2][i2];
    sq[2][2] = reflection.covariance[inum][inum];
    let mut d = [[T::zero(); 3]; 2];
    for k in 0..3 {
        let h = sq[k][k].sqrt();
        if !(h > T::zero()) || !h.is_finite() {
            continue;
        }
        let (mut qp, mut qm) = (q0, q0);
        qp[k] += h;
        qm[k] -= h;
        let (fp, fm) = (run(qp)?, run(qm)?);
        for i in 0..2 {
            d[i][k] = (fp.values[i] - fm.values[i]) / (lit::<T>(2.0) * h);
        }
    }
    for i in 0..2 {
        for j in 0..2 {
            let mut add = T::zero();
            for a in 0..3 {
                for b in 0..3 {
                    add += d[i][a] * sq[a][b] * d[j][b];
                }
            }
            if add.is_finite() {
                power.covariance[i][j] += add;
            }
        }
    }
    for i in 0..2 {
        power.sigmas[i] = power.covariance[i][i].abs().sqrt();
    }
    let record = reconcile_table1(&mollow, &power, &reflection, data.omega01)?;
    Ok(Table1Fits {
        mollow,
        reflection,
        power_loss: power,
        record,
    })
}

/// (n_r, n_n) from Δn and the excited population ρ11 by a direct 2×2 solve.
pub fn occupations_from_population<T: Real>(
    gamma_r: T,
    gamma_n: T,
    delta_n: T,
    rho11: T,
) -> Result<(T, T)> {
    // Unknowns (n_r, n_n):
    //   −n_r + n_n = Δn
    //   n_r·Γr(1 − 2ρ11) + n_n·Γn(1 − 2ρ11) = ρ11(Γr + Γn)
    let one = T::one();
    let two = lit::<T>(2.0);
    let a = vec![
        vec![-one, one],
        vec![gamma_r * (one - two * rho11), gamma_n * (one - two * rho11)],
    ];
    let b = [delta_n, rho11 * (gamma_r + gamma_n)];
    let x = solve_dense(&a, &b, T::epsilon()).ok_or(Error::Singular("occupation system"))?;
    if x.iter().any(|&v| v < T::zero()) {
        return Err(Error::Inconsistent(format!(
            "negative occupation ({}, {})",
            x[0], x[1]
        )));
    }
    Ok((x[0], x[1]))
}
