//! Fit of the resonant power-loss curve for (Γn, Δn).

use super::lineshape::{CurveProblem, Weights};
use super::lm::FitResult;
use crate::error::{Error, Result};
use crate::model::DerivedRates;
use crate::observables::power_loss;
use crate::scalar::{hz_to_rad, lit, photon_energy, rad_to_hz, Real};

/// Where the radiative occupation n_r comes from. It enters the curve only
/// through Γ1 and is poorly constrained by it, so it is supplied from outside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadiativeOccupation<T> {
    Known(T),
    /// Excited population ρ11 from reflection; n_r then follows from
    /// ρ11·Γ1 = n_nΓn + n_rΓr at each trial (Γn, Δn).
    FromPopulation(T),
}

impl<T: Real> RadiativeOccupation<T> {
    /// n_r for given rates (any common unit).
    pub fn resolve(self, gamma_r: T, gamma_n: T, delta_n: T) -> T {
        match self {
            RadiativeOccupation::Known(n) => n,
            RadiativeOccupation::FromPopulation(rho) => {
                let two = lit::<T>(2.0);
                let s = gamma_n + gamma_r;
                (rho * s + two * rho * delta_n * gamma_n - delta_n * gamma_n)
                    / (s * (T::one() - two * rho))
            }
        }
    }
}

/// Quantities held fixed while fitting the power-loss curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLossFixed<T> {
    /// rad/s
    pub gamma_2: T,
    /// rad/s
    pub gamma_r: T,
    pub n_r: RadiativeOccupation<T>,
    pub omega01: T,
}

/// Fits P_loss(Ω) to points (Ω in rad/s, watts). Parameters: `gamma_n_hz`
/// and `delta_n`.
///
/// When every point has the same sign the curve does not cross zero and the
/// result is flagged `ill_conditioned`: with all points saturated Δn is
/// unidentifiable, and without a crossing its sign rests on the curve shape
/// alone.
pub fn fit_power_loss<T: Real>(
    points: &[(T, T)],
    fixed: PowerLossFixed<T>,
) -> Result<FitResult<T>> {
    fit_power_loss_with(points, fixed, &Weights::Uniform)
}

pub fn fit_power_loss_with<T: Real>(
    points: &[(T, T)],
    fixed: PowerLossFixed<T>,
    weights: &Weights<T>,
) -> Result<FitResult<T>> {
    if points.len() < 5 {
        return Err(Error::TooShort(format!(
            "{} power-loss points; need at least 5",
            points.len()
        )));
    }
    if !(fixed.gamma_2 > T::zero()) || !(fixed.gamma_r > T::zero()) {
        return Err(Error::param("fixed", "Γ2 and Γr must be positive"));
    }
    match fixed.n_r {
        // A slightly negative estimate of a near-zero occupation is allowed.
        RadiativeOccupation::Known(n) if !(n > lit(-0.5)) => {
            return Err(Error::param("n_r", "must exceed −1/2"));
        }
        RadiativeOccupation::FromPopulation(r) if !(r < lit(0.5)) => {
            return Err(Error::param("rho11", "must be below 1/2"));
        }
        _ => {}
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let x: Vec<T> = pts.iter().map(|p| p.0).collect();
    let y: Vec<T> = pts.iter().map(|p| p.1).collect();
    let e = photon_energy(fixed.omega01);

    // Saturation gives Γn; the Ω → 0 end, −ħω01ΓnΓrΔn/Γ1, gives Δn.
    let top = y[y.len() - 1];
    let gn0 = (lit::<T>(2.0) * top / e)
        .abs()
        .max(fixed.gamma_r * lit(1e-3));
    let g1 = gn0 + fixed.gamma_r;
    let dn0 = (-y[0] * g1 / (e * gn0 * fixed.gamma_r))
        .max(T::zero())
        .min(T::one());
    let problem = CurveProblem {
        x: &x,
        y: &y,
        names: &["gamma_n_hz", "delta_n"],
        init: vec![rad_to_hz(gn0), dn0],
        scales: vec![rad_to_hz(gn0), lit(0.1)],
        fixed: vec![false, false],
    };
    let mut fit = problem.solve(
        |omega, p| {
            let gn = hz_to_rad(p[0]);
            let n_r = fixed.n_r.resolve(fixed.gamma_r, gn, p[1]);
            let rates =
                DerivedRates::from_linewidth(fixed.gamma_r, n_r, gn, n_r + p[1], fixed.gamma_2);
            power_loss(omega, &rates, fixed.omega01)
        },
        weights,
    )?;
    let positive = y.iter().filter(|&&v| v > T::zero()).count();
    if positive == 0 || positive == y.len() {
        fit.ill_conditioned = true;
    }
    Ok(fit)
}
