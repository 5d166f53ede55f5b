//! Weak-probe reflection fits, r(δ) = 1 − iN/(δ − δc + iΓ2).

use serde::{Deserialize, Serialize};

use super::lineshape::{half_width_guess, CurveProblem, Weights};
use super::lm::FitResult;
use crate::error::{Error, Result};
use crate::scalar::{lit, Real, C};

/// Which part of the measured trace enters the residuals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReflectionMode {
    /// Real and imaginary parts.
    #[default]
    Complex,
    /// |r| only. |r| is unchanged under N → 2Γ2 − N, so the fit is seeded
    /// on the overcoupled branch N > Γ2.
    Magnitude,
    /// arg r only, residuals wrapped to (−π, π]. arg r is unchanged under
    /// Γ2 → N − Γ2; the branch Γ2 ≥ N/2 is reported, which holds whenever
    /// pure dephasing is nonnegative (N ≤ Γr ≤ Γ1 ≤ 2Γ2).
    Phase,
}

const NAMES: [&str; 3] = ["numerator_hz", "gamma_2_hz", "center_hz"];

fn model<T: Real>(d: T, p: &[T]) -> C<T> {
    C::new(T::one(), T::zero()) - C::new(T::zero(), p[0]) / C::new(d - p[2], p[1])
}

fn wrap<T: Real>(x: T) -> T {
    let tau = T::two_pi();
    let y = x - tau * (x / tau).round();
    if y <= -T::PI() {
        y + tau
    } else {
        y
    }
}

/// Fits a trace of (detuning in Hz, r). Parameters: `numerator_hz`
/// (N = Γr(1 − 2Γ+/Γ1)/2π), `gamma_2_hz` and `center_hz`.
pub fn fit_reflection<T: Real>(trace: &[(T, C<T>)], mode: ReflectionMode) -> Result<FitResult<T>> {
    fit_reflection_with(trace, mode, &Weights::Uniform)
}

pub fn fit_reflection_with<T: Real>(
    trace: &[(T, C<T>)],
    mode: ReflectionMode,
    weights: &Weights<T>,
) -> Result<FitResult<T>> {
    if trace.len() < 5 {
        return Err(Error::TooShort(format!(
            "{} reflection points",
            trace.len()
        )));
    }
    if trace.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::param(
            "trace",
            "detunings must be strictly increasing",
        ));
    }
    let d: Vec<T> = trace.iter().map(|p| p.0).collect();
    let span = d[d.len() - 1] - d[0];

    // |1 − r|² = N²/((δ − δc)² + Γ2²) and 1 − |r|² = N(2Γ2 − N)/(...) are
    // both Lorentzians of half width Γ2.
    let dip: Vec<T> = match mode {
        ReflectionMode::Complex | ReflectionMode::Phase => trace
            .iter()
            .map(|p| (C::new(T::one(), T::zero()) - p.1).norm_sqr())
            .collect(),
        ReflectionMode::Magnitude => trace.iter().map(|p| T::one() - p.1.norm_sqr()).collect(),
    };
    let (i0, top) = dip
        .iter()
        .copied()
        .enumerate()
        .fold((0, dip[0]), |b, (i, v)| if v > b.1 { (i, v) } else { b });
    if !(top > T::zero()) {
        // Flat trace: r ≡ 1 is N = 0 at any width and centre.
        return flat_result(&d, trace, mode);
    }
    let origin = d[i0];
    let x: Vec<T> = d.iter().map(|&v| v - origin).collect();

    let (n0, g0) = match mode {
        ReflectionMode::Complex => {
            let g = half_width_guess(&x, &dip, i0).unwrap_or(span / lit(10.0));
            (g * top.sqrt(), g)
        }
        ReflectionMode::Magnitude => {
            let g = half_width_guess(&x, &dip, i0).unwrap_or(span / lit(10.0));
            let r0 = (T::one() - top.min(T::one())).sqrt();
            (g * (T::one() + r0), g)
        }
        ReflectionMode::Phase => phase_grid_guess(&x, trace, span),
    };
    let y: Vec<T> = match mode {
        ReflectionMode::Complex => trace.iter().flat_map(|p| [p.1.re, p.1.im]).collect(),
        ReflectionMode::Magnitude => trace.iter().map(|p| p.1.norm()).collect(),
        ReflectionMode::Phase => trace.iter().map(|p| p.1.arg()).collect(),
    };
    // The complex residual vector interleaves re/im; index 2k and 2k+1 share
    // the detuning x[k].
    let xs: Vec<T> = match mode {
        ReflectionMode::Complex => x.iter().flat_map(|&v| [v, v]).collect(),
        _ => x.clone(),
    };
    let tags: Vec<T> = match mode {
        ReflectionMode::Complex => (0..xs.len())
            .map(|i| T::from_usize(i % 2).unwrap())
            .collect(),
        _ => vec![T::zero(); xs.len()],
    };
    let weights = match (mode, weights) {
        (ReflectionMode::Complex, Weights::Sigma(s)) => {
            Weights::Sigma(s.iter().flat_map(|&v| [v, v]).collect())
        }
        (_, w) => w.clone(),
    };
    // Pack (x, tag) into one abscissa: the tag selects re (0) or im (1).
    let packed: Vec<T> = (0..xs.len()).map(|i| T::from_usize(i).unwrap()).collect();
    let scale = g0.max(span * lit(1e-6));
    let problem = CurveProblem {
        x: &packed,
        y: &y,
        names: &NAMES,
        init: vec![n0, g0, T::zero()],
        scales: vec![n0.abs().max(scale * lit(1e-3)), scale, scale],
        fixed: vec![false; 3],
    };
    let eval = |i: T, p: &[T]| {
        let k = i.to_usize().unwrap();
        let r = model(xs[k], p);
        match mode {
            ReflectionMode::Complex => {
                if tags[k] == T::zero() {
                    r.re
                } else {
                    r.im
                }
            }
            ReflectionMode::Magnitude => r.norm(),
            // Model minus data must be wrapped; fold the data phase in here
            // so the generic residual (model − y) becomes wrap(model − y) + y − y.
            ReflectionMode::Phase => y[k] + wrap(r.arg() - y[k]),
        }
    };
    let mut fit = problem.solve(eval, &weights)?;
    fit.shift(2, origin);
    if fit.values[1] < T::zero() {
        // (N, Γ2) → (−N, −Γ2) leaves r unchanged.
        fit.rescale(0, -T::one());
        fit.rescale(1, -T::one());
    }
    if mode == ReflectionMode::Phase && fit.values[1] < fit.values[0] - fit.values[1] {
        let (z, o) = (T::zero(), T::one());
        fit.transform(&[vec![o, z, z], vec![o, -o, z], vec![z, z, o]]);
    }
    Ok(fit)
}

/// Coarse search over (N, Γ2) at the steepest point of the phase.
fn phase_grid_guess<T: Real>(x: &[T], trace: &[(T, C<T>)], span: T) -> (T, T) {
    let n = x.len();
    let dx = (x[n - 1] - x[0]) / T::from_usize(n - 1).unwrap();
    let cost = |p: &[T]| -> T {
        x.iter()
            .zip(trace)
            .map(|(&xi, t)| {
                let e = wrap(model(xi, p).arg() - t.1.arg());
                e * e
            })
            .sum()
    };
    let mut best = (T::infinity(), span / lit(10.0), span / lit(10.0));
    for gi in 0..40 {
        let g = dx * (span / dx).powf(T::from_usize(gi).unwrap() / lit(39.0));
        for ri in 0..40 {
            let ratio =
                lit::<T>(0.05) * lit::<T>(60.0).powf(T::from_usize(ri).unwrap() / lit(39.0));
            let c = cost(&[ratio * g, g, T::zero()]);
            if c < best.0 {
                best = (c, ratio * g, g);
            }
        }
    }
    (best.1, best.2)
}

fn flat_result<T: Real>(
    d: &[T],
    trace: &[(T, C<T>)],
    mode: ReflectionMode,
) -> Result<FitResult<T>> {
    let m = match mode {
        ReflectionMode::Complex => 2 * trace.len(),
        _ => trace.len(),
    };
    let rms = (trace
        .iter()
        .map(|p| (p.1 - C::new(T::one(), T::zero())).norm_sqr())
        .sum::<T>()
        / T::from_usize(m).unwrap())
    .sqrt();
    let inf = T::infinity();
    Ok(FitResult {
        names: NAMES.iter().map(|s| s.to_string()).collect(),
        values: vec![T::zero(), T::zero(), (d[0] + d[d.len() - 1]) / lit(2.0)],
        sigmas: vec![T::zero(), inf, inf],
        covariance: vec![
            vec![T::zero(), T::zero(), T::zero()],
            vec![T::zero(), inf, T::zero()],
            vec![T::zero(), T::zero(), inf],
        ],
        residual_rms: rms,
        converged: true,
        iterations: 0,
        gradient_norm: T::zero(),
        ill_conditioned: true,
    })
}
