//! Lorentzian line fits of emission spectra.
//!
//! Centres are fitted as offsets from the initial guess so that sub-kHz
//! shifts of a GHz line are not lost to cancellation.

use super::lm::{levenberg_marquardt, FitResult, LmOptions};
use crate::error::{Error, Result};
use crate::scalar::{hz_to_rad, lit, photon_energy, Real};
use crate::spectrum::Spectrum;

/// Per-point weighting of the residuals.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Weights<T> {
    #[default]
    Uniform,
    /// Known 1σ error of every point.
    Sigma(Vec<T>),
    /// Multiplicative noise of the given relative size. Fitted in two
    /// passes: unweighted, then with σᵢ = rel·|model(xᵢ)| from the first pass.
    Relative(T),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LineFitOptions<T> {
    pub weights: Weights<T>,
    /// Hold the line centre (Hz) fixed instead of fitting it.
    pub fixed_center_hz: Option<T>,
    /// Hold the half width (Hz) fixed instead of fitting it.
    pub fixed_width_hz: Option<T>,
}

/// A least-squares problem y ≈ model(x, p) with some parameters held.
pub(crate) struct CurveProblem<'a, T> {
    pub x: &'a [T],
    pub y: &'a [T],
    pub names: &'a [&'a str],
    pub init: Vec<T>,
    pub scales: Vec<T>,
    pub fixed: Vec<bool>,
}

impl<T: Real> CurveProblem<'_, T> {
    fn expand(&self, free: &[T]) -> Vec<T> {
        let mut it = free.iter();
        self.init
            .iter()
            .zip(&self.fixed)
            .map(|(&v, &f)| if f { v } else { *it.next().unwrap() })
            .collect()
    }

    fn solve_once(
        &self,
        model: &dyn Fn(T, &[T]) -> T,
        sigma: Option<&[T]>,
        start: &[T],
    ) -> Result<FitResult<T>> {
        let free: Vec<usize> = (0..self.init.len()).filter(|&k| !self.fixed[k]).collect();
        let x0: Vec<T> = free.iter().map(|&k| start[k]).collect();
        let scales: Vec<T> = free.iter().map(|&k| self.scales[k]).collect();
        let names: Vec<&str> = free.iter().map(|&k| self.names[k]).collect();
        let residuals = |p: &[T]| -> Vec<T> {
            let full = self.expand(p);
            self.x
                .iter()
                .zip(self.y)
                .enumerate()
                .map(|(i, (&x, &y))| {
                    let r = model(x, &full) - y;
                    match sigma {
                        Some(s) => r / s[i],
                        None => r,
                    }
                })
                .collect()
        };
        let fit = levenberg_marquardt(residuals, &x0, &scales, &names, LmOptions::default())?;
        Ok(self.embed(fit, &free))
    }

    /// Re-inserts held parameters with zero uncertainty.
    fn embed(&self, fit: FitResult<T>, free: &[usize]) -> FitResult<T> {
        let p = self.init.len();
        let full = self.expand(&fit.values);
        let mut cov = vec![vec![T::zero(); p]; p];
        for (a, &i) in free.iter().enumerate() {
            for (b, &j) in free.iter().enumerate() {
                cov[i][j] = fit.covariance[a][b];
            }
        }
        FitResult {
            names: self.names.iter().map(|s| s.to_string()).collect(),
            values: full,
            sigmas: (0..p).map(|k| cov[k][k].abs().sqrt()).collect(),
            covariance: cov,
            ..fit
        }
    }

    pub(crate) fn solve(
        &self,
        model: impl Fn(T, &[T]) -> T,
        weights: &Weights<T>,
    ) -> Result<FitResult<T>> {
        if self.x.len() != self.y.len() {
            return Err(Error::GridMismatch("x and y lengths differ".into()));
        }
        match weights {
            Weights::Uniform => self.solve_once(&model, None, &self.init),
            Weights::Sigma(s) => {
                if s.len() != self.y.len() || s.iter().any(|&v| !(v > T::zero())) {
                    return Err(Error::param("weights", "need one positive sigma per point"));
                }
                self.solve_once(&model, Some(s), &self.init)
            }
            Weights::Relative(rel) => {
                if !(*rel > T::zero()) {
                    return Err(Error::param("weights", "relative noise must be positive"));
                }
                let first = self.solve_once(&model, None, &self.init)?;
                let fitted: Vec<T> = self
                    .x
                    .iter()
                    .map(|&x| model(x, &first.values).abs())
                    .collect();
                let top = fitted.iter().fold(T::zero(), |m, &v| m.max(v));
                if top == T::zero() {
                    return Ok(first);
                }
                let floor = top * lit(1e-9);
                let sigma: Vec<T> = fitted.iter().map(|&v| *rel * v.max(floor)).collect();
                self.solve_once(&model, Some(&sigma), &first.values)
            }
        }
    }
}

/// Half width at half maximum of the peak at index `i`, interpolated on
/// whichever sides of the peak fall below half height inside the grid.
pub(crate) fn half_width_guess<T: Real>(x: &[T], y: &[T], i: usize) -> Option<T> {
    let half = y[i] / lit(2.0);
    let cross = |j: usize, k: usize| {
        // y[j] ≥ half > y[k]
        let t = (y[j] - half) / (y[j] - y[k]);
        x[j] + (x[k] - x[j]) * t
    };
    let right = (i + 1..y.len())
        .find(|&k| y[k] < half)
        .map(|k| cross(k - 1, k) - x[i]);
    let left = (0..i)
        .rev()
        .find(|&k| y[k] < half)
        .map(|k| x[i] - cross(k + 1, k));
    match (left, right) {
        (Some(l), Some(r)) => Some((l + r) / lit(2.0)),
        (Some(w), None) | (None, Some(w)) => Some(w),
        (None, None) => None,
    }
}

fn median_spacing<T: Real>(x: &[T]) -> T {
    let mut d: Vec<T> = x.windows(2).map(|w| w[1] - w[0]).collect();
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    d[d.len() / 2]
}

/// Rejects lines sampled with fewer than eight points per FWHM.
fn check_resolved<T: Real>(x: &[T], hwhm: T) -> Result<()> {
    let dx = median_spacing(x);
    if dx > lit::<T>(2.0) * hwhm / lit(8.0) {
        return Err(Error::param(
            "spec",
            format!("line of half width {hwhm} Hz is not resolved by {dx} Hz spacing"),
        ));
    }
    Ok(())
}

struct PeakGuess<T> {
    index: usize,
    height: T,
    hwhm: T,
}

fn guess_peak<T: Real>(x: &[T], y: &[T]) -> Result<PeakGuess<T>> {
    if x.len() < 4 {
        return Err(Error::TooShort(format!("{} spectral points", x.len())));
    }
    let (index, height) =
        y.iter()
            .copied()
            .enumerate()
            .fold((0, y[0]), |b, (i, v)| if v > b.1 { (i, v) } else { b });
    if !(height > T::zero()) {
        return Err(Error::param("spec", "no positive peak to fit"));
    }
    let hwhm = half_width_guess(x, y, index)
        .ok_or_else(|| Error::param("spec", "peak does not fall to half height inside the grid"))?;
    Ok(PeakGuess {
        index,
        height,
        hwhm,
    })
}

/// Sum of `n_peaks` Lorentzians A·g²/((f − f0)² + g²).
///
/// Parameters per peak: `center_hz`, `hwhm_hz`, `amplitude` (peak value);
/// the second peak's names carry a `2` suffix. The second peak is seeded at
/// the largest local maximum more than three half widths from the first.
pub fn fit_lorentzian<T: Real>(spec: &Spectrum<T>, n_peaks: usize) -> Result<FitResult<T>> {
    fit_lorentzian_with(spec, n_peaks, &Weights::Uniform)
}

pub fn fit_lorentzian_with<T: Real>(
    spec: &Spectrum<T>,
    n_peaks: usize,
    weights: &Weights<T>,
) -> Result<FitResult<T>> {
    if !(1..=2).contains(&n_peaks) {
        return Err(Error::param("n_peaks", "must be 1 or 2"));
    }
    let (f, y) = (spec.freqs(), spec.values());
    let g1 = guess_peak(f, y)?;
    check_resolved(f, g1.hwhm)?;
    let origin = f[g1.index];
    let x: Vec<T> = f.iter().map(|&v| v - origin).collect();
    let mut init = vec![T::zero(), g1.hwhm, g1.height];
    let mut scales = vec![g1.hwhm, g1.hwhm, g1.height];
    if n_peaks == 2 {
        let far = |i: usize| (x[i]).abs() > lit::<T>(3.0) * g1.hwhm;
        let j = (1..y.len() - 1)
            .filter(|&i| far(i) && y[i] >= y[i - 1] && y[i] >= y[i + 1] && y[i] > T::zero())
            .max_by(|&a, &b| y[a].partial_cmp(&y[b]).unwrap())
            .ok_or_else(|| Error::param("n_peaks", "no second peak found"))?;
        let hw2 = half_width_guess(&x, y, j).unwrap_or(g1.hwhm);
        check_resolved(f, hw2)?;
        init.extend([x[j], hw2, y[j]]);
        scales.extend([hw2, hw2, y[j]]);
    }
    let names: &[&str] = if n_peaks == 1 {
        &["center_hz", "hwhm_hz", "amplitude"]
    } else {
        &[
            "center_hz",
            "hwhm_hz",
            "amplitude",
            "center2_hz",
            "hwhm2_hz",
            "amplitude2",
        ]
    };
    let problem = CurveProblem {
        x: &x,
        y,
        names,
        fixed: vec![false; init.len()],
        init,
        scales,
    };
    let mut fit = problem.solve(
        |x, p| {
            p.chunks(3)
                .map(|q| {
                    let (d, g) = (x - q[0], q[1]);
                    q[2] * g * g / (d * d + g * g)
                })
                .sum()
        },
        weights,
    )?;
    for k in (0..n_peaks).map(|k| 3 * k) {
        fit.shift(k, origin);
        // The model depends on g², report the positive root.
        let g = fit.values[k + 1];
        if g < T::zero() {
            fit.rescale(k + 1, -T::one());
        }
    }
    Ok(fit)
}

/// Planck constant times frequency, h·f, in joules.
fn photon_energy_hz<T: Real>(f_hz: T) -> T {
    photon_energy(hz_to_rad(f_hz))
}

struct LineSetup<T> {
    x: Vec<T>,
    origin: T,
    center0: T,
    width0: T,
    peak0: T,
    fixed_center: bool,
    fixed_width: bool,
}

fn line_setup<T: Real>(spec: &Spectrum<T>, opts: &LineFitOptions<T>) -> Result<LineSetup<T>> {
    let (f, y) = (spec.freqs(), spec.values());
    if f.len() < 4 {
        return Err(Error::TooShort(format!("{} spectral points", f.len())));
    }
    if let Some(w) = opts.fixed_width_hz {
        if !(w > T::zero()) {
            return Err(Error::param("fixed_width_hz", "must be positive"));
        }
    }
    let guess = match (opts.fixed_center_hz, opts.fixed_width_hz) {
        (Some(c), Some(w)) => {
            let i = (0..f.len())
                .min_by(|&a, &b| (f[a] - c).abs().partial_cmp(&(f[b] - c).abs()).unwrap())
                .unwrap();
            PeakGuess {
                index: i,
                height: y[i],
                hwhm: w,
            }
        }
        _ => guess_peak(f, y)?,
    };
    let width0 = opts.fixed_width_hz.unwrap_or(guess.hwhm);
    check_resolved(f, width0)?;
    let origin = opts.fixed_center_hz.unwrap_or(f[guess.index]);
    Ok(LineSetup {
        x: f.iter().map(|&v| v - origin).collect(),
        origin,
        center0: T::zero(),
        width0,
        peak0: guess.height,
        fixed_center: opts.fixed_center_hz.is_some(),
        fixed_width: opts.fixed_width_hz.is_some(),
    })
}

/// Undriven emission line h·f0·2g·K/((f − f0)² + g²), whose integral is
/// 2π·h·f0·K = ħω01ΓrΓnΔn/Γ1.
///
/// Parameters: `coefficient_hz` (K = ΓrΓnΔn/(2πΓ1)), `gamma_2_hz` (g),
/// `center_hz` (f0). With Δn = 0 there is no line to locate, so the width
/// and centre should then be held at values from a driven measurement.
pub fn fit_thermal<T: Real>(spec: &Spectrum<T>) -> Result<FitResult<T>> {
    fit_thermal_with(spec, &LineFitOptions::default())
}

pub fn fit_thermal_with<T: Real>(
    spec: &Spectrum<T>,
    opts: &LineFitOptions<T>,
) -> Result<FitResult<T>> {
    let s = line_setup(spec, opts)?;
    let e0 = photon_energy_hz(s.origin);
    let k0 = s.peak0 * s.width0 / (lit::<T>(2.0) * e0);
    let k_scale = if k0.abs() > T::zero() {
        k0.abs()
    } else {
        // Flat input: size the amplitude from the data spread instead.
        let spread = spec.max_abs() * s.width0 / (lit::<T>(2.0) * e0);
        if spread > T::zero() {
            spread
        } else {
            T::one()
        }
    };
    let problem = CurveProblem {
        x: &s.x,
        y: spec.values(),
        names: &["coefficient_hz", "gamma_2_hz", "center_hz"],
        init: vec![k0, s.width0, s.center0],
        scales: vec![k_scale, s.width0, s.width0],
        fixed: vec![false, s.fixed_width, s.fixed_center],
    };
    let origin = s.origin;
    let mut fit = problem.solve(
        |x, p| {
            let d = x - p[2];
            photon_energy_hz(origin + p[2]) * lit::<T>(2.0) * p[1] * p[0] / (d * d + p[1] * p[1])
        },
        &opts.weights,
    )?;
    fit.shift(2, origin);
    Ok(fit)
}

/// Total power (W) and its 1σ error implied by a [`fit_thermal`] result.
pub fn thermal_power_from_fit<T: Real>(fit: &FitResult<T>) -> (T, T) {
    let (k, sk) = fit.pair("coefficient_hz");
    let (f0, _) = fit.pair("center_hz");
    let scale = T::two_pi() * photon_energy_hz(f0);
    (scale * k, scale * sk)
}

/// Centre peak of the strongly driven spectrum, h·f0·R·g/(2((f − f0)² + g²)).
///
/// Parameters: `gamma_r_hz` (R = Γr/2π), `gamma_2_hz` (g), `center_hz`.
pub fn fit_mollow<T: Real>(spec: &Spectrum<T>) -> Result<FitResult<T>> {
    fit_mollow_with(spec, &LineFitOptions::default())
}

pub fn fit_mollow_with<T: Real>(
    spec: &Spectrum<T>,
    opts: &LineFitOptions<T>,
) -> Result<FitResult<T>> {
    let s = line_setup(spec, opts)?;
    if !(s.peak0 > T::zero()) {
        return Err(Error::param("spec", "driven spectrum has no positive peak"));
    }
    let e0 = photon_energy_hz(s.origin);
    let r0 = lit::<T>(2.0) * s.width0 * s.peak0 / e0;
    let problem = CurveProblem {
        x: &s.x,
        y: spec.values(),
        names: &["gamma_r_hz", "gamma_2_hz", "center_hz"],
        init: vec![r0, s.width0, s.center0],
        scales: vec![r0, s.width0, s.width0],
        fixed: vec![false, s.fixed_width, s.fixed_center],
    };
    let origin = s.origin;
    let mut fit = problem.solve(
        |x, p| {
            let d = x - p[2];
            photon_energy_hz(origin + p[2]) * p[0] * p[1] / (lit::<T>(2.0) * (d * d + p[1] * p[1]))
        },
        &opts.weights,
    )?;
    fit.shift(2, origin);
    Ok(fit)
}
