//! Damped least squares (Levenberg–Marquardt) for small dense problems.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

#[derive(Debug, Clone, Copy)]
pub struct LmOptions<T> {
    pub max_iterations: usize,
    /// Stop when an accepted step changes the cost by less than this fraction.
    pub ftol: T,
    /// Stop when the scaled gradient norm falls below this value.
    pub gtol: T,
    /// Stop when the scaled step is this small relative to the parameters.
    pub xtol: T,
}

impl<T: Real> Default for LmOptions<T> {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            ftol: lit(1e-10),
            gtol: lit(1e-12),
            xtol: T::epsilon() * lit(4.0),
        }
    }
}

/// Parameter estimates with 1σ uncertainties.
///
/// The covariance is (JᵀJ)⁻¹ scaled by the residual variance
/// Σr²/(m − p), evaluated at the optimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult<T> {
    pub names: Vec<String>,
    pub values: Vec<T>,
    pub sigmas: Vec<T>,
    pub covariance: Vec<Vec<T>>,
    pub residual_rms: T,
    pub converged: bool,
    pub iterations: usize,
    pub gradient_norm: T,
    /// Set when JᵀJ is numerically singular; sigmas are then infinite for the
    /// unidentifiable directions.
    pub ill_conditioned: bool,
}

impl<T: Real> FitResult<T> {
    fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn get(&self, name: &str) -> Option<T> {
        self.index(name).map(|i| self.values[i])
    }

    pub fn sigma(&self, name: &str) -> Option<T> {
        self.index(name).map(|i| self.sigmas[i])
    }

    /// Value and sigma, panicking on an unknown name (for internal use with
    /// names this crate defines).
    pub(crate) fn pair(&self, name: &str) -> (T, T) {
        let i = self
            .index(name)
            .unwrap_or_else(|| panic!("no parameter `{name}`"));
        (self.values[i], self.sigmas[i])
    }

    /// True when `truth` lies within `k` standard deviations of the estimate.
    pub fn covers(&self, name: &str, truth: T, k: T) -> bool {
        let (v, s) = self.pair(name);
        (v - truth).abs() <= k * s
    }

    /// Rescales parameter `i` (value, sigma and covariance) by `factor`.
    pub(crate) fn rescale(&mut self, i: usize, factor: T) {
        self.values[i] *= factor;
        self.sigmas[i] *= factor.abs();
        for row in self.covariance.iter_mut() {
            row[i] *= factor;
        }
        for v in self.covariance[i].iter_mut() {
            *v *= factor;
        }
    }

    /// Replaces the parameters p by A·p, carrying the covariance along.
    pub(crate) fn transform(&mut self, a: &[Vec<T>]) {
        let p = self.values.len();
        self.values = (0..p)
            .map(|i| (0..p).map(|k| a[i][k] * self.values[k]).sum())
            .collect();
        let ac: Vec<Vec<T>> = (0..p)
            .map(|i| {
                (0..p)
                    .map(|j| (0..p).map(|k| a[i][k] * self.covariance[k][j]).sum())
                    .collect()
            })
            .collect();
        self.covariance = (0..p)
            .map(|i| {
                (0..p)
                    .map(|j| (0..p).map(|k| ac[i][k] * a[j][k]).sum())
                    .collect()
            })
            .collect();
        self.sigmas = (0..p).map(|k| self.covariance[k][k].abs().sqrt()).collect();
    }

    /// Adds `offset` to parameter `i`.
    pub(crate) fn shift(&mut self, i: usize, offset: T) {
        self.values[i] += offset;
    }
}

/// Solves A x = b for a small dense real matrix by Gaussian elimination with
/// partial pivoting. `None` when a pivot falls below `tol·max|A|`.
pub(crate) fn solve_dense<T: Real>(a: &[Vec<T>], b: &[T], tol: T) -> Option<Vec<T>> {
    let n = b.len();
    let mut m: Vec<Vec<T>> = a.to_vec();
    let mut x = b.to_vec();
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(T::zero(), |s, v| s.max(v.abs()));
    if scale == T::zero() {
        return None;
    }
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[i][k].abs().partial_cmp(&m[j][k].abs()).unwrap())?;
        if m[p][k].abs() <= tol * scale {
            return None;
        }
        m.swap(k, p);
        x.swap(k, p);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..n {
                let v = m[k][j];
                m[i][j] -= f * v;
            }
            let v = x[k];
            x[i] -= f * v;
        }
    }
    for k in (0..n).rev() {
        let mut s = x[k];
        for j in k + 1..n {
            s -= m[k][j] * x[j];
        }
        x[k] = s / m[k][k];
    }
    Some(x)
}

fn cost<T: Real>(r: &[T]) -> T {
    r.iter().map(|&v| v * v).sum::<T>() / lit(2.0)
}

fn jacobian<T: Real>(f: &dyn Fn(&[T]) -> Vec<T>, u: &[T], d: &[T], m: usize) -> Vec<Vec<T>> {
    let p = u.len();
    let h0 = T::epsilon().cbrt();
    let mut jac = vec![vec![T::zero(); p]; m];
    let mut x: Vec<T> = u.iter().zip(d).map(|(&a, &b)| a * b).collect();
    for k in 0..p {
        let h = h0 * u[k].abs().max(T::one());
        let base = x[k];
        x[k] = (u[k] + h) * d[k];
        let rp = f(&x);
        x[k] = (u[k] - h) * d[k];
        let rm = f(&x);
        x[k] = base;
        for i in 0..m {
            jac[i][k] = (rp[i] - rm[i]) / (lit::<T>(2.0) * h);
        }
    }
    jac
}

fn normal_matrix<T: Real>(jac: &[Vec<T>], p: usize) -> Vec<Vec<T>> {
    let mut a = vec![vec![T::zero(); p]; p];
    for row in jac {
        for i in 0..p {
            for j in 0..=i {
                a[i][j] += row[i] * row[j];
            }
        }
    }
    for i in 0..p {
        for j in 0..i {
            a[j][i] = a[i][j];
        }
    }
    a
}

/// Minimises ½‖r(x)‖² from `x0`.
///
/// `scales` gives the typical magnitude of each parameter; the iteration and
/// the finite-difference Jacobian work in x/scale so that parameters of very
/// different size are treated alike.
pub fn levenberg_marquardt<T: Real>(
    residuals: impl Fn(&[T]) -> Vec<T>,
    x0: &[T],
    scales: &[T],
    names: &[&str],
    opts: LmOptions<T>,
) -> Result<FitResult<T>> {
    let p = x0.len();
    if scales.len() != p || names.len() != p {
        return Err(Error::param(
            "scales",
            "one scale and one name per parameter",
        ));
    }
    if scales.iter().any(|&s| !(s > T::zero()) || !s.is_finite()) {
        return Err(Error::param("scales", "must be positive and finite"));
    }
    let f = &residuals as &dyn Fn(&[T]) -> Vec<T>;
    let d = scales.to_vec();
    let mut u: Vec<T> = x0.iter().zip(&d).map(|(&x, &s)| x / s).collect();
    let to_x = |u: &[T]| -> Vec<T> { u.iter().zip(&d).map(|(&a, &b)| a * b).collect() };
    let mut r = f(&to_x(&u));
    let m = r.len();
    if m < p {
        return Err(Error::TooShort(format!("{m} residuals for {p} parameters")));
    }
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::param(
            "x0",
            "residuals are not finite at the initial guess",
        ));
    }
    let mut c = cost(&r);
    let mut jac = jacobian(f, &u, &d, m);
    let mut lambda = T::zero();
    let mut nu = lit::<T>(2.0);
    let mut converged = false;
    let mut iterations = 0;
    let mut grad_norm = T::zero();

    while iterations < opts.max_iterations {
        iterations += 1;
        let a = normal_matrix(&jac, p);
        let g: Vec<T> = (0..p)
            .map(|k| (0..m).map(|i| jac[i][k] * r[i]).sum::<T>())
            .collect();
        // Gradient of the cost relative to its size, per unit scaled step.
        grad_norm = g.iter().fold(T::zero(), |s, v| s.max(v.abs()))
            / (lit::<T>(2.0) * c).sqrt().max(T::min_positive_value());
        let col_norm = (0..p).fold(T::zero(), |s, k| s.max(a[k][k].sqrt()));
        if c == T::zero() || grad_norm <= opts.gtol * col_norm {
            converged = true;
            break;
        }
        if lambda == T::zero() {
            lambda = lit::<T>(1e-3) * (0..p).fold(T::zero(), |s, k| s.max(a[k][k]));
        }
        let mut damped = a.clone();
        for k in 0..p {
            damped[k][k] += lambda * a[k][k].max(T::epsilon() * col_norm * col_norm);
        }
        let neg_g: Vec<T> = g.iter().map(|&v| -v).collect();
        let Some(step) = solve_dense(&damped, &neg_g, T::epsilon()) else {
            lambda *= nu;
            nu *= lit(2.0);
            continue;
        };
        let trial: Vec<T> = u.iter().zip(&step).map(|(&a, &b)| a + b).collect();
        let r_new = f(&to_x(&trial));
        let c_new = if r_new.iter().all(|v| v.is_finite()) {
            cost(&r_new)
        } else {
            T::infinity()
        };
        // Predicted reduction of the local quadratic model.
        let predicted = (0..p)
            .map(|k| step[k] * (lambda * damped_diag(&a, k, col_norm) * step[k] - g[k]))
            .sum::<T>()
            / lit(2.0);
        let rho = (c - c_new) / predicted.max(T::min_positive_value());
        let step_norm = step.iter().fold(T::zero(), |s, v| s.max(v.abs()));
        let u_norm = u.iter().fold(T::zero(), |s, v| s.max(v.abs()));
        if c_new < c {
            let rel = (c - c_new) / c;
            u = trial;
            r = r_new;
            c = c_new;
            jac = jacobian(f, &u, &d, m);
            let t = lit::<T>(2.0) * rho - T::one();
            lambda *= (T::one() - t * t * t).max(lit(1.0 / 3.0));
            nu = lit(2.0);
            if rel <= opts.ftol || step_norm <= opts.xtol * (u_norm + opts.xtol) {
                converged = true;
                break;
            }
        } else {
            if step_norm <= opts.xtol * (u_norm + opts.xtol) {
                // No representable improvement remains.
                converged = true;
                break;
            }
            lambda *= nu;
            nu *= lit(2.0);
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            iterations,
            cost: c.as_f64(),
            gradient: grad_norm.as_f64(),
        });
    }

    let a = normal_matrix(&jac, p);
    let dof = m - p;
    let s2 = if dof > 0 {
        lit::<T>(2.0) * c / T::from_usize(dof).unwrap()
    } else {
        T::zero()
    };
    let mut ill = false;
    let mut cov = vec![vec![T::zero(); p]; p];
    for k in 0..p {
        let mut e = vec![T::zero(); p];
        e[k] = T::one();
        match solve_dense(&a, &e, T::epsilon().sqrt() * lit(1e-3)) {
            Some(col) => {
                for i in 0..p {
                    cov[i][k] = col[i] * s2 * d[i] * d[k];
                }
            }
            None => {
                ill = true;
                for row in cov.iter_mut() {
                    row[k] = T::infinity();
                }
            }
        }
    }
    let sigmas = (0..p).map(|k| cov[k][k].abs().sqrt()).collect();
    Ok(FitResult {
        names: names.iter().map(|s| s.to_string()).collect(),
        values: to_x(&u),
        sigmas,
        covariance: cov,
        residual_rms: (lit::<T>(2.0) * c / T::from_usize(m).unwrap()).sqrt(),
        converged,
        iterations,
        gradient_norm: grad_norm,
        ill_conditioned: ill,
    })
}

fn damped_diag<T: Real>(a: &[Vec<T>], k: usize, col_norm: T) -> T {
    a[k][k].max(T::epsilon() * col_norm * col_norm)
}
