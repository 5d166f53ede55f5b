//! Frequency-domain power spectra.
//!
//! `freqs` are absolute lab frequencies in Hz. `values` follow the display
//! convention 2πS(ω) in W/Hz, so integrating `values` over Hz yields watts.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T: Real> {
    freqs: Vec<T>,
    values: Vec<T>,
    /// Digest of the configuration that produced the spectrum, if known.
    pub digest: Option<String>,
}

impl<T: Real> Spectrum<T> {
    pub fn new(freqs: Vec<T>, values: Vec<T>) -> Result<Self> {
        if freqs.len() != values.len() {
            return Err(Error::GridMismatch(format!(
                "{} frequencies vs {} values",
                freqs.len(),
                values.len()
            )));
        }
        if freqs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("freqs", "must be strictly increasing"));
        }
        if values.iter().chain(&freqs).any(|v| !v.is_finite()) {
            return Err(Error::param("values", "must be finite"));
        }
        Ok(Self {
            freqs,
            values,
            digest: None,
        })
    }

    /// Evaluates `f` on every grid point.
    pub fn from_fn(freqs: &[T], f: impl Fn(T) -> T) -> Result<Self> {
        Self::new(freqs.to_vec(), freqs.iter().map(|&x| f(x)).collect())
    }

    pub fn freqs(&self) -> &[T] {
        &self.freqs
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// S(ω) itself, i.e. `values / 2π`.
    pub fn raw_values(&self) -> Vec<T> {
        self.values.iter().map(|&v| v / T::two_pi()).collect()
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    /// Index and value of the maximum.
    pub fn peak(&self) -> Option<(usize, T)> {
        self.values
            .iter()
            .copied()
            .enumerate()
            .fold(None, |best, (i, v)| match best {
                Some((_, b)) if b >= v => best,
                _ => Some((i, v)),
            })
    }

    /// Index and value of the minimum.
    pub fn trough(&self) -> Option<(usize, T)> {
        self.values
            .iter()
            .copied()
            .enumerate()
            .fold(None, |best, (i, v)| match best {
                Some((_, b)) if b <= v => best,
                _ => Some((i, v)),
            })
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Trapezoidal integral over the grid, in watts.
    pub fn integrate(&self) -> T {
        self.freqs
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(f, v)| (f[1] - f[0]) * (v[0] + v[1]) / T::lit(2.0))
            .sum()
    }

    /// Trapezoidal integral plus the analytic 1/(f − f0)² tails beyond both
    /// grid ends, appropriate for Lorentzian lines centred at `center_hz`.
    pub fn integrate_with_tails(&self, center_hz: T) -> T {
        let mut total = self.integrate();
        if let (Some(&f_lo), Some(&f_hi)) = (self.freqs.first(), self.freqs.last()) {
            let v_lo = self.values[0];
            let v_hi = self.values[self.values.len() - 1];
            if f_lo < center_hz {
                total += v_lo * (center_hz - f_lo);
            }
            if f_hi > center_hz {
                total += v_hi * (f_hi - center_hz);
            }
        }
        total
    }

    pub fn scaled(&self, gain: T) -> Self {
        Self {
            freqs: self.freqs.clone(),
            values: self.values.iter().map(|&v| v * gain).collect(),
            digest: None,
        }
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.freqs.len() == other.freqs.len()
            && self
                .freqs
                .iter()
                .zip(&other.freqs)
                .all(|(&a, &b)| (a - b).abs() <= T::epsilon() * a.abs().max(b.abs()) * T::lit(4.0))
    }

    /// Pointwise `self − other`; negative results are kept.
    pub fn difference(&self, other: &Self) -> Result<Self> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch(
                "spectra are sampled on different grids".into(),
            ));
        }
        Ok(Self {
            freqs: self.freqs.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| a - b)
                .collect(),
            digest: None,
        })
    }

    pub fn sum(&self, other: &Self) -> Result<Self> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch(
                "spectra are sampled on different grids".into(),
            ));
        }
        Ok(Self {
            freqs: self.freqs.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| a + b)
                .collect(),
            digest: None,
        })
    }

    pub fn map_values(&self, f: impl Fn(T, T) -> T) -> Self {
        Self {
            freqs: self.freqs.clone(),
            values: self
                .freqs
                .iter()
                .zip(&self.values)
                .map(|(&x, &v)| f(x, v))
                .collect(),
            digest: None,
        }
    }

    /// Same values on a grid translated by `offset_hz` (e.g. baseband to lab).
    pub fn shifted(&self, offset_hz: T) -> Self {
        Self {
            freqs: self.freqs.iter().map(|&f| f + offset_hz).collect(),
            values: self.values.clone(),
            digest: self.digest.clone(),
        }
    }

    pub fn into_parts(self) -> (Vec<T>, Vec<T>) {
        (self.freqs, self.values)
    }
}

/// `n` evenly spaced points from `start` to `stop` inclusive.
pub fn linspace<T: Real>(start: T, stop: T, n: usize) -> Vec<T> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / T::from_usize(n - 1).unwrap();
            (0..n)
                .map(|i| {
                    if i == n - 1 {
                        stop
                    } else {
                        start + step * T::from_usize(i).unwrap()
                    }
                })
                .collect()
        }
    }
}

/// `n` log-spaced points from `start` to `stop` inclusive (both positive).
pub fn logspace<T: Real>(start: T, stop: T, n: usize) -> Vec<T> {
    let mut out: Vec<T> = linspace(start.ln(), stop.ln(), n)
        .into_iter()
        .map(T::exp)
        .collect();
    if let Some(first) = out.first_mut() {
        *first = start;
    }
    if n > 1 {
        out[n - 1] = stop;
    }
    out
}

/// Uniform grid centred on `center_hz` spanning ±`half_span_hz`.
pub fn centered_grid<T: Real>(center_hz: T, half_span_hz: T, n: usize) -> Vec<T> {
    linspace(center_hz - half_span_hz, center_hz + half_span_hz, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unsorted() {
        assert!(Spectrum::new(vec![1.0, 1.0], vec![0.0, 0.0]).is_err());
        assert!(Spectrum::new(vec![1.0, 2.0], vec![0.0]).is_err());
        assert!(Spectrum::new(vec![1.0, 2.0], vec![0.0, f64::NAN]).is_err());
    }

    #[test]
    fn lorentzian_integral_with_tails() {
        let g = 1.0;
        let f = centered_grid(100.0, 40.0 * g, 4001);
        let s = Spectrum::from_fn(&f, |x: f64| g / ((x - 100.0).powi(2) + g * g)).unwrap();
        let exact = std::f64::consts::PI;
        assert!((s.integrate() - exact).abs() / exact > 0.01);
        assert!((s.integrate_with_tails(100.0) - exact).abs() / exact < 1e-4);
    }

    #[test]
    fn difference_round_trip() {
        let f = linspace(0.0, 1.0, 11);
        let a = Spectrum::from_fn(&f, |x: f64| x * x).unwrap();
        let b = Spectrum::from_fn(&f, |x: f64| 3.0 - x).unwrap();
        let back = a.sum(&b).unwrap().difference(&b).unwrap();
        for (x, y) in back.values().iter().zip(a.values()) {
            assert!((x - y).abs() < 1e-15);
        }
        let other = Spectrum::from_fn(&linspace(0.0, 2.0, 11), |x: f64| x).unwrap();
        assert!(a.difference(&other).is_err());
    }

    #[test]
    fn spacing_helpers() {
        let l = linspace(1.0, 2.0, 3);
        assert_eq!(l, vec![1.0, 1.5, 2.0]);
        let g = logspace::<f64>(1.0, 100.0, 3);
        assert!((g[1] - 10.0).abs() < 1e-12);
        assert_eq!(*g.last().unwrap(), 100.0);
    }
}
