//! Averaged-periodogram PSD estimation.

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use crate::spectrum::Spectrum;

/// Uniformly sampled real record. `gain` converts squared sample units to
/// watts, so a unit-variance series carries `gain` watts.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<T: Real> {
    sample_rate: T,
    samples: Vec<T>,
    gain: T,
}

impl<T: Real> TimeSeries<T> {
    pub fn new(sample_rate: T, samples: Vec<T>, gain: T) -> Result<Self> {
        if !(sample_rate > T::zero()) || !sample_rate.is_finite() {
            return Err(Error::param("sample_rate", "must be positive"));
        }
        if !(gain >= T::zero()) || !gain.is_finite() {
            return Err(Error::param("gain", "must be nonnegative"));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("samples", "must be finite"));
        }
        Ok(Self {
            sample_rate,
            samples,
            gain,
        })
    }

    pub fn sample_rate(&self) -> T {
        self.sample_rate
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn gain(&self) -> T {
        self.gain
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> T {
        T::from_usize(self.samples.len()).unwrap() / self.sample_rate
    }

    /// Mean power in watts, gain·⟨x²⟩.
    pub fn power(&self) -> T {
        if self.samples.is_empty() {
            return T::zero();
        }
        let n = T::from_usize(self.samples.len()).unwrap();
        self.gain * self.samples.iter().map(|&x| x * x).sum::<T>() / n
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    #[default]
    Hann,
    Hamming,
    Rectangular,
}

impl Window {
    /// Periodic (DFT-even) coefficients of length `n`.
    pub fn coefficients<T: Real>(self, n: usize) -> Vec<T> {
        let nn = T::from_usize(n).unwrap();
        (0..n)
            .map(|k| {
                let c = (T::two_pi() * T::from_usize(k).unwrap() / nn).cos();
                match self {
                    Window::Hann => (T::one() - c) / lit(2.0),
                    Window::Hamming => lit::<T>(0.54) - lit::<T>(0.46) * c,
                    Window::Rectangular => T::one(),
                }
            })
            .collect()
    }
}

/// Default segment length: the power of two giving at least 20 bins per
/// linewidth, capped at N/8 so that at least eight segments are averaged.
pub fn default_segment_len<T: Real>(sample_rate: T, linewidth_hz: T, n_samples: usize) -> usize {
    let want = (lit::<T>(20.0) * sample_rate / linewidth_hz).log2().ceil();
    let want = 1usize << want.to_u32().unwrap_or(0).min(40);
    let cap = (n_samples / 8).max(1);
    let cap = 1usize << (usize::BITS - 1 - cap.leading_zeros());
    want.min(cap)
}

/// One-sided Welch PSD in W/Hz on the baseband grid 0..=fs/2.
///
/// Segments are windowed and transformed without detrending (removing the
/// segment mean would bias the bins next to DC); periodograms are normalised by fs·Σw² and doubled except at DC and
/// Nyquist, so white noise of variance v reads 2v·gain/fs.
pub fn welch_psd<T: Real>(
    ts: &TimeSeries<T>,
    segment_len: usize,
    overlap: T,
    window: Window,
) -> Result<Spectrum<T>> {
    if segment_len < 2 {
        return Err(Error::param("segment_len", "must be at least 2"));
    }
    if !(overlap >= T::zero() && overlap < T::one()) {
        return Err(Error::param("overlap", "must lie in [0, 1)"));
    }
    let n = ts.len();
    if n < 2 * segment_len {
        return Err(Error::TooShort(format!(
            "{n} samples for segments of {segment_len}; need at least two segments"
        )));
    }
    let step = ((T::one() - overlap) * T::from_usize(segment_len).unwrap())
        .round()
        .to_usize()
        .unwrap_or(1)
        .max(1);
    let starts: Vec<usize> = (0..)
        .map(|k| k * step)
        .take_while(|s| s + segment_len <= n)
        .collect();
    let w: Vec<T> = window.coefficients(segment_len);
    let w2: T = w.iter().map(|&v| v * v).sum();
    let fft = FftPlanner::<T>::new().plan_fft_forward(segment_len);
    let bins = segment_len / 2 + 1;
    let x = ts.samples();

    let acc = starts
        .par_iter()
        .map(|&s| {
            let seg = &x[s..s + segment_len];
            let mut buf: Vec<Complex<T>> = seg
                .iter()
                .zip(&w)
                .map(|(&v, &wk)| Complex::new(v * wk, T::zero()))
                .collect();
            fft.process(&mut buf);
            buf[..bins].iter().map(|c| c.norm_sqr()).collect::<Vec<T>>()
        })
        .reduce(
            || vec![T::zero(); bins],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );

    let fs = ts.sample_rate();
    let norm = ts.gain() / (fs * w2 * T::from_usize(starts.len()).unwrap());
    let df = fs / T::from_usize(segment_len).unwrap();
    let freqs: Vec<T> = (0..bins).map(|k| T::from_usize(k).unwrap() * df).collect();
    let values: Vec<T> = acc
        .into_iter()
        .enumerate()
        .map(|(k, p)| {
            let edge = k == 0 || (segment_len.is_multiple_of(2) && k == bins - 1);
            if edge {
                p * norm
            } else {
                p * norm * lit(2.0)
            }
        })
        .collect();
    Spectrum::new(freqs, values)
}

/// Drive-on minus drive-off spectrum; negative values (e.g. a dip) are kept.
pub fn subtract_background<T: Real>(on: &Spectrum<T>, off: &Spectrum<T>) -> Result<Spectrum<T>> {
    on.difference(off)
}
