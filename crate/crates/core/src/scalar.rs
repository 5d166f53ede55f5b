//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;
/// Elementary charge, C (used to convert eV gaps to joules).
pub const E_CHARGE: f64 = 1.602_176_634e-19;

/// Real floating-point type the models are generic over (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + rustfft::FftNum
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn two_pi() -> Self {
        Self::TAU()
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type C<T> = Complex<T>;

#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::lit(x)
}

#[inline]
pub fn hbar<T: Real>() -> T {
    T::lit(HBAR)
}

#[inline]
pub fn k_b<T: Real>() -> T {
    T::lit(K_B)
}

/// Converts a frequency in Hz to an angular frequency in rad/s.
#[inline]
pub fn hz_to_rad<T: Real>(f: T) -> T {
    f * T::two_pi()
}

/// Converts an angular frequency in rad/s to Hz.
#[inline]
pub fn rad_to_hz<T: Real>(w: T) -> T {
    w / T::two_pi()
}

/// Photon energy ħω in joules.
#[inline]
pub fn photon_energy<T: Real>(omega: T) -> T {
    hbar::<T>() * omega
}

#[inline]
pub(crate) fn cplx<T: Real>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn creal<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}

/// Relative difference |a-b| / max(|a|, |b|, floor).
pub fn rel_diff<T: Real>(a: T, b: T, floor: T) -> T {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Picks a tolerance by precision: `double` for f64-like types, `single` otherwise.
#[inline]
pub(crate) fn tol<T: Real>(double: f64, single: f64) -> T {
    if T::epsilon() < T::lit(1e-10) {
        T::lit(double)
    } else {
        T::lit(single)
    }
}
