//! Small dense complex linear algebra.
//!
//! Everything the oracles need lives here: products, Kronecker products,
//! LU with partial pivoting, the scaling-and-squaring matrix exponential
//! and eigenvalues of small matrices. Dimensions never exceed 9x9 in this
//! crate so nothing is blocked or vectorised.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{creal, Real, C};

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T: Real> {
    rows: usize,
    cols: usize,
    data: Vec<C<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row slices; panics on ragged input.
    pub fn from_rows(rows: &[Vec<C<T>>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    /// |i><j| in dimension n.
    pub fn ket_bra(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m[(i, j)] = C::one();
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C<T>] {
        &self.data
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_re(&self, s: T) -> Self {
        self.scale(creal(s))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> C<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (r2, c2) = (other.rows, other.cols);
        Self::from_fn(self.rows * r2, self.cols * c2, |i, j| {
            self[(i / r2, j / c2)] * other[(i % r2, j % c2)]
        })
    }

    pub fn mul_vec(&self, v: &[C<T>]) -> Vec<C<T>> {
        assert_eq!(v.len(), self.cols, "dimension mismatch in mul_vec");
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(&a, &b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> T {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    pub fn norm_max(&self) -> T {
        self.data.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    pub fn lu(&self) -> Result<Lu<T>> {
        Lu::new(self)
    }

    pub fn solve(&self, b: &[C<T>]) -> Result<Vec<C<T>>> {
        Ok(self.lu()?.solve(b))
    }

    pub fn inverse(&self) -> Result<Self> {
        let lu = self.lu()?;
        let n = self.rows;
        let mut inv = Self::zeros(n, n);
        let mut e = vec![C::zero(); n];
        for j in 0..n {
            e.iter_mut().for_each(|z| *z = C::zero());
            e[j] = C::one();
            let col = lu.solve(&e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        Ok(inv)
    }

    /// Matrix exponential by scaling and squaring with a degree-13 Padé
    /// approximant (Higham 2005).
    pub fn expm(&self) -> Result<Self> {
        assert!(self.is_square(), "expm of a non-square matrix");
        const THETA_13: f64 = 5.371_920_351_148_152;
        const B: [f64; 14] = [
            64_764_752_532_480_000.0,
            32_382_376_266_240_000.0,
            7_771_770_303_897_600.0,
            1_187_353_796_428_800.0,
            129_060_195_264_000.0,
            10_559_470_521_600.0,
            670_442_572_800.0,
            33_522_128_640.0,
            1_323_241_920.0,
            40_840_800.0,
            960_960.0,
            16_380.0,
            182.0,
            1.0,
        ];
        let n = self.rows;
        let norm = self.norm_1().as_f64();
        if norm == 0.0 {
            return Ok(Self::identity(n));
        }
        if !norm.is_finite() {
            return Err(Error::Domain("expm of a non-finite matrix".into()));
        }
        let squarings = if norm > THETA_13 {
            (norm / THETA_13).log2().ceil().max(0.0) as i32
        } else {
            0
        };
        let a = self.scale_re(T::lit(0.5f64.powi(squarings)));
        let b = |k: usize| T::lit(B[k]);
        let id = Self::identity(n);
        let a2 = &a * &a;
        let a4 = &a2 * &a2;
        let a6 = &a4 * &a2;

        let inner_u = &(&a6.scale_re(b(13)) + &a4.scale_re(b(11))) + &a2.scale_re(b(9));
        let u_poly = &(&(&(&(&a6 * &inner_u) + &a6.scale_re(b(7))) + &a4.scale_re(b(5)))
            + &a2.scale_re(b(3)))
            + &id.scale_re(b(1));
        let u = &a * &u_poly;

        let inner_v = &(&a6.scale_re(b(12)) + &a4.scale_re(b(10))) + &a2.scale_re(b(8));
        let v = &(&(&(&(&a6 * &inner_v) + &a6.scale_re(b(6))) + &a4.scale_re(b(4)))
            + &a2.scale_re(b(2)))
            + &id.scale_re(b(0));

        let p = &v + &u;
        let q = &v - &u;
        let lu = q.lu()?;
        let mut r = Self::zeros(n, n);
        let mut col = vec![C::zero(); n];
        for j in 0..n {
            for i in 0..n {
                col[i] = p[(i, j)];
            }
            let x = lu.solve(&col);
            for i in 0..n {
                r[(i, j)] = x[i];
            }
        }
        for _ in 0..squarings {
            r = &r * &r;
        }
        Ok(r)
    }

    /// Eigenvalues of a small square matrix.
    ///
    /// Builds the characteristic polynomial with the Faddeev-LeVerrier
    /// recursion on a norm-scaled copy, then finds its roots with the
    /// Aberth-Ehrlich iteration. Adequate for n <= 9 with well-separated
    /// scales, which covers every generator in this crate.
    pub fn eigenvalues(&self) -> Vec<C<T>> {
        assert!(self.is_square(), "eigenvalues of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return Vec::new();
        }
        let scale = self.norm_1();
        if scale == T::zero() {
            return vec![C::zero(); n];
        }
        let a = self.scale_re(scale.recip());
        // coefficients c[k] of lambda^k, monic
        let mut c = vec![C::<T>::zero(); n + 1];
        c[n] = C::one();
        let mut m = Self::zeros(n, n);
        let id = Self::identity(n);
        for k in 1..=n {
            m = &(&a * &m) + &id.scale(c[n - k + 1]);
            let am = &a * &m;
            c[n - k] = -am.trace() / T::from_usize(k).unwrap();
        }
        poly_roots(&c).into_iter().map(|z| z * scale).collect()
    }
}

/// Roots of the polynomial sum c[k] z^k (c[n] != 0) by Aberth-Ehrlich.
pub fn poly_roots<T: Real>(c: &[C<T>]) -> Vec<C<T>> {
    let n = c.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lead = c[n];
    let c: Vec<C<T>> = c.iter().map(|&z| z / lead).collect();
    let eval = |z: C<T>| -> (C<T>, C<T>) {
        let mut p = C::zero();
        let mut dp = C::zero();
        for k in (0..=n).rev() {
            dp = dp * z + p;
            p = p * z + c[k];
        }
        (p, dp)
    };
    // Cauchy bound for the initial circle.
    let radius = T::one() + c[..n].iter().map(|z| z.norm()).fold(T::zero(), T::max);
    let mut z: Vec<C<T>> = (0..n)
        .map(|k| {
            let angle =
                T::two_pi() * T::from_usize(k).unwrap() / T::from_usize(n).unwrap() + T::lit(0.4);
            C::from_polar(radius * T::lit(0.5), angle)
        })
        .collect();
    let eps = T::epsilon();
    for _ in 0..500 {
        let mut max_step = T::zero();
        for i in 0..n {
            let (p, dp) = eval(z[i]);
            if p.norm() == T::zero() {
                continue;
            }
            let ratio = p / dp;
            let sum: C<T> = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let d = z[i] - z[j];
                    if d.norm() == T::zero() {
                        C::zero()
                    } else {
                        d.inv()
                    }
                })
                .sum();
            let denom: C<T> = C::<T>::new(T::one(), T::zero()) - ratio * sum;
            let step = if denom.norm() == T::zero() {
                ratio
            } else {
                ratio / denom
            };
            z[i] -= step;
            max_step = max_step.max(step.norm() / z[i].norm().max(T::one()));
        }
        if max_step < eps * T::lit(4.0) {
            break;
        }
    }
    z
}

/// LU factorisation with partial pivoting, PA = LU.
#[derive(Debug, Clone)]
pub struct Lu<T: Real> {
    n: usize,
    lu: Vec<C<T>>,
    perm: Vec<usize>,
    min_pivot: T,
}

impl<T: Real> Lu<T> {
    fn new(a: &CMatrix<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Domain("LU of a non-square matrix".into()));
        }
        let n = a.rows;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.norm_max();
        let tiny = scale * T::epsilon() * T::from_usize(n.max(1)).unwrap();
        let mut min_pivot = T::infinity();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[i * n + k].norm()))
                .fold((k, -T::one()), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pmax <= tiny || pmax == T::zero() {
                return Err(Error::Singular("LU factorisation"));
            }
            min_pivot = min_pivot.min(pmax);
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            for i in (k + 1)..n {
                let f = lu[i * n + k] / pivot;
                lu[i * n + k] = f;
                if f != C::zero() {
                    for j in (k + 1)..n {
                        let t = lu[k * n + j];
                        lu[i * n + j] -= f * t;
                    }
                }
            }
        }
        Ok(Self {
            n,
            lu,
            perm,
            min_pivot,
        })
    }

    /// Smallest absolute pivot encountered; a conditioning hint.
    pub fn min_pivot(&self) -> T {
        self.min_pivot
    }

    pub fn solve(&self, b: &[C<T>]) -> Vec<C<T>> {
        let n = self.n;
        assert_eq!(b.len(), n, "dimension mismatch in LU solve");
        let mut x: Vec<C<T>> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        x
    }
}

impl<T: Real> Index<(usize, usize)> for CMatrix<T> {
    type Output = C<T>;
    fn index(&self, (i, j): (usize, usize)) -> &C<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<T> {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Mul for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn mul(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in matmul");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C::zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl<T: Real> Add for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn add(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }
}

impl<T: Real> Sub for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn sub(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| a - b)
                .collect(),
        }
    }
}

/// Convenience for building complex literals in matrix constructors.
pub fn c<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::lit(im))
}
