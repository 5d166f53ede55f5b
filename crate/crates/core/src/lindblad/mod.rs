//! Numerical Lindblad oracle.
//!
//! Superoperators act on column-stacked density matrices:
//! vec(ρ)[i + d·j] = ρ[i][j], so vec(AρB) = (Bᵀ ⊗ A)·vec(ρ).
//! Every dissipator is stored in the standard form
//! Γ·(cρc† − ½{c†c, ρ}), i.e. Γ is the actual transition rate.

mod correlation;
mod dynamics;
mod output;

pub use correlation::{regression_correlator, CorrelationTrace, CorrelatorKind, Ordering};
pub use dynamics::{evolve, evolve_with, steady_state, EvolveOptions};
pub use output::{
    connected_spectra, output_intensity_numeric, output_psd_numeric, psd_grid_check,
    ConnectedSpectra,
};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::model::{thermal_weights, SystemConfig, Transition};
use crate::scalar::{cplx, creal, lit, tol, Real, C};

/// Dense density matrix of a 2- or 3-level system.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Real> {
    m: CMatrix<T>,
}

impl<T: Real> DensityMatrix<T> {
    /// Wraps a matrix after checking Hermiticity, unit trace and positivity.
    pub fn new(m: CMatrix<T>) -> Result<Self> {
        let rho = Self { m };
        rho.validate()?;
        Ok(rho)
    }

    /// |k⟩⟨k| in dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Self {
        Self {
            m: CMatrix::ket_bra(dim, k, k),
        }
    }

    pub fn ground(dim: usize) -> Self {
        Self::basis(dim, 0)
    }

    pub fn dim(&self) -> usize {
        self.m.rows()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.m
    }

    pub fn get(&self, i: usize, j: usize) -> C<T> {
        self.m[(i, j)]
    }

    pub fn population(&self, k: usize) -> T {
        self.m[(k, k)].re
    }

    /// Tr{Aρ}.
    pub fn expect(&self, op: &CMatrix<T>) -> C<T> {
        (op * &self.m).trace()
    }

    pub fn to_vec(&self) -> Vec<C<T>> {
        vectorize(&self.m)
    }

    pub fn from_vec(v: &[C<T>], dim: usize) -> Self {
        Self {
            m: unvectorize(v, dim),
        }
    }

    /// (ρ + ρ†)/2 normalised to unit trace.
    pub fn hermitized(&self) -> Self {
        let h = (&self.m + &self.m.adjoint()).scale_re(lit(0.5));
        let tr = h.trace().re;
        Self {
            m: h.scale_re(tr.recip()),
        }
    }

    pub fn trace(&self) -> C<T> {
        self.m.trace()
    }

    pub fn hermiticity_error(&self) -> T {
        (&self.m - &self.m.adjoint()).norm_max()
    }

    /// True when ρ + tol·I admits a Cholesky factorisation.
    pub fn is_positive(&self, tol: T) -> bool {
        let n = self.dim();
        let mut l = vec![C::<T>::new(T::zero(), T::zero()); n * n];
        for j in 0..n {
            let mut d = self.m[(j, j)].re + tol;
            for k in 0..j {
                d -= l[j * n + k].norm_sqr();
            }
            if !(d > T::zero()) {
                return false;
            }
            let djj = d.sqrt();
            l[j * n + j] = creal(djj);
            for i in (j + 1)..n {
                let mut s = self.m[(i, j)];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k].conj();
                }
                l[i * n + j] = s / djj;
            }
        }
        true
    }

    pub fn validate(&self) -> Result<()> {
        if !self.m.is_square() || !(2..=3).contains(&self.dim()) {
            return Err(Error::param("rho", "must be a 2x2 or 3x3 matrix"));
        }
        let herm_tol = tol::<T>(1e-12, 1e-5);
        if self.hermiticity_error() > herm_tol {
            return Err(Error::Domain("density matrix is not Hermitian".into()));
        }
        if (self.trace() - C::new(T::one(), T::zero())).norm() > herm_tol {
            return Err(Error::Domain(
                "density matrix trace differs from one".into(),
            ));
        }
        let ptol = tol::<T>(1e-10, 1e-5);
        if !self.is_positive(ptol) {
            return Err(Error::Domain(
                "density matrix has a negative eigenvalue".into(),
            ));
        }
        Ok(())
    }
}

/// Column-stacking vectorisation.
pub fn vectorize<T: Real>(m: &CMatrix<T>) -> Vec<C<T>> {
    let d = m.rows();
    (0..d * d).map(|k| m[(k % d, k / d)]).collect()
}

pub fn unvectorize<T: Real>(v: &[C<T>], dim: usize) -> CMatrix<T> {
    CMatrix::from_fn(dim, dim, |i, j| v[i + dim * j])
}

/// Lindblad generator acting on vec(ρ).
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator<T: Real> {
    dim: usize,
    m: CMatrix<T>,
}

impl<T: Real> Superoperator<T> {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            m: CMatrix::zeros(dim * dim, dim * dim),
        }
    }

    pub fn from_matrix(dim: usize, m: CMatrix<T>) -> Result<Self> {
        if m.rows() != dim * dim || m.cols() != dim * dim {
            return Err(Error::param("superoperator", "shape must be dim² × dim²"));
        }
        Ok(Self { dim, m })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.m
    }

    pub fn apply(&self, v: &[C<T>]) -> Vec<C<T>> {
        self.m.mul_vec(v)
    }

    pub fn apply_to(&self, rho: &CMatrix<T>) -> CMatrix<T> {
        unvectorize(&self.apply(&vectorize(rho)), self.dim)
    }

    /// −i[H, ·].
    pub fn add_hamiltonian(&mut self, h: &CMatrix<T>) {
        let id = CMatrix::identity(self.dim);
        let minus_i = cplx(T::zero(), -T::one());
        let comm = &id.kron(h) - &h.transpose().kron(&id);
        self.m = &self.m + &comm.scale(minus_i);
    }

    /// rate · (cρc† − ½{c†c, ρ}).
    pub fn add_dissipator(&mut self, c: &CMatrix<T>, rate: T) {
        if rate == T::zero() {
            return;
        }
        let id = CMatrix::identity(self.dim);
        let cdc = &c.adjoint() * c;
        let jump = c.adjoint().transpose().kron(c);
        let anti = &id.kron(&cdc) + &cdc.transpose().kron(&id);
        let d = &jump - &anti.scale_re(lit(0.5));
        self.m = &self.m + &d.scale_re(rate);
    }

    /// Largest |Tr L[e_k]| over basis inputs; zero for a trace-preserving map.
    pub fn trace_defect(&self) -> T {
        let d = self.dim;
        (0..d * d)
            .map(|col| {
                (0..d)
                    .map(|i| self.m[(i + d * i, col)])
                    .fold(C::new(T::zero(), T::zero()), |a, b| a + b)
                    .norm()
            })
            .fold(T::zero(), T::max)
    }

    pub fn scale_of(&self) -> T {
        self.m.norm_max()
    }
}

/// |i⟩⟨j| lowering-type operator in dimension `dim`.
pub fn transition_op<T: Real>(dim: usize, i: usize, j: usize) -> CMatrix<T> {
    CMatrix::ket_bra(dim, i, j)
}

/// σ− = |0⟩⟨1| of the 0↔1 transition.
pub fn sigma_minus<T: Real>(dim: usize) -> CMatrix<T> {
    transition_op(dim, 0, 1)
}

pub fn sigma_plus<T: Real>(dim: usize) -> CMatrix<T> {
    transition_op(dim, 1, 0)
}

/// Rotating-frame Hamiltonian (rad/s, ħ = 1).
///
/// Two levels: −(Δ/2)σz + (Ωσ+ + Ω*σ−)/2 with Δ = ω_p − ω01.
/// Three levels: −Δ1|1⟩⟨1| − (Δ1 + Δ2)|2⟩⟨2| plus the 0↔1 drive and a
/// √2-enhanced 1↔2 drive.
pub fn hamiltonian<T: Real>(config: &SystemConfig<T>) -> CMatrix<T> {
    let dim = config.transmon.levels;
    let mut h = CMatrix::zeros(dim, dim);
    let half = lit::<T>(0.5);
    let (d1, o1) = config.drive01();
    if dim == 2 {
        h[(0, 0)] = creal(d1 * half);
        h[(1, 1)] = creal(-d1 * half);
    } else {
        let (d2, o2) = config
            .drive(Transition::T12)
            .map_or((T::zero(), C::new(T::zero(), T::zero())), |d| {
                (d.detuning, d.amplitude)
            });
        h[(1, 1)] = creal(-d1);
        h[(2, 2)] = creal(-d1 - d2);
        let s = T::SQRT_2() * half;
        h[(2, 1)] = o2 * s;
        h[(1, 2)] = o2.conj() * s;
    }
    h[(1, 0)] = o1 * half;
    h[(0, 1)] = o1.conj() * half;
    h
}

/// Builds the full generator for a validated configuration.
pub fn build_liouvillian<T: Real>(config: &SystemConfig<T>) -> Result<Superoperator<T>> {
    config.validate()?;
    let dim = config.transmon.levels;
    let mut l = Superoperator::zero(dim);
    l.add_hamiltonian(&hamiltonian(config));

    let sm = sigma_minus::<T>(dim);
    let sp = sigma_plus::<T>(dim);
    let r = &config.radiative;
    let n = &config.nonradiative;
    for bath in [r, n] {
        let (down, up) = thermal_weights(bath.occupation, bath.statistics);
        l.add_dissipator(&sm, bath.gamma * down);
        l.add_dissipator(&sp, bath.gamma * up);
    }

    let gphi = config.transmon.gamma_phi;
    if dim == 2 {
        let mut sz = CMatrix::zeros(2, 2);
        sz[(0, 0)] = creal(-T::one());
        sz[(1, 1)] = creal(T::one());
        l.add_dissipator(&sz, gphi / lit(2.0));
    } else {
        let o12 = config.occupations_12();
        let sm12 = transition_op::<T>(3, 1, 2);
        let sp12 = transition_op::<T>(3, 2, 1);
        for (bath, occ) in [(r, o12.radiative), (n, o12.nonradiative)] {
            let (down, up) = thermal_weights(occ, bath.statistics);
            let g = bath.gamma * lit(2.0);
            l.add_dissipator(&sm12, g * down);
            l.add_dissipator(&sp12, g * up);
        }
        for k in 0..3 {
            l.add_dissipator(&CMatrix::ket_bra(3, k, k), gphi);
        }
    }

    if let Some(qp) = &config.quasiparticles {
        l.add_dissipator(&sm, qp.gamma_down);
        l.add_dissipator(&sp, qp.gamma_up);
    }
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DriveSpec;
    use crate::scalar::hz_to_rad;

    #[test]
    fn vectorisation_convention() {
        let a = CMatrix::<f64>::from_fn(3, 3, |i, j| cplx((i * 3 + j) as f64, i as f64));
        let b = CMatrix::<f64>::from_fn(3, 3, |i, j| cplx(i as f64 - j as f64, 1.0));
        let x = CMatrix::<f64>::from_fn(3, 3, |i, j| cplx((i + 2 * j) as f64, -(j as f64)));
        let lhs = vectorize(&(&(&a * &x) * &b));
        let rhs = b.transpose().kron(&a).mul_vec(&vectorize(&x));
        for (p, q) in lhs.iter().zip(&rhs) {
            assert!((p - q).norm() < 1e-12);
        }
        assert_eq!(unvectorize(&vectorize(&x), 3), x);
    }

    #[test]
    fn generator_is_trace_preserving() {
        let c = SystemConfig::<f64>::table1().with_drive(DriveSpec::real(
            Transition::T01,
            1e5,
            hz_to_rad(1e6),
        ));
        let l = build_liouvillian(&c).unwrap();
        assert!(l.trace_defect() < 1e-10 * l.scale_of());
        let mut c3 = c.clone().with_levels(3);
        c3.transmon.gamma_phi = 1e4;
        let c3 = c3.with_drive(DriveSpec::real(Transition::T12, 0.0, 1e6));
        let l3 = build_liouvillian(&c3).unwrap();
        assert!(l3.trace_defect() < 1e-10 * l3.scale_of());
    }

    #[test]
    fn dephasing_rate_convention() {
        // With only Γφ the 0-1 coherence decays at exactly Γφ in both models.
        for levels in [2, 3] {
            let mut c = SystemConfig::<f64>::table1().with_levels(levels);
            c.radiative.gamma = 0.0;
            c.nonradiative.gamma = 0.0;
            c.transmon.gamma_phi = 3.0;
            let l = build_liouvillian(&c).unwrap();
            let rho = CMatrix::ket_bra(levels, 0, 1);
            let out = l.apply_to(&rho);
            assert!((out[(0, 1)] - cplx(-3.0, 0.0)).norm() < 1e-12, "{levels}");
        }
    }

    #[test]
    fn positivity_check() {
        let good = CMatrix::<f64>::from_rows(&[
            vec![cplx(0.5, 0.0), cplx(0.5, 0.0)],
            vec![cplx(0.5, 0.0), cplx(0.5, 0.0)],
        ]);
        assert!(DensityMatrix::new(good).is_ok());
        let bad = CMatrix::<f64>::from_rows(&[
            vec![cplx(0.5, 0.0), cplx(0.6, 0.0)],
            vec![cplx(0.6, 0.0), cplx(0.5, 0.0)],
        ]);
        assert!(DensityMatrix::new(bad).is_err());
    }
}
