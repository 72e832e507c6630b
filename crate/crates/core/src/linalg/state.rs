use std::ops::Deref;

use super::eigen::herm_eig;
use super::matrix::Operator;
use crate::error::{Error, Result};
use crate::scalar::{Real, C};

/// A validated density matrix: Hermitian, unit trace, no eigenvalue below
/// `−tol`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T>(Operator<T>);

impl<T: Real> DensityMatrix<T> {
    /// Validates `rho` with tolerance `tol` and stores its Hermitian part.
    pub fn new(rho: Operator<T>, tol: T) -> Result<Self> {
        check_state(&rho, tol)?;
        Ok(Self(rho.hermitian_part()))
    }

    /// Validates with a tolerance suited to the scalar type.
    pub fn try_from_operator(rho: Operator<T>) -> Result<Self> {
        Self::new(rho, T::hermitian_tol())
    }

    /// Wraps without validation. The caller guarantees the invariants.
    pub fn new_unchecked(rho: Operator<T>) -> Self {
        Self(rho)
    }

    pub fn pure(ket: &[C<T>]) -> Result<Self> {
        let norm: T = ket.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if norm == T::zero() {
            return Err(Error::InvalidState("zero vector".into()));
        }
        let v: Vec<C<T>> = ket.iter().map(|z| z / norm).collect();
        Ok(Self(Operator::projector(&v)))
    }

    /// `|k⟩⟨k|` in dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut rho = Operator::zeros(dim, dim);
        rho[(k, k)] = C::new(T::one(), T::zero());
        Self(rho)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(Operator::identity(dim).scale_re(T::one() / T::from_usize(dim).unwrap()))
    }

    pub fn as_operator(&self) -> &Operator<T> {
        &self.0
    }

    pub fn into_operator(self) -> Operator<T> {
        self.0
    }

    pub fn purity(&self) -> T {
        purity(&self.0)
    }
}

impl<T> Deref for DensityMatrix<T> {
    type Target = Operator<T>;
    fn deref(&self) -> &Operator<T> {
        &self.0
    }
}

/// Checks the density-matrix invariants to tolerance `tol`.
pub fn check_state<T: Real>(rho: &Operator<T>, tol: T) -> Result<()> {
    if !rho.is_square() {
        return Err(Error::InvalidState("not square".into()));
    }
    if !rho.is_finite() {
        return Err(Error::InvalidState("non-finite entries".into()));
    }
    let dev = rho.hermitian_deviation();
    if dev > tol {
        return Err(Error::InvalidState(format!("not Hermitian (deviation {:.3e})", dev.as_f64())));
    }
    let tr = rho.trace();
    if (tr.re - T::one()).abs() > tol || tr.im.abs() > tol {
        return Err(Error::InvalidState(format!("trace {:.6e} != 1", tr.re.as_f64())));
    }
    let min = herm_eig(&rho.hermitian_part())?.values[0];
    if min < -tol {
        return Err(Error::InvalidState(format!("negative eigenvalue {:.3e}", min.as_f64())));
    }
    Ok(())
}

/// `Tr[ρ²]`.
pub fn purity<T: Real>(rho: &Operator<T>) -> T {
    rho.trace_product(rho).re
}
