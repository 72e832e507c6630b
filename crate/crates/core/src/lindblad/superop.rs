//! Superoperators on column-stacked operators, `vec(AXB) = (Bᵀ ⊗ A) vec(X)`.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::{expm, herm_eig, tensor, Matrix, Operator};
use crate::scalar::{Real, C};

/// Dense `d² × d²` matrix acting on `vec(X)` for `d × d` operators `X`.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator<T> {
    dim: usize,
    matrix: Matrix<T>,
}

impl<T: Real> Superoperator<T> {
    pub fn from_matrix(dim: usize, matrix: Matrix<T>) -> Result<Self> {
        if matrix.rows() != dim * dim || !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                context: "Superoperator::from_matrix",
                expected: dim * dim,
                found: matrix.rows(),
            });
        }
        Ok(Self { dim, matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            matrix: Matrix::identity(dim * dim),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            matrix: Matrix::zeros(dim * dim, dim * dim),
        }
    }

    /// `X ↦ A X B`.
    pub fn sandwich(a: &Operator<T>, b: &Operator<T>) -> Self {
        Self {
            dim: a.rows(),
            matrix: tensor(&b.transpose(), a),
        }
    }

    /// `X ↦ Σ_k K_k X K_k†`.
    pub fn from_kraus(kraus: &[Operator<T>]) -> Result<Self> {
        let dim = kraus
            .first()
            .map(|k| k.rows())
            .ok_or_else(|| Error::InvalidArgument("empty Kraus list".into()))?;
        let mut m = Matrix::zeros(dim * dim, dim * dim);
        for k in kraus {
            if k.rows() != dim || !k.is_square() {
                return Err(Error::DimensionMismatch {
                    context: "from_kraus",
                    expected: dim,
                    found: k.rows(),
                });
            }
            m += &tensor(&k.conj(), k);
        }
        Ok(Self { dim, matrix: m })
    }

    /// Operator dimension `d` (the matrix is `d² × d²`).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.matrix
    }

    pub fn apply(&self, x: &Operator<T>) -> Operator<T> {
        assert_eq!(x.rows(), self.dim, "superoperator dimension mismatch");
        Operator::unvectorize(&self.matrix.matvec(&x.vectorize()), self.dim)
    }

    /// Hilbert–Schmidt adjoint: the conjugate transpose of the matrix.
    pub fn adjoint(&self) -> Self {
        Self {
            dim: self.dim,
            matrix: self.matrix.adjoint(),
        }
    }

    /// `self ∘ first`.
    pub fn compose(&self, first: &Self) -> Self {
        assert_eq!(self.dim, first.dim);
        Self {
            dim: self.dim,
            matrix: &self.matrix * &first.matrix,
        }
    }

    pub fn scale_re(&self, s: T) -> Self {
        Self {
            dim: self.dim,
            matrix: self.matrix.scale_re(s),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            dim: self.dim,
            matrix: &self.matrix + &other.matrix,
        }
    }

    /// `exp(t·S)`.
    pub fn exp(&self, t: T) -> Self {
        Self {
            dim: self.dim,
            matrix: expm(&self.matrix.scale_re(t)),
        }
    }

    /// Choi matrix `Σ_{ij} |i⟩⟨j| ⊗ N(|i⟩⟨j|)` (input factor on the left).
    pub fn choi(&self) -> Operator<T> {
        let d = self.dim;
        let mut out = Operator::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                // column of S for vec(|i⟩⟨j|) is index i + j·d
                let col = i + j * d;
                for a in 0..d {
                    for b in 0..d {
                        out[(i * d + a, j * d + b)] = self.matrix[(a + b * d, col)];
                    }
                }
            }
        }
        out
    }

    /// `max_k |(t·S)_k − t_k|` where `t` is the row vector computing the trace.
    pub fn trace_preservation_error(&self) -> T {
        let d = self.dim;
        let n = d * d;
        let mut err = T::zero();
        for col in 0..n {
            let mut s = C::<T>::zero();
            for i in 0..d {
                s = s + self.matrix[(i + i * d, col)];
            }
            let target = if col % (d + 1) == 0 { C::one() } else { C::zero() };
            err = err.max((s - target).norm());
        }
        err
    }

    /// Smallest eigenvalue of the (Hermitian part of the) Choi matrix.
    pub fn min_choi_eigenvalue(&self) -> Result<T> {
        Ok(herm_eig(&self.choi().hermitian_part())?.values[0])
    }

    /// Trace preserving and completely positive to tolerance `tol`.
    pub fn is_channel(&self, tol: T) -> Result<bool> {
        Ok(self.trace_preservation_error() <= tol && self.min_choi_eigenvalue()? >= -tol)
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.matrix.max_abs_diff(&other.matrix)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{sigma_x, sigma_z};
    use crate::scalar::c;

    #[test]
    fn sandwich_matches_direct_product() {
        let a = sigma_x::<f64>();
        let b = &sigma_z::<f64>() + &Operator::identity(2).scale(c(0.0, 0.5));
        let x = Operator::<f64>::from_fn(2, 2, |i, j| c(i as f64 + 0.2, j as f64 - 0.7));
        let s = Superoperator::sandwich(&a, &b);
        assert!(s.apply(&x).max_abs_diff(&(&(&a * &x) * &b)) < 1e-15);
    }

    #[test]
    fn unitary_channel_is_cptp() {
        let s = Superoperator::<f64>::from_kraus(&[sigma_x()]).unwrap();
        assert!(s.trace_preservation_error() < 1e-15);
        assert!(s.min_choi_eigenvalue().unwrap() > -1e-14);
        assert!(s.is_channel(1e-12).unwrap());
    }

    #[test]
    fn transpose_map_is_not_cp() {
        let d = 2;
        let m = Matrix::<f64>::from_fn(4, 4, |r, col| {
            let (i, j) = (r % d, r / d);
            let (k, l) = (col % d, col / d);
            if i == l && j == k {
                C::one()
            } else {
                C::zero()
            }
        });
        let s = Superoperator::from_matrix(2, m).unwrap();
        assert!(s.trace_preservation_error() < 1e-15);
        assert!(s.min_choi_eigenvalue().unwrap() < -0.5);
    }
}
