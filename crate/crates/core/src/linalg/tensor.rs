//! Tensor products and partial traces.
//!
//! Index convention: in `A ⊗ B` the left factor is the most significant
//! index, so basis state `|i⟩⊗|j⟩` has flat index `i·dim(B) + j`.

use num_traits::Zero;

use super::matrix::{Matrix, Operator};
use crate::error::{Error, Result};
use crate::scalar::{Real, C};

/// Kronecker product `A ⊗ B`.
pub fn tensor<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    let (ar, ac, br, bc) = (a.rows(), a.cols(), b.rows(), b.cols());
    let mut out = Matrix::zeros(ar * br, ac * bc);
    for i1 in 0..ar {
        for j1 in 0..ac {
            let x = a[(i1, j1)];
            if x.is_zero() {
                continue;
            }
            for i2 in 0..br {
                for j2 in 0..bc {
                    out[(i1 * br + i2, j1 * bc + j2)] = x * b[(i2, j2)];
                }
            }
        }
    }
    out
}

/// `A_1 ⊗ A_2 ⊗ … ⊗ A_n`.
pub fn tensor_all<T: Real>(factors: &[Matrix<T>]) -> Matrix<T> {
    let mut it = factors.iter();
    let first = it.next().expect("tensor_all needs at least one factor").clone();
    it.fold(first, |acc, f| tensor(&acc, f))
}

/// Places `op` on site `site` of a register with local dimensions `dims`,
/// identity elsewhere.
pub fn embed<T: Real>(op: &Operator<T>, site: usize, dims: &[usize]) -> Result<Operator<T>> {
    if site >= dims.len() {
        return Err(Error::InvalidArgument(format!(
            "site {site} out of range for {} subsystems",
            dims.len()
        )));
    }
    if op.rows() != dims[site] || !op.is_square() {
        return Err(Error::DimensionMismatch {
            context: "embed",
            expected: dims[site],
            found: op.rows(),
        });
    }
    let left: usize = dims[..site].iter().product();
    let right: usize = dims[site + 1..].iter().product();
    let mut out = tensor(&Operator::identity(left), op);
    out = tensor(&out, &Operator::identity(right));
    Ok(out)
}

/// Traces out every subsystem not listed in `keep`.
///
/// The kept subsystems stay in their original (ascending) order.
pub fn partial_trace<T: Real>(a: &Operator<T>, dims: &[usize], keep: &[usize]) -> Result<Operator<T>> {
    let total: usize = dims.iter().product();
    if !a.is_square() || a.rows() != total || dims.contains(&0) {
        return Err(Error::DimensionMismatch {
            context: "partial_trace",
            expected: total,
            found: a.rows(),
        });
    }
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.len() != keep.len() || keep_sorted.iter().any(|&k| k >= dims.len()) {
        return Err(Error::InvalidArgument(format!(
            "keep set {keep:?} invalid for {} subsystems",
            dims.len()
        )));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep_sorted.contains(k)).collect();
    let kept_dim: usize = keep_sorted.iter().map(|&k| dims[k]).product();
    let traced_dim: usize = traced.iter().map(|&k| dims[k]).product();

    // strides of each subsystem in the flat index
    let mut strides = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let offsets = |subsystems: &[usize], mut idx: usize| -> usize {
        let mut off = 0;
        for &s in subsystems.iter().rev() {
            off += (idx % dims[s]) * strides[s];
            idx /= dims[s];
        }
        off
    };
    let kept_off: Vec<usize> = (0..kept_dim).map(|i| offsets(&keep_sorted, i)).collect();
    let traced_off: Vec<usize> = (0..traced_dim).map(|i| offsets(&traced, i)).collect();

    let mut out = Operator::zeros(kept_dim, kept_dim);
    for (i, &ki) in kept_off.iter().enumerate() {
        for (j, &kj) in kept_off.iter().enumerate() {
            let mut s = C::zero();
            for &t in &traced_off {
                s = s + a[(ki + t, kj + t)];
            }
            out[(i, j)] = s;
        }
    }
    Ok(out)
}
