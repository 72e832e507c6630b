//! Matrix exponential.
//!
//! [`expm`] is the scaling-and-squaring Padé method (degrees 3, 5, 7, 9, 13
//! chosen from the 1-norm). [`expm_action`] evaluates `exp(tA)·x` for a linear
//! map given only by its action, using a truncated Taylor series on substeps
//! small enough that the series converges to working precision.

use num_traits::{One, Zero};

use super::matrix::Matrix;
use crate::error::{Error, Result};
use crate::scalar::{Real, C};

const THETA: [(usize, f64); 5] = [
    (3, 1.495_585_217_958_292e-2),
    (5, 2.539_398_330_063_230e-1),
    (7, 9.504_178_996_162_932e-1),
    (9, 2.097_847_961_257_068e0),
    (13, 5.371_920_351_148_152e0),
];

const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn pade_coefficients(m: usize) -> &'static [f64] {
    match m {
        3 => &[120.0, 60.0, 12.0, 1.0],
        5 => &[30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0],
        7 => &[
            17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
        ],
        9 => &[
            17643225600.0,
            8821612800.0,
            2075673600.0,
            302702400.0,
            30270240.0,
            2162160.0,
            110880.0,
            3960.0,
            90.0,
            1.0,
        ],
        _ => &B13,
    }
}

fn axpy<T: Real>(acc: &mut Matrix<T>, a: T, x: &Matrix<T>) {
    for (o, &v) in acc.as_mut_slice().iter_mut().zip(x.as_slice()) {
        *o = *o + v * a;
    }
}

/// `exp(A)` for a square complex matrix.
pub fn expm<T: Real>(a: &Matrix<T>) -> Matrix<T> {
    assert!(a.is_square(), "expm needs a square matrix");
    let n = a.rows();
    let norm = a.one_norm();
    if !a.is_finite() {
        return Matrix::from_fn(n, n, |_, _| C::new(T::nan(), T::nan()));
    }
    if norm == T::zero() {
        return Matrix::identity(n);
    }
    let ident = Matrix::identity(n);
    for &(m, theta) in &THETA[..4] {
        if norm <= T::lit(theta) {
            return pade_low(a, &ident, m);
        }
    }
    let theta13 = T::lit(THETA[4].1);
    let s = if norm > theta13 {
        (norm / theta13).log2().ceil().to_i32().unwrap_or(0).max(0)
    } else {
        0
    };
    let scaled = a.scale_re(T::lit(0.5f64.powi(s)));
    let mut r = pade13(&scaled, &ident);
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

fn pade_low<T: Real>(a: &Matrix<T>, ident: &Matrix<T>, m: usize) -> Matrix<T> {
    let b = pade_coefficients(m);
    let a2 = a * a;
    let mut powers = vec![ident.clone(), a2.clone()];
    for _ in 2..=(m / 2) {
        let next = powers.last().unwrap() * &a2;
        powers.push(next);
    }
    let n = a.rows();
    let mut u_inner = Matrix::zeros(n, n);
    let mut v = Matrix::zeros(n, n);
    for (k, p) in powers.iter().enumerate() {
        axpy(&mut u_inner, T::lit(b[2 * k + 1]), p);
        axpy(&mut v, T::lit(b[2 * k]), p);
    }
    let u = a * &u_inner;
    solve_pade(&u, &v)
}

fn pade13<T: Real>(a: &Matrix<T>, ident: &Matrix<T>) -> Matrix<T> {
    let b: Vec<T> = B13.iter().map(|&x| T::lit(x)).collect();
    let n = a.rows();
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let mut w1 = Matrix::zeros(n, n);
    axpy(&mut w1, b[13], &a6);
    axpy(&mut w1, b[11], &a4);
    axpy(&mut w1, b[9], &a2);
    let mut w2 = Matrix::zeros(n, n);
    axpy(&mut w2, b[7], &a6);
    axpy(&mut w2, b[5], &a4);
    axpy(&mut w2, b[3], &a2);
    axpy(&mut w2, b[1], ident);
    let mut u = &a6 * &w1;
    u += &w2;
    let u = a * &u;
    let mut z1 = Matrix::zeros(n, n);
    axpy(&mut z1, b[12], &a6);
    axpy(&mut z1, b[10], &a4);
    axpy(&mut z1, b[8], &a2);
    let mut v = &a6 * &z1;
    axpy(&mut v, b[6], &a6);
    axpy(&mut v, b[4], &a4);
    axpy(&mut v, b[2], &a2);
    axpy(&mut v, b[0], ident);
    solve_pade(&u, &v)
}

fn solve_pade<T: Real>(u: &Matrix<T>, v: &Matrix<T>) -> Matrix<T> {
    let p = v + u;
    let q = v - u;
    // Q is well conditioned for the chosen Padé degree / scaling.
    solve(&q, &p).expect("Padé denominator is nonsingular")
}

/// Solves `A X = B` by LU decomposition with partial pivoting.
pub fn solve<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    let n = a.rows();
    if !a.is_square() || b.rows() != n {
        return Err(Error::DimensionMismatch {
            context: "solve",
            expected: n,
            found: b.rows(),
        });
    }
    let m = b.cols();
    let mut lu = a.clone();
    let mut x = b.clone();
    for k in 0..n {
        let mut piv = k;
        let mut best = lu[(k, k)].norm();
        for i in (k + 1)..n {
            let v = lu[(i, k)].norm();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if best == T::zero() {
            return Err(Error::Singular);
        }
        if piv != k {
            for j in 0..n {
                let t = lu[(k, j)];
                lu[(k, j)] = lu[(piv, j)];
                lu[(piv, j)] = t;
            }
            for j in 0..m {
                let t = x[(k, j)];
                x[(k, j)] = x[(piv, j)];
                x[(piv, j)] = t;
            }
        }
        let inv = C::<T>::one() / lu[(k, k)];
        for i in (k + 1)..n {
            let f = lu[(i, k)] * inv;
            if f.is_zero() {
                continue;
            }
            lu[(i, k)] = f;
            for j in (k + 1)..n {
                let t = lu[(k, j)];
                lu[(i, j)] = lu[(i, j)] - f * t;
            }
            for j in 0..m {
                let t = x[(k, j)];
                x[(i, j)] = x[(i, j)] - f * t;
            }
        }
    }
    for k in (0..n).rev() {
        let inv = C::<T>::one() / lu[(k, k)];
        for j in 0..m {
            let mut s = x[(k, j)];
            for i in (k + 1)..n {
                s = s - lu[(k, i)] * x[(i, j)];
            }
            x[(k, j)] = s * inv;
        }
    }
    Ok(x)
}

/// `exp(t·A)(x)` where `A` is known only through `apply` and an upper bound
/// `norm_bound ≥ ‖A‖` in the Frobenius-induced norm.
///
/// The interval is split into `s` substeps with `t·‖A‖/s ≤ 1` and each
/// substep is a Taylor series truncated once two consecutive terms drop below
/// machine precision relative to the running sum.
pub fn expm_action<T, F>(apply: F, x: &Matrix<T>, t: T, norm_bound: T) -> Matrix<T>
where
    T: Real,
    F: Fn(&Matrix<T>) -> Matrix<T>,
{
    let tn = (t * norm_bound).abs();
    let substeps = if tn.is_finite() {
        tn.ceil().to_usize().unwrap_or(1).max(1)
    } else {
        1
    };
    let h = t / T::from_usize(substeps).unwrap();
    let tol = T::epsilon();
    let mut y = x.clone();
    for _ in 0..substeps {
        let mut term = y.clone();
        let mut sum = y.clone();
        let mut small_run = 0;
        for k in 1..=60usize {
            term = apply(&term).scale_re(h / T::from_usize(k).unwrap());
            sum += &term;
            let tnorm = term.frobenius_norm();
            if tnorm <= tol * sum.frobenius_norm() {
                small_run += 1;
                if small_run >= 2 {
                    break;
                }
            } else {
                small_run = 0;
            }
        }
        y = sum;
    }
    y
}
