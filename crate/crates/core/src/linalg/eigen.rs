//! Hermitian eigendecomposition (cyclic complex Jacobi) and the spectral
//! functions built on it.

use num_traits::Zero;

use super::matrix::{Matrix, Operator};
use crate::error::{Error, Result};
use crate::scalar::{c, cr, Real, C};

/// Spectrum of a Hermitian operator: `A = V diag(values) V†`.
#[derive(Clone, Debug)]
pub struct EigenSystem<T> {
    /// Eigenvalues in ascending order.
    pub values: Vec<T>,
    /// Unitary whose columns are the matching eigenvectors.
    pub vectors: Operator<T>,
}

impl<T: Real> EigenSystem<T> {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `Σ f(λ) |v⟩⟨v|`.
    pub fn apply_fn(&self, f: impl Fn(T) -> T) -> Operator<T> {
        let n = self.dim();
        let mut out = Operator::zeros(n, n);
        for (k, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            if w == T::zero() {
                continue;
            }
            for i in 0..n {
                let vik = self.vectors[(i, k)] * w;
                for j in 0..n {
                    out[(i, j)] = out[(i, j)] + vik * self.vectors[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> Operator<T> {
        self.apply_fn(|x| x)
    }

    /// `V† A V`: an operator expressed in the eigenbasis.
    pub fn to_eigenbasis(&self, a: &Operator<T>) -> Operator<T> {
        self.vectors.adjoint().matmul(a).matmul(&self.vectors)
    }

    /// `V A V†`: inverse of [`EigenSystem::to_eigenbasis`].
    pub fn from_eigenbasis(&self, a: &Operator<T>) -> Operator<T> {
        self.vectors.matmul(a).matmul(&self.vectors.adjoint())
    }

    pub fn max_abs_value(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

/// Eigendecomposition of a Hermitian operator.
///
/// Inputs within [`Real::hermitian_tol`] of Hermitian (max-norm, relative to
/// `max(1, ‖A‖_max)`) are symmetrized first; anything further away is
/// rejected.
pub fn herm_eig<T: Real>(a: &Operator<T>) -> Result<EigenSystem<T>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            context: "herm_eig",
            expected: a.rows(),
            found: a.cols(),
        });
    }
    let scale = a.max_norm().max(T::one());
    let dev = a.hermitian_deviation();
    if !(dev <= T::hermitian_tol() * scale) {
        return Err(Error::NotHermitian {
            deviation: dev.as_f64(),
        });
    }
    Ok(jacobi(a.hermitian_part()))
}

fn jacobi<T: Real>(mut a: Operator<T>) -> EigenSystem<T> {
    let n = a.rows();
    let mut v = Operator::identity(n);
    if n == 1 {
        return EigenSystem {
            values: vec![a[(0, 0)].re],
            vectors: v,
        };
    }
    let total: T = a.frobenius_norm();
    if total == T::zero() {
        return EigenSystem {
            values: vec![T::zero(); n],
            vectors: v,
        };
    }
    let tiny = T::epsilon() * T::epsilon() * total * total;
    for _sweep in 0..64 {
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off = off + a[(p, q)].norm_sqr();
            }
        }
        if off <= tiny {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag == T::zero() {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // Skip rotations that cannot change the diagonal in working precision.
                if mag <= T::epsilon() * T::epsilon() * (app.abs() + aqq.abs()) {
                    a[(p, q)] = C::zero();
                    a[(q, p)] = C::zero();
                    continue;
                }
                let phase = apq / mag; // e^{iφ}
                let theta = (aqq - app) / (mag + mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let cs = T::one() / (t * t + T::one()).sqrt();
                let sn = t * cs;
                // G = [[c, s], [-s e^{-iφ}, c e^{-iφ}]] on the (p, q) plane; A <- G† A G.
                let pc = phase.conj();
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * cs - akq * pc * sn;
                    a[(k, q)] = akp * sn + akq * pc * cs;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * cs - aqk * phase * sn;
                    a[(q, k)] = apk * sn + aqk * phase * cs;
                }
                a[(p, q)] = C::zero();
                a[(q, p)] = C::zero();
                a[(p, p)] = cr(a[(p, p)].re);
                a[(q, q)] = cr(a[(q, q)].re);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * cs - vkq * pc * sn;
                    v[(k, q)] = vkp * sn + vkq * pc * cs;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<T> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = Matrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    EigenSystem { values, vectors }
}

/// Square root, inverse square root and support projector of a PSD operator.
#[derive(Clone, Debug)]
pub struct SupportRoots<T> {
    pub root: Operator<T>,
    pub inv_root: Operator<T>,
    pub projector: Operator<T>,
    pub eigen: EigenSystem<T>,
    /// Absolute eigenvalue threshold that was applied.
    pub cutoff: T,
}

impl<T: Real> SupportRoots<T> {
    pub fn rank(&self) -> usize {
        self.eigen.values.iter().filter(|&&l| l > self.cutoff).count()
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank() == self.eigen.dim()
    }
}

/// `ρ^{1/2}`, `ρ^{-1/2}` and `Π_ρ`, all restricted to the eigenvectors whose
/// eigenvalue exceeds `eps · λ_max`.
///
/// Eigenvalues at or below the cutoff (including small negative ones from
/// integrator drift) count as exactly zero and contribute nothing to any of
/// the three outputs.
pub fn sqrt_on_support<T: Real>(rho: &Operator<T>, eps: T) -> Result<SupportRoots<T>> {
    let eigen = herm_eig(rho)?;
    Ok(roots_from_eigen(eigen, eps))
}

pub(crate) fn roots_from_eigen<T: Real>(eigen: EigenSystem<T>, eps: T) -> SupportRoots<T> {
    let lmax = eigen.values.iter().fold(T::zero(), |m, &v| m.max(v));
    let cutoff = eps * lmax;
    let on = |l: T| l > cutoff && l > T::zero();
    let root = eigen.apply_fn(|l| if on(l) { l.sqrt() } else { T::zero() });
    let inv_root = eigen.apply_fn(|l| if on(l) { T::one() / l.sqrt() } else { T::zero() });
    let projector = eigen.apply_fn(|l| if on(l) { T::one() } else { T::zero() });
    SupportRoots {
        root,
        inv_root,
        projector,
        eigen,
        cutoff,
    }
}

/// Principal square root of a PSD operator, negative drift clamped to zero.
pub fn psd_sqrt<T: Real>(a: &Operator<T>) -> Result<Operator<T>> {
    let e = herm_eig(a)?;
    Ok(e.apply_fn(|l| l.max(T::zero()).sqrt()))
}

/// `exp(i·A)` for Hermitian `A`, via its spectrum.
pub fn unitary_exp<T: Real>(a: &Operator<T>, scale: T) -> Result<Operator<T>> {
    let e = herm_eig(a)?;
    let n = e.dim();
    let mut out = Operator::zeros(n, n);
    for (k, &lam) in e.values.iter().enumerate() {
        let (s, co) = (lam * scale).sin_cos();
        let ph = c(co, s);
        for i in 0..n {
            let vik = e.vectors[(i, k)] * ph;
            for j in 0..n {
                out[(i, j)] = out[(i, j)] + vik * e.vectors[(j, k)].conj();
            }
        }
    }
    Ok(out)
}

/// Smallest eigenvalue of a Hermitian operator.
pub fn min_eigenvalue<T: Real>(a: &Operator<T>) -> Result<T> {
    Ok(herm_eig(a)?.values.first().copied().unwrap_or_else(T::zero))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli::{sigma_x, sigma_z};

    #[test]
    fn identity_spectrum() {
        let e = herm_eig(&Operator::<f64>::identity(2)).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0]);
    }

    #[test]
    fn sigma_z_spectrum_and_vectors() {
        let e = herm_eig(&sigma_z::<f64>()).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-15);
        assert!((e.values[1] - 1.0).abs() < 1e-15);
        // eigenvalue -1 belongs to |1⟩
        assert!((e.vectors[(1, 0)].norm() - 1.0).abs() < 1e-15);
        assert!((e.vectors[(0, 1)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = sigma_x::<f64>();
        m[(0, 1)] = c(2.0, 0.0);
        assert!(matches!(herm_eig(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn tiny_asymmetry_is_symmetrized() {
        let mut m = sigma_x::<f64>();
        m[(0, 1)] = c(1.0 + 1e-11, 0.0);
        assert!(herm_eig(&m).is_ok());
    }

    #[test]
    fn maximally_mixed_roots() {
        let rho = Operator::<f64>::identity(2).scale_re(0.5);
        let r = sqrt_on_support(&rho, 1e-10).unwrap();
        let s = 0.5f64.sqrt();
        assert!(r.root.max_abs_diff(&Operator::identity(2).scale_re(s)) < 1e-14);
        assert!(r.inv_root.max_abs_diff(&Operator::identity(2).scale_re(1.0 / s)) < 1e-13);
        assert!(r.projector.max_abs_diff(&Operator::identity(2)) < 1e-14);
    }

    #[test]
    fn pure_state_roots_are_the_projector() {
        let mut rho = Operator::<f64>::zeros(2, 2);
        rho[(0, 0)] = c(1.0, 0.0);
        let r = sqrt_on_support(&rho, 1e-12).unwrap();
        assert!(r.root.max_abs_diff(&rho) < 1e-15);
        assert!(r.inv_root.max_abs_diff(&rho) < 1e-15);
        assert!(r.projector.max_abs_diff(&rho) < 1e-15);
        assert_eq!(r.rank(), 1);
    }

    #[test]
    fn unitary_exp_of_pauli() {
        let u = unitary_exp(&sigma_z::<f64>(), std::f64::consts::FRAC_PI_2).unwrap();
        assert!((u[(0, 0)] - c(0.0, 1.0)).norm() < 1e-15);
        assert!((u[(1, 1)] - c(0.0, -1.0)).norm() < 1e-15);
    }
}
