use rand::Rng;
use rand_distr::StandardNormal;

use super::basis::CodeBasis;
use crate::error::{Error, Result};
use crate::lindblad::Channel;
use crate::linalg::{sqrt_on_support, Operator};
use crate::scalar::{c, Real, C};

/// Allowed deviation of `Tr Φ(|i⟩⟨k|)` from `δ_ik` on the code space.
const TRACE_TOL: f64 = 1e-6;

/// `F_e(Φ) = (1/d²) Σ_{i,k} Tr[|k⟩_L⟨i| Φ(|i⟩_L⟨k|)]`.
///
/// `Φ` must preserve the trace of operators supported on the code space.
pub fn entanglement_fidelity<T: Real>(phi: &dyn Channel<T>, code: &CodeBasis<T>) -> Result<T> {
    let d = code.dim();
    let tol = T::lit(TRACE_TOL).max(T::epsilon().sqrt());
    let mut acc = C::<T>::new(T::zero(), T::zero());
    for i in 0..d {
        for k in 0..d {
            let out = phi.apply(&code.transition(i, k))?;
            let tr = out.trace();
            let expect = if i == k { T::one() } else { T::zero() };
            if (tr - c(expect, T::zero())).norm() > tol {
                return Err(Error::InvalidArgument(format!(
                    "map is not trace preserving on the code space (Tr Φ(|{i}⟩⟨{k}|) = {:.3e})",
                    tr.re
                )));
            }
            let v = out.matvec(code.ket(k));
            acc = acc + code.ket(i).iter().zip(&v).map(|(a, b)| a.conj() * b).sum::<C<T>>();
        }
    }
    Ok(acc.re / T::from_usize(d * d).unwrap())
}

/// Noise images `N(|i⟩_L⟨k|)` for `i ≤ k`, in row-major upper-triangle order.
pub(crate) fn noise_images<T: Real>(noise: &dyn Channel<T>, code: &CodeBasis<T>) -> Result<Vec<Operator<T>>> {
    let d = code.dim();
    let mut out = Vec::with_capacity(d * (d + 1) / 2);
    for i in 0..d {
        for k in i..d {
            out.push(noise.apply(&code.transition(i, k))?);
        }
    }
    Ok(out)
}

/// Closed form of `F_e(R∘N)` for the Petz map `R` of `N` with reference
/// `π_d^𝒞`, from the images `N(|i⟩⟨k|)` with `i ≤ k`.
pub(crate) fn petz_fidelity_from_images<T: Real>(images: &[Operator<T>], d: usize, eps: T) -> Result<T> {
    let idx = |i: usize, k: usize| i * d - i * (i + 1) / 2 + k;
    let dim = images[0].rows();
    let mut image_pi = Operator::zeros(dim, dim);
    for i in 0..d {
        image_pi += &images[idx(i, i)];
    }
    let image_pi = image_pi.scale_re(T::one() / T::from_usize(d).unwrap()).hermitian_part();
    let s = sqrt_on_support(&image_pi, eps)?.inv_root;
    let mut acc = T::zero();
    for i in 0..d {
        for k in i..d {
            // N(E_ki) = N(E_ik)†, and the (k, i) term equals the (i, k) one
            let m = &images[idx(i, k)];
            let sms = &(&s * m) * &s;
            let t = m.adjoint().trace_product(&sms).re;
            acc = acc + if i == k { t } else { t + t };
        }
    }
    let d3 = T::from_usize(d * d * d).unwrap();
    Ok(acc / d3)
}

/// `F_e(R∘N)` for the Petz recovery `R` of `N` with reference `π_d^𝒞`:
/// `(1/d³) Σ_{i,k} Tr[N(|k⟩⟨i|) N(π)^{−1/2} N(|i⟩⟨k|) N(π)^{−1/2}]`.
pub fn petz_entanglement_fidelity<T: Real>(noise: &dyn Channel<T>, code: &CodeBasis<T>, eps: T) -> Result<T> {
    petz_fidelity_from_images(&noise_images(noise, code)?, code.dim(), eps)
}

/// `F_avg = (d F_e + 1)/(d + 1)`.
pub fn average_fidelity<T: Real>(fe: T, d: usize) -> T {
    let d = T::from_usize(d).unwrap();
    (d * fe + T::one()) / (d + T::one())
}

/// Monte-Carlo mean and standard error of `⟨ψ|Φ(|ψ⟩⟨ψ|)|ψ⟩` over
/// Haar-random logical states.
pub fn haar_average_fidelity<T: Real, R: Rng + ?Sized>(
    phi: &dyn Channel<T>,
    code: &CodeBasis<T>,
    samples: usize,
    rng: &mut R,
) -> Result<(T, T)> {
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let v = code.isometry();
    let d = code.dim();
    let mut sum = 0.0f64;
    let mut sum_sq = 0.0f64;
    for _ in 0..samples {
        let mut a: Vec<C<T>> = (0..d)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                c(T::lit(re), T::lit(im))
            })
            .collect();
        let norm = a.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        for z in &mut a {
            *z = *z / norm;
        }
        let psi = v.matvec(&a);
        let out = phi.apply(&Operator::projector(&psi))?;
        let w = out.matvec(&psi);
        let f = psi.iter().zip(&w).map(|(x, y)| x.conj() * y).sum::<C<T>>().re.as_f64();
        sum += f;
        sum_sq += f * f;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0);
    Ok((T::lit(mean), T::lit((var / n).sqrt())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::Superoperator;

    #[test]
    fn identity_has_unit_fidelity() {
        let code = CodeBasis::<f64>::computational(2, 2).unwrap();
        let fe = entanglement_fidelity(&Superoperator::identity(4), &code).unwrap();
        assert!((fe - 1.0).abs() < 1e-15);
        assert_eq!(average_fidelity(1.0, 2), 1.0);
        assert_eq!(average_fidelity(0.25, 2), 0.5);
    }

    #[test]
    fn non_trace_preserving_map_is_rejected() {
        let code = CodeBasis::<f64>::computational(1, 2).unwrap();
        let half = Superoperator::identity(2).scale_re(0.5);
        assert!(entanglement_fidelity(&half, &code).is_err());
    }
}
