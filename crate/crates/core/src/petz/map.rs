use crate::error::{Error, Result};
use crate::lindblad::{Channel, Superoperator};
use crate::linalg::{sqrt_on_support, Operator};
use crate::scalar::Real;

/// Petz recovery channel `R = J_σ^{1/2} ∘ N† ∘ J_{N(σ)}^{−1/2}` as a dense
/// superoperator, where `J_A^p(X) = A^p X A^p`.
///
/// Inverse roots are taken on the support of `N(σ)` with relative cutoff
/// `eps`. `N` is not required to be completely positive.
pub fn petz_channel<T: Real>(n: &Superoperator<T>, sigma: &Operator<T>, eps: T) -> Result<Superoperator<T>> {
    if sigma.rows() != n.dim() {
        return Err(Error::DimensionMismatch {
            context: "petz_channel",
            expected: n.dim(),
            found: sigma.rows(),
        });
    }
    let s = sqrt_on_support(sigma, eps)?;
    let image = n.apply(sigma).hermitian_part();
    let ns = sqrt_on_support(&image, eps)?;
    let pre = Superoperator::sandwich(&ns.inv_root, &ns.inv_root);
    let post = Superoperator::sandwich(&s.root, &s.root);
    Ok(post.compose(&n.adjoint().compose(&pre)))
}

/// Operator-level Petz map for channels too large to hold as matrices.
pub struct PetzMap<'a, T> {
    noise: &'a dyn Channel<T>,
    root: Operator<T>,
    inv_root_image: Operator<T>,
}

impl<'a, T: Real> PetzMap<'a, T> {
    pub fn new(noise: &'a dyn Channel<T>, sigma: &Operator<T>, eps: T) -> Result<Self> {
        let root = sqrt_on_support(sigma, eps)?.root;
        let image = noise.apply(sigma)?.hermitian_part();
        let inv_root_image = sqrt_on_support(&image, eps)?.inv_root;
        Ok(Self {
            noise,
            root,
            inv_root_image,
        })
    }

    /// `N(σ)^{−1/2}` restricted to its support.
    pub fn inv_root_image(&self) -> &Operator<T> {
        &self.inv_root_image
    }
}

impl<T: Real> Channel<T> for PetzMap<'_, T> {
    fn dim(&self) -> usize {
        self.noise.dim()
    }

    fn apply(&self, x: &Operator<T>) -> Result<Operator<T>> {
        let inner = &(&self.inv_root_image * x) * &self.inv_root_image;
        let back = self.noise.apply_adjoint(&inner)?;
        Ok(&(&self.root * &back) * &self.root)
    }

    fn apply_adjoint(&self, x: &Operator<T>) -> Result<Operator<T>> {
        let inner = &(&self.root * x) * &self.root;
        let fwd = self.noise.apply(&inner)?;
        Ok(&(&self.inv_root_image * &fwd) * &self.inv_root_image)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{sigma_x, sigma_y, unitary_exp, DensityMatrix};
    use crate::scalar::c;

    #[test]
    fn identity_channel_recovers_identity() {
        let sigma = Operator::<f64>::from_diagonal(&[0.7, 0.3]);
        let r = petz_channel(&Superoperator::identity(2), &sigma, 1e-10).unwrap();
        assert!(r.max_abs_diff(&Superoperator::identity(2)) < 1e-14);
    }

    #[test]
    fn unitary_channel_is_undone_by_its_inverse() {
        let u = unitary_exp(&(&sigma_x::<f64>().scale_re(0.4) + &sigma_y::<f64>().scale_re(0.9)), 1.0).unwrap();
        let n = Superoperator::sandwich(&u, &u.adjoint());
        let sigma = Operator::<f64>::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => c(0.6, 0.0),
            (1, 1) => c(0.4, 0.0),
            (0, 1) => c(0.1, 0.2),
            _ => c(0.1, -0.2),
        });
        let r = petz_channel(&n, &sigma, 1e-10).unwrap();
        let expect = Superoperator::sandwich(&u.adjoint(), &u);
        assert!(r.max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn operator_level_map_matches_dense() {
        let u = unitary_exp(&sigma_x::<f64>(), 0.3).unwrap();
        let k0 = u.scale_re(0.8f64.sqrt());
        let k1 = Operator::<f64>::from_diagonal(&[0.2f64.sqrt(), 0.0]);
        let k2 = Operator::<f64>::from_fn(2, 2, |i, j| if (i, j) == (0, 1) { c(0.2f64.sqrt(), 0.0) } else { c(0.0, 0.0) });
        let n = Superoperator::from_kraus(&[k0, k1, k2]).unwrap();
        let sigma = DensityMatrix::<f64>::maximally_mixed(2);
        let dense = petz_channel(&n, &sigma, 1e-10).unwrap();
        let lazy = PetzMap::new(&n, &sigma, 1e-10).unwrap().to_superoperator().unwrap();
        assert!(dense.max_abs_diff(&lazy) < 1e-14);
    }
}
