use super::generator::Lindbladian;
use super::propagate::{evolve, evolve_adjoint, Method};
use super::superop::Superoperator;
use crate::error::Result;
use crate::linalg::Operator;
use crate::scalar::{cr, Real};

/// A linear map on `d × d` operators known through its action and the action
/// of its Hilbert–Schmidt adjoint.
///
/// Large maps never need to materialize their `d² × d²` matrix.
pub trait Channel<T: Real>: Send + Sync {
    fn dim(&self) -> usize;

    fn apply(&self, x: &Operator<T>) -> Result<Operator<T>>;

    fn apply_adjoint(&self, x: &Operator<T>) -> Result<Operator<T>>;

    /// Dense matrix, assembled column by column from basis elements.
    fn to_superoperator(&self) -> Result<Superoperator<T>> {
        let d = self.dim();
        let mut cols = Vec::with_capacity(d * d);
        for j in 0..d {
            for i in 0..d {
                let mut e = Operator::zeros(d, d);
                e[(i, j)] = cr(T::one());
                cols.push(self.apply(&e)?.vectorize());
            }
        }
        let m = crate::linalg::Matrix::from_fn(d * d, d * d, |r, c| cols[c][r]);
        Superoperator::from_matrix(d, m)
    }
}

impl<T: Real> Channel<T> for Superoperator<T> {
    fn dim(&self) -> usize {
        Superoperator::dim(self)
    }

    fn apply(&self, x: &Operator<T>) -> Result<Operator<T>> {
        Ok(Superoperator::apply(self, x))
    }

    fn apply_adjoint(&self, x: &Operator<T>) -> Result<Operator<T>> {
        Ok(Operator::unvectorize(&self.matrix().adjoint_matvec(&x.vectorize()), self.dim()))
    }

    fn to_superoperator(&self) -> Result<Superoperator<T>> {
        Ok(self.clone())
    }
}

/// The time-ordered flow of a Lindbladian over `[t0, t1]`.
#[derive(Clone, Debug)]
pub struct LindbladFlow<T> {
    pub lindbladian: Lindbladian<T>,
    pub t0: T,
    pub t1: T,
    pub steps: usize,
}

impl<T: Real> LindbladFlow<T> {
    pub fn new(lindbladian: Lindbladian<T>, t0: T, t1: T, steps: usize) -> Self {
        Self {
            lindbladian,
            t0,
            t1,
            steps,
        }
    }
}

impl<T: Real> Channel<T> for LindbladFlow<T> {
    fn dim(&self) -> usize {
        self.lindbladian.dim()
    }

    fn apply(&self, x: &Operator<T>) -> Result<Operator<T>> {
        evolve(&self.lindbladian, x, self.t0, self.t1, self.steps, Method::Action)
    }

    fn apply_adjoint(&self, x: &Operator<T>) -> Result<Operator<T>> {
        evolve_adjoint(&self.lindbladian, x, self.t0, self.t1, self.steps)
    }
}

/// `second ∘ first`.
pub struct Compose<'a, T> {
    pub first: &'a dyn Channel<T>,
    pub second: &'a dyn Channel<T>,
}

impl<T: Real> Channel<T> for Compose<'_, T> {
    fn dim(&self) -> usize {
        self.first.dim()
    }

    fn apply(&self, x: &Operator<T>) -> Result<Operator<T>> {
        self.second.apply(&self.first.apply(x)?)
    }

    fn apply_adjoint(&self, x: &Operator<T>) -> Result<Operator<T>> {
        self.first.apply_adjoint(&self.second.apply_adjoint(x)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::propagate::channel_from;
    use crate::linalg::{sigma_minus, sigma_x, sigma_z};
    use crate::scalar::c;

    fn generic() -> Lindbladian<f64> {
        Lindbladian::constant(
            &sigma_x::<f64>().scale_re(0.3) + &sigma_z(),
            vec![sigma_minus::<f64>().scale_re(0.4), sigma_z::<f64>().scale_re(0.2)],
        )
        .unwrap()
    }

    #[test]
    fn flow_matches_dense_channel() {
        let flow = LindbladFlow::new(generic(), 0.0, 0.7, 7);
        let dense = channel_from(&generic(), 0.0, 0.7, 7).unwrap();
        assert!(flow.to_superoperator().unwrap().max_abs_diff(&dense) < 1e-12);
    }

    #[test]
    fn flow_adjoint_is_hs_dual() {
        let flow = LindbladFlow::new(generic(), 0.0, 0.5, 3);
        let x = Operator::<f64>::from_fn(2, 2, |i, j| c(0.3 * i as f64 - 0.1, 0.7 * j as f64));
        let y = Operator::<f64>::from_fn(2, 2, |i, j| c(1.0 + j as f64, -0.4 * i as f64));
        let lhs = y.hs_inner(&flow.apply(&x).unwrap());
        let rhs = flow.apply_adjoint(&y).unwrap().hs_inner(&x);
        assert!((lhs - rhs).norm() < 1e-13);
    }

    #[test]
    fn compose_orders_maps() {
        let a = Superoperator::<f64>::sandwich(&sigma_x(), &sigma_x());
        let b = Superoperator::<f64>::sandwich(&sigma_minus(), &sigma_minus().adjoint());
        let comp = Compose {
            first: &a,
            second: &b,
        };
        assert!(comp.to_superoperator().unwrap().max_abs_diff(&b.compose(&a)) < 1e-15);
    }
}
