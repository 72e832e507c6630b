use num_complex::Complex;

use super::schedule::{Grid, Schedule};
use super::superop::Superoperator;
use crate::error::{Error, Result};
use crate::linalg::{tensor, Operator};
use crate::scalar::{c, Real};

/// Generator of Markovian dynamics
/// `ℒ(ρ) = −i[H(t), ρ] + Σ_k (L_k ρ L_k† − ½{L_k†L_k, ρ})`.
#[derive(Clone, Debug)]
pub struct Lindbladian<T> {
    dim: usize,
    hamiltonian: Schedule<T>,
    jumps: Vec<Schedule<T>>,
}

impl<T: Real> Lindbladian<T> {
    pub fn new(hamiltonian: Schedule<T>, jumps: Vec<Schedule<T>>) -> Result<Self> {
        let dim = hamiltonian.dim();
        for j in &jumps {
            if j.dim() != dim {
                return Err(Error::DimensionMismatch {
                    context: "Lindbladian jump",
                    expected: dim,
                    found: j.dim(),
                });
            }
        }
        for h in hamiltonian.samples() {
            let scale = h.max_norm().max(T::one());
            let dev = h.hermitian_deviation();
            if dev > T::hermitian_tol() * scale {
                return Err(Error::NotHermitian {
                    deviation: dev.as_f64(),
                });
            }
        }
        Ok(Self {
            dim,
            hamiltonian,
            jumps,
        })
    }

    /// Time-independent generator.
    pub fn constant(hamiltonian: Operator<T>, jumps: Vec<Operator<T>>) -> Result<Self> {
        Self::new(
            Schedule::Constant(hamiltonian),
            jumps.into_iter().map(Schedule::Constant).collect(),
        )
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            hamiltonian: Schedule::Constant(Operator::zeros(dim, dim)),
            jumps: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hamiltonian(&self) -> &Schedule<T> {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[Schedule<T>] {
        &self.jumps
    }

    pub fn is_constant(&self) -> bool {
        self.hamiltonian.is_constant() && self.jumps.iter().all(Schedule::is_constant)
    }

    /// The sampling grid shared by the time-dependent parts, if any. Errors
    /// when two sampled parts disagree.
    pub fn grid(&self) -> Result<Option<Grid<T>>> {
        let mut grid: Option<Grid<T>> = None;
        for g in std::iter::once(&self.hamiltonian)
            .chain(&self.jumps)
            .filter_map(Schedule::grid)
        {
            match grid {
                None => grid = Some(g),
                Some(prev) if !prev.matches(&g) => {
                    return Err(Error::InvalidArgument("schedules sampled on different grids".into()))
                }
                _ => {}
            }
        }
        Ok(grid)
    }

    /// Same generator without its jump operators.
    pub fn without_jumps(&self) -> Self {
        Self {
            dim: self.dim,
            hamiltonian: self.hamiltonian.clone(),
            jumps: Vec::new(),
        }
    }

    /// Same jumps with the Hamiltonian removed (the pure dissipator).
    pub fn dissipator_only(&self) -> Self {
        Self {
            dim: self.dim,
            hamiltonian: Schedule::Constant(Operator::zeros(self.dim, self.dim)),
            jumps: self.jumps.clone(),
        }
    }

    /// `−ℒ` restricted to its Hamiltonian part: `H → −H`, no jumps.
    pub fn time_reversed_unitary(&self) -> Self {
        Self {
            dim: self.dim,
            hamiltonian: self.hamiltonian.map(|h| -h),
            jumps: Vec::new(),
        }
    }

    /// Appends jump operators.
    pub fn with_extra_jumps(mut self, extra: impl IntoIterator<Item = Schedule<T>>) -> Result<Self> {
        for j in extra {
            if j.dim() != self.dim {
                return Err(Error::DimensionMismatch {
                    context: "Lindbladian jump",
                    expected: self.dim,
                    found: j.dim(),
                });
            }
            self.jumps.push(j);
        }
        Ok(self)
    }

    /// Generator frozen at time `t`.
    pub fn at(&self, t: T) -> Generator<T> {
        Generator::new(self.hamiltonian.at(t), self.jumps.iter().map(|j| j.at(t)).collect())
    }

    /// `ℒ_t(ρ)`.
    pub fn apply_generator(&self, rho: &Operator<T>, t: T) -> Result<Operator<T>> {
        self.check_dim(rho)?;
        Ok(self.at(t).apply(rho))
    }

    /// `2 Tr[𝒟(ρ) ρ]`, the rate of change of the purity.
    pub fn purity_rate(&self, rho: &Operator<T>, t: T) -> Result<T> {
        self.check_dim(rho)?;
        Ok(self.at(t).purity_rate(rho))
    }

    /// Matrix of `ℒ_t` under column stacking.
    pub fn to_superoperator(&self, t: T) -> Superoperator<T> {
        self.at(t).to_superoperator()
    }

    fn check_dim(&self, rho: &Operator<T>) -> Result<()> {
        if rho.rows() != self.dim || !rho.is_square() {
            return Err(Error::DimensionMismatch {
                context: "Lindbladian",
                expected: self.dim,
                found: rho.rows(),
            });
        }
        Ok(())
    }
}

/// A Lindbladian frozen at one instant, with `K = H − (i/2)Σ L†L` cached.
#[derive(Clone, Debug)]
pub struct Generator<T> {
    pub hamiltonian: Operator<T>,
    pub jumps: Vec<Operator<T>>,
    jump_adjoints: Vec<Operator<T>>,
    effective: Operator<T>,
    effective_adj: Operator<T>,
    norm_bound: T,
}

impl<T: Real> Generator<T> {
    pub fn new(hamiltonian: Operator<T>, jumps: Vec<Operator<T>>) -> Self {
        let d = hamiltonian.rows();
        let mut decay = Operator::zeros(d, d);
        let jump_adjoints: Vec<Operator<T>> = jumps.iter().map(|l| l.adjoint()).collect();
        let mut norm_bound = hamiltonian.frobenius_norm() * T::lit(2.0);
        for (l, ld) in jumps.iter().zip(&jump_adjoints) {
            decay += &(ld * l);
            let n = l.frobenius_norm();
            norm_bound = norm_bound + n * n * T::lit(2.0);
        }
        let effective = &hamiltonian - &decay.scale(c(T::zero(), T::lit(0.5)));
        let effective_adj = effective.adjoint();
        Self {
            hamiltonian,
            jumps,
            jump_adjoints,
            effective,
            effective_adj,
            norm_bound,
        }
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.rows()
    }

    /// Upper bound on the generator norm induced by the Frobenius norm.
    pub fn norm_bound(&self) -> T {
        self.norm_bound
    }

    /// `K = H − (i/2)Σ L†L`.
    pub fn effective_hamiltonian(&self) -> &Operator<T> {
        &self.effective
    }

    pub fn apply(&self, rho: &Operator<T>) -> Operator<T> {
        let mi = Complex::new(T::zero(), -T::one());
        // −i(Kρ − ρK†)
        let mut out = (&(&self.effective * rho) - &(rho * &self.effective_adj)).scale(mi);
        for (l, ld) in self.jumps.iter().zip(&self.jump_adjoints) {
            out += &(&(l * rho) * ld);
        }
        out
    }

    /// Hilbert–Schmidt adjoint `ℒ†(X) = i(K†X − XK) + Σ L†XL`.
    pub fn apply_adjoint(&self, x: &Operator<T>) -> Operator<T> {
        let i = Complex::new(T::zero(), T::one());
        let mut out = (&(&self.effective_adj * x) - &(x * &self.effective)).scale(i);
        for (l, ld) in self.jumps.iter().zip(&self.jump_adjoints) {
            out += &(&(ld * x) * l);
        }
        out
    }

    /// `𝒟(ρ) = Σ L ρ L† − ½{L†L, ρ}`.
    pub fn dissipator(&self, rho: &Operator<T>) -> Operator<T> {
        let d = self.dim();
        let mut out = Operator::zeros(d, d);
        let half = T::lit(0.5);
        for (l, ld) in self.jumps.iter().zip(&self.jump_adjoints) {
            let ldl = ld * l;
            out += &(&(l * rho) * ld);
            out -= &ldl.anticommutator(rho).scale_re(half);
        }
        out
    }

    pub fn purity_rate(&self, rho: &Operator<T>) -> T {
        self.dissipator(rho).trace_product(rho).re * T::lit(2.0)
    }

    pub fn to_superoperator(&self) -> Superoperator<T> {
        let d = self.dim();
        let id = Operator::identity(d);
        let mi = Complex::new(T::zero(), -T::one());
        // −i(I ⊗ K − K̄ ⊗ I) covers the commutator and the anticommutator terms
        let mut m = (&tensor(&id, &self.effective) - &tensor(&self.effective_adj.transpose(), &id)).scale(mi);
        for l in &self.jumps {
            m += &tensor(&l.conj(), l);
        }
        Superoperator::from_matrix(d, m).expect("square by construction")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{sigma_minus, sigma_x, sigma_z, DensityMatrix};
    use crate::scalar::C;
    use num_traits::Zero;

    #[test]
    fn pure_rotation_without_jumps() {
        let l = Lindbladian::constant(sigma_z::<f64>(), vec![]).unwrap();
        let s = 0.5f64.sqrt();
        let plus = DensityMatrix::pure(&[c(s, 0.0), c(s, 0.0)]).unwrap();
        let out = l.apply_generator(&plus, 0.0).unwrap();
        let expect = sigma_z::<f64>().commutator(&plus).scale(c(0.0, -1.0));
        assert!(out.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn decay_of_excited_state() {
        let l = Lindbladian::constant(Operator::zeros(2, 2), vec![sigma_minus::<f64>()]).unwrap();
        let out = l.apply_generator(&DensityMatrix::basis(2, 1), 0.0).unwrap();
        let expect = &DensityMatrix::<f64>::basis(2, 0).into_operator() - DensityMatrix::basis(2, 1).as_operator();
        assert!(out.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn zero_lindbladian_superoperator() {
        let s = Lindbladian::<f64>::zero(3).to_superoperator(0.0);
        assert!(s.matrix().max_norm() == 0.0);
    }

    #[test]
    fn sigma_z_superoperator_identity() {
        let l = Lindbladian::constant(sigma_z::<f64>(), vec![]).unwrap();
        let id = Operator::identity(2);
        let expect = (&tensor(&id, &sigma_z()) - &tensor(&sigma_z::<f64>().transpose(), &id)).scale(c(0.0, -1.0));
        assert!(l.to_superoperator(0.0).matrix().max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let l = Lindbladian::constant(sigma_x::<f64>(), vec![]).unwrap();
        assert!(l.apply_generator(&Operator::identity(3), 0.0).is_err());
        assert!(Lindbladian::constant(sigma_x::<f64>(), vec![Operator::identity(3)]).is_err());
    }

    #[test]
    fn non_hermitian_hamiltonian_rejected() {
        assert!(matches!(
            Lindbladian::constant(sigma_minus::<f64>(), vec![]),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn jump_free_purity_rate_is_zero() {
        let l = Lindbladian::constant(sigma_x::<f64>(), vec![]).unwrap();
        let rho = Operator::from_fn(2, 2, |i, j| if i == j { c(0.5, 0.0) } else { c(0.1, 0.2) });
        assert_eq!(l.purity_rate(&rho, 0.0).unwrap(), 0.0);
        let _ = C::<f64>::zero();
    }
}
