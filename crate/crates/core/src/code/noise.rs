use crate::error::{Error, Result};
use crate::lindblad::{Channel, LindbladFlow, Lindbladian, Superoperator};
use crate::linalg::{embed, sigma_minus, sigma_plus, sigma_z, Operator};
use crate::scalar::Real;

/// Largest register the noise library builds.
pub const MAX_NOISE_QUBITS: usize = 6;

/// Above this qubit count the δt channel is assembled column by column from
/// the flow instead of a dense superoperator exponential.
const DENSE_EXP_QUBITS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseKind {
    /// `g₁σ₋` on every qubit.
    AmplitudeDamping,
    /// `g₁σ_z` on every qubit.
    Dephasing,
    /// `g₂σ₋σ₊` hopping on nearest neighbours.
    Correlated,
    /// Amplitude damping plus correlated hopping.
    Composite,
    /// Dephasing plus correlated hopping.
    CompositeDephasing,
}

impl NoiseKind {
    fn single<T: Real>(self) -> Option<Operator<T>> {
        match self {
            NoiseKind::AmplitudeDamping | NoiseKind::Composite => Some(sigma_minus()),
            NoiseKind::Dephasing | NoiseKind::CompositeDephasing => Some(sigma_z()),
            NoiseKind::Correlated => None,
        }
    }

    fn has_pairs(self) -> bool {
        matches!(
            self,
            NoiseKind::Correlated | NoiseKind::Composite | NoiseKind::CompositeDephasing
        )
    }
}

/// Independent and nearest-neighbour noise on a chain of `N` qubits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel<T> {
    pub kind: NoiseKind,
    pub g1: T,
    pub g2: T,
    pub n_physical: usize,
    /// Include both `σ₋σ₊` and `σ₊σ₋` per neighbouring pair; otherwise only
    /// `σ₋^{(n)}σ₊^{(n+1)}`.
    pub both_orderings: bool,
}

impl<T: Real> NoiseModel<T> {
    pub fn new(kind: NoiseKind, g1: T, g2: T, n_physical: usize) -> Result<Self> {
        if n_physical == 0 || n_physical > MAX_NOISE_QUBITS {
            return Err(Error::InvalidArgument(format!(
                "noise model supports 1..={MAX_NOISE_QUBITS} qubits, got {n_physical}"
            )));
        }
        if !(g1 >= T::zero()) || !(g2 >= T::zero()) || !g1.is_finite() || !g2.is_finite() {
            return Err(Error::InvalidArgument(format!("noise amplitudes must be finite and ≥ 0 (g1={g1}, g2={g2})")));
        }
        Ok(Self {
            kind,
            g1,
            g2,
            n_physical,
            both_orderings: true,
        })
    }

    pub fn composite(g1: T, g2: T, n_physical: usize) -> Result<Self> {
        Self::new(NoiseKind::Composite, g1, g2, n_physical)
    }

    pub fn with_both_orderings(mut self, both: bool) -> Self {
        self.both_orderings = both;
        self
    }

    pub fn dim(&self) -> usize {
        1 << self.n_physical
    }

    /// Jump operators; terms with zero amplitude are left out.
    pub fn jumps(&self) -> Result<Vec<Operator<T>>> {
        let n = self.n_physical;
        let dims = vec![2; n];
        let mut out = Vec::new();
        if let Some(op) = self.kind.single::<T>() {
            if self.g1 > T::zero() {
                let op = op.scale_re(self.g1);
                for q in 0..n {
                    out.push(embed(&op, q, &dims)?);
                }
            }
        }
        if self.kind.has_pairs() && self.g2 > T::zero() {
            let (minus, plus) = (sigma_minus::<T>(), sigma_plus::<T>());
            for q in 0..n.saturating_sub(1) {
                let mp = &embed(&minus, q, &dims)? * &embed(&plus, q + 1, &dims)?;
                out.push(mp.scale_re(self.g2));
                if self.both_orderings {
                    let pm = &embed(&plus, q, &dims)? * &embed(&minus, q + 1, &dims)?;
                    out.push(pm.scale_re(self.g2));
                }
            }
        }
        Ok(out)
    }

    /// Pure dissipator, `H = 0`.
    pub fn lindbladian(&self) -> Result<Lindbladian<T>> {
        Lindbladian::constant(Operator::zeros(self.dim(), self.dim()), self.jumps()?)
    }

    /// `N_δt = exp(δt·𝒟)` as a dense superoperator.
    pub fn channel(&self, dt: T) -> Result<Superoperator<T>> {
        if !(dt >= T::zero()) {
            return Err(Error::InvalidArgument(format!("duration must be ≥ 0, got {dt}")));
        }
        let l = self.lindbladian()?;
        if dt == T::zero() || l.jumps().is_empty() {
            return Ok(Superoperator::identity(self.dim()));
        }
        if self.n_physical <= DENSE_EXP_QUBITS {
            Ok(l.to_superoperator(T::zero()).exp(dt))
        } else {
            LindbladFlow::new(l, T::zero(), dt, 1).to_superoperator()
        }
    }
}

/// Lindbladian of `model`.
pub fn build_noise<T: Real>(model: &NoiseModel<T>) -> Result<Lindbladian<T>> {
    model.lindbladian()
}
