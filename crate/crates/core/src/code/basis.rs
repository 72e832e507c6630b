use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::{embed, sigma_x, sigma_y, sigma_z, Matrix, Operator, PauliString};
use crate::scalar::{cr, Real, C};

/// `d` orthonormal logical states `|i⟩_L` in the `2^N`-dimensional space of
/// `N` physical qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct CodeBasis<T> {
    n_physical: usize,
    vectors: Vec<Vec<C<T>>>,
}

fn gram_tol<T: Real>() -> T {
    T::lit(1e-10).max(T::epsilon() * T::lit(64.0))
}

impl<T: Real> CodeBasis<T> {
    /// Checks lengths and orthonormality (Gram matrix within `1e-10` of the
    /// identity for `f64`).
    pub fn new(n_physical: usize, vectors: Vec<Vec<C<T>>>) -> Result<Self> {
        if n_physical == 0 || n_physical > 16 {
            return Err(Error::InvalidArgument(format!("unsupported qubit count {n_physical}")));
        }
        let dim = 1usize << n_physical;
        if vectors.is_empty() || vectors.len() > dim {
            return Err(Error::InvalidArgument(format!(
                "code dimension {} not in 1..={dim}",
                vectors.len()
            )));
        }
        for v in &vectors {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    context: "CodeBasis::new",
                    expected: dim,
                    found: v.len(),
                });
            }
        }
        let tol = gram_tol::<T>();
        for (i, u) in vectors.iter().enumerate() {
            for (k, v) in vectors.iter().enumerate() {
                let g: C<T> = u.iter().zip(v).map(|(a, b)| a.conj() * b).sum();
                let expect = if i == k { C::one() } else { C::zero() };
                if (g - expect).norm() > tol {
                    return Err(Error::InvalidArgument(format!(
                        "code vectors not orthonormal: <{i}|{k}> = {:.3e}{:+.3e}i",
                        g.re, g.im
                    )));
                }
            }
        }
        Ok(Self { n_physical, vectors })
    }

    /// `|0…0⟩, |0…01⟩, …`: the first `d` computational basis states.
    pub fn computational(n_physical: usize, d: usize) -> Result<Self> {
        let dim = 1usize << n_physical;
        let vectors = (0..d)
            .map(|i| {
                let mut v = vec![C::zero(); dim];
                if i < dim {
                    v[i] = C::one();
                }
                v
            })
            .collect();
        Self::new(n_physical, vectors)
    }

    /// `{U|i⟩}` for the first `d` computational states.
    pub fn from_unitary(n_physical: usize, u: &Operator<T>, d: usize) -> Result<Self> {
        if u.rows() != 1 << n_physical || d > u.cols() {
            return Err(Error::DimensionMismatch {
                context: "CodeBasis::from_unitary",
                expected: 1 << n_physical,
                found: u.rows(),
            });
        }
        Self::new(n_physical, (0..d).map(|i| u.column(i)).collect())
    }

    /// Three-qubit bit-flip code `{|000⟩, |111⟩}`.
    pub fn bit_flip() -> Self {
        let mut zero = vec![C::zero(); 8];
        let mut one = vec![C::zero(); 8];
        zero[0] = C::one();
        one[7] = C::one();
        Self {
            n_physical: 3,
            vectors: vec![zero, one],
        }
    }

    /// The `[[5,1,3]]` code: `|0⟩_L` is the stabilizer projection of
    /// `|00000⟩` and `|1⟩_L = X^{⊗5}|0⟩_L`.
    pub fn five_qubit() -> Self {
        let mut proj = Operator::<T>::identity(32);
        let half = T::lit(0.5);
        for g in five_qubit_stabilizers() {
            let s = g.matrix::<T>();
            proj = &proj * &(&Operator::identity(32) + &s).scale_re(half);
        }
        let mut zero = proj.column(0);
        let norm = zero.iter().map(|a| a.norm_sqr()).sum::<T>().sqrt();
        for a in &mut zero {
            *a = *a / norm;
        }
        let one: Vec<C<T>> = (0..32).map(|k| zero[k ^ 31]).collect();
        Self {
            n_physical: 5,
            vectors: vec![zero, one],
        }
    }

    pub fn n_physical(&self) -> usize {
        self.n_physical
    }

    /// Logical dimension `d`.
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn physical_dim(&self) -> usize {
        1 << self.n_physical
    }

    pub fn vectors(&self) -> &[Vec<C<T>>] {
        &self.vectors
    }

    pub fn ket(&self, i: usize) -> &[C<T>] {
        &self.vectors[i]
    }

    /// Number of logical qubits when `d` is a power of two.
    pub fn n_logical(&self) -> Option<usize> {
        let d = self.dim();
        d.is_power_of_two().then(|| d.trailing_zeros() as usize)
    }

    /// Isometry `V = Σ_i |i⟩_L⟨i|`, shape `2^N × d`.
    pub fn isometry(&self) -> Matrix<T> {
        Matrix::from_fn(self.physical_dim(), self.dim(), |r, i| self.vectors[i][r])
    }

    /// `|i⟩_L⟨k|`.
    pub fn transition(&self, i: usize, k: usize) -> Operator<T> {
        Operator::outer(&self.vectors[i], &self.vectors[k])
    }

    /// Code-space projector `Π_𝒞`.
    pub fn projector(&self) -> Operator<T> {
        let v = self.isometry();
        &v * &v.adjoint()
    }

    /// `π_d^𝒞 = Π_𝒞 / d`.
    pub fn maximally_mixed(&self) -> Operator<T> {
        self.projector().scale_re(T::one() / T::from_usize(self.dim()).unwrap())
    }

    /// `V A V†` for a `d × d` logical operator.
    pub fn encode(&self, a: &Operator<T>) -> Result<Operator<T>> {
        if a.rows() != self.dim() || !a.is_square() {
            return Err(Error::DimensionMismatch {
                context: "CodeBasis::encode",
                expected: self.dim(),
                found: a.rows(),
            });
        }
        let v = self.isometry();
        Ok(&(&v * a) * &v.adjoint())
    }

    /// `V† A V`.
    pub fn decode(&self, a: &Operator<T>) -> Result<Operator<T>> {
        if a.rows() != self.physical_dim() || !a.is_square() {
            return Err(Error::DimensionMismatch {
                context: "CodeBasis::decode",
                expected: self.physical_dim(),
                found: a.rows(),
            });
        }
        let v = self.isometry();
        Ok(&(&v.adjoint() * a) * &v)
    }

    /// Lifted logical Pauli string; logical qubit 0 is the most significant
    /// bit of the logical index.
    pub fn logical_pauli(&self, p: &PauliString) -> Result<Operator<T>> {
        match self.n_logical() {
            Some(n) if n == p.len() => self.encode(&p.matrix()),
            _ => Err(Error::InvalidArgument(format!(
                "Pauli string {p} does not match logical dimension {}",
                self.dim()
            ))),
        }
    }

    /// Logical operators for every logical qubit.
    pub fn logical_operators(&self) -> Result<LogicalOperators<T>> {
        let n = self
            .n_logical()
            .ok_or_else(|| Error::InvalidArgument(format!("logical dimension {} is not 2^n", self.dim())))?;
        let dims = vec![2; n];
        let lift = |op: Operator<T>| -> Result<Vec<Operator<T>>> {
            (0..n).map(|q| self.encode(&embed(&op, q, &dims)?)).collect()
        };
        Ok(LogicalOperators {
            x: lift(sigma_x())?,
            y: lift(sigma_y())?,
            z: lift(sigma_z())?,
            identity: self.projector(),
        })
    }
}

/// Generators `XZZXI` and its cyclic shifts.
pub fn five_qubit_stabilizers() -> Vec<PauliString> {
    ["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"]
        .iter()
        .map(|s| s.parse().expect("valid Pauli string"))
        .collect()
}

/// `X_L, Y_L, Z_L` per logical qubit and the logical identity `Π_𝒞`, all as
/// operators on the physical space.
#[derive(Clone, Debug)]
pub struct LogicalOperators<T> {
    pub x: Vec<Operator<T>>,
    pub y: Vec<Operator<T>>,
    pub z: Vec<Operator<T>>,
    pub identity: Operator<T>,
}

impl<T: Real> LogicalOperators<T> {
    pub fn n_logical(&self) -> usize {
        self.x.len()
    }

    /// Largest violation of `P² = Π`, `XY = iZ`, `XZ = −ZX` and of
    /// commutation between different logical qubits.
    pub fn algebra_error(&self) -> T {
        let i = cr::<T>(T::zero()) + C::new(T::zero(), T::one());
        let pi = &self.identity;
        let mut err = T::zero();
        for q in 0..self.n_logical() {
            let (x, y, z) = (&self.x[q], &self.y[q], &self.z[q]);
            for p in [x, y, z] {
                err = err.max((p * p).max_abs_diff(pi));
            }
            err = err.max((x * y).max_abs_diff(&(z * i)));
            err = err.max((x * z).max_abs_diff(&-(z * x)));
            for r in 0..self.n_logical() {
                if r != q {
                    for a in [x, y, z] {
                        for b in [&self.x[r], &self.y[r], &self.z[r]] {
                            err = err.max(a.commutator(b).max_norm());
                        }
                    }
                }
            }
        }
        err
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_qubit_code_is_stabilized() {
        let code = CodeBasis::<f64>::five_qubit();
        let v = code.isometry();
        for g in five_qubit_stabilizers() {
            let s = g.matrix::<f64>();
            assert!((&s * &v).max_abs_diff(&v) < 1e-12);
        }
        assert!(CodeBasis::new(5, code.vectors().to_vec()).is_ok());
        let zl: PauliString = "ZZZZZ".parse().unwrap();
        let z = code.decode(&zl.matrix()).unwrap();
        assert!(z.max_abs_diff(&sigma_z()) < 1e-12);
    }

    #[test]
    fn rejects_non_orthonormal_vectors() {
        let v = vec![vec![C::new(1.0, 0.0), C::new(0.0, 0.0)], vec![C::new(1.0, 0.0), C::new(0.0, 0.0)]];
        assert!(CodeBasis::<f64>::new(1, v).is_err());
        let v = vec![vec![C::new(2.0f64, 0.0), C::new(0.0, 0.0)]];
        assert!(CodeBasis::new(1, v).is_err());
    }

    #[test]
    fn logical_operators_match_definitions() {
        let code = CodeBasis::<f64>::bit_flip();
        let ops = code.logical_operators().unwrap();
        let x = &code.transition(0, 1) + &code.transition(1, 0);
        assert!(ops.x[0].max_abs_diff(&x) < 1e-15);
        let z = &code.transition(0, 0) - &code.transition(1, 1);
        assert!(ops.z[0].max_abs_diff(&z) < 1e-15);
        assert!(ops.algebra_error() < 1e-14);
    }

    #[test]
    fn two_logical_qubits_commute_across() {
        let code = CodeBasis::<f64>::computational(3, 4).unwrap();
        let ops = code.logical_operators().unwrap();
        assert_eq!(ops.n_logical(), 2);
        assert!(ops.algebra_error() < 1e-14);
        let p: PauliString = "XZ".parse().unwrap();
        let xz = code.logical_pauli(&p).unwrap();
        assert!(xz.max_abs_diff(&(&ops.x[0] * &ops.z[1])) < 1e-15);
    }
}
