//! Pauli matrices, Pauli strings and Pauli-basis decomposition.
//!
//! Qubit convention used across the crate: `σ_z|0⟩ = |0⟩`, the lowering
//! operator is `σ_− = |0⟩⟨1| = (σ_x + iσ_y)/2` and `σ_+ = σ_−†`, so `|0⟩` is
//! the ground state that amplitude damping relaxes towards.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};

use super::matrix::Operator;
use super::tensor::tensor_all;
use crate::error::{Error, Result};
use crate::scalar::{c, Real, C};

pub fn sigma_x<T: Real>() -> Operator<T> {
    Operator::from_vec(2, 2, vec![C::zero(), C::one(), C::one(), C::zero()]).unwrap()
}

pub fn sigma_y<T: Real>() -> Operator<T> {
    let i = c(T::zero(), T::one());
    Operator::from_vec(2, 2, vec![C::zero(), -i, i, C::zero()]).unwrap()
}

pub fn sigma_z<T: Real>() -> Operator<T> {
    Operator::from_vec(2, 2, vec![C::one(), C::zero(), C::zero(), -C::<T>::one()]).unwrap()
}

/// `σ_− = |0⟩⟨1|`.
pub fn sigma_minus<T: Real>() -> Operator<T> {
    Operator::from_vec(2, 2, vec![C::zero(), C::one(), C::zero(), C::zero()]).unwrap()
}

/// `σ_+ = |1⟩⟨0|`.
pub fn sigma_plus<T: Real>() -> Operator<T> {
    Operator::from_vec(2, 2, vec![C::zero(), C::zero(), C::one(), C::zero()]).unwrap()
}

/// Single-qubit Pauli label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix<T: Real>(self) -> Operator<T> {
        match self {
            Pauli::I => Operator::identity(2),
            Pauli::X => sigma_x(),
            Pauli::Y => sigma_y(),
            Pauli::Z => sigma_z(),
        }
    }

    fn index(self) -> usize {
        self as usize
    }

    fn from_index(i: usize) -> Self {
        Self::ALL[i]
    }

    fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Tensor product of single-qubit Paulis, leftmost letter on qubit 0
/// (the most significant index).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString(pub Vec<Pauli>);

impl PauliString {
    pub fn identity(n: usize) -> Self {
        Self(vec![Pauli::I; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Table index: base-4 digits (I=0, X=1, Y=2, Z=3), qubit 0 most significant.
    pub fn index(&self) -> usize {
        self.0.iter().fold(0, |acc, p| acc * 4 + p.index())
    }

    pub fn from_index(mut idx: usize, n: usize) -> Self {
        let mut v = vec![Pauli::I; n];
        for q in (0..n).rev() {
            v[q] = Pauli::from_index(idx % 4);
            idx /= 4;
        }
        Self(v)
    }

    /// All `4^n` strings in table order.
    pub fn all(n: usize) -> impl Iterator<Item = PauliString> {
        (0..4usize.pow(n as u32)).map(move |i| Self::from_index(i, n))
    }

    pub fn matrix<T: Real>(&self) -> Operator<T> {
        if self.0.is_empty() {
            return Operator::identity(1);
        }
        let factors: Vec<Operator<T>> = self.0.iter().map(|p| p.matrix()).collect();
        tensor_all(&factors)
    }

    /// `P = phase(k)·|k ⊕ x⟩⟨k|`: returns the flip mask `x` and the phase of
    /// column `k`.
    fn column_action<T: Real>(&self, k: usize) -> (usize, C<T>) {
        let n = self.0.len();
        let mut flip = 0usize;
        let mut phase = C::<T>::one();
        let i = c(T::zero(), T::one());
        for (q, p) in self.0.iter().enumerate() {
            let bit_pos = n - 1 - q;
            let b = (k >> bit_pos) & 1;
            match p {
                Pauli::I => {}
                Pauli::X => flip |= 1 << bit_pos,
                Pauli::Y => {
                    flip |= 1 << bit_pos;
                    phase = phase * if b == 0 { i } else { -i };
                }
                Pauli::Z => {
                    if b == 1 {
                        phase = -phase;
                    }
                }
            }
        }
        (flip, phase)
    }

    /// `Tr(P A)` in `O(2^n)`.
    pub fn trace_with<T: Real>(&self, a: &Operator<T>) -> C<T> {
        let dim = 1usize << self.0.len();
        assert_eq!(a.rows(), dim);
        let mut acc = C::zero();
        for k in 0..dim {
            let (flip, ph) = self.column_action::<T>(k);
            acc = acc + ph * a[(k, k ^ flip)];
        }
        acc
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .filter(|ch| !ch.is_whitespace() && *ch != '⊗' && *ch != '*')
            .map(|ch| match ch.to_ascii_uppercase() {
                'I' | '1' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::InvalidArgument(format!("unknown Pauli letter '{other}'"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(PauliString)
    }
}

/// Coefficients `c_P` with `A = Σ_P c_P P`.
#[derive(Clone, Debug)]
pub struct PauliTable<T> {
    pub n_qubits: usize,
    pub coeffs: Vec<C<T>>,
}

impl<T: Real> PauliTable<T> {
    pub fn get(&self, p: &PauliString) -> C<T> {
        self.coeffs[p.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (PauliString, C<T>)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, &c)| (PauliString::from_index(i, self.n_qubits), c))
    }

    pub fn to_operator(&self) -> Operator<T> {
        let dim = 1usize << self.n_qubits;
        let mut out = Operator::zeros(dim, dim);
        for (p, coef) in self.iter() {
            if coef.is_zero() {
                continue;
            }
            for k in 0..dim {
                let (flip, ph) = p.column_action::<T>(k);
                out[(k ^ flip, k)] = out[(k ^ flip, k)] + coef * ph;
            }
        }
        out
    }
}

/// Expands an `N`-qubit operator in the Pauli basis, `c_P = Tr(P A)/2^N`.
pub fn pauli_decompose<T: Real>(a: &Operator<T>) -> Result<PauliTable<T>> {
    let dim = a.rows();
    if !a.is_square() || dim == 0 || !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(dim));
    }
    let n = dim.trailing_zeros() as usize;
    let norm = T::one() / T::from_usize(dim).unwrap();
    let coeffs = PauliString::all(n).map(|p| p.trace_with(a) * norm).collect();
    Ok(PauliTable { n_qubits: n, coeffs })
}
