//! Closed-form single-qubit reverse dynamics in Bloch-vector form.
//!
//! A qubit state is `γ = ½(𝟙 + r·σ)`, a Hamiltonian `h·σ` with real `h` and a
//! jump operator `l·σ` with complex `l`. Writing `|r| = tanh x`, the square
//! root of `γ` is proportional to `exp(x r̂·σ / 2)`, which turns the reverse
//! jump and reverse Hamiltonian into explicit vector formulas.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::lindblad::{Schedule, Trajectory};
use crate::linalg::{sigma_x, sigma_y, sigma_z, Operator};
use crate::scalar::{c, cr, Real, C};

/// Largest Bloch radius used in the hyperbolic formulas; `atanh` diverges at 1.
pub const MAX_RADIUS: f64 = 1.0 - 1e-8;

pub type RVec3<T> = [T; 3];
pub type CVec3<T> = [C<T>; 3];

/// Bloch vector of a qubit state, `|r| ≤ 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochState<T> {
    pub r: RVec3<T>,
}

impl<T: Real> BlochState<T> {
    pub fn new(r: RVec3<T>) -> Result<Self> {
        if !r.iter().all(|v| v.is_finite()) || norm(&r) > T::one() + T::lit(1e-9) {
            return Err(Error::InvalidState(format!(
                "Bloch vector norm {} exceeds 1",
                norm(&r)
            )));
        }
        Ok(Self { r })
    }

    /// `r_i = Tr(ρ σ_i)`.
    pub fn from_density(rho: &Operator<T>) -> Result<Self> {
        if rho.rows() != 2 || !rho.is_square() {
            return Err(Error::DimensionMismatch {
                context: "BlochState::from_density",
                expected: 2,
                found: rho.rows(),
            });
        }
        let r = [
            T::lit(2.0) * rho[(0, 1)].re,
            -T::lit(2.0) * rho[(0, 1)].im,
            rho[(0, 0)].re - rho[(1, 1)].re,
        ];
        Self::new(r)
    }

    pub fn to_density(&self) -> Operator<T> {
        let half = T::lit(0.5);
        let mut rho = real_pauli_vector(&self.r).scale_re(half);
        rho[(0, 0)] = rho[(0, 0)] + cr(half);
        rho[(1, 1)] = rho[(1, 1)] + cr(half);
        rho
    }

    pub fn radius(&self) -> T {
        norm(&self.r)
    }

    /// `r` scaled down to at most [`MAX_RADIUS`].
    pub fn clamped(&self) -> RVec3<T> {
        let n = self.radius();
        let cap = T::lit(MAX_RADIUS);
        if n > cap {
            self.r.map(|v| v * cap / n)
        } else {
            self.r
        }
    }

    /// `x = atanh|r|` with the radius clamped.
    pub fn rapidity(&self) -> T {
        norm(&self.clamped()).atanh()
    }

    /// `n = −coth(x)·r`, the unit vector antiparallel to `r`. `None` at the
    /// origin.
    pub fn axis(&self) -> Option<RVec3<T>> {
        let r = self.clamped();
        let x = norm(&r).atanh();
        if x == T::zero() {
            return None;
        }
        let k = -T::one() / x.tanh();
        Some(r.map(|v| v * k))
    }
}

/// A jump operator `l·σ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitJump<T> {
    pub l: CVec3<T>,
}

impl<T: Real> QubitJump<T> {
    pub fn new(l: CVec3<T>) -> Result<Self> {
        if !l.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::InvalidArgument("non-finite jump vector".into()));
        }
        Ok(Self { l })
    }

    /// Pauli components `l_i = Tr(L σ_i)/2`. Any identity part of `L` is dropped.
    pub fn from_operator(op: &Operator<T>) -> Self {
        let half = T::lit(0.5);
        let l = [sigma_x(), sigma_y(), sigma_z()].map(|s: Operator<T>| s.trace_product(op) * half);
        Self { l }
    }

    pub fn to_operator(&self) -> Operator<T> {
        pauli_vector(&self.l)
    }
}

/// `v·σ` for a complex vector.
pub fn pauli_vector<T: Real>(v: &CVec3<T>) -> Operator<T> {
    &(&sigma_x::<T>().scale(v[0]) + &sigma_y::<T>().scale(v[1])) + &sigma_z::<T>().scale(v[2])
}

/// `v·σ` for a real vector.
pub fn real_pauli_vector<T: Real>(v: &RVec3<T>) -> Operator<T> {
    pauli_vector(&v.map(cr))
}

/// Conjugation `e^{−x(n·σ)/2} (v·σ) e^{x(n·σ)/2} = w·σ` with
/// `w = v − 2 sinh²(x/2) n×(n×v) − i sinh(x) (n×v)`.
pub fn bch_conjugate<T: Real>(x: T, n: &RVec3<T>, v: &CVec3<T>) -> Result<CVec3<T>> {
    if (norm(n) - T::one()).abs() > T::lit(1e-9) {
        return Err(Error::InvalidArgument(format!("axis has norm {}, expected 1", norm(n))));
    }
    let nc = n.map(cr);
    let nv = cross(&nc, v);
    let nnv = cross(&nc, &nv);
    let s2 = (x * T::lit(0.5)).sinh();
    let a = cr(T::lit(2.0) * s2 * s2);
    let b = c(T::zero(), x.sinh());
    Ok([0, 1, 2].map(|i| v[i] - a * nnv[i] - b * nv[i]))
}

/// Reverse jump vector
/// `l_B = l* − (cosh²x / 2cosh²(x/2)) r×(r×l*) + i cosh(x) r×l*`.
pub fn qubit_reverse_jump<T: Real>(state: &BlochState<T>, l_f: &QubitJump<T>) -> QubitJump<T> {
    let r = state.clamped();
    let x = norm(&r).atanh();
    let rc = r.map(cr);
    let ls = l_f.l.map(|z| z.conj());
    let rl = cross(&rc, &ls);
    let rrl = cross(&rc, &rl);
    let pref = cr(prefactor(x));
    let ic = c(T::zero(), x.cosh());
    QubitJump {
        l: [0, 1, 2].map(|i| ls[i] - pref * rrl[i] + ic * rl[i]),
    }
}

/// Reverse Hamiltonian vector
/// `h_B = −h_F + (cosh²x / 2cosh²(x/2)) Σ_k [Re((r·l)(r×l*)) − (sinh²(x/2)/cosh x) r×(i l*×l)]`.
pub fn qubit_reverse_hamiltonian<T: Real>(state: &BlochState<T>, h_f: &RVec3<T>, jumps: &[QubitJump<T>]) -> RVec3<T> {
    let r = state.clamped();
    let x = norm(&r).atanh();
    let rc = r.map(cr);
    let pref = prefactor(x);
    let s2 = (x * T::lit(0.5)).sinh();
    let damp = s2 * s2 / x.cosh();
    let mut acc = [T::zero(); 3];
    for j in jumps {
        let ls = j.l.map(|z| z.conj());
        let rl = (0..3).fold(C::new(T::zero(), T::zero()), |a, i| a + rc[i] * j.l[i]);
        let rxls = cross(&rc, &ls);
        // i (l* × l) is real for any complex l
        let ill = cross(&ls, &j.l).map(|z| -z.im);
        let rxill = cross(&r, &ill);
        for i in 0..3 {
            acc[i] = acc[i] + (rl * rxls[i]).re - damp * rxill[i];
        }
    }
    [0, 1, 2].map(|i| -h_f[i] + pref * acc[i])
}

/// Closed-form reverse generator sampled along a qubit trajectory.
#[derive(Clone, Debug)]
pub struct BlochSeries<T> {
    pub times: Vec<T>,
    pub h_b: Vec<RVec3<T>>,
    /// One row per time, one vector per forward jump.
    pub l_b: Vec<Vec<CVec3<T>>>,
}

impl<T: Real> BlochSeries<T> {
    /// Evaluates `h_B` and `l_B` at every recorded node of a forward qubit
    /// trajectory driven by `h_f` and `jumps`.
    pub fn from_trajectory(traj: &Trajectory<T>, h_f: &Schedule<T>, jumps: &[Schedule<T>]) -> Result<Self> {
        if traj.first().rows() != 2 {
            return Err(Error::DimensionMismatch {
                context: "BlochSeries::from_trajectory",
                expected: 2,
                found: traj.first().rows(),
            });
        }
        let times = traj.times();
        let mut h_b = Vec::with_capacity(times.len());
        let mut l_b = Vec::with_capacity(times.len());
        for (k, &t) in times.iter().enumerate() {
            let state = BlochState::from_density(&traj.states[k])?;
            let h = QubitJump::from_operator(&h_f.at(t)).l.map(|z| z.re);
            let ls: Vec<_> = jumps.iter().map(|j| QubitJump::from_operator(&j.at(t))).collect();
            h_b.push(qubit_reverse_hamiltonian(&state, &h, &ls));
            l_b.push(ls.iter().map(|l| qubit_reverse_jump(&state, l).l).collect());
        }
        Ok(Self { times, h_b, l_b })
    }

    /// Writes `t, hB_x, hB_y, hB_z` followed by real and imaginary parts of
    /// each reverse jump vector.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        write!(w, "t,hB_x,hB_y,hB_z")?;
        let n_jumps = self.l_b.first().map_or(0, Vec::len);
        for k in 0..n_jumps {
            for a in ["x", "y", "z"] {
                write!(w, ",re_lB{k}_{a},im_lB{k}_{a}")?;
            }
        }
        writeln!(w)?;
        for (i, t) in self.times.iter().enumerate() {
            write!(w, "{t:.16e}")?;
            for v in &self.h_b[i] {
                write!(w, ",{v:.16e}")?;
            }
            for l in &self.l_b[i] {
                for z in l {
                    write!(w, ",{:.16e},{:.16e}", z.re, z.im)?;
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

fn prefactor<T: Real>(x: T) -> T {
    let ch = x.cosh();
    let chh = (x * T::lit(0.5)).cosh();
    ch * ch / (T::lit(2.0) * chh * chh)
}

fn norm<T: Real>(v: &RVec3<T>) -> T {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn cross<U>(a: &[U; 3], b: &[U; 3]) -> [U; 3]
where
    U: Copy + std::ops::Mul<Output = U> + std::ops::Sub<Output = U>,
{
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}
