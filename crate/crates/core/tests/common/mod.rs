//! Independent oracles shared by the integration tests: random matrices,
//! Kraus channels, closed-form qubit formulas and syndrome recovery.
#![allow(dead_code)]

use petzlab::linalg::Operator;
use petzlab::C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type Op = Operator<f64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> C<f64> {
    C::new(re, im)
}

pub fn gauss<R: Rng>(rng: &mut R) -> C<f64> {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Op {
    Op::from_fn(rows, cols, |_, _| gauss(rng))
}

pub fn random_hermitian<R: Rng>(rng: &mut R, d: usize) -> Op {
    let a = random_matrix(rng, d, d);
    Op::from_fn(d, d, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5)
}

/// `A A† / Tr(A A†)` with `A` of shape `d × rank`.
pub fn random_density<R: Rng>(rng: &mut R, d: usize, rank: usize) -> Op {
    let a = random_matrix(rng, d, rank);
    let rho = naive_mul(&a, &a.adjoint());
    let tr = trace(&rho).re;
    rho.map(|z| z / tr)
}

/// Modified Gram–Schmidt on the columns of a Gaussian matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, d: usize) -> Op {
    let a = random_matrix(rng, d, d);
    let mut cols: Vec<Vec<C<f64>>> = Vec::with_capacity(d);
    for j in 0..d {
        let mut v: Vec<C<f64>> = (0..d).map(|i| a[(i, j)]).collect();
        for u in &cols {
            let p: C<f64> = u.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
            for (vi, ui) in v.iter_mut().zip(u) {
                *vi -= p * ui;
            }
        }
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        cols.push(v.into_iter().map(|z| z / n).collect());
    }
    Op::from_fn(d, d, |i, j| cols[j][i])
}

/// `k` Kraus operators cut from the first `d` columns of a `dk × dk` unitary.
pub fn random_kraus<R: Rng>(rng: &mut R, d: usize, k: usize) -> Vec<Op> {
    let u = random_unitary(rng, d * k);
    (0..k)
        .map(|m| Op::from_fn(d, d, |a, b| u[(m * d + a, b)]))
        .collect()
}

pub fn naive_mul(a: &Op, b: &Op) -> Op {
    Op::from_fn(a.rows(), b.cols(), |i, j| (0..a.cols()).map(|k| a[(i, k)] * b[(k, j)]).sum())
}

pub fn trace(a: &Op) -> C<f64> {
    (0..a.rows()).map(|i| a[(i, i)]).sum()
}

pub fn kraus_apply(kraus: &[Op], rho: &Op) -> Op {
    let d = kraus[0].rows();
    let mut out = Op::zeros(d, rho.cols());
    for k in kraus {
        out = &out + &naive_mul(&naive_mul(k, rho), &k.adjoint());
    }
    out
}

pub fn frobenius(a: &Op, b: &Op) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

pub fn max_diff(a: &Op, b: &Op) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Pauli matrices written out by hand.
pub fn pauli(which: char) -> Op {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    let data = match which {
        'I' => [one, z, z, one],
        'X' => [z, one, one, z],
        'Y' => [z, -i, i, z],
        'Z' => [one, z, z, -one],
        _ => panic!("unknown Pauli {which}"),
    };
    Op::from_vec(2, 2, data.to_vec()).unwrap()
}

pub fn kron(a: &Op, b: &Op) -> Op {
    let (ra, ca, rb, cb) = (a.rows(), a.cols(), b.rows(), b.cols());
    Op::from_fn(ra * rb, ca * cb, |i, j| a[(i / rb, j / cb)] * b[(i % rb, j % cb)])
}

/// Tensor product of single-qubit Paulis named by `s`, leftmost factor most
/// significant.
pub fn pauli_string(s: &str) -> Op {
    s.chars()
        .map(pauli)
        .reduce(|a, b| kron(&a, &b))
        .expect("non-empty Pauli string")
}

/// `Σ v_i σ_i` for a complex 3-vector.
pub fn vec_dot_sigma(v: &[C<f64>; 3]) -> Op {
    let mut out = Op::zeros(2, 2);
    for (k, name) in ['X', 'Y', 'Z'].into_iter().enumerate() {
        out = &out + &pauli(name).scale(v[k]);
    }
    out
}

/// The reference qubit model: `H = 0.3σ_x + σ_z` and the jump
/// `0.4(σ_x − iσ_y)/2 = 0.4|1⟩⟨0|`.
pub fn reference_qubit_model() -> (Op, Op) {
    let h = &pauli('X').scale_re(0.3) + &pauli('Z');
    let l = (&pauli('X') - &pauli('Y').scale(c(0.0, 1.0))).scale_re(0.2);
    (h, l)
}

/// `exp(−i t h·σ)` in closed form.
pub fn qubit_unitary(h: [f64; 3], t: f64) -> Op {
    let n = (h[0] * h[0] + h[1] * h[1] + h[2] * h[2]).sqrt();
    let axis = [c(h[0] / n, 0.0), c(h[1] / n, 0.0), c(h[2] / n, 0.0)];
    &Op::identity(2).scale_re((n * t).cos()) - &vec_dot_sigma(&axis).scale(c(0.0, (n * t).sin()))
}

/// Kets of a code, as columns of an isometry.
pub fn isometry(kets: &[Vec<C<f64>>]) -> Op {
    Op::from_fn(kets[0].len(), kets.len(), |i, j| kets[j][i])
}

/// `F_e = Σ_K |Tr(V† K V)|² / d²` for a channel in Kraus form restricted to
/// the code with isometry `V`.
pub fn kraus_entanglement_fidelity(kraus: &[Op], v: &Op) -> f64 {
    let d = v.cols() as f64;
    kraus
        .iter()
        .map(|k| trace(&naive_mul(&naive_mul(&v.adjoint(), k), v)).norm_sqr())
        .sum::<f64>()
        / (d * d)
}

/// Syndrome recovery for unitary errors `E_a` with mutually orthogonal
/// images `E_a 𝒞`: `R_a = E_a† Π_a`, where `Π_a = E_a P E_a†`. Panics unless
/// the images tile the whole space.
pub fn syndrome_recovery(code_projector: &Op, errors: &[Op]) -> Vec<Op> {
    let dim = code_projector.rows();
    let mut sum = Op::zeros(dim, dim);
    let mut out = Vec::with_capacity(errors.len());
    for e in errors {
        let pi = naive_mul(&naive_mul(e, code_projector), &e.adjoint());
        sum = &sum + &pi;
        out.push(naive_mul(&e.adjoint(), &pi));
    }
    assert!(max_diff(&sum, &Op::identity(dim)) < 1e-12, "syndrome spaces do not tile the space");
    out
}

/// Kraus operators of `B ∘ A`.
pub fn compose_kraus(after: &[Op], before: &[Op]) -> Vec<Op> {
    after
        .iter()
        .flat_map(|b| before.iter().map(move |a| naive_mul(b, a)))
        .collect()
}
