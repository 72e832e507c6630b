use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lindblad::{Generator, Grid, Lindbladian, SampledSchedule, Schedule, Trajectory};
use crate::linalg::{check_state, sqrt_on_support, unitary_exp, EigenSystem, Operator, SupportRoots};
use crate::scalar::{c, Real};

/// Weights `(√λ − √λ′)/(√λ + √λ′)` over pairs of eigenvalues of a state.
///
/// Degenerate pairs get weight 0 and so do pairs with both eigenvalues at or
/// below the support cutoff. A pair with exactly one eigenvalue below the
/// cutoff is *mixed*: its weight is ±1 (the limit of the formula) and callers
/// keep the matching matrix element only when it is not negligible.
#[derive(Clone, Debug)]
pub struct SpectralShift<T> {
    dim: usize,
    weights: Vec<T>,
    mixed: Vec<bool>,
}

impl<T: Real> SpectralShift<T> {
    pub fn new(values: &[T], cutoff: T) -> Self {
        let n = values.len();
        let on = |l: T| l > cutoff && l > T::zero();
        let mut weights = vec![T::zero(); n * n];
        let mut mixed = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (values[i], values[j]);
                let w = match (on(a), on(b)) {
                    (false, false) => T::zero(),
                    (true, false) => {
                        mixed[i * n + j] = true;
                        T::one()
                    }
                    (false, true) => {
                        mixed[i * n + j] = true;
                        -T::one()
                    }
                    (true, true) if (a - b).abs() < T::degeneracy_tol() => T::zero(),
                    (true, true) => {
                        let (sa, sb) = (a.sqrt(), b.sqrt());
                        (sa - sb) / (sa + sb)
                    }
                };
                weights[i * n + j] = w;
            }
        }
        Self { dim: n, weights, mixed }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weight(&self, i: usize, j: usize) -> T {
        self.weights[i * self.dim + j]
    }

    pub fn is_mixed(&self, i: usize, j: usize) -> bool {
        self.mixed[i * self.dim + j]
    }
}

/// `L_B = Π γ^{1/2} L† γ^{−1/2} Π` for each forward jump `L`.
pub fn reverse_jumps<T: Real>(gamma: &Operator<T>, forward_jumps: &[Operator<T>], eps: T) -> Result<Vec<Operator<T>>> {
    let roots = sqrt_on_support(gamma, eps)?;
    Ok(reverse_jumps_with(&roots, forward_jumps))
}

fn reverse_jumps_with<T: Real>(roots: &SupportRoots<T>, forward_jumps: &[Operator<T>]) -> Vec<Operator<T>> {
    forward_jumps
        .iter()
        .map(|l| &(&roots.root * &l.adjoint()) * &roots.inv_root)
        .collect()
}

/// `M = Σ_k L_k†L_k + γ^{−1/2} L_k γ L_k† γ^{−1/2}`.
fn m_operator<T: Real>(roots: &SupportRoots<T>, forward_jumps: &[Operator<T>]) -> Operator<T> {
    let d = roots.root.rows();
    let gamma = &roots.root * &roots.root;
    let mut m = Operator::zeros(d, d);
    for l in forward_jumps {
        let ld = l.adjoint();
        m += &(&ld * l);
        m += &(&(&(&roots.inv_root * l) * &(&gamma * &ld)) * &roots.inv_root);
    }
    m
}

/// `−(i/2) Σ w_{λλ′} ⟨λ|M|λ′⟩ |λ⟩⟨λ′|` in the eigenbasis of `γ`.
fn correction_from<T: Real>(roots: &SupportRoots<T>, forward_jumps: &[Operator<T>]) -> Result<Operator<T>> {
    let d = roots.root.rows();
    if forward_jumps.is_empty() {
        return Ok(Operator::zeros(d, d));
    }
    let eig: &EigenSystem<T> = &roots.eigen;
    let shift = SpectralShift::new(&eig.values, roots.cutoff);
    let mt = eig.to_eigenbasis(&m_operator(roots, forward_jumps));
    let half = c(T::zero(), -T::lit(0.5));
    let negligible = T::degeneracy_tol();
    let ht = Operator::from_fn(d, d, |i, j| {
        let w = shift.weight(i, j);
        let m = mt[(i, j)];
        if w == T::zero() || (shift.is_mixed(i, j) && m.norm() <= negligible) {
            c(T::zero(), T::zero())
        } else {
            half * m * w
        }
    });
    let h = eig.from_eigenbasis(&ht);
    let scale = h.max_norm().max(T::one());
    let dev = h.hermitian_deviation();
    if dev > T::hermitian_tol() * scale {
        return Err(Error::NotHermitian {
            deviation: dev.as_f64(),
        });
    }
    Ok(h.hermitian_part())
}

/// Correction Hamiltonian `H_C(γ)`: the part of the reverse Hamiltonian that
/// compensates dissipation, independent of the forward Hamiltonian.
pub fn correction_hamiltonian<T: Real>(gamma: &Operator<T>, forward_jumps: &[Operator<T>], eps: T) -> Result<Operator<T>> {
    correction_from(&sqrt_on_support(gamma, eps)?, forward_jumps)
}

/// Reverse generator at a single state: `H_B = −H_F + H_C(γ)` and
/// `L_B = reverse_jumps(γ)`.
pub fn reverse_generator_at<T: Real>(
    gamma: &Operator<T>,
    h_f: &Operator<T>,
    forward_jumps: &[Operator<T>],
    eps: T,
) -> Result<Generator<T>> {
    let roots = sqrt_on_support(gamma, eps)?;
    let h = &correction_from(&roots, forward_jumps)? - h_f;
    Ok(Generator::new(h, reverse_jumps_with(&roots, forward_jumps)))
}

/// Reverse Hamiltonian from the time derivative of the forward state,
/// `−½ γ^{−1/2}(K_F γ^{1/2} − i ∂_t γ^{1/2}) + h.c.`, projected onto the support
/// of `γ`.
///
/// `gamma_dot` is `ℒ_F(γ)`; the derivative of the square root is taken in the
/// eigenbasis as `⟨λ|γ̇|λ′⟩ / (√λ + √λ′)`.
pub fn reverse_hamiltonian_derivative_form<T: Real>(
    gamma: &Operator<T>,
    gamma_dot: &Operator<T>,
    h_f: &Operator<T>,
    forward_jumps: &[Operator<T>],
    eps: T,
) -> Result<Operator<T>> {
    let roots = sqrt_on_support(gamma, eps)?;
    let eig = &roots.eigen;
    let d = gamma.rows();
    let on = |l: T| l > roots.cutoff && l > T::zero();
    let dot_t = eig.to_eigenbasis(gamma_dot);
    let droot_t = Operator::from_fn(d, d, |i, j| {
        let (a, b) = (eig.values[i], eig.values[j]);
        if on(a) || on(b) {
            let s = a.max(T::zero()).sqrt() + b.max(T::zero()).sqrt();
            dot_t[(i, j)] / s
        } else {
            c(T::zero(), T::zero())
        }
    });
    let droot = eig.from_eigenbasis(&droot_t);

    let mut k = h_f.clone();
    for l in forward_jumps {
        k -= &(&l.adjoint() * l).scale(c(T::zero(), T::lit(0.5)));
    }
    let inner = &(&k * &roots.root) - &droot.scale(c(T::zero(), T::one()));
    let half_term = (&roots.inv_root * &inner).scale_re(-T::lit(0.5));
    let h = &half_term + &half_term.adjoint();
    Ok(&(&roots.projector * &h) * &roots.projector)
}

/// Time-dependent reverse Lindbladian on the backward grid `t̃ = τ − t`.
#[derive(Clone, Debug)]
pub struct ReverseGenerator<T> {
    pub hamiltonian: SampledSchedule<T>,
    pub jumps: Vec<SampledSchedule<T>>,
    /// Forward trajectory the generator was built from.
    pub source: Arc<Trajectory<T>>,
    /// For the dissipation-only variant: `V_j` such that the backward state at
    /// node `j` is predicted to be `V_j γ_{τ−t̃_j} V_j†`.
    pub frame: Option<Vec<Operator<T>>>,
}

impl<T: Real> ReverseGenerator<T> {
    pub fn dim(&self) -> usize {
        self.hamiltonian.values[0].rows()
    }

    pub fn grid(&self) -> Grid<T> {
        self.hamiltonian.grid()
    }

    pub fn duration(&self) -> T {
        self.grid().end() - self.grid().t0
    }

    pub fn lindbladian(&self) -> Result<Lindbladian<T>> {
        Lindbladian::new(
            Schedule::Sampled(self.hamiltonian.clone()),
            self.jumps.iter().cloned().map(Schedule::Sampled).collect(),
        )
    }

    /// Same Hamiltonian, jumps dropped.
    pub fn hamiltonian_only(&self) -> Self {
        Self {
            jumps: Vec::new(),
            ..self.clone()
        }
    }

    /// State the backward flow should reach at node `j`.
    pub fn target(&self, j: usize) -> Operator<T> {
        let m = self.source.len() - 1;
        let gamma = &self.source.states[m - j];
        match &self.frame {
            Some(v) => &(&v[j] * gamma) * &v[j].adjoint(),
            None => gamma.clone(),
        }
    }
}

struct Node<T> {
    h: Operator<T>,
    jumps: Vec<Operator<T>>,
}

fn forward_nodes<T: Real>(
    forward: &Trajectory<T>,
    h_f: &Schedule<T>,
    jumps_f: &[Schedule<T>],
    eps: T,
    include_h_f: bool,
) -> Result<Vec<Node<T>>> {
    if forward.len() < 2 {
        return Err(Error::InvalidArgument("forward trajectory needs at least two nodes".into()));
    }
    if h_f.dim() != forward.first().rows() || jumps_f.iter().any(|j| j.dim() != h_f.dim()) {
        return Err(Error::DimensionMismatch {
            context: "reverse generator",
            expected: forward.first().rows(),
            found: h_f.dim(),
        });
    }
    (0..forward.len())
        .into_par_iter()
        .map(|m| {
            let t = forward.time(m);
            let gamma = &forward.states[m];
            check_state(gamma, T::lit(1e-6))?;
            let roots = sqrt_on_support(gamma, eps)?;
            let ls: Vec<Operator<T>> = jumps_f.iter().map(|j| j.at(t)).collect();
            let hc = correction_from(&roots, &ls)?;
            let h = if include_h_f { &hc - &h_f.at(t) } else { hc };
            Ok(Node {
                h,
                jumps: reverse_jumps_with(&roots, &ls),
            })
        })
        .collect()
}

fn assemble<T: Real>(
    forward: Arc<Trajectory<T>>,
    mut nodes: Vec<Node<T>>,
    n_jumps: usize,
    frame: Option<Vec<Operator<T>>>,
) -> Result<ReverseGenerator<T>> {
    nodes.reverse();
    let step = forward.step;
    let hamiltonian = SampledSchedule::new(T::zero(), step, nodes.iter().map(|n| n.h.clone()).collect())?;
    let jumps = (0..n_jumps)
        .map(|k| SampledSchedule::new(T::zero(), step, nodes.iter().map(|n| n.jumps[k].clone()).collect()))
        .collect::<Result<_>>()?;
    Ok(ReverseGenerator {
        hamiltonian,
        jumps,
        source: forward,
        frame,
    })
}

/// Reverse generator whose flow retraces `forward` backward in time:
/// `H_B(t̃) = −H_F(t) + H_C(γ_t)` and `L_B(t̃) = reverse_jumps(γ_t)` at
/// `t̃ = τ − t`, node for node.
pub fn build_reverse_generator<T: Real>(
    forward: Arc<Trajectory<T>>,
    h_f: &Schedule<T>,
    jumps_f: &[Schedule<T>],
    eps: T,
) -> Result<ReverseGenerator<T>> {
    let nodes = forward_nodes(&forward, h_f, jumps_f, eps, true)?;
    assemble(forward, nodes, jumps_f.len(), None)
}

/// Reverse generator that undoes only the dissipation: running it from `γ_τ`
/// for time `τ` lands on `U_τ γ_0 U_τ†`, the noise-free unitary evolution.
///
/// At backward node `j` (forward node `M − j`) both `H_C` and `L_B` are
/// conjugated by `V_j = U_τ U_{τ−t̃_j}†`, where `U_t` is the time-ordered
/// unitary of `H_F` built with the same midpoint stepping as the forward run.
pub fn build_dissipation_only_reverse<T: Real>(
    forward: Arc<Trajectory<T>>,
    h_f: &Schedule<T>,
    jumps_f: &[Schedule<T>],
    eps: T,
) -> Result<ReverseGenerator<T>> {
    let nodes = forward_nodes(&forward, h_f, jumps_f, eps, false)?;
    let m = forward.len() - 1;
    let d = h_f.dim();
    let dt = forward.step;
    let mut u = Vec::with_capacity(m + 1);
    u.push(Operator::identity(d));
    for k in 0..m {
        let tm = forward.time(k) + dt * T::lit(0.5);
        let step = unitary_exp(&h_f.at(tm), -dt)?;
        let next = &step * &u[k];
        u.push(next);
    }
    let u_tau = u[m].clone();
    let frame: Vec<Operator<T>> = (0..=m).map(|j| &u_tau * &u[m - j].adjoint()).collect();
    let nodes: Vec<Node<T>> = nodes
        .into_iter()
        .enumerate()
        .map(|(fwd, n)| {
            let v = &frame[m - fwd];
            let vd = v.adjoint();
            Node {
                h: (&(v * &n.h) * &vd).hermitian_part(),
                jumps: n.jumps.iter().map(|l| &(v * l) * &vd).collect(),
            }
        })
        .collect();
    assemble(forward, nodes, jumps_f.len(), Some(frame))
}
