use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::basis::CodeBasis;
use super::fidelity::{average_fidelity, noise_images, petz_fidelity_from_images};
use super::noise::NoiseModel;
use crate::error::{Error, Result};
use crate::lindblad::{Channel, Superoperator};
use crate::linalg::{herm_eig, pauli_decompose, unitary_exp, Matrix, Operator, PauliTable};
use crate::optim::{bfgs, bfgs_with_gradient, nelder_mead, OptimOptions};
use crate::scalar::{c, cr, Real, C};

/// Largest register the optimizer accepts.
pub const MAX_OPTIMIZE_QUBITS: usize = 5;

/// Budget and seed of a code search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimizerConfig<T> {
    /// Random starting points in addition to the computational seed.
    pub restarts: usize,
    /// Simplex iterations per start.
    pub iters: usize,
    /// Quasi-Newton iterations after the simplex stage; 0 disables.
    pub polish_iters: usize,
    /// Gradient used by the quasi-Newton stage.
    pub gradient: GradientKind,
    /// Objective evaluations allowed per start.
    pub max_evals: usize,
    pub seed: u64,
    /// Random Pauli coefficients are drawn from `[−init_scale, init_scale]`.
    pub init_scale: T,
    pub eps: T,
}

impl<T: Real> Default for OptimizerConfig<T> {
    fn default() -> Self {
        Self {
            restarts: 4,
            iters: 200,
            polish_iters: 60,
            gradient: GradientKind::Analytic,
            max_evals: 200_000,
            seed: 0,
            init_scale: T::one(),
            eps: T::lit(1e-12),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GradientKind {
    /// Exact derivative of the Petz fidelity, see
    /// [`CodeObjective::loss_and_gradient`].
    Analytic,
    /// Central differences, `2·4^N` evaluations per gradient.
    CentralDifference,
}

#[derive(Clone, Debug)]
pub struct OptimizedCode<T> {
    pub basis: CodeBasis<T>,
    pub f_avg: T,
    /// Value at the computational-basis seed (`A = 0`).
    pub f_avg_seed: T,
    /// Pauli coefficients of `A`, table order.
    pub coefficients: Vec<T>,
    pub evaluations: usize,
    /// Some start stopped on its iteration or evaluation cap.
    pub budget_exhausted: bool,
    pub config: OptimizerConfig<T>,
}

impl<T: Real> OptimizedCode<T> {
    pub fn infidelity(&self) -> T {
        T::one() - self.f_avg
    }
}

/// Average Petz-recovery fidelity of the code `{e^{iA}|i⟩}` against a fixed
/// noise channel.
pub struct CodeObjective<'a, T> {
    pub noise: &'a Superoperator<T>,
    pub n_physical: usize,
    pub d: usize,
    pub eps: T,
}

impl<T: Real> CodeObjective<'_, T> {
    pub fn n_params(&self) -> usize {
        1 << (2 * self.n_physical)
    }

    pub fn basis(&self, coeffs: &[T]) -> Result<CodeBasis<T>> {
        if coeffs.len() != self.n_params() {
            return Err(Error::DimensionMismatch {
                context: "CodeObjective::basis",
                expected: self.n_params(),
                found: coeffs.len(),
            });
        }
        let table = PauliTable {
            n_qubits: self.n_physical,
            coeffs: coeffs.iter().map(|&a| cr(a)).collect(),
        };
        let u = unitary_exp(&table.to_operator(), T::one())?;
        CodeBasis::from_unitary(self.n_physical, &u, self.d)
    }

    pub fn f_avg_of(&self, code: &CodeBasis<T>) -> Result<T> {
        let fe = petz_fidelity_from_images(&noise_images(self.noise, code)?, self.d, self.eps)?;
        Ok(average_fidelity(fe, self.d))
    }

    pub fn f_avg(&self, coeffs: &[T]) -> Result<T> {
        self.f_avg_of(&self.basis(coeffs)?)
    }

    /// `1 − F_avg`, with failures mapped to the worst value.
    fn loss(&self, coeffs: &[T]) -> T {
        self.f_avg(coeffs).map_or(T::one(), |f| T::one() - f)
    }

    fn table(&self, coeffs: &[T]) -> Operator<T> {
        PauliTable {
            n_qubits: self.n_physical,
            coeffs: coeffs.iter().map(|&a| cr(a)).collect(),
        }
        .to_operator()
    }

    /// `1 − F_avg` and its exact gradient in the Pauli coefficients of `A`.
    ///
    /// Both matrix functions in the chain, `A ↦ e^{iA}` and
    /// `N(π) ↦ N(π)^{−1/2}`, are differentiated with first divided
    /// differences of their spectra; the noise enters only through `N` and
    /// `N†` applied to `O(d²)` operators.
    pub fn loss_and_gradient(&self, coeffs: &[T]) -> Result<(T, Vec<T>)> {
        let d = self.d;
        let dim = 1usize << self.n_physical;
        if coeffs.len() != self.n_params() {
            return Err(Error::DimensionMismatch {
                context: "CodeObjective::loss_and_gradient",
                expected: self.n_params(),
                found: coeffs.len(),
            });
        }
        let ea = herm_eig(&self.table(coeffs))?;
        let phase: Vec<C<T>> = ea.values.iter().map(|&l| c(l.cos(), l.sin())).collect();
        let w = &ea.vectors;
        let u = Matrix::from_fn(dim, d, |r, i| (0..dim).map(|k| w[(r, k)] * phase[k] * w[(i, k)].conj()).sum());
        let v: Vec<Vec<C<T>>> = (0..d).map(|i| u.column(i)).collect();

        // forward images M_ik, i ≤ k
        let idx = |i: usize, k: usize| i * d - i * (i + 1) / 2 + k;
        let mut images = Vec::with_capacity(d * (d + 1) / 2);
        for i in 0..d {
            for k in i..d {
                images.push(self.noise.apply(&Operator::outer(&v[i], &v[k])));
            }
        }
        let inv_d = T::one() / T::from_usize(d).unwrap();
        let mut omega = Operator::zeros(dim, dim);
        for i in 0..d {
            omega += &images[idx(i, i)];
        }
        let eo = herm_eig(&omega.scale_re(inv_d).hermitian_part())?;
        let lmax = eo.values.iter().fold(T::zero(), |m, &x| m.max(x));
        let cutoff = self.eps * lmax;
        let on = |x: T| x > cutoff && x > T::zero();
        let f = |x: T| if on(x) { T::one() / x.sqrt() } else { T::zero() };
        let s = eo.apply_fn(f);

        let mut fe = T::zero();
        let mut g = Operator::zeros(dim, dim);
        let mut z = vec![Operator::zeros(dim, dim); d * d];
        for i in 0..d {
            for k in i..d {
                let m = &images[idx(i, k)];
                let md = m.adjoint();
                let y = &(&s * m) * &s;
                let t = md.trace_product(&y).re;
                fe = fe + if i == k { t } else { t + t };
                g += &(&(m * &s) * &md);
                if i != k {
                    g += &(&(&md * &s) * m);
                }
                let zik = self.noise.apply_adjoint(&y)?;
                z[k * d + i] = zik.adjoint();
                z[i * d + k] = zik;
            }
        }
        let d3 = T::from_usize(d * d * d).unwrap();
        fe = fe / d3;

        // N(π)^{−1/2} sensitivity
        let gamma = |a: T, b: T| -> T {
            match (on(a), on(b)) {
                (false, false) => T::zero(),
                (true, true) if (a - b).abs() <= T::lit(1e-9) * lmax => {
                    let m = (a + b) * T::lit(0.5);
                    -T::lit(0.5) / (m * m.sqrt())
                }
                _ => (f(a) - f(b)) / (a - b),
            }
        };
        let gp = eo.to_eigenbasis(&g);
        let hp = Matrix::from_fn(dim, dim, |k, l| gp[(k, l)] * gamma(eo.values[k], eo.values[l]));
        let q = self.noise.apply_adjoint(&eo.from_eigenbasis(&hp))?;

        // dF_e·d³ = 2 Re Σ_i b_i† δv_i
        let two = T::lit(2.0);
        let mut b = Matrix::zeros(dim, d);
        for i in 0..d {
            let mut col = q.matvec(&v[i]);
            for x in &mut col {
                *x = *x * inv_d;
            }
            for k in 0..d {
                let zv = z[i * d + k].matvec(&v[k]);
                for (x, y) in col.iter_mut().zip(zv) {
                    *x = *x + y;
                }
            }
            for (r, x) in col.into_iter().enumerate() {
                b[(r, i)] = x * two;
            }
        }
        // through U = e^{iA}
        let bw = Matrix::from_fn(dim, dim, |r, l| (0..d).map(|j| b[(r, j)] * w[(j, l)]).sum());
        let mw = &w.adjoint() * &bw;
        let lam = &ea.values;
        let cm = Matrix::from_fn(dim, dim, |k, l| {
            let phi = if (lam[k] - lam[l]).abs() <= T::lit(1e-10) {
                phase[k]
            } else {
                (phase[k] - phase[l]) / c(T::zero(), lam[k] - lam[l])
            };
            mw[(k, l)] * phi.conj()
        });
        let cfull = &(w * &cm) * &w.adjoint();
        let tr = pauli_decompose(&cfull)?;
        // ∂F_e/∂a_P = (2/d³) Im Tr(P C), and ∂F_avg = d/(d+1) ∂F_e
        let scale = -T::lit(2.0) * T::from_usize(dim * d).unwrap() / (d3 * T::from_usize(d + 1).unwrap());
        let grad = tr.coeffs.iter().map(|p| p.im * scale).collect();
        let loss = T::one() - average_fidelity(fe, d);
        Ok((loss, grad))
    }
}

/// Searches `C_U = {U|i⟩_0}`, `U = e^{iA}`, for the code with the highest
/// Petz-recovery average fidelity under `model` over `dt`.
pub fn optimize_code<T: Real>(
    model: &NoiseModel<T>,
    dt: T,
    d: usize,
    cfg: &OptimizerConfig<T>,
) -> Result<OptimizedCode<T>> {
    let noise = model.channel(dt)?;
    optimize_code_with(&noise, model.n_physical, d, cfg)
}

/// As [`optimize_code`] with a precomputed noise channel.
pub fn optimize_code_with<T: Real>(
    noise: &Superoperator<T>,
    n_physical: usize,
    d: usize,
    cfg: &OptimizerConfig<T>,
) -> Result<OptimizedCode<T>> {
    if n_physical == 0 || n_physical > MAX_OPTIMIZE_QUBITS {
        return Err(Error::InvalidArgument(format!(
            "code optimization supports 1..={MAX_OPTIMIZE_QUBITS} qubits, got {n_physical}"
        )));
    }
    if d == 0 || d > 1 << n_physical || noise.dim() != 1 << n_physical {
        return Err(Error::InvalidArgument(format!(
            "logical dimension {d} or channel dimension {} incompatible with {n_physical} qubits",
            noise.dim()
        )));
    }
    let obj = CodeObjective {
        noise,
        n_physical,
        d,
        eps: cfg.eps,
    };
    let n = obj.n_params();
    let seed_x = vec![T::zero(); n];
    let f_seed = obj.f_avg(&seed_x)?;
    let mut best = (seed_x, T::one() - f_seed);
    let mut evaluations = 1;
    let mut exhausted = false;
    if best.1 <= T::epsilon() * T::lit(4.0) {
        return finish(&obj, best, f_seed, evaluations, exhausted, cfg);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let loss = |x: &[T]| obj.loss(x);
    let nm_opts = OptimOptions {
        max_iters: cfg.iters,
        max_evals: cfg.max_evals,
        f_tol: T::lit(1e-14),
        grad_step: T::lit(1e-6),
    };
    let bfgs_opts = OptimOptions {
        max_iters: cfg.polish_iters,
        ..nm_opts
    };
    for start in 0..=cfg.restarts {
        // start 0 refines the computational seed itself
        let x0: Vec<T> = if start == 0 {
            best.0.clone()
        } else {
            let s = cfg.init_scale.as_f64();
            (0..n).map(|_| T::lit(rng.random_range(-s..=s))).collect()
        };
        let mut x = x0;
        if cfg.iters > 0 {
            let r = nelder_mead(loss, &x, cfg.init_scale * T::lit(0.1), &nm_opts);
            evaluations += r.evaluations;
            exhausted |= r.budget_exhausted;
            x = r.x;
        }
        if cfg.polish_iters > 0 {
            let r = match cfg.gradient {
                GradientKind::Analytic => {
                    let fg = |x: &[T]| {
                        obj.loss_and_gradient(x)
                            .unwrap_or_else(|_| (T::one(), vec![T::zero(); x.len()]))
                    };
                    bfgs_with_gradient(fg, loss, &x, &bfgs_opts)
                }
                GradientKind::CentralDifference => bfgs(loss, &x, &bfgs_opts),
            };
            evaluations += r.evaluations;
            exhausted |= r.budget_exhausted;
            x = r.x;
        }
        let v = loss(&x);
        evaluations += 1;
        if v < best.1 {
            best = (x, v);
        }
    }
    finish(&obj, best, f_seed, evaluations, exhausted, cfg)
}

fn finish<T: Real>(
    obj: &CodeObjective<'_, T>,
    best: (Vec<T>, T),
    f_seed: T,
    evaluations: usize,
    budget_exhausted: bool,
    cfg: &OptimizerConfig<T>,
) -> Result<OptimizedCode<T>> {
    let basis = obj.basis(&best.0)?;
    Ok(OptimizedCode {
        basis,
        f_avg: T::one() - best.1,
        f_avg_seed: f_seed,
        coefficients: best.0,
        evaluations,
        budget_exhausted,
        config: *cfg,
    })
}
