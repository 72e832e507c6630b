//! Engineered reverse jumps realized through strongly decaying ancilla qubits.
//!
//! Each reverse jump `L_B,k` is mediated by its own ancilla. The system and
//! ancillas evolve under `H_B ⊗ 𝟙 + √Γ Σ_k ½(L_B,k† ⊗ σ_−^(k) + L_B,k ⊗ σ_+^(k))`
//! with ancilla decay `√Γ σ_−^(k)`. For `Γ` large compared with the
//! generator, adiabatic elimination leaves exactly `L_B,k` as the effective
//! jump on the system.

use std::io::{self, Write};
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lindblad::{propagate, Lindbladian, Method, PropagateOptions, SampledSchedule, Schedule, Trajectory};
use crate::linalg::{embed, partial_trace, sigma_minus, sigma_plus, tensor, uhlmann_fidelity, Operator};
use crate::petz::{reverse_generator, ForwardSpec, ReversalKind, ReverseGenerator};
use crate::scalar::{cr, Real};

/// Largest step used on the full space, in units of `1/Γ`.
pub const STEP_PER_DECAY_TIME: f64 = 0.1;

/// System plus one ancilla qubit per engineered jump.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AncillaAssembly<T> {
    pub system_dim: usize,
    pub n_ancillas: usize,
    /// Ancilla decay rate `Γ`.
    pub gamma: T,
    /// Rescaling factor `ξ ≥ 1`.
    pub xi: T,
}

impl<T: Real> AncillaAssembly<T> {
    pub fn new(system_dim: usize, n_ancillas: usize, gamma: T, xi: T) -> Result<Self> {
        if system_dim == 0 {
            return Err(Error::InvalidArgument("system dimension must be positive".into()));
        }
        if !(gamma > T::zero()) || !gamma.is_finite() {
            return Err(Error::InvalidArgument(format!("ancilla decay rate must be positive, got {gamma}")));
        }
        if !(xi >= T::one()) || !xi.is_finite() {
            return Err(Error::InvalidArgument(format!("rescaling factor must be at least 1, got {xi}")));
        }
        Ok(Self {
            system_dim,
            n_ancillas,
            gamma,
            xi,
        })
    }

    /// Local dimensions `[d, 2, 2, …]`, system first.
    pub fn dims(&self) -> Vec<usize> {
        std::iter::once(self.system_dim)
            .chain(std::iter::repeat(2).take(self.n_ancillas))
            .collect()
    }

    pub fn total_dim(&self) -> usize {
        self.system_dim << self.n_ancillas
    }

    /// `ρ ⊗ |0…0⟩⟨0…0|`.
    pub fn with_ground_ancillas(&self, rho: &Operator<T>) -> Operator<T> {
        let na = 1usize << self.n_ancillas;
        let mut g = Operator::zeros(na, na);
        g[(0, 0)] = cr(T::one());
        tensor(rho, &g)
    }

    /// Reduced system state.
    pub fn reduce(&self, rho: &Operator<T>) -> Result<Operator<T>> {
        partial_trace(rho, &self.dims(), &[0])
    }

    /// Embeds a system operator as `A ⊗ 𝟙`.
    pub fn lift(&self, a: &Operator<T>) -> Result<Operator<T>> {
        embed(a, 0, &self.dims())
    }

    /// Ratio of the largest coupling `√Γ‖L_B‖` or `‖H_B‖` to `Γ`; the
    /// adiabatic picture needs this well below 1. Reported, never enforced.
    pub fn adiabaticity(&self, rev: &ReverseGenerator<T>) -> T {
        let mut worst = T::zero();
        for (j, h) in rev.hamiltonian.values.iter().enumerate() {
            worst = worst.max(h.frobenius_norm() / self.gamma);
            for l in &rev.jumps {
                worst = worst.max(l.values[j].frobenius_norm() / self.gamma.sqrt());
            }
        }
        worst
    }
}

/// `½(L† ⊗ σ_−^(k) + L ⊗ σ_+^(k))` on the full space.
pub fn build_interaction<T: Real>(l_bk: &Operator<T>, k: usize, assembly: &AncillaAssembly<T>) -> Result<Operator<T>> {
    if k >= assembly.n_ancillas {
        return Err(Error::InvalidArgument(format!(
            "ancilla index {k} out of range for {} ancillas",
            assembly.n_ancillas
        )));
    }
    let dims = assembly.dims();
    let down = &embed(&l_bk.adjoint(), 0, &dims)? * &embed(&sigma_minus(), k + 1, &dims)?;
    let up = &embed(l_bk, 0, &dims)? * &embed(&sigma_plus(), k + 1, &dims)?;
    Ok((&down + &up).scale_re(T::lit(0.5)))
}

/// Full system–ancilla Lindbladian for a reverse generator.
///
/// The Hamiltonian is sampled on the generator's grid; ancilla decays are
/// constant. `residual` is uncontrollable dynamics acting on the system
/// factor; if any of its parts are sampled they must share the generator's
/// grid.
pub fn build_hardware_lindbladian<T: Real>(
    rev: &ReverseGenerator<T>,
    assembly: &AncillaAssembly<T>,
    residual: Option<&Lindbladian<T>>,
) -> Result<Lindbladian<T>> {
    if rev.dim() != assembly.system_dim {
        return Err(Error::DimensionMismatch {
            context: "hardware system dimension",
            expected: assembly.system_dim,
            found: rev.dim(),
        });
    }
    if rev.jumps.len() != assembly.n_ancillas {
        return Err(Error::DimensionMismatch {
            context: "one ancilla per engineered jump",
            expected: rev.jumps.len(),
            found: assembly.n_ancillas,
        });
    }
    let grid = rev.grid();
    if let Some(r) = residual {
        if r.dim() != assembly.system_dim {
            return Err(Error::DimensionMismatch {
                context: "residual dissipation",
                expected: assembly.system_dim,
                found: r.dim(),
            });
        }
        if let Some(g) = r.grid()? {
            if !g.matches(&grid) {
                return Err(Error::InvalidArgument("residual dynamics sampled on a different grid".into()));
            }
        }
    }
    let root_gamma = cr(assembly.gamma.sqrt());
    let values = (0..grid.len)
        .map(|j| {
            let t = grid.time(j);
            let mut h = rev.hamiltonian.values[j].clone();
            if let Some(r) = residual {
                h += &r.hamiltonian().at(t);
            }
            let mut h = assembly.lift(&h)?;
            for (k, l) in rev.jumps.iter().enumerate() {
                h += &build_interaction(&l.values[j], k, assembly)?.scale(root_gamma);
            }
            Ok(h)
        })
        .collect::<Result<Vec<_>>>()?;
    let dims = assembly.dims();
    let mut jumps = Vec::with_capacity(assembly.n_ancillas);
    for k in 0..assembly.n_ancillas {
        jumps.push(Schedule::Constant(embed(&sigma_minus(), k + 1, &dims)?.scale(root_gamma)));
    }
    if let Some(r) = residual {
        for j in r.jumps() {
            let lifted = match j {
                Schedule::Constant(op) => Schedule::Constant(assembly.lift(op)?),
                Schedule::Sampled(s) => Schedule::Sampled(SampledSchedule::new(
                    grid.t0,
                    grid.step,
                    s.values.iter().map(|v| assembly.lift(v)).collect::<Result<_>>()?,
                )?),
            };
            jumps.push(lifted);
        }
    }
    Lindbladian::new(Schedule::Sampled(SampledSchedule::new(grid.t0, grid.step, values)?), jumps)
}

/// Runs the generator `ξ` times faster: duration `τ/ξ`, `H_B → ξH_B`,
/// `L_B → √ξ L_B`, so its flow is generated by `ξℒ_B` on the compressed axis.
pub fn apply_rescaling<T: Real>(rev: &ReverseGenerator<T>, xi: T) -> Result<ReverseGenerator<T>> {
    if !(xi >= T::one()) || !xi.is_finite() {
        return Err(Error::InvalidArgument(format!("rescaling factor must be at least 1, got {xi}")));
    }
    if xi == T::one() {
        return Ok(rev.clone());
    }
    let regrid = |s: &SampledSchedule<T>, k: T| SampledSchedule {
        t0: s.t0 / xi,
        step: s.step / xi,
        values: s.values.iter().map(|v| v.scale_re(k)).collect(),
    };
    Ok(ReverseGenerator {
        hamiltonian: regrid(&rev.hamiltonian, xi),
        jumps: rev.jumps.iter().map(|l| regrid(l, xi.sqrt())).collect(),
        source: rev.source.clone(),
        frame: rev.frame.clone(),
    })
}

/// One hardware reversal: the reduced system state at every backward node.
#[derive(Clone, Debug)]
pub struct HardwareRun<T> {
    pub gamma: T,
    pub xi: T,
    /// Forward times `t`; entry `m` compares `γ_t` with the reduced backward
    /// state at rescaled time `(τ − t)/ξ`.
    pub times: Vec<T>,
    pub fidelity: Vec<T>,
    /// Largest trace deviation before renormalization over the full-space run.
    pub max_trace_drift: T,
    /// Largest ancilla excitation probability seen at the recorded nodes.
    pub max_ancilla_population: T,
    /// See [`AncillaAssembly::adiabaticity`].
    pub adiabaticity: T,
    pub substeps: usize,
}

impl<T: Real> HardwareRun<T> {
    /// Fidelity at `t = 0`, i.e. at the end of the backward run.
    pub fn initial_fidelity(&self) -> T {
        self.fidelity[0]
    }

    pub fn min_fidelity(&self) -> T {
        self.fidelity.iter().fold(T::one(), |a, &b| a.min(b))
    }
}

/// Propagates `γ_τ ⊗ |0…0⟩` under the hardware model for `rev` rescaled by
/// `assembly.xi`, with step at most `0.1/Γ`, recording at the backward nodes.
pub fn run_hardware<T: Real>(
    rev: &ReverseGenerator<T>,
    assembly: &AncillaAssembly<T>,
    residual: Option<&Lindbladian<T>>,
) -> Result<HardwareRun<T>> {
    let scaled = apply_rescaling(rev, assembly.xi)?;
    let grid = scaled.grid();
    let l = build_hardware_lindbladian(&scaled, assembly, residual)?;
    let max_dt = T::lit(STEP_PER_DECAY_TIME) / assembly.gamma;
    let substeps = (grid.step / max_dt).ceil().to_usize().unwrap_or(1).max(1);
    let intervals = grid.len - 1;
    let m = rev.source.len() - 1;
    let rho0 = assembly.with_ground_ancillas(rev.source.last());
    let traj: Trajectory<T> = propagate(
        &l,
        &rho0,
        grid.t0,
        grid.end(),
        intervals * substeps,
        PropagateOptions::default()
            .with_stride(substeps)
            .with_method(Method::Action),
    )?;
    let mut fidelity = vec![T::zero(); m + 1];
    let mut max_pop = T::zero();
    for (j, full) in traj.states.iter().enumerate() {
        let sys = assembly.reduce(full)?;
        fidelity[m - j] = uhlmann_fidelity(&rev.target(j), &sys)?;
        max_pop = max_pop.max(T::one() - ancilla_ground_population(full, assembly));
    }
    Ok(HardwareRun {
        gamma: assembly.gamma,
        xi: assembly.xi,
        times: rev.source.times(),
        fidelity,
        max_trace_drift: traj.diagnostics.max_trace_drift,
        max_ancilla_population: max_pop,
        adiabaticity: assembly.adiabaticity(&scaled),
        substeps,
    })
}

fn ancilla_ground_population<T: Real>(rho: &Operator<T>, assembly: &AncillaAssembly<T>) -> T {
    let na = 1usize << assembly.n_ancillas;
    (0..assembly.system_dim).map(|s| rho[(s * na, s * na)].re).sum()
}

/// Best rescaling factor found for one `Γ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XiOptimum<T> {
    pub gamma: T,
    pub xi: T,
    pub initial_fidelity: T,
}

/// Results of a `Γ × ξ` grid of hardware reversals.
#[derive(Clone, Debug)]
pub struct HardwareSweep<T> {
    pub runs: Vec<HardwareRun<T>>,
}

impl<T: Real> HardwareSweep<T> {
    pub fn get(&self, gamma: T, xi: T) -> Option<&HardwareRun<T>> {
        self.runs.iter().find(|r| r.gamma == gamma && r.xi == xi)
    }

    /// For each `Γ` (in first-seen order), the `ξ` maximizing the fidelity at `t = 0`.
    pub fn argmax_xi(&self) -> Vec<XiOptimum<T>> {
        let mut out: Vec<XiOptimum<T>> = Vec::new();
        for r in &self.runs {
            let f = r.initial_fidelity();
            match out.iter_mut().find(|o| o.gamma == r.gamma) {
                Some(o) if f > o.initial_fidelity => {
                    o.xi = r.xi;
                    o.initial_fidelity = f;
                }
                Some(_) => {}
                None => out.push(XiOptimum {
                    gamma: r.gamma,
                    xi: r.xi,
                    initial_fidelity: f,
                }),
            }
        }
        out
    }

    /// Writes `gamma, xi, t, fidelity`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "gamma,xi,t,fidelity")?;
        for r in &self.runs {
            for (t, f) in r.times.iter().zip(&r.fidelity) {
                writeln!(w, "{:.16e},{:.16e},{:.16e},{:.16e}", r.gamma, r.xi, t, f)?;
            }
        }
        Ok(())
    }
}

/// Runs the forward dynamics once, builds the full reverse generator and
/// simulates its hardware realization for every `(Γ, ξ)` pair in parallel.
///
/// With `residual` set, the forward dissipator acts on the system throughout
/// the backward run as uncontrollable noise.
pub fn hardware_sweep<T: Real>(
    spec: &ForwardSpec<T>,
    gammas: &[T],
    xis: &[T],
    residual: bool,
    eps: T,
) -> Result<HardwareSweep<T>> {
    let forward = Arc::new(spec.run()?);
    let rev = reverse_generator(spec, forward, eps, ReversalKind::Full)?;
    let residual = if residual {
        Some(spec.lindbladian()?.dissipator_only())
    } else {
        None
    };
    let pairs: Vec<(T, T)> = gammas.iter().flat_map(|&g| xis.iter().map(move |&x| (g, x))).collect();
    let runs = pairs
        .par_iter()
        .map(|&(g, x)| {
            let assembly = AncillaAssembly::new(rev.dim(), rev.jumps.len(), g, x)?;
            run_hardware(&rev, &assembly, residual.as_ref())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HardwareSweep { runs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{sigma_x, sigma_z};
    use crate::scalar::c;

    fn qubit_assembly(gamma: f64) -> AncillaAssembly<f64> {
        AncillaAssembly::new(2, 1, gamma, 1.0).unwrap()
    }

    #[test]
    fn interaction_for_lowering_operator() {
        let h = build_interaction(&sigma_minus::<f64>(), 0, &qubit_assembly(1.0)).unwrap();
        let expect = (&tensor(&sigma_plus::<f64>(), &sigma_minus()) + &tensor(&sigma_minus(), &sigma_plus())).scale_re(0.5);
        assert!(h.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn interaction_is_hermitian_and_checks_index() {
        let l = Operator::<f64>::from_fn(2, 2, |i, j| c(0.3 * i as f64 - 0.2 * j as f64, 0.1 + j as f64));
        let a = AncillaAssembly::new(2, 2, 5.0, 1.0).unwrap();
        let h = build_interaction(&l, 1, &a).unwrap();
        assert!(h.hermitian_deviation() < 1e-12);
        assert!(build_interaction(&l, 2, &a).is_err());
        assert!(build_interaction(&Operator::zeros(2, 2), 0, &a).unwrap().max_norm() == 0.0);
    }

    #[test]
    fn assembly_validation() {
        assert!(AncillaAssembly::<f64>::new(2, 1, 0.0, 1.0).is_err());
        assert!(AncillaAssembly::<f64>::new(2, 1, 10.0, 0.5).is_err());
        assert_eq!(AncillaAssembly::<f64>::new(3, 2, 10.0, 1.0).unwrap().total_dim(), 12);
    }

    #[test]
    fn unit_rescaling_is_identity() {
        let spec = ForwardSpec::constant(
            &sigma_x::<f64>().scale_re(0.3) + &sigma_z(),
            vec![sigma_minus::<f64>().scale_re(0.4)],
            crate::linalg::DensityMatrix::basis(2, 0).into_operator(),
            1.0,
            10,
        );
        let fwd = Arc::new(spec.run().unwrap());
        let rev = reverse_generator(&spec, fwd, 1e-10, ReversalKind::Full).unwrap();
        let same = apply_rescaling(&rev, 1.0).unwrap();
        assert_eq!(same.grid(), rev.grid());
        assert!(apply_rescaling(&rev, 0.9).is_err());
    }
}
