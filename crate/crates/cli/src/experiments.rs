//! The named experiments. Each one parses its config, runs the core and
//! returns the artifacts to write.

use serde::Serialize;

use petzlab::bloch::{BlochSeries, QubitJump};
use petzlab::code::{
    average_fidelity, optimize_code, petz_entanglement_fidelity, strobe_run, CodeBasis, OptimizedCode,
    StrobeOptions, StrobeReport, Variant,
};
use petzlab::hardware::hardware_sweep;
use petzlab::linalg::{min_eigenvalue, purity, PauliString};
use petzlab::petz::{reversal_experiment, reverse_generator_at, ReversalKind};

use crate::config::{
    CodeChoice, CodeOptimizeConfig, DynamicsConfig, HardwareConfig, NoiseConfig, OptimizerSection, Source,
    StrobeConfig,
};
use crate::error::{CliError, CliResult};
use crate::output::{Artifact, Gnuplot};

/// Core errors caused by config values are reported against the config file.
fn located<T>(src: &Source, r: petzlab::Result<T>) -> CliResult<T> {
    r.map_err(|e| match CliError::from(e) {
        CliError::Config(msg) => src.error(msg),
        other => other,
    })
}

#[derive(Serialize)]
struct ReversalSummary {
    kind: &'static str,
    dim: usize,
    tau: f64,
    steps: usize,
    eps: f64,
    min_fidelity: f64,
    endpoint_fidelity: f64,
    endpoint_trace_distance: f64,
    endpoint_purity: f64,
    min_backward_choi_eigenvalue: Option<f64>,
}

/// Forward run followed by the full (`reverse-qubit`) or dissipation-only
/// (`reverse-unitary`) reversal.
pub fn reversal(src: &Source, kind: ReversalKind) -> CliResult<Vec<Artifact>> {
    let cfg: DynamicsConfig = src.parse()?;
    let spec = cfg.forward_spec(src)?;
    let report = located(src, reversal_experiment(&spec, cfg.eps, kind))?;
    let label = match kind {
        ReversalKind::Full => "full",
        ReversalKind::HamiltonianOnly => "hamiltonian-only",
        ReversalKind::DissipationOnly => "dissipation-only",
    };
    let summary = ReversalSummary {
        kind: label,
        dim: spec.initial.rows(),
        tau: cfg.tau,
        steps: cfg.steps,
        eps: cfg.eps,
        min_fidelity: report.min_fidelity,
        endpoint_fidelity: report.endpoint_fidelity,
        endpoint_trace_distance: report.endpoint_trace_distance,
        endpoint_purity: purity(report.endpoint_state()),
        min_backward_choi_eigenvalue: report.min_backward_choi,
    };
    let plot = Gnuplot::new()
        .line("set xlabel 't'")
        .line("set multiplot layout 2,1")
        .line("set ylabel 'fidelity'")
        .line("plot 'reversal.csv' using 1:2 skip 1 with lines title 'F(gamma_t, backward)'")
        .line("set ylabel 'purity'")
        .line("plot 'reversal.csv' using 1:3 skip 1 with lines title 'forward', '' using 1:4 skip 1 with lines title 'backward'")
        .line("unset multiplot")
        .finish();
    Ok(vec![
        Artifact::csv("reversal.csv", 0, |w| report.write_csv(w))?,
        Artifact::csv("forward.csv", 0, |w| report.forward.write_csv(w))?,
        Artifact::csv("backward.csv", 0, |w| report.backward.write_csv(w))?,
        Artifact::json("summary.json", &summary)?,
        plot,
    ])
}

#[derive(Serialize)]
struct HardwareRunSummary {
    gamma: f64,
    xi: f64,
    initial_fidelity: f64,
    min_fidelity: f64,
    adiabaticity: f64,
    max_ancilla_population: f64,
    max_trace_drift: f64,
    substeps: usize,
}

#[derive(Serialize)]
struct XiSummary {
    gamma: f64,
    xi: f64,
    initial_fidelity: f64,
}

#[derive(Serialize)]
struct HardwareSummary {
    residual: bool,
    runs: Vec<HardwareRunSummary>,
    argmax_xi: Vec<XiSummary>,
}

/// Ancilla realization of the reverse generator over a `Γ × ξ` grid.
pub fn hardware(src: &Source) -> CliResult<Vec<Artifact>> {
    let cfg: HardwareConfig = src.parse()?;
    cfg.validate(src)?;
    let spec = cfg.dynamics.forward_spec(src)?;
    let sweep = located(src, hardware_sweep(&spec, &cfg.gammas, &cfg.xis, cfg.residual, cfg.dynamics.eps))?;
    let summary = HardwareSummary {
        residual: cfg.residual,
        runs: sweep
            .runs
            .iter()
            .map(|r| HardwareRunSummary {
                gamma: r.gamma,
                xi: r.xi,
                initial_fidelity: r.initial_fidelity(),
                min_fidelity: r.min_fidelity(),
                adiabaticity: r.adiabaticity,
                max_ancilla_population: r.max_ancilla_population,
                max_trace_drift: r.max_trace_drift,
                substeps: r.substeps,
            })
            .collect(),
        argmax_xi: sweep
            .argmax_xi()
            .into_iter()
            .map(|o| XiSummary {
                gamma: o.gamma,
                xi: o.xi,
                initial_fidelity: o.initial_fidelity,
            })
            .collect(),
    };
    let plot = Gnuplot::new()
        .line("set xlabel 't'")
        .line("set ylabel 'fidelity'")
        .line("set cblabel 'log10 Gamma'")
        .line("plot 'hardware.csv' using 3:4:(log10(column(1))) skip 1 with points pointtype 7 pointsize 0.3 palette title 'one curve per (Gamma, xi)'")
        .finish();
    Ok(vec![
        Artifact::csv("hardware.csv", 2, |w| sweep.write_csv(w))?,
        Artifact::json("summary.json", &summary)?,
        plot,
    ])
}

#[derive(Serialize)]
struct BlochSummary {
    nodes: usize,
    compared: usize,
    min_eigenvalue_threshold: f64,
    max_hamiltonian_deviation: f64,
    max_jump_deviation: f64,
}

/// Below this smallest eigenvalue the closed forms are not compared.
const BLOCH_CHECK_MIN_EIGENVALUE: f64 = 1e-8;

/// Closed-form qubit reverse generator along a forward trajectory, checked
/// node by node against the general construction.
pub fn bloch_check(src: &Source) -> CliResult<Vec<Artifact>> {
    let cfg: DynamicsConfig = src.parse()?;
    let spec = cfg.forward_spec(src)?;
    if spec.initial.rows() != 2 {
        return Err(src.error_at("hamiltonian", "bloch-check needs single-qubit dynamics"));
    }
    let traj = located(src, spec.run())?;
    let series = located(src, BlochSeries::from_trajectory(&traj, &spec.hamiltonian, &spec.jumps))?;
    let h_f = spec.hamiltonian.at(0.0);
    let jumps: Vec<_> = spec.jumps.iter().map(|j| j.at(0.0)).collect();
    let mut check = String::from("t,min_eigenvalue,hamiltonian_deviation,jump_deviation\n");
    let (mut max_h, mut max_l, mut compared) = (0.0f64, 0.0f64, 0usize);
    for (k, gamma) in traj.states.iter().enumerate() {
        let lam = located(src, min_eigenvalue(gamma))?;
        if lam <= BLOCH_CHECK_MIN_EIGENVALUE {
            continue;
        }
        let g = located(src, reverse_generator_at(gamma, &h_f, &jumps, cfg.eps))?;
        let h = QubitJump::from_operator(&g.hamiltonian).l;
        let dh = (0..3)
            .map(|i| (h[i].re - series.h_b[k][i]).abs().max(h[i].im.abs()))
            .fold(0.0, f64::max);
        let dl = g
            .jumps
            .iter()
            .zip(&series.l_b[k])
            .map(|(op, l)| {
                let comps = QubitJump::from_operator(op).l;
                (0..3).map(|i| (comps[i] - l[i]).norm()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        max_h = max_h.max(dh);
        max_l = max_l.max(dl);
        compared += 1;
        check.push_str(&format!("{:.16e},{lam:.16e},{dh:.16e},{dl:.16e}\n", series.times[k]));
    }
    let summary = BlochSummary {
        nodes: traj.len(),
        compared,
        min_eigenvalue_threshold: BLOCH_CHECK_MIN_EIGENVALUE,
        max_hamiltonian_deviation: max_h,
        max_jump_deviation: max_l,
    };
    let plot = Gnuplot::new()
        .line("set xlabel 't'")
        .line("set multiplot layout 2,1")
        .line("set ylabel 'h_B'")
        .line("plot for [c=2:4] 'bloch.csv' using 1:c skip 1 with lines title columnhead(c)")
        .line("set ylabel 'deviation'")
        .line("set logscale y")
        .line("plot 'bloch_check.csv' using 1:3 skip 1 with lines title 'H_B', '' using 1:4 skip 1 with lines title 'L_B'")
        .line("unset multiplot")
        .finish();
    Ok(vec![
        Artifact::csv("bloch.csv", 0, |w| series.write_csv(w))?,
        Artifact {
            name: "bloch_check.csv".into(),
            bytes: check.into_bytes(),
            time_column: Some(0),
        },
        Artifact::json("summary.json", &summary)?,
        plot,
    ])
}

#[derive(Serialize)]
struct Budget {
    restarts: usize,
    iters: usize,
    polish_iters: usize,
    gradient: &'static str,
    max_evals: usize,
    init_scale: f64,
    evaluations: usize,
    budget_exhausted: bool,
}

#[derive(Serialize)]
struct FiveQubitBaseline {
    f_avg: f64,
    infidelity: f64,
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct CodeSummary {
    F_avg_opt: f64,
    infidelity: f64,
    F_avg_seed: f64,
    seed: u64,
    n_physical: usize,
    d: usize,
    dt: f64,
    budget: Budget,
    /// `code_basis[i][j] = [re, im]` of `⟨j|i_L⟩`.
    code_basis: Vec<Vec<[f64; 2]>>,
    /// Pauli coefficients of the generator `A`, table order.
    coefficients: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    five_qubit: Option<FiveQubitBaseline>,
}

fn basis_amplitudes(code: &CodeBasis<f64>) -> Vec<Vec<[f64; 2]>> {
    code.vectors().iter().map(|v| v.iter().map(|z| [z.re, z.im]).collect()).collect()
}

fn basis_csv(code: &CodeBasis<f64>) -> Artifact {
    let mut s = String::from("state,component,re,im\n");
    for (i, v) in code.vectors().iter().enumerate() {
        for (j, z) in v.iter().enumerate() {
            s.push_str(&format!("{i},{j},{:.16e},{:.16e}\n", z.re, z.im));
        }
    }
    Artifact::text("code_basis.csv", s)
}

fn budget(opt: &OptimizedCode<f64>) -> Budget {
    let c = &opt.config;
    Budget {
        restarts: c.restarts,
        iters: c.iters,
        polish_iters: c.polish_iters,
        gradient: match c.gradient {
            petzlab::code::GradientKind::Analytic => "analytic",
            petzlab::code::GradientKind::CentralDifference => "central",
        },
        max_evals: c.max_evals,
        init_scale: c.init_scale,
        evaluations: opt.evaluations,
        budget_exhausted: opt.budget_exhausted,
    }
}

fn optimize(
    src: &Source,
    noise: &NoiseConfig,
    section: &OptimizerSection,
    dt: f64,
    d: usize,
    seed: u64,
) -> CliResult<OptimizedCode<f64>> {
    let model = noise.model(src)?;
    let opt = section.build(src, seed)?;
    located(src, optimize_code(&model, dt, d, &opt))
}

/// Searches for the code with the best Petz-recovery average fidelity.
pub fn code_optimize(src: &Source, seed: u64) -> CliResult<Vec<Artifact>> {
    let cfg: CodeOptimizeConfig = src.parse()?;
    cfg.validate(src)?;
    let opt = optimize(src, &cfg.noise, &cfg.optimizer, cfg.dt, cfg.d, seed)?;
    let five_qubit = if cfg.five_qubit_baseline {
        let noise = located(src, cfg.noise.model(src)?.channel(cfg.dt))?;
        let fe = located(src, petz_entanglement_fidelity(&noise, &CodeBasis::five_qubit(), cfg.optimizer.eps))?;
        let f = average_fidelity(fe, 2);
        Some(FiveQubitBaseline {
            f_avg: f,
            infidelity: 1.0 - f,
        })
    } else {
        None
    };
    let summary = CodeSummary {
        F_avg_opt: opt.f_avg,
        infidelity: opt.infidelity(),
        F_avg_seed: opt.f_avg_seed,
        seed,
        n_physical: cfg.noise.n,
        d: cfg.d,
        dt: cfg.dt,
        budget: budget(&opt),
        code_basis: basis_amplitudes(&opt.basis),
        coefficients: opt.coefficients.clone(),
        five_qubit,
    };
    let plot = Gnuplot::new()
        .line("set xlabel 'computational basis index'")
        .line("set ylabel '|amplitude|^2'")
        .line("set style data linespoints")
        .line(format!(
            "plot for [i=0:{}] 'code_basis.csv' using 2:(column(1) == i ? column(3)**2 + column(4)**2 : NaN) skip 1 title sprintf('|%d_L>', i)",
            cfg.d - 1
        ))
        .finish();
    Ok(vec![basis_csv(&opt.basis), Artifact::json("summary.json", &summary)?, plot])
}

#[derive(Serialize)]
struct Deviation {
    observable: String,
    noisy: f64,
    recovered: f64,
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct StrobeSummary {
    code: &'static str,
    seed: u64,
    n_physical: usize,
    logical_qubits: usize,
    dt: f64,
    T: f64,
    /// Petz-recovery average fidelity of the code over one interval.
    f_avg_code: f64,
    min_fidelity_noisy: f64,
    min_fidelity_recovered: f64,
    /// Nodes where the recovered fidelity is below the unrecovered one.
    dominance_violations: Vec<usize>,
    rms_deviation: Vec<Deviation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    optimizer: Option<Budget>,
    code_basis: Vec<Vec<[f64; 2]>>,
}

/// Stroboscopic recovery of a driven logical register.
pub fn strobe(src: &Source, seed: u64) -> CliResult<Vec<Artifact>> {
    let cfg: StrobeConfig = src.parse()?;
    cfg.validate(src)?;
    let (terms, n_logical) = cfg.drive(src)?;
    let model = cfg.noise.model(src)?;
    let d = 1usize << n_logical;
    let (code, label, optimizer) = match cfg.code {
        CodeChoice::Optimized => {
            let opt = optimize(src, &cfg.noise, &cfg.optimizer, cfg.dt, d, seed)?;
            let b = budget(&opt);
            (opt.basis, "optimized", Some(b))
        }
        CodeChoice::Computational => (
            located(src, CodeBasis::computational(cfg.noise.n, d))?,
            "computational",
            None,
        ),
        CodeChoice::BitFlip => {
            if cfg.noise.n != 3 || d != 2 {
                return Err(src.error_at("code", "bit-flip needs n = 3 and one logical qubit"));
            }
            (CodeBasis::bit_flip(), "bit-flip", None)
        }
        CodeChoice::FiveQubit => {
            if cfg.noise.n != 5 || d != 2 {
                return Err(src.error_at("code", "five-qubit needs n = 5 and one logical qubit"));
            }
            (CodeBasis::five_qubit(), "five-qubit", None)
        }
    };
    let opts = StrobeOptions {
        dt: cfg.dt,
        total: cfg.total,
        substeps: cfg.substeps,
        eps: cfg.eps,
    };
    let report = located(src, strobe_run(&code, &terms, &model, &opts))?;
    let noise = located(src, model.channel(cfg.dt))?;
    let f_avg_code = average_fidelity(located(src, petz_entanglement_fidelity(&noise, &code, cfg.eps))?, d);
    let summary = strobe_summary(&report, &cfg, &code, label, optimizer, seed, n_logical, f_avg_code);
    let z = z_observable(n_logical);
    let plot = Gnuplot::new()
        .line("set xlabel 't'")
        .line("set multiplot layout 2,1")
        .line(format!("set ylabel '<{z}_L>'"))
        .line(format!(
            "plot for [v in 'noise-free noisy recovered'] 'strobe.csv' using 1:(strcol(2) eq '{z}' && strcol(4) eq v ? column(3) : NaN) skip 1 with linespoints title v"
        ))
        .line("set ylabel 'fidelity to noise-free'")
        .line("plot for [v in 'noisy recovered'] 'strobe.csv' using 1:(strcol(2) eq 'fidelity' && strcol(4) eq v ? column(3) : NaN) skip 1 with linespoints title v")
        .line("unset multiplot")
        .finish();
    Ok(vec![
        Artifact::csv("strobe.csv", 0, |w| report.write_csv(w))?,
        basis_csv(&code),
        Artifact::json("summary.json", &summary)?,
        plot,
    ])
}

/// Rounding slack when comparing the paired fidelities.
const DOMINANCE_TOL: f64 = 1e-12;

/// `Z` on the first logical qubit, identity elsewhere.
fn z_observable(n_logical: usize) -> String {
    let mut s = String::from("Z");
    s.push_str(&"I".repeat(n_logical - 1));
    s
}

#[allow(clippy::too_many_arguments)]
fn strobe_summary(
    report: &StrobeReport<f64>,
    cfg: &StrobeConfig,
    code: &CodeBasis<f64>,
    label: &'static str,
    optimizer: Option<Budget>,
    seed: u64,
    n_logical: usize,
    f_avg_code: f64,
) -> StrobeSummary {
    let identity = PauliString::identity(n_logical);
    let rms_deviation = report
        .observables
        .iter()
        .filter(|p| **p != identity)
        .map(|p| Deviation {
            observable: p.to_string(),
            noisy: report.rms_deviation(Variant::Noisy, p).unwrap_or(f64::NAN),
            recovered: report.rms_deviation(Variant::Recovered, p).unwrap_or(f64::NAN),
        })
        .collect();
    let min = |v: &[f64]| v.iter().copied().fold(1.0, f64::min);
    StrobeSummary {
        code: label,
        seed,
        n_physical: cfg.noise.n,
        logical_qubits: n_logical,
        dt: cfg.dt,
        T: cfg.total,
        f_avg_code,
        min_fidelity_noisy: min(&report.fidelity_noisy),
        min_fidelity_recovered: min(&report.fidelity_recovered),
        dominance_violations: report.dominance_violations(DOMINANCE_TOL),
        rms_deviation,
        optimizer,
        code_basis: basis_amplitudes(code),
    }
}
