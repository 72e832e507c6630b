//! Command-line runner for the petzlab experiments.
//!
//! `petzlab <experiment> --config <path> --out <dir> --seed <n> [--threads <n>]`
//! reads a JSON config, runs one experiment and writes CSV/JSON artifacts, a
//! gnuplot recipe and `manifest.json` into the output directory.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use petzlab::petz::ReversalKind;

pub use error::{CliError, CliResult};
use output::{Artifact, Manifest};

/// Experiments known to the runner.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    /// Full reversal of a forward trajectory.
    ReverseQubit,
    /// Dissipation-only reversal, ending on the unitary orbit.
    ReverseUnitary,
    /// Ancilla hardware realization over `Γ` and `ξ`.
    HardwareSweep,
    /// Code search for Petz recovery.
    CodeOptimize,
    /// Stroboscopic recovery of a driven logical register.
    Strobe,
    /// Qubit closed forms against the general construction.
    BlochCheck,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::ReverseQubit,
        Experiment::ReverseUnitary,
        Experiment::HardwareSweep,
        Experiment::CodeOptimize,
        Experiment::Strobe,
        Experiment::BlochCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::ReverseQubit => "reverse-qubit",
            Experiment::ReverseUnitary => "reverse-unitary",
            Experiment::HardwareSweep => "hardware-sweep",
            Experiment::CodeOptimize => "code-optimize",
            Experiment::Strobe => "strobe",
            Experiment::BlochCheck => "bloch-check",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| format!("unknown experiment {s:?}"))
    }
}

/// One invocation.
#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub name: Experiment,
    pub config_path: PathBuf,
    pub output_dir: PathBuf,
    pub seed: u64,
    /// Worker threads actually in use, recorded in the manifest.
    pub threads: usize,
}

/// Runs the experiment and writes its artifacts. Nothing is written when the
/// run fails.
pub fn run(spec: &ExperimentSpec) -> CliResult<Manifest> {
    let start = Instant::now();
    let src = config::Source::read(&spec.config_path)?;
    let artifacts: Vec<Artifact> = match spec.name {
        Experiment::ReverseQubit => experiments::reversal(&src, ReversalKind::Full)?,
        Experiment::ReverseUnitary => experiments::reversal(&src, ReversalKind::DissipationOnly)?,
        Experiment::HardwareSweep => experiments::hardware(&src)?,
        Experiment::CodeOptimize => experiments::code_optimize(&src, spec.seed)?,
        Experiment::Strobe => experiments::strobe(&src, spec.seed)?,
        Experiment::BlochCheck => experiments::bloch_check(&src)?,
    };
    output::check_finite(&artifacts)?;
    output::prepare_dir(&spec.output_dir)?;
    let manifest = Manifest {
        experiment: spec.name.name().into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: spec.config_path.display().to_string(),
        config_sha256: output::sha256_hex(src.text.as_bytes()),
        seed: spec.seed,
        threads: spec.threads,
        wall_time_s: start.elapsed().as_secs_f64(),
        files: Vec::new(),
        outputs_sha256: String::new(),
    };
    output::write_all(&spec.output_dir, &artifacts, manifest)
}
