//! JSON experiment configs.
//!
//! Every section rejects unknown fields. Syntax and schema errors carry the
//! line and column reported by the parser; range checks done after parsing
//! point at the line where the offending key first appears.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Deserialize;

use petzlab::code::{GradientKind, NoiseKind, NoiseModel, OptimizerConfig, Waveform};
use petzlab::linalg::{DensityMatrix, PauliString};
use petzlab::petz::ForwardSpec;
use petzlab::{Operator64, C};

use crate::error::{CliError, CliResult};

/// Raw config text together with its origin, for diagnostics.
#[derive(Clone, Debug)]
pub struct Source {
    pub path: PathBuf,
    pub text: String,
}

impl Source {
    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("{}: cannot read config: {e}", path.display())))?;
        Ok(Self {
            path: path.to_path_buf(),
            text,
        })
    }

    pub fn from_text(path: impl Into<PathBuf>, text: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            text: text.into(),
        }
    }

    pub fn parse<T: DeserializeOwned>(&self) -> CliResult<T> {
        serde_json::from_str(&self.text).map_err(|e| {
            let msg = e.to_string();
            let msg = msg.rsplit_once(" at line ").map_or(msg.as_str(), |(m, _)| m);
            CliError::config(format!("{}:{}:{}: {msg}", self.path.display(), e.line(), e.column()))
        })
    }

    /// 1-based line of the first occurrence of `"key":`.
    pub fn line_of(&self, key: &str) -> Option<usize> {
        let quoted = format!("\"{key}\"");
        for (i, line) in self.text.lines().enumerate() {
            let mut rest = line;
            while let Some(p) = rest.find(&quoted) {
                let after = rest[p + quoted.len()..].trim_start();
                if after.starts_with(':') {
                    return Some(i + 1);
                }
                rest = &rest[p + quoted.len()..];
            }
        }
        None
    }

    /// Config error located at `key`.
    pub fn error_at(&self, key: &str, msg: impl AsRef<str>) -> CliError {
        match self.line_of(key) {
            Some(line) => CliError::config(format!("{}:{line}: {key}: {}", self.path.display(), msg.as_ref())),
            None => CliError::config(format!("{}: {key}: {}", self.path.display(), msg.as_ref())),
        }
    }

    /// Config error without a specific key.
    pub fn error(&self, msg: impl AsRef<str>) -> CliError {
        CliError::config(format!("{}: {}", self.path.display(), msg.as_ref()))
    }
}

/// Real number or `[re, im]` pair.
#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Coeff {
    Real(f64),
    Complex([f64; 2]),
}

impl Coeff {
    pub fn value(self) -> C<f64> {
        match self {
            Coeff::Real(x) => C::new(x, 0.0),
            Coeff::Complex([re, im]) => C::new(re, im),
        }
    }
}

/// Operator written as Pauli strings with coefficients, e.g.
/// `{"X": 0.3, "Z": 1.0}` or `{"XI": [0, -0.2]}`.
pub type PauliSum = BTreeMap<String, Coeff>;

/// Builds `Σ c_P P`; all strings must have the same length.
pub fn pauli_operator(src: &Source, key: &str, sum: &PauliSum, n_qubits: Option<usize>) -> CliResult<Operator64> {
    let mut n = n_qubits;
    let mut acc: Option<Operator64> = None;
    for (label, coeff) in sum {
        let p: PauliString = label
            .parse()
            .map_err(|e: petzlab::Error| src.error_at(key, format!("{label:?}: {e}")))?;
        if p.is_empty() {
            return Err(src.error_at(key, "empty Pauli string"));
        }
        match n {
            Some(m) if m != p.len() => {
                return Err(src.error_at(key, format!("{label:?} acts on {} qubits, expected {m}", p.len())));
            }
            _ => n = Some(p.len()),
        }
        let z = coeff.value();
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(src.error_at(key, format!("coefficient of {label} is not finite")));
        }
        let term = p.matrix::<f64>().scale(z);
        acc = Some(match acc {
            Some(a) => &a + &term,
            None => term,
        });
    }
    match (acc, n) {
        (Some(a), _) => Ok(a),
        (None, Some(m)) => Ok(Operator64::zeros(1 << m, 1 << m)),
        (None, None) => Err(src.error_at(key, "no terms; cannot infer the number of qubits")),
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub enum InitialState {
    /// Computational basis state `|k⟩`.
    Basis(usize),
    /// Qubit state with the given Bloch vector.
    Bloch([f64; 3]),
}

fn default_eps() -> f64 {
    1e-12
}

/// Time-independent forward dynamics used by the reversal, hardware and
/// Bloch experiments.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsConfig {
    pub hamiltonian: PauliSum,
    #[serde(default)]
    pub jumps: Vec<PauliSum>,
    pub initial: InitialState,
    pub tau: f64,
    pub steps: usize,
    /// Spectral cutoff for inverse square roots.
    #[serde(default = "default_eps")]
    pub eps: f64,
}

impl DynamicsConfig {
    pub fn forward_spec(&self, src: &Source) -> CliResult<ForwardSpec<f64>> {
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(src.error_at("tau", format!("must be finite and > 0, got {}", self.tau)));
        }
        if self.steps == 0 {
            return Err(src.error_at("steps", "must be ≥ 1"));
        }
        check_eps(src, self.eps)?;
        let h = pauli_operator(src, "hamiltonian", &self.hamiltonian, None)?;
        let n = h.rows().trailing_zeros() as usize;
        let jumps = self
            .jumps
            .iter()
            .map(|j| pauli_operator(src, "jumps", j, Some(n)))
            .collect::<CliResult<Vec<_>>>()?;
        let dim = h.rows();
        let initial = match &self.initial {
            InitialState::Basis(k) if *k < dim => DensityMatrix::basis(dim, *k).into_operator(),
            InitialState::Basis(k) => {
                return Err(src.error_at("basis", format!("index {k} out of range for dimension {dim}")));
            }
            InitialState::Bloch(r) => {
                if dim != 2 {
                    return Err(src.error_at("bloch", "Bloch initial states need a single qubit"));
                }
                petzlab::bloch::BlochState::new(*r)
                    .map_err(|e| src.error_at("bloch", e.to_string()))?
                    .to_density()
            }
        };
        Ok(ForwardSpec::constant(h, jumps, initial, self.tau, self.steps))
    }
}

fn check_eps(src: &Source, eps: f64) -> CliResult<()> {
    if !(eps > 0.0) || eps >= 1.0 {
        return Err(src.error_at("eps", format!("must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardwareConfig {
    pub dynamics: DynamicsConfig,
    /// Ancilla decay rates `Γ`.
    pub gammas: Vec<f64>,
    /// Rescaling factors `ξ ≥ 1`.
    #[serde(default = "unit_xi")]
    pub xis: Vec<f64>,
    /// Keep the forward dissipator on the system during the backward run.
    #[serde(default)]
    pub residual: bool,
}

fn unit_xi() -> Vec<f64> {
    vec![1.0]
}

impl HardwareConfig {
    pub fn validate(&self, src: &Source) -> CliResult<()> {
        if self.gammas.is_empty() {
            return Err(src.error_at("gammas", "needs at least one value"));
        }
        if let Some(g) = self.gammas.iter().find(|g| !(**g > 0.0) || !g.is_finite()) {
            return Err(src.error_at("gammas", format!("{g} is not a finite positive rate")));
        }
        if self.xis.is_empty() {
            return Err(src.error_at("xis", "needs at least one value"));
        }
        if let Some(x) = self.xis.iter().find(|x| !(**x >= 1.0) || !x.is_finite()) {
            return Err(src.error_at("xis", format!("{x} is not a finite factor ≥ 1")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKindName {
    AmplitudeDamping,
    Dephasing,
    Correlated,
    Composite,
    CompositeDephasing,
}

impl From<NoiseKindName> for NoiseKind {
    fn from(k: NoiseKindName) -> Self {
        match k {
            NoiseKindName::AmplitudeDamping => NoiseKind::AmplitudeDamping,
            NoiseKindName::Dephasing => NoiseKind::Dephasing,
            NoiseKindName::Correlated => NoiseKind::Correlated,
            NoiseKindName::Composite => NoiseKind::Composite,
            NoiseKindName::CompositeDephasing => NoiseKind::CompositeDephasing,
        }
    }
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub kind: NoiseKindName,
    #[serde(default)]
    pub g1: f64,
    #[serde(default)]
    pub g2: f64,
    /// Physical qubits.
    pub n: usize,
    /// Both `σ₋σ₊` and `σ₊σ₋` on each neighbouring pair.
    #[serde(default = "yes")]
    pub both_orderings: bool,
}

impl NoiseConfig {
    pub fn model(&self, src: &Source) -> CliResult<NoiseModel<f64>> {
        for (key, g) in [("g1", self.g1), ("g2", self.g2)] {
            if !(g >= 0.0) || !g.is_finite() {
                return Err(src.error_at(key, format!("must be finite and ≥ 0, got {g}")));
            }
        }
        NoiseModel::new(self.kind.into(), self.g1, self.g2, self.n)
            .map(|m| m.with_both_orderings(self.both_orderings))
            .map_err(|e| src.error_at("n", e.to_string()))
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum GradientName {
    Analytic,
    Central,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerSection {
    pub restarts: usize,
    /// Simplex iterations per start.
    pub iters: usize,
    /// Quasi-Newton iterations per start.
    pub polish_iters: usize,
    pub gradient: GradientName,
    pub max_evals: usize,
    pub init_scale: f64,
    /// Must match `--seed` when given.
    pub seed: Option<u64>,
    pub eps: f64,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        let d = OptimizerConfig::<f64>::default();
        Self {
            restarts: d.restarts,
            iters: d.iters,
            polish_iters: d.polish_iters,
            gradient: GradientName::Analytic,
            max_evals: d.max_evals,
            init_scale: d.init_scale,
            seed: None,
            eps: d.eps,
        }
    }
}

impl OptimizerSection {
    pub fn build(&self, src: &Source, seed: u64) -> CliResult<OptimizerConfig<f64>> {
        if let Some(s) = self.seed {
            if s != seed {
                return Err(src.error_at("seed", format!("config seed {s} disagrees with --seed {seed}")));
            }
        }
        if !(self.init_scale > 0.0) || !self.init_scale.is_finite() {
            return Err(src.error_at("init_scale", "must be finite and > 0"));
        }
        if self.max_evals == 0 {
            return Err(src.error_at("max_evals", "must be ≥ 1"));
        }
        check_eps(src, self.eps)?;
        Ok(OptimizerConfig {
            restarts: self.restarts,
            iters: self.iters,
            polish_iters: self.polish_iters,
            gradient: match self.gradient {
                GradientName::Analytic => GradientKind::Analytic,
                GradientName::Central => GradientKind::CentralDifference,
            },
            max_evals: self.max_evals,
            seed,
            init_scale: self.init_scale,
            eps: self.eps,
        })
    }
}

fn default_d() -> usize {
    2
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeOptimizeConfig {
    pub noise: NoiseConfig,
    pub dt: f64,
    /// Logical dimension.
    #[serde(default = "default_d")]
    pub d: usize,
    #[serde(default)]
    pub optimizer: OptimizerSection,
    /// Also report Petz recovery on the fixed five-qubit code (needs `n = 5`, `d = 2`).
    #[serde(default)]
    pub five_qubit_baseline: bool,
}

impl CodeOptimizeConfig {
    pub fn validate(&self, src: &Source) -> CliResult<()> {
        check_dt(src, self.dt)?;
        if self.d == 0 || self.d > 1 << self.noise.n.min(16) {
            return Err(src.error_at("d", format!("logical dimension {} does not fit in {} qubits", self.d, self.noise.n)));
        }
        if self.five_qubit_baseline && (self.noise.n != 5 || self.d != 2) {
            return Err(src.error_at("five_qubit_baseline", "needs n = 5 and d = 2"));
        }
        Ok(())
    }
}

fn check_dt(src: &Source, dt: f64) -> CliResult<()> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(src.error_at("dt", format!("must be finite and > 0, got {dt}")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum WaveName {
    Sin,
    Cos,
}

impl From<WaveName> for Waveform {
    fn from(w: WaveName) -> Self {
        match w {
            WaveName::Sin => Waveform::Sin,
            WaveName::Cos => Waveform::Cos,
        }
    }
}

/// `coeff · kind(freq · t) · P_L`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveConfig {
    pub coeff: f64,
    pub freq: f64,
    pub kind: WaveName,
    pub pauli_string: String,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum CodeChoice {
    /// Optimize the code for the noise first.
    #[default]
    Optimized,
    /// `|i⟩_L = |i⟩` in the computational basis.
    Computational,
    BitFlip,
    FiveQubit,
}

fn default_substeps() -> usize {
    20
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrobeConfig {
    pub noise: NoiseConfig,
    pub dt: f64,
    #[serde(rename = "T")]
    pub total: f64,
    pub hamiltonian: Vec<DriveConfig>,
    /// Logical qubits; inferred from the drive when omitted.
    #[serde(default)]
    pub logical_qubits: Option<usize>,
    #[serde(default)]
    pub code: CodeChoice,
    #[serde(default)]
    pub optimizer: OptimizerSection,
    #[serde(default = "default_substeps")]
    pub substeps: usize,
    #[serde(default = "default_eps")]
    pub eps: f64,
}

impl StrobeConfig {
    pub fn validate(&self, src: &Source) -> CliResult<()> {
        check_dt(src, self.dt)?;
        if !(self.total >= 0.0) || !self.total.is_finite() {
            return Err(src.error_at("T", format!("must be finite and ≥ 0, got {}", self.total)));
        }
        let k = (self.total / self.dt).round();
        if (k * self.dt - self.total).abs() > 1e-9 * self.total.max(1.0) {
            return Err(src.error_at("T", format!("{} is not a multiple of dt = {}", self.total, self.dt)));
        }
        if self.substeps == 0 {
            return Err(src.error_at("substeps", "must be ≥ 1"));
        }
        check_eps(src, self.eps)?;
        for d in &self.hamiltonian {
            if !d.coeff.is_finite() || !d.freq.is_finite() {
                return Err(src.error_at("hamiltonian", "drive coefficients must be finite"));
            }
        }
        Ok(())
    }

    /// Drive terms and the number of logical qubits.
    pub fn drive(&self, src: &Source) -> CliResult<(Vec<petzlab::code::DriveTerm<f64>>, usize)> {
        let mut n = self.logical_qubits;
        let mut out = Vec::with_capacity(self.hamiltonian.len());
        for d in &self.hamiltonian {
            let p: PauliString = d
                .pauli_string
                .parse()
                .map_err(|e: petzlab::Error| src.error_at("pauli_string", format!("{:?}: {e}", d.pauli_string)))?;
            match n {
                Some(m) if m != p.len() => {
                    return Err(src.error_at(
                        "pauli_string",
                        format!("{:?} acts on {} logical qubits, expected {m}", d.pauli_string, p.len()),
                    ));
                }
                _ => n = Some(p.len()),
            }
            out.push(petzlab::code::DriveTerm {
                coeff: d.coeff,
                freq: d.freq,
                waveform: d.kind.into(),
                pauli: p,
            });
        }
        let n = n.ok_or_else(|| src.error_at("hamiltonian", "empty drive; set logical_qubits"))?;
        if n == 0 || 1 << n > 1 << self.noise.n {
            return Err(src.error_at("hamiltonian", format!("{n} logical qubits do not fit in {} physical", self.noise.n)));
        }
        Ok((out, n))
    }
}
