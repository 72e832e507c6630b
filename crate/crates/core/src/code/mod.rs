//! Code-space recovery: noise models, Petz recovery on a code subspace,
//! entanglement and average fidelity, code optimization and stroboscopic
//! recovery of driven logical dynamics.

pub mod basis;
pub mod fidelity;
pub mod noise;
pub mod optimize;
pub mod recovery;
pub mod strobe;

pub use basis::{five_qubit_stabilizers, CodeBasis, LogicalOperators};
pub use fidelity::{average_fidelity, entanglement_fidelity, haar_average_fidelity, petz_entanglement_fidelity};
pub use noise::{build_noise, NoiseKind, NoiseModel, MAX_NOISE_QUBITS};
pub use optimize::{optimize_code, optimize_code_with, CodeObjective, GradientKind, OptimizedCode, OptimizerConfig};
pub use recovery::{petz_code_channel, petz_code_channel_continuous};
pub use strobe::{strobe_run, DriveTerm, LogicalDrive, StrobeOptions, StrobeReport, Variant, Waveform};
