//! Continuous-time Petz recovery for Lindblad dynamics.
//!
//! The crate builds the reverse generator that retraces a forward Lindblad
//! trajectory, simulates its ancilla-based realization, and recovers logical
//! states stored in small multi-qubit codes.
//!
//! * [`linalg`]: dense complex operators, Hermitian spectra, fidelities,
//!   tensor products and Pauli expansions.
//! * [`lindblad`]: generators, superoperators and trajectory propagation.
//! * [`petz`]: the Petz channel, reverse generators and reversal runs.
//! * [`bloch`]: closed forms for a single qubit in Bloch coordinates.
//! * [`hardware`]: system plus decaying ancillas realizing the reverse jumps.
//! * [`code`]: noise models, code-space recovery, code optimization and
//!   stroboscopic recovery.
//! * [`optim`]: the minimizers used by the code search.
//!
//! Everything is generic over the scalar type ([`Real`], `f32` or `f64`);
//! the aliases below fix it to one of the two.
//!
//! ```
//! use petzlab::linalg::{sigma_minus, sigma_x, sigma_z, DensityMatrix};
//! use petzlab::petz::{reversal_experiment, ForwardSpec, ReversalKind};
//!
//! let spec = ForwardSpec::constant(
//!     &sigma_x::<f64>().scale_re(0.3) + &sigma_z(),
//!     vec![sigma_minus::<f64>().scale_re(0.4)],
//!     DensityMatrix::basis(2, 1).into_operator(),
//!     2.0,
//!     400,
//! );
//! let report = reversal_experiment(&spec, 1e-12, ReversalKind::Full).unwrap();
//! assert!(report.min_fidelity > 0.999);
//! ```

pub mod bloch;
pub mod code;
pub mod error;
pub mod hardware;
pub mod lindblad;
pub mod linalg;
pub mod optim;
pub mod petz;
pub mod scalar;

pub use error::{Error, Result};
pub use lindblad::{Lindbladian, Schedule, Superoperator, Trajectory};
pub use linalg::{DensityMatrix, Matrix, Operator};
pub use scalar::{Real, C};

pub type Operator64 = Operator<f64>;
pub type DensityMatrix64 = DensityMatrix<f64>;
pub type Superoperator64 = Superoperator<f64>;
pub type Lindbladian64 = Lindbladian<f64>;
pub type Trajectory64 = Trajectory<f64>;
pub type CodeBasis64 = code::CodeBasis<f64>;

pub type Operator32 = Operator<f32>;
pub type DensityMatrix32 = DensityMatrix<f32>;
pub type Superoperator32 = Superoperator<f32>;
pub type Lindbladian32 = Lindbladian<f32>;
pub type Trajectory32 = Trajectory<f32>;
pub type CodeBasis32 = code::CodeBasis<f32>;
