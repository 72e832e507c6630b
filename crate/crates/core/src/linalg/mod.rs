//! Dense complex linear algebra: matrices, spectra, exponentials, tensor
//! structure, Pauli bases and state fidelities.

pub mod eigen;
pub mod expm;
pub mod fidelity;
pub mod matrix;
pub mod pauli;
pub mod state;
pub mod tensor;

pub use eigen::{herm_eig, min_eigenvalue, psd_sqrt, sqrt_on_support, unitary_exp, EigenSystem, SupportRoots};
pub use expm::{expm, expm_action, solve};
pub use fidelity::{trace_distance, uhlmann_fidelity};
pub use matrix::{Matrix, Operator};
pub use pauli::{
    pauli_decompose, sigma_minus, sigma_plus, sigma_x, sigma_y, sigma_z, Pauli, PauliString,
    PauliTable,
};
pub use state::{check_state, purity, DensityMatrix};
pub use tensor::{embed, partial_trace, tensor, tensor_all};
