//! Petz recovery: the channel form, the continuous-time reverse generator and
//! full reversal experiments.

pub mod experiment;
pub mod map;
pub mod reverse;

pub use experiment::{reversal_experiment, reverse_generator, ForwardSpec, ReversalKind, ReversalReport};
pub use map::{petz_channel, PetzMap};
pub use reverse::{
    build_dissipation_only_reverse, build_reverse_generator, correction_hamiltonian, reverse_hamiltonian_derivative_form,
    reverse_generator_at, reverse_jumps, ReverseGenerator, SpectralShift,
};
