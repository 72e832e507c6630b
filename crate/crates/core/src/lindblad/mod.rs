//! Lindblad generators, their superoperators and time-ordered propagation.

pub mod channel;
pub mod generator;
pub mod propagate;
pub mod schedule;
pub mod superop;

pub use channel::{Channel, Compose, LindbladFlow};
pub use generator::{Generator, Lindbladian};
pub use propagate::{
    channel_from, evolve, evolve_adjoint, propagate, Diagnostics, Method, PropagateOptions, Trajectory,
};
pub use schedule::{Grid, SampledSchedule, Schedule};
pub use superop::Superoperator;
