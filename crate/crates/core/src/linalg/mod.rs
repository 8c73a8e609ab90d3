//! Dense complex linear algebra for finite-dimensional quantum states.

mod channel;
mod eigen;
pub mod gates;
mod matrix;
mod povm;
mod state;
pub mod states;
mod subsystem;
mod validate;

pub use channel::{apply_channel, kraus_checks, KrausChannel};
pub use eigen::{hermitian_eigenvalues, min_eigenvalue, trace_norm_hermitian};
pub use matrix::{c, ComplexMatrix, C64};
pub use povm::{
    distribution_distance, measure_povm, measurement_distance, post_measurement_state, povm_checks, Distribution,
    Povm,
};
pub use state::{mix, trace_distance, DensityOperator, Ensemble};
pub(crate) use state::{states_close, trace_distance_matrices};
pub(crate) use subsystem::partial_trace_matrix;
pub use subsystem::{embed_operator, partial_trace, tensor, Subsystems};
pub use validate::{density_checks, effect_checks, Check, ValidationReport};
