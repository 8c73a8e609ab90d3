//! Direct products and generalised compositions of quantum systems.

mod bound;
mod build;

pub use bound::{
    check_composition_bound, check_composition_bound_with, check_generalised_bound, check_generalised_bound_with,
    CompositionBound, GeneralisedBound,
};
pub use build::{
    compose, compose_direct, compose_generalised, policies_compatible, union_policy, CompositionKind, CompositionSpec,
    ExtensionChannel, GeneralisedSpec, SeparableComponent,
};
