//! Unwinding certificates and the canonical relations from the completeness arguments.

mod check;
mod oracle;

pub use check::{
    check_unwinding_one, check_unwinding_one_with, check_unwinding_two, check_unwinding_two_with,
    lower_bound_from_unwinding, lower_bound_from_unwinding_with, Condition, Eps, EpsMode, LowerBound, PairWitness,
    UnwindingReport, LOCAL, OBSERVATION, STEP,
};
pub use oracle::{
    canonical_equivalence, canonical_pseudodistance, CanonicalEquivalence, CanonicalPseudoDistance, Equivalence,
    PseudoDistance, ReducedState, TableDistance, TableEquivalence, Total, Trace, Zero,
};

#[cfg(test)]
mod tests;
