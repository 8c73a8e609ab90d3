//! Structured state spaces, access-control matrices and the reference-monitor audit.

mod audit;
mod matrix;

pub use audit::{audit_rm, audit_rm_with, fit_rm_constants, fit_rm_constants_with, KRange, RmCondition, RmFit, RmReport, RmWitness};
pub use matrix::{
    delta_read, discriminable, matrix_satisfies_policy, AccessMatrix, LocationFamily, LocationSet, LocationSpace,
    PolicyCheck, PolicyViolation,
};

#[cfg(test)]
mod tests;
