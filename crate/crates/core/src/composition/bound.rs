use serde::Serialize;

use super::build::{compose_direct, union_policy, validate_generalised, CompositionKind, CompositionSpec};
use crate::automaton::{Policy, QuantumSystem};
use crate::config::{Config, TOL_BOUND};
use crate::error::{Error, Result};
use crate::linalg::Ensemble;
use crate::security::{insecurity_bounded_with, strong_insecurity_bounded_with, StrongReport, Witness};

/// `K_t(S ⊗ S′)` against `K_t(S) + K_t(S′)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompositionBound {
    pub depth: usize,
    pub composed: f64,
    pub left: f64,
    pub right: f64,
    pub bound: f64,
    pub gap: f64,
    pub holds: bool,
    pub witness: Witness,
}

pub fn check_composition_bound(
    left: &QuantumSystem,
    p: &Policy,
    right: &QuantumSystem,
    q: &Policy,
    depth: usize,
) -> Result<CompositionBound> {
    check_composition_bound_with(left, p, right, q, depth, &Config::default())
}

pub fn check_composition_bound_with(
    left: &QuantumSystem,
    p: &Policy,
    right: &QuantumSystem,
    q: &Policy,
    depth: usize,
    cfg: &Config,
) -> Result<CompositionBound> {
    let joint_policy = union_policy(p, q)?;
    let joint = compose_direct(left, right)?;
    let composed = insecurity_bounded_with(&joint, &joint_policy, depth, cfg)?;
    let l = insecurity_bounded_with(left, p, depth, cfg)?.value;
    let r = insecurity_bounded_with(right, q, depth, cfg)?.value;
    let bound = l + r;
    Ok(CompositionBound {
        depth,
        composed: composed.value,
        left: l,
        right: r,
        bound,
        gap: bound - composed.value,
        holds: composed.value <= bound + TOL_BOUND,
        witness: composed.witness,
    })
}

/// `K_t(T)` against lower bounds on `SK_t(S) + SK_t(S′)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneralisedBound {
    pub depth: usize,
    pub composed: f64,
    pub left: StrongReport,
    pub right: StrongReport,
    /// Sum of the best available decomposition values.
    pub strongest: f64,
    /// Sum of the trivial-decomposition values, `K_t(S) + K_t(S′)`.
    pub trivial: f64,
    pub gap: f64,
    /// Whether the strongest bound holds; this is the check that matters.
    pub holds: bool,
    /// Informational: the weaker trivial bound was exceeded.
    pub trivial_exceeded: bool,
    pub witness: Witness,
}

pub fn check_generalised_bound(
    spec: &CompositionSpec,
    p: &Policy,
    q: &Policy,
    left_decompositions: &[Ensemble],
    right_decompositions: &[Ensemble],
    depth: usize,
) -> Result<GeneralisedBound> {
    check_generalised_bound_with(spec, p, q, left_decompositions, right_decompositions, depth, &Config::default())
}

/// The marginal decompositions induced by the declared separable form of `σ0`
/// are always added to the supplied ones.
pub fn check_generalised_bound_with(
    spec: &CompositionSpec,
    p: &Policy,
    q: &Policy,
    left_decompositions: &[Ensemble],
    right_decompositions: &[Ensemble],
    depth: usize,
    cfg: &Config,
) -> Result<GeneralisedBound> {
    let CompositionKind::Generalised(g) = &spec.kind else {
        return Err(Error::model("expected a generalised composition spec"));
    };
    let joint_policy = union_policy(p, q)?;
    let validated = validate_generalised(spec)?;
    let Some(parts) = &g.decomposition else {
        return Err(Error::Extension {
            condition: "(c) separable initial state",
            detail: "no separable decomposition of sigma0 was declared".into(),
            residual: f64::NAN,
        });
    };
    if validated.product.is_none() {
        return Err(Error::Extension {
            condition: "(c) separable channels",
            detail: "some extension is not given in product form".into(),
            residual: f64::NAN,
        });
    }
    if !g.commutativity_declared {
        return Err(Error::Extension {
            condition: "(d) commutativity",
            detail: "commutativity was not declared, so it was not verified".into(),
            residual: f64::NAN,
        });
    }
    let induced_left = Ensemble::new(parts.iter().map(|c| (c.weight, c.left.clone())).collect())?;
    let induced_right = Ensemble::new(parts.iter().map(|c| (c.weight, c.right.clone())).collect())?;
    let mut lefts = left_decompositions.to_vec();
    lefts.push(induced_left);
    let mut rights = right_decompositions.to_vec();
    rights.push(induced_right);

    let composed = insecurity_bounded_with(&validated.system, &joint_policy, depth, cfg)?;
    let left = strong_insecurity_bounded_with(&spec.left, p, &lefts, depth, cfg)?;
    let right = strong_insecurity_bounded_with(&spec.right, q, &rights, depth, cfg)?;
    let strongest = left.value + right.value;
    let trivial = left.trivial_value() + right.trivial_value();
    Ok(GeneralisedBound {
        depth,
        composed: composed.value,
        strongest,
        trivial,
        gap: strongest - composed.value,
        holds: composed.value <= strongest + TOL_BOUND,
        trivial_exceeded: composed.value > trivial + TOL_BOUND,
        witness: composed.witness,
        left,
        right,
    })
}
