//! Per-agent equivalence relations and pseudo-distances on states.

use crate::automaton::QuantumSystem;
use crate::config::TOL_VALIDATION;
use crate::error::{Error, Result};
use crate::linalg::{partial_trace_matrix, states_close, trace_distance_matrices, DensityOperator, Subsystems};

/// `ρ ∼ᵃ σ`.
pub trait Equivalence: Sync {
    fn name(&self) -> String;
    fn equivalent(&self, s: &QuantumSystem, agent: usize, rho: &DensityOperator, sigma: &DensityOperator) -> Result<bool>;
}

/// `δ_a(ρ, σ)`.
pub trait PseudoDistance: Sync {
    fn name(&self) -> String;
    fn delta(&self, s: &QuantumSystem, agent: usize, rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64>;
}

/// Every pair is related.
#[derive(Debug, Clone, Copy, Default)]
pub struct Total;

impl Equivalence for Total {
    fn name(&self) -> String {
        "total".into()
    }

    fn equivalent(&self, _: &QuantumSystem, _: usize, _: &DensityOperator, _: &DensityOperator) -> Result<bool> {
        Ok(true)
    }
}

/// `δ ≡ 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Zero;

impl PseudoDistance for Zero {
    fn name(&self) -> String {
        "zero".into()
    }

    fn delta(&self, _: &QuantumSystem, _: usize, _: &DensityOperator, _: &DensityOperator) -> Result<f64> {
        Ok(0.0)
    }
}

/// Trace distance of the whole state, for every agent. As an equivalence: state equality.
#[derive(Debug, Clone, Copy, Default)]
pub struct Trace;

impl PseudoDistance for Trace {
    fn name(&self) -> String {
        "trace".into()
    }

    fn delta(&self, _: &QuantumSystem, _: usize, rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
        Ok(trace_distance_matrices(rho.matrix(), sigma.matrix()))
    }
}

impl Equivalence for Trace {
    fn name(&self) -> String {
        "trace".into()
    }

    fn equivalent(&self, _: &QuantumSystem, _: usize, rho: &DensityOperator, sigma: &DensityOperator) -> Result<bool> {
        Ok(states_close(rho.matrix(), sigma.matrix(), TOL_VALIDATION))
    }
}

/// `δ_a(ρ, σ) = max_{K ∈ views(a)} d(tr_{N∖K} ρ, tr_{N∖K} σ)`, 0 when `views(a)` is empty.
/// As an equivalence: `δ_a ≤ 1e-9`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedState {
    label: String,
    views: Vec<Vec<Subsystems>>,
}

impl ReducedState {
    /// One view per agent index.
    pub fn new(label: impl Into<String>, views: Vec<Vec<Subsystems>>) -> Self {
        Self {
            label: label.into(),
            views,
        }
    }

    /// Each agent sees the reduced state on the factors its measurements are declared to act on.
    pub fn observed_factors(s: &QuantumSystem) -> Result<Self> {
        let views = s
            .agents()
            .iter()
            .map(|a| {
                let f = s.capability(a)?.factors().ok_or_else(|| {
                    Error::Oracle(format!("agent {a} has no declared observed factors for the reduced-state oracle"))
                })?;
                Ok(vec![Subsystems::new(s.dims().to_vec(), f.iter().copied().collect())?])
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new("reduced-state", views))
    }

    pub fn views(&self) -> &[Vec<Subsystems>] {
        &self.views
    }

    fn value(&self, s: &QuantumSystem, agent: usize, rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
        let views = self
            .views
            .get(agent)
            .ok_or_else(|| Error::Oracle(format!("no views for agent index {agent}")))?;
        let mut best: f64 = 0.0;
        for v in views {
            if v.total_dim() != s.dim() {
                return Err(Error::dim("view does not factor the system space"));
            }
            let d = if v.is_everything() {
                trace_distance_matrices(rho.matrix(), sigma.matrix())
            } else {
                trace_distance_matrices(&partial_trace_matrix(rho.matrix(), v), &partial_trace_matrix(sigma.matrix(), v))
            };
            best = best.max(d);
        }
        Ok(best)
    }
}

impl PseudoDistance for ReducedState {
    fn name(&self) -> String {
        self.label.clone()
    }

    fn delta(&self, s: &QuantumSystem, agent: usize, rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
        self.value(s, agent, rho, sigma)
    }
}

impl Equivalence for ReducedState {
    fn name(&self) -> String {
        self.label.clone()
    }

    fn equivalent(&self, s: &QuantumSystem, agent: usize, rho: &DensityOperator, sigma: &DensityOperator) -> Result<bool> {
        Ok(self.value(s, agent, rho, sigma)? <= TOL_VALIDATION)
    }
}

/// `δ_a(ρ, σ) = max_{|α| ≤ depth} d_a(E_α ρ, E_α σ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CanonicalPseudoDistance {
    pub depth: usize,
}

/// `ρ ∼ᵃ σ` iff `d_a(E_α ρ, E_α σ) ≤ 1e-9` for all `|α| ≤ depth`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CanonicalEquivalence {
    pub depth: usize,
}

pub fn canonical_pseudodistance(depth: usize) -> CanonicalPseudoDistance {
    CanonicalPseudoDistance { depth }
}

pub fn canonical_equivalence(depth: usize) -> CanonicalEquivalence {
    CanonicalEquivalence { depth }
}

/// Max of `d_a` over joint runs of length `≤ depth`, stopping early once `stop_above` is exceeded.
fn joint_max(s: &QuantumSystem, agent: usize, rho: &DensityOperator, sigma: &DensityOperator, depth: usize, stop_above: f64) -> f64 {
    let cap = s.capability_at(agent);
    let here = cap.value(rho.matrix(), sigma.matrix());
    if depth == 0 || here > stop_above {
        return here;
    }
    let mut best = here;
    for i in 0..s.action_count() {
        let e = s.channel_at(i);
        if e.is_identity() {
            continue;
        }
        let v = joint_max(s, agent, &e.apply_state(rho), &e.apply_state(sigma), depth - 1, stop_above);
        best = best.max(v);
        if best > stop_above {
            break;
        }
    }
    best
}

impl CanonicalPseudoDistance {
    pub(crate) fn value(&self, s: &QuantumSystem, agent: usize, rho: &DensityOperator, sigma: &DensityOperator) -> f64 {
        joint_max(s, agent, rho, sigma, self.depth, f64::INFINITY)
    }
}

impl PseudoDistance for CanonicalPseudoDistance {
    fn name(&self) -> String {
        format!("canonical(depth {})", self.depth)
    }

    fn delta(&self, s: &QuantumSystem, agent: usize, rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
        Ok(self.value(s, agent, rho, sigma))
    }
}

impl Equivalence for CanonicalEquivalence {
    fn name(&self) -> String {
        format!("canonical(depth {})", self.depth)
    }

    fn equivalent(&self, s: &QuantumSystem, agent: usize, rho: &DensityOperator, sigma: &DensityOperator) -> Result<bool> {
        Ok(joint_max(s, agent, rho, sigma, self.depth, TOL_VALIDATION) <= TOL_VALIDATION)
    }
}

fn lookup(states: &[DensityOperator], rho: &DensityOperator, tol: f64) -> Option<usize> {
    states.iter().position(|s| states_close(s.matrix(), rho.matrix(), tol))
}

/// Explicit partition of enumerated states, per agent: `classes[a]` lists each state with its class label.
#[derive(Debug, Clone, PartialEq)]
pub struct TableEquivalence {
    label: String,
    classes: Vec<Vec<(DensityOperator, usize)>>,
}

impl TableEquivalence {
    pub fn new(label: impl Into<String>, classes: Vec<Vec<(DensityOperator, usize)>>) -> Self {
        Self {
            label: label.into(),
            classes,
        }
    }

    fn class_of(&self, agent: usize, rho: &DensityOperator) -> Result<usize> {
        let table = self
            .classes
            .get(agent)
            .ok_or_else(|| Error::Oracle(format!("table has no entry for agent index {agent}")))?;
        table
            .iter()
            .find(|(s, _)| states_close(s.matrix(), rho.matrix(), TOL_VALIDATION))
            .map(|(_, c)| *c)
            .ok_or_else(|| Error::Oracle("state is not listed in the equivalence table".into()))
    }
}

impl Equivalence for TableEquivalence {
    fn name(&self) -> String {
        self.label.clone()
    }

    fn equivalent(&self, _: &QuantumSystem, agent: usize, rho: &DensityOperator, sigma: &DensityOperator) -> Result<bool> {
        Ok(self.class_of(agent, rho)? == self.class_of(agent, sigma)?)
    }
}

/// Explicit pseudo-distance matrix over enumerated states, per agent.
#[derive(Debug, Clone, PartialEq)]
pub struct TableDistance {
    label: String,
    tables: Vec<(Vec<DensityOperator>, Vec<Vec<f64>>)>,
}

impl TableDistance {
    pub fn new(label: impl Into<String>, tables: Vec<(Vec<DensityOperator>, Vec<Vec<f64>>)>) -> Result<Self> {
        for (states, m) in &tables {
            if m.len() != states.len() || m.iter().any(|row| row.len() != states.len()) {
                return Err(Error::Oracle("distance table is not square over its states".into()));
            }
        }
        Ok(Self {
            label: label.into(),
            tables,
        })
    }
}

impl PseudoDistance for TableDistance {
    fn name(&self) -> String {
        self.label.clone()
    }

    fn delta(&self, _: &QuantumSystem, agent: usize, rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
        let (states, m) = self
            .tables
            .get(agent)
            .ok_or_else(|| Error::Oracle(format!("table has no entry for agent index {agent}")))?;
        let missing = || Error::Oracle("state is not listed in the distance table".into());
        let i = lookup(states, rho, TOL_VALIDATION).ok_or_else(missing)?;
        let j = lookup(states, sigma, TOL_VALIDATION).ok_or_else(missing)?;
        Ok(m[i][j])
    }
}
