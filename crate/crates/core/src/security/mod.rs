//! Interference and insecurity degrees over bounded action sequences.

mod engine;

use std::collections::BTreeSet;

use serde::Serialize;

use crate::automaton::{purge, purge_agents, ActionSequence, AgentId, CommandId, Policy, QuantumSystem};
use crate::config::{Config, TOL_VALIDATION};
use crate::error::{Error, Result};
use crate::linalg::{trace_distance, Distribution, Ensemble};

pub(crate) use engine::{cumulative, enumerate, Group, Hit};

/// `Int(G1, D | G2)` restricted to `|α| ≤ depth`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceQuery {
    pub g1: BTreeSet<AgentId>,
    pub d: BTreeSet<CommandId>,
    pub g2: BTreeSet<AgentId>,
    pub depth: usize,
}

impl InterferenceQuery {
    pub fn new<'a>(
        g1: impl IntoIterator<Item = &'a str>,
        d: impl IntoIterator<Item = &'a str>,
        g2: impl IntoIterator<Item = &'a str>,
        depth: usize,
    ) -> Self {
        Self {
            g1: g1.into_iter().map(AgentId::from).collect(),
            d: d.into_iter().map(CommandId::from).collect(),
            g2: g2.into_iter().map(AgentId::from).collect(),
            depth,
        }
    }
}

/// The observer, sequence and observation attaining a reported value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub agent: AgentId,
    pub sequence: ActionSequence,
    pub purged: ActionSequence,
    /// POVM name, view name, or `trace-distance`; `None` if the agent observes nothing.
    pub observation: Option<String>,
    /// Outcome distributions of the full and purged runs when the observation is a POVM.
    pub distributions: Option<(Distribution, Distribution)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SecurityReport {
    pub value: f64,
    pub witness: Witness,
    pub depth: usize,
    /// Values at depths `1..=depth`; nondecreasing, last entry equals `value`.
    pub per_depth: Vec<f64>,
}

fn groups_for_query(s: &QuantumSystem, q: &InterferenceQuery) -> Result<Vec<Group>> {
    if q.g1.is_empty() || q.g2.is_empty() {
        return Err(Error::model("interference queries need nonempty agent sets"));
    }
    for a in q.g1.iter().chain(&q.g2) {
        s.agent_index(a)?;
    }
    for c in &q.d {
        s.command_index(c)?;
    }
    let deleted = (0..s.action_count())
        .map(|i| {
            let x = s.action(i);
            q.g1.contains(&x.agent) && q.d.contains(&x.command)
        })
        .collect();
    let observers = q.g2.iter().map(|a| s.agent_index(a)).collect::<Result<Vec<_>>>()?;
    Ok(vec![Group { deleted, observers }])
}

/// One group per distinct `∇a`, observed by every agent sharing it.
fn groups_for_policy(s: &QuantumSystem, p: &Policy) -> Result<Vec<Group>> {
    let declared: BTreeSet<AgentId> = s.agents().iter().cloned().collect();
    if p.agents() != &declared {
        return Err(Error::model("policy agents differ from the system agents"));
    }
    let mut groups: Vec<(BTreeSet<AgentId>, Group)> = Vec::new();
    for (ai, a) in s.agents().iter().enumerate() {
        let nabla = p.nabla(a)?;
        if nabla.is_empty() {
            continue;
        }
        if let Some((_, g)) = groups.iter_mut().find(|(n, _)| *n == nabla) {
            g.observers.push(ai);
            continue;
        }
        let deleted = (0..s.action_count()).map(|i| nabla.contains(&s.action(i).agent)).collect();
        groups.push((
            nabla,
            Group {
                deleted,
                observers: vec![ai],
            },
        ));
    }
    Ok(groups.into_iter().map(|(_, g)| g).collect())
}

fn report(
    s: &QuantumSystem,
    per_len: Vec<Hit>,
    depth: usize,
    purge_of: impl Fn(&ActionSequence, &AgentId) -> ActionSequence,
) -> Result<SecurityReport> {
    let cumulative = cumulative(&per_len);
    let best = cumulative.last().cloned().expect("depth 0 entry always present");
    let agent = s.agents()[best.agent].clone();
    let sequence = s.sequence(&best.seq);
    let purged = purge_of(&sequence, &agent);
    let cap = s.capability_at(best.agent);
    let observation = best.observation.map(|i| cap.channel_name(i).to_string());
    let distributions = match best.observation {
        Some(i) if i < cap.povms().len() => {
            let m = &cap.povms()[i].1;
            Some((m.measure(&s.run(&sequence)?)?, m.measure(&s.run(&purged)?)?))
        }
        _ => None,
    };
    Ok(SecurityReport {
        value: best.value,
        witness: Witness {
            agent,
            sequence,
            purged,
            observation,
            distributions,
        },
        depth,
        per_depth: cumulative[1..].iter().map(|h| h.value).collect(),
    })
}

/// `max_{a ∈ G2, |α| ≤ depth} d_a(E_α(ρ0), E_{purge_{G1,D}(α)}(ρ0))`.
pub fn interference_degree(s: &QuantumSystem, q: &InterferenceQuery) -> Result<SecurityReport> {
    interference_degree_with(s, q, &Config::default())
}

pub fn interference_degree_with(s: &QuantumSystem, q: &InterferenceQuery, cfg: &Config) -> Result<SecurityReport> {
    cfg.check_enumeration(s.dim(), s.action_count(), q.depth)?;
    let groups = groups_for_query(s, q)?;
    let per_len = enumerate(s, &groups, s.initial(), q.depth);
    report(s, per_len, q.depth, |alpha, _| purge(alpha, &q.g1, &q.d))
}

/// `K_t(S, ⤳)`.
pub fn insecurity_bounded(s: &QuantumSystem, p: &Policy, depth: usize) -> Result<SecurityReport> {
    insecurity_bounded_with(s, p, depth, &Config::default())
}

pub fn insecurity_bounded_with(s: &QuantumSystem, p: &Policy, depth: usize, cfg: &Config) -> Result<SecurityReport> {
    cfg.check_enumeration(s.dim(), s.action_count(), depth)?;
    let groups = groups_for_policy(s, p)?;
    let per_len = enumerate(s, &groups, s.initial(), depth);
    report(s, per_len, depth, |alpha, a| {
        purge_agents(alpha, &p.nabla(a).expect("agent checked above"))
    })
}

/// Iterated `K_t` values, reported as a lower bound on `K(S, ⤳)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InsecurityEstimate {
    pub kind: &'static str,
    pub value: f64,
    pub per_depth: Vec<f64>,
    pub depth_reached: usize,
    pub stalled: bool,
    pub witness: Witness,
}

/// Label carried by every estimate: only a lower bound is ever claimed.
pub const LOWER_BOUND: &str = "LOWER BOUND";

/// Runs `K_t` for `t = 1, 2, …` until `max_depth`, or until the value has
/// not moved by more than `1e-9` for `stall_window` consecutive depths.
pub fn insecurity_estimate(s: &QuantumSystem, p: &Policy, max_depth: usize, stall_window: usize) -> Result<InsecurityEstimate> {
    insecurity_estimate_with(s, p, max_depth, stall_window, &Config::default())
}

pub fn insecurity_estimate_with(
    s: &QuantumSystem,
    p: &Policy,
    max_depth: usize,
    stall_window: usize,
    cfg: &Config,
) -> Result<InsecurityEstimate> {
    if max_depth == 0 {
        return Err(Error::model("insecurity estimate needs max_depth >= 1"));
    }
    let mut previous = 0.0;
    let mut unchanged = 0;
    let mut last = None;
    for t in 1..=max_depth {
        let r = insecurity_bounded_with(s, p, t, cfg)?;
        if (r.value - previous).abs() <= TOL_VALIDATION {
            unchanged += 1;
        } else {
            unchanged = 0;
        }
        previous = r.value;
        let stalled = stall_window > 0 && unchanged >= stall_window;
        last = Some(r);
        if stalled {
            break;
        }
    }
    let r = last.expect("at least one depth evaluated");
    Ok(InsecurityEstimate {
        kind: LOWER_BOUND,
        value: r.value,
        depth_reached: r.depth,
        stalled: stall_window > 0 && unchanged >= stall_window,
        per_depth: r.per_depth,
        witness: r.witness,
    })
}

/// One decomposition's contribution `Σ p_i K_t(S[ρ_i])`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionValue {
    pub weights: Vec<f64>,
    pub component_values: Vec<f64>,
    pub weighted: f64,
    pub trivial: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrongReport {
    /// Max over the evaluated decompositions: a lower bound on `SK_t`.
    pub value: f64,
    pub depth: usize,
    pub decompositions: Vec<DecompositionValue>,
}

impl StrongReport {
    /// The value from `{(1, ρ0)}` alone, i.e. `K_t(S)`.
    pub fn trivial_value(&self) -> f64 {
        self.decompositions.iter().find(|d| d.trivial).map_or(0.0, |d| d.weighted)
    }
}

/// `max` over the supplied decompositions of `ρ0`, plus the trivial one, of `Σ p_i K_t(S[ρ_i], ⤳)`.
pub fn strong_insecurity_bounded(
    s: &QuantumSystem,
    p: &Policy,
    decompositions: &[Ensemble],
    depth: usize,
) -> Result<StrongReport> {
    strong_insecurity_bounded_with(s, p, decompositions, depth, &Config::default())
}

pub fn strong_insecurity_bounded_with(
    s: &QuantumSystem,
    p: &Policy,
    decompositions: &[Ensemble],
    depth: usize,
    cfg: &Config,
) -> Result<StrongReport> {
    for (k, e) in decompositions.iter().enumerate() {
        if e.dim() != s.dim() {
            return Err(Error::Ensemble(format!("decomposition {k} has the wrong dimension")));
        }
        let gap = trace_distance(&e.mix(), s.initial())?;
        if gap > cfg.tol.validation {
            return Err(Error::Ensemble(format!(
                "decomposition {k} mixes to a state at trace distance {gap:.3e} from the initial state"
            )));
        }
    }
    let trivial = Ensemble::trivial(s.initial().clone());
    let mut out = Vec::with_capacity(decompositions.len() + 1);
    for (k, e) in std::iter::once(&trivial).chain(decompositions).enumerate() {
        let mut values = Vec::with_capacity(e.components().len());
        let mut weighted = 0.0;
        for (w, rho) in e.components() {
            let v = insecurity_bounded_with(&s.with_initial(rho.clone())?, p, depth, cfg)?.value;
            weighted += w * v;
            values.push(v);
        }
        out.push(DecompositionValue {
            weights: e.components().iter().map(|(w, _)| *w).collect(),
            component_values: values,
            weighted,
            trivial: k == 0,
        });
    }
    let value = out.iter().map(|d| d.weighted).fold(0.0, f64::max);
    Ok(StrongReport {
        value,
        depth,
        decompositions: out,
    })
}

#[cfg(test)]
mod tests;
