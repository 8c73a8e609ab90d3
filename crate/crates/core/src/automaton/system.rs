use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::ids::{Action, ActionSequence, AgentId, CommandId};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::linalg::{
    partial_trace_matrix, states_close, trace_distance_matrices, ComplexMatrix, DensityOperator, KrausChannel, Povm,
    Subsystems, ValidationReport,
};

/// What one agent can observe: a finite POVM family plus optional
/// unrestricted views, each scored by the trace distance of the reduced state
/// on some factors (the whole space for a fully unrestricted agent).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Capability {
    povms: Vec<(String, Povm)>,
    views: Vec<(String, Subsystems)>,
    factors: Option<BTreeSet<usize>>,
}

/// Label used for the trace-distance view of an unrestricted agent.
pub const TRACE_DISTANCE: &str = "trace-distance";

impl Capability {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_povm(mut self, name: impl Into<String>, povm: Povm) -> Self {
        self.povms.push((name.into(), povm));
        self
    }

    /// Adds the view "any measurement on the factors in `sel`".
    pub fn with_view(mut self, name: impl Into<String>, sel: Subsystems) -> Self {
        self.views.push((name.into(), sel));
        self
    }

    /// Any POVM on the whole space; scored by trace distance.
    pub fn with_unrestricted(self, dims: &[usize]) -> Self {
        let all = (0..dims.len()).collect();
        let sel = Subsystems::new(dims.to_vec(), all).expect("valid dims");
        self.with_view(TRACE_DISTANCE, sel)
    }

    /// Declares which tensor factors the agent's measurements act on.
    pub fn with_factors(mut self, factors: impl IntoIterator<Item = usize>) -> Self {
        self.factors.get_or_insert_with(BTreeSet::new).extend(factors);
        self
    }

    pub fn povms(&self) -> &[(String, Povm)] {
        &self.povms
    }

    pub fn views(&self) -> &[(String, Subsystems)] {
        &self.views
    }

    pub fn factors(&self) -> Option<&BTreeSet<usize>> {
        self.factors.as_ref()
    }

    pub fn is_unrestricted(&self) -> bool {
        self.views.iter().any(|(_, s)| s.is_everything())
    }

    /// Name of the observation channel with index `i` (POVMs first, then views).
    pub fn channel_name(&self, i: usize) -> &str {
        if i < self.povms.len() {
            &self.povms[i].0
        } else {
            &self.views[i - self.povms.len()].0
        }
    }

    /// `d_a(ρ, σ)` and the index of the first channel attaining it (None for an empty capability).
    pub(crate) fn distance(&self, rho: &ComplexMatrix, sigma: &ComplexMatrix) -> (f64, Option<usize>) {
        let mut best = (0.0, None);
        for (i, (_, m)) in self.povms.iter().enumerate() {
            let d = m.distance_unchecked(rho, sigma);
            if best.1.is_none() || d > best.0 {
                best = (d, Some(i));
            }
        }
        for (j, (_, sel)) in self.views.iter().enumerate() {
            let d = if sel.is_everything() {
                trace_distance_matrices(rho, sigma)
            } else {
                trace_distance_matrices(&partial_trace_matrix(rho, sel), &partial_trace_matrix(sigma, sel))
            };
            if best.1.is_none() || d > best.0 {
                best = (d, Some(self.povms.len() + j));
            }
        }
        best
    }

    pub(crate) fn value(&self, rho: &ComplexMatrix, sigma: &ComplexMatrix) -> f64 {
        self.distance(rho, sigma).0
    }

    /// The capability lifted into a larger space `prefix ⊗ H ⊗ suffix`.
    pub(crate) fn embed(&self, prefix: &[usize], own: &[usize], suffix: &[usize]) -> Result<Self> {
        let mut dims = prefix.to_vec();
        dims.extend_from_slice(own);
        dims.extend_from_slice(suffix);
        let targets: Vec<usize> = (prefix.len()..prefix.len() + own.len()).collect();
        let povms = self
            .povms
            .iter()
            .map(|(n, p)| Ok((n.clone(), p.embed(&dims, &targets)?)))
            .collect::<Result<Vec<_>>>()?;
        let views = self
            .views
            .iter()
            .map(|(n, s)| (n.clone(), s.embed(prefix, suffix)))
            .collect();
        let factors = self
            .factors
            .as_ref()
            .map(|f| f.iter().map(|i| i + prefix.len()).collect());
        Ok(Self { povms, views, factors })
    }

    /// Union of two capabilities on the same space.
    pub(crate) fn union(mut self, other: Self) -> Self {
        self.povms.extend(other.povms);
        self.views.extend(other.views);
        match (&mut self.factors, other.factors) {
            (Some(a), Some(b)) => a.extend(b),
            (None, Some(b)) => self.factors = Some(b),
            _ => {}
        }
        self
    }
}

/// A reachable state with the shortlex-first sequence producing it.
#[derive(Debug, Clone, PartialEq)]
pub struct Reachable {
    pub sequence: ActionSequence,
    pub state: DensityOperator,
}

/// The automaton `⟨H, ρ0, A, C, do, measure⟩`.
///
/// Agents and commands are kept sorted by name; action `(a, c)` has index
/// `a_index · |C| + c_index`, so index order is the lexicographic enumeration order.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumSystem {
    dims: Vec<usize>,
    initial: DensityOperator,
    agents: Vec<AgentId>,
    commands: Vec<CommandId>,
    channels: Vec<KrausChannel>,
    capabilities: Vec<Capability>,
    defaulted: Vec<Action>,
}

#[derive(Debug, Clone)]
pub struct SystemBuilder {
    dims: Vec<usize>,
    initial: DensityOperator,
    agents: BTreeSet<AgentId>,
    commands: BTreeSet<CommandId>,
    channels: BTreeMap<(AgentId, CommandId), KrausChannel>,
    capabilities: BTreeMap<AgentId, Capability>,
}

impl SystemBuilder {
    pub fn agent(mut self, name: impl Into<String>) -> Self {
        self.agents.insert(AgentId(name.into()));
        self
    }

    pub fn command(mut self, name: impl Into<String>) -> Self {
        self.commands.insert(CommandId(name.into()));
        self
    }

    /// Sets `E_{a,c}`; the agent and command are registered if new.
    pub fn channel(mut self, agent: impl Into<String>, command: impl Into<String>, e: KrausChannel) -> Self {
        let (a, c) = (AgentId(agent.into()), CommandId(command.into()));
        self.agents.insert(a.clone());
        self.commands.insert(c.clone());
        self.channels.insert((a, c), e);
        self
    }

    /// Sets `M_a`; the agent is registered if new.
    pub fn capability(mut self, agent: impl Into<String>, cap: Capability) -> Self {
        let a = AgentId(agent.into());
        self.agents.insert(a.clone());
        self.capabilities.insert(a, cap);
        self
    }

    pub fn build(self) -> Result<QuantumSystem> {
        let dim: usize = self.dims.iter().product();
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(Error::dim(format!("invalid factor dims {:?}", self.dims)));
        }
        if self.initial.dim() != dim {
            return Err(Error::dim(format!(
                "initial state has dimension {} but dims multiply to {dim}",
                self.initial.dim()
            )));
        }
        if self.agents.is_empty() {
            return Err(Error::model("a system needs at least one agent"));
        }
        if let Some(a) = self.agents.iter().find(|a| a.0.is_empty()) {
            return Err(Error::model(format!("empty agent name {a:?}")));
        }
        if self.commands.iter().any(|c| c.0.is_empty()) {
            return Err(Error::model("empty command name"));
        }
        let agents: Vec<AgentId> = self.agents.into_iter().collect();
        let commands: Vec<CommandId> = self.commands.into_iter().collect();
        let mut channels = Vec::with_capacity(agents.len() * commands.len());
        let mut defaulted = Vec::new();
        let mut explicit = self.channels;
        for a in &agents {
            for c in &commands {
                match explicit.remove(&(a.clone(), c.clone())) {
                    Some(e) => {
                        if e.dim_in() != dim || e.dim_out() != dim {
                            return Err(Error::dim(format!(
                                "channel ({a},{c}) maps {} to {} but the system has dimension {dim}",
                                e.dim_in(),
                                e.dim_out()
                            )));
                        }
                        channels.push(e);
                    }
                    None => {
                        defaulted.push(Action {
                            agent: a.clone(),
                            command: c.clone(),
                        });
                        channels.push(KrausChannel::identity(dim));
                    }
                }
            }
        }
        let mut caps = self.capabilities;
        let mut capabilities = Vec::with_capacity(agents.len());
        for a in &agents {
            let cap = caps.remove(a).unwrap_or_default();
            for (name, p) in &cap.povms {
                if p.dim() != dim {
                    return Err(Error::dim(format!(
                        "povm {name} of agent {a} has dimension {} but the system has {dim}",
                        p.dim()
                    )));
                }
            }
            for (name, s) in &cap.views {
                if s.dims() != self.dims.as_slice() {
                    return Err(Error::dim(format!("view {name} of agent {a} does not match the system factors")));
                }
            }
            if let Some(f) = cap.factors.as_ref().and_then(|f| f.iter().find(|&&i| i >= self.dims.len())) {
                return Err(Error::dim(format!("agent {a} observes factor {f} which does not exist")));
            }
            capabilities.push(cap);
        }
        Ok(QuantumSystem {
            dims: self.dims,
            initial: self.initial,
            agents,
            commands,
            channels,
            capabilities,
            defaulted,
        })
    }
}

impl QuantumSystem {
    pub fn builder(dims: Vec<usize>, initial: DensityOperator) -> SystemBuilder {
        SystemBuilder {
            dims,
            initial,
            agents: BTreeSet::new(),
            commands: BTreeSet::new(),
            channels: BTreeMap::new(),
            capabilities: BTreeMap::new(),
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.initial.dim()
    }

    pub fn initial(&self) -> &DensityOperator {
        &self.initial
    }

    pub fn agents(&self) -> &[AgentId] {
        &self.agents
    }

    pub fn commands(&self) -> &[CommandId] {
        &self.commands
    }

    /// `(a, c)` pairs that were not declared and default to the identity channel.
    pub fn defaulted(&self) -> &[Action] {
        &self.defaulted
    }

    pub fn agent_index(&self, a: &AgentId) -> Result<usize> {
        self.agents
            .binary_search(a)
            .map_err(|_| Error::model(format!("unknown agent {a}")))
    }

    pub fn command_index(&self, c: &CommandId) -> Result<usize> {
        self.commands
            .binary_search(c)
            .map_err(|_| Error::model(format!("unknown command {c}")))
    }

    /// `|A| · |C|`.
    pub fn action_count(&self) -> usize {
        self.channels.len()
    }

    pub fn action(&self, i: usize) -> Action {
        let nc = self.commands.len();
        Action {
            agent: self.agents[i / nc].clone(),
            command: self.commands[i % nc].clone(),
        }
    }

    pub(crate) fn action_agent(&self, i: usize) -> usize {
        i / self.commands.len()
    }

    pub fn action_index(&self, x: &Action) -> Result<usize> {
        Ok(self.agent_index(&x.agent)? * self.commands.len() + self.command_index(&x.command)?)
    }

    pub fn channel(&self, a: &AgentId, c: &CommandId) -> Result<&KrausChannel> {
        let i = self.agent_index(a)? * self.commands.len() + self.command_index(c)?;
        Ok(&self.channels[i])
    }

    /// One channel per action, indexed like [`QuantumSystem::action`].
    pub fn channels(&self) -> &[KrausChannel] {
        &self.channels
    }

    pub(crate) fn channel_at(&self, i: usize) -> &KrausChannel {
        &self.channels[i]
    }

    pub fn capability(&self, a: &AgentId) -> Result<&Capability> {
        Ok(&self.capabilities[self.agent_index(a)?])
    }

    pub(crate) fn capability_at(&self, i: usize) -> &Capability {
        &self.capabilities[i]
    }

    pub fn indices(&self, alpha: &ActionSequence) -> Result<Vec<usize>> {
        alpha.actions().iter().map(|x| self.action_index(x)).collect()
    }

    pub fn sequence(&self, idx: &[usize]) -> ActionSequence {
        idx.iter().map(|&i| self.action(i)).collect()
    }

    /// `E_α(ρ0)`.
    pub fn run(&self, alpha: &ActionSequence) -> Result<DensityOperator> {
        self.run_from(&self.initial, alpha)
    }

    /// `E_α(ρ)` for an arbitrary starting state.
    pub fn run_from(&self, rho: &DensityOperator, alpha: &ActionSequence) -> Result<DensityOperator> {
        if rho.dim() != self.dim() {
            return Err(Error::dim("state does not match the system dimension"));
        }
        let idx = self.indices(alpha)?;
        Ok(self.run_indices(rho, &idx))
    }

    pub(crate) fn run_indices(&self, rho: &DensityOperator, idx: &[usize]) -> DensityOperator {
        idx.iter()
            .fold(rho.clone(), |acc, &i| self.channels[i].apply_state(&acc))
    }

    /// `d_a(ρ, σ)`: the largest outcome-distribution distance over `M_a`.
    pub fn observation_distance(&self, a: &AgentId, rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
        let cap = self.capability(a)?;
        if rho.dim() != self.dim() || sigma.dim() != self.dim() {
            return Err(Error::dim("states do not match the system dimension"));
        }
        Ok(cap.value(rho.matrix(), sigma.matrix()))
    }

    /// `S[ρ]`.
    pub fn with_initial(&self, rho: DensityOperator) -> Result<Self> {
        if rho.dim() != self.dim() {
            return Err(Error::dim(format!(
                "replacement initial state has dimension {} but the system has {}",
                rho.dim(),
                self.dim()
            )));
        }
        Ok(Self {
            initial: rho,
            ..self.clone()
        })
    }

    /// The same system with agents and commands renamed; names must stay distinct.
    pub fn renamed(&self, agent: impl Fn(&str) -> String, command: impl Fn(&str) -> String) -> Result<Self> {
        let mut b = Self::builder(self.dims.clone(), self.initial.clone());
        for c in &self.commands {
            b = b.command(command(c.as_str()));
        }
        for (ai, a) in self.agents.iter().enumerate() {
            b = b.capability(agent(a.as_str()), self.capabilities[ai].clone());
            for (ci, c) in self.commands.iter().enumerate() {
                b = b.channel(agent(a.as_str()), command(c.as_str()), self.channels[ai * self.commands.len() + ci].clone());
            }
        }
        let out = b.build()?;
        if out.agents.len() != self.agents.len() || out.commands.len() != self.commands.len() {
            return Err(Error::model("renaming merged two names"));
        }
        Ok(out)
    }

    /// All states `E_α(ρ0)` with `|α| ≤ depth`, merged within the dedup tolerance.
    pub fn reachable(&self, depth: usize) -> Result<Vec<Reachable>> {
        self.reachable_with(depth, &Config::default())
    }

    pub fn reachable_with(&self, depth: usize, cfg: &Config) -> Result<Vec<Reachable>> {
        Ok(self
            .reachable_indexed(depth, cfg)?
            .into_iter()
            .map(|(idx, state)| Reachable {
                sequence: self.sequence(&idx),
                state,
            })
            .collect())
    }

    /// Breadth-first in shortlex order; only retained states are expanded.
    pub(crate) fn reachable_indexed(&self, depth: usize, cfg: &Config) -> Result<Vec<(Vec<usize>, DensityOperator)>> {
        cfg.check_enumeration(self.dim(), self.action_count(), depth)?;
        let mut out: Vec<(Vec<usize>, DensityOperator)> = vec![(Vec::new(), self.initial.clone())];
        let mut frontier = 0..1;
        for _ in 0..depth {
            let start = out.len();
            for k in frontier.clone() {
                for i in 0..self.action_count() {
                    let next = self.channels[i].apply_state(&out[k].1);
                    if !out.iter().any(|(_, s)| states_close(s.matrix(), next.matrix(), cfg.tol.dedup)) {
                        let mut seq = out[k].0.clone();
                        seq.push(i);
                        out.push((seq, next));
                    }
                }
            }
            frontier = start..out.len();
            if frontier.is_empty() {
                break;
            }
        }
        Ok(out)
    }

    /// Reports for the initial state, every channel and every POVM.
    pub fn validate(&self, tol: f64) -> Vec<ValidationReport> {
        let mut out = Vec::new();
        let mut r = self.initial.validate(tol);
        r.subject = "initial state".into();
        out.push(r);
        for (i, e) in self.channels.iter().enumerate() {
            let mut r = e.validate(tol);
            r.subject = format!("channel {}", self.action(i));
            out.push(r);
        }
        for (a, cap) in self.agents.iter().zip(&self.capabilities) {
            for (name, p) in &cap.povms {
                let mut r = p.validate(tol);
                r.subject = format!("povm {name} of {a}");
                out.push(r);
            }
        }
        out
    }

    pub(crate) fn from_parts(
        dims: Vec<usize>,
        initial: DensityOperator,
        agents: Vec<AgentId>,
        commands: Vec<CommandId>,
        channels: Vec<KrausChannel>,
        capabilities: Vec<Capability>,
    ) -> Self {
        debug_assert_eq!(channels.len(), agents.len() * commands.len());
        Self {
            dims,
            initial,
            agents,
            commands,
            channels,
            capabilities,
            defaulted: Vec::new(),
        }
    }
}

/// Summary used in reports.
#[derive(Debug, Clone, Serialize)]
pub struct SystemSummary {
    pub dims: Vec<usize>,
    pub agents: Vec<String>,
    pub commands: Vec<String>,
    pub defaulted: Vec<String>,
}

impl From<&QuantumSystem> for SystemSummary {
    fn from(s: &QuantumSystem) -> Self {
        Self {
            dims: s.dims.clone(),
            agents: s.agents.iter().map(|a| a.0.clone()).collect(),
            commands: s.commands.iter().map(|c| c.0.clone()).collect(),
            defaulted: s.defaulted.iter().map(|x| x.to_string()).collect(),
        }
    }
}
