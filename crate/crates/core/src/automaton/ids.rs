use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(pub String);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CommandId(pub String);

impl AgentId {
    pub fn new(name: impl Into<String>) -> Self {
        Self(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl CommandId {
    pub fn new(name: impl Into<String>) -> Self {
        Self(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for CommandId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for AgentId {
    fn from(s: &str) -> Self {
        Self(s.to_string())
    }
}

impl From<&str> for CommandId {
    fn from(s: &str) -> Self {
        Self(s.to_string())
    }
}

/// One step `(a, c)`: agent `a` executes command `c`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Action {
    pub agent: AgentId,
    pub command: CommandId,
}

impl Action {
    pub fn new(agent: impl Into<String>, command: impl Into<String>) -> Self {
        Self {
            agent: AgentId(agent.into()),
            command: CommandId(command.into()),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.agent, self.command)
    }
}

/// A finite word over `A × C`. The empty sequence displays as `ε`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionSequence(pub Vec<Action>);

impl ActionSequence {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn actions(&self) -> &[Action] {
        &self.0
    }

    /// The prefix `α(i]` of length `i`.
    pub fn head(&self, i: usize) -> Self {
        Self(self.0[..i.min(self.0.len())].to_vec())
    }

    pub fn then(mut self, action: Action) -> Self {
        self.0.push(action);
        self
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Self(v)
    }
}

impl FromIterator<Action> for ActionSequence {
    fn from_iter<I: IntoIterator<Item = Action>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl fmt::Display for ActionSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        for a in &self.0 {
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

/// Deletes every `(a, c)` with `a ∈ g` and `c ∈ d`, keeping the order of the rest.
pub fn purge(alpha: &ActionSequence, g: &BTreeSet<AgentId>, d: &BTreeSet<CommandId>) -> ActionSequence {
    alpha
        .0
        .iter()
        .filter(|x| !(g.contains(&x.agent) && d.contains(&x.command)))
        .cloned()
        .collect()
}

/// `purge_G`: deletes every action of the agents in `g`.
pub fn purge_agents(alpha: &ActionSequence, g: &BTreeSet<AgentId>) -> ActionSequence {
    alpha.0.iter().filter(|x| !g.contains(&x.agent)).cloned().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn agents(names: &[&str]) -> BTreeSet<AgentId> {
        names.iter().map(|&n| AgentId::from(n)).collect()
    }

    fn commands(names: &[&str]) -> BTreeSet<CommandId> {
        names.iter().map(|&n| CommandId::from(n)).collect()
    }

    #[test]
    fn purge_removes_matching_pairs() {
        let alpha: ActionSequence = [Action::new("A", "c1"), Action::new("B", "c2"), Action::new("A", "c2")]
            .into_iter()
            .collect();
        let out = purge(&alpha, &agents(&["A"]), &commands(&["c2"]));
        assert_eq!(out.to_string(), "(A,c1)(B,c2)");
        assert_eq!(purge(&alpha, &agents(&[]), &commands(&["c1", "c2"])), alpha);
    }

    #[test]
    fn purge_rotation_keeps_cnot() {
        let alpha: ActionSequence = [Action::new("Alice", "Rx"), Action::new("Alice", "CNOT")]
            .into_iter()
            .collect();
        let out = purge(&alpha, &agents(&["Alice"]), &commands(&["Rx"]));
        assert_eq!(out.to_string(), "(Alice,CNOT)");
        assert_eq!(ActionSequence::empty().to_string(), "ε");
    }

    #[test]
    fn purge_agents_drops_everything_by_them() {
        let alpha: ActionSequence = [Action::new("A", "x"), Action::new("B", "x"), Action::new("A", "y")]
            .into_iter()
            .collect();
        assert_eq!(purge_agents(&alpha, &agents(&["A"])).to_string(), "(B,x)");
        assert_eq!(alpha.head(2).len(), 2);
    }
}
