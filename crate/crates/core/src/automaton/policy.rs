use std::collections::BTreeSet;

use serde::Serialize;

use super::ids::AgentId;
use crate::error::{Error, Result};

/// A reflexive flow relation `⤳` on agents; `(a, b)` means information may flow from `a` to `b`.
///
/// Only the reflexive closure of the declared edges is taken. The relation is
/// not made transitive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Policy {
    agents: BTreeSet<AgentId>,
    edges: BTreeSet<(AgentId, AgentId)>,
}

impl Policy {
    /// Builds a policy, adding any missing reflexive pairs.
    pub fn new(
        agents: impl IntoIterator<Item = AgentId>,
        edges: impl IntoIterator<Item = (AgentId, AgentId)>,
    ) -> Result<Self> {
        Ok(Self::with_closure_report(agents, edges)?.0)
    }

    /// Like [`Policy::new`], also returning the reflexive pairs that had to be added.
    pub fn with_closure_report(
        agents: impl IntoIterator<Item = AgentId>,
        edges: impl IntoIterator<Item = (AgentId, AgentId)>,
    ) -> Result<(Self, Vec<AgentId>)> {
        let agents: BTreeSet<AgentId> = agents.into_iter().collect();
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            for x in [&a, &b] {
                if !agents.contains(x) {
                    return Err(Error::model(format!("policy edge mentions unknown agent {x}")));
                }
            }
            set.insert((a, b));
        }
        let mut added = Vec::new();
        for a in &agents {
            if set.insert((a.clone(), a.clone())) {
                added.push(a.clone());
            }
        }
        Ok((Self { agents, edges: set }, added))
    }

    /// Every pair allowed.
    pub fn complete(agents: impl IntoIterator<Item = AgentId>) -> Self {
        let agents: BTreeSet<AgentId> = agents.into_iter().collect();
        let edges = agents
            .iter()
            .flat_map(|a| agents.iter().map(move |b| (a.clone(), b.clone())))
            .collect();
        Self { agents, edges }
    }

    /// Only the reflexive pairs.
    pub fn reflexive(agents: impl IntoIterator<Item = AgentId>) -> Self {
        let agents: BTreeSet<AgentId> = agents.into_iter().collect();
        let edges = agents.iter().map(|a| (a.clone(), a.clone())).collect();
        Self { agents, edges }
    }

    pub fn agents(&self) -> &BTreeSet<AgentId> {
        &self.agents
    }

    pub fn edges(&self) -> &BTreeSet<(AgentId, AgentId)> {
        &self.edges
    }

    /// `a ⤳ b`.
    pub fn allows(&self, a: &AgentId, b: &AgentId) -> bool {
        self.edges.contains(&(a.clone(), b.clone()))
    }

    /// `∇a = {b : b ̸⤳ a}`.
    pub fn nabla(&self, a: &AgentId) -> Result<BTreeSet<AgentId>> {
        if !self.agents.contains(a) {
            return Err(Error::model(format!("policy has no agent {a}")));
        }
        Ok(self.agents.iter().filter(|b| !self.allows(b, a)).cloned().collect())
    }

    /// `⤳|Y`.
    pub fn restrict(&self, keep: &BTreeSet<AgentId>) -> BTreeSet<(AgentId, AgentId)> {
        self.edges
            .iter()
            .filter(|(a, b)| keep.contains(a) && keep.contains(b))
            .cloned()
            .collect()
    }

    /// The same relation over a larger agent set, with reflexive pairs for the newcomers.
    pub fn extend_agents(&self, agents: impl IntoIterator<Item = AgentId>) -> Self {
        let mut out = self.clone();
        for a in agents {
            out.edges.insert((a.clone(), a.clone()));
            out.agents.insert(a);
        }
        out
    }

    pub(crate) fn from_parts(agents: BTreeSet<AgentId>, edges: BTreeSet<(AgentId, AgentId)>) -> Self {
        Self { agents, edges }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(names: &[&str]) -> Vec<AgentId> {
        names.iter().map(|&n| AgentId::from(n)).collect()
    }

    fn set(names: &[&str]) -> BTreeSet<AgentId> {
        ids(names).into_iter().collect()
    }

    #[test]
    fn chain_policy_nabla() {
        let p = Policy::new(
            ids(&["Alice", "Bob", "Charles"]),
            [("Alice", "Bob"), ("Bob", "Charles")].map(|(a, b)| (a.into(), b.into())),
        )
        .unwrap();
        assert_eq!(p.nabla(&"Alice".into()).unwrap(), set(&["Bob", "Charles"]));
        assert_eq!(p.nabla(&"Bob".into()).unwrap(), set(&["Charles"]));
        assert_eq!(p.nabla(&"Charles".into()).unwrap(), set(&["Alice"]));
    }

    #[test]
    fn complete_and_reflexive() {
        let p = Policy::complete(ids(&["A", "B"]));
        assert!(p.nabla(&"A".into()).unwrap().is_empty());
        let p = Policy::reflexive(ids(&["A", "B"]));
        assert_eq!(p.nabla(&"A".into()).unwrap(), set(&["B"]));
        assert!(p.nabla(&"Z".into()).is_err());
    }

    #[test]
    fn closure_reports_missing_reflexive_pairs() {
        let (p, added) = Policy::with_closure_report(ids(&["A", "B"]), [("A".into(), "A".into())]).unwrap();
        assert_eq!(added, ids(&["B"]));
        assert!(p.allows(&"B".into(), &"B".into()));
        assert!(Policy::new(ids(&["A"]), [("A".into(), "Q".into())]).is_err());
    }
}
