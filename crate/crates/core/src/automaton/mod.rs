//! Quantum automata: agents issue commands that act as channels, and observe through POVMs.

mod ids;
mod policy;
mod system;

pub use ids::{purge, purge_agents, Action, ActionSequence, AgentId, CommandId};
pub use policy::Policy;
pub use system::{Capability, QuantumSystem, Reachable, SystemBuilder, SystemSummary, TRACE_DISTANCE};

#[cfg(test)]
mod tests;
