//! Depth-first enumeration of `E_α(ρ0)` alongside purged runs.
//!
//! Each purge group deletes a fixed set of actions; its purged state is
//! tracked incrementally and stays shared with the full run until the first
//! deletion, so undiverged observers cost nothing.

use rayon::prelude::*;

use crate::automaton::QuantumSystem;
use crate::linalg::DensityOperator;

#[derive(Debug, Clone)]
pub(crate) struct Group {
    /// Indexed by action; `true` if purge deletes it.
    pub deleted: Vec<bool>,
    /// Observer agent indices scored against this group's purged state.
    pub observers: Vec<usize>,
}

/// Best observation found, with its deterministic tie-break key `(agent, seq)`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Hit {
    pub value: f64,
    pub agent: usize,
    pub seq: Vec<usize>,
    pub observation: Option<usize>,
}

impl Hit {
    fn beats(&self, other: &Hit) -> bool {
        self.value > other.value
            || (self.value == other.value && (self.agent, &self.seq) < (other.agent, &other.seq))
    }
}

pub(crate) fn merge(into: &mut Hit, candidate: Hit) {
    if candidate.beats(into) {
        *into = candidate;
    }
}

/// The best hit for each sequence length `0..=depth`.
pub(crate) fn enumerate(s: &QuantumSystem, groups: &[Group], initial: &DensityOperator, depth: usize) -> Vec<Hit> {
    let first_observer = groups
        .iter()
        .flat_map(|g| g.observers.iter().copied())
        .min()
        .unwrap_or(0);
    let floor = Hit {
        value: 0.0,
        agent: first_observer,
        seq: Vec::new(),
        observation: None,
    };
    let mut best = vec![floor; depth + 1];
    if depth == 0 || groups.is_empty() {
        return best;
    }
    let n = s.action_count();
    let branches: Vec<Vec<Hit>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut local = best.clone();
            let state = s.channel_at(i).apply_state(initial);
            let purged = groups
                .iter()
                .map(|g| g.deleted[i].then(|| initial.clone()))
                .collect();
            let mut seq = vec![i];
            visit(s, groups, &state, purged, &mut seq, depth, &mut local);
            local
        })
        .collect();
    for branch in branches {
        for (b, h) in best.iter_mut().zip(branch) {
            merge(b, h);
        }
    }
    best
}

fn visit(
    s: &QuantumSystem,
    groups: &[Group],
    state: &DensityOperator,
    purged: Vec<Option<DensityOperator>>,
    seq: &mut Vec<usize>,
    depth: usize,
    best: &mut [Hit],
) {
    let len = seq.len();
    for (g, p) in groups.iter().zip(&purged) {
        let Some(p) = p else { continue };
        for &a in &g.observers {
            let (value, observation) = s.capability_at(a).distance(state.matrix(), p.matrix());
            let slot = &mut best[len];
            if value > slot.value || (value == slot.value && (a, seq.as_slice()) < (slot.agent, slot.seq.as_slice())) {
                *slot = Hit {
                    value,
                    agent: a,
                    seq: seq.clone(),
                    observation,
                };
            }
        }
    }
    if len == depth {
        return;
    }
    for i in 0..s.action_count() {
        let e = s.channel_at(i);
        let next = e.apply_state(state);
        let next_purged = groups
            .iter()
            .zip(&purged)
            .map(|(g, p)| match (g.deleted[i], p) {
                (true, None) => Some(state.clone()),
                (true, Some(p)) => Some(p.clone()),
                (false, Some(p)) => Some(e.apply_state(p)),
                (false, None) => None,
            })
            .collect();
        seq.push(i);
        visit(s, groups, &next, next_purged, seq, depth, best);
        seq.pop();
    }
}

/// Running maxima: entry `k` is the best hit over lengths `≤ k`.
pub(crate) fn cumulative(per_len: &[Hit]) -> Vec<Hit> {
    let mut out: Vec<Hit> = Vec::with_capacity(per_len.len());
    for h in per_len {
        let mut acc = out.last().cloned().unwrap_or_else(|| h.clone());
        merge(&mut acc, h.clone());
        out.push(acc);
    }
    out
}
