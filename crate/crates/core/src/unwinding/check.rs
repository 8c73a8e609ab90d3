use rayon::prelude::*;
use serde::Serialize;

use super::oracle::{CanonicalPseudoDistance, Equivalence, PseudoDistance};
use crate::automaton::{Action, ActionSequence, AgentId, Policy, QuantumSystem};
use crate::config::{Config, TOL_BOUND, TOL_COMPARE, TOL_VALIDATION};
use crate::error::{Error, Result};
use crate::linalg::DensityOperator;
use crate::security::insecurity_bounded_with;

/// A concrete pair (or single state and action) on which a condition was worst.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairWitness {
    pub agent: AgentId,
    pub rho: ActionSequence,
    pub sigma: Option<ActionSequence>,
    pub action: Option<Action>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition {
    pub name: &'static str,
    pub holds: bool,
    /// Largest excess over the allowance; for relational conditions, 1 if any instance fails.
    pub worst: f64,
    pub violations: usize,
    pub witness: Option<PairWitness>,
}

/// `ε_s`, `ε_o`, `ε_l`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Eps {
    pub step: f64,
    pub observation: f64,
    pub local: f64,
}

impl Eps {
    pub const ZERO: Eps = Eps {
        step: 0.0,
        observation: 0.0,
        local: 0.0,
    };
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsMode {
    Given(Eps),
    /// Use the smallest constants satisfied on the tested states.
    Fit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnwindingReport {
    pub mode: &'static str,
    pub oracle: String,
    pub depth: usize,
    pub states: usize,
    pub conditions: Vec<Condition>,
    /// Present only when every required condition holds.
    pub bound: Option<f64>,
    pub verdict: String,
    pub eps: Option<Eps>,
    /// Independently enumerated `K_depth`.
    pub measured_kt: f64,
    /// Unwinding I: the bound restricted to states reachable within `0..=depth` steps.
    pub bound_trend: Vec<f64>,
}

impl UnwindingReport {
    pub fn condition(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

pub const STEP: &str = "step consistency";
pub const LOCAL: &str = "local respect";
pub const OBSERVATION: &str = "observation consistency";

struct Tested {
    seqs: Vec<Vec<usize>>,
    states: Vec<DensityOperator>,
    /// Indices of states reachable in at most `depth − 1` steps.
    sources: Vec<usize>,
    /// `images[k][i] = E_i(states[sources[k]])`.
    images: Vec<Vec<DensityOperator>>,
}

fn tested(s: &QuantumSystem, depth: usize, cfg: &Config) -> Result<Tested> {
    let reach = s.reachable_indexed(depth, cfg)?;
    let (seqs, states): (Vec<_>, Vec<_>) = reach.into_iter().unzip();
    let sources: Vec<usize> = (0..seqs.len()).filter(|&k| seqs[k].len() < depth).collect();
    let images = sources
        .par_iter()
        .map(|&k| (0..s.action_count()).map(|i| s.channel_at(i).apply_state(&states[k])).collect())
        .collect();
    Ok(Tested {
        seqs,
        states,
        sources,
        images,
    })
}

fn forbidden_actions(s: &QuantumSystem, p: &Policy, agent: &AgentId) -> Result<Vec<usize>> {
    let nabla = p.nabla(agent)?;
    Ok((0..s.action_count()).filter(|&i| nabla.contains(&s.action(i).agent)).collect())
}

struct Tracker {
    name: &'static str,
    worst: f64,
    violations: usize,
    witness: Option<PairWitness>,
    allowance: f64,
}

impl Tracker {
    fn new(name: &'static str, allowance: f64) -> Self {
        Self {
            name,
            worst: f64::NEG_INFINITY,
            violations: 0,
            witness: None,
            allowance,
        }
    }

    fn observe(&mut self, excess: f64, witness: impl FnOnce() -> PairWitness) {
        if excess > self.allowance + TOL_COMPARE {
            self.violations += 1;
        }
        if excess > self.worst {
            self.worst = excess;
            self.witness = Some(witness());
        }
    }

    fn finish(self) -> Condition {
        Condition {
            name: self.name,
            holds: self.violations == 0,
            worst: self.worst.max(0.0),
            violations: self.violations,
            witness: self.witness,
        }
    }
}

fn policy_matches(s: &QuantumSystem, p: &Policy) -> Result<()> {
    if p.agents().iter().ne(s.agents().iter()) {
        return Err(Error::model("policy agents differ from the system agents"));
    }
    Ok(())
}

fn depth_label(verdict: &str, depth: usize) -> String {
    format!("{verdict} (certified at depth {depth})")
}

/// Checks the Unwinding I hypotheses on states reachable within `depth` steps.
pub fn check_unwinding_one(s: &QuantumSystem, p: &Policy, eq: &dyn Equivalence, depth: usize) -> Result<UnwindingReport> {
    check_unwinding_one_with(s, p, eq, depth, &Config::default())
}

pub fn check_unwinding_one_with(
    s: &QuantumSystem,
    p: &Policy,
    eq: &dyn Equivalence,
    depth: usize,
    cfg: &Config,
) -> Result<UnwindingReport> {
    policy_matches(s, p)?;
    let t = tested(s, depth, cfg)?;
    let n = t.states.len();
    let seq = |k: usize| s.sequence(&t.seqs[k]);
    let mut step = Tracker::new(STEP, 0.0);
    let mut local = Tracker::new(LOCAL, 0.0);
    let mut obs = Tracker::new(OBSERVATION, TOL_VALIDATION);
    let mut trend = vec![0.0f64; depth + 1];
    for (ai, a) in s.agents().iter().enumerate() {
        let rel: Vec<Vec<bool>> = (0..n)
            .into_par_iter()
            .map(|k| {
                (0..n)
                    .map(|l| eq.equivalent(s, ai, &t.states[k], &t.states[l]))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        check_equivalence_axioms(&rel).map_err(|detail| Error::Oracle(format!("{} for agent {a}: {detail}", eq.name())))?;

        let step_hits: Vec<(usize, usize, usize)> = t
            .sources
            .par_iter()
            .enumerate()
            .flat_map_iter(|(x, &k)| {
                let rel = &rel;
                let t = &t;
                t.sources.iter().enumerate().filter(move |&(_, &l)| l > k && rel[k][l]).flat_map(move |(y, _)| {
                    (0..s.action_count()).map(move |i| (x, y, i))
                })
            })
            .map(|(x, y, i)| Ok((x, y, i, eq.equivalent(s, ai, &t.images[x][i], &t.images[y][i])?)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .filter(|&(_, _, _, ok)| !ok)
            .map(|(x, y, i, _)| (x, y, i))
            .collect();
        for (x, y, i) in step_hits {
            step.observe(1.0, || PairWitness {
                agent: a.clone(),
                rho: seq(t.sources[x]),
                sigma: Some(seq(t.sources[y])),
                action: Some(s.action(i)),
            });
        }

        for (x, &k) in t.sources.iter().enumerate() {
            for &i in &forbidden_actions(s, p, a)? {
                if !eq.equivalent(s, ai, &t.states[k], &t.images[x][i])? {
                    local.observe(1.0, || PairWitness {
                        agent: a.clone(),
                        rho: seq(k),
                        sigma: None,
                        action: Some(s.action(i)),
                    });
                }
            }
        }

        let cap = s.capability_at(ai);
        for k in 0..n {
            for l in k + 1..n {
                if rel[k][l] {
                    let d = cap.value(t.states[k].matrix(), t.states[l].matrix());
                    obs.observe(d, || PairWitness {
                        agent: a.clone(),
                        rho: seq(k),
                        sigma: Some(seq(l)),
                        action: None,
                    });
                    let m = t.seqs[k].len().max(t.seqs[l].len());
                    for v in &mut trend[m..] {
                        *v = v.max(d);
                    }
                }
            }
        }
    }
    let (step, local, obs) = (step.finish(), local.finish(), obs.finish());
    let measured_kt = insecurity_bounded_with(s, p, depth, cfg)?.value;
    let (bound, verdict) = if step.holds && local.holds {
        if obs.holds {
            (Some(0.0), depth_label("secure", depth))
        } else {
            (Some(obs.worst), depth_label(&format!("bounded by {:.12}", obs.worst), depth))
        }
    } else {
        (None, "not certified".to_string())
    };
    if let Some(b) = bound {
        if measured_kt > b + TOL_BOUND {
            return Err(Error::Soundness(format!(
                "Unwinding I certified {b} but K_{depth} = {measured_kt}"
            )));
        }
    }
    Ok(UnwindingReport {
        mode: "one",
        oracle: eq.name(),
        depth,
        states: n,
        conditions: vec![step, local, obs],
        bound,
        verdict,
        eps: None,
        measured_kt,
        bound_trend: trend,
    })
}

fn check_equivalence_axioms(rel: &[Vec<bool>]) -> std::result::Result<(), String> {
    let n = rel.len();
    for k in 0..n {
        if !rel[k][k] {
            return Err(format!("not reflexive at state {k}"));
        }
        for l in 0..n {
            if rel[k][l] != rel[l][k] {
                return Err(format!("not symmetric on states {k}, {l}"));
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            if !rel[i][j] {
                continue;
            }
            for k in 0..n {
                if rel[j][k] && !rel[i][k] {
                    return Err(format!("not transitive on states {i}, {j}, {k}"));
                }
            }
        }
    }
    Ok(())
}

fn check_distance_axioms(d: &[Vec<f64>]) -> std::result::Result<(), String> {
    let n = d.len();
    for k in 0..n {
        if d[k][k].abs() > TOL_VALIDATION {
            return Err(format!("self-distance {} at state {k}", d[k][k]));
        }
        for l in 0..n {
            if d[k][l] < -TOL_VALIDATION || !d[k][l].is_finite() {
                return Err(format!("invalid value {} on states {k}, {l}", d[k][l]));
            }
            if (d[k][l] - d[l][k]).abs() > TOL_VALIDATION {
                return Err(format!("not symmetric on states {k}, {l}"));
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if d[i][k] > d[i][j] + d[j][k] + TOL_VALIDATION {
                    return Err(format!("triangle inequality fails on states {i}, {j}, {k}"));
                }
            }
        }
    }
    Ok(())
}

/// Checks the Unwinding II hypotheses on states reachable within `t` steps and emits `ε_o + t·max(ε_s, ε_l)`.
pub fn check_unwinding_two(
    s: &QuantumSystem,
    p: &Policy,
    delta: &dyn PseudoDistance,
    eps: EpsMode,
    t: usize,
) -> Result<UnwindingReport> {
    check_unwinding_two_with(s, p, delta, eps, t, &Config::default())
}

pub fn check_unwinding_two_with(
    s: &QuantumSystem,
    p: &Policy,
    delta: &dyn PseudoDistance,
    eps: EpsMode,
    depth: usize,
    cfg: &Config,
) -> Result<UnwindingReport> {
    policy_matches(s, p)?;
    let given = match eps {
        EpsMode::Given(e) => {
            if [e.step, e.observation, e.local].iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(Error::model("eps constants must be nonnegative"));
            }
            Some(e)
        }
        EpsMode::Fit => None,
    };
    let t = tested(s, depth, cfg)?;
    let n = t.states.len();
    let seq = |k: usize| s.sequence(&t.seqs[k]);
    let allowance = given.unwrap_or(Eps::ZERO);
    let mut step = Tracker::new(STEP, allowance.step);
    let mut obs = Tracker::new(OBSERVATION, allowance.observation);
    let mut local = Tracker::new(LOCAL, allowance.local);
    for (ai, a) in s.agents().iter().enumerate() {
        let d: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|k| {
                (0..n)
                    .map(|l| {
                        if l == k {
                            delta.delta(s, ai, &t.states[k], &t.states[k])
                        } else {
                            delta.delta(s, ai, &t.states[k], &t.states[l])
                        }
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        check_distance_axioms(&d).map_err(|detail| Error::Oracle(format!("{} for agent {a}: {detail}", delta.name())))?;

        let m = t.sources.len();
        let steps: Vec<(usize, usize, usize, f64)> = (0..m)
            .into_par_iter()
            .flat_map_iter(|x| (x + 1..m).flat_map(move |y| (0..s.action_count()).map(move |i| (x, y, i))))
            .map(|(x, y, i)| {
                let after = delta.delta(s, ai, &t.images[x][i], &t.images[y][i])?;
                Ok((x, y, i, after - d[t.sources[x]][t.sources[y]]))
            })
            .collect::<Result<Vec<_>>>()?;
        for (x, y, i, excess) in steps {
            step.observe(excess, || PairWitness {
                agent: a.clone(),
                rho: seq(t.sources[x]),
                sigma: Some(seq(t.sources[y])),
                action: Some(s.action(i)),
            });
        }

        let cap = s.capability_at(ai);
        for k in 0..n {
            for l in k + 1..n {
                let excess = cap.value(t.states[k].matrix(), t.states[l].matrix()) - d[k][l];
                obs.observe(excess, || PairWitness {
                    agent: a.clone(),
                    rho: seq(k),
                    sigma: Some(seq(l)),
                    action: None,
                });
            }
        }

        let forbidden = forbidden_actions(s, p, a)?;
        for (x, &k) in t.sources.iter().enumerate() {
            for &i in &forbidden {
                let v = delta.delta(s, ai, &t.states[k], &t.images[x][i])?;
                local.observe(v, || PairWitness {
                    agent: a.clone(),
                    rho: seq(k),
                    sigma: None,
                    action: Some(s.action(i)),
                });
            }
        }
    }
    let (mut step, mut obs, mut local) = (step.finish(), obs.finish(), local.finish());
    if given.is_none() {
        // Fitted constants hold by construction; violations count instances above zero.
        for c in [&mut step, &mut obs, &mut local] {
            c.holds = true;
        }
    }
    let used = given.unwrap_or(Eps {
        step: step.worst,
        observation: obs.worst,
        local: local.worst,
    });
    let all_hold = step.holds && obs.holds && local.holds;
    let measured_kt = insecurity_bounded_with(s, p, depth, cfg)?.value;
    let bound = all_hold.then(|| used.observation + depth as f64 * used.step.max(used.local));
    if let Some(b) = bound {
        if measured_kt > b + TOL_BOUND {
            return Err(Error::Soundness(format!(
                "Unwinding II certified {b} but K_{depth} = {measured_kt}"
            )));
        }
    }
    let verdict = match bound {
        Some(b) if b <= TOL_BOUND => depth_label("secure", depth),
        Some(b) => depth_label(&format!("K_{depth} <= {b:.12}"), depth),
        None => "not certified".into(),
    };
    Ok(UnwindingReport {
        mode: "two",
        oracle: delta.name(),
        depth,
        states: n,
        conditions: vec![step, obs, local],
        bound,
        verdict,
        eps: Some(used),
        measured_kt,
        bound_trend: Vec::new(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerBound {
    pub kind: &'static str,
    pub value: f64,
    pub depth: usize,
    pub witness: Option<PairWitness>,
}

/// `½ max δ_a(ρ, E_{b,c}(ρ))` over reachable `ρ`, `b ̸⤳ a`, with the canonical
/// pseudo-distance truncated at `depth − |witness(ρ)|`. Never exceeds `K_{depth+1}`.
pub fn lower_bound_from_unwinding(s: &QuantumSystem, p: &Policy, depth: usize) -> Result<LowerBound> {
    lower_bound_from_unwinding_with(s, p, depth, &Config::default())
}

pub fn lower_bound_from_unwinding_with(s: &QuantumSystem, p: &Policy, depth: usize, cfg: &Config) -> Result<LowerBound> {
    policy_matches(s, p)?;
    let reach = s.reachable_indexed(depth, cfg)?;
    let mut tasks = Vec::new();
    for (ai, a) in s.agents().iter().enumerate() {
        for i in forbidden_actions(s, p, a)? {
            for k in 0..reach.len() {
                tasks.push((ai, i, k));
            }
        }
    }
    let values: Vec<f64> = tasks
        .par_iter()
        .map(|&(ai, i, k)| {
            let (seq, rho) = &reach[k];
            let canon = CanonicalPseudoDistance {
                depth: depth - seq.len(),
            };
            canon.value(s, ai, rho, &s.channel_at(i).apply_state(rho))
        })
        .collect();
    let mut best = 0.0;
    let mut witness = None;
    for (&(ai, i, k), &v) in tasks.iter().zip(&values) {
        if v > best {
            best = v;
            witness = Some(PairWitness {
                agent: s.agents()[ai].clone(),
                rho: s.sequence(&reach[k].0),
                sigma: None,
                action: Some(s.action(i)),
            });
        }
    }
    Ok(LowerBound {
        kind: crate::security::LOWER_BOUND,
        value: 0.5 * best,
        depth,
        witness,
    })
}
