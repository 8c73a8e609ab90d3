use rayon::prelude::*;
use serde::Serialize;

use super::matrix::{exceeds, matrix_satisfies_policy, reduced_distance, AccessMatrix, LocationSet, LocationSpace, PolicyCheck};
use crate::automaton::{ActionSequence, AgentId, CommandId, Policy, QuantumSystem};
use crate::config::{Config, TOL_BOUND, TOL_COMPARE};
use crate::error::{Error, Result};
use crate::linalg::{partial_trace_matrix, ComplexMatrix, DensityOperator, Subsystems};
use crate::security::insecurity_bounded_with;

/// Which location sets `K` the RM2/RM3 quantifier ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KRange {
    /// Nonempty members of some agent's read family; all that the bound's proof uses.
    ReadSets,
    /// Every nonempty `K ⊆ N`.
    AllSubsets,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RmWitness {
    pub agent: AgentId,
    pub command: Option<CommandId>,
    pub rho: ActionSequence,
    pub sigma: Option<ActionSequence>,
    pub k: Option<LocationSet>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RmCondition {
    pub holds: bool,
    pub worst: f64,
    pub violations: usize,
    pub witness: Option<RmWitness>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RmReport {
    pub depth: usize,
    pub theta: f64,
    pub eps: f64,
    pub k_range: KRange,
    pub k_sets: usize,
    pub states: usize,
    pub policy: PolicyCheck,
    pub policy_ok: bool,
    pub rm1: RmCondition,
    pub rm2: RmCondition,
    pub rm3: RmCondition,
    /// Discrimination levels within rounding of `ε`.
    pub warnings: usize,
    /// `θ + 2tε`, present only when the policy and all three assumptions hold.
    pub bound: Option<f64>,
    pub verdict: String,
    pub measured_kt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RmFit {
    pub theta: f64,
    /// Smallest `ε` making RM2 and RM3 hold on the tested states; absent when infeasible.
    pub eps: Option<f64>,
    pub needed_eps: f64,
    pub feasible: bool,
    /// The instance forcing the largest `ε`.
    pub witness: Option<RmWitness>,
}

struct Grid<'a> {
    s: &'a QuantumSystem,
    seqs: Vec<Vec<usize>>,
    sources: Vec<usize>,
    ks: Vec<(LocationSet, Subsystems)>,
    /// `delta[a][k][l]` and `obs[a][k][l]` over all tested states.
    delta: Vec<Vec<Vec<f64>>>,
    obs: Vec<Vec<Vec<f64>>>,
    /// `alter_hit[i][q]`: the agent of action `i` may alter a location in `ks[q]`.
    alter_hit: Vec<Vec<bool>>,
    /// `moved[x][i][q] = d_K(ρ_x, E_i ρ_x)` for source `x`.
    moved: Vec<Vec<Vec<f64>>>,
    /// `reduced_images[x][i][q] = tr_{N∖K} E_i ρ_x`.
    reduced_images: Vec<Vec<Vec<ComplexMatrix>>>,
}

impl<'a> Grid<'a> {
    fn new(
        s: &'a QuantumSystem,
        loc: &LocationSpace,
        m: &AccessMatrix,
        range: KRange,
        depth: usize,
        cfg: &Config,
    ) -> Result<Self> {
        loc.check_system(s)?;
        let candidates: Vec<LocationSet> = match range {
            KRange::AllSubsets => {
                if loc.len() > cfg.limits.max_locations {
                    return Err(Error::Limit(format!(
                        "{} locations exceed the cap {} for subset-quantified audits",
                        loc.len(),
                        cfg.limits.max_locations
                    )));
                }
                loc.all_subsets().into_iter().filter(|k| !k.is_empty()).collect()
            }
            KRange::ReadSets => {
                let mut all: Vec<LocationSet> =
                    s.agents().iter().flat_map(|a| m.read(a).nonempty().cloned()).collect();
                all.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
                all.dedup();
                all
            }
        };
        let ks = candidates
            .into_iter()
            .map(|k| Ok((loc.selection(&k)?, k)))
            .map(|r: Result<_>| r.map(|(sel, k)| (k, sel)))
            .collect::<Result<Vec<_>>>()?;

        let reach = s.reachable_indexed(depth, cfg)?;
        let (seqs, states): (Vec<_>, Vec<DensityOperator>) = reach.into_iter().unzip();
        let n = states.len();
        let sources: Vec<usize> = (0..n).filter(|&k| seqs[k].len() < depth).collect();

        let maximal: Vec<Vec<Subsystems>> = s
            .agents()
            .iter()
            .map(|a| m.read(a).maximal().into_iter().map(|k| loc.selection(k)).collect())
            .collect::<Result<_>>()?;
        let mut delta = Vec::with_capacity(s.agents().len());
        let mut obs = Vec::with_capacity(s.agents().len());
        for (ai, views) in maximal.iter().enumerate() {
            let cap = s.capability_at(ai);
            let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..n)
                .into_par_iter()
                .map(|k| {
                    (0..n)
                        .map(|l| {
                            let d = views
                                .iter()
                                .map(|v| reduced_distance(loc, v, states[k].matrix(), states[l].matrix()))
                                .fold(0.0, f64::max);
                            (d, cap.value(states[k].matrix(), states[l].matrix()))
                        })
                        .unzip()
                })
                .collect();
            let (d, o): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
            delta.push(d);
            obs.push(o);
        }

        let alter_hit = (0..s.action_count())
            .map(|i| {
                let a = &s.action(i).agent;
                ks.iter()
                    .map(|(k, _)| m.alter(a).nonempty().any(|l| !l.is_disjoint(k)))
                    .collect()
            })
            .collect();

        let per_source: Vec<(Vec<Vec<f64>>, Vec<Vec<ComplexMatrix>>)> = sources
            .par_iter()
            .map(|&k| {
                let rho = &states[k];
                let before: Vec<ComplexMatrix> = ks.iter().map(|(_, sel)| partial_trace_matrix(rho.matrix(), sel)).collect();
                (0..s.action_count())
                    .map(|i| {
                        let img = s.channel_at(i).apply_state(rho);
                        let reduced: Vec<ComplexMatrix> =
                            ks.iter().map(|(_, sel)| partial_trace_matrix(img.matrix(), sel)).collect();
                        let moved = before
                            .iter()
                            .zip(&reduced)
                            .map(|(b, r)| crate::linalg::trace_distance_matrices(b, r))
                            .collect();
                        (moved, reduced)
                    })
                    .unzip()
            })
            .collect();
        let (moved, reduced_images) = per_source.into_iter().unzip();
        Ok(Self {
            s,
            seqs,
            sources,
            ks,
            delta,
            obs,
            alter_hit,
            moved,
            reduced_images,
        })
    }

    fn seq(&self, k: usize) -> ActionSequence {
        self.s.sequence(&self.seqs[k])
    }

    fn witness(&self, agent: usize, action: Option<usize>, rho: usize, sigma: Option<usize>, q: Option<usize>) -> RmWitness {
        RmWitness {
            agent: self.s.agents()[agent].clone(),
            command: action.map(|i| self.s.action(i).command),
            rho: self.seq(rho),
            sigma: sigma.map(|l| self.seq(l)),
            k: q.map(|q| self.ks[q].0.clone()),
        }
    }

    /// RM1 excesses `d_a − δ_a` in a deterministic order.
    fn rm1(&self) -> impl Iterator<Item = (f64, usize, usize, usize)> + '_ {
        let n = self.seqs.len();
        (0..self.s.agents().len()).flat_map(move |a| {
            (0..n).flat_map(move |k| (k + 1..n).map(move |l| (self.obs[a][k][l] - self.delta[a][k][l], a, k, l)))
        })
    }

    /// RM3 candidates: `(d_K(ρ, E_i ρ), x, i, q)` where the acting agent may not alter `K`.
    fn rm3(&self) -> impl Iterator<Item = (f64, usize, usize, usize)> + '_ {
        (0..self.sources.len()).flat_map(move |x| {
            (0..self.s.action_count()).flat_map(move |i| {
                (0..self.ks.len())
                    .filter(move |&q| !self.alter_hit[i][q])
                    .map(move |q| (self.moved[x][i][q], x, i, q))
            })
        })
    }

    /// RM2 instances over source pairs: `(d_K(E ρ, E σ) − δ_b(ρ, σ), max move, x, y, i, q)`.
    fn rm2(&self) -> Vec<(f64, f64, usize, usize, usize, usize)> {
        let m = self.sources.len();
        (0..m)
            .into_par_iter()
            .flat_map_iter(|x| {
                (x + 1..m).flat_map(move |y| {
                    (0..self.s.action_count()).flat_map(move |i| {
                        let b = self.s.action_agent(i);
                        let base = self.delta[b][self.sources[x]][self.sources[y]];
                        (0..self.ks.len()).map(move |q| {
                            let d = crate::linalg::trace_distance_matrices(
                                &self.reduced_images[x][i][q],
                                &self.reduced_images[y][i][q],
                            );
                            let mv = self.moved[x][i][q].max(self.moved[y][i][q]);
                            (d - base, mv, x, y, i, q)
                        })
                    })
                })
            })
            .collect()
    }
}

struct Worst {
    worst: f64,
    violations: usize,
    witness: Option<RmWitness>,
}

impl Worst {
    fn new() -> Self {
        Self {
            worst: f64::NEG_INFINITY,
            violations: 0,
            witness: None,
        }
    }

    fn see(&mut self, value: f64, violated: bool, witness: impl FnOnce() -> RmWitness) {
        if violated {
            self.violations += 1;
        }
        if value > self.worst {
            self.worst = value;
            self.witness = Some(witness());
        }
    }

    fn finish(self) -> RmCondition {
        RmCondition {
            holds: self.violations == 0,
            worst: if self.worst.is_finite() { self.worst.max(0.0) } else { 0.0 },
            violations: self.violations,
            witness: self.witness,
        }
    }
}

#[allow(clippy::too_many_arguments)]
pub fn audit_rm(
    s: &QuantumSystem,
    loc: &LocationSpace,
    m: &AccessMatrix,
    p: &Policy,
    theta: f64,
    eps: f64,
    depth: usize,
) -> Result<RmReport> {
    audit_rm_with(s, loc, m, p, theta, eps, depth, KRange::ReadSets, &Config::default())
}

/// Checks RM1–RM3 on states reachable within `depth` steps (commands applied to those within `depth − 1`).
#[allow(clippy::too_many_arguments)]
pub fn audit_rm_with(
    s: &QuantumSystem,
    loc: &LocationSpace,
    m: &AccessMatrix,
    p: &Policy,
    theta: f64,
    eps: f64,
    depth: usize,
    range: KRange,
    cfg: &Config,
) -> Result<RmReport> {
    if !(theta.is_finite() && theta >= 0.0 && eps.is_finite() && eps >= 0.0) {
        return Err(Error::model("theta and eps must be nonnegative"));
    }
    if p.agents().iter().ne(s.agents().iter()) {
        return Err(Error::model("policy agents differ from the system agents"));
    }
    let policy = matrix_satisfies_policy(m, loc, p)?;
    let g = Grid::new(s, loc, m, range, depth, cfg)?;

    let mut rm1 = Worst::new();
    for (excess, a, k, l) in g.rm1() {
        rm1.see(excess - theta, excess > theta + TOL_COMPARE, || g.witness(a, None, k, Some(l), None));
    }
    let mut warnings = 0;
    let mut rm3 = Worst::new();
    for (mv, x, i, q) in g.rm3() {
        if (mv - eps).abs() <= TOL_COMPARE {
            warnings += 1;
        }
        let hit = exceeds(mv, eps);
        rm3.see(mv - eps, hit, || g.witness(s.action_agent(i), Some(i), g.sources[x], None, Some(q)));
    }
    let mut rm2 = Worst::new();
    for (excess, mv, x, y, i, q) in g.rm2() {
        if !exceeds(mv, eps) {
            continue;
        }
        rm2.see(excess, excess > TOL_COMPARE, || {
            g.witness(s.action_agent(i), Some(i), g.sources[x], Some(g.sources[y]), Some(q))
        });
    }
    let (rm1, rm2, rm3) = (rm1.finish(), rm2.finish(), rm3.finish());
    let measured_kt = insecurity_bounded_with(s, p, depth, cfg)?.value;
    let certified = policy.satisfied && rm1.holds && rm2.holds && rm3.holds;
    let bound = certified.then_some(theta + 2.0 * depth as f64 * eps);
    if let Some(b) = bound {
        if measured_kt > b + TOL_BOUND {
            return Err(Error::Soundness(format!(
                "reference-monitor audit certified {b} but K_{depth} = {measured_kt}"
            )));
        }
    }
    let verdict = match bound {
        Some(b) => format!("K_{depth} <= {b:.12} (certified at depth {depth})"),
        None if !policy.satisfied => "not certified: matrix violates the policy".into(),
        None => "not certified".into(),
    };
    Ok(RmReport {
        depth,
        theta,
        eps,
        k_range: range,
        k_sets: g.ks.len(),
        states: g.seqs.len(),
        policy_ok: policy.satisfied,
        policy,
        rm1,
        rm2,
        rm3,
        warnings,
        bound,
        verdict,
        measured_kt,
    })
}

pub fn fit_rm_constants(s: &QuantumSystem, loc: &LocationSpace, m: &AccessMatrix, p: &Policy, depth: usize) -> Result<RmFit> {
    fit_rm_constants_with(s, loc, m, p, depth, KRange::ReadSets, &Config::default())
}

/// `θ = max (d_a − δ_a)⁺`; `ε` is the largest discrimination level among
/// RM3 instances without alter rights and RM2 instances whose consequent fails.
/// Infeasible when that level reaches 1, where every `Dis` is already false.
pub fn fit_rm_constants_with(
    s: &QuantumSystem,
    loc: &LocationSpace,
    m: &AccessMatrix,
    p: &Policy,
    depth: usize,
    range: KRange,
    cfg: &Config,
) -> Result<RmFit> {
    if p.agents().iter().ne(s.agents().iter()) {
        return Err(Error::model("policy agents differ from the system agents"));
    }
    let g = Grid::new(s, loc, m, range, depth, cfg)?;
    let snap = |x: f64| if x <= TOL_COMPARE { 0.0 } else { x };
    let theta = snap(g.rm1().map(|x| x.0).fold(0.0, f64::max));
    let mut needed = Worst::new();
    for (mv, x, i, q) in g.rm3() {
        needed.see(mv, false, || g.witness(s.action_agent(i), Some(i), g.sources[x], None, Some(q)));
    }
    for (excess, mv, x, y, i, q) in g.rm2() {
        if excess > TOL_COMPARE {
            needed.see(mv, false, || {
                g.witness(s.action_agent(i), Some(i), g.sources[x], Some(g.sources[y]), Some(q))
            });
        }
    }
    let needed_eps = if needed.worst.is_finite() { snap(needed.worst) } else { 0.0 };
    let feasible = needed_eps < 1.0 - TOL_COMPARE;
    Ok(RmFit {
        theta,
        eps: feasible.then_some(needed_eps),
        needed_eps,
        feasible,
        witness: if needed_eps > 0.0 { needed.witness } else { None },
    })
}
