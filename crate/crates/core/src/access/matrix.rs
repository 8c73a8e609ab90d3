use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::automaton::{AgentId, Policy, QuantumSystem};
use crate::config::TOL_COMPARE;
use crate::error::{Error, Result};
use crate::linalg::{partial_trace_matrix, trace_distance_matrices, ComplexMatrix, DensityOperator, Subsystems};
use crate::unwinding::ReducedState;

pub type LocationSet = BTreeSet<String>;

/// Named storage locations `N` with `H = ⊗_{n ∈ N} H_n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LocationSpace {
    locations: Vec<(String, usize)>,
}

impl LocationSpace {
    pub fn new(locations: Vec<(String, usize)>) -> Result<Self> {
        if locations.is_empty() {
            return Err(Error::model("a location space needs at least one location"));
        }
        let mut seen = BTreeSet::new();
        for (n, d) in &locations {
            if *d == 0 {
                return Err(Error::dim(format!("location {n} has dimension 0")));
            }
            if n.is_empty() || !seen.insert(n.as_str()) {
                return Err(Error::model(format!("location name {n:?} is empty or repeated")));
            }
        }
        Ok(Self { locations })
    }

    /// One location per tensor factor, named `n1`, `n2`, ...
    pub fn per_factor(dims: &[usize]) -> Self {
        Self::new(dims.iter().enumerate().map(|(i, d)| (format!("n{}", i + 1), *d)).collect())
            .expect("factor dims are positive")
    }

    pub fn locations(&self) -> &[(String, usize)] {
        &self.locations
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.locations.iter().map(|(n, _)| n.as_str())
    }

    pub fn dims(&self) -> Vec<usize> {
        self.locations.iter().map(|(_, d)| *d).collect()
    }

    pub fn dim(&self) -> usize {
        self.locations.iter().map(|(_, d)| d).product()
    }

    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    pub fn index(&self, name: &str) -> Result<usize> {
        self.locations
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| Error::model(format!("unknown location {name:?}")))
    }

    pub fn selection(&self, k: &LocationSet) -> Result<Subsystems> {
        let keep = k.iter().map(|n| self.index(n)).collect::<Result<Vec<_>>>()?;
        Subsystems::new(self.dims(), keep)
    }

    pub(crate) fn check_dim(&self, rho: &ComplexMatrix) -> Result<()> {
        if rho.rows() != self.dim() {
            return Err(Error::dim(format!(
                "state has dimension {} but the locations multiply to {}",
                rho.rows(),
                self.dim()
            )));
        }
        Ok(())
    }

    pub fn check_system(&self, s: &QuantumSystem) -> Result<()> {
        if s.dim() != self.dim() {
            return Err(Error::dim(format!(
                "system dimension {} differs from the location space dimension {}",
                s.dim(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// Every subset of `N`, smallest first.
    pub fn all_subsets(&self) -> Vec<LocationSet> {
        let n = self.locations.len();
        let mut out: Vec<LocationSet> = (0u64..1 << n)
            .map(|mask| {
                (0..n)
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| self.locations[i].0.clone())
                    .collect()
            })
            .collect();
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        out
    }
}

/// A below-closed family of location sets.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct LocationFamily {
    sets: BTreeSet<LocationSet>,
}

impl LocationFamily {
    /// The below-closure of `sets`; the empty family stays empty.
    pub fn below_closure(sets: impl IntoIterator<Item = LocationSet>) -> Self {
        let mut out = BTreeSet::new();
        for k in sets {
            let items: Vec<String> = k.into_iter().collect();
            for mask in 0u64..1 << items.len() {
                out.insert(
                    (0..items.len())
                        .filter(|i| mask >> i & 1 == 1)
                        .map(|i| items[i].clone())
                        .collect(),
                );
            }
        }
        Self { sets: out }
    }

    pub fn from_lists<S: AsRef<str>>(lists: &[&[S]]) -> Self {
        Self::below_closure(lists.iter().map(|l| l.iter().map(|x| x.as_ref().to_string()).collect()))
    }

    pub fn sets(&self) -> &BTreeSet<LocationSet> {
        &self.sets
    }

    pub fn contains(&self, k: &LocationSet) -> bool {
        self.sets.contains(k)
    }

    pub fn is_subfamily_of(&self, other: &Self) -> bool {
        self.sets.is_subset(&other.sets)
    }

    /// Sets not strictly contained in another member.
    pub fn maximal(&self) -> Vec<&LocationSet> {
        self.sets
            .iter()
            .filter(|k| !self.sets.iter().any(|l| l.len() > k.len() && k.is_subset(l)))
            .collect()
    }

    /// Nonempty members.
    pub fn nonempty(&self) -> impl Iterator<Item = &LocationSet> {
        self.sets.iter().filter(|k| !k.is_empty())
    }
}

/// `read(a)` and `alter(a)` for each agent; absent agents have empty families.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct AccessMatrix {
    pub read: BTreeMap<AgentId, LocationFamily>,
    pub alter: BTreeMap<AgentId, LocationFamily>,
}

static EMPTY: LocationFamily = LocationFamily { sets: BTreeSet::new() };

impl AccessMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_read(mut self, a: impl Into<AgentId>, fam: LocationFamily) -> Self {
        self.read.insert(a.into(), fam);
        self
    }

    pub fn with_alter(mut self, a: impl Into<AgentId>, fam: LocationFamily) -> Self {
        self.alter.insert(a.into(), fam);
        self
    }

    pub fn read(&self, a: &AgentId) -> &LocationFamily {
        self.read.get(a).unwrap_or(&EMPTY)
    }

    pub fn alter(&self, a: &AgentId) -> &LocationFamily {
        self.alter.get(a).unwrap_or(&EMPTY)
    }

    /// Every referenced location exists and every agent is known.
    pub fn validate(&self, loc: &LocationSpace, agents: &BTreeSet<AgentId>) -> Result<()> {
        for (kind, map) in [("read", &self.read), ("alter", &self.alter)] {
            for (a, fam) in map {
                if !agents.contains(a) {
                    return Err(Error::model(format!("{kind} rights given to unknown agent {a}")));
                }
                for k in fam.sets() {
                    for n in k {
                        loc.index(n)?;
                    }
                }
            }
        }
        Ok(())
    }

    /// `δ_a` as an unwinding oracle, one view per maximal read set.
    pub fn read_oracle(&self, loc: &LocationSpace, s: &QuantumSystem) -> Result<ReducedState> {
        loc.check_system(s)?;
        let views = s
            .agents()
            .iter()
            .map(|a| self.read(a).maximal().into_iter().map(|k| loc.selection(k)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(ReducedState::new("delta-read", views))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PolicyViolation {
    /// 1: `a ⤳ b` but `read(a) ⊄ read(b)`; 2: `read(a)` meets `alter(b)` but `b ̸⤳ a`.
    pub condition: u8,
    pub a: AgentId,
    pub b: AgentId,
    pub k: Option<LocationSet>,
    pub l: Option<LocationSet>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PolicyCheck {
    pub satisfied: bool,
    pub violations: Vec<PolicyViolation>,
}

pub fn matrix_satisfies_policy(m: &AccessMatrix, loc: &LocationSpace, p: &Policy) -> Result<PolicyCheck> {
    m.validate(loc, p.agents())?;
    let mut violations = Vec::new();
    for a in p.agents() {
        for b in p.agents() {
            if p.allows(a, b) && !m.read(a).is_subfamily_of(m.read(b)) {
                let k = m.read(a).sets().iter().find(|k| !m.read(b).contains(k)).cloned();
                violations.push(PolicyViolation {
                    condition: 1,
                    a: a.clone(),
                    b: b.clone(),
                    k,
                    l: None,
                });
            }
            if p.allows(b, a) {
                continue;
            }
            let hit = m
                .read(a)
                .nonempty()
                .flat_map(|k| m.alter(b).nonempty().map(move |l| (k, l)))
                .find(|(k, l)| !k.is_disjoint(l));
            if let Some((k, l)) = hit {
                violations.push(PolicyViolation {
                    condition: 2,
                    a: a.clone(),
                    b: b.clone(),
                    k: Some(k.clone()),
                    l: Some(l.clone()),
                });
            }
        }
    }
    Ok(PolicyCheck {
        satisfied: violations.is_empty(),
        violations,
    })
}

pub(crate) fn reduced_distance(loc: &LocationSpace, sel: &Subsystems, rho: &ComplexMatrix, sigma: &ComplexMatrix) -> f64 {
    debug_assert_eq!(sel.total_dim(), loc.dim());
    if sel.is_everything() {
        trace_distance_matrices(rho, sigma)
    } else {
        trace_distance_matrices(&partial_trace_matrix(rho, sel), &partial_trace_matrix(sigma, sel))
    }
}

/// `δ_a(ρ, σ) = max_{K ∈ read(a)} d(tr_{N∖K} ρ, tr_{N∖K} σ)`; 0 for an empty family.
pub fn delta_read(
    m: &AccessMatrix,
    loc: &LocationSpace,
    a: &AgentId,
    rho: &DensityOperator,
    sigma: &DensityOperator,
) -> Result<f64> {
    loc.check_dim(rho.matrix())?;
    loc.check_dim(sigma.matrix())?;
    let mut best: f64 = 0.0;
    for k in m.read(a).maximal() {
        best = best.max(reduced_distance(loc, &loc.selection(k)?, rho.matrix(), sigma.matrix()));
    }
    Ok(best)
}

/// `Dis(ρ, σ | ε, K)`: the reduced states on `K` are more than `ε` apart.
pub fn discriminable(loc: &LocationSpace, rho: &DensityOperator, sigma: &DensityOperator, eps: f64, k: &LocationSet) -> Result<bool> {
    loc.check_dim(rho.matrix())?;
    loc.check_dim(sigma.matrix())?;
    let d = reduced_distance(loc, &loc.selection(k)?, rho.matrix(), sigma.matrix());
    Ok(exceeds(d, eps))
}

/// Strict `d > ε`, ignoring excesses at rounding level.
pub(crate) fn exceeds(d: f64, eps: f64) -> bool {
    d > eps + TOL_COMPARE
}
