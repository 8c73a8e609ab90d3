//! Serde mirror of the JSON model files.

use std::collections::BTreeMap;

use serde::Deserialize;

/// A matrix entry: a real number or an `[re, im]` pair.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

pub type Matrix = Vec<Vec<Entry>>;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum State {
    Matrix(Matrix),
    Pure { pure: Vec<Entry> },
    Basis { basis: usize },
    Mixed { maximally_mixed: bool },
    Ensemble { ensemble: Vec<Weighted> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Weighted {
    pub weight: f64,
    pub state: State,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Action {
    pub agent: String,
    pub command: String,
    pub kraus: Option<Vec<Matrix>>,
    pub unitary: Option<Matrix>,
    pub gate: Option<String>,
    pub theta: Option<f64>,
    /// Factors the operators act on; the whole space when absent.
    pub targets: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PovmSpec {
    Named {
        name: String,
        effects: BTreeMap<String, Matrix>,
        #[serde(default)]
        targets: Option<Vec<usize>>,
    },
    Basis {
        basis: usize,
    },
    Plain(BTreeMap<String, Matrix>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Measure {
    pub agent: String,
    #[serde(default)]
    pub povms: Vec<PovmSpec>,
    #[serde(default)]
    pub unrestricted: bool,
    /// Each entry: factors whose reduced state the agent may measure arbitrarily.
    #[serde(default)]
    pub views: Vec<Vec<usize>>,
    pub factors: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Location {
    pub name: String,
    pub dim: usize,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Access {
    #[serde(default)]
    pub read: BTreeMap<String, Vec<Vec<String>>>,
    #[serde(default)]
    pub alter: BTreeMap<String, Vec<Vec<String>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Model {
    #[serde(default)]
    pub name: Option<String>,
    pub dims: Vec<usize>,
    pub initial: State,
    pub agents: Vec<String>,
    #[serde(default)]
    pub commands: Vec<String>,
    #[serde(default, rename = "do")]
    pub actions: Vec<Action>,
    #[serde(default)]
    pub measure: Vec<Measure>,
    #[serde(default)]
    pub policy: Option<Vec<(String, String)>>,
    #[serde(default)]
    pub locations: Option<Vec<Location>>,
    #[serde(default)]
    pub access: Option<Access>,
    /// Decompositions of the initial state for the strong degree.
    #[serde(default)]
    pub decompositions: Vec<Vec<Weighted>>,
}

/// An action sequence written as `[[agent, command], ...]`.
pub type Sequence = Vec<(String, String)>;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquivalenceTable {
    /// Each class lists the sequences whose final states it contains.
    pub classes: Vec<Vec<Sequence>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceTable {
    pub states: Vec<Sequence>,
    pub table: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum OracleTable {
    Equivalence {
        #[serde(default)]
        label: Option<String>,
        agents: BTreeMap<String, EquivalenceTable>,
    },
    Distance {
        #[serde(default)]
        label: Option<String>,
        agents: BTreeMap<String, DistanceTable>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparableTerm {
    pub weight: f64,
    pub left: State,
    pub right: State,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Extension {
    pub agent: String,
    pub command: String,
    /// `[[F_i, F'_i], ...]`.
    pub product: Option<Vec<(Matrix, Matrix)>>,
    pub kraus: Option<Vec<Matrix>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompositionExtras {
    pub sigma0: State,
    #[serde(default)]
    pub decomposition: Option<Vec<SeparableTerm>>,
    #[serde(default)]
    pub extensions: Vec<Extension>,
    #[serde(default)]
    pub commutative: bool,
    #[serde(default)]
    pub left_decompositions: Vec<Vec<Weighted>>,
    #[serde(default)]
    pub right_decompositions: Vec<Vec<Weighted>>,
}
