use std::collections::BTreeMap;

use serde::Serialize;

use super::matrix::{ComplexMatrix, C64};
use super::state::DensityOperator;
use super::subsystem::embed_operator;
use super::validate::{effect_checks, ValidationReport};
use crate::config::TOL_VALIDATION;
use crate::error::{Error, Result};

/// A positive-operator valued measure `{E_λ}` with `Σ E_λ = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    dim: usize,
    outcomes: Vec<(String, ComplexMatrix)>,
}

pub fn povm_checks(outcomes: &[(String, ComplexMatrix)], tol: f64) -> ValidationReport {
    let mut report = ValidationReport::new("povm");
    let Some((_, first)) = outcomes.first() else {
        report.push("nonempty outcome list", f64::INFINITY, tol);
        return report;
    };
    let dim = first.rows();
    let mut labels = std::collections::BTreeSet::new();
    for (label, _) in outcomes {
        if !labels.insert(label.as_str()) {
            report.push(format!("unique label {label}"), f64::INFINITY, tol);
        }
    }
    let mut sum = ComplexMatrix::zeros(dim, dim);
    for (label, e) in outcomes {
        if e.rows() != dim || e.cols() != dim {
            report.push(format!("effect {label} shape"), f64::INFINITY, tol);
            return report;
        }
        report.extend(effect_checks(&format!("effect {label}"), e, tol));
        sum = &sum + e;
    }
    report.push(
        "completeness (sum E = I)",
        sum.max_abs_diff(&ComplexMatrix::identity(dim)),
        tol,
    );
    report
}

impl Povm {
    pub fn new(outcomes: Vec<(String, ComplexMatrix)>) -> Result<Self> {
        Self::with_tolerance(outcomes, TOL_VALIDATION)
    }

    pub fn with_tolerance(outcomes: Vec<(String, ComplexMatrix)>, tol: f64) -> Result<Self> {
        let report = povm_checks(&outcomes, tol);
        if !report.passed() {
            return Err(Error::Invalid {
                what: "povm",
                detail: report.describe_failures(),
            });
        }
        Ok(Self::from_effects_unchecked(outcomes))
    }

    pub(crate) fn from_effects_unchecked(outcomes: Vec<(String, ComplexMatrix)>) -> Self {
        Self {
            dim: outcomes[0].1.rows(),
            outcomes,
        }
    }

    /// Builds `E_λ = M_λ† M_λ` from measurement operators.
    pub fn from_measurement_operators(ops: Vec<(String, ComplexMatrix)>) -> Result<Self> {
        Self::new(ops.into_iter().map(|(l, m)| (l, &m.adjoint() * &m)).collect())
    }

    /// Computational-basis measurement of factor `factor` in a space factored as `dims`.
    /// Outcome labels are the basis indices `"0"`, `"1"`, ….
    pub fn computational_basis(dims: &[usize], factor: usize) -> Result<Self> {
        let d = *dims
            .get(factor)
            .ok_or_else(|| Error::dim(format!("factor {factor} out of range")))?;
        let outcomes = (0..d)
            .map(|k| {
                let mut p = ComplexMatrix::zeros(d, d);
                p[(k, k)] = C64::new(1.0, 0.0);
                Ok((k.to_string(), embed_operator(&p, dims, &[factor])?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_effects_unchecked(outcomes))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outcomes(&self) -> &[(String, ComplexMatrix)] {
        &self.outcomes
    }

    pub fn validate(&self, tol: f64) -> ValidationReport {
        povm_checks(&self.outcomes, tol)
    }

    /// Lifts every effect to `E_λ ⊗ I` (or `I ⊗ E_λ`) on a larger space.
    pub fn embed(&self, dims: &[usize], targets: &[usize]) -> Result<Self> {
        let outcomes = self
            .outcomes
            .iter()
            .map(|(l, e)| Ok((l.clone(), embed_operator(e, dims, targets)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_effects_unchecked(outcomes))
    }

    pub fn measure(&self, rho: &DensityOperator) -> Result<Distribution> {
        if rho.dim() != self.dim {
            return Err(Error::dim(format!(
                "povm of dimension {} applied to a state of dimension {}",
                self.dim,
                rho.dim()
            )));
        }
        Ok(self.measure_unchecked(rho.matrix()))
    }

    pub(crate) fn measure_unchecked(&self, rho: &ComplexMatrix) -> Distribution {
        Distribution {
            probs: self
                .outcomes
                .iter()
                .map(|(l, e)| (l.clone(), e.trace_product(rho).re.clamp(0.0, 1.0)))
                .collect(),
        }
    }

    /// `½ Σ_λ |tr(E_λ (ρ − σ))|` without materializing the distributions.
    pub(crate) fn distance_unchecked(&self, rho: &ComplexMatrix, sigma: &ComplexMatrix) -> f64 {
        let half_sum: f64 = self
            .outcomes
            .iter()
            .map(|(_, e)| {
                let p = e.trace_product(rho).re.clamp(0.0, 1.0);
                let q = e.trace_product(sigma).re.clamp(0.0, 1.0);
                (p - q).abs()
            })
            .sum();
        (0.5 * half_sum).clamp(0.0, 1.0)
    }
}

/// `p_E(ρ, λ) = tr(E_λ ρ)`, clamped to `[0, 1]`.
pub fn measure_povm(m: &Povm, rho: &DensityOperator) -> Result<Distribution> {
    m.measure(rho)
}

/// Post-measurement state `M_λ ρ M_λ† / p(λ)` for an ordinary measurement operator.
/// Returns `None` when the outcome has probability zero.
pub fn post_measurement_state(m_lambda: &ComplexMatrix, rho: &DensityOperator) -> Result<Option<DensityOperator>> {
    if m_lambda.cols() != rho.dim() || m_lambda.rows() != rho.dim() {
        return Err(Error::dim("measurement operator does not match the state"));
    }
    let unnorm = m_lambda.sandwich(rho.matrix());
    let p = unnorm.trace().re;
    if p <= TOL_VALIDATION {
        return Ok(None);
    }
    Ok(Some(DensityOperator::from_matrix_unchecked(unnorm.scale_real(1.0 / p))))
}

/// Outcome probabilities keyed by label, in the order the outcomes were declared.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distribution {
    probs: Vec<(String, f64)>,
}

impl Distribution {
    pub fn new(probs: Vec<(String, f64)>) -> Result<Self> {
        let total: f64 = probs.iter().map(|(_, p)| p).sum();
        if probs.iter().any(|(_, p)| *p < -TOL_VALIDATION) || (total - 1.0).abs() > TOL_VALIDATION {
            return Err(Error::Invalid {
                what: "distribution",
                detail: format!("probabilities must be nonnegative and sum to 1 (sum {total})"),
            });
        }
        Ok(Self {
            probs: probs.into_iter().map(|(l, p)| (l, p.max(0.0))).collect(),
        })
    }

    pub fn probs(&self) -> &[(String, f64)] {
        &self.probs
    }

    pub fn get(&self, label: &str) -> f64 {
        self.probs.iter().find(|(l, _)| l == label).map_or(0.0, |(_, p)| *p)
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().map(|(_, p)| p).sum()
    }
}

/// Total-variation distance `½ Σ_x |p(x) − q(x)|`; labels missing on one side count as 0.
pub fn distribution_distance(p: &Distribution, q: &Distribution) -> f64 {
    let mut merged: BTreeMap<&str, (f64, f64)> = BTreeMap::new();
    for (l, v) in &p.probs {
        merged.entry(l).or_default().0 += v;
    }
    for (l, v) in &q.probs {
        merged.entry(l).or_default().1 += v;
    }
    (0.5 * merged.values().map(|(a, b)| (a - b).abs()).sum::<f64>()).clamp(0.0, 1.0)
}

/// `sup_{E ∈ ms} d(p_E(ρ), p_E(σ))`; 0 for an empty family.
pub fn measurement_distance(ms: &[Povm], rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::dim("states differ in dimension"));
    }
    if let Some(m) = ms.iter().find(|m| m.dim != rho.dim()) {
        return Err(Error::dim(format!(
            "povm of dimension {} in a family applied to dimension {}",
            m.dim,
            rho.dim()
        )));
    }
    Ok(ms
        .iter()
        .map(|m| m.distance_unchecked(rho.matrix(), sigma.matrix()))
        .fold(0.0, f64::max))
}
