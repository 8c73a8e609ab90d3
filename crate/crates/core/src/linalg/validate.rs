//! Invariant checks that report residuals instead of failing fast.

use serde::Serialize;

use super::eigen::min_eigenvalue;
use super::matrix::{ComplexMatrix, C64};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub subject: String,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn new(subject: impl Into<String>) -> Self {
        Self {
            subject: subject.into(),
            checks: Vec::new(),
        }
    }

    pub fn push(&mut self, name: impl Into<String>, residual: f64, tol: f64) {
        self.checks.push(Check {
            name: name.into(),
            passed: residual <= tol,
            residual,
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// One-line summary of failing checks, e.g. for error messages.
    pub fn describe_failures(&self) -> String {
        self.failures()
            .map(|c| format!("{} (residual {:.3e})", c.name, c.residual))
            .collect::<Vec<_>>()
            .join(", ")
    }

    pub fn extend(&mut self, other: ValidationReport) {
        let prefix = other.subject;
        self.checks.extend(other.checks.into_iter().map(|mut c| {
            c.name = format!("{prefix}: {}", c.name);
            c
        }));
    }
}

/// Hermiticity, positivity and unit trace.
pub fn density_checks(subject: &str, m: &ComplexMatrix, tol: f64) -> ValidationReport {
    let mut report = ValidationReport::new(subject);
    if !m.is_square() {
        report.push("square", f64::INFINITY, tol);
        return report;
    }
    report.push("hermitian", m.hermiticity_residual(), tol);
    report.push("positive semidefinite", (-min_eigenvalue(m)).max(0.0), tol);
    report.push("unit trace", (m.trace() - C64::new(1.0, 0.0)).norm(), tol);
    report
}

/// Hermitian positive semidefinite (an effect or POVM element).
pub fn effect_checks(subject: &str, m: &ComplexMatrix, tol: f64) -> ValidationReport {
    let mut report = ValidationReport::new(subject);
    if !m.is_square() {
        report.push("square", f64::INFINITY, tol);
        return report;
    }
    report.push("hermitian", m.hermiticity_residual(), tol);
    report.push("positive semidefinite", (-min_eigenvalue(m)).max(0.0), tol);
    report
}
