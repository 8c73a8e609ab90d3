use super::eigen::trace_norm_hermitian;
use super::matrix::{ComplexMatrix, C64};
use super::subsystem::{partial_trace_matrix, Subsystems};
use super::validate::{density_checks, ValidationReport};
use crate::config::TOL_VALIDATION;
use crate::error::{Error, Result};

/// A positive, unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    /// Validates `matrix` with the default tolerance.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, TOL_VALIDATION)
    }

    pub fn with_tolerance(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        let report = density_checks("density operator", &matrix, tol);
        if !report.passed() {
            return Err(Error::Invalid {
                what: "density operator",
                detail: report.describe_failures(),
            });
        }
        Ok(Self { matrix })
    }

    /// Wraps a matrix known to be a state, e.g. the image of a state under a channel.
    pub(crate) fn from_matrix_unchecked(matrix: ComplexMatrix) -> Self {
        debug_assert!(matrix.is_square());
        Self { matrix }
    }

    /// `|ψ⟩⟨ψ|` for a unit vector `ψ`.
    pub fn pure(amplitudes: &[C64]) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(C64::norm_sqr).sum();
        if (norm - 1.0).abs() > TOL_VALIDATION {
            return Err(Error::Invalid {
                what: "pure state",
                detail: format!("squared norm {norm} is not 1"),
            });
        }
        Ok(Self::from_matrix_unchecked(ComplexMatrix::projector(amplitudes)))
    }

    /// Computational basis state `|index⟩⟨index|` in dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut m = ComplexMatrix::zeros(dim, dim);
        m[(index, index)] = C64::new(1.0, 0.0);
        Self::from_matrix_unchecked(m)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::from_matrix_unchecked(ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64))
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn validate(&self, tol: f64) -> ValidationReport {
        density_checks("density operator", &self.matrix, tol)
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self::from_matrix_unchecked(self.matrix.kron(&other.matrix))
    }

    /// Reduced state on the factors in `keep`, in their original order.
    pub fn partial_trace(&self, dims: &[usize], keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::dim("partial trace must keep at least one subsystem"));
        }
        let sel = Subsystems::new(dims.to_vec(), keep.to_vec())?;
        self.reduce(&sel)
    }

    pub fn reduce(&self, sel: &Subsystems) -> Result<Self> {
        if sel.total_dim() != self.dim() {
            return Err(Error::dim(format!(
                "subsystem dims multiply to {} but the state has dimension {}",
                sel.total_dim(),
                self.dim()
            )));
        }
        Ok(Self::from_matrix_unchecked(partial_trace_matrix(&self.matrix, sel)))
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.matrix.approx_eq(&other.matrix, tol)
    }
}

/// `(1/2) tr|ρ − σ|`, computed from the spectrum of the Hermitian difference.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::dim(format!(
            "trace distance between dimensions {} and {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    Ok(trace_distance_matrices(rho.matrix(), sigma.matrix()))
}

pub(crate) fn trace_distance_matrices(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let diff = a - b;
    (0.5 * trace_norm_hermitian(&diff)).clamp(0.0, 1.0)
}

/// Whether two states lie within `tol` in trace distance. Large entrywise
/// gaps decide the question without an eigendecomposition.
pub(crate) fn states_close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
    // Half the largest entry of ρ−σ never exceeds its trace distance.
    if 0.5 * a.max_abs_diff(b) > tol {
        return false;
    }
    trace_distance_matrices(a, b) <= tol
}

/// A weighted family of states sharing one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    components: Vec<(f64, DensityOperator)>,
}

impl Ensemble {
    pub fn new(components: Vec<(f64, DensityOperator)>) -> Result<Self> {
        Self::with_tolerance(components, TOL_VALIDATION)
    }

    pub fn with_tolerance(components: Vec<(f64, DensityOperator)>, tol: f64) -> Result<Self> {
        let Some((_, first)) = components.first() else {
            return Err(Error::Ensemble("ensemble has no components".into()));
        };
        let dim = first.dim();
        if components.iter().any(|(_, s)| s.dim() != dim) {
            return Err(Error::Ensemble("ensemble states differ in dimension".into()));
        }
        if let Some((w, _)) = components.iter().find(|(w, _)| !(-tol..=1.0 + tol).contains(w)) {
            return Err(Error::Ensemble(format!("weight {w} outside [0, 1]")));
        }
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > tol {
            return Err(Error::Ensemble(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { components })
    }

    /// Ensemble with the single component `(1, ρ)`.
    pub fn trivial(rho: DensityOperator) -> Self {
        Self {
            components: vec![(1.0, rho)],
        }
    }

    pub fn components(&self) -> &[(f64, DensityOperator)] {
        &self.components
    }

    pub fn dim(&self) -> usize {
        self.components[0].1.dim()
    }

    /// `Σ p_i ρ_i`.
    pub fn mix(&self) -> DensityOperator {
        let dim = self.dim();
        let mut acc = ComplexMatrix::zeros(dim, dim);
        for (w, s) in &self.components {
            acc.add_assign_scaled(s.matrix(), *w);
        }
        DensityOperator::from_matrix_unchecked(acc)
    }
}

/// Mixes an ensemble; fails if the weights do not form a distribution.
pub fn mix(components: Vec<(f64, DensityOperator)>) -> Result<DensityOperator> {
    Ok(Ensemble::new(components)?.mix())
}
