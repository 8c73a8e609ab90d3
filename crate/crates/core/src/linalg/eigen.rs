//! Hermitian spectra, backed by nalgebra's symmetric eigensolver.

use nalgebra::DMatrix;

use super::matrix::{ComplexMatrix, C64};

/// Eigenvalues of the Hermitian part `(M + M†)/2`, ascending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    assert!(m.is_square(), "eigenvalues of a non-square matrix");
    let n = m.rows();
    if n == 1 {
        return vec![m[(0, 0)].re];
    }
    if n == 2 {
        return eigenvalues_2x2(m);
    }
    let herm = DMatrix::<C64>::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
    let mut values: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

// Closed form keeps the common qubit case exact to rounding.
fn eigenvalues_2x2(m: &ComplexMatrix) -> Vec<f64> {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = (m[(0, 1)] + m[(1, 0)].conj()) * 0.5;
    let mean = 0.5 * (a + d);
    let half_gap = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    vec![mean - half_gap, mean + half_gap]
}

/// `tr|X|` for Hermitian `X`: the sum of absolute eigenvalues.
pub fn trace_norm_hermitian(m: &ComplexMatrix) -> f64 {
    hermitian_eigenvalues(m).iter().map(|v| v.abs()).sum()
}

pub fn min_eigenvalue(m: &ComplexMatrix) -> f64 {
    hermitian_eigenvalues(m).first().copied().unwrap_or(0.0)
}
