//! Tensor-factor bookkeeping: partial traces and embedding of local operators.
//!
//! Factor 0 is the slowest-varying index (big-endian), matching [`ComplexMatrix::kron`].

use serde::Serialize;

use super::matrix::{ComplexMatrix, C64};
use crate::error::{Error, Result};

/// A selection of tensor factors out of a factored space.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Subsystems {
    dims: Vec<usize>,
    keep: Vec<usize>,
}

impl Subsystems {
    /// `keep` is normalized to ascending order; duplicates are rejected.
    pub fn new(dims: Vec<usize>, mut keep: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::dim(format!("invalid subsystem dims {dims:?}")));
        }
        keep.sort_unstable();
        if keep.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::dim(format!("duplicate subsystem index in {keep:?}")));
        }
        if let Some(&bad) = keep.iter().find(|&&k| k >= dims.len()) {
            return Err(Error::dim(format!(
                "subsystem index {bad} out of range for {} factors",
                dims.len()
            )));
        }
        Ok(Self { dims, keep })
    }

    /// The whole space viewed as one factor.
    pub fn whole(dim: usize) -> Self {
        Self {
            dims: vec![dim],
            keep: vec![0],
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn keep(&self) -> &[usize] {
        &self.keep
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn kept_dim(&self) -> usize {
        self.keep.iter().map(|&k| self.dims[k]).product()
    }

    pub fn is_everything(&self) -> bool {
        self.keep.len() == self.dims.len()
    }

    /// The same selection inside a larger space `prefix ⊗ self ⊗ suffix`.
    pub fn embed(&self, prefix: &[usize], suffix: &[usize]) -> Self {
        let mut dims = prefix.to_vec();
        dims.extend_from_slice(&self.dims);
        dims.extend_from_slice(suffix);
        Self {
            dims,
            keep: self.keep.iter().map(|k| k + prefix.len()).collect(),
        }
    }

    /// For every full basis index, its (kept, traced) coordinates.
    fn split_indices(&self) -> Vec<(usize, usize)> {
        let total = self.total_dim();
        let mut out = Vec::with_capacity(total);
        let mut digits = vec![0usize; self.dims.len()];
        for _ in 0..total {
            let (mut kept, mut traced) = (0usize, 0usize);
            for (f, &d) in self.dims.iter().enumerate() {
                if self.keep.binary_search(&f).is_ok() {
                    kept = kept * d + digits[f];
                } else {
                    traced = traced * d + digits[f];
                }
            }
            out.push((kept, traced));
            for f in (0..digits.len()).rev() {
                digits[f] += 1;
                if digits[f] < self.dims[f] {
                    break;
                }
                digits[f] = 0;
            }
        }
        out
    }
}

/// Traces out every factor not in `sel.keep`. An empty selection yields the 1x1 trace.
pub(crate) fn partial_trace_matrix(m: &ComplexMatrix, sel: &Subsystems) -> ComplexMatrix {
    if sel.is_everything() {
        return m.clone();
    }
    let kd = sel.kept_dim();
    let idx = sel.split_indices();
    let mut out = ComplexMatrix::zeros(kd, kd);
    for (i, &(ki, ti)) in idx.iter().enumerate() {
        for (j, &(kj, tj)) in idx.iter().enumerate() {
            if ti == tj {
                out[(ki, kj)] += m[(i, j)];
            }
        }
    }
    out
}

/// Public matrix-level partial trace; `dims` factor the space and `keep` lists kept factors.
pub fn partial_trace(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let sel = Subsystems::new(dims.to_vec(), keep.to_vec())?;
    if !m.is_square() || m.rows() != sel.total_dim() {
        return Err(Error::dim(format!(
            "dims {dims:?} do not factor a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    Ok(partial_trace_matrix(m, &sel))
}

/// Embeds `op`, acting on the factors `targets` (in the given order), into the
/// full space as `op ⊗ I` on the remaining factors.
pub fn embed_operator(op: &ComplexMatrix, dims: &[usize], targets: &[usize]) -> Result<ComplexMatrix> {
    if targets.is_empty() {
        return Err(Error::dim("operator must act on at least one factor"));
    }
    let mut seen = targets.to_vec();
    seen.sort_unstable();
    if seen.windows(2).any(|w| w[0] == w[1]) || seen.iter().any(|&t| t >= dims.len()) {
        return Err(Error::dim(format!("invalid target factors {targets:?} for dims {dims:?}")));
    }
    let local: usize = targets.iter().map(|&t| dims[t]).product();
    if op.rows() != local || op.cols() != local {
        return Err(Error::dim(format!(
            "operator is {}x{} but targets span dimension {local}",
            op.rows(),
            op.cols()
        )));
    }
    let total: usize = dims.iter().product();
    // Decompose each full index into (local index in target order, rest index).
    let mut coords = Vec::with_capacity(total);
    let mut digits = vec![0usize; dims.len()];
    for _ in 0..total {
        let local_idx = targets.iter().fold(0usize, |acc, &t| acc * dims[t] + digits[t]);
        let rest = (0..dims.len())
            .filter(|f| !targets.contains(f))
            .fold(0usize, |acc, f| acc * dims[f] + digits[f]);
        coords.push((local_idx, rest));
        for f in (0..digits.len()).rev() {
            digits[f] += 1;
            if digits[f] < dims[f] {
                break;
            }
            digits[f] = 0;
        }
    }
    let mut out = ComplexMatrix::zeros(total, total);
    for (i, &(li, ri)) in coords.iter().enumerate() {
        for (j, &(lj, rj)) in coords.iter().enumerate() {
            if ri == rj {
                let v: C64 = op[(li, lj)];
                if v.re != 0.0 || v.im != 0.0 {
                    out[(i, j)] = v;
                }
            }
        }
    }
    Ok(out)
}

/// Kronecker product of two matrices.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}
