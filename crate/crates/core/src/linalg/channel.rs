use super::matrix::ComplexMatrix;
use super::state::DensityOperator;
use super::subsystem::embed_operator;
use super::validate::ValidationReport;
use crate::config::TOL_VALIDATION;
use crate::error::{Error, Result};

/// A trace-preserving super-operator in Kraus form, `ρ ↦ Σ K_i ρ K_i†`.
///
/// Complete positivity holds for every Kraus-form map, so only trace
/// preservation is checked.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix>,
    identity: bool,
}

/// Trace-preservation report for a raw list of Kraus operators.
pub fn kraus_checks(kraus: &[ComplexMatrix], tol: f64) -> ValidationReport {
    let mut report = ValidationReport::new("channel");
    let Some(first) = kraus.first() else {
        report.push("nonempty Kraus list", f64::INFINITY, tol);
        return report;
    };
    let (rows, cols) = (first.rows(), first.cols());
    if kraus.iter().any(|k| k.rows() != rows || k.cols() != cols) {
        report.push("uniform Kraus shapes", f64::INFINITY, tol);
        return report;
    }
    let mut sum = ComplexMatrix::zeros(cols, cols);
    for k in kraus {
        sum = &sum + &(&k.adjoint() * k);
    }
    report.push(
        "trace preserving (sum K^dag K = I)",
        sum.max_abs_diff(&ComplexMatrix::identity(cols)),
        tol,
    );
    report
}

impl KrausChannel {
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        Self::with_tolerance(kraus, TOL_VALIDATION)
    }

    pub fn with_tolerance(kraus: Vec<ComplexMatrix>, tol: f64) -> Result<Self> {
        let report = kraus_checks(&kraus, tol);
        if !report.passed() {
            return Err(Error::Invalid {
                what: "channel",
                detail: report.describe_failures(),
            });
        }
        Ok(Self::from_kraus_unchecked(kraus))
    }

    pub(crate) fn from_kraus_unchecked(kraus: Vec<ComplexMatrix>) -> Self {
        let dim_in = kraus[0].cols();
        let dim_out = kraus[0].rows();
        let identity = kraus.len() == 1 && kraus[0] == ComplexMatrix::identity(dim_in);
        Self {
            dim_in,
            dim_out,
            kraus,
            identity,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_kraus_unchecked(vec![ComplexMatrix::identity(dim)])
    }

    /// `ρ ↦ U ρ U†`; fails unless `U` is unitary within tolerance.
    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        Self::new(vec![u])
    }

    /// Flips a qubit with probability `1 − p`: Kraus operators `√p·I`, `√(1−p)·X`.
    pub fn bit_flip(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Invalid {
                what: "channel",
                detail: format!("bit-flip probability {p} outside [0, 1]"),
            });
        }
        Self::new(vec![
            ComplexMatrix::identity(2).scale_real(p.sqrt()),
            super::gates::x().scale_real((1.0 - p).sqrt()),
        ])
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn is_identity(&self) -> bool {
        self.identity
    }

    pub fn validate(&self, tol: f64) -> ValidationReport {
        kraus_checks(&self.kraus, tol)
    }

    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        if rho.dim() != self.dim_in {
            return Err(Error::dim(format!(
                "channel expects dimension {} but the state has {}",
                self.dim_in,
                rho.dim()
            )));
        }
        Ok(self.apply_state(rho))
    }

    pub(crate) fn apply_state(&self, rho: &DensityOperator) -> DensityOperator {
        if self.identity {
            return rho.clone();
        }
        DensityOperator::from_matrix_unchecked(self.apply_operator(rho.matrix()))
    }

    /// Linear extension to arbitrary operators.
    pub(crate) fn apply_operator(&self, x: &ComplexMatrix) -> ComplexMatrix {
        if self.identity {
            return x.clone();
        }
        let mut acc = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            acc = &acc + &k.sandwich(x);
        }
        acc
    }

    /// The channel acting on `targets` of a factored space, identity elsewhere.
    pub fn embed(&self, dims: &[usize], targets: &[usize]) -> Result<Self> {
        if self.dim_in != self.dim_out {
            return Err(Error::dim("only square channels can be embedded"));
        }
        let kraus = self
            .kraus
            .iter()
            .map(|k| embed_operator(k, dims, targets))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_kraus_unchecked(kraus))
    }

    /// `E ⊗ I_d`.
    pub fn tensor_identity_right(&self, d: usize) -> Self {
        if self.identity {
            return Self::identity(self.dim_in * d);
        }
        let id = ComplexMatrix::identity(d);
        Self::from_kraus_unchecked(self.kraus.iter().map(|k| k.kron(&id)).collect())
    }

    /// `I_d ⊗ E`.
    pub fn tensor_identity_left(&self, d: usize) -> Self {
        if self.identity {
            return Self::identity(self.dim_in * d);
        }
        let id = ComplexMatrix::identity(d);
        Self::from_kraus_unchecked(self.kraus.iter().map(|k| id.kron(k)).collect())
    }

    /// Applies `self` then `next`.
    pub fn then(&self, next: &Self) -> Result<Self> {
        if self.dim_out != next.dim_in {
            return Err(Error::dim("channel composition dimension mismatch"));
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * next.kraus.len());
        for b in &next.kraus {
            for a in &self.kraus {
                kraus.push(b * a);
            }
        }
        Ok(Self::from_kraus_unchecked(kraus))
    }
}

/// `Σ_i K_i ρ K_i†`.
pub fn apply_channel(e: &KrausChannel, rho: &DensityOperator) -> Result<DensityOperator> {
    e.apply(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::gates;
    use crate::linalg::states;

    #[test]
    fn bit_flip_on_example_state() {
        let rho = states::example_mixed();
        for p in [0.0, 0.25, 0.5, 1.0] {
            let out = KrausChannel::bit_flip(p).unwrap().apply(&rho).unwrap();
            let expected = ComplexMatrix::from_real(&[
                &[1.0 / 6.0 + 2.0 * p / 3.0, -1.0 / 6.0],
                &[-1.0 / 6.0, 5.0 / 6.0 - 2.0 * p / 3.0],
            ])
            .unwrap();
            assert!(out.matrix().approx_eq(&expected, 1e-12), "p = {p}");
        }
    }

    #[test]
    fn identity_channel_is_noop() {
        let rho = states::example_mixed();
        assert_eq!(KrausChannel::identity(2).apply(&rho).unwrap(), rho);
    }

    #[test]
    fn cnot_entangles_plus_zero() {
        let input = states::plus().tensor(&states::zero());
        let out = KrausChannel::unitary(gates::cnot()).unwrap().apply(&input).unwrap();
        assert!(out.approx_eq(&states::bell(), 1e-12));
    }

    #[test]
    fn half_identity_is_not_trace_preserving() {
        let report = kraus_checks(&[ComplexMatrix::identity(2).scale_real(0.5f64.sqrt())], 1e-9);
        assert!(!report.passed());
        assert!((report.checks[0].residual - 0.5).abs() < 1e-12);
        assert!(KrausChannel::new(vec![ComplexMatrix::identity(2).scale_real(0.5f64.sqrt())]).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        let e = KrausChannel::identity(4);
        assert!(matches!(e.apply(&states::zero()), Err(Error::Dimension(_))));
    }

    #[test]
    fn then_composes_in_order() {
        let flip = KrausChannel::unitary(gates::x()).unwrap();
        let had = KrausChannel::unitary(gates::hadamard()).unwrap();
        let both = flip.then(&had).unwrap();
        let out = both.apply(&states::zero()).unwrap();
        assert!(out.approx_eq(&states::minus(), 1e-12));
    }
}
