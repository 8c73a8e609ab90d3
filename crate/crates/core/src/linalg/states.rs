//! Named states used throughout the docs and tests.

use std::f64::consts::FRAC_1_SQRT_2;

use super::matrix::c;
use super::state::{mix, DensityOperator};

pub fn zero() -> DensityOperator {
    DensityOperator::basis(2, 0)
}

pub fn one() -> DensityOperator {
    DensityOperator::basis(2, 1)
}

pub fn plus() -> DensityOperator {
    DensityOperator::pure(&[c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)]).expect("unit vector")
}

pub fn minus() -> DensityOperator {
    DensityOperator::pure(&[c(FRAC_1_SQRT_2, 0.0), c(-FRAC_1_SQRT_2, 0.0)]).expect("unit vector")
}

/// The EPR pair `(|00⟩ + |11⟩)/√2`.
pub fn bell() -> DensityOperator {
    let h = FRAC_1_SQRT_2;
    DensityOperator::pure(&[c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)]).expect("unit vector")
}

/// `(1/2)(|00⟩⟨00| + |11⟩⟨11|)`: same marginals as [`bell`], no entanglement.
pub fn classical_correlated() -> DensityOperator {
    mix(vec![(0.5, DensityOperator::basis(4, 0)), (0.5, DensityOperator::basis(4, 3))])
        .expect("valid ensemble")
}

/// `(2/3)|0⟩⟨0| + (1/3)|−⟩⟨−| = (1/6)[[5, −1], [−1, 1]]`.
pub fn example_mixed() -> DensityOperator {
    mix(vec![(2.0 / 3.0, zero()), (1.0 / 3.0, minus())]).expect("valid ensemble")
}
