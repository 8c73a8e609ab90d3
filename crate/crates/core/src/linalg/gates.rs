//! Standard one- and two-qubit operators.

use super::matrix::{c, ComplexMatrix};

pub fn identity2() -> ComplexMatrix {
    ComplexMatrix::identity(2)
}

/// The NOT gate.
pub fn x() -> ComplexMatrix {
    ComplexMatrix::from_real(&[&[0.0, 1.0], &[1.0, 0.0]]).expect("2x2 literal")
}

pub fn z() -> ComplexMatrix {
    ComplexMatrix::from_real(&[&[1.0, 0.0], &[0.0, -1.0]]).expect("2x2 literal")
}

pub fn hadamard() -> ComplexMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_real(&[&[h, h], &[h, -h]]).expect("2x2 literal")
}

/// Rotation by `theta` about the x-axis of the Bloch sphere:
/// `[[cos θ/2, −i sin θ/2], [−i sin θ/2, cos θ/2]]`.
pub fn rx(theta: f64) -> ComplexMatrix {
    let (s, co) = (theta / 2.0).sin_cos();
    ComplexMatrix::from_rows(vec![vec![c(co, 0.0), c(0.0, -s)], vec![c(0.0, -s), c(co, 0.0)]])
        .expect("2x2 literal")
}

/// Controlled-NOT with the first factor as control: `[[I, 0], [0, X]]`.
pub fn cnot() -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(4, 4);
    m[(0, 0)] = c(1.0, 0.0);
    m[(1, 1)] = c(1.0, 0.0);
    m[(2, 3)] = c(1.0, 0.0);
    m[(3, 2)] = c(1.0, 0.0);
    m
}

/// Looks up a named gate. Parametric gates take `theta`.
pub fn named(name: &str, theta: Option<f64>) -> Option<ComplexMatrix> {
    match (name.to_ascii_lowercase().as_str(), theta) {
        ("i" | "id" | "identity", None) => Some(identity2()),
        ("x" | "not", None) => Some(x()),
        ("z", None) => Some(z()),
        ("h" | "hadamard", None) => Some(hadamard()),
        ("cnot" | "cx", None) => Some(cnot()),
        ("rx", Some(t)) => Some(rx(t)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rx_is_unitary_and_maps_zero() {
        let u = rx(0.7);
        let p = &u.adjoint() * &u;
        assert!(p.approx_eq(&ComplexMatrix::identity(2), 1e-15));
        // Rx(π)|0> = -i|1>
        let r = rx(std::f64::consts::PI);
        assert!((r[(1, 0)] - c(0.0, -1.0)).norm() < 1e-15);
        assert!(r[(0, 0)].norm() < 1e-15);
    }

    #[test]
    fn named_lookup() {
        assert_eq!(named("CNOT", None), Some(cnot()));
        assert!(named("rx", None).is_none());
        assert!(named("rx", Some(1.0)).is_some());
        assert!(named("toffoli", None).is_none());
    }
}
