//! Small dense complex linear-algebra helpers shared by the POM and network code.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type StateVector = DVector<Complex64>;

/// `|a⟩⟨b|`
pub fn outer(a: &StateVector, b: &StateVector) -> CMatrix {
    a * b.adjoint()
}

/// `⟨a|b⟩`, conjugating the left argument.
pub fn inner(a: &StateVector, b: &StateVector) -> Complex64 {
    a.dotc(b)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest elementwise deviation from Hermiticity.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn symmetrize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut eig: Vec<f64> = symmetrize(m).symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    eig
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).first().copied().unwrap_or(0.0)
}

/// `⟨ψ|M|ψ⟩`, real part.
pub fn expectation(m: &CMatrix, psi: &StateVector) -> f64 {
    psi.dotc(&(m * psi)).re
}

pub fn normalized(v: &StateVector) -> Option<StateVector> {
    let n = v.norm();
    (n > 0.0 && n.is_finite()).then(|| v.unscale(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_of_diagonal() {
        let m = CMatrix::from_diagonal(&DVector::from_vec(vec![
            Complex64::new(2.0, 0.0),
            Complex64::new(-1.0, 0.0),
        ]));
        let e = hermitian_eigenvalues(&m);
        assert!((e[0] + 1.0).abs() < 1e-14 && (e[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn eigenvalues_of_complex_hermitian() {
        // [[1, i], [-i, 1]] has eigenvalues 0 and 2
        let i = Complex64::i();
        let one = Complex64::new(1.0, 0.0);
        let m = CMatrix::from_row_slice(2, 2, &[one, i, -i, one]);
        let e = hermitian_eigenvalues(&m);
        assert!(e[0].abs() < 1e-14);
        assert!((e[1] - 2.0).abs() < 1e-14);
    }
}
