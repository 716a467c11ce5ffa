//! Pauli-string operator basis and the normalized Hilbert-Schmidt inner
//! product used to expand Kraus operators over it.

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use num_complex::Complex64;

fn single_qubit_paulis() -> [ComplexMatrix; 4] {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    [
        ComplexMatrix::identity(2),
        ComplexMatrix::from_rows(&[vec![z, one], vec![one, z]]),
        ComplexMatrix::from_rows(&[vec![z, -i], vec![i, z]]),
        ComplexMatrix::from_rows(&[vec![one, z], vec![z, -one]]),
    ]
}

/// The 4^n Pauli strings in base-4 index order: digit `d` of the index picks
/// `(I, X, Y, Z)[d]` for the qubit at that digit's position, and the first
/// digit belongs to the first (slowest-varying) qubit.
pub fn pauli_basis(n_qubits: usize) -> Result<Vec<ComplexMatrix>> {
    if !(1..=3).contains(&n_qubits) {
        return Err(Error::InvalidArgument(format!(
            "pauli basis is provided for 1..=3 qubits, got {n_qubits}"
        )));
    }
    let single = single_qubit_paulis();
    let mut basis = Vec::with_capacity(4usize.pow(n_qubits as u32));
    for index in 0..4usize.pow(n_qubits as u32) {
        let mut m: Option<ComplexMatrix> = None;
        for q in 0..n_qubits {
            let digit = (index >> (2 * (n_qubits - 1 - q))) & 0b11;
            m = Some(match m {
                None => single[digit].clone(),
                Some(acc) => acc.tensor(&single[digit]),
            });
        }
        basis.push(m.expect("n_qubits >= 1"));
    }
    Ok(basis)
}

/// Normalized Hilbert-Schmidt inner product `Tr(a^dag b) / dim`. Under this
/// normalization the Pauli strings are orthonormal.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Complex64> {
    if !a.is_square() || a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::DimensionMismatch(format!(
            "hs_inner needs equal square matrices, got {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let dim = a.rows() as f64;
    Ok((&a.dagger() * b).trace() / dim)
}
