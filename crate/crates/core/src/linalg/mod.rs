//! Dense complex linear algebra for few-qubit Hilbert spaces.

mod matrix;
mod state;

pub use matrix::{
    complete_to_unitary, hermitian_eig, orthonormalize_columns, psd_sqrt, ComplexMatrix,
};
pub use state::{
    apply_on_subsystems, entropy_base2, schmidt, SchmidtDecomposition, StateVector, SubsystemId,
};
