//! Generalized measurements: Pauli-string basis, POVMs and Kraus sets,
//! orthogonality classification, and the JSON file format.

mod kraus;
mod oe;
mod pauli;
mod schema;

pub use kraus::{fig1_povm, KrausSet, Povm};
pub use oe::{CoefficientMatrix, OEDecomposition, OrthogonalityCheck};
pub use pauli::{hs_inner, pauli_basis};
pub use schema::{MeasurementFile, MeasurementKind};
