//! Remote implementation of generalized quantum measurements (POVMs) between
//! two parties restricted to local operations and classical communication.
//!
//! The crate is organized around four layers:
//!
//! * [`linalg`] — dense complex matrices, multi-subsystem state vectors,
//!   hermitian eigendecomposition, Schmidt decomposition.
//! * [`povm`] — POVMs and Kraus sets, the Pauli-string coefficient expansion,
//!   orthogonality / orthogonal-equivalence classification, and the
//!   entanglement cost of a measurement.
//! * [`locc`] — a two-party session engine that enforces operator locality,
//!   tracks classical messages, and evolves either a sampled trajectory or the
//!   full set of measurement branches.
//! * [`protocols`] — compilation of a POVM into a concrete remote-measurement
//!   program, the two-outcome discrimination protocol, and entanglement
//!   capability experiments used to cross-check the cost figure.

pub mod error;
pub mod linalg;
pub mod locc;
pub mod povm;
pub mod protocols;
pub mod random;
pub mod tol;

pub use error::{Error, Result};
pub use num_complex::Complex64;
