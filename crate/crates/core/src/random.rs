//! Deterministic random objects for exercising the analysis pipeline:
//! Haar unitaries, random states, and random POVMs drawn by partitioning a
//! Haar isometry into outcome blocks.

use crate::error::Result;
use crate::linalg::{orthonormalize_columns, ComplexMatrix, StateVector, SubsystemId};
use crate::povm::{KrausSet, Povm};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the
/// positive-diagonal convention, which makes Q unique and Haar.
pub fn haar_unitary(dim: usize, rng: &mut impl Rng) -> Result<ComplexMatrix> {
    orthonormalize_columns(&ginibre(dim, dim, rng))
}

/// Uniform random pure state on the given layout.
pub fn random_state(
    layout: Vec<(SubsystemId, usize)>,
    rng: &mut impl Rng,
) -> Result<StateVector> {
    let dim = layout.iter().map(|(_, d)| *d).product();
    let amplitudes = (0..dim)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    StateVector::new(amplitudes, layout)?.normalized()
}

/// Random complete Kraus set with `outcomes` operators: the row blocks of a
/// Haar isometry from the system into system x outcome.
pub fn random_kraus_set(
    n_qubits: usize,
    outcomes: usize,
    rng: &mut impl Rng,
) -> Result<KrausSet> {
    let dim = 1usize << n_qubits;
    let total = dim * outcomes;
    let isometry = orthonormalize_columns(&ginibre(total, dim, rng))?;
    let operators = (0..outcomes)
        .map(|mu| ComplexMatrix::from_fn(dim, dim, |r, c| isometry[(mu * dim + r, c)]))
        .collect();
    KrausSet::new(n_qubits, operators)
}

/// Random POVM induced by a random complete Kraus set.
pub fn random_povm(n_qubits: usize, outcomes: usize, rng: &mut impl Rng) -> Result<Povm> {
    Povm::from_kraus(&random_kraus_set(n_qubits, outcomes, rng)?)
}

/// Random two-qubit POVM as the tensor product of independent single-qubit
/// POVMs, `k1 * k2` outcomes. The hermitian roots factor, so this family
/// always admits an orthogonal-equivalent decomposition; generic two-qubit
/// POVMs do not (see [`Povm::oe_decompose`]).
pub fn random_product_povm(k1: usize, k2: usize, rng: &mut impl Rng) -> Result<Povm> {
    let left = random_povm(1, k1, rng)?;
    let right = random_povm(1, k2, rng)?;
    let mut elements = Vec::with_capacity(k1 * k2);
    for a in left.elements() {
        for b in right.elements() {
            elements.push(a.tensor(b));
        }
    }
    Povm::new(2, elements)
}

/// Stable per-case sub-seed (splitmix64 of base + case index).
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
