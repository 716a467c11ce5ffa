//! Machine-readable run record shared by the library and the CLI: which
//! POVM ran (content digest), its weights and cost, and the measured
//! protocol figures.

use crate::povm::Povm;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Classical bits exchanged, by direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitCounts {
    pub alice_to_bob: u64,
    pub bob_to_alice: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CapabilityFigures {
    pub epr_entropy: f64,
    pub search_entropy: f64,
    pub search_trials: u64,
}

/// Field order is the serialized order; reports under a fixed seed must be
/// byte-identical, so optional sections serialize as null rather than
/// disappearing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProtocolReport {
    pub povm_digest: String,
    pub alphas: Vec<f64>,
    pub e_povm: f64,
    pub tv_distance: Option<f64>,
    pub bit_counts: Option<BitCounts>,
    pub capability: Option<CapabilityFigures>,
}

/// SHA-256 over the in-memory POVM: qubit count, element count, then every
/// entry's IEEE-754 bits row-major, all little-endian.
pub fn povm_digest(povm: &Povm) -> String {
    let mut hasher = Sha256::new();
    hasher.update((povm.n_qubits() as u64).to_le_bytes());
    hasher.update((povm.elements().len() as u64).to_le_bytes());
    for element in povm.elements() {
        for entry in element.entries() {
            hasher.update(entry.re.to_bits().to_le_bytes());
            hasher.update(entry.im.to_bits().to_le_bytes());
        }
    }
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
