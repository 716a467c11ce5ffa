//! Helpers shared by the integration test targets.

use repovm::linalg::StateVector;
use repovm::povm::{hs_inner, OEDecomposition, Povm};
use repovm::protocols::RemoteRunResult;
use repovm::Complex64;

/// Largest off-diagonal Gram modulus of the hermitian roots against the
/// frame the decomposition chose; the diagonality the protocol relies on.
pub fn frame_gram_offdiag(d: &OEDecomposition) -> f64 {
    let roots = d.source_roots().operators();
    let frame = d.frame();
    let coeff: Vec<Vec<Complex64>> = roots
        .iter()
        .map(|root| {
            frame
                .iter()
                .map(|tau| hs_inner(tau, root).unwrap())
                .collect()
        })
        .collect();
    let mut worst = 0.0f64;
    for a in 0..frame.len() {
        for b in 0..frame.len() {
            if a == b {
                continue;
            }
            let g: Complex64 = coeff.iter().map(|row| row[a].conj() * row[b]).sum();
            worst = worst.max(g.norm());
        }
    }
    worst
}

/// Exact-run figures measured against the local oracle.
pub struct RemoteFigures {
    pub total_probability: f64,
    pub tv: f64,
    pub eta_dev: f64,
    pub surplus: f64,
    /// Over branches with probability > 1e-12.
    pub min_fidelity: f64,
}

pub fn remote_figures(povm: &Povm, input: &StateVector, result: &RemoteRunResult) -> RemoteFigures {
    let local = povm.distribution(input).unwrap();
    let mut tv = result.surplus_probability;
    for (r, l) in result.outcome_distribution.iter().zip(&local) {
        tv += (r - l).abs();
    }
    let uniform = 1.0 / result.eta_distribution.len() as f64;
    let eta_dev = result
        .eta_distribution
        .iter()
        .map(|p| (p - uniform).abs())
        .fold(0.0, f64::max);
    let total_probability = result.branches.iter().map(|b| b.probability).sum();

    let roots = povm.hermitian_roots().unwrap();
    let mut min_fidelity = 1.0f64;
    for branch in &result.branches {
        if branch.probability <= 1e-12 {
            continue;
        }
        let target = roots.operators()[branch.outcome as usize].apply_vec(input.amplitudes());
        let expected = StateVector::single("B", target)
            .unwrap()
            .normalized()
            .unwrap();
        let fid = branch.bob_state.overlap(&expected).unwrap().powi(2);
        min_fidelity = min_fidelity.min(fid);
    }
    RemoteFigures {
        total_probability,
        tv,
        eta_dev,
        surplus: result.surplus_probability,
        min_fidelity,
    }
}
