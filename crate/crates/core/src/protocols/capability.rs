//! Entanglement-capability experiments. The orthogonal form of the
//! measurement interaction maps |psi>_B to sum_mu alpha_mu |mu>_A tau_mu
//! |psi>_B (tau the decomposition frame) before any ancilla readout; the
//! entanglement this creates, maximized over inputs, pins the cost of the
//! remote protocol from below and meets it when Bob's system starts
//! maximally entangled with a local reference.

use crate::error::{Error, Result};
use crate::linalg::{entropy_base2, schmidt, StateVector, SubsystemId};
use crate::povm::OEDecomposition;
use crate::random::{derive_seed, random_state};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn check_scale(d: &OEDecomposition) -> Result<()> {
    if d.n_qubits() > 2 {
        return Err(Error::InvalidArgument(format!(
            "capability experiments support at most two system qubits, got {}",
            d.n_qubits()
        )));
    }
    Ok(())
}

/// State after the orthogonal-form interaction on input `psi`:
/// sum over retained slots i of alpha_i |i>_A (tau_i psi)_B... with psi
/// living on whatever registers follow B in `psi`'s own layout.
fn interacted_state(d: &OEDecomposition, psi: &StateVector) -> Result<StateVector> {
    let sys_dim = 1usize << d.n_qubits();
    let rest = psi.dim() / sys_dim;
    if psi.dim() != sys_dim * rest || psi.layout().first().map(|(_, dim)| *dim) != Some(sys_dim) {
        return Err(Error::DimensionMismatch(format!(
            "input must lead with a register of dimension {sys_dim}"
        )));
    }
    let retained = d.retained();
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); retained.len() * psi.dim()];
    for (slot, &lambda) in retained.iter().enumerate() {
        let sigma = &d.frame()[slot];
        let weight = d.alphas()[lambda];
        for row in 0..sys_dim {
            for col in 0..sys_dim {
                let m = sigma[(row, col)] * weight;
                if m.norm_sqr() == 0.0 {
                    continue;
                }
                for tail in 0..rest {
                    amplitudes[slot * psi.dim() + row * rest + tail] +=
                        m * psi.amplitudes()[col * rest + tail];
                }
            }
        }
    }
    let mut layout = vec![(SubsystemId::from("anc"), retained.len())];
    layout.extend(psi.layout().iter().cloned());
    StateVector::new(amplitudes, layout)
}

/// Entanglement (ebits) created across ancilla | rest by the orthogonal-form
/// interaction when Bob's system is maximally entangled with a reference.
/// Equals the decomposition's entanglement cost exactly: the operators
/// alpha_mu tau_mu act orthogonally on the maximally entangled pair.
pub fn capability_epr_experiment(d: &OEDecomposition) -> Result<f64> {
    check_scale(d)?;
    let sys_dim = 1usize << d.n_qubits();
    let scale = 1.0 / (sys_dim as f64).sqrt();
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); sys_dim * sys_dim];
    for k in 0..sys_dim {
        amplitudes[k * sys_dim + k] = Complex64::new(scale, 0.0);
    }
    let pair = StateVector::new(
        amplitudes,
        vec![
            (SubsystemId::from("B"), sys_dim),
            (SubsystemId::from("R"), sys_dim),
        ],
    )?;
    let joint = interacted_state(d, &pair)?;
    let cut = schmidt(&joint, &[SubsystemId::from("anc")])?;
    entropy_base2(&cut.coefficients)
}

/// Largest entanglement across ancilla | system found over Haar-random pure
/// inputs without a reference. A lower bound on the capability; never
/// exceeds the EPR value.
pub fn capability_search(d: &OEDecomposition, trials: u64, seed: u64) -> Result<f64> {
    check_scale(d)?;
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let sys_dim = 1usize << d.n_qubits();
    let mut best = 0.0f64;
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, trial));
        let psi = random_state(vec![(SubsystemId::from("B"), sys_dim)], &mut rng)?;
        let joint = interacted_state(d, &psi)?;
        let cut = schmidt(&joint, &[SubsystemId::from("anc")])?;
        best = best.max(entropy_base2(&cut.coefficients)?);
    }
    Ok(best)
}
