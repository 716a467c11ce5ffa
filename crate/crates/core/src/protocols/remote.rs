//! Remote execution of an arbitrary POVM: Alice holds an ancilla register,
//! Bob holds the system plus his half of a non-maximally entangled resource
//! whose Schmidt weights are the decomposition alphas. One round of
//! classical communication each way reproduces the local Born statistics
//! and post-measurement states exactly.

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, StateVector, SubsystemId};
use crate::locc::{Mode, Party, RegisterGroup, Session, Transcript};
use crate::povm::{OEDecomposition, Povm};
use crate::random::derive_seed;
use num_complex::Complex64;

/// Compiled protocol: the entangled resource, Bob's coupling between his
/// resource register and the system, and Alice's decoding rotation.
#[derive(Debug, Clone)]
pub struct RemotePovmProgram {
    decomposition: OEDecomposition,
    /// max(K', 2); surplus computational outcomes carry zero amplitude.
    ancilla_dim: usize,
    /// 4^n, the number of Pauli strings and the dimension of register b.
    pauli_dim: usize,
    resource: StateVector,
    bob_coupling: ComplexMatrix,
    alice_unitary: ComplexMatrix,
    x_basis: ComplexMatrix,
}

/// One exact branch: Bob's complementary-basis outcome, Alice's outcome,
/// the joint probability, and Bob's conditional post-measurement state.
#[derive(Debug, Clone)]
pub struct RemoteBranch {
    pub eta: u64,
    pub outcome: u64,
    pub probability: f64,
    pub bob_state: StateVector,
}

/// Run record. Exact mode fills the distributions with exact branch
/// probabilities; sampled mode records the single trajectory (distributions
/// become one-shot indicators and `sampled_*` carry the drawn values).
#[derive(Debug, Clone)]
pub struct RemoteRunResult {
    pub outcome_distribution: Vec<f64>,
    pub post_states: Vec<Option<StateVector>>,
    pub entanglement_consumed: f64,
    pub transcript: Transcript,
    pub eta_distribution: Vec<f64>,
    /// Probability mass on ancilla outcomes past the real outcome count;
    /// zero by construction, reported so tests can assert it.
    pub surplus_probability: f64,
    pub branches: Vec<RemoteBranch>,
    pub sampled_eta: Option<u64>,
    pub sampled_outcome: Option<u64>,
}

/// Frequency tally over repeated sampled runs with per-shot derived seeds.
#[derive(Debug, Clone)]
pub struct RemoteSampleStats {
    pub shots: u64,
    pub outcome_counts: Vec<u64>,
    pub eta_counts: Vec<u64>,
}

/// Builds the protocol for a decomposition. The joint simulation holds
/// K' * 4^n * 2^n amplitudes, so the system is capped at two qubits.
pub fn compile_remote_povm(decomposition: OEDecomposition) -> Result<RemotePovmProgram> {
    let n = decomposition.n_qubits();
    if n > 2 {
        return Err(Error::InvalidArgument(format!(
            "joint simulation supports at most two system qubits, got {n}"
        )));
    }
    let sys_dim = 1usize << n;
    let pauli_dim = sys_dim * sys_dim;
    let completed = decomposition.completed_size();
    let ancilla_dim = completed.max(2);

    let mut amplitudes = vec![Complex64::new(0.0, 0.0); ancilla_dim * pauli_dim];
    for (slot, &lambda) in decomposition.retained().iter().enumerate() {
        amplitudes[slot * pauli_dim + lambda] =
            Complex64::new(decomposition.alphas()[lambda], 0.0);
    }
    let resource = StateVector::new(
        amplitudes,
        vec![
            (SubsystemId::from("A"), ancilla_dim),
            (SubsystemId::from("b"), pauli_dim),
        ],
    )?;

    // frame operator on the populated resource levels, identity elsewhere
    // (unpopulated levels never act, and identity keeps the coupling unitary)
    let mut block_of = vec![None; pauli_dim];
    for (slot, &lambda) in decomposition.retained().iter().enumerate() {
        block_of[lambda] = Some(slot);
    }
    let frame = decomposition.frame().to_vec();
    let bob_coupling = ComplexMatrix::from_fn(pauli_dim * sys_dim, pauli_dim * sys_dim, |r, c| {
        let (mu, row) = (r / sys_dim, r % sys_dim);
        if mu != c / sys_dim {
            Complex64::new(0.0, 0.0)
        } else if let Some(slot) = block_of[mu] {
            frame[slot][(row, c % sys_dim)]
        } else if row == c % sys_dim {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });

    // amplitude at ancilla slot i flows to outcome nu with weight U[i][nu],
    // so the matrix Alice applies is the transpose of the completed unitary
    let u = decomposition.unitary();
    let alice_unitary = ComplexMatrix::from_fn(ancilla_dim, ancilla_dim, |r, c| {
        if r < completed && c < completed {
            u[(c, r)]
        } else if r == c {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });

    let scale = 1.0 / sys_dim as f64;
    let x_basis = ComplexMatrix::from_fn(pauli_dim, pauli_dim, |mu, eta| {
        Complex64::new(scale * parity_sign(mu as u64 & eta as u64), 0.0)
    });

    Ok(RemotePovmProgram {
        decomposition,
        ancilla_dim,
        pauli_dim,
        resource,
        bob_coupling,
        alice_unitary,
        x_basis,
    })
}

fn parity_sign(bits: u64) -> f64 {
    if bits.count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl RemotePovmProgram {
    pub fn decomposition(&self) -> &OEDecomposition {
        &self.decomposition
    }

    pub fn n_qubits(&self) -> usize {
        self.decomposition.n_qubits()
    }

    pub fn outcome_count(&self) -> usize {
        self.decomposition.outcome_count()
    }

    pub fn ancilla_dim(&self) -> usize {
        self.ancilla_dim
    }

    pub fn resource(&self) -> &StateVector {
        &self.resource
    }

    pub fn bob_coupling(&self) -> &ComplexMatrix {
        &self.bob_coupling
    }

    pub fn alice_unitary(&self) -> &ComplexMatrix {
        &self.alice_unitary
    }

    pub fn entanglement_cost(&self) -> f64 {
        self.decomposition.entanglement_cost()
    }

    /// Alice's correction after learning eta: sign (-1)^(eta . lambda) on
    /// each populated ancilla slot, with the Pauli index read as 2n bits.
    pub fn phase_correction(&self, eta: u64) -> ComplexMatrix {
        let retained = self.decomposition.retained();
        ComplexMatrix::from_fn(self.ancilla_dim, self.ancilla_dim, |r, c| {
            if r != c {
                Complex64::new(0.0, 0.0)
            } else if r < retained.len() {
                Complex64::new(parity_sign(eta & retained[r] as u64), 0.0)
            } else {
                Complex64::new(1.0, 0.0)
            }
        })
    }

    /// Executes the protocol on `input` (a single register of 2^n levels).
    /// `report_outcome` adds Alice's final outcome message to Bob.
    pub fn run(
        &self,
        input: &StateVector,
        mode: Mode,
        report_outcome: bool,
    ) -> Result<RemoteRunResult> {
        let sys_dim = 1usize << self.n_qubits();
        if input.layout().len() != 1 || input.dim() != sys_dim {
            return Err(Error::DimensionMismatch(format!(
                "input must be a single register of dimension {sys_dim}"
            )));
        }
        let system = StateVector::single("B", input.amplitudes().to_vec())?;
        let mut session = Session::from_groups(
            vec![
                RegisterGroup::new(
                    self.resource.clone(),
                    &[("A", Party::Alice), ("b", Party::Bob)],
                ),
                RegisterGroup::new(system, &[("B", Party::Bob)]),
            ],
            mode,
        )?;

        session.local_unitary(Party::Bob, &["b", "B"], &self.bob_coupling, "pauli-coupling")?;
        let eta = session.local_measure(Party::Bob, &["b"], &self.x_basis, "eta")?;
        session.send_outcome(Party::Bob, "eta")?;
        session.local_unitary_conditioned(Party::Alice, &["A"], "eta", "phase-correction", |e| {
            self.phase_correction(e)
        })?;
        session.local_unitary(Party::Alice, &["A"], &self.alice_unitary, "outcome-rotation")?;
        let outcome = session.local_measure(
            Party::Alice,
            &["A"],
            &ComplexMatrix::identity(self.ancilla_dim),
            "outcome",
        )?;
        if report_outcome {
            session.send_outcome(Party::Alice, "outcome")?;
        }
        self.harvest(session, eta, outcome)
    }

    fn harvest(
        &self,
        session: Session,
        sampled_eta: Option<u64>,
        sampled_outcome: Option<u64>,
    ) -> Result<RemoteRunResult> {
        let k = self.outcome_count();
        let sys_dim = 1usize << self.n_qubits();
        let mut outcome_distribution = vec![0.0; k];
        let mut eta_distribution = vec![0.0; self.pauli_dim];
        let mut surplus_probability = 0.0;

        match session.mode() {
            Mode::ExactBranches => {
                for (v, p) in session.branch_distribution("eta")? {
                    eta_distribution[v as usize] = p;
                }
                for (v, p) in session.branch_distribution("outcome")? {
                    if (v as usize) < k {
                        outcome_distribution[v as usize] = p;
                    } else {
                        surplus_probability += p;
                    }
                }
            }
            Mode::Sampled(_) => {
                let e = sampled_eta.expect("sampled measurement returns a value") as usize;
                let v = sampled_outcome.expect("sampled measurement returns a value") as usize;
                eta_distribution[e] = 1.0;
                if v < k {
                    outcome_distribution[v] = 1.0;
                } else {
                    surplus_probability = 1.0;
                }
            }
        }

        let mut post_states: Vec<Option<StateVector>> = vec![None; k];
        let mut branches = Vec::with_capacity(session.branches().len());
        for branch in session.branches() {
            let eta = branch.outcomes["eta"];
            let outcome = branch.outcomes["outcome"];
            let bob_state = extract_system_state(&branch.state, sys_dim)?;
            if (outcome as usize) < k && post_states[outcome as usize].is_none() {
                post_states[outcome as usize] = Some(bob_state.clone());
            }
            branches.push(RemoteBranch {
                eta,
                outcome,
                probability: branch.probability,
                bob_state,
            });
        }

        Ok(RemoteRunResult {
            outcome_distribution,
            post_states,
            entanglement_consumed: self.entanglement_cost(),
            transcript: session.transcript().clone(),
            eta_distribution,
            surplus_probability,
            branches,
            sampled_eta,
            sampled_outcome,
        })
    }

    /// Repeated sampled runs, one derived seed per shot. Outcome counts are
    /// sized to the full ancilla so surplus hits would be visible.
    pub fn sample_counts(
        &self,
        input: &StateVector,
        shots: u64,
        seed: u64,
    ) -> Result<RemoteSampleStats> {
        let mut outcome_counts = vec![0u64; self.ancilla_dim];
        let mut eta_counts = vec![0u64; self.pauli_dim];
        for shot in 0..shots {
            let run = self.run(input, Mode::Sampled(derive_seed(seed, shot)), false)?;
            outcome_counts[run.sampled_outcome.unwrap() as usize] += 1;
            eta_counts[run.sampled_eta.unwrap() as usize] += 1;
        }
        Ok(RemoteSampleStats {
            shots,
            outcome_counts,
            eta_counts,
        })
    }
}

/// After both measurements the joint state is a product across (A,b) | B;
/// B is the fastest register, so it sits in one dominant chunk.
fn extract_system_state(joint: &StateVector, sys_dim: usize) -> Result<StateVector> {
    let amps = joint.amplitudes();
    let mut best = 0usize;
    let mut best_weight = -1.0f64;
    for (block, chunk) in amps.chunks(sys_dim).enumerate() {
        let weight: f64 = chunk.iter().map(|a| a.norm_sqr()).sum();
        if weight > best_weight {
            best_weight = weight;
            best = block;
        }
    }
    StateVector::single("B", amps[best * sys_dim..(best + 1) * sys_dim].to_vec())?.normalized()
}

/// Compiles and runs in one step, without the optional outcome report.
pub fn run_remote_povm(povm: &Povm, input: &StateVector, mode: Mode) -> Result<RemoteRunResult> {
    compile_remote_povm(povm.oe_decompose()?)?.run(input, mode, false)
}

/// Total-variation distance between the exact remote distribution and the
/// local Born distribution; zero up to floating-point noise.
pub fn compare_remote_vs_local(povm: &Povm, input: &StateVector) -> Result<f64> {
    let remote = run_remote_povm(povm, input, Mode::ExactBranches)?;
    let local = povm.distribution(input)?;
    let mut tv = remote.surplus_probability;
    for (r, l) in remote.outcome_distribution.iter().zip(&local) {
        tv += (r - l).abs();
    }
    Ok(0.5 * tv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::schmidt;
    use crate::povm::fig1_povm;
    use crate::random::{random_povm, random_product_povm, random_state};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn fixture_a() -> Povm {
        Povm::from_kraus(&fig1_povm(0.6, 0.8).unwrap()).unwrap()
    }

    fn psi_plus() -> StateVector {
        StateVector::single("in", vec![re(0.6), re(0.8)]).unwrap()
    }

    fn plus_state() -> StateVector {
        let h = re(0.5f64.sqrt());
        StateVector::single("in", vec![h, h]).unwrap()
    }

    fn root_post_state(povm: &Povm, input: &StateVector, mu: usize) -> StateVector {
        let roots = povm.hermitian_roots().unwrap();
        let amps = roots.operators()[mu].apply_vec(input.amplitudes());
        StateVector::single("B", amps).unwrap().normalized().unwrap()
    }

    #[test]
    fn resource_schmidt_weights_are_the_retained_alphas() {
        let program = compile_remote_povm(fixture_a().oe_decompose().unwrap()).unwrap();
        let cut = schmidt(program.resource(), &[SubsystemId::from("A")]).unwrap();
        let mut expected: Vec<f64> = program
            .decomposition()
            .retained()
            .iter()
            .map(|&l| program.decomposition().alphas()[l])
            .collect();
        expected.sort_by(|a, b| b.total_cmp(a));
        assert_eq!(cut.coefficients.len(), expected.len());
        for (got, want) in cut.coefficients.iter().zip(expected) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn coupling_and_decode_are_unitary() {
        let program = compile_remote_povm(fixture_a().oe_decompose().unwrap()).unwrap();
        assert!(program.bob_coupling().unitarity_defect() < 1e-12);
        assert!(program.alice_unitary().unitarity_defect() < 1e-12);
        assert!(program.phase_correction(2).unitarity_defect() < 1e-12);
    }

    #[test]
    fn exact_run_reproduces_local_statistics() {
        let result = run_remote_povm(&fixture_a(), &psi_plus(), Mode::ExactBranches).unwrap();
        assert!((result.outcome_distribution[0] - 0.72).abs() < 1e-12);
        assert!((result.outcome_distribution[1] - 0.28).abs() < 1e-12);
        assert!(result.surplus_probability < 1e-15);
        assert!((result.entanglement_consumed - 0.543_564_443_199_596_4).abs() < 1e-12);
        for p in &result.eta_distribution {
            assert!((p - 0.25).abs() < 1e-12, "complementary outcomes must be uniform");
        }
        assert_eq!(result.transcript.bits_bob_to_alice(), 2);
        assert_eq!(result.transcript.bits_alice_to_bob(), 0);
    }

    #[test]
    fn post_states_match_the_hermitian_root_action() {
        let povm = fixture_a();
        let input = psi_plus();
        let result = run_remote_povm(&povm, &input, Mode::ExactBranches).unwrap();
        for (mu, post) in result.post_states.iter().enumerate() {
            let expected = root_post_state(&povm, &input, mu);
            let got = post.as_ref().expect("both outcomes have weight here");
            assert!(got.overlap(&expected).unwrap() > 1.0 - 1e-12);
        }
        // every branch, not just the representative per outcome
        for branch in &result.branches {
            let expected = root_post_state(&povm, &input, branch.outcome as usize);
            assert!(branch.bob_state.overlap(&expected).unwrap() > 1.0 - 1e-12);
        }
    }

    #[test]
    fn rotated_frame_povm_runs_remotely() {
        // projectors along (x + y)/sqrt(2): needs the rotated frame, and the
        // realized action must still be the hermitian roots
        let d = 1.0 / (2.0 * 2.0f64.sqrt());
        let povm = Povm::new(
            1,
            vec![
                ComplexMatrix::from_rows(&[
                    vec![re(0.5), Complex64::new(d, -d)],
                    vec![Complex64::new(d, d), re(0.5)],
                ]),
                ComplexMatrix::from_rows(&[
                    vec![re(0.5), Complex64::new(-d, d)],
                    vec![Complex64::new(-d, -d), re(0.5)],
                ]),
            ],
        )
        .unwrap();
        assert!(povm.oe_decompose().unwrap().frame_rotated());

        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let input = random_state(vec![(SubsystemId::from("in"), 2)], &mut rng).unwrap();
        let result = run_remote_povm(&povm, &input, Mode::ExactBranches).unwrap();
        let local = povm.distribution(&input).unwrap();
        for (r, l) in result.outcome_distribution.iter().zip(&local) {
            assert!((r - l).abs() < 1e-12);
        }
        for p in &result.eta_distribution {
            assert!((p - 0.25).abs() < 1e-12);
        }
        for branch in &result.branches {
            let expected = root_post_state(&povm, &input, branch.outcome as usize);
            assert!(branch.bob_state.overlap(&expected).unwrap() > 1.0 - 1e-12);
        }
        assert!((result.entanglement_consumed - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projective_measurement_on_plus_state() {
        let povm = Povm::computational_projectors(1).unwrap();
        let result = run_remote_povm(&povm, &plus_state(), Mode::ExactBranches).unwrap();
        assert!((result.outcome_distribution[0] - 0.5).abs() < 1e-12);
        assert!((result.outcome_distribution[1] - 0.5).abs() < 1e-12);
        for (mu, post) in result.post_states.iter().enumerate() {
            let expected = StateVector::basis_state(vec![(SubsystemId::from("B"), 2)], mu).unwrap();
            assert!(post.as_ref().unwrap().overlap(&expected).unwrap() > 1.0 - 1e-12);
        }
        assert!((result.entanglement_consumed - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_probability_outcome_has_no_post_state() {
        let povm = Povm::computational_projectors(1).unwrap();
        let zero = StateVector::single("in", vec![re(1.0), re(0.0)]).unwrap();
        let result = run_remote_povm(&povm, &zero, Mode::ExactBranches).unwrap();
        assert!((result.outcome_distribution[0] - 1.0).abs() < 1e-12);
        assert!(result.outcome_distribution[1].abs() < 1e-15);
        assert!(result.post_states[0].is_some());
        assert!(result.post_states[1].is_none());
    }

    #[test]
    fn trivial_povm_leaves_the_system_untouched() {
        let povm = Povm::new(1, vec![ComplexMatrix::identity(2)]).unwrap();
        let input = psi_plus();
        let result = run_remote_povm(&povm, &input, Mode::ExactBranches).unwrap();
        assert_eq!(result.outcome_distribution.len(), 1);
        assert!((result.outcome_distribution[0] - 1.0).abs() < 1e-12);
        let post = result.post_states[0].as_ref().unwrap();
        let expected = StateVector::single("B", input.amplitudes().to_vec()).unwrap();
        assert!(post.overlap(&expected).unwrap() > 1.0 - 1e-12);
        assert!(result.entanglement_consumed.abs() < 1e-12);
    }

    #[test]
    fn vanishing_operator_pads_the_ancilla_without_surplus_mass() {
        let h = 0.5f64.sqrt();
        let povm = Povm::from_kraus(&fig1_povm(h, h).unwrap()).unwrap();
        let result = run_remote_povm(&povm, &plus_state(), Mode::ExactBranches).unwrap();
        assert!((result.outcome_distribution[0] - 1.0).abs() < 1e-12);
        assert!(result.outcome_distribution[1].abs() < 1e-15);
        assert!(result.surplus_probability < 1e-15);
    }

    #[test]
    fn remote_equals_local_for_random_povms_and_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for outcomes in [2usize, 3, 4] {
            let povm = random_povm(1, outcomes, &mut rng).unwrap();
            let input = random_state(vec![(SubsystemId::from("in"), 2)], &mut rng).unwrap();
            let tv = compare_remote_vs_local(&povm, &input).unwrap();
            assert!(tv < 1e-9, "tv = {tv:.3e} at {outcomes} outcomes");
        }
    }

    #[test]
    fn remote_equals_local_for_random_product_povms_on_two_qubits() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for (k1, k2) in [(2usize, 2usize), (2, 3), (3, 2)] {
            let povm = random_product_povm(k1, k2, &mut rng).unwrap();
            let input = random_state(vec![(SubsystemId::from("in"), 4)], &mut rng).unwrap();
            let tv = compare_remote_vs_local(&povm, &input).unwrap();
            assert!(tv < 1e-9, "tv = {tv:.3e} at {k1}x{k2} outcomes");
        }
    }

    #[test]
    fn two_qubit_projective_measurement_runs_exactly() {
        let povm = Povm::computational_projectors(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let input = random_state(vec![(SubsystemId::from("in"), 4)], &mut rng).unwrap();
        let result = run_remote_povm(&povm, &input, Mode::ExactBranches).unwrap();
        let local = povm.distribution(&input).unwrap();
        for (r, l) in result.outcome_distribution.iter().zip(&local) {
            assert!((r - l).abs() < 1e-10);
        }
        for p in &result.eta_distribution {
            assert!((p - 1.0 / 16.0).abs() < 1e-10);
        }
        assert_eq!(result.transcript.bits_bob_to_alice(), 4);
    }

    #[test]
    fn three_qubit_compilation_is_rejected() {
        let povm = Povm::computational_projectors(3).unwrap();
        let err = compile_remote_povm(povm.oe_decompose().unwrap()).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn sampled_runs_are_reproducible_and_land_on_exact_support() {
        let program = compile_remote_povm(fixture_a().oe_decompose().unwrap()).unwrap();
        let input = psi_plus();
        let a = program.run(&input, Mode::Sampled(99), false).unwrap();
        let b = program.run(&input, Mode::Sampled(99), false).unwrap();
        assert_eq!(a.sampled_eta, b.sampled_eta);
        assert_eq!(a.sampled_outcome, b.sampled_outcome);
        let v = a.sampled_outcome.unwrap() as usize;
        assert!(v < 2);
        let expected = root_post_state(&fixture_a(), &input, v);
        assert!(a.post_states[v].as_ref().unwrap().overlap(&expected).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn sampled_frequencies_track_exact_probabilities() {
        let program = compile_remote_povm(fixture_a().oe_decompose().unwrap()).unwrap();
        let input = psi_plus();
        let stats = program.sample_counts(&input, 400, 7).unwrap();
        assert_eq!(stats.outcome_counts.iter().sum::<u64>(), 400);
        // p = 0.72, sigma = sqrt(p(1-p)/400) ~ 0.0224; allow 4 sigma
        let freq = stats.outcome_counts[0] as f64 / 400.0;
        assert!((freq - 0.72).abs() < 0.09, "freq = {freq}");
        let and_reported = program.run(&input, Mode::Sampled(3), true).unwrap();
        assert_eq!(and_reported.transcript.bits_alice_to_bob(), 1);
        assert_eq!(and_reported.transcript.bits_bob_to_alice(), 2);
    }

    #[test]
    fn input_shape_is_validated() {
        let program = compile_remote_povm(fixture_a().oe_decompose().unwrap()).unwrap();
        let wrong = StateVector::single("in", vec![re(1.0), re(0.0), re(0.0)]).unwrap();
        assert!(matches!(
            program.run(&wrong, Mode::ExactBranches, false),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
