//! Scripted two-outcome filtering protocol: Alice remotely drives the
//! measurement that either makes alpha|0> +/- beta|1> perfectly
//! distinguishable (outcome 0) or destroys the encoded sign (outcome 1),
//! spending the entanglement of a cos/sin resource pair and one classical
//! bit in each direction.

use crate::error::Result;
use crate::linalg::{entropy_base2, ComplexMatrix, StateVector, SubsystemId};
use crate::locc::{Mode, Party, RegisterGroup, Session, Transcript};
use crate::povm::fig1_povm;
use crate::random::derive_seed;
use num_complex::Complex64;

/// Which of the two candidate states the system is prepared in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputSign {
    Plus,
    Minus,
}

impl InputSign {
    /// Bob's X-basis outcome that correctly names this state after the
    /// filtering succeeds.
    pub fn correct_guess(self) -> u64 {
        match self {
            InputSign::Plus => 0,
            InputSign::Minus => 1,
        }
    }
}

/// Exact-mode run record for one prepared sign.
#[derive(Debug, Clone)]
pub struct Fig1Result {
    pub outcome0_prob: f64,
    pub guess_correct_given_outcome0: f64,
    pub entanglement_consumed: f64,
    pub transcript: Transcript,
    /// Bob's complementary-basis bit; uniform.
    pub parity_distribution: [f64; 2],
    /// Alice's reported bit; biased by the success probability.
    pub outcome_distribution: [f64; 2],
}

/// Single sampled trajectory.
#[derive(Debug, Clone)]
pub struct Fig1Shot {
    pub parity: u64,
    pub outcome: u64,
    pub guess: u64,
    pub transcript: Transcript,
}

/// Tally over sampled shots with the prepared sign alternating per shot.
#[derive(Debug, Clone)]
pub struct Fig1SampleStats {
    pub shots: u64,
    pub parity_counts: [u64; 2],
    pub outcome_counts: [u64; 2],
    pub outcome0_shots: u64,
    pub outcome0_correct: u64,
}

fn resource_angle(alpha: f64, beta: f64) -> (f64, f64) {
    let cos_sq = 0.5 * (1.0 + alpha / beta);
    let c = cos_sq.sqrt();
    (c, (1.0 - cos_sq).max(0.0).sqrt())
}

fn run_session(alpha: f64, beta: f64, sign: InputSign, mode: Mode) -> Result<(Session, f64)> {
    // validates the amplitude constraints (0 < alpha <= beta, normalized)
    fig1_povm(alpha, beta)?;
    let (c, s) = resource_angle(alpha, beta);
    let zero = Complex64::new(0.0, 0.0);
    let resource = StateVector::new(
        vec![Complex64::new(c, 0.0), zero, zero, Complex64::new(s, 0.0)],
        vec![(SubsystemId::from("A"), 2), (SubsystemId::from("b"), 2)],
    )?;
    let input_sign = match sign {
        InputSign::Plus => 1.0,
        InputSign::Minus => -1.0,
    };
    let system = StateVector::single(
        "B",
        vec![
            Complex64::new(alpha, 0.0),
            Complex64::new(input_sign * beta, 0.0),
        ],
    )?;
    let mut session = Session::from_groups(
        vec![
            RegisterGroup::new(resource, &[("A", Party::Alice), ("b", Party::Bob)]),
            RegisterGroup::new(system, &[("B", Party::Bob)]),
        ],
        mode,
    )?;

    let phase_flip = ComplexMatrix::from_real_diag(&[1.0, -1.0]);
    let controlled_flip = ComplexMatrix::from_real_diag(&[1.0, 1.0, 1.0, -1.0]);
    let h = 0.5f64.sqrt();
    let x_basis = ComplexMatrix::from_fn(2, 2, |r, col| {
        Complex64::new(if (r, col) == (1, 1) { -h } else { h }, 0.0)
    });
    // rotation sending |0> to c|0> - s|1> and |1> to s|0> + c|1>
    let decode = ComplexMatrix::from_fn(2, 2, |r, col| match (r, col) {
        (0, 0) => Complex64::new(c, 0.0),
        (0, 1) => Complex64::new(s, 0.0),
        (1, 0) => Complex64::new(-s, 0.0),
        _ => Complex64::new(c, 0.0),
    });

    session.local_unitary(Party::Bob, &["b", "B"], &controlled_flip, "controlled-phase-flip")?;
    session.local_measure(Party::Bob, &["b"], &x_basis, "parity")?;
    session.send_outcome(Party::Bob, "parity")?;
    session.local_unitary_conditioned(Party::Alice, &["A"], "parity", "phase-fix", |v| {
        if v == 1 {
            phase_flip.clone()
        } else {
            ComplexMatrix::identity(2)
        }
    })?;
    session.local_unitary(Party::Alice, &["A"], &decode, "decode-rotation")?;
    session.local_measure(Party::Alice, &["A"], &ComplexMatrix::identity(2), "outcome")?;
    session.send_outcome(Party::Alice, "outcome")?;
    session.local_measure(Party::Bob, &["B"], &x_basis, "guess")?;

    let consumed = entropy_base2(&[c, s])?;
    Ok((session, consumed))
}

/// Exact run for one prepared sign.
pub fn fig1_protocol(alpha: f64, beta: f64, sign: InputSign) -> Result<Fig1Result> {
    let (session, consumed) = run_session(alpha, beta, sign, Mode::ExactBranches)?;

    let parity = session.branch_distribution("parity")?;
    let outcome = session.branch_distribution("outcome")?;
    let outcome0_prob = outcome.get(&0).copied().unwrap_or(0.0);

    let correct = sign.correct_guess();
    let mut joint_correct = 0.0;
    for branch in session.branches() {
        if branch.outcomes["outcome"] == 0 && branch.outcomes["guess"] == correct {
            joint_correct += branch.probability;
        }
    }
    let guess_correct_given_outcome0 = if outcome0_prob > 0.0 {
        joint_correct / outcome0_prob
    } else {
        0.0
    };

    Ok(Fig1Result {
        outcome0_prob,
        guess_correct_given_outcome0,
        entanglement_consumed: consumed,
        transcript: session.transcript().clone(),
        parity_distribution: [
            parity.get(&0).copied().unwrap_or(0.0),
            parity.get(&1).copied().unwrap_or(0.0),
        ],
        outcome_distribution: [
            outcome0_prob,
            outcome.get(&1).copied().unwrap_or(0.0),
        ],
    })
}

/// One sampled trajectory for one prepared sign.
pub fn fig1_sampled(alpha: f64, beta: f64, sign: InputSign, seed: u64) -> Result<Fig1Shot> {
    let (session, _) = run_session(alpha, beta, sign, Mode::Sampled(seed))?;
    let record = &session.branches()[0].outcomes;
    Ok(Fig1Shot {
        parity: record["parity"],
        outcome: record["outcome"],
        guess: record["guess"],
        transcript: session.transcript().clone(),
    })
}

/// Repeated sampled shots, sign alternating (even shots +, odd shots -),
/// seeds derived per shot.
pub fn fig1_sample_stats(
    alpha: f64,
    beta: f64,
    shots: u64,
    seed: u64,
) -> Result<Fig1SampleStats> {
    let mut stats = Fig1SampleStats {
        shots,
        parity_counts: [0, 0],
        outcome_counts: [0, 0],
        outcome0_shots: 0,
        outcome0_correct: 0,
    };
    for shot in 0..shots {
        let sign = if shot % 2 == 0 {
            InputSign::Plus
        } else {
            InputSign::Minus
        };
        let run = fig1_sampled(alpha, beta, sign, derive_seed(seed, shot))?;
        stats.parity_counts[run.parity as usize] += 1;
        stats.outcome_counts[run.outcome as usize] += 1;
        if run.outcome == 0 {
            stats.outcome0_shots += 1;
            if run.guess == sign.correct_guess() {
                stats.outcome0_correct += 1;
            }
        }
    }
    Ok(stats)
}
