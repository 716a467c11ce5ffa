//! Command bodies. Each loads its inputs, runs the library, prints an
//! aligned table to stdout, and writes the same record as pretty JSON to
//! --output. Reports are plain structs with fixed field order and no
//! maps, so identical invocations serialize byte-identically.
//!
//! Invariant checks run after the report is written: a violated run still
//! leaves a full record behind, then exits 3.

use crate::{Command, RunMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use repovm::linalg::StateVector;
use repovm::locc::Mode;
use repovm::povm::{
    fig1_povm, hs_inner, KrausSet, MeasurementFile, MeasurementKind, OEDecomposition, Povm,
};
use repovm::protocols::{
    capability_epr_experiment, capability_search, compile_remote_povm, fig1_protocol,
    fig1_sample_stats, povm_digest, BitCounts, CapabilityFigures, Fig1Result, InputSign,
    ProtocolReport, RemoteRunResult,
};
use repovm::random::{derive_seed, random_povm, random_product_povm, random_state};
use repovm::{Complex64, Error};
use serde::Serialize;
use std::fmt::Display;
use std::fs;
use std::path::Path;

/// Mapped process failure; `code` is the exit code.
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }

    fn invalid(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn invariant(message: impl Into<String>) -> Self {
        Failure {
            code: 3,
            message: message.into(),
        }
    }
}

/// Input data that fails validation.
fn invalid_input(err: Error) -> Failure {
    Failure::invalid(err.to_string())
}

/// Errors out of calls whose inputs were already validated.
fn internal(err: Error) -> Failure {
    Failure::invariant(format!("internal failure: {err}"))
}

pub fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Analyze { input, output } => cmd_analyze(&input, output.as_deref()),
        Command::RemoteRun {
            input,
            output,
            mode,
            shots,
            seed,
        } => cmd_remote_run(&input, output.as_deref(), mode, shots, seed),
        Command::Fig1 {
            alpha,
            beta,
            shots,
            seed,
            output,
        } => cmd_fig1(alpha, beta, shots, seed, output.as_deref()),
        Command::Capability {
            input,
            output,
            shots,
            seed,
        } => cmd_capability(&input, output.as_deref(), shots, seed),
        Command::RandomSuite {
            n,
            count,
            seed,
            output,
        } => cmd_random_suite(n, count, seed, output.as_deref()),
    }
}

// ---------------------------------------------------------------------
// analyze

#[derive(Serialize)]
struct AnalyzeReport {
    kind: String,
    n_qubits: usize,
    operators: usize,
    povm_digest: String,
    set_orthogonal: bool,
    set_max_pairwise_cross: f64,
    set_oe_fixed_frame: bool,
    root_gram_max_offdiag: f64,
    decomposed: bool,
    frame_rotated: Option<bool>,
    frame_defect: Option<f64>,
    retained: Option<Vec<usize>>,
    alphas_squared: Option<Vec<f64>>,
    entanglement_cost: Option<f64>,
    unitary_defect: Option<f64>,
    reconstruction_residual: Option<f64>,
}

fn cmd_analyze(input: &Path, output: Option<&Path>) -> Result<(), Failure> {
    let file = load_measurement(input)?;
    let povm = file.into_povm().map_err(invalid_input)?;
    // Verdicts apply to the operators as given: Kraus files are judged on
    // their own operators, POVM files on the hermitian roots.
    let set = match file.kind {
        MeasurementKind::Kraus => file.into_kraus().map_err(invalid_input)?,
        MeasurementKind::Povm => povm.hermitian_roots().map_err(invalid_input)?,
    };
    let ortho = set.is_orthogonal().map_err(invalid_input)?;
    let oe = set.is_oe().map_err(invalid_input)?;
    let roots = povm.hermitian_roots().map_err(invalid_input)?;
    let root_gram = fixed_gram_offdiag(&roots)?;

    let mut report = AnalyzeReport {
        kind: file.kind.as_str().into(),
        n_qubits: povm.n_qubits(),
        operators: set.len(),
        povm_digest: povm_digest(&povm),
        set_orthogonal: ortho.orthogonal,
        set_max_pairwise_cross: ortho.max_offdiag,
        set_oe_fixed_frame: oe,
        root_gram_max_offdiag: root_gram,
        decomposed: false,
        frame_rotated: None,
        frame_defect: None,
        retained: None,
        alphas_squared: None,
        entanglement_cost: None,
        unitary_defect: None,
        reconstruction_residual: None,
    };
    match povm.oe_decompose() {
        Ok(d) => {
            report.decomposed = true;
            report.frame_rotated = Some(d.frame_rotated());
            report.retained = Some(d.retained().to_vec());
            report.alphas_squared = Some(d.alphas().iter().map(|a| a * a).collect());
            report.entanglement_cost = Some(d.entanglement_cost());
            report.unitary_defect = Some(d.unitary().unitarity_defect());
            report.reconstruction_residual = Some(d.reconstruction_residual());
        }
        Err(Error::NotOrthogonalEquivalent(defect)) => report.frame_defect = Some(defect),
        Err(err) => return Err(invalid_input(err)),
    }

    println!("analyze {}", input.display());
    row("kind", &report.kind);
    row(
        "qubits / operators",
        format!("{} / {}", report.n_qubits, report.operators),
    );
    row("povm digest", &report.povm_digest);
    row(
        "orthogonal set",
        format!(
            "{} (max pairwise cross {})",
            report.set_orthogonal,
            sci(report.set_max_pairwise_cross)
        ),
    );
    row("set verdict", if report.set_oe_fixed_frame { "OE" } else { "not OE" });
    row("root gram off-diagonal", sci(report.root_gram_max_offdiag));
    if report.decomposed {
        let rotated = report.frame_rotated.unwrap_or(false);
        row(
            "decomposed",
            if rotated { "yes (rotated frame)" } else { "yes (fixed frame)" },
        );
        row("retained", format!("{:?}", report.retained.as_deref().unwrap_or(&[])));
        row(
            "alpha^2",
            float_list(report.alphas_squared.as_deref().unwrap_or(&[])),
        );
        row(
            "entanglement cost",
            format!("{} ebits", fixed6(report.entanglement_cost.unwrap_or(0.0))),
        );
        row("unitary defect", sci(report.unitary_defect.unwrap_or(0.0)));
        row(
            "reconstruction residual",
            sci(report.reconstruction_residual.unwrap_or(0.0)),
        );
    } else {
        row(
            "decomposed",
            format!("no (frame defect {})", sci(report.frame_defect.unwrap_or(0.0))),
        );
    }
    write_report(output, &report)
}

// ---------------------------------------------------------------------
// remote-run

#[derive(Serialize)]
struct SampledSection {
    shots: u64,
    seed: u64,
    outcome_counts: Vec<u64>,
    eta_counts: Vec<u64>,
    max_outcome_sigma: f64,
    max_eta_sigma: f64,
}

#[derive(Serialize)]
struct RemoteRunReport {
    mode: String,
    n_qubits: usize,
    outcomes: usize,
    frame_rotated: bool,
    retained: Vec<usize>,
    outcome_distribution: Vec<f64>,
    local_distribution: Vec<f64>,
    tv_distance: f64,
    eta_max_deviation: f64,
    surplus_probability: f64,
    min_post_fidelity: f64,
    entanglement_consumed: f64,
    bits_alice_to_bob: u64,
    bits_bob_to_alice: u64,
    sampled: Option<SampledSection>,
    report: ProtocolReport,
}

fn cmd_remote_run(
    input: &Path,
    output: Option<&Path>,
    mode: RunMode,
    shots: Option<u64>,
    seed: Option<u64>,
) -> Result<(), Failure> {
    let sampling = match mode {
        RunMode::Exact => None,
        RunMode::Sampled => {
            let shots = shots.ok_or_else(|| Failure::usage("--mode sampled requires --shots"))?;
            let seed = seed.ok_or_else(|| Failure::usage("--mode sampled requires --seed"))?;
            if shots == 0 {
                return Err(Failure::usage("--shots must be at least 1"));
            }
            Some((shots, seed))
        }
    };
    let file = load_measurement(input)?;
    let povm = file.into_povm().map_err(invalid_input)?;
    let d = decompose_for_protocol(&povm)?;
    let alphas = d.alphas().to_vec();
    let retained = d.retained().to_vec();
    let frame_rotated = d.frame_rotated();
    let cost = d.entanglement_cost();
    let program = compile_remote_povm(d).map_err(internal)?;

    let probe = uniform_probe(povm.n_qubits())?;
    let exact = program
        .run(&probe, Mode::ExactBranches, false)
        .map_err(internal)?;
    let figures = exact_figures(&povm, &probe, &exact)?;
    let sampled = match sampling {
        Some((shots, seed)) => {
            let stats = program
                .sample_counts(&probe, shots, seed)
                .map_err(internal)?;
            Some(SampledSection {
                shots,
                seed,
                max_outcome_sigma: max_sigma(&stats.outcome_counts, &exact.outcome_distribution, shots),
                max_eta_sigma: max_sigma(&stats.eta_counts, &exact.eta_distribution, shots),
                outcome_counts: stats.outcome_counts,
                eta_counts: stats.eta_counts,
            })
        }
        None => None,
    };

    let report = RemoteRunReport {
        mode: match mode {
            RunMode::Exact => "exact".into(),
            RunMode::Sampled => "sampled".into(),
        },
        n_qubits: povm.n_qubits(),
        outcomes: povm.len(),
        frame_rotated,
        retained,
        outcome_distribution: exact.outcome_distribution.clone(),
        local_distribution: figures.local.clone(),
        tv_distance: figures.tv,
        eta_max_deviation: figures.eta_dev,
        surplus_probability: figures.surplus,
        min_post_fidelity: figures.min_fidelity,
        entanglement_consumed: exact.entanglement_consumed,
        bits_alice_to_bob: exact.transcript.bits_alice_to_bob(),
        bits_bob_to_alice: exact.transcript.bits_bob_to_alice(),
        sampled,
        report: ProtocolReport {
            povm_digest: povm_digest(&povm),
            alphas,
            e_povm: cost,
            tv_distance: Some(figures.tv),
            bit_counts: Some(BitCounts {
                alice_to_bob: exact.transcript.bits_alice_to_bob(),
                bob_to_alice: exact.transcript.bits_bob_to_alice(),
            }),
            capability: None,
        },
    };

    println!("remote-run {} ({})", input.display(), report.mode);
    row(
        "qubits / outcomes",
        format!("{} / {}", report.n_qubits, report.outcomes),
    );
    row("povm digest", &report.report.povm_digest);
    row(
        "frame",
        if report.frame_rotated { "rotated" } else { "fixed" },
    );
    row("retained", format!("{:?}", report.retained));
    row("remote distribution", float_list(&report.outcome_distribution));
    row("local distribution", float_list(&report.local_distribution));
    row("tv distance", sci(report.tv_distance));
    row("eta max deviation", sci(report.eta_max_deviation));
    row("surplus probability", sci(report.surplus_probability));
    row("min post fidelity", fixed6(report.min_post_fidelity));
    row(
        "entanglement consumed",
        format!("{} ebits", fixed6(report.entanglement_consumed)),
    );
    row(
        "bits alice->bob / bob->alice",
        format!("{} / {}", report.bits_alice_to_bob, report.bits_bob_to_alice),
    );
    if let Some(s) = &report.sampled {
        row("shots / seed", format!("{} / {}", s.shots, s.seed));
        row("outcome counts", int_list(&s.outcome_counts));
        row("max outcome sigma", format!("{:.2}", s.max_outcome_sigma));
        row("max eta sigma", format!("{:.2}", s.max_eta_sigma));
    }
    write_report(output, &report)?;

    let mut violations = Vec::new();
    if figures.tv >= 1e-9 {
        violations.push(format!("tv distance {} >= 1e-9", sci(figures.tv)));
    }
    if figures.eta_dev >= 1e-10 {
        violations.push(format!("eta deviation {} >= 1e-10", sci(figures.eta_dev)));
    }
    if figures.min_fidelity < 1.0 - 1e-9 {
        violations.push(format!(
            "post fidelity {} < 1 - 1e-9",
            fixed6(figures.min_fidelity)
        ));
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Failure::invariant(violations.join("; ")))
    }
}

// ---------------------------------------------------------------------
// fig1

#[derive(Serialize)]
struct SignSection {
    outcome0_prob: f64,
    guess_correct_given_outcome0: f64,
    parity_distribution: [f64; 2],
    outcome_distribution: [f64; 2],
}

impl SignSection {
    fn from_result(r: &Fig1Result) -> Self {
        SignSection {
            outcome0_prob: r.outcome0_prob,
            guess_correct_given_outcome0: r.guess_correct_given_outcome0,
            parity_distribution: r.parity_distribution,
            outcome_distribution: r.outcome_distribution,
        }
    }
}

#[derive(Serialize)]
struct Fig1SampledSection {
    shots: u64,
    seed: u64,
    parity_counts: [u64; 2],
    outcome_counts: [u64; 2],
    outcome0_shots: u64,
    outcome0_correct: u64,
    outcome0_sigma: f64,
}

#[derive(Serialize)]
struct Fig1Report {
    alpha: f64,
    beta: f64,
    entanglement_consumed: f64,
    outcome0_prob: f64,
    bits_alice_to_bob: u64,
    bits_bob_to_alice: u64,
    plus: SignSection,
    minus: SignSection,
    sampled: Option<Fig1SampledSection>,
    report: ProtocolReport,
}

/// Domain errors out of the filtering protocol are argument problems.
fn fig1_failure(err: Error) -> Failure {
    match err {
        Error::InvalidArgument(msg) => Failure::usage(msg),
        other => internal(other),
    }
}

fn cmd_fig1(
    alpha: f64,
    beta: f64,
    shots: Option<u64>,
    seed: Option<u64>,
    output: Option<&Path>,
) -> Result<(), Failure> {
    if !alpha.is_finite() || !beta.is_finite() || alpha <= 0.0 || beta <= 0.0 {
        return Err(Failure::usage("amplitudes must be finite and positive"));
    }
    // The pair only enters through its ratio; normalize so inputs given to
    // a few decimals still define a valid state.
    let norm = alpha.hypot(beta);
    let (alpha, beta) = (alpha / norm, beta / norm);
    if alpha > beta {
        return Err(Failure::usage(
            "alpha exceeds beta; pass the smaller amplitude first",
        ));
    }
    let sampling = match (shots, seed) {
        (Some(shots), Some(seed)) => {
            if shots == 0 {
                return Err(Failure::usage("--shots must be at least 1"));
            }
            Some((shots, seed))
        }
        (Some(_), None) => return Err(Failure::usage("--shots requires --seed")),
        (None, Some(_)) => return Err(Failure::usage("--seed requires --shots")),
        (None, None) => None,
    };

    let plus = fig1_protocol(alpha, beta, InputSign::Plus).map_err(fig1_failure)?;
    let minus = fig1_protocol(alpha, beta, InputSign::Minus).map_err(fig1_failure)?;
    let sampled = match sampling {
        Some((shots, seed)) => {
            let stats = fig1_sample_stats(alpha, beta, shots, seed).map_err(fig1_failure)?;
            let sigma = if plus.outcome0_prob > 0.0 && plus.outcome0_prob < 1.0 {
                let freq = stats.outcome_counts[0] as f64 / shots as f64;
                let se =
                    (plus.outcome0_prob * (1.0 - plus.outcome0_prob) / shots as f64).sqrt();
                (freq - plus.outcome0_prob).abs() / se
            } else {
                0.0
            };
            Some(Fig1SampledSection {
                shots,
                seed,
                parity_counts: stats.parity_counts,
                outcome_counts: stats.outcome_counts,
                outcome0_shots: stats.outcome0_shots,
                outcome0_correct: stats.outcome0_correct,
                outcome0_sigma: sigma,
            })
        }
        None => None,
    };

    let povm = Povm::from_kraus(&fig1_povm(alpha, beta).map_err(fig1_failure)?)
        .map_err(internal)?;
    let cos_sq = 0.5 * (1.0 + alpha / beta);
    let report = Fig1Report {
        alpha,
        beta,
        entanglement_consumed: plus.entanglement_consumed,
        outcome0_prob: plus.outcome0_prob,
        bits_alice_to_bob: plus.transcript.bits_alice_to_bob(),
        bits_bob_to_alice: plus.transcript.bits_bob_to_alice(),
        plus: SignSection::from_result(&plus),
        minus: SignSection::from_result(&minus),
        sampled,
        report: ProtocolReport {
            povm_digest: povm_digest(&povm),
            alphas: vec![cos_sq.sqrt(), (1.0 - cos_sq).max(0.0).sqrt()],
            e_povm: plus.entanglement_consumed,
            tv_distance: None,
            bit_counts: Some(BitCounts {
                alice_to_bob: plus.transcript.bits_alice_to_bob(),
                bob_to_alice: plus.transcript.bits_bob_to_alice(),
            }),
            capability: None,
        },
    };

    println!("fig1 alpha {} beta {}", fixed6(report.alpha), fixed6(report.beta));
    row(
        "entanglement consumed",
        format!("{} ebits", fixed6(report.entanglement_consumed)),
    );
    row("outcome 0 probability", fixed6(report.outcome0_prob));
    row(
        "guess correct | outcome 0",
        format!(
            "{} (plus) / {} (minus)",
            fixed6(report.plus.guess_correct_given_outcome0),
            fixed6(report.minus.guess_correct_given_outcome0)
        ),
    );
    row("parity distribution", float_list(&report.plus.parity_distribution));
    row(
        "bits alice->bob / bob->alice",
        format!("{} / {}", report.bits_alice_to_bob, report.bits_bob_to_alice),
    );
    if let Some(s) = &report.sampled {
        row("shots / seed", format!("{} / {}", s.shots, s.seed));
        row("outcome counts", int_list(&s.outcome_counts));
        row(
            "outcome 0 correct",
            format!("{} / {}", s.outcome0_correct, s.outcome0_shots),
        );
        row("outcome 0 sigma", format!("{:.2}", s.outcome0_sigma));
    }
    write_report(output, &report)
}

// ---------------------------------------------------------------------
// capability

#[derive(Serialize)]
struct CapabilityReport {
    n_qubits: usize,
    outcomes: usize,
    entanglement_cost: f64,
    epr_entropy: f64,
    search_entropy: f64,
    search_trials: u64,
    seed: u64,
    epr_gap: f64,
    search_excess: f64,
    report: ProtocolReport,
}

fn cmd_capability(
    input: &Path,
    output: Option<&Path>,
    shots: Option<u64>,
    seed: Option<u64>,
) -> Result<(), Failure> {
    let trials = shots.unwrap_or(1000);
    if trials == 0 {
        return Err(Failure::usage("--shots must be at least 1"));
    }
    let seed = seed.unwrap_or(0);
    let file = load_measurement(input)?;
    let povm = file.into_povm().map_err(invalid_input)?;
    let d = decompose_for_protocol(&povm)?;
    let cost = d.entanglement_cost();
    let epr = capability_epr_experiment(&d).map_err(internal)?;
    let search = capability_search(&d, trials, seed).map_err(internal)?;

    let report = CapabilityReport {
        n_qubits: povm.n_qubits(),
        outcomes: povm.len(),
        entanglement_cost: cost,
        epr_entropy: epr,
        search_entropy: search,
        search_trials: trials,
        seed,
        epr_gap: (epr - cost).abs(),
        search_excess: search - epr,
        report: ProtocolReport {
            povm_digest: povm_digest(&povm),
            alphas: d.alphas().to_vec(),
            e_povm: cost,
            tv_distance: None,
            bit_counts: None,
            capability: Some(CapabilityFigures {
                epr_entropy: epr,
                search_entropy: search,
                search_trials: trials,
            }),
        },
    };

    println!("capability {}", input.display());
    row(
        "qubits / outcomes",
        format!("{} / {}", report.n_qubits, report.outcomes),
    );
    row("povm digest", &report.report.povm_digest);
    row(
        "entanglement cost",
        format!("{} ebits", fixed6(report.entanglement_cost)),
    );
    row("epr experiment", format!("{} ebits", fixed6(report.epr_entropy)));
    row(
        "search best",
        format!(
            "{} ebits ({} trials, seed {})",
            fixed6(report.search_entropy),
            report.search_trials,
            report.seed
        ),
    );
    row("epr gap", sci(report.epr_gap));
    row("search excess", sci(report.search_excess));
    write_report(output, &report)?;

    let mut violations = Vec::new();
    if report.epr_gap >= 1e-9 {
        violations.push(format!("epr gap {} >= 1e-9", sci(report.epr_gap)));
    }
    if report.search_excess > 1e-9 {
        violations.push(format!("search excess {} > 1e-9", sci(report.search_excess)));
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Failure::invariant(violations.join("; ")))
    }
}

// ---------------------------------------------------------------------
// random-suite

/// Two-qubit cases are products of independent single-qubit POVMs; the
/// split picks the per-factor outcome counts.
const PRODUCT_SPLITS: [(usize, usize); 5] = [(2, 2), (2, 3), (3, 2), (2, 4), (4, 2)];

#[derive(Serialize)]
struct CaseReport {
    index: u64,
    outcomes: usize,
    povm_digest: String,
    frame_rotated: bool,
    gram_max_offdiag: f64,
    reconstruction_residual: f64,
    entanglement_cost: f64,
    tv_distance: f64,
    eta_max_deviation: f64,
    surplus_probability: f64,
    min_post_fidelity: f64,
}

#[derive(Serialize)]
struct WorstCase {
    max_gram_offdiag: f64,
    max_reconstruction_residual: f64,
    max_tv_distance: f64,
    max_eta_deviation: f64,
    max_surplus: f64,
    min_post_fidelity: f64,
}

#[derive(Serialize)]
struct SuiteReport {
    n_qubits: usize,
    count: u64,
    seed: u64,
    rotated_frames: u64,
    cases: Vec<CaseReport>,
    worst: Option<WorstCase>,
    violations: Vec<String>,
}

fn cmd_random_suite(
    n: usize,
    count: u64,
    seed: Option<u64>,
    output: Option<&Path>,
) -> Result<(), Failure> {
    if n != 1 && n != 2 {
        return Err(Failure::usage("--n must be 1 or 2"));
    }
    let seed = seed.unwrap_or(0);
    let dim = 1usize << n;
    let mut cases: Vec<CaseReport> = Vec::new();
    let mut violations: Vec<String> = Vec::new();
    let mut worst: Option<WorstCase> = None;

    for index in 0..count {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, index));
        let povm = if n == 1 {
            let outcomes = rng.gen_range(2..=4);
            random_povm(1, outcomes, &mut rng).map_err(internal)?
        } else {
            let (k1, k2) = PRODUCT_SPLITS[rng.gen_range(0..PRODUCT_SPLITS.len())];
            random_product_povm(k1, k2, &mut rng).map_err(internal)?
        };
        let input = random_state(vec![("in".into(), dim)], &mut rng).map_err(internal)?;

        let d = match povm.oe_decompose() {
            Ok(d) => d,
            Err(err) => {
                violations.push(format!("case {index}: decomposition failed: {err}"));
                continue;
            }
        };
        let gram = frame_gram_offdiag(&d)?;
        let residual = d.reconstruction_residual();
        let cost = d.entanglement_cost();
        let rotated = d.frame_rotated();
        let program = compile_remote_povm(d).map_err(internal)?;
        let run = program
            .run(&input, Mode::ExactBranches, false)
            .map_err(internal)?;
        let figures = exact_figures(&povm, &input, &run)?;

        if gram >= 1e-7 {
            violations.push(format!(
                "case {index}: frame gram off-diagonal {} >= 1e-7",
                sci(gram)
            ));
        }
        if residual >= 1e-8 {
            violations.push(format!(
                "case {index}: reconstruction residual {} >= 1e-8",
                sci(residual)
            ));
        }
        if figures.tv >= 1e-9 {
            violations.push(format!("case {index}: tv distance {} >= 1e-9", sci(figures.tv)));
        }
        if figures.eta_dev >= 1e-10 {
            violations.push(format!(
                "case {index}: eta deviation {} >= 1e-10",
                sci(figures.eta_dev)
            ));
        }
        if figures.min_fidelity < 1.0 - 1e-9 {
            violations.push(format!(
                "case {index}: post fidelity {} < 1 - 1e-9",
                fixed6(figures.min_fidelity)
            ));
        }

        let w = worst.get_or_insert(WorstCase {
            max_gram_offdiag: 0.0,
            max_reconstruction_residual: 0.0,
            max_tv_distance: 0.0,
            max_eta_deviation: 0.0,
            max_surplus: 0.0,
            min_post_fidelity: 1.0,
        });
        w.max_gram_offdiag = w.max_gram_offdiag.max(gram);
        w.max_reconstruction_residual = w.max_reconstruction_residual.max(residual);
        w.max_tv_distance = w.max_tv_distance.max(figures.tv);
        w.max_eta_deviation = w.max_eta_deviation.max(figures.eta_dev);
        w.max_surplus = w.max_surplus.max(figures.surplus);
        w.min_post_fidelity = w.min_post_fidelity.min(figures.min_fidelity);

        cases.push(CaseReport {
            index,
            outcomes: povm.len(),
            povm_digest: povm_digest(&povm),
            frame_rotated: rotated,
            gram_max_offdiag: gram,
            reconstruction_residual: residual,
            entanglement_cost: cost,
            tv_distance: figures.tv,
            eta_max_deviation: figures.eta_dev,
            surplus_probability: figures.surplus,
            min_post_fidelity: figures.min_fidelity,
        });
    }

    let report = SuiteReport {
        n_qubits: n,
        count,
        seed,
        rotated_frames: cases.iter().filter(|c| c.frame_rotated).count() as u64,
        cases,
        worst,
        violations,
    };

    println!("random-suite n={} count={} seed={}", n, count, seed);
    row("cases run", report.cases.len());
    row("rotated frames", report.rotated_frames);
    if let Some(w) = &report.worst {
        row("worst gram off-diagonal", sci(w.max_gram_offdiag));
        row("worst reconstruction", sci(w.max_reconstruction_residual));
        row("worst tv distance", sci(w.max_tv_distance));
        row("worst eta deviation", sci(w.max_eta_deviation));
        row("worst surplus", sci(w.max_surplus));
        row("min post fidelity", fixed6(w.min_post_fidelity));
    }
    row("violations", report.violations.len());
    for v in &report.violations {
        println!("  ! {v}");
    }
    write_report(output, &report)?;

    if report.violations.is_empty() {
        Ok(())
    } else {
        Err(Failure::invariant(format!(
            "{} case invariant violation(s)",
            report.violations.len()
        )))
    }
}

// ---------------------------------------------------------------------
// shared helpers

fn load_measurement(path: &Path) -> Result<MeasurementFile, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::invalid(format!("cannot read {}: {e}", path.display())))?;
    MeasurementFile::from_json(&text)
        .map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

fn write_report<T: Serialize>(output: Option<&Path>, report: &T) -> Result<(), Failure> {
    let Some(path) = output else { return Ok(()) };
    let mut text = serde_json::to_string_pretty(report)
        .map_err(|e| Failure::invariant(format!("report serialization failed: {e}")))?;
    text.push('\n');
    fs::write(path, text)
        .map_err(|e| Failure::invalid(format!("cannot write {}: {e}", path.display())))
}

/// Rejections here mean the measurement cannot drive the protocol, which
/// is a property of the input file.
fn decompose_for_protocol(povm: &Povm) -> Result<OEDecomposition, Failure> {
    povm.oe_decompose().map_err(|err| match err {
        Error::NotOrthogonalEquivalent(defect) => Failure::invalid(format!(
            "measurement admits no orthogonal frame (defect {defect:.3e}); remote compilation impossible"
        )),
        other => invalid_input(other),
    })
}

fn uniform_probe(n_qubits: usize) -> Result<StateVector, Failure> {
    let dim = 1usize << n_qubits;
    let amp = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
    StateVector::single("in", vec![amp; dim]).map_err(internal)
}

/// Exact-run figures checked against the local oracle.
struct RunFigures {
    local: Vec<f64>,
    tv: f64,
    eta_dev: f64,
    surplus: f64,
    min_fidelity: f64,
}

fn exact_figures(
    povm: &Povm,
    input: &StateVector,
    result: &RemoteRunResult,
) -> Result<RunFigures, Failure> {
    let local = povm.distribution(input).map_err(internal)?;
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

    let roots = povm.hermitian_roots().map_err(internal)?;
    let mut min_fidelity = 1.0f64;
    for branch in &result.branches {
        // Branches below the mass floor carry no statistics and their
        // states are numerically meaningless.
        if branch.probability <= 1e-9 {
            continue;
        }
        let target = roots.operators()[branch.outcome as usize].apply_vec(input.amplitudes());
        let expected = StateVector::single("B", target)
            .and_then(|s| s.normalized())
            .map_err(internal)?;
        let fid = branch.bob_state.overlap(&expected).map_err(internal)?.powi(2);
        min_fidelity = min_fidelity.min(fid);
    }
    Ok(RunFigures {
        local,
        tv,
        eta_dev,
        surplus: result.surplus_probability,
        min_fidelity,
    })
}

/// Largest off-diagonal Gram entry of the roots against the decomposition
/// frame; the diagonality the protocol relies on, measured directly.
fn frame_gram_offdiag(d: &OEDecomposition) -> Result<f64, Failure> {
    let roots = d.source_roots().operators();
    let frame = d.frame();
    let mut coeff = vec![vec![Complex64::new(0.0, 0.0); frame.len()]; roots.len()];
    for (nu, root) in roots.iter().enumerate() {
        for (slot, tau) in frame.iter().enumerate() {
            coeff[nu][slot] = hs_inner(tau, root).map_err(internal)?;
        }
    }
    let mut result = 0.0f64;
    for a in 0..frame.len() {
        for b in 0..frame.len() {
            if a == b {
                continue;
            }
            let mut g = Complex64::new(0.0, 0.0);
            for row in &coeff {
                g += row[a].conj() * row[b];
            }
            result = result.max(g.norm());
        }
    }
    Ok(result)
}

/// Fixed-frame Gram off-diagonal of a Kraus set's expansion coefficients.
fn fixed_gram_offdiag(set: &KrausSet) -> Result<f64, Failure> {
    let expansion = set.pauli_expand().map_err(invalid_input)?;
    let c = expansion.entries();
    let gram = &c.dagger() * c;
    let mut result = 0.0f64;
    for a in 0..gram.rows() {
        for b in 0..gram.cols() {
            if a != b {
                result = result.max(gram[(a, b)].norm());
            }
        }
    }
    Ok(result)
}

/// Largest |frequency - p| over the standard error, skipping degenerate p.
fn max_sigma(counts: &[u64], probabilities: &[f64], shots: u64) -> f64 {
    let mut result = 0.0f64;
    for (count, p) in counts.iter().zip(probabilities) {
        if *p <= 0.0 || *p >= 1.0 {
            continue;
        }
        let freq = *count as f64 / shots as f64;
        let se = (p * (1.0 - p) / shots as f64).sqrt();
        result = result.max((freq - p).abs() / se);
    }
    result
}

fn row(label: &str, value: impl Display) {
    println!("  {label:<28} {value}");
}

fn fixed6(x: f64) -> String {
    format!("{x:.6}")
}

fn sci(x: f64) -> String {
    format!("{x:.3e}")
}

fn float_list(values: &[f64]) -> String {
    let inner: Vec<String> = values.iter().map(|v| fixed6(*v)).collect();
    format!("[{}]", inner.join(", "))
}

fn int_list(values: &[u64]) -> String {
    let inner: Vec<String> = values.iter().map(|v| v.to_string()).collect();
    format!("[{}]", inner.join(", "))
}
