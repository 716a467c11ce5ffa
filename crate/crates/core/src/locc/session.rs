//! Two-party LOCC session over explicitly owned registers. Every quantum
//! operation is checked against register ownership and every classical
//! read against what has actually been sent, so a protocol that cheats
//! fails loudly instead of silently succeeding.

use crate::error::{Error, Result};
use crate::linalg::{apply_on_subsystems, ComplexMatrix, StateVector, SubsystemId};
use crate::locc::transcript::{EventKind, Transcript};
use crate::locc::{Mode, Party};
use crate::tol::TOL;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;
use serde_json::json;
use std::collections::BTreeMap;

/// One term of the session state: probability of reaching it, the
/// post-operation state, and the measurement record along this path.
#[derive(Debug, Clone)]
pub struct Branch {
    pub probability: f64,
    pub state: StateVector,
    pub outcomes: BTreeMap<String, u64>,
}

#[derive(Debug, Clone)]
struct LabelInfo {
    bit_width: u64,
    known_alice: bool,
    known_bob: bool,
}

impl LabelInfo {
    fn known_to(&self, party: Party) -> bool {
        match party {
            Party::Alice => self.known_alice,
            Party::Bob => self.known_bob,
        }
    }

    fn mark_known(&mut self, party: Party) {
        match party {
            Party::Alice => self.known_alice = true,
            Party::Bob => self.known_bob = true,
        }
    }
}

/// A register block with its owners: one party's local registers or a
/// shared entangled resource spanning both parties.
#[derive(Debug, Clone)]
pub struct RegisterGroup {
    pub state: StateVector,
    pub owners: Vec<(SubsystemId, Party)>,
}

impl RegisterGroup {
    pub fn new(state: StateVector, owners: &[(&str, Party)]) -> Self {
        RegisterGroup {
            state,
            owners: owners
                .iter()
                .map(|&(name, party)| (SubsystemId::from(name), party))
                .collect(),
        }
    }
}

#[derive(Debug)]
pub struct Session {
    layout: Vec<(SubsystemId, usize)>,
    owners: BTreeMap<SubsystemId, Party>,
    branches: Vec<Branch>,
    labels: BTreeMap<String, LabelInfo>,
    transcript: Transcript,
    mode: Mode,
    rng: Option<ChaCha8Rng>,
}

impl Session {
    /// Starts a session on `state` with each subsystem assigned to a party.
    /// Every subsystem in the state must appear in `owners` exactly once.
    pub fn new(state: StateVector, owners: &[(&str, Party)], mode: Mode) -> Result<Self> {
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > TOL.normalization {
            return Err(Error::NotNormalized(norm));
        }
        if let Some((id, dim)) = state.layout().iter().find(|(_, d)| *d < 2) {
            return Err(Error::InvalidArgument(format!(
                "register `{id}` has dimension {dim}; session registers need dimension >= 2"
            )));
        }
        let mut map = BTreeMap::new();
        for &(name, party) in owners {
            let id = SubsystemId::from(name);
            if state.position_of(&id).is_none() {
                return Err(Error::UnknownSubsystem(name.to_string()));
            }
            if map.insert(id, party).is_some() {
                return Err(Error::DuplicateSubsystem(name.to_string()));
            }
        }
        for (id, _) in state.layout() {
            if !map.contains_key(id) {
                return Err(Error::InvalidArgument(format!(
                    "subsystem `{id}` has no assigned owner"
                )));
            }
        }
        let rng = match mode {
            Mode::Sampled(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
            Mode::ExactBranches => None,
        };
        Ok(Session {
            layout: state.layout().to_vec(),
            owners: map,
            branches: vec![Branch {
                probability: 1.0,
                state,
                outcomes: BTreeMap::new(),
            }],
            labels: BTreeMap::new(),
            transcript: Transcript::default(),
            mode,
            rng,
        })
    }

    /// Starts a session from register groups, tensored in declared order.
    pub fn from_groups(groups: Vec<RegisterGroup>, mode: Mode) -> Result<Self> {
        let mut iter = groups.into_iter();
        let first = iter
            .next()
            .ok_or_else(|| Error::InvalidArgument("no register groups given".into()))?;
        let mut state = first.state;
        let mut owners = first.owners;
        for group in iter {
            state = state.tensor(&group.state)?;
            owners.extend(group.owners);
        }
        let flat: Vec<(&str, Party)> = owners.iter().map(|(id, p)| (id.as_str(), *p)).collect();
        Session::new(state, &flat, mode)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(|b| b.probability).sum()
    }

    /// Ownership check; returns the resolved target ids.
    fn check_targets(&self, party: Party, targets: &[&str]) -> Result<Vec<SubsystemId>> {
        if targets.is_empty() {
            return Err(Error::InvalidArgument("no target subsystems given".into()));
        }
        let mut ids = Vec::with_capacity(targets.len());
        for &name in targets {
            let id = SubsystemId::from(name);
            let owner = self
                .owners
                .get(&id)
                .copied()
                .ok_or_else(|| Error::UnknownSubsystem(name.to_string()))?;
            if owner != party {
                return Err(Error::LocalityViolation {
                    party,
                    subsystem: name.to_string(),
                    owner,
                });
            }
            ids.push(id);
        }
        Ok(ids)
    }

    fn target_dim(&self, targets: &[&str]) -> usize {
        targets
            .iter()
            .map(|&name| {
                let id = SubsystemId::from(name);
                self.layout
                    .iter()
                    .find(|(sub, _)| *sub == id)
                    .map(|(_, dim)| *dim)
                    .unwrap_or(1)
            })
            .product()
    }

    /// Combined target index of every flat amplitude index, targets in the
    /// given order, first target slowest.
    fn target_index_map(&self, targets: &[&str]) -> Vec<u64> {
        let dims: Vec<usize> = self.layout.iter().map(|(_, d)| *d).collect();
        let mut strides = vec![1usize; dims.len()];
        for i in (0..dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        let positions: Vec<usize> = targets
            .iter()
            .map(|&name| {
                let id = SubsystemId::from(name);
                self.layout.iter().position(|(sub, _)| *sub == id).unwrap()
            })
            .collect();
        let total: usize = dims.iter().product();
        (0..total)
            .map(|flat| {
                positions.iter().fold(0u64, |acc, &p| {
                    acc * dims[p] as u64 + ((flat / strides[p]) % dims[p]) as u64
                })
            })
            .collect()
    }

    /// Applies `unitary` to `targets`, which must all belong to `party`.
    pub fn local_unitary(
        &mut self,
        party: Party,
        targets: &[&str],
        unitary: &ComplexMatrix,
        name: &str,
    ) -> Result<()> {
        let ids = self.check_targets(party, targets)?;
        unitary.require_unitary(TOL.reconstruction)?;
        for branch in &mut self.branches {
            branch.state = apply_on_subsystems(unitary, &branch.state, &ids)?;
        }
        self.transcript.push(
            party,
            EventKind::Unitary,
            json!({ "name": name, "targets": targets }),
            None,
        );
        Ok(())
    }

    /// Applies `choose(v)` to `targets` where `v` is the recorded outcome of
    /// `label`, which `party` must know (measured it or received it).
    pub fn local_unitary_conditioned(
        &mut self,
        party: Party,
        targets: &[&str],
        label: &str,
        name: &str,
        choose: impl Fn(u64) -> ComplexMatrix,
    ) -> Result<()> {
        let ids = self.check_targets(party, targets)?;
        let info = self
            .labels
            .get(label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
        if !info.known_to(party) {
            return Err(Error::ClassicalLocalityViolation {
                party,
                label: label.to_string(),
            });
        }
        let per_branch = self.branches.len() > 1;
        for i in 0..self.branches.len() {
            let outcome = *self.branches[i]
                .outcomes
                .get(label)
                .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
            let unitary = choose(outcome);
            unitary.require_unitary(TOL.reconstruction)?;
            self.branches[i].state = apply_on_subsystems(&unitary, &self.branches[i].state, &ids)?;
            self.transcript.push(
                party,
                EventKind::ConditionalUnitary,
                json!({ "name": name, "targets": targets, "label": label, "outcome": outcome }),
                if per_branch { Some(i) } else { None },
            );
        }
        Ok(())
    }

    /// Measures `targets` in the orthonormal basis given by the columns of
    /// `basis`. Sampled mode collapses to one outcome and returns it; exact
    /// mode fans every branch over all outcomes and returns None.
    pub fn local_measure(
        &mut self,
        party: Party,
        targets: &[&str],
        basis: &ComplexMatrix,
        label: &str,
    ) -> Result<Option<u64>> {
        let ids = self.check_targets(party, targets)?;
        if self.labels.contains_key(label) {
            return Err(Error::DuplicateLabel(label.to_string()));
        }
        let dim = self.target_dim(targets);
        if basis.rows() != dim || basis.cols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "measurement basis must be {dim}x{dim} for the chosen targets"
            )));
        }
        if let Err(Error::NotUnitary(defect)) = basis.require_unitary(TOL.reconstruction) {
            return Err(Error::NotOrthonormalBasis(defect));
        }
        let rotate_in = basis.dagger();
        let index_of = self.target_index_map(targets);
        let bit_width = u64::from(64 - (dim as u64 - 1).leading_zeros()).max(1);

        let sampled = match self.mode {
            Mode::Sampled(_) => {
                let branch = &mut self.branches[0];
                let rotated = apply_on_subsystems(&rotate_in, &branch.state, &ids)?;
                let probs = outcome_probabilities(&rotated, &index_of, dim);
                let rng = self.rng.as_mut().expect("sampled mode carries an rng");
                let outcome = sample_outcome(&probs, rng.gen::<f64>());
                let collapsed = collapse(&rotated, &index_of, outcome)?;
                branch.state = apply_on_subsystems(basis, &collapsed, &ids)?;
                branch.outcomes.insert(label.to_string(), outcome);
                Some(outcome)
            }
            Mode::ExactBranches => {
                let mut next = Vec::new();
                for branch in &self.branches {
                    let rotated = apply_on_subsystems(&rotate_in, &branch.state, &ids)?;
                    let probs = outcome_probabilities(&rotated, &index_of, dim);
                    for (outcome, &p) in probs.iter().enumerate() {
                        if p < TOL.branch_prune {
                            continue;
                        }
                        let collapsed = collapse(&rotated, &index_of, outcome as u64)?;
                        let mut outcomes = branch.outcomes.clone();
                        outcomes.insert(label.to_string(), outcome as u64);
                        next.push(Branch {
                            probability: branch.probability * p,
                            state: apply_on_subsystems(basis, &collapsed, &ids)?,
                            outcomes,
                        });
                    }
                }
                self.branches = next;
                None
            }
        };

        self.labels.insert(
            label.to_string(),
            {
                let mut info = LabelInfo {
                    bit_width,
                    known_alice: false,
                    known_bob: false,
                };
                info.mark_known(party);
                info
            },
        );
        let payload = match sampled {
            Some(v) => json!({ "label": label, "targets": targets, "outcomes": dim, "outcome": v }),
            None => json!({ "label": label, "targets": targets, "outcomes": dim }),
        };
        self.transcript.push(party, EventKind::Measure, payload, None);
        Ok(sampled)
    }

    /// Sends the recorded outcome of `label` to the other party, charging
    /// ceil(log2(outcomes)) classical bits to the sender's direction.
    pub fn send_outcome(&mut self, from: Party, label: &str) -> Result<()> {
        let info = self
            .labels
            .get_mut(label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
        if !info.known_to(from) {
            return Err(Error::ClassicalLocalityViolation {
                party: from,
                label: label.to_string(),
            });
        }
        let to = from.other();
        info.mark_known(to);
        let bits = info.bit_width;
        self.transcript.count_bits(from, bits);
        self.transcript.push(
            from,
            EventKind::Send,
            json!({ "label": label, "to": to, "bits": bits }),
            None,
        );
        Ok(())
    }

    /// Outcome distribution of `label` across branches; exact mode only.
    pub fn branch_distribution(&self, label: &str) -> Result<BTreeMap<u64, f64>> {
        if !matches!(self.mode, Mode::ExactBranches) {
            return Err(Error::WrongMode("exact-branches"));
        }
        if !self.labels.contains_key(label) {
            return Err(Error::UnknownLabel(label.to_string()));
        }
        let mut dist = BTreeMap::new();
        for branch in &self.branches {
            if let Some(&v) = branch.outcomes.get(label) {
                *dist.entry(v).or_insert(0.0) += branch.probability;
            }
        }
        Ok(dist)
    }
}

fn outcome_probabilities(rotated: &StateVector, index_of: &[u64], dim: usize) -> Vec<f64> {
    let mut probs = vec![0.0f64; dim];
    for (flat, amp) in rotated.amplitudes().iter().enumerate() {
        probs[index_of[flat] as usize] += amp.norm_sqr();
    }
    probs
}

fn sample_outcome(probs: &[f64], draw: f64) -> u64 {
    let mut cumulative = 0.0;
    let mut last_positive = 0u64;
    for (k, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last_positive = k as u64;
        }
        cumulative += p;
        if draw < cumulative {
            return k as u64;
        }
    }
    last_positive
}

fn collapse(rotated: &StateVector, index_of: &[u64], outcome: u64) -> Result<StateVector> {
    let amplitudes: Vec<_> = rotated
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(flat, &amp)| {
            if index_of[flat] == outcome {
                amp
            } else {
                num_complex::Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    StateVector::new(amplitudes, rotated.layout().to_vec())?.normalized()
}
