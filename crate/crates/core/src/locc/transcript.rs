//! Ordered log of local operations and classical messages, with running
//! bit counts per direction.

use crate::error::Result;
use crate::locc::Party;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Unitary,
    ConditionalUnitary,
    Measure,
    Send,
}

/// One logged step. Field order is the serialized order and must stay
/// stable; reports are compared byte for byte.
#[derive(Debug, Clone, Serialize)]
pub struct TranscriptEvent {
    pub seq: usize,
    pub party: Party,
    pub kind: EventKind,
    pub payload: serde_json::Value,
    /// Branch the event applied to; None when it applied to every branch.
    pub branch: Option<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct Transcript {
    events: Vec<TranscriptEvent>,
    bits_alice_to_bob: u64,
    bits_bob_to_alice: u64,
}

impl Transcript {
    pub fn events(&self) -> &[TranscriptEvent] {
        &self.events
    }

    pub fn bits_alice_to_bob(&self) -> u64 {
        self.bits_alice_to_bob
    }

    pub fn bits_bob_to_alice(&self) -> u64 {
        self.bits_bob_to_alice
    }

    pub(crate) fn push(&mut self, party: Party, kind: EventKind, payload: serde_json::Value, branch: Option<usize>) {
        let seq = self.events.len();
        self.events.push(TranscriptEvent {
            seq,
            party,
            kind,
            payload,
            branch,
        });
    }

    pub(crate) fn count_bits(&mut self, from: Party, bits: u64) {
        match from {
            Party::Alice => self.bits_alice_to_bob += bits,
            Party::Bob => self.bits_bob_to_alice += bits,
        }
    }

    /// One JSON object per line, in event order.
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for event in &self.events {
            out.push_str(&serde_json::to_string(event)?);
            out.push('\n');
        }
        Ok(out)
    }
}
