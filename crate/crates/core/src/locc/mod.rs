//! Local operations and classical communication between two parties, with
//! locality checks and a serializable transcript.

mod session;
mod transcript;

pub use session::{Branch, RegisterGroup, Session};
pub use transcript::{EventKind, Transcript, TranscriptEvent};

use serde::Serialize;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    Alice,
    Bob,
}

impl Party {
    pub fn other(self) -> Party {
        match self {
            Party::Alice => Party::Bob,
            Party::Bob => Party::Alice,
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Party::Alice => "alice",
            Party::Bob => "bob",
        })
    }
}

/// How measurements are resolved: one sampled trajectory, or the full
/// branch expansion with exact probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Sampled(u64),
    ExactBranches,
}
