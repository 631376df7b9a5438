//! Moderation engine for multi-party conversations.
//!
//! The crate tracks dialogue statistics for a group of human speakers,
//! chooses whom a moderator should address next under one of five
//! policies, and simulates whole group conversations so the policies can
//! be compared statistically.
//!
//! - [`dialogue`]: turns, the time-bounded moving window and the
//!   speaker-transition statistics.
//! - [`dominance`]: participation shares, dominance scores and per-turn
//!   max-min balance errors.
//! - [`graph`]: transition graphs, modularity and Louvain community
//!   detection, plus an exhaustive oracle for small graphs.
//! - [`policy`]: the moderator state machine (`N`, `BH`, `BS`, `CH`, `CS`).
//! - [`sim`]: agent-based conversation generator.
//! - [`harness`]: batch experiments, Mann-Whitney U tests and CSV/JSONL
//!   output.

pub mod dialogue;
pub mod dominance;
mod error;
pub mod graph;
pub mod harness;
pub mod policy;
pub mod rng;
pub mod sim;

pub use dialogue::{DialogueState, MovingWindow, SpeakerId, Turn};
pub use dominance::{DominanceWeights, ParticipationShares};
pub use error::{Error, Result};
pub use graph::{Partition, WeightedGraph};
pub use policy::{Directive, ModeratorState, PolicyKind};
