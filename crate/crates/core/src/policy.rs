//! Moderator addressing policies and their reaction to whoever actually
//! answered.
//!
//! Balancing policies address the least dominant speaker in the moving
//! window. Community policies address a random speaker outside the last
//! speaker's community. On a wrong respondent the hard variants ignore the
//! answer and repeat the question; the soft variants reply and then
//! re-address the intended speaker.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dialogue::{DialogueState, SpeakerId};
use crate::dominance::{dominance_scores, participation_shares, select_submissive, DominanceWeights};
use crate::error::{Error, Result};
use crate::graph::{louvain, transition_graph, Partition};

pub const DEFAULT_MAX_REPEATS: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum PolicyKind {
    Neutral,
    BalancingHard,
    BalancingSoft,
    CommunityHard,
    CommunitySoft,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Neutral,
    Balancing,
    Community,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 5] = [
        PolicyKind::Neutral,
        PolicyKind::BalancingHard,
        PolicyKind::BalancingSoft,
        PolicyKind::CommunityHard,
        PolicyKind::CommunitySoft,
    ];

    pub fn code(self) -> &'static str {
        match self {
            PolicyKind::Neutral => "N",
            PolicyKind::BalancingHard => "BH",
            PolicyKind::BalancingSoft => "BS",
            PolicyKind::CommunityHard => "CH",
            PolicyKind::CommunitySoft => "CS",
        }
    }

    pub fn family(self) -> Family {
        match self {
            PolicyKind::Neutral => Family::Neutral,
            PolicyKind::BalancingHard | PolicyKind::BalancingSoft => Family::Balancing,
            PolicyKind::CommunityHard | PolicyKind::CommunitySoft => Family::Community,
        }
    }

    pub fn is_hard(self) -> bool {
        matches!(self, PolicyKind::BalancingHard | PolicyKind::CommunityHard)
    }

    /// Position in [`PolicyKind::ALL`]; used when deriving seeds.
    pub fn ordinal(self) -> u64 {
        PolicyKind::ALL.iter().position(|&p| p == self).unwrap() as u64
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyKind::ALL
            .into_iter()
            .find(|p| p.code().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::UnknownPolicy(s.to_string()))
    }
}

impl TryFrom<String> for PolicyKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<PolicyKind> for String {
    fn from(p: PolicyKind) -> String {
        p.code().to_string()
    }
}

/// What the moderator says next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Directive {
    /// No particular addressee.
    OpenFloor,
    Address(SpeakerId),
    /// Ignore the last answer and ask the intended speaker again.
    Repeat(SpeakerId),
    /// Answer the responder, then put the question back to the intended speaker.
    ReplyThenReaddress { responder: SpeakerId, intended: SpeakerId },
    Accept(SpeakerId),
}

impl Directive {
    /// The speaker the directive asks to talk next, if any.
    pub fn addressee(&self) -> Option<SpeakerId> {
        match *self {
            Directive::Address(s) | Directive::Repeat(s) => Some(s),
            Directive::ReplyThenReaddress { intended, .. } => Some(intended),
            Directive::OpenFloor | Directive::Accept(_) => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Directive::OpenFloor => "OpenFloor",
            Directive::Address(_) => "Address",
            Directive::Repeat(_) => "Repeat",
            Directive::ReplyThenReaddress { .. } => "ReplyThenReaddress",
            Directive::Accept(_) => "Accept",
        }
    }
}

/// Pending-target bookkeeping for one conversation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeratorState {
    pub intended: Option<SpeakerId>,
    pub repeat_count: u32,
    pub max_repeats: u32,
}

impl ModeratorState {
    pub fn new(max_repeats: u32) -> Result<Self> {
        if max_repeats == 0 {
            return Err(Error::Config("max_repeats must be positive".into()));
        }
        Ok(Self {
            intended: None,
            repeat_count: 0,
            max_repeats,
        })
    }

    /// Starts addressing `target` with a fresh repeat budget.
    pub fn address(self, target: SpeakerId) -> Self {
        Self {
            intended: Some(target),
            repeat_count: 0,
            ..self
        }
    }

    fn cleared(self) -> Self {
        Self {
            intended: None,
            repeat_count: 0,
            ..self
        }
    }
}

impl Default for ModeratorState {
    fn default() -> Self {
        Self {
            intended: None,
            repeat_count: 0,
            max_repeats: DEFAULT_MAX_REPEATS,
        }
    }
}

/// A decision with the evidence behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub directive: Directive,
    /// Dominance scores used by balancing policies.
    pub scores: Option<Vec<f64>>,
    /// Partition used by community policies.
    pub partition: Option<Partition>,
}

pub fn balancing_addressee<R: Rng + ?Sized>(
    state: &DialogueState,
    weights: DominanceWeights,
    rng: &mut R,
) -> (SpeakerId, Vec<f64>) {
    let shares = participation_shares(state.window(), state.n_speakers());
    let scores = dominance_scores(&shares, weights);
    let target = select_submissive(&scores, rng).expect("n_speakers >= 2");
    (target, scores)
}

/// Uniform pick among speakers outside `last`'s community. With a single
/// community, or no previous speaker, everyone except `last` is eligible.
pub fn community_addressee<R: Rng + ?Sized>(
    partition: &Partition,
    last: Option<SpeakerId>,
    rng: &mut R,
) -> SpeakerId {
    let n = partition.labels().len();
    let mut candidates: Vec<usize> = match last {
        Some(l) if partition.community_count() > 1 => {
            let own = partition.label(l.0);
            (0..n).filter(|&i| partition.label(i) != own).collect()
        }
        _ => Vec::new(),
    };
    if candidates.is_empty() {
        candidates = (0..n).filter(|&i| Some(SpeakerId(i)) != last).collect();
    }
    SpeakerId(candidates[rng.random_range(0..candidates.len())])
}

pub fn decide<R: Rng + ?Sized>(
    policy: PolicyKind,
    state: &DialogueState,
    weights: DominanceWeights,
    rng: &mut R,
) -> Decision {
    match policy.family() {
        Family::Neutral => Decision {
            directive: Directive::OpenFloor,
            scores: None,
            partition: None,
        },
        Family::Balancing => {
            let (target, scores) = balancing_addressee(state, weights, rng);
            Decision {
                directive: Directive::Address(target),
                scores: Some(scores),
                partition: None,
            }
        }
        Family::Community => {
            let graph = transition_graph(state.transition_counts())
                .expect("dialogue state keeps a square zero-diagonal matrix");
            let partition = louvain(&graph, rng);
            let target = community_addressee(&partition, state.last_speaker(), rng);
            Decision {
                directive: Directive::Address(target),
                scores: None,
                partition: Some(partition),
            }
        }
    }
}

pub fn next_addressee<R: Rng + ?Sized>(
    policy: PolicyKind,
    state: &DialogueState,
    weights: DominanceWeights,
    rng: &mut R,
) -> Directive {
    decide(policy, state, weights, rng).directive
}

/// Reaction to a turn by `actual`.
pub fn on_turn(
    policy: PolicyKind,
    state: ModeratorState,
    actual: SpeakerId,
) -> (Directive, ModeratorState) {
    let intended = match state.intended {
        Some(i) if policy.family() != Family::Neutral => i,
        _ => return (Directive::Accept(actual), state.cleared()),
    };
    if actual == intended {
        return (Directive::Accept(actual), state.cleared());
    }
    if state.repeat_count + 1 > state.max_repeats {
        return (Directive::Accept(actual), state.cleared());
    }
    let next = ModeratorState {
        repeat_count: state.repeat_count + 1,
        ..state
    };
    let directive = if policy.is_hard() {
        Directive::Repeat(intended)
    } else {
        Directive::ReplyThenReaddress {
            responder: actual,
            intended,
        }
    };
    (directive, next)
}

/// Drives one conversation: fresh decisions after an accepted answer,
/// re-addressing while a target is pending.
#[derive(Debug, Clone)]
pub struct Moderator {
    policy: PolicyKind,
    weights: DominanceWeights,
    state: ModeratorState,
    pending: Option<Directive>,
}

impl Moderator {
    pub fn new(policy: PolicyKind, weights: DominanceWeights, max_repeats: u32) -> Result<Self> {
        Ok(Self {
            policy,
            weights,
            state: ModeratorState::new(max_repeats)?,
            pending: None,
        })
    }

    pub fn policy(&self) -> PolicyKind {
        self.policy
    }

    pub fn state(&self) -> ModeratorState {
        self.state
    }

    /// The directive preceding the next human turn.
    pub fn prompt<R: Rng + ?Sized>(&mut self, dialogue: &DialogueState, rng: &mut R) -> Decision {
        if let Some(directive) = self.pending {
            return Decision {
                directive,
                scores: None,
                partition: None,
            };
        }
        let decision = decide(self.policy, dialogue, self.weights, rng);
        if let Directive::Address(target) = decision.directive {
            self.state = self.state.address(target);
        }
        decision
    }

    /// Reacts to the turn just taken by `actual`.
    pub fn react(&mut self, actual: SpeakerId) -> Directive {
        let (directive, state) = on_turn(self.policy, self.state, actual);
        self.state = state;
        self.pending = match directive {
            Directive::Repeat(_) | Directive::ReplyThenReaddress { .. } => Some(directive),
            _ => None,
        };
        directive
    }
}
