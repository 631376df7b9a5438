//! Agent-based group conversations.
//!
//! Simulated participants stand in for human groups: each agent has a
//! propensity to take the floor, a probability of answering when addressed,
//! a turn-length distribution, a speaking rate and an affinity for following
//! particular speakers.

mod conversation;

pub use conversation::{
    run_conversation, Conversation, GroupConfig, Step, TurnLog, TurnRecord, DEFAULT_ROBOT_OVERHEAD_S,
    DEFAULT_SESSION_S,
};

use std::fmt;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::Gamma;
use serde::{Deserialize, Serialize};

use crate::dialogue::SpeakerId;
use crate::error::{Error, Result};
use crate::policy::Directive;

/// Turn durations are clamped to this range (seconds).
pub const MIN_TURN_S: f64 = 0.5;
pub const MAX_TURN_S: f64 = 60.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentProfile {
    /// Relative propensity to self-select on an open floor.
    pub extroversion: f64,
    /// Probability of answering when directly addressed.
    pub compliance: f64,
    pub mean_turn_s: f64,
    /// Gamma shape of the turn-length distribution.
    pub duration_shape: f64,
    pub words_per_second: f64,
    /// Tendency to speak right after each other participant; zero for self.
    pub affinity: Vec<f64>,
}

impl AgentProfile {
    pub fn typical(n: usize) -> Self {
        Self {
            extroversion: 1.0,
            compliance: 0.8,
            mean_turn_s: 8.0,
            duration_shape: 2.0,
            words_per_second: 2.2,
            affinity: vec![0.0; n],
        }
    }

    pub fn validate(&self, me: usize, n: usize) -> Result<()> {
        let bad = |what: &str, v: f64| Error::Config(format!("agent {me}: invalid {what} {v}"));
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.extroversion) {
            return Err(bad("extroversion", self.extroversion));
        }
        if !(0.0..=1.0).contains(&self.compliance) {
            return Err(bad("compliance", self.compliance));
        }
        if !positive(self.mean_turn_s) {
            return Err(bad("mean turn duration", self.mean_turn_s));
        }
        if !positive(self.duration_shape) {
            return Err(bad("duration shape", self.duration_shape));
        }
        if !positive(self.words_per_second) {
            return Err(bad("words per second", self.words_per_second));
        }
        if self.affinity.len() != n {
            return Err(Error::Config(format!(
                "agent {me}: affinity has {} entries for {n} speakers",
                self.affinity.len()
            )));
        }
        if let Some(&a) = self.affinity.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
            return Err(bad("affinity", a));
        }
        if self.affinity[me] != 0.0 {
            return Err(bad("self affinity", self.affinity[me]));
        }
        Ok(())
    }
}

/// Named group archetypes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// One extrovert who talks four times as readily and twice as long.
    DominantOne,
    /// A chatty pair and a shy pair, each preferring to follow its own member.
    TwoCliques,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::DominantOne => "dominant-one",
            Preset::TwoCliques => "two-cliques",
        }
    }

    /// Profiles for `n` participants. `two-cliques` splits the group into a
    /// chatty first half and a shy second half.
    pub fn profiles(self, n: usize) -> Vec<AgentProfile> {
        match self {
            Preset::DominantOne => (0..n)
                .map(|i| {
                    let mut p = AgentProfile::typical(n);
                    if i == 0 {
                        p.extroversion = 4.0;
                        p.mean_turn_s = 16.0;
                    }
                    p
                })
                .collect(),
            Preset::TwoCliques => {
                let half = n.div_ceil(2);
                let clique = |i: usize| i < half;
                (0..n)
                    .map(|i| {
                        let mut p = AgentProfile::typical(n);
                        p.extroversion = if clique(i) { 3.0 } else { 0.05 };
                        p.affinity = (0..n)
                            .map(|j| if j != i && clique(j) == clique(i) { 6.0 } else { 0.0 })
                            .collect();
                        p
                    })
                    .collect()
            }
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "dominant-one" => Ok(Preset::DominantOne),
            "two-cliques" => Ok(Preset::TwoCliques),
            other => Err(Error::Config(format!(
                "unknown preset `{other}` (expected dominant-one or two-cliques)"
            ))),
        }
    }
}

fn floor_weight(profile: &AgentProfile, last: Option<SpeakerId>) -> f64 {
    let affinity = last.map_or(0.0, |l| profile.affinity[l.0]);
    profile.extroversion * (1.0 + affinity)
}

/// Who talks next.
///
/// An addressed speaker answers with probability equal to their compliance;
/// otherwise someone else self-selects with weight
/// `extroversion · (1 + affinity to the last speaker)`. An open floor uses
/// the same weights over everyone.
pub fn sample_next_speaker<R: Rng + ?Sized>(
    profiles: &[AgentProfile],
    last: Option<SpeakerId>,
    directive: &Directive,
    rng: &mut R,
) -> SpeakerId {
    let excluded = match directive.addressee() {
        Some(target) => {
            if rng.random_bool(profiles[target.0].compliance) {
                return target;
            }
            Some(target)
        }
        None => None,
    };
    let weights: Vec<f64> = profiles
        .iter()
        .enumerate()
        .map(|(i, p)| {
            if Some(SpeakerId(i)) == excluded {
                0.0
            } else {
                floor_weight(p, last)
            }
        })
        .collect();
    match WeightedIndex::new(&weights) {
        Ok(dist) => SpeakerId(dist.sample(rng)),
        // Single-agent groups are rejected by config validation; this only
        // covers an addressed agent being the sole positive weight.
        Err(_) => excluded.unwrap_or(SpeakerId(0)),
    }
}

/// Gamma-distributed duration with the profile's mean, clamped to
/// `[MIN_TURN_S, MAX_TURN_S]`; words follow the speaking rate (at least one).
pub fn sample_turn<R: Rng + ?Sized>(profile: &AgentProfile, rng: &mut R) -> (f64, u32) {
    let shape = profile.duration_shape;
    let gamma = Gamma::new(shape, profile.mean_turn_s / shape).expect("validated profile");
    let duration = gamma.sample(rng).clamp(MIN_TURN_S, MAX_TURN_S);
    (duration, words_for(duration, profile.words_per_second))
}

pub fn words_for(duration_s: f64, words_per_second: f64) -> u32 {
    ((duration_s * words_per_second).round() as u32).max(1)
}
