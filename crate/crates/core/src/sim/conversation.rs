use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{sample_next_speaker, sample_turn, AgentProfile};
use crate::dialogue::{DialogueState, Recorded, SpeakerId, Turn, DEFAULT_WINDOW_S};
use crate::dominance::{range_error, window_totals, DominanceWeights};
use crate::error::{Error, Result};
use crate::graph::{louvain, transition_graph};
use crate::policy::{Decision, Directive, Moderator, PolicyKind, DEFAULT_MAX_REPEATS};
use crate::rng::{self, SimRng, Stream};

pub const DEFAULT_SESSION_S: f64 = 900.0;
pub const DEFAULT_ROBOT_OVERHEAD_S: f64 = 8.0;

#[derive(Debug, Clone, PartialEq)]
pub struct GroupConfig {
    pub profiles: Vec<AgentProfile>,
    pub session_duration_s: f64,
    pub window_s: f64,
    pub policy: PolicyKind,
    pub weights: DominanceWeights,
    pub seed: u64,
    /// Session time consumed by each moderator response.
    pub robot_overhead_s: f64,
    pub max_repeats: u32,
}

impl GroupConfig {
    pub fn new(profiles: Vec<AgentProfile>, policy: PolicyKind, seed: u64) -> Self {
        Self {
            profiles,
            session_duration_s: DEFAULT_SESSION_S,
            window_s: DEFAULT_WINDOW_S,
            policy,
            weights: DominanceWeights::default(),
            seed,
            robot_overhead_s: DEFAULT_ROBOT_OVERHEAD_S,
            max_repeats: DEFAULT_MAX_REPEATS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.profiles.len();
        if n < 2 {
            return Err(Error::Config(format!("need at least 2 participants, got {n}")));
        }
        for (i, p) in self.profiles.iter().enumerate() {
            p.validate(i, n)?;
        }
        if !(self.session_duration_s.is_finite() && self.session_duration_s > 0.0) {
            return Err(Error::Config(format!(
                "session duration must be positive, got {}",
                self.session_duration_s
            )));
        }
        if !(self.window_s.is_finite() && self.window_s > 0.0) {
            return Err(Error::Config(format!("window must be positive, got {}", self.window_s)));
        }
        if !(self.robot_overhead_s.is_finite() && self.robot_overhead_s >= 0.0) {
            return Err(Error::Config(format!(
                "robot overhead must be non-negative, got {}",
                self.robot_overhead_s
            )));
        }
        if self.max_repeats == 0 {
            return Err(Error::Config("max_repeats must be positive".into()));
        }
        Ok(())
    }
}

/// One logged human turn with the metrics measured right after it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnRecord {
    pub t_index: u64,
    pub speaker: usize,
    pub duration_s: f64,
    pub words: u32,
    pub time_err_s: f64,
    pub word_err: f64,
    pub n_comm: usize,
    /// Speaker the preceding directive asked for; `None` on an open floor.
    pub addressee: Option<usize>,
    pub directive: String,
}

impl TurnRecord {
    pub fn turn(&self) -> Turn {
        Turn::new(self.t_index, self.speaker, self.duration_s, self.words)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TurnLog {
    pub records: Vec<TurnRecord>,
    /// Session clock at the end, including moderator overhead.
    pub elapsed_s: f64,
}

impl TurnLog {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn turns(&self) -> Vec<Turn> {
        self.records.iter().map(TurnRecord::turn).collect()
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }

    /// Per-turn means of (time error, word error, community count).
    pub fn means(&self) -> (f64, f64, f64) {
        if self.records.is_empty() {
            return (0.0, 0.0, 0.0);
        }
        let n = self.records.len() as f64;
        let sum = |f: fn(&TurnRecord) -> f64| self.records.iter().map(f).sum::<f64>() / n;
        (
            sum(|r| r.time_err_s),
            sum(|r| r.word_err),
            sum(|r| r.n_comm as f64),
        )
    }
}

/// Everything that happened in one simulated turn.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub decision: Decision,
    pub speaker: SpeakerId,
    pub recorded: Recorded,
    pub reaction: Directive,
    pub record: TurnRecord,
}

/// A running simulated conversation.
pub struct Conversation {
    config: GroupConfig,
    state: DialogueState,
    moderator: Moderator,
    agents: SimRng,
    policy_rng: SimRng,
    metrics_rng: SimRng,
    clock_s: f64,
    log: TurnLog,
}

impl Conversation {
    pub fn new(config: GroupConfig) -> Result<Self> {
        config.validate()?;
        let seed = config.seed;
        Ok(Self {
            state: DialogueState::new(config.profiles.len(), config.window_s)?,
            moderator: Moderator::new(config.policy, config.weights, config.max_repeats)?,
            agents: rng::stream(seed, Stream::Agents),
            policy_rng: rng::stream(seed, Stream::Policy),
            metrics_rng: rng::stream(seed, Stream::Metrics),
            clock_s: 0.0,
            log: TurnLog::default(),
            config,
        })
    }

    pub fn state(&self) -> &DialogueState {
        &self.state
    }

    pub fn clock_s(&self) -> f64 {
        self.clock_s
    }

    pub fn is_over(&self) -> bool {
        self.clock_s >= self.config.session_duration_s
    }

    /// Runs one moderator prompt and human turn. `None` once the session
    /// time is used up.
    pub fn step(&mut self) -> Result<Option<Step>> {
        if self.is_over() {
            return Ok(None);
        }
        let decision = self.moderator.prompt(&self.state, &mut self.policy_rng);
        let directive = decision.directive;
        let speaker = sample_next_speaker(
            &self.config.profiles,
            self.state.last_speaker(),
            &directive,
            &mut self.agents,
        );
        let (duration_s, words) = sample_turn(&self.config.profiles[speaker.0], &mut self.agents);
        let t_index = self.log.records.len() as u64;
        let recorded = self.state.record_turn(Turn {
            index: t_index,
            speaker,
            duration_s,
            words,
        })?;

        let n = self.state.n_speakers();
        let (secs, word_totals) = window_totals(self.state.window(), n);
        let graph = transition_graph(self.state.transition_counts())?;
        let n_comm = louvain(&graph, &mut self.metrics_rng).community_count();

        let reaction = self.moderator.react(speaker);
        // One moderator response per human turn, whatever its kind.
        self.clock_s += duration_s + self.config.robot_overhead_s;

        let record = TurnRecord {
            t_index,
            speaker: speaker.0,
            duration_s,
            words,
            time_err_s: range_error(&secs),
            word_err: range_error(&word_totals),
            n_comm,
            addressee: directive.addressee().map(SpeakerId::index),
            directive: directive.name().to_string(),
        };
        self.log.records.push(record.clone());
        self.log.elapsed_s = self.clock_s;
        Ok(Some(Step {
            decision,
            speaker,
            recorded,
            reaction,
            record,
        }))
    }

    pub fn run(mut self) -> Result<TurnLog> {
        while self.step()?.is_some() {}
        Ok(self.log)
    }
}

pub fn run_conversation(config: GroupConfig) -> Result<TurnLog> {
    Conversation::new(config)?.run()
}
