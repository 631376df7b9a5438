//! Batch experiments: many simulated groups per policy, per-conversation
//! summaries, a results table and pairwise Mann-Whitney comparisons.

mod config;
pub mod mann_whitney;
mod report;

pub use config::{PolicySelection, ResolvedRun, RunConfig};
pub use mann_whitney::{mann_whitney_u, MannWhitney, PMethod};
pub use report::summarize_to_files;

use crate::dialogue::DEFAULT_WINDOW_S;
use crate::dominance::DominanceWeights;
use crate::error::{Error, Result};
use crate::policy::{PolicyKind, DEFAULT_MAX_REPEATS};
use crate::rng::mix_seed;
use crate::sim::{
    run_conversation, AgentProfile, GroupConfig, Preset, TurnLog, DEFAULT_ROBOT_OVERHEAD_S,
    DEFAULT_SESSION_S,
};

pub const DEFAULT_GROUPS: usize = 15;

/// Group settings shared by every conversation of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupTemplate {
    pub profiles: Vec<AgentProfile>,
    pub session_duration_s: f64,
    pub window_s: f64,
    pub weights: DominanceWeights,
    pub robot_overhead_s: f64,
    pub max_repeats: u32,
}

impl GroupTemplate {
    pub fn from_preset(preset: Preset, participants: usize) -> Self {
        Self {
            profiles: preset.profiles(participants),
            session_duration_s: DEFAULT_SESSION_S,
            window_s: DEFAULT_WINDOW_S,
            weights: DominanceWeights::default(),
            robot_overhead_s: DEFAULT_ROBOT_OVERHEAD_S,
            max_repeats: DEFAULT_MAX_REPEATS,
        }
    }

    pub fn group(&self, policy: PolicyKind, seed: u64) -> GroupConfig {
        GroupConfig {
            profiles: self.profiles.clone(),
            session_duration_s: self.session_duration_s,
            window_s: self.window_s,
            policy,
            weights: self.weights,
            seed,
            robot_overhead_s: self.robot_overhead_s,
            max_repeats: self.max_repeats,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub policies: Vec<PolicyKind>,
    pub groups_per_policy: usize,
    pub base_seed: u64,
    pub template: GroupTemplate,
}

impl ExperimentSpec {
    pub fn new(template: GroupTemplate, base_seed: u64) -> Self {
        Self {
            policies: PolicyKind::ALL.to_vec(),
            groups_per_policy: DEFAULT_GROUPS,
            base_seed,
            template,
        }
    }
}

/// Seed of the `index`-th group run under `policy`.
pub fn derive_seed(base_seed: u64, policy: PolicyKind, index: usize) -> u64 {
    mix_seed(&[base_seed, policy.ordinal(), index as u64])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    TimeError,
    WordError,
    Communities,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::TimeError, Metric::WordError, Metric::Communities];

    pub fn name(self) -> &'static str {
        match self {
            Metric::TimeError => "time_err_s",
            Metric::WordError => "word_err",
            Metric::Communities => "n_comm",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConversationResult {
    pub policy: PolicyKind,
    pub group: usize,
    pub seed: u64,
    /// Per-turn means over the conversation.
    pub time_err_s: f64,
    pub word_err: f64,
    pub n_comm: f64,
    pub log: TurnLog,
}

impl ConversationResult {
    pub fn metric(&self, metric: Metric) -> f64 {
        match metric {
            Metric::TimeError => self.time_err_s,
            Metric::WordError => self.word_err,
            Metric::Communities => self.n_comm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanStd {
    pub mean: f64,
    /// Sample standard deviation; 0 for fewer than two values.
    pub std: f64,
}

impl MeanStd {
    /// Order-independent: values are sorted before summation.
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self { mean: 0.0, std: 0.0 };
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        let mean = sorted.iter().sum::<f64>() / n;
        let std = if sorted.len() > 1 {
            let mut dev: Vec<f64> = sorted.iter().map(|v| (v - mean).powi(2)).collect();
            dev.sort_by(f64::total_cmp);
            (dev.iter().sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicySummary {
    pub policy: PolicyKind,
    pub groups: usize,
    pub time_err_s: MeanStd,
    pub word_err: MeanStd,
    pub n_comm: MeanStd,
}

impl PolicySummary {
    pub fn metric(&self, metric: Metric) -> MeanStd {
        match metric {
            Metric::TimeError => self.time_err_s,
            Metric::WordError => self.word_err,
            Metric::Communities => self.n_comm,
        }
    }
}

/// Mean ± std across conversations of each conversation's per-turn mean.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultsTable {
    pub rows: Vec<PolicySummary>,
}

impl ResultsTable {
    pub fn row(&self, policy: PolicyKind) -> Option<&PolicySummary> {
        self.rows.iter().find(|r| r.policy == policy)
    }
}

pub fn summarize(policies: &[PolicyKind], conversations: &[ConversationResult]) -> ResultsTable {
    let rows = policies
        .iter()
        .map(|&policy| {
            let of = |metric: Metric| {
                let values: Vec<f64> = conversations
                    .iter()
                    .filter(|c| c.policy == policy)
                    .map(|c| c.metric(metric))
                    .collect();
                MeanStd::of(&values)
            };
            PolicySummary {
                policy,
                groups: conversations.iter().filter(|c| c.policy == policy).count(),
                time_err_s: of(Metric::TimeError),
                word_err: of(Metric::WordError),
                n_comm: of(Metric::Communities),
            }
        })
        .collect();
    ResultsTable { rows }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseTest {
    pub a: PolicyKind,
    pub b: PolicyKind,
    pub metric: Metric,
    pub test: MannWhitney,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentResults {
    pub policies: Vec<PolicyKind>,
    pub table: ResultsTable,
    pub conversations: Vec<ConversationResult>,
}

impl ExperimentResults {
    /// Per-conversation values of `metric` under `policy`.
    pub fn samples(&self, policy: PolicyKind, metric: Metric) -> Vec<f64> {
        self.conversations
            .iter()
            .filter(|c| c.policy == policy)
            .map(|c| c.metric(metric))
            .collect()
    }

    pub fn compare(&self, a: PolicyKind, b: PolicyKind, metric: Metric) -> Result<MannWhitney> {
        mann_whitney_u(&self.samples(a, metric), &self.samples(b, metric))
    }

    /// Every unordered policy pair on every metric.
    pub fn pairwise_tests(&self) -> Result<Vec<PairwiseTest>> {
        let mut out = Vec::new();
        for (i, &a) in self.policies.iter().enumerate() {
            for &b in &self.policies[i + 1..] {
                for metric in Metric::ALL {
                    out.push(PairwiseTest {
                        a,
                        b,
                        metric,
                        test: self.compare(a, b, metric)?,
                    });
                }
            }
        }
        Ok(out)
    }
}

pub fn run_experiments(spec: &ExperimentSpec) -> Result<ExperimentResults> {
    if spec.groups_per_policy == 0 {
        return Err(Error::Config("groups_per_policy must be at least 1".into()));
    }
    if spec.policies.is_empty() {
        return Err(Error::Config("no policies selected".into()));
    }
    let mut conversations = Vec::with_capacity(spec.policies.len() * spec.groups_per_policy);
    for &policy in &spec.policies {
        for group in 0..spec.groups_per_policy {
            let seed = derive_seed(spec.base_seed, policy, group);
            let log = run_conversation(spec.template.group(policy, seed))?;
            let (time_err_s, word_err, n_comm) = log.means();
            conversations.push(ConversationResult {
                policy,
                group,
                seed,
                time_err_s,
                word_err,
                n_comm,
                log,
            });
        }
    }
    Ok(ExperimentResults {
        policies: spec.policies.clone(),
        table: summarize(&spec.policies, &conversations),
        conversations,
    })
}
