//! Run configuration shared by the config file and the command line.
//!
//! The file is TOML with the same keys as the CLI flags:
//!
//! ```toml
//! policy = "all"          # N | BH | BS | CH | CS | all
//! groups = 15
//! participants = 4
//! duration = 900.0        # seconds
//! window = 300.0          # seconds
//! gamma1 = 0.5
//! gamma2 = 0.5
//! preset = "dominant-one" # or "two-cliques"
//! seed = 1
//! out = "results"
//! overhead = 8.0          # seconds per moderator response
//! max_repeats = 3
//! ```
//!
//! Every key is optional. Flags override file values; missing values fall
//! back to the defaults above.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{ExperimentSpec, GroupTemplate, DEFAULT_GROUPS};
use crate::dialogue::DEFAULT_WINDOW_S;
use crate::dominance::DominanceWeights;
use crate::error::{Error, Result};
use crate::policy::{PolicyKind, DEFAULT_MAX_REPEATS};
use crate::sim::{Preset, DEFAULT_ROBOT_OVERHEAD_S, DEFAULT_SESSION_S};

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_PARTICIPANTS: usize = 4;

/// `all` or a single policy code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum PolicySelection {
    All,
    One(PolicyKind),
}

impl PolicySelection {
    pub fn policies(self) -> Vec<PolicyKind> {
        match self {
            PolicySelection::All => PolicyKind::ALL.to_vec(),
            PolicySelection::One(p) => vec![p],
        }
    }
}

impl FromStr for PolicySelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("all") {
            Ok(PolicySelection::All)
        } else {
            s.parse().map(PolicySelection::One)
        }
    }
}

impl TryFrom<String> for PolicySelection {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<PolicySelection> for String {
    fn from(p: PolicySelection) -> String {
        p.to_string()
    }
}

impl fmt::Display for PolicySelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicySelection::All => f.write_str("all"),
            PolicySelection::One(p) => write!(f, "{p}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub policy: Option<PolicySelection>,
    pub groups: Option<usize>,
    pub participants: Option<usize>,
    pub duration: Option<f64>,
    pub window: Option<f64>,
    pub gamma1: Option<f64>,
    pub gamma2: Option<f64>,
    pub preset: Option<Preset>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub overhead: Option<f64>,
    pub max_repeats: Option<u32>,
}

/// A fully specified run.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedRun {
    pub spec: ExperimentSpec,
    pub preset: Preset,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.message().to_string(),
        })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Values set in `overrides` win.
    pub fn merged(self, overrides: RunConfig) -> RunConfig {
        RunConfig {
            policy: overrides.policy.or(self.policy),
            groups: overrides.groups.or(self.groups),
            participants: overrides.participants.or(self.participants),
            duration: overrides.duration.or(self.duration),
            window: overrides.window.or(self.window),
            gamma1: overrides.gamma1.or(self.gamma1),
            gamma2: overrides.gamma2.or(self.gamma2),
            preset: overrides.preset.or(self.preset),
            seed: overrides.seed.or(self.seed),
            out: overrides.out.or(self.out),
            overhead: overrides.overhead.or(self.overhead),
            max_repeats: overrides.max_repeats.or(self.max_repeats),
        }
    }

    pub fn resolve(&self) -> Result<ResolvedRun> {
        let participants = self.participants.unwrap_or(DEFAULT_PARTICIPANTS);
        if participants < 2 {
            return Err(Error::Config(format!(
                "need at least 2 participants, got {participants}"
            )));
        }
        let groups = self.groups.unwrap_or(DEFAULT_GROUPS);
        if groups == 0 {
            return Err(Error::Config("groups must be at least 1".into()));
        }
        let preset = self.preset.unwrap_or(Preset::DominantOne);
        let weights = DominanceWeights::new(self.gamma1.unwrap_or(0.5), self.gamma2.unwrap_or(0.5))?;
        let template = GroupTemplate {
            profiles: preset.profiles(participants),
            session_duration_s: self.duration.unwrap_or(DEFAULT_SESSION_S),
            window_s: self.window.unwrap_or(DEFAULT_WINDOW_S),
            weights,
            robot_overhead_s: self.overhead.unwrap_or(DEFAULT_ROBOT_OVERHEAD_S),
            max_repeats: self.max_repeats.unwrap_or(DEFAULT_MAX_REPEATS),
        };
        // Surface config errors before any simulation runs.
        template.group(PolicyKind::Neutral, 0).validate()?;
        Ok(ResolvedRun {
            spec: ExperimentSpec {
                policies: self.policy.unwrap_or(PolicySelection::All).policies(),
                groups_per_policy: groups,
                base_seed: self.seed.unwrap_or(DEFAULT_SEED),
                template,
            },
            preset,
            out: self.out.clone().unwrap_or_else(|| PathBuf::from("results")),
        })
    }
}
