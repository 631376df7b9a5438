//! Dialogue-state bookkeeping: turns, the moving window and the
//! speaker-transition statistics updated after every human turn.
//!
//! Only human participants are tracked. The moderator's own utterances never
//! enter the state.

use std::collections::VecDeque;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default moving-window capacity in seconds.
pub const DEFAULT_WINDOW_S: f64 = 300.0;

/// Index of a human participant, in `[0, n_speakers)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpeakerId(pub usize);

impl SpeakerId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for SpeakerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S{}", self.0)
    }
}

/// One speaking event.
///
/// The serialized field names (`t_index`, `speaker`, `duration_s`, `words`)
/// are the turn-log JSONL format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    #[serde(rename = "t_index")]
    pub index: u64,
    pub speaker: SpeakerId,
    pub duration_s: f64,
    pub words: u32,
}

impl Turn {
    pub fn new(index: u64, speaker: usize, duration_s: f64, words: u32) -> Self {
        Self {
            index,
            speaker: SpeakerId(speaker),
            duration_s,
            words,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(Error::InvalidTurn(format!(
                "turn {} has non-positive duration {}",
                self.index, self.duration_s
            )));
        }
        Ok(())
    }
}

/// FIFO of the most recent turns whose total speaking time is capped at
/// `capacity_s`.
///
/// A single turn longer than the capacity is kept on its own, so the window
/// is never emptied by a push.
#[derive(Debug, Clone, PartialEq)]
pub struct MovingWindow {
    capacity_s: f64,
    turns: VecDeque<Turn>,
}

impl MovingWindow {
    pub fn new(capacity_s: f64) -> Result<Self> {
        if !(capacity_s.is_finite() && capacity_s > 0.0) {
            return Err(Error::Config(format!(
                "window capacity must be positive, got {capacity_s}"
            )));
        }
        Ok(Self {
            capacity_s,
            turns: VecDeque::new(),
        })
    }

    pub fn capacity_s(&self) -> f64 {
        self.capacity_s
    }

    pub fn len(&self) -> usize {
        self.turns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.turns.is_empty()
    }

    /// Turns, oldest first.
    pub fn turns(&self) -> impl ExactSizeIterator<Item = &Turn> + DoubleEndedIterator {
        self.turns.iter()
    }

    pub fn last(&self) -> Option<&Turn> {
        self.turns.back()
    }

    pub fn total_duration_s(&self) -> f64 {
        self.turns.iter().map(|t| t.duration_s).sum()
    }

    pub fn total_words(&self) -> u64 {
        self.turns.iter().map(|t| u64::from(t.words)).sum()
    }

    /// Appends `turn` and evicts from the front while the window is over
    /// capacity and holds more than one turn. Returns the evicted turns in
    /// eviction order.
    pub fn push(&mut self, turn: Turn) -> Result<Vec<Turn>> {
        turn.validate()?;
        self.turns.push_back(turn);
        Ok(self.evict())
    }

    /// Folds a continuation of the newest turn into it (same speaker talking
    /// again) and re-applies the capacity bound.
    pub(crate) fn extend_last(&mut self, duration_s: f64, words: u32) -> Vec<Turn> {
        if let Some(last) = self.turns.back_mut() {
            last.duration_s += duration_s;
            last.words = last.words.saturating_add(words);
        }
        self.evict()
    }

    fn evict(&mut self) -> Vec<Turn> {
        let mut evicted = Vec::new();
        while self.turns.len() > 1 && self.total_duration_s() > self.capacity_s {
            evicted.extend(self.turns.pop_front());
        }
        evicted
    }
}

/// What [`DialogueState::record_turn`] did with an incoming turn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recorded {
    /// A new turn; carries the transition it created, if any.
    New { transition: Option<(SpeakerId, SpeakerId)> },
    /// Same speaker as the previous turn: folded into it.
    Merged,
}

/// Per-conversation speaker statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct DialogueState {
    n_speakers: usize,
    transition_counts: Vec<Vec<u64>>,
    turns_per_speaker: Vec<u64>,
    window: MovingWindow,
    last_speaker: Option<SpeakerId>,
    last_index: Option<u64>,
}

impl DialogueState {
    pub fn new(n_speakers: usize, window_s: f64) -> Result<Self> {
        if n_speakers < 2 {
            return Err(Error::Config(format!(
                "a conversation needs at least 2 speakers, got {n_speakers}"
            )));
        }
        Ok(Self {
            n_speakers,
            transition_counts: vec![vec![0; n_speakers]; n_speakers],
            turns_per_speaker: vec![0; n_speakers],
            window: MovingWindow::new(window_s)?,
            last_speaker: None,
            last_index: None,
        })
    }

    pub fn n_speakers(&self) -> usize {
        self.n_speakers
    }

    /// Entry `[i][j]` counts how often speaker `j` spoke right after `i`.
    pub fn transition_counts(&self) -> &[Vec<u64>] {
        &self.transition_counts
    }

    pub fn turns_per_speaker(&self) -> &[u64] {
        &self.turns_per_speaker
    }

    /// Number of turns after merging same-speaker continuations.
    pub fn total_turns(&self) -> u64 {
        self.turns_per_speaker.iter().sum()
    }

    pub fn total_transitions(&self) -> u64 {
        self.transition_counts.iter().flatten().sum()
    }

    /// Empirical probability that each speaker takes a turn. All zeros
    /// before the first turn.
    pub fn prior_speak_prob(&self) -> Vec<f64> {
        let total = self.total_turns();
        if total == 0 {
            return vec![0.0; self.n_speakers];
        }
        self.turns_per_speaker
            .iter()
            .map(|&c| c as f64 / total as f64)
            .collect()
    }

    pub fn window(&self) -> &MovingWindow {
        &self.window
    }

    pub fn last_speaker(&self) -> Option<SpeakerId> {
        self.last_speaker
    }

    pub fn record_turn(&mut self, turn: Turn) -> Result<Recorded> {
        let speaker = turn.speaker;
        if speaker.0 >= self.n_speakers {
            return Err(Error::SpeakerOutOfRange {
                speaker: speaker.0,
                n_speakers: self.n_speakers,
            });
        }
        turn.validate()?;
        if let Some(prev) = self.last_index {
            if turn.index <= prev {
                return Err(Error::InvalidTurn(format!(
                    "turn index {} does not follow {}",
                    turn.index, prev
                )));
            }
        }
        self.last_index = Some(turn.index);

        // The newest window entry is always the last speaker's turn, unless it
        // was evicted, which cannot happen while it is the only entry.
        if self.last_speaker == Some(speaker) && !self.window.is_empty() {
            self.window.extend_last(turn.duration_s, turn.words);
            return Ok(Recorded::Merged);
        }

        let transition = self.last_speaker.map(|prev| {
            self.transition_counts[prev.0][speaker.0] += 1;
            (prev, speaker)
        });
        self.turns_per_speaker[speaker.0] += 1;
        self.last_speaker = Some(speaker);
        self.window.push(turn)?;
        Ok(Recorded::New { transition })
    }

    /// Replays a turn log into a fresh state.
    pub fn replay<'a>(
        n_speakers: usize,
        window_s: f64,
        turns: impl IntoIterator<Item = &'a Turn>,
    ) -> Result<Self> {
        let mut state = Self::new(n_speakers, window_s)?;
        for turn in turns {
            state.record_turn(turn.clone())?;
        }
        Ok(state)
    }
}

pub fn write_turns_jsonl<W: Write>(mut out: W, turns: &[Turn]) -> std::io::Result<()> {
    for turn in turns {
        serde_json::to_writer(&mut out, turn)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_turns_jsonl<R: BufRead>(input: R, path: &Path) -> Result<Vec<Turn>> {
    let mut turns = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let turn: Turn = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: format!("line {}: {e}", lineno + 1),
        })?;
        turns.push(turn);
    }
    Ok(turns)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn durations(w: &MovingWindow) -> Vec<(usize, f64)> {
        w.turns().map(|t| (t.speaker.0, t.duration_s)).collect()
    }

    #[test]
    fn push_evicts_oldest_first() {
        let mut w = MovingWindow::new(60.0).unwrap();
        w.push(Turn::new(0, 0, 30.0, 1)).unwrap();
        w.push(Turn::new(1, 1, 20.0, 1)).unwrap();
        let evicted = w.push(Turn::new(2, 2, 25.0, 1)).unwrap();
        assert_eq!(evicted.len(), 1);
        assert_eq!(evicted[0].speaker, SpeakerId(0));
        assert_eq!(durations(&w), vec![(1, 20.0), (2, 25.0)]);
        assert_eq!(w.total_duration_s(), 45.0);
    }

    #[test]
    fn oversized_turn_is_kept_alone() {
        let mut w = MovingWindow::new(60.0).unwrap();
        w.push(Turn::new(0, 0, 90.0, 100)).unwrap();
        assert_eq!(durations(&w), vec![(0, 90.0)]);

        w.push(Turn::new(1, 1, 10.0, 5)).unwrap();
        w.push(Turn::new(2, 2, 95.0, 5)).unwrap();
        assert_eq!(durations(&w), vec![(2, 95.0)]);
    }

    #[test]
    fn under_capacity_keeps_everything() {
        let mut w = MovingWindow::new(300.0).unwrap();
        for (i, d) in [40.0, 35.0, 25.0].into_iter().enumerate() {
            assert!(w.push(Turn::new(i as u64, i, d, 3)).unwrap().is_empty());
        }
        assert_eq!(durations(&w), vec![(0, 40.0), (1, 35.0), (2, 25.0)]);
    }

    #[test]
    fn rejects_non_positive_duration() {
        let mut w = MovingWindow::new(60.0).unwrap();
        assert!(matches!(
            w.push(Turn::new(0, 0, 0.0, 1)),
            Err(Error::InvalidTurn(_))
        ));
        assert!(matches!(
            w.push(Turn::new(0, 0, -2.0, 1)),
            Err(Error::InvalidTurn(_))
        ));
        assert!(w.is_empty());
    }

    #[test]
    fn record_turn_counts_and_priors() {
        let mut s = DialogueState::new(4, 300.0).unwrap();
        let r = s.record_turn(Turn::new(0, 0, 10.0, 20)).unwrap();
        assert_eq!(r, Recorded::New { transition: None });
        assert_eq!(s.turns_per_speaker(), &[1, 0, 0, 0]);
        assert_eq!(s.prior_speak_prob(), vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(s.total_transitions(), 0);

        s.record_turn(Turn::new(1, 1, 5.0, 8)).unwrap();
        assert_eq!(s.transition_counts()[0][1], 1);
        assert_eq!(s.prior_speak_prob(), vec![0.5, 0.5, 0.0, 0.0]);

        let r = s.record_turn(Turn::new(2, 1, 4.0, 6)).unwrap();
        assert_eq!(r, Recorded::Merged);
        assert_eq!(s.turns_per_speaker(), &[1, 1, 0, 0]);
        assert_eq!(s.total_transitions(), 1);
        let last = s.window().last().unwrap();
        assert_eq!((last.speaker, last.duration_s, last.words), (SpeakerId(1), 9.0, 14));
        assert_eq!(last.index, 1);
    }

    #[test]
    fn record_turn_rejects_bad_input() {
        let mut s = DialogueState::new(4, 300.0).unwrap();
        assert!(matches!(
            s.record_turn(Turn::new(0, 4, 1.0, 1)),
            Err(Error::SpeakerOutOfRange { speaker: 4, n_speakers: 4 })
        ));
        s.record_turn(Turn::new(3, 0, 1.0, 1)).unwrap();
        assert!(matches!(
            s.record_turn(Turn::new(3, 1, 1.0, 1)),
            Err(Error::InvalidTurn(_))
        ));
        assert!(DialogueState::new(1, 300.0).is_err());
    }

    /// Straightforward list-based model of the merge rule.
    fn reference_merge(log: &[(usize, f64, u32)]) -> (Vec<(usize, f64, u32)>, Vec<Vec<u64>>) {
        let mut merged: Vec<(usize, f64, u32)> = Vec::new();
        for &(s, d, w) in log {
            match merged.last_mut() {
                Some(last) if last.0 == s => {
                    last.1 += d;
                    last.2 += w;
                }
                _ => merged.push((s, d, w)),
            }
        }
        let mut counts = vec![vec![0u64; 4]; 4];
        for pair in merged.windows(2) {
            counts[pair[0].0][pair[1].0] += 1;
        }
        (merged, counts)
    }

    #[test]
    fn merge_rule_matches_reference_on_scripted_log() {
        let log = [
            (0, 10.0, 20),
            (1, 5.0, 8),
            (1, 4.0, 6),
            (2, 7.5, 12),
            (0, 3.0, 4),
            (0, 2.0, 3),
            (0, 1.0, 1),
            (3, 6.0, 10),
            (2, 2.5, 5),
            (2, 9.0, 18),
        ];
        let (expected_turns, expected_counts) = reference_merge(&log);

        let mut s = DialogueState::new(4, 1_000.0).unwrap();
        for (i, &(sp, d, w)) in log.iter().enumerate() {
            s.record_turn(Turn::new(i as u64, sp, d, w)).unwrap();
        }
        let got: Vec<_> = s
            .window()
            .turns()
            .map(|t| (t.speaker.0, t.duration_s, t.words))
            .collect();
        assert_eq!(got, expected_turns);
        assert_eq!(s.transition_counts(), expected_counts.as_slice());
        assert_eq!(s.total_turns(), expected_turns.len() as u64);
    }

    #[test]
    fn merge_reapplies_capacity() {
        let mut s = DialogueState::new(2, 30.0).unwrap();
        s.record_turn(Turn::new(0, 0, 10.0, 1)).unwrap();
        s.record_turn(Turn::new(1, 1, 15.0, 1)).unwrap();
        s.record_turn(Turn::new(2, 1, 10.0, 1)).unwrap();
        let got: Vec<_> = s.window().turns().map(|t| (t.speaker.0, t.duration_s)).collect();
        assert_eq!(got, vec![(1, 25.0)]);
    }

    #[test]
    fn jsonl_field_names() {
        let mut buf = Vec::new();
        write_turns_jsonl(&mut buf, &[Turn::new(3, 1, 4.5, 9)]).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "{\"t_index\":3,\"speaker\":1,\"duration_s\":4.5,\"words\":9}\n"
        );
        let back = read_turns_jsonl(buf.as_slice(), Path::new("mem")).unwrap();
        assert_eq!(back, vec![Turn::new(3, 1, 4.5, 9)]);
    }

    #[test]
    fn jsonl_parse_error_names_line() {
        let input = "{\"t_index\":0,\"speaker\":0,\"duration_s\":1.0,\"words\":1}\nnot json\n";
        let err = read_turns_jsonl(input.as_bytes(), Path::new("log.jsonl")).unwrap_err();
        assert!(err.to_string().contains("log.jsonl"));
        assert!(err.to_string().contains("line 2"));
    }
}
