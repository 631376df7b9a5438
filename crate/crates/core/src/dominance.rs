//! Participation shares, the dominance score `D_i = γ1·T_i + γ2·W_i`, the
//! least-dominant speaker selection and the max-min balance error.

use rand::Rng;

use crate::dialogue::{MovingWindow, SpeakerId};
use crate::error::{Error, Result};

/// Fractions of window speaking time (`time`) and words (`words`) per
/// speaker. Each vector sums to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticipationShares {
    pub time: Vec<f64>,
    pub words: Vec<f64>,
}

/// Relative weight of speaking time and word count. Always normalized so
/// `gamma1 + gamma2 == 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominanceWeights {
    gamma1: f64,
    gamma2: f64,
}

impl DominanceWeights {
    pub fn new(gamma1: f64, gamma2: f64) -> Result<Self> {
        let valid = |g: f64| g.is_finite() && g >= 0.0;
        if !valid(gamma1) || !valid(gamma2) || gamma1 + gamma2 <= 0.0 {
            return Err(Error::Config(format!(
                "dominance weights must be non-negative with a positive sum, got ({gamma1}, {gamma2})"
            )));
        }
        let sum = gamma1 + gamma2;
        Ok(Self {
            gamma1: gamma1 / sum,
            gamma2: gamma2 / sum,
        })
    }

    pub fn gamma1(&self) -> f64 {
        self.gamma1
    }

    pub fn gamma2(&self) -> f64 {
        self.gamma2
    }
}

impl Default for DominanceWeights {
    fn default() -> Self {
        Self {
            gamma1: 0.5,
            gamma2: 0.5,
        }
    }
}

/// Absolute per-speaker window totals: (seconds, words).
pub fn window_totals(window: &MovingWindow, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut secs = vec![0.0; n];
    let mut words = vec![0.0; n];
    for turn in window.turns() {
        if let Some(s) = secs.get_mut(turn.speaker.0) {
            *s += turn.duration_s;
            words[turn.speaker.0] += f64::from(turn.words);
        }
    }
    (secs, words)
}

fn normalize_or_uniform(values: Vec<f64>) -> Vec<f64> {
    let total: f64 = values.iter().sum();
    if total > 0.0 {
        values.into_iter().map(|v| v / total).collect()
    } else {
        let n = values.len();
        vec![1.0 / n as f64; n]
    }
}

/// Speakers missing from the window get zero share. An empty window (or a
/// window without words, for the word share) falls back to uniform `1/n`.
pub fn participation_shares(window: &MovingWindow, n: usize) -> ParticipationShares {
    let (secs, words) = window_totals(window, n);
    ParticipationShares {
        time: normalize_or_uniform(secs),
        words: normalize_or_uniform(words),
    }
}

pub fn dominance_scores(shares: &ParticipationShares, weights: DominanceWeights) -> Vec<f64> {
    shares
        .time
        .iter()
        .zip(&shares.words)
        .map(|(t, w)| weights.gamma1 * t + weights.gamma2 * w)
        .collect()
}

/// Indices attaining the minimum score.
pub fn minimizers(scores: &[f64]) -> Vec<usize> {
    let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
    scores
        .iter()
        .enumerate()
        .filter(|(_, &d)| d == min)
        .map(|(i, _)| i)
        .collect()
}

/// The least dominant speaker; ties are broken uniformly at random.
pub fn select_submissive<R: Rng + ?Sized>(scores: &[f64], rng: &mut R) -> Result<SpeakerId> {
    if scores.is_empty() {
        return Err(Error::Empty("dominance scores"));
    }
    let candidates = minimizers(scores);
    let pick = candidates[rng.random_range(0..candidates.len())];
    Ok(SpeakerId(pick))
}

/// Spread between the highest and lowest value; 0 for an empty slice.
pub fn range_error(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    hi - lo
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dialogue::Turn;
    use crate::rng::seeded;

    fn window(turns: &[(usize, f64, u32)]) -> MovingWindow {
        let mut w = MovingWindow::new(10_000.0).unwrap();
        for (i, &(s, d, words)) in turns.iter().enumerate() {
            w.push(Turn::new(i as u64, s, d, words)).unwrap();
        }
        w
    }

    fn assert_close(a: &[f64], b: &[f64]) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < 1e-12, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn shares_from_window() {
        let w = window(&[(0, 30.0, 60), (1, 10.0, 20), (2, 10.0, 10)]);
        let s = participation_shares(&w, 4);
        assert_close(&s.time, &[0.6, 0.2, 0.2, 0.0]);
        assert_close(&s.words, &[2.0 / 3.0, 2.0 / 9.0, 1.0 / 9.0, 0.0]);
    }

    #[test]
    fn empty_window_is_uniform() {
        let w = MovingWindow::new(60.0).unwrap();
        let s = participation_shares(&w, 4);
        assert_eq!(s.time, vec![0.25; 4]);
        assert_eq!(s.words, vec![0.25; 4]);
    }

    #[test]
    fn wordless_window_falls_back_for_words_only() {
        let w = window(&[(0, 3.0, 0), (1, 1.0, 0)]);
        let s = participation_shares(&w, 2);
        assert_close(&s.time, &[0.75, 0.25]);
        assert_eq!(s.words, vec![0.5, 0.5]);
    }

    #[test]
    fn symmetric_window_is_uniform() {
        let w = window(&[(0, 10.0, 10), (1, 10.0, 10), (2, 10.0, 10), (3, 10.0, 10)]);
        let s = participation_shares(&w, 4);
        assert_close(&s.time, &[0.25; 4]);
        assert_close(&s.words, &[0.25; 4]);
    }

    #[test]
    fn scores_with_equal_weights() {
        let shares = ParticipationShares {
            time: vec![0.4, 0.3, 0.2, 0.1],
            words: vec![0.5, 0.25, 0.15, 0.10],
        };
        let d = dominance_scores(&shares, DominanceWeights::new(0.5, 0.5).unwrap());
        assert_close(&d, &[0.45, 0.275, 0.175, 0.10]);
        assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert_eq!(select_submissive(&d, &mut seeded(0)).unwrap(), SpeakerId(3));
    }

    #[test]
    fn time_only_weights_reproduce_time_share() {
        let shares = ParticipationShares {
            time: vec![0.4, 0.3, 0.2, 0.1],
            words: vec![0.1, 0.2, 0.3, 0.4],
        };
        let d = dominance_scores(&shares, DominanceWeights::new(1.0, 0.0).unwrap());
        assert_eq!(d, shares.time);
        let uniform = ParticipationShares {
            time: vec![0.25; 4],
            words: vec![0.25; 4],
        };
        assert_eq!(dominance_scores(&uniform, DominanceWeights::default()), vec![0.25; 4]);
    }

    #[test]
    fn weights_are_normalized() {
        let w = DominanceWeights::new(3.0, 1.0).unwrap();
        assert_eq!((w.gamma1(), w.gamma2()), (0.75, 0.25));
        assert!(DominanceWeights::new(0.0, 0.0).is_err());
        assert!(DominanceWeights::new(-1.0, 2.0).is_err());
        assert!(DominanceWeights::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn submissive_on_empty_scores_fails() {
        assert!(select_submissive(&[], &mut seeded(0)).is_err());
    }

    #[test]
    fn uniform_tie_break_is_seed_reproducible() {
        let d = [0.25; 4];
        let a = select_submissive(&d, &mut seeded(11)).unwrap();
        let b = select_submissive(&d, &mut seeded(11)).unwrap();
        assert_eq!(a, b);
        let mut seen = [false; 4];
        for seed in 0..200 {
            seen[select_submissive(&d, &mut seeded(seed)).unwrap().0] = true;
        }
        assert_eq!(seen, [true; 4]);
    }

    #[test]
    fn tie_frequencies_are_even() {
        let d = [0.2, 0.1, 0.1, 0.6];
        let mut counts = [0usize; 4];
        for seed in 0..1000 {
            counts[select_submissive(&d, &mut seeded(seed)).unwrap().0] += 1;
        }
        assert_eq!(counts[0] + counts[3], 0);
        for c in &counts[1..3] {
            let f = *c as f64 / 1000.0;
            assert!((f - 0.5).abs() <= 0.05, "{counts:?}");
        }
    }

    #[test]
    fn range_error_examples() {
        assert_eq!(range_error(&[40.0, 10.0, 5.0, 5.0]), 35.0);
        assert_eq!(range_error(&[7.0; 4]), 0.0);
        assert_eq!(range_error(&[66.0, 10.0, 4.0, 0.0]), 66.0);
        assert_eq!(range_error(&[]), 0.0);
    }
}
