//! Two-sided Mann-Whitney U test.
//!
//! Small tie-free samples (`|a| + |b| <= 12`) get the exact null
//! distribution; everything else uses the normal approximation with tie and
//! continuity corrections.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Largest combined sample size that uses the exact distribution.
pub const EXACT_LIMIT: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PMethod {
    Exact,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MannWhitney {
    /// `min(u_a, u_b)`.
    pub u: f64,
    pub u_a: f64,
    pub u_b: f64,
    /// Two-sided p-value.
    pub p: f64,
    pub method: PMethod,
}

/// Ranks starting at 1, with tied values sharing the mean of their ranks.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // Positions start..end hold ranks start+1..=end.
        let rank = (start + end + 1) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = rank;
        }
        start = end;
    }
    ranks
}

/// Sizes of the groups of tied values in `values`.
fn tie_groups(values: &[f64]) -> Vec<usize> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
        .chunk_by(|a, b| a == b)
        .map(<[f64]>::len)
        .filter(|&t| t > 1)
        .collect()
}

pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MannWhitney> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("Mann-Whitney sample"));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(Error::Config("Mann-Whitney samples contain NaN".into()));
    }
    let (n1, n2) = (a.len(), b.len());
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = midranks(&pooled);
    let rank_sum_a: f64 = ranks[..n1].iter().sum();
    let u_a = rank_sum_a - (n1 * (n1 + 1)) as f64 / 2.0;
    let u_b = (n1 * n2) as f64 - u_a;
    let u = u_a.min(u_b);

    let ties = tie_groups(&pooled);
    let (p, method) = if ties.is_empty() && n1 + n2 <= EXACT_LIMIT {
        (exact_p_value(u.round() as usize, n1, n2), PMethod::Exact)
    } else {
        (normal_p_value(u_a, n1, n2, &ties), PMethod::Normal)
    };
    Ok(MannWhitney { u, u_a, u_b, p, method })
}

/// Number of arrangements giving each U value, for U in `0..=n1·n2`.
///
/// Uses the recurrence on whether the largest pooled observation belongs to
/// the first sample: `f(m, n, k) = f(m-1, n, k-n) + f(m, n-1, k)`.
pub fn exact_u_counts(n1: usize, n2: usize) -> Vec<u64> {
    let max_u = n1 * n2;
    // table[m][n] holds the distribution for sizes (m, n).
    let mut table: Vec<Vec<Vec<u64>>> = vec![vec![Vec::new(); n2 + 1]; n1 + 1];
    for m in 0..=n1 {
        for n in 0..=n2 {
            let mut dist = vec![0u64; m * n + 1];
            if m == 0 || n == 0 {
                dist[0] = 1;
            } else {
                for (k, slot) in dist.iter_mut().enumerate() {
                    let with_first = if k >= n { table[m - 1][n].get(k - n).copied().unwrap_or(0) } else { 0 };
                    let with_second = table[m][n - 1].get(k).copied().unwrap_or(0);
                    *slot = with_first + with_second;
                }
            }
            table[m][n] = dist;
        }
    }
    let mut out = std::mem::take(&mut table[n1][n2]);
    out.resize(max_u + 1, 0);
    out
}

/// Exact two-sided p-value for the smaller U statistic `u_min`:
/// `min(1, 2·P(U <= u_min))`.
pub fn exact_p_value(u_min: usize, n1: usize, n2: usize) -> f64 {
    let counts = exact_u_counts(n1, n2);
    let total: u64 = counts.iter().sum();
    let tail: u64 = counts.iter().take(u_min + 1).sum();
    ((2 * tail) as f64 / total as f64).min(1.0)
}

/// Normal approximation with tie-corrected variance and a 0.5 continuity
/// correction. `ties` lists the sizes of tied groups in the pooled sample.
pub fn normal_p_value(u_a: f64, n1: usize, n2: usize, ties: &[usize]) -> f64 {
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let n = n1f + n2f;
    let mean = n1f * n2f / 2.0;
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum();
    let variance = if n > 1.0 {
        n1f * n2f / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)))
    } else {
        0.0
    };
    if variance <= 0.0 {
        return 1.0;
    }
    let z = ((u_a - mean).abs() - 0.5).max(0.0) / variance.sqrt();
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    (2.0 * std_normal.cdf(-z)).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midranks_average_ties() {
        assert_eq!(midranks(&[1.0, 2.0, 2.0, 4.0, 5.0]), vec![1.0, 2.5, 2.5, 4.0, 5.0]);
        assert_eq!(midranks(&[3.0, 1.0, 2.0]), vec![3.0, 1.0, 2.0]);
        assert_eq!(midranks(&[7.0, 7.0, 7.0]), vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn exact_small_cases() {
        // C(4,2) = 6 arrangements, U = 0 only for one: p = 2/6.
        let r = mann_whitney_u(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert_eq!(r.u, 0.0);
        assert_eq!(r.method, PMethod::Exact);
        assert!((r.p - 2.0 / 6.0).abs() < 1e-15);

        // C(6,3) = 20 arrangements: p = 2/20.
        let r = mann_whitney_u(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert_eq!(r.u, 0.0);
        assert!((r.p - 0.1).abs() < 1e-15);
    }

    #[test]
    fn identical_samples() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let r = mann_whitney_u(&a, &a).unwrap();
        assert_eq!(r.u, 8.0);
        assert_eq!(r.method, PMethod::Normal);
        assert!((r.p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn u_values_sum_to_product() {
        let r = mann_whitney_u(&[1.5, 9.0, 3.0, 3.0], &[2.0, 3.0, 8.0]).unwrap();
        assert_eq!(r.u_a + r.u_b, 12.0);
    }

    #[test]
    fn all_tied_gives_p_one() {
        let r = mann_whitney_u(&[5.0, 5.0], &[5.0, 5.0, 5.0]).unwrap();
        assert_eq!(r.p, 1.0);
    }

    #[test]
    fn empty_or_nan_rejected() {
        assert!(matches!(mann_whitney_u(&[], &[1.0]), Err(Error::Empty(_))));
        assert!(mann_whitney_u(&[1.0], &[]).is_err());
        assert!(mann_whitney_u(&[f64::NAN], &[1.0]).is_err());
    }

    #[test]
    fn exact_counts_are_binomial() {
        for (m, n, total) in [(2, 2, 6u64), (3, 3, 20), (4, 6, 210), (6, 6, 924)] {
            let c = exact_u_counts(m, n);
            assert_eq!(c.len(), m * n + 1);
            assert_eq!(c.iter().sum::<u64>(), total);
            // Symmetric around m·n/2.
            let rev: Vec<u64> = c.iter().rev().copied().collect();
            assert_eq!(c, rev);
        }
    }

    #[test]
    fn separated_large_samples_are_significant() {
        let a: Vec<f64> = (0..15).map(f64::from).collect();
        let b: Vec<f64> = (100..115).map(f64::from).collect();
        let r = mann_whitney_u(&a, &b).unwrap();
        assert_eq!(r.u, 0.0);
        assert!(r.p < 1e-4);
    }
}
