//! Two-sided Wilcoxon rank-sum (Mann-Whitney) test.

use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};

/// Default significance level.
pub const ALPHA: f64 = 0.05;

/// Combined sample size at or below which the exact null distribution is used.
pub const EXACT_LIMIT: usize = 12;

/// Direction of a significant difference, from the first sample's side
/// (lower values are better).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Better,
    Worse,
    Indifferent,
}

impl Decision {
    /// Table mark: `+`, `-` or `=`.
    pub fn mark(self) -> char {
        match self {
            Decision::Better => '+',
            Decision::Worse => '-',
            Decision::Indifferent => '=',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankSumResult {
    /// Rank sum of the first sample (midranks for ties).
    pub statistic: f64,
    pub p_value: f64,
    pub decision: Decision,
}

/// Midranks of the pooled sample; returns ranks and the tie groups' sizes.
fn midranks(pooled: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..pooled.len()).collect();
    idx.sort_by(|&a, &b| pooled[a].total_cmp(&pooled[b]));
    let mut ranks = vec![0.0; pooled.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && pooled[idx[j + 1]] == pooled[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        if j > i {
            ties.push(j - i + 1);
        }
        i = j + 1;
    }
    (ranks, ties)
}

/// Exact two-sided p-value by enumerating every assignment of the pooled
/// (mid)ranks to the first sample.
pub fn exact_p_value(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, _) = midranks(&pooled);
    let n1 = a.len();
    let n = pooled.len();
    let w: f64 = ranks[..n1].iter().sum();
    let mean = n1 as f64 * (n + 1) as f64 / 2.0;
    let observed = (w - mean).abs();

    let mut extreme = 0usize;
    let mut total = 0usize;
    let mut chosen = Vec::with_capacity(n1);
    fn walk(
        ranks: &[f64],
        start: usize,
        left: usize,
        chosen: &mut Vec<f64>,
        mean: f64,
        observed: f64,
        extreme: &mut usize,
        total: &mut usize,
    ) {
        if left == 0 {
            let s: f64 = chosen.iter().sum();
            *total += 1;
            if (s - mean).abs() >= observed - 1e-9 {
                *extreme += 1;
            }
            return;
        }
        for i in start..=ranks.len() - left {
            chosen.push(ranks[i]);
            walk(ranks, i + 1, left - 1, chosen, mean, observed, extreme, total);
            chosen.pop();
        }
    }
    walk(&ranks, 0, n1, &mut chosen, mean, observed, &mut extreme, &mut total);
    extreme as f64 / total as f64
}

/// Normal approximation with tie and continuity corrections.
pub fn normal_p_value(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, ties) = midranks(&pooled);
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let n = n1 + n2;
    let w: f64 = ranks[..a.len()].iter().sum();
    let mean = n1 * (n + 1.0) / 2.0;
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / (n * (n - 1.0));
    let var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term);
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((w - mean).abs() - 0.5).max(0.0) / var.sqrt();
    libm::erfc(z / std::f64::consts::SQRT_2).min(1.0)
}

/// Two-sided rank-sum test of `a` against `b` at significance `alpha`.
///
/// Uses the exact distribution when `|a| + |b| <= 12` and the normal
/// approximation otherwise. Both samples need at least 3 values.
pub fn wilcoxon_rank_sum(a: &[f64], b: &[f64], alpha: f64) -> Result<RankSumResult> {
    if a.len() < 3 || b.len() < 3 {
        return Err(contract(format!(
            "rank-sum needs at least 3 values per sample, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(contract("rank-sum samples must not contain NaN"));
    }
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, _) = midranks(&pooled);
    let statistic: f64 = ranks[..a.len()].iter().sum();

    if pooled.iter().all(|v| *v == pooled[0]) {
        return Ok(RankSumResult {
            statistic,
            p_value: 1.0,
            decision: Decision::Indifferent,
        });
    }
    let p_value = if pooled.len() <= EXACT_LIMIT {
        exact_p_value(a, b)
    } else {
        normal_p_value(a, b)
    }
    .clamp(0.0, 1.0);

    let mean = a.len() as f64 * (pooled.len() + 1) as f64 / 2.0;
    let decision = if p_value >= alpha {
        Decision::Indifferent
    } else if statistic < mean {
        Decision::Better
    } else {
        Decision::Worse
    };
    Ok(RankSumResult {
        statistic,
        p_value,
        decision,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_fixture() {
        let r = wilcoxon_rank_sum(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], ALPHA).unwrap();
        assert_eq!(r.statistic, 6.0);
        assert!((r.p_value - 0.1).abs() < 1e-12);
        assert_eq!(r.decision, Decision::Indifferent);
    }

    #[test]
    fn identical_samples_are_indifferent() {
        let a = [2.0, 2.0, 2.0, 2.0];
        let r = wilcoxon_rank_sum(&a, &a, ALPHA).unwrap();
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.decision, Decision::Indifferent);
        let b = [1.0, 5.0, 3.0, 9.0];
        let r = wilcoxon_rank_sum(&b, &b, ALPHA).unwrap();
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn separated_samples() {
        let a: Vec<f64> = (0..20).map(|i| i as f64 * 0.01).collect();
        let b: Vec<f64> = (0..20).map(|i| 100.0 + i as f64 * 0.01).collect();
        let r = wilcoxon_rank_sum(&a, &b, ALPHA).unwrap();
        assert!(r.p_value < 0.001);
        assert_eq!(r.decision, Decision::Better);
        // W = 210, mean 410, var = 20*20*41/12, z = 199.5 / sqrt(1366.67)
        let z: f64 = 199.5 / (400.0f64 * 41.0 / 12.0).sqrt();
        assert!((r.p_value - libm::erfc(z / std::f64::consts::SQRT_2)).abs() < 1e-15);
        assert_eq!(wilcoxon_rank_sum(&b, &a, ALPHA).unwrap().decision, Decision::Worse);
    }

    #[test]
    fn midranks_handle_ties() {
        let (r, t) = midranks(&[3.0, 1.0, 3.0, 2.0]);
        assert_eq!(r, vec![3.5, 1.0, 3.5, 2.0]);
        assert_eq!(t, vec![2]);
    }

    #[test]
    fn small_samples_rejected() {
        assert!(wilcoxon_rank_sum(&[1.0, 2.0], &[3.0, 4.0, 5.0], ALPHA).is_err());
    }
}
