use crate::error::Result;
use crate::mop::dominance::constrained_dominates_raw;
use crate::mop::Population;

/// Ranked partition of population indices into non-dominated fronts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrontPartition {
    /// `fronts[0]` is the first (best) front; indices ascend within a front.
    pub fronts: Vec<Vec<usize>>,
    /// Zero-based front index of each member.
    pub rank: Vec<usize>,
}

impl FrontPartition {
    pub fn len(&self) -> usize {
        self.rank.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rank.is_empty()
    }
}

/// Fast non-dominated sort with feasibility-first constrained dominance.
/// When every member is feasible this is plain Pareto dominance.
pub fn fast_nondominated_sort(pop: &Population) -> Result<FrontPartition> {
    pop.require_evaluated()?;
    let fs: Vec<&[f64]> = pop.iter().map(|s| s.f().unwrap()).collect();
    let cvs: Vec<f64> = pop.iter().map(|s| s.cv().unwrap()).collect();
    Ok(sort_raw(&fs, &cvs))
}

pub(crate) fn sort_raw(fs: &[&[f64]], cvs: &[f64]) -> FrontPartition {
    let n = fs.len();
    let mut dominated_by_count = vec![0usize; n];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if constrained_dominates_raw(fs[i], cvs[i], fs[j], cvs[j]) {
                dominates_list[i].push(j);
                dominated_by_count[j] += 1;
            } else if constrained_dominates_raw(fs[j], cvs[j], fs[i], cvs[i]) {
                dominates_list[j].push(i);
                dominated_by_count[i] += 1;
            }
        }
    }
    let mut rank = vec![0usize; n];
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by_count[i] == 0).collect();
    let mut level = 0;
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            rank[i] = level;
            for &j in &dominates_list[i] {
                dominated_by_count[j] -= 1;
                if dominated_by_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
        level += 1;
    }
    FrontPartition { fronts, rank }
}
