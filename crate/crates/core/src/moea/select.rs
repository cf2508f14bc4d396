use std::cmp::Ordering;

use super::crowding::crowding_raw;
use super::sort::sort_raw;
use crate::error::{contract, Result};
use crate::mop::Population;

/// Outcome of NSGA-II environmental selection, with the rank and crowding
/// each survivor had in the input population (used by mating selection).
#[derive(Debug, Clone)]
pub struct Selection {
    pub population: Population,
    /// Indices into the input population, in output order.
    pub indices: Vec<usize>,
    pub rank: Vec<usize>,
    pub crowding: Vec<f64>,
}

/// Rank and crowding distance of every member, crowding computed per front.
pub fn rank_and_crowding(pop: &Population) -> Result<(Vec<usize>, Vec<f64>)> {
    pop.require_evaluated()?;
    let fs: Vec<&[f64]> = pop.iter().map(|s| s.f().unwrap()).collect();
    let cvs: Vec<f64> = pop.iter().map(|s| s.cv().unwrap()).collect();
    let part = sort_raw(&fs, &cvs);
    let mut crowding = vec![0.0; pop.len()];
    for front in &part.fronts {
        let ffs: Vec<&[f64]> = front.iter().map(|&i| fs[i]).collect();
        for (&i, c) in front.iter().zip(crowding_raw(&ffs)) {
            crowding[i] = c;
        }
    }
    Ok((part.rank, crowding))
}

fn better(rank: &[usize], crowding: &[f64], a: usize, b: usize) -> Ordering {
    rank[a]
        .cmp(&rank[b])
        .then_with(|| crowding[b].total_cmp(&crowding[a]))
        .then(a.cmp(&b))
}

/// Indices ordered by (rank ascending, crowding descending, index ascending).
pub fn canonical_order(pop: &Population) -> Result<Vec<usize>> {
    let (rank, crowding) = rank_and_crowding(pop)?;
    let mut idx: Vec<usize> = (0..pop.len()).collect();
    idx.sort_by(|&a, &b| better(&rank, &crowding, a, b));
    Ok(idx)
}

/// NSGA-II environmental selection of `n` members.
///
/// Whole fronts are taken in rank order; the front that does not fit is cut
/// by descending crowding distance with ties going to the lower index.
/// Survivors are returned in ascending input-index order.
pub fn nsga2_select(pop: &Population, n: usize) -> Result<Selection> {
    if n > pop.len() {
        return Err(contract(format!(
            "cannot select {n} members from a population of {}",
            pop.len()
        )));
    }
    let (rank, crowding) = rank_and_crowding(pop)?;
    let max_rank = rank.iter().copied().max().unwrap_or(0);
    let mut chosen = Vec::with_capacity(n);
    for r in 0..=max_rank {
        if chosen.len() == n {
            break;
        }
        let mut front: Vec<usize> = (0..pop.len()).filter(|&i| rank[i] == r).collect();
        let room = n - chosen.len();
        if front.len() > room {
            front.sort_by(|&a, &b| better(&rank, &crowding, a, b));
            front.truncate(room);
        }
        chosen.extend(front);
    }
    chosen.sort_unstable();
    Ok(Selection {
        population: pop.pick(&chosen),
        rank: chosen.iter().map(|&i| rank[i]).collect(),
        crowding: chosen.iter().map(|&i| crowding[i]).collect(),
        indices: chosen,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mop::Solution;
    use proptest::prelude::*;

    fn pop(fs: &[[f64; 2]]) -> Population {
        fs.iter()
            .map(|f| Solution::evaluated(vec![f[0]], f.to_vec(), 0.0).unwrap())
            .collect()
    }

    #[test]
    fn full_selection_is_identity() {
        let p = pop(&[[1.0, 2.0], [2.0, 1.0], [3.0, 3.0]]);
        let s = nsga2_select(&p, 3).unwrap();
        assert_eq!(s.indices, vec![0, 1, 2]);
        assert_eq!(s.population, p);
    }

    #[test]
    fn last_front_cut_by_crowding() {
        // F1: three points on x + y = 1; F2: three points on x + y = 3.
        let p = pop(&[[0.0, 1.0], [0.5, 0.5], [1.0, 0.0], [1.0, 2.0], [1.4, 1.6], [2.0, 1.0]]);
        let s = nsga2_select(&p, 4).unwrap();
        // Both F2 extremes are infinitely crowded; the lower index wins.
        assert_eq!(s.indices, vec![0, 1, 2, 3]);
        assert_eq!(s.indices, nsga2_select(&p, 4).unwrap().indices);
    }

    #[test]
    fn oversized_request_rejected() {
        assert!(nsga2_select(&pop(&[[0.0, 0.0]]), 2).is_err());
    }

    proptest! {
        #[test]
        fn selection_takes_whole_better_fronts(
            fs in proptest::collection::vec(proptest::collection::vec((0u8..8).prop_map(f64::from), 3), 1..40),
            frac in 0.0f64..=1.0,
        ) {
            let p: Population = fs
                .iter()
                .map(|f| Solution::evaluated(vec![], f.clone(), 0.0).unwrap())
                .collect();
            let n = ((p.len() as f64) * frac).round() as usize;
            let s = nsga2_select(&p, n).unwrap();
            prop_assert_eq!(s.population.len(), n);
            prop_assert!(s.indices.windows(2).all(|w| w[0] < w[1]));
            let (rank, _) = rank_and_crowding(&p).unwrap();
            if let Some(&worst) = s.rank.iter().max() {
                for i in 0..p.len() {
                    if rank[i] < worst {
                        prop_assert!(s.indices.contains(&i));
                    }
                }
            }
        }
    }
}
