use crate::error::Result;
use crate::mop::Population;

/// Crowding distance of each member of one front, in front order.
/// Boundary members on any objective score `+∞`.
pub type CrowdingScores = Vec<f64>;

/// Crowding distance of the members of `front` (indices into `pop`).
pub fn crowding_distance(pop: &Population, front: &[usize]) -> Result<CrowdingScores> {
    pop.require_evaluated()?;
    let fs: Vec<&[f64]> = front.iter().map(|&i| pop.members()[i].f().unwrap()).collect();
    Ok(crowding_raw(&fs))
}

pub(crate) fn crowding_raw(fs: &[&[f64]]) -> CrowdingScores {
    let n = fs.len();
    if n == 0 {
        return Vec::new();
    }
    let mut score = vec![0.0; n];
    if n <= 2 {
        score.fill(f64::INFINITY);
        return score;
    }
    let m = fs[0].len();
    let mut order: Vec<usize> = (0..n).collect();
    for k in 0..m {
        order.sort_by(|&a, &b| fs[a][k].total_cmp(&fs[b][k]).then(a.cmp(&b)));
        let lo = fs[order[0]][k];
        let hi = fs[order[n - 1]][k];
        score[order[0]] = f64::INFINITY;
        score[order[n - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        for w in 1..n - 1 {
            let i = order[w];
            if score[i].is_finite() {
                score[i] += (fs[order[w + 1]][k] - fs[order[w - 1]][k]) / range;
            }
        }
    }
    score
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_is_all_boundary() {
        assert_eq!(crowding_raw(&[&[0.0, 1.0], &[1.0, 0.0]]), vec![f64::INFINITY; 2]);
        assert!(crowding_raw(&[]).is_empty());
    }

    #[test]
    fn middle_member_of_three() {
        let s = crowding_raw(&[&[0.0, 1.0], &[0.5, 0.5], &[1.0, 0.0]]);
        assert_eq!(s[1], 2.0);
        assert!(s[0].is_infinite() && s[2].is_infinite());
    }

    #[test]
    fn identical_objectives_give_zero_interior() {
        let f: &[f64] = &[0.3, 0.3];
        let s = crowding_raw(&[f, f, f, f]);
        assert_eq!(s.iter().filter(|v| v.is_infinite()).count(), 2);
        assert_eq!(s.iter().filter(|v| **v == 0.0).count(), 2);
    }
}
