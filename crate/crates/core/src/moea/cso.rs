use rand::seq::SliceRandom;
use rand::Rng;

use super::select::rank_and_crowding;
use crate::error::Result;
use crate::mop::dominance::constrained_dominates_raw;
use crate::mop::{clamp_to_bounds, Population, ProblemSpec, Solution};

/// Weight of the pull toward the population mean in the loser update.
pub const CSO_PHI: f64 = 0.1;

/// One competitive-swarm step.
///
/// Members are paired at random. Within a pair the loser (by constrained
/// dominance, then crowding distance, then index) moves toward the winner:
/// `x_l += r1 ∘ (x_w − x_l) + φ r2 ∘ (x̄ − x_l)` with fresh uniform `r1, r2`.
/// The velocity memory starts at zero every step. Winners are returned
/// unchanged; a moved loser becomes an unevaluated solution. With an odd
/// population the unpaired member passes through.
pub fn cso_step<R: Rng + ?Sized>(pop: &Population, spec: &ProblemSpec, rng: &mut R) -> Result<Population> {
    let (_, crowding) = rank_and_crowding(pop)?;
    let n = pop.len();
    let d = spec.d();
    let members = pop.members();
    let mut mean = vec![0.0; d];
    for s in members {
        for (m, v) in mean.iter_mut().zip(s.x()) {
            *m += v / n as f64;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut out = members.to_vec();
    for pair in order.chunks_exact(2) {
        let (a, b) = (pair[0], pair[1]);
        let (sa, sb) = (&members[a], &members[b]);
        let (fa, fb) = (sa.f().unwrap(), sb.f().unwrap());
        let (ca, cb) = (sa.cv().unwrap(), sb.cv().unwrap());
        let a_wins = if constrained_dominates_raw(fa, ca, fb, cb) {
            true
        } else if constrained_dominates_raw(fb, cb, fa, ca) {
            false
        } else {
            crowding[a].total_cmp(&crowding[b]).then(b.cmp(&a)).is_gt()
        };
        let (w, l) = if a_wins { (a, b) } else { (b, a) };
        let xw = members[w].x();
        let xl = members[l].x();
        let mut moved: Vec<f64> = (0..d)
            .map(|i| {
                let r1: f64 = rng.gen();
                let r2: f64 = rng.gen();
                xl[i] + r1 * (xw[i] - xl[i]) + CSO_PHI * r2 * (mean[i] - xl[i])
            })
            .collect();
        clamp_to_bounds(&mut moved, spec);
        if moved.as_slice() != xl {
            out[l] = Solution::new(moved);
        }
    }
    Ok(Population::new(out, pop.generation()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    fn pop(xs: &[[f64; 2]]) -> Population {
        xs.iter()
            .map(|x| Solution::evaluated(x.to_vec(), vec![x[0], 1.0 - x[0] + x[1]], 0.0).unwrap())
            .collect()
    }

    #[test]
    fn identical_population_is_unchanged() {
        let p = pop(&[[0.3, 0.2]; 6]);
        let spec = ProblemSpec::unit("u", 2, 2).unwrap();
        let out = cso_step(&p, &spec, &mut rng_from_seed(1)).unwrap();
        assert_eq!(out, p);
    }

    #[test]
    fn seeded_and_winners_untouched() {
        let p = pop(&[[0.1, 0.0], [0.2, 0.9], [0.8, 0.1], [0.5, 0.5], [0.9, 0.9]]);
        let spec = ProblemSpec::unit("u", 2, 2).unwrap();
        let a = cso_step(&p, &spec, &mut rng_from_seed(3)).unwrap();
        let b = cso_step(&p, &spec, &mut rng_from_seed(3)).unwrap();
        assert_eq!(a, b);
        let unchanged = a.iter().zip(p.iter()).filter(|(x, y)| x == y).count();
        // Two pairs: at least two winners plus the odd member survive as-is.
        assert!(unchanged >= 3);
        assert!(a.iter().all(|s| s.x().iter().all(|v| (0.0..=1.0).contains(v))));
    }
}
