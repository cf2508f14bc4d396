//! Reference Pareto-front samplers.

use super::lsmop::{lsmop_front_point, LSMOP9_REGIONS};
use super::zdt::{ZdtVariant, ZDT3_REGIONS, ZDT6_F1_MIN};
use crate::error::{contract, Result};
use crate::mop::dominates_slices;

/// Points sampled from a problem's true Pareto front.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceFront {
    points: Vec<Vec<f64>>,
}

impl ReferenceFront {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(contract("reference front must contain at least one point"));
        }
        let m = points[0].len();
        if points.iter().any(|p| p.len() != m) {
            return Err(contract("reference points have inconsistent objective counts"));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn size(&self) -> usize {
        self.points.len()
    }

    pub fn m(&self) -> usize {
        self.points[0].len()
    }

    /// Exhaustive pairwise check that no point dominates another.
    pub fn is_mutually_nondominated(&self) -> bool {
        self.points.iter().enumerate().all(|(i, a)| {
            self.points
                .iter()
                .enumerate()
                .all(|(j, b)| i == j || !dominates_slices(a, b))
        })
    }
}

/// Default reference-front size: 1,000 points for two objectives, 5,000 otherwise.
pub fn default_front_size(m: usize) -> usize {
    if m == 2 {
        1000
    } else {
        5000
    }
}

/// `n` evenly spaced values on `[0, 1]`; a single value sits at the midpoint.
pub(crate) fn unit_grid(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5];
    }
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

/// Maps `u ∈ [0, 1]` onto the union of `regions` proportionally to length.
fn map_into_regions(u: f64, regions: &[(f64, f64)]) -> f64 {
    let total: f64 = regions.iter().map(|(a, b)| b - a).sum();
    let mut t = u.clamp(0.0, 1.0) * total;
    for &(a, b) in regions {
        let len = b - a;
        if t <= len {
            return a + t;
        }
        t -= len;
    }
    regions.last().unwrap().1
}

pub(crate) fn zdt_front(variant: ZdtVariant, n: usize) -> Vec<Vec<f64>> {
    unit_grid(n)
        .into_iter()
        .map(|t| match variant {
            // Parameterized by f2 so the steep end is not under-sampled.
            ZdtVariant::Zdt1 | ZdtVariant::Zdt4 => vec![t * t, 1.0 - t],
            ZdtVariant::Zdt2 => vec![t, 1.0 - t * t],
            ZdtVariant::Zdt3 => {
                let f1 = map_into_regions(t, &ZDT3_REGIONS);
                let f2 = 1.0 - f1.sqrt() - f1 * (10.0 * std::f64::consts::PI * f1).sin();
                vec![f1, f2]
            }
            ZdtVariant::Zdt6 => {
                let f1 = ZDT6_F1_MIN + t * (1.0 - ZDT6_F1_MIN);
                vec![f1, 1.0 - f1 * f1]
            }
        })
        .collect()
}

fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Das-Dennis lattice on the unit simplex with `h` divisions.
fn simplex_lattice(m: usize, h: usize) -> Vec<Vec<f64>> {
    fn rec(m: usize, left: usize, h: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if cur.len() == m - 1 {
            cur.push(left);
            out.push(cur.iter().map(|&c| c as f64 / h as f64).collect());
            cur.pop();
            return;
        }
        for c in 0..=left {
            cur.push(c);
            rec(m, left - c, h, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::with_capacity(binomial(h + m - 1, m - 1));
    rec(m, h, h, &mut Vec::with_capacity(m), &mut out);
    out
}

/// Exactly `n` simplex points: the coarsest lattice with at least `n`
/// points, subsampled at an even stride.
pub(crate) fn simplex_points(m: usize, n: usize) -> Vec<Vec<f64>> {
    if n == 1 {
        return vec![vec![1.0 / m as f64; m]];
    }
    let mut h = 1;
    while binomial(h + m - 1, m - 1) < n {
        h += 1;
    }
    let lattice = simplex_lattice(m, h);
    let count = lattice.len();
    (0..n).map(|i| lattice[i * count / n].clone()).collect()
}

fn radical_inverse(mut i: usize, base: usize) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base) as f64 * f;
        i /= base;
        f *= inv;
    }
    out
}

const PRIMES: [usize; 9] = [2, 3, 5, 7, 11, 13, 17, 19, 23];

/// First `n` Halton points in `[0, 1]^dim` (dim ≤ 9), skipping the origin.
pub(crate) fn halton(n: usize, dim: usize) -> Vec<Vec<f64>> {
    (1..=n)
        .map(|i| (0..dim).map(|k| radical_inverse(i, PRIMES[k])).collect())
        .collect()
}

pub(crate) fn lsmop_front(variant: u8, m: usize, n: usize) -> Vec<Vec<f64>> {
    match variant {
        1..=4 => simplex_points(m, n),
        5..=8 => simplex_points(m, n)
            .into_iter()
            .map(|p| {
                let norm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
                p.into_iter().map(|v| v / norm).collect()
            })
            .collect(),
        _ => {
            let positions: Vec<Vec<f64>> = if m == 2 {
                unit_grid(n).into_iter().map(|t| vec![t]).collect()
            } else {
                halton(n, m - 1)
            };
            positions
                .into_iter()
                .map(|u| {
                    let pos: Vec<f64> = u.iter().map(|&v| map_into_regions(v, &LSMOP9_REGIONS)).collect();
                    lsmop_front_point(9, &pos)
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zdt1_three_points() {
        assert_eq!(
            zdt_front(ZdtVariant::Zdt1, 3),
            vec![vec![0.0, 1.0], vec![0.25, 0.5], vec![1.0, 0.0]]
        );
    }

    #[test]
    fn lattice_counts() {
        assert_eq!(simplex_lattice(3, 4).len(), binomial(6, 2));
        assert_eq!(simplex_points(10, 5000).len(), 5000);
        for p in simplex_points(4, 50) {
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn halton_is_in_unit_box() {
        let pts = halton(100, 9);
        assert!(pts.iter().flatten().all(|v| (0.0..1.0).contains(v)));
        assert_eq!(pts[0][0], 0.5);
        assert!((pts[0][1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn region_mapping_covers_union() {
        assert_eq!(map_into_regions(0.0, &ZDT3_REGIONS), 0.0);
        assert_eq!(map_into_regions(1.0, &ZDT3_REGIONS), ZDT3_REGIONS[4].1);
    }
}
