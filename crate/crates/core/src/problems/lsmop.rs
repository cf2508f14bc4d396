//! The LSMOP large-scale test suite.
//!
//! Decision variables split into `m - 1` position variables and `d - m + 1`
//! distance variables. Distance variables are linked to the first position
//! variable, divided into one group per objective with chaos-driven
//! non-uniform sizes, and each group into `NK` subcomponents scored by a
//! landscape function. The group scores feed a linear (1-4), spherical (5-8)
//! or disconnected (9) front shape.

use std::f64::consts::{E, PI};

use crate::error::{Error, Result};
use crate::mop::{Problem, ProblemSpec};

/// Subcomponents per variable group.
pub const NK: usize = 5;

/// Seed and multiplier of the logistic map that sizes the variable groups.
const CHAOS_SEED: f64 = 0.1;
const CHAOS_R: f64 = 3.8;

/// Non-dominated intervals of each position variable in LSMOP9.
pub const LSMOP9_REGIONS: [(f64, f64); 2] = [(0.0, 0.251_412), (0.631_627, 0.859_401)];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Landscape {
    Sphere,
    Schwefel,
    Rosenbrock,
    Rastrigin,
    Griewank,
    Ackley,
}

impl Landscape {
    fn eval(self, x: &[f64]) -> f64 {
        let n = x.len() as f64;
        match self {
            Landscape::Sphere => x.iter().map(|v| v * v).sum(),
            Landscape::Schwefel => x.iter().fold(0.0, |acc, v| acc.max(v.abs())),
            Landscape::Rosenbrock => x
                .windows(2)
                .map(|w| 100.0 * (w[0] * w[0] - w[1]).powi(2) + (w[0] - 1.0).powi(2))
                .sum(),
            Landscape::Rastrigin => x.iter().map(|v| v * v - 10.0 * (2.0 * PI * v).cos() + 10.0).sum(),
            Landscape::Griewank => {
                let s: f64 = x.iter().map(|v| v * v).sum::<f64>() / 4000.0;
                let p: f64 = x
                    .iter()
                    .enumerate()
                    .map(|(i, v)| (v / ((i + 1) as f64).sqrt()).cos())
                    .product();
                s - p + 1.0
            }
            Landscape::Ackley => {
                let s: f64 = x.iter().map(|v| v * v).sum::<f64>() / n;
                let c: f64 = x.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / n;
                20.0 - 20.0 * (-0.2 * s.sqrt()).exp() - c.exp() + E
            }
        }
    }

    /// Value the linked variables take at the landscape minimum.
    fn optimum(self) -> f64 {
        match self {
            Landscape::Rosenbrock => 1.0,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shape {
    Linear,
    Spherical,
    Disconnected,
}

/// One subcomponent: a contiguous slice of the decision vector.
#[derive(Debug, Clone)]
struct Subcomponent {
    start: usize,
    len: usize,
}

/// An LSMOP instance (variant 1..=9) with `d` variables and `m` objectives.
#[derive(Debug, Clone)]
pub struct Lsmop {
    variant: u8,
    spec: ProblemSpec,
    /// `groups[k]` holds the subcomponents scored for objective `k`.
    groups: Vec<Vec<Subcomponent>>,
}

impl Lsmop {
    pub fn new(variant: u8, d: usize, m: usize) -> Result<Self> {
        if !(1..=9).contains(&variant) {
            return Err(Error::InvalidSpec(format!("LSMOP variant {variant} does not exist")));
        }
        if !(2..=10).contains(&m) {
            return Err(Error::InvalidSpec(format!("LSMOP supports 2..=10 objectives, got {m}")));
        }
        if d < m {
            return Err(Error::InvalidSpec(format!("LSMOP needs d >= m, got d={d}, m={m}")));
        }
        let mut lower = vec![0.0; d];
        let mut upper = vec![10.0; d];
        lower[..m - 1].fill(0.0);
        upper[..m - 1].fill(1.0);
        let spec = ProblemSpec::new(format!("lsmop{variant}"), m, lower, upper, 0)?;
        Ok(Self {
            variant,
            spec,
            groups: build_groups(d, m),
        })
    }

    pub fn variant(&self) -> u8 {
        self.variant
    }

    /// Sizes of the per-objective variable groups.
    pub fn group_sizes(&self) -> Vec<usize> {
        self.groups.iter().map(|g| g.iter().map(|s| s.len).sum()).collect()
    }

    fn landscapes(&self) -> (Landscape, Landscape) {
        use Landscape::*;
        match self.variant {
            1 => (Sphere, Sphere),
            2 => (Griewank, Schwefel),
            3 => (Rastrigin, Rosenbrock),
            4 => (Ackley, Griewank),
            5 => (Sphere, Sphere),
            6 => (Rosenbrock, Schwefel),
            7 => (Ackley, Rosenbrock),
            8 => (Griewank, Sphere),
            _ => (Sphere, Ackley),
        }
    }

    /// Landscape scoring objective `k` (0-based; odd 1-based objectives use the first).
    fn landscape_for(&self, k: usize) -> Landscape {
        let (odd, even) = self.landscapes();
        if k % 2 == 0 {
            odd
        } else {
            even
        }
    }

    fn shape(&self) -> Shape {
        match self.variant {
            1..=4 => Shape::Linear,
            5..=8 => Shape::Spherical,
            _ => Shape::Disconnected,
        }
    }

    fn nonlinear_linkage(&self) -> bool {
        self.variant >= 5
    }

    /// Multiplier applied to distance variable `i` (0-based) by the linkage.
    fn link_factor(&self, i: usize) -> f64 {
        let r = (i + 1) as f64 / self.spec.d() as f64;
        if self.nonlinear_linkage() {
            1.0 + (0.5 * PI * r).cos()
        } else {
            1.0 + r
        }
    }

    fn linked(&self, x: &[f64]) -> Vec<f64> {
        let m = self.spec.m();
        let mut out = x.to_vec();
        for i in m - 1..x.len() {
            out[i] = self.link_factor(i) * x[i] - 10.0 * x[0];
        }
        out
    }

    fn group_scores(&self, linked: &[f64]) -> Vec<f64> {
        self.groups
            .iter()
            .enumerate()
            .map(|(k, subs)| {
                let land = self.landscape_for(k);
                subs.iter()
                    .filter(|s| s.len > 0)
                    .map(|s| land.eval(&linked[s.start..s.start + s.len]) / s.len as f64)
                    .sum::<f64>()
                    / NK as f64
            })
            .collect()
    }

    /// A decision vector whose linked distance variables sit at every
    /// landscape's minimum, so its image lies on the true front.
    ///
    /// `position` holds the `m - 1` position variables; `position[0]` must be
    /// at most 0.9 for variants with a Rosenbrock group to stay in bounds.
    pub fn optimal_decision(&self, position: &[f64]) -> Result<Vec<f64>> {
        let m = self.spec.m();
        if position.len() != m - 1 {
            return Err(Error::DimensionMismatch {
                what: "position variables",
                expected: m - 1,
                found: position.len(),
            });
        }
        let mut x = vec![0.0; self.spec.d()];
        x[..m - 1].copy_from_slice(position);
        for (k, subs) in self.groups.iter().enumerate() {
            let target = self.landscape_for(k).optimum();
            for s in subs {
                for i in s.start..s.start + s.len {
                    x[i] = (target + 10.0 * x[0]) / self.link_factor(i);
                }
            }
        }
        self.spec.check_decision(&x)?;
        Ok(x)
    }
}

fn build_groups(d: usize, m: usize) -> Vec<Vec<Subcomponent>> {
    let mut c = vec![CHAOS_R * CHAOS_SEED * (1.0 - CHAOS_SEED)];
    for _ in 1..m {
        let last = *c.last().unwrap();
        c.push(CHAOS_R * last * (1.0 - last));
    }
    let total: f64 = c.iter().sum();
    let n_dist = d - m + 1;
    let sublen: Vec<usize> = c
        .iter()
        .map(|ci| (ci / total * n_dist as f64 / NK as f64).floor() as usize)
        .collect();
    let used: usize = sublen.iter().map(|s| s * NK).sum();
    let remainder = n_dist - used;

    let mut start = m - 1;
    let mut groups = Vec::with_capacity(m);
    for (k, &len) in sublen.iter().enumerate() {
        let mut subs = Vec::with_capacity(NK);
        for j in 0..NK {
            let extra = if k == m - 1 && j == NK - 1 { remainder } else { 0 };
            subs.push(Subcomponent {
                start,
                len: len + extra,
            });
            start += len + extra;
        }
        groups.push(subs);
    }
    debug_assert_eq!(start, d);
    groups
}

impl Problem for Lsmop {
    fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    fn objectives(&self, x: &[f64]) -> Vec<f64> {
        let m = self.spec.m();
        let g = self.group_scores(&self.linked(x));
        let pos = &x[..m - 1];
        match self.shape() {
            Shape::Linear => (0..m)
                .map(|k| {
                    let prod: f64 = pos[..m - 1 - k].iter().product();
                    let tail = if k == 0 { 1.0 } else { 1.0 - pos[m - 1 - k] };
                    (1.0 + g[k]) * prod * tail
                })
                .collect(),
            Shape::Spherical => (0..m)
                .map(|k| {
                    let coupling = if k + 1 < m { g[k + 1] } else { 0.0 };
                    let prod: f64 = pos[..m - 1 - k].iter().map(|v| (v * PI / 2.0).cos()).product();
                    let tail = if k == 0 { 1.0 } else { (pos[m - 1 - k] * PI / 2.0).sin() };
                    (1.0 + g[k] + coupling) * prod * tail
                })
                .collect(),
            Shape::Disconnected => {
                let gs = 1.0 + g.iter().sum::<f64>();
                let mut f: Vec<f64> = pos.to_vec();
                let h: f64 = pos.iter().map(|v| v / (1.0 + gs) * (1.0 + (3.0 * PI * v).sin())).sum();
                f.push((1.0 + gs) * (m as f64 - h));
                f
            }
        }
    }
}

/// Bounds-checked LSMOP evaluation.
pub fn evaluate_lsmop(problem: &Lsmop, x: &[f64]) -> Result<Vec<f64>> {
    problem.spec().check_decision(x)?;
    Ok(problem.objectives(x))
}

/// Front shape of an LSMOP variant evaluated at position variables `pos`
/// (all group scores at their minimum).
pub(crate) fn lsmop_front_point(variant: u8, pos: &[f64]) -> Vec<f64> {
    let m = pos.len() + 1;
    match variant {
        1..=4 => (0..m)
            .map(|k| {
                let prod: f64 = pos[..m - 1 - k].iter().product();
                let tail = if k == 0 { 1.0 } else { 1.0 - pos[m - 1 - k] };
                prod * tail
            })
            .collect(),
        5..=8 => (0..m)
            .map(|k| {
                let prod: f64 = pos[..m - 1 - k].iter().map(|v| (v * PI / 2.0).cos()).product();
                let tail = if k == 0 { 1.0 } else { (pos[m - 1 - k] * PI / 2.0).sin() };
                prod * tail
            })
            .collect(),
        _ => {
            let mut f = pos.to_vec();
            let h: f64 = pos.iter().map(|v| v / 2.0 * (1.0 + (3.0 * PI * v).sin())).sum();
            f.push(2.0 * (m as f64 - h));
            f
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_sizes_cover_distance_variables() {
        for &(d, m) in &[(30, 2), (100, 2), (300, 3), (1000, 10), (12, 10), (5000, 2)] {
            let p = Lsmop::new(1, d, m).unwrap();
            let sizes = p.group_sizes();
            assert_eq!(sizes.len(), m);
            assert_eq!(sizes.iter().sum::<usize>(), d - m + 1);
        }
    }

    #[test]
    fn chaotic_group_sizes_for_two_objectives() {
        // c = (0.342, 0.855...), 29 distance vars -> sublen (1, 4), remainder 4
        let p = Lsmop::new(1, 30, 2).unwrap();
        assert_eq!(p.group_sizes(), vec![5, 24]);
    }

    #[test]
    fn output_length_matches_objectives() {
        for v in 1..=9 {
            for m in [2, 3, 10] {
                let p = Lsmop::new(v, 100, m).unwrap();
                let x: Vec<f64> = p.spec().upper().iter().map(|u| u * 0.37).collect();
                let f = evaluate_lsmop(&p, &x).unwrap();
                assert_eq!(f.len(), m);
                assert!(f.iter().all(|v| v.is_finite()));
                assert_eq!(f, evaluate_lsmop(&p, &x).unwrap());
            }
        }
    }

    #[test]
    fn optimal_decision_reaches_front_shape() {
        for v in 1..=9 {
            for m in [2, 3, 5] {
                let p = Lsmop::new(v, 120, m).unwrap();
                let pos: Vec<f64> = (0..m - 1).map(|i| 0.15 + 0.2 * i as f64 / m as f64).collect();
                let x = p.optimal_decision(&pos).unwrap();
                let f = p.objectives(&x);
                let front = lsmop_front_point(v, &pos);
                for (a, b) in f.iter().zip(&front) {
                    assert!((a - b).abs() < 1e-9, "lsmop{v} m={m}: {f:?} vs {front:?}");
                }
            }
        }
    }

    #[test]
    fn rejects_bad_configuration() {
        assert!(Lsmop::new(0, 100, 2).is_err());
        assert!(Lsmop::new(10, 100, 2).is_err());
        assert!(Lsmop::new(1, 100, 11).is_err());
        assert!(Lsmop::new(1, 3, 5).is_err());
    }

    #[test]
    fn landscapes_vanish_at_their_optimum() {
        let all = [
            Landscape::Sphere,
            Landscape::Schwefel,
            Landscape::Rosenbrock,
            Landscape::Rastrigin,
            Landscape::Griewank,
            Landscape::Ackley,
        ];
        for l in all {
            let x = vec![l.optimum(); 7];
            assert!(l.eval(&x).abs() < 1e-12, "{l:?}");
        }
    }
}
