use rand::Rng;

use crate::error::{Error, Result};
use crate::mop::{Problem, ProblemSpec};

/// Default per-coordinate translation, in normalized decision space.
pub const DEFAULT_SHIFT: f64 = 0.1;

/// Learnability fixture whose optimal next generation is known exactly:
/// the input population translated by `shift` and clamped to the unit box.
///
/// Objectives are `f_j(x) = mean_i (x_i - c_j)^2` with centres `c_j`
/// evenly spaced on `[0, 1]`, so every objective is smooth and they conflict.
#[derive(Debug, Clone)]
pub struct SyntheticShift {
    spec: ProblemSpec,
    shift: Vec<f64>,
}

impl SyntheticShift {
    pub fn new(d: usize, m: usize, shift: Vec<f64>) -> Result<Self> {
        if shift.len() != d {
            return Err(Error::DimensionMismatch {
                what: "shift vector length",
                expected: d,
                found: shift.len(),
            });
        }
        Ok(Self {
            spec: ProblemSpec::unit("synthetic", d, m)?,
            shift,
        })
    }

    /// Shift of `DEFAULT_SHIFT` along every coordinate.
    pub fn with_default_shift(d: usize, m: usize) -> Result<Self> {
        Self::new(d, m, vec![DEFAULT_SHIFT; d])
    }

    pub fn shift(&self) -> &[f64] {
        &self.shift
    }

    /// The known-optimal successor of a (normalized) decision vector.
    pub fn target(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.shift)
            .map(|(v, s)| (v + s).clamp(0.0, 1.0))
            .collect()
    }

    /// A tight cluster of `n` points: a random centre kept at least
    /// `shift` away from the upper bound, plus uniform jitter of
    /// half-width `spread`.
    pub fn sample_population<R: Rng + ?Sized>(&self, rng: &mut R, n: usize, spread: f64) -> Vec<Vec<f64>> {
        let centre: Vec<f64> = self
            .shift
            .iter()
            .map(|s| {
                let hi = (1.0 - s.abs() - spread).max(spread + 1e-3);
                rng.gen_range(spread..hi)
            })
            .collect();
        (0..n)
            .map(|_| {
                centre
                    .iter()
                    .map(|c| (c + rng.gen_range(-spread..=spread)).clamp(0.0, 1.0))
                    .collect()
            })
            .collect()
    }

    fn centre(&self, j: usize) -> f64 {
        j as f64 / (self.spec.m() - 1) as f64
    }

    /// Front point at diagonal position `t`.
    pub(crate) fn front_point(&self, t: f64) -> Vec<f64> {
        (0..self.spec.m()).map(|j| (t - self.centre(j)).powi(2)).collect()
    }
}

impl Problem for SyntheticShift {
    fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    fn objectives(&self, x: &[f64]) -> Vec<f64> {
        let d = x.len() as f64;
        (0..self.spec.m())
            .map(|j| {
                let c = self.centre(j);
                x.iter().map(|v| (v - c).powi(2)).sum::<f64>() / d
            })
            .collect()
    }
}
