use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the decoder output row becomes a normalized decision vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputHead {
    /// Elementwise logistic squashing into `[0, 1]`.
    #[default]
    Logistic,
    /// Softmax over the first `d` components (kept for ablation).
    Softmax,
}

/// Model dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PetConfig {
    /// Largest decision dimension the model accepts (padding target).
    pub d_hat: usize,
    /// Largest objective count the model accepts.
    pub m_hat: usize,
    pub width: usize,
    pub layers: usize,
    pub heads: usize,
    /// Largest population (sequence length) the model accepts.
    pub max_seq: usize,
    /// MLP hidden width as a multiple of `width`.
    #[serde(default = "default_mlp_ratio")]
    pub mlp_ratio: usize,
    #[serde(default)]
    pub head: OutputHead,
}

fn default_mlp_ratio() -> usize {
    4
}

impl Default for PetConfig {
    fn default() -> Self {
        Self {
            d_hat: 128,
            m_hat: 10,
            width: 64,
            layers: 2,
            heads: 4,
            max_seq: 100,
            mlp_ratio: 4,
            head: OutputHead::Logistic,
        }
    }
}

impl PetConfig {
    /// A tiny model for tests and gradient checks.
    pub fn toy() -> Self {
        Self {
            d_hat: 8,
            m_hat: 4,
            width: 16,
            layers: 2,
            heads: 2,
            max_seq: 8,
            mlp_ratio: 4,
            head: OutputHead::Logistic,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.layers == 0 {
            return fail("layers must be at least 1".into());
        }
        if self.heads == 0 || self.width == 0 || self.width % self.heads != 0 {
            return fail(format!(
                "width {} must be a positive multiple of heads {}",
                self.width, self.heads
            ));
        }
        if self.d_hat == 0 || self.m_hat == 0 || self.max_seq < 2 || self.mlp_ratio == 0 {
            return fail("d_hat, m_hat and mlp_ratio must be positive and max_seq at least 2".into());
        }
        Ok(())
    }

    pub fn hidden(&self) -> usize {
        self.width * self.mlp_ratio
    }

    /// Number of scalar parameters, as a function of the configuration alone.
    pub fn parameter_count(&self) -> usize {
        let w = self.width;
        let h = self.hidden();
        let ln = 2 * w;
        let mha = 4 * (w * w + w);
        let mlp = w * h + h + h * w + w;
        let encoder = ln + mha + ln + mlp;
        let decoder = ln + mha + mha + ln + mlp;
        self.d_hat * w + self.m_hat * w + self.layers * (encoder + decoder) + w * self.d_hat + self.d_hat
    }

    /// Rejects a problem or population the model cannot hold.
    pub fn check_capacity(&self, d: usize, m: usize, n: usize) -> Result<()> {
        if d > self.d_hat {
            return Err(Error::Capacity(format!(
                "decision dimension {d} exceeds d_hat {}",
                self.d_hat
            )));
        }
        if m > self.m_hat {
            return Err(Error::Capacity(format!(
                "objective count {m} exceeds m_hat {}",
                self.m_hat
            )));
        }
        if n > self.max_seq {
            return Err(Error::Capacity(format!(
                "population size {n} exceeds max_seq {}",
                self.max_seq
            )));
        }
        Ok(())
    }
}
