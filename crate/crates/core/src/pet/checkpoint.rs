//! Binary model files.
//!
//! Layout: magic `PETM`, format version (u32 LE), config as a u32-length
//! prefixed UTF-8 JSON string, parameter count (u32), then per parameter in
//! layout order: rank (u32), extents (u32 each), values (f64 LE).

use std::fs;
use std::path::Path;

use super::config::PetConfig;
use super::model::PetModel;
use crate::error::{Error, Result};
use crate::nn::Tensor;

pub const MAGIC: &[u8; 4] = b"PETM";
pub const FORMAT_VERSION: u32 = 1;

fn u32_of(n: usize, what: &str) -> Result<u32> {
    u32::try_from(n).map_err(|_| Error::Checkpoint(format!("{what} {n} does not fit in u32")))
}

pub fn to_bytes(model: &PetModel) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(16 + model.parameter_count() * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    let cfg = serde_json::to_string(model.config())?;
    out.extend_from_slice(&u32_of(cfg.len(), "config length")?.to_le_bytes());
    out.extend_from_slice(cfg.as_bytes());
    let tensors = model.params().tensors();
    out.extend_from_slice(&u32_of(tensors.len(), "parameter count")?.to_le_bytes());
    for t in tensors {
        out.extend_from_slice(&u32_of(t.shape().len(), "rank")?.to_le_bytes());
        for &e in t.shape() {
            out.extend_from_slice(&u32_of(e, "extent")?.to_le_bytes());
        }
        for v in t.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::Checkpoint(format!("truncated file while reading {what} at byte {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
}

pub fn from_bytes(buf: &[u8]) -> Result<PetModel> {
    let mut r = Reader { buf, pos: 0 };
    if r.take(4, "magic")? != MAGIC {
        return Err(Error::Checkpoint("bad magic bytes, not a model file".into()));
    }
    let version = r.u32("version")?;
    if version != FORMAT_VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported format version {version} (expected {FORMAT_VERSION})"
        )));
    }
    let len = r.u32("config length")? as usize;
    let cfg_text = std::str::from_utf8(r.take(len, "config")?)
        .map_err(|e| Error::Checkpoint(format!("config is not UTF-8: {e}")))?;
    let config: PetConfig =
        serde_json::from_str(cfg_text).map_err(|e| Error::Checkpoint(format!("invalid config: {e}")))?;
    config.validate()?;
    let count = r.u32("parameter count")? as usize;
    // Guard against absurd counts before allocating.
    if count > buf.len() {
        return Err(Error::Checkpoint(format!("parameter count {count} is implausible")));
    }
    let mut tensors = Vec::with_capacity(count);
    for i in 0..count {
        let rank = r.u32("rank")? as usize;
        if rank == 0 || rank > 8 {
            return Err(Error::Checkpoint(format!("parameter {i} has invalid rank {rank}")));
        }
        let mut shape = Vec::with_capacity(rank);
        for _ in 0..rank {
            shape.push(r.u32("extent")? as usize);
        }
        let n = shape
            .iter()
            .try_fold(1usize, |a, &e| a.checked_mul(e))
            .unwrap_or(usize::MAX);
        let bytes = r.take(n.saturating_mul(8), "parameter values")?;
        let data = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        tensors.push(Tensor::new(shape, data).map_err(|e| Error::Checkpoint(format!("parameter {i}: {e}")))?);
    }
    if r.pos != buf.len() {
        return Err(Error::Checkpoint(format!(
            "{} trailing bytes after the last parameter",
            buf.len() - r.pos
        )));
    }
    PetModel::from_parts(config, tensors).map_err(|e| Error::Checkpoint(format!("shape mismatch: {e}")))
}

pub fn save_checkpoint(model: &PetModel, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_bytes(model)?)?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<PetModel> {
    from_bytes(&fs::read(path)?)
}

/// Loads a model and requires its configuration to equal `expected`.
pub fn load_checkpoint_expecting(path: impl AsRef<Path>, expected: &PetConfig) -> Result<PetModel> {
    let model = load_checkpoint(path)?;
    if model.config() != expected {
        return Err(Error::Checkpoint(format!(
            "file holds config {:?}, requested {:?}",
            model.config(),
            expected
        )));
    }
    Ok(model)
}
