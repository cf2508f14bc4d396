use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mop::{Population, ProblemSpec};
use crate::pet::{example_from_populations, Example};

pub const DATASET_VERSION: u32 = 1;

/// One recorded `(X^g, X^{g+1})` pair in normalized space.
///
/// Decisions are scaled to the unit box; objectives of both halves use the
/// parent population's min-max scaling; `x_g1`/`f_g1` are in canonical
/// (rank, crowding, index) order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPair {
    pub problem: String,
    pub d: usize,
    pub m: usize,
    pub teacher: String,
    pub seed: u64,
    pub generation: usize,
    pub x_g: Vec<Vec<f64>>,
    pub f_g: Vec<Vec<f64>>,
    pub x_g1: Vec<Vec<f64>>,
    pub f_g1: Vec<Vec<f64>>,
}

impl TrajectoryPair {
    pub fn from_populations(
        spec: &ProblemSpec,
        teacher: &str,
        seed: u64,
        x_g: &Population,
        x_g1: &Population,
    ) -> Result<Self> {
        if x_g.len() != x_g1.len() {
            return Err(Error::Data(format!(
                "pair halves differ in size: {} and {}",
                x_g.len(),
                x_g1.len()
            )));
        }
        let ex = example_from_populations(x_g, x_g1, spec)?;
        Ok(Self {
            problem: spec.name().to_string(),
            d: ex.d,
            m: ex.m,
            teacher: teacher.to_string(),
            seed,
            generation: x_g.generation(),
            x_g: ex.parents_x,
            f_g: ex.parents_f,
            x_g1: ex.target_x,
            f_g1: ex.target_f,
        })
    }

    pub fn to_example(&self) -> Example {
        Example {
            d: self.d,
            m: self.m,
            parents_x: self.x_g.clone(),
            parents_f: self.f_g.clone(),
            target_x: self.x_g1.clone(),
            target_f: self.f_g1.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.x_g.len() != self.x_g1.len() {
            return Err(Error::Data(format!(
                "{} gen {}: halves differ in size",
                self.problem, self.generation
            )));
        }
        self.to_example().validate()
    }
}

/// Provenance of one (problem, teacher, seed) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellInfo {
    pub problem: String,
    pub d: usize,
    pub m: usize,
    pub teacher: String,
    pub seed: u64,
    pub pairs: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub version: u32,
    pub total_pairs: usize,
    pub cells: Vec<CellInfo>,
}

/// A manifest plus its pairs, in cell order.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryDataset {
    pub manifest: Manifest,
    pub pairs: Vec<TrajectoryPair>,
}

const FORMAT_TAG: &str = "pet-trajectories";

impl TrajectoryDataset {
    pub fn new(cells: Vec<CellInfo>, pairs: Vec<TrajectoryPair>) -> Result<Self> {
        let ds = Self {
            manifest: Manifest {
                format: FORMAT_TAG.into(),
                version: DATASET_VERSION,
                total_pairs: pairs.len(),
                cells,
            },
            pairs,
        };
        ds.validate()?;
        Ok(ds)
    }

    /// Manifest counts agree with the contents and every pair is well formed.
    pub fn validate(&self) -> Result<()> {
        let m = &self.manifest;
        if m.format != FORMAT_TAG || m.version != DATASET_VERSION {
            return Err(Error::Data(format!("unsupported dataset {} v{}", m.format, m.version)));
        }
        let declared: usize = m.cells.iter().map(|c| c.pairs).sum();
        if declared != m.total_pairs || m.total_pairs != self.pairs.len() {
            return Err(Error::Data(format!(
                "manifest declares {} pairs ({} by cell), file holds {}",
                m.total_pairs,
                declared,
                self.pairs.len()
            )));
        }
        for (i, p) in self.pairs.iter().enumerate() {
            p.validate()
                .map_err(|e| Error::Data(format!("record {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn examples(&self) -> Vec<Example> {
        self.pairs.iter().map(TrajectoryPair::to_example).collect()
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        serde_json::to_writer(&mut w, &self.manifest)?;
        w.write_all(b"\n")?;
        for p in &self.pairs {
            serde_json::to_writer(&mut w, p)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        Ok(String::from_utf8(buf).expect("JSON is UTF-8"))
    }

    pub fn read_from(r: impl BufRead) -> Result<Self> {
        let mut lines = r.lines();
        let first = lines.next().ok_or_else(|| Error::Data("empty dataset file".into()))??;
        let manifest: Manifest =
            serde_json::from_str(&first).map_err(|e| Error::Data(format!("manifest line: {e}")))?;
        let mut pairs = Vec::with_capacity(manifest.total_pairs);
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            pairs.push(serde_json::from_str(&line).map_err(|e| Error::Data(format!("record {}: {e}", i + 1)))?);
        }
        let ds = Self { manifest, pairs };
        ds.validate()?;
        Ok(ds)
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        Self::read_from(text.as_bytes())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::io::BufWriter::new(fs::File::create(path)?);
        self.write_to(&mut f)?;
        f.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(BufReader::new(fs::File::open(path)?))
    }
}
