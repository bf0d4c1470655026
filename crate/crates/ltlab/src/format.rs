//! JSON ensemble files and CSV writers.
//!
//! An ensemble file looks like
//!
//! ```json
//! {"grid": {"dim": 1, "extent": [[-8, 8]], "points": [2048]},
//!  "weights": [1.0],
//!  "fields": [[0.0, 0.1, ...]]}
//! ```
//!
//! Field values are listed row-major with the last axis fastest. A field is
//! either a list of reals or a list of `[re, im]` pairs. `extent` and
//! `points` may hold a single entry that applies to every axis.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ltlab_core::fields::{Ensemble, Field, Grid};
use ltlab_core::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub extent: Vec<[f64; 2]>,
    pub points: Vec<usize>,
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid> {
        let extent: Vec<(f64, f64)> = self.extent.iter().map(|e| (e[0], e[1])).collect();
        Ok(Grid::new(self.dim, &extent, &self.points)?)
    }

    pub fn of(grid: &Grid) -> Self {
        GridSpec {
            dim: grid.dim(),
            extent: (0..grid.dim()).map(|a| grid.extent(a)).map(|(lo, hi)| [lo, hi]).collect(),
            points: grid.points().to_vec(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Samples {
    Real(Vec<f64>),
    Complex(Vec<[f64; 2]>),
}

impl Samples {
    fn of(field: &Field) -> Self {
        if field.is_real() {
            Samples::Real(field.re())
        } else {
            Samples::Complex(field.values().iter().map(|v| [v.re, v.im]).collect())
        }
    }

    fn into_field(self, grid: Grid) -> Result<Field> {
        let values = match self {
            Samples::Real(v) => v.into_iter().map(|x| Complex64::new(x, 0.0)).collect(),
            Samples::Complex(v) => v.into_iter().map(|[re, im]| Complex64::new(re, im)).collect(),
        };
        Ok(Field::new(grid, values)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleFile {
    pub grid: GridSpec,
    pub weights: Vec<f64>,
    pub fields: Vec<Samples>,
    /// Snapshot of the run that produced the file; ignored on input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
}

impl EnsembleFile {
    pub fn of(e: &Ensemble, config: Option<serde_json::Value>) -> Self {
        EnsembleFile {
            grid: GridSpec::of(e.grid()),
            weights: e.weights().to_vec(),
            fields: e.fields().iter().map(Samples::of).collect(),
            config,
        }
    }

    pub fn into_ensemble(self) -> Result<Ensemble> {
        let grid = self.grid.build()?;
        let fields = self.fields.into_iter().map(|s| s.into_field(grid)).collect::<Result<Vec<_>>>()?;
        Ok(Ensemble::new(self.weights, fields)?)
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.to_path_buf(), source })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(CliError::io(path))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|source| CliError::Json { path: path.to_path_buf(), source })?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(CliError::io(path))
}

pub fn read_ensemble(path: &Path) -> Result<Ensemble> {
    read_json::<EnsembleFile>(path)?.into_ensemble()
}

pub fn write_ensemble(path: &Path, e: &Ensemble, config: Option<serde_json::Value>) -> Result<()> {
    write_json(path, &EnsembleFile::of(e, config))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(CliError::io(path))
}

/// Writes `rows` as CSV preceded by a `# config: {...}` comment line.
pub fn write_csv<T: Serialize>(path: &Path, config: &serde_json::Value, rows: &[T]) -> Result<()> {
    let file = File::create(path).map_err(CliError::io(path))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "# config: {config}").map_err(CliError::io(path))?;
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(CliError::io(path))
}
