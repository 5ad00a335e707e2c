//! Datasets: in-memory representation, text and binary formats, an importer
//! for common benchmark layouts and a stochastic block model generator.
//!
//! Text format: a header line `N M C`, then `M` lines `src dst`, `N` lines
//! holding one label each, and `N` lines of whitespace-separated feature
//! values. Edges are stored exactly as listed (an undirected graph lists both
//! orientations). Blank lines are ignored but counted for line numbers.
//!
//! Binary format, little-endian: magic `PGCN`, version byte `1`, `u64` values
//! `N M C q`, `M` pairs of `u64` endpoints, `N` `u64` labels, then `N·q`
//! row-major `f64` features.

mod binary;
mod external;
mod sbm;
mod text;

pub use binary::{read_binary, write_binary};
pub use external::{import_external, read_split_file};
pub use sbm::{generate_sbm, SyntheticSpec};
pub use text::{read_text, write_text};

use crate::graph::{LabelVector, SparseAdjacency, Symmetrize};
use crate::models::GraphInputs;
use crate::train::Split;
use crate::{Error, Matrix, Result};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Text,
    Binary,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(Format::Text),
            "binary" => Ok(Format::Binary),
            other => Err(Error::Config(format!("unknown dataset format {other:?}"))),
        }
    }
}

/// One node-classification problem.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphDataset {
    pub name: String,
    /// Raw adjacency `A`, without self loops.
    pub adjacency: SparseAdjacency,
    pub features: Matrix,
    pub labels: LabelVector,
    pub fixed_splits: Vec<Split>,
}

impl GraphDataset {
    pub fn new(
        name: impl Into<String>,
        adjacency: SparseAdjacency,
        features: Matrix,
        labels: LabelVector,
    ) -> Result<Self> {
        let n = labels.len();
        if adjacency.n_rows() != n || adjacency.n_cols() != n {
            return Err(Error::Shape(format!(
                "{}x{} adjacency for {n} labels",
                adjacency.n_rows(),
                adjacency.n_cols()
            )));
        }
        if features.rows() != n {
            return Err(Error::Shape(format!("{} feature rows for {n} labels", features.rows())));
        }
        if !features.is_finite() {
            return Err(Error::Data("features contain non-finite values".into()));
        }
        Ok(GraphDataset {
            name: name.into(),
            adjacency,
            features,
            labels,
            fixed_splits: Vec::new(),
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.labels.len()
    }

    pub fn num_classes(&self) -> usize {
        self.labels.num_classes()
    }

    pub fn num_features(&self) -> usize {
        self.features.cols()
    }

    /// Stored adjacency entries, each an ordered pair.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adjacency.entries().map(|(i, j, _)| (i, j)).collect()
    }

    /// Divides each feature row by its L1 norm; zero rows stay zero.
    pub fn row_normalized(&self) -> Self {
        let mut out = self.clone();
        for i in 0..out.features.rows() {
            let row = out.features.row_mut(i);
            let s: f64 = row.iter().map(|v| v.abs()).sum();
            if s > 0.0 {
                row.iter_mut().for_each(|v| *v /= s);
            }
        }
        out
    }

    pub fn graph_inputs(&self, symmetrize: Symmetrize) -> Result<GraphInputs> {
        GraphInputs::new(
            self.features.clone(),
            self.adjacency.clone(),
            self.num_classes(),
            symmetrize,
        )
    }
}

/// Builds the adjacency of a loaded file: entries exactly as listed, with the
/// symmetry hint set when the result happens to be symmetric.
fn adjacency_from_file(edges: &[(usize, usize)], n: usize) -> Result<SparseAdjacency> {
    Ok(SparseAdjacency::from_edges(edges, n, true)?.detect_symmetry())
}

pub fn load_dataset(path: &Path, format: Format) -> Result<GraphDataset> {
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let reader = BufReader::new(File::open(path)?);
    match format {
        Format::Text => read_text(reader, &name),
        Format::Binary => read_binary(reader, &name),
    }
}

pub fn save_dataset(ds: &GraphDataset, path: &Path, format: Format) -> Result<()> {
    let writer = BufWriter::new(File::create(path)?);
    match format {
        Format::Text => write_text(writer, ds),
        Format::Binary => write_binary(writer, ds),
    }
}
