//! Sparse graphs: CSR adjacency, normalization, homophily and spectra.

mod csr;
mod homophily;
mod spectrum;

pub use csr::{SparseAdjacency, Symmetrize};
pub use homophily::{class_homophily, edge_homophily};
pub use spectrum::{
    spectral_power_sum, spectrum, Spectrum, SpectrumMethod, SpectrumRequest, MAX_DENSE_N,
};

use crate::{Error, Result};

/// Node labels in `[0, num_classes)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVector {
    labels: Vec<usize>,
    num_classes: usize,
}

impl LabelVector {
    pub fn new(labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Data("label vector is empty".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(Error::OutOfRange {
                index: bad,
                bound: num_classes,
            });
        }
        Ok(LabelVector {
            labels,
            num_classes,
        })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, i: usize) -> usize {
        self.labels[i]
    }

    /// Node indices per class.
    pub fn class_members(&self) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.num_classes];
        for (i, &l) in self.labels.iter().enumerate() {
            members[l].push(i);
        }
        members
    }
}

/// Raw adjacency `A` and the normalized operator `Ã = D̂^{-1/2}(A+I)D̂^{-1/2}`.
pub fn normalized_adjacency(a: &SparseAdjacency, mode: Symmetrize) -> Result<SparseAdjacency> {
    a.add_self_loops()?.normalize_sym_with(mode)
}
