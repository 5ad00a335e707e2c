//! Edge homophily and the class-imbalance corrected homophily measure.

use super::{LabelVector, SparseAdjacency};
use crate::{Error, Result};

fn check_inputs(a: &SparseAdjacency, y: &LabelVector) -> Result<()> {
    if a.n_rows() != y.len() || a.n_cols() != y.len() {
        return Err(Error::Shape(format!(
            "adjacency {}x{} vs {} labels",
            a.n_rows(),
            a.n_cols(),
            y.len()
        )));
    }
    if a.nnz() == 0 {
        return Err(Error::UndefinedMeasure("graph has no edges".into()));
    }
    Ok(())
}

/// Fraction of stored (directed) entries joining equally labelled nodes.
///
/// An undirected edge stored in both orientations contributes twice to both
/// numerator and denominator.
pub fn edge_homophily(a: &SparseAdjacency, y: &LabelVector) -> Result<f64> {
    check_inputs(a, y)?;
    let labels = y.labels();
    let same = a.entries().filter(|&(u, v, _)| labels[u] == labels[v]).count();
    Ok(same as f64 / a.nnz() as f64)
}

/// Class-corrected homophily `1/(C−1) Σ_k [h_k − n_k/n]₊`.
///
/// `h_k` is the share of neighbours of class-`k` nodes that are themselves of
/// class `k`, pooled over the class; `n_k/n` is the class fraction.
pub fn class_homophily(a: &SparseAdjacency, y: &LabelVector) -> Result<f64> {
    check_inputs(a, y)?;
    let c = y.num_classes();
    if c < 2 {
        return Err(Error::UndefinedMeasure(
            "class homophily needs at least two classes".into(),
        ));
    }
    let labels = y.labels();
    let mut same = vec![0usize; c];
    let mut degree = vec![0usize; c];
    let mut size = vec![0usize; c];
    for (x, &k) in labels.iter().enumerate() {
        size[k] += 1;
        for (nbr, _) in a.row(x) {
            degree[k] += 1;
            if labels[nbr] == k {
                same[k] += 1;
            }
        }
    }
    if let Some(k) = size.iter().position(|&s| s == 0) {
        return Err(Error::UndefinedMeasure(format!("class {k} has no nodes")));
    }
    if let Some(k) = degree.iter().position(|&d| d == 0) {
        return Err(Error::DegenerateClass(k));
    }
    let n = labels.len() as f64;
    let total: f64 = (0..c)
        .map(|k| {
            let h_k = same[k] as f64 / degree[k] as f64;
            (h_k - size[k] as f64 / n).max(0.0)
        })
        .sum();
    Ok(total / (c - 1) as f64)
}
