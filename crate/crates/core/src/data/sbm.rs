use super::GraphDataset;
use crate::graph::{LabelVector, SparseAdjacency};
use crate::rng::{streams, CounterRng};
use crate::{Error, Matrix, Result};
use serde::{Deserialize, Serialize};

/// Stochastic block model with Gaussian class-mean features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n: usize,
    pub classes: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub feature_dim: usize,
    /// Euclidean distance between any two class means.
    pub feature_separation: f64,
    #[serde(default)]
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p_in", self.p_in), ("p_out", self.p_out)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} = {p} outside [0, 1]")));
            }
        }
        if self.classes == 0 || self.n < self.classes {
            return Err(Error::Config(format!(
                "need at least one node per class, got n = {} for {} classes",
                self.n, self.classes
            )));
        }
        if self.feature_dim < self.classes {
            return Err(Error::Config(format!(
                "feature_dim {} must be at least the class count {}",
                self.feature_dim, self.classes
            )));
        }
        if !(self.feature_separation >= 0.0 && self.feature_separation.is_finite()) {
            return Err(Error::Config("feature_separation must be finite and >= 0".into()));
        }
        Ok(())
    }
}

/// Samples an undirected SBM.
///
/// Node `i` has label `⌊i·C/n⌋`. Each pair `i < j` is an edge independently
/// with probability `p_in` (same label) or `p_out`, decided by the `j−i−1`-th
/// uniform of row stream `SBM_EDGES + i`. Class `c` has mean
/// `(s/√2)·e_c`, so means are pairwise `s` apart; features add unit-variance
/// Gaussian noise drawn row-major from stream `SBM_FEATURES`.
pub fn generate_sbm(spec: &SyntheticSpec) -> Result<GraphDataset> {
    spec.validate()?;
    let (n, c) = (spec.n, spec.classes);
    let labels: Vec<usize> = (0..n).map(|i| i * c / n).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        let mut rng = CounterRng::new(spec.seed, streams::SBM_EDGES + i as u64);
        for j in i + 1..n {
            let p = if labels[i] == labels[j] { spec.p_in } else { spec.p_out };
            if rng.next_f64() < p {
                edges.push((i, j));
            }
        }
    }
    let adjacency = SparseAdjacency::from_edges(&edges, n, false)?;
    let scale = spec.feature_separation / 2f64.sqrt();
    let mut rng = CounterRng::new(spec.seed, streams::SBM_FEATURES);
    let features = Matrix::from_fn(n, spec.feature_dim, |i, k| {
        let mean = if k == labels[i] { scale } else { 0.0 };
        mean + rng.next_normal()
    });
    let name = format!("sbm-n{}-c{}-s{}", n, c, spec.seed);
    GraphDataset::new(name, adjacency, features, LabelVector::new(labels, c)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::edge_homophily;

    fn spec(p_in: f64, p_out: f64, seed: u64) -> SyntheticSpec {
        SyntheticSpec {
            n: 60,
            classes: 3,
            p_in,
            p_out,
            feature_dim: 4,
            feature_separation: 1.0,
            seed,
        }
    }

    #[test]
    fn extreme_probabilities_give_extreme_homophily() {
        let ds = generate_sbm(&spec(0.3, 0.0, 1)).unwrap();
        assert_eq!(edge_homophily(&ds.adjacency, &ds.labels).unwrap(), 1.0);
        let ds = generate_sbm(&spec(0.0, 0.3, 1)).unwrap();
        assert_eq!(edge_homophily(&ds.adjacency, &ds.labels).unwrap(), 0.0);
    }

    #[test]
    fn seeded_generation_repeats() {
        assert_eq!(generate_sbm(&spec(0.2, 0.1, 4)).unwrap(), generate_sbm(&spec(0.2, 0.1, 4)).unwrap());
        assert_ne!(generate_sbm(&spec(0.2, 0.1, 4)).unwrap(), generate_sbm(&spec(0.2, 0.1, 5)).unwrap());
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(generate_sbm(&spec(1.5, 0.0, 0)).is_err());
        let mut s = spec(0.1, 0.1, 0);
        s.feature_dim = 2;
        assert!(generate_sbm(&s).is_err());
    }
}
