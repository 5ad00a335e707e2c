use crate::graph::LabelVector;
use crate::rng::{streams, CounterRng};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitProtocol {
    /// 60/20/20 stratified within each class.
    #[serde(rename = "per_class_60_20_20")]
    PerClass602020,
    /// 50/25/25 sampled over all nodes.
    #[serde(rename = "random_50_25_25")]
    Random502525,
    /// Masks read from a file.
    FixedFile,
}

impl SplitProtocol {
    pub fn as_str(self) -> &'static str {
        match self {
            SplitProtocol::PerClass602020 => "per_class_60_20_20",
            SplitProtocol::Random502525 => "random_50_25_25",
            SplitProtocol::FixedFile => "fixed_file",
        }
    }
}

impl fmt::Display for SplitProtocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SplitProtocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            SplitProtocol::PerClass602020,
            SplitProtocol::Random502525,
            SplitProtocol::FixedFile,
        ]
        .into_iter()
        .find(|p| p.as_str() == s)
        .ok_or_else(|| Error::Config(format!("unknown split protocol {s:?}")))
    }
}

/// Disjoint train/validation/test node sets, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
    pub seed: u64,
    pub protocol: SplitProtocol,
}

impl Split {
    /// Checks disjointness, range and a nonempty training set.
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.train.is_empty() {
            return Err(Error::Data("training set is empty".into()));
        }
        let mut seen = vec![false; n];
        for &i in self.train.iter().chain(&self.val).chain(&self.test) {
            if i >= n {
                return Err(Error::OutOfRange { index: i, bound: n });
            }
            if seen[i] {
                return Err(Error::Data(format!("node {i} appears in more than one split set")));
            }
            seen[i] = true;
        }
        Ok(())
    }
}

/// Draws a split. Per-class sizes are `floor(0.2·n_k)` for validation and
/// test with the remainder in training; the global protocol uses
/// `floor(0.25·n)` for validation and test.
pub fn make_split(y: &LabelVector, protocol: SplitProtocol, seed: u64) -> Result<Split> {
    let mut rng = CounterRng::new(seed, streams::SPLIT);
    let (mut train, mut val, mut test) = (Vec::new(), Vec::new(), Vec::new());
    let mut assign = |mut nodes: Vec<usize>, frac: f64, rng: &mut CounterRng| {
        rng.shuffle(&mut nodes);
        let k = (nodes.len() as f64 * frac).floor() as usize;
        val.extend_from_slice(&nodes[..k]);
        test.extend_from_slice(&nodes[k..2 * k]);
        train.extend_from_slice(&nodes[2 * k..]);
    };
    match protocol {
        SplitProtocol::PerClass602020 => {
            for members in y.class_members() {
                assign(members, 0.2, &mut rng);
            }
        }
        SplitProtocol::Random502525 => assign((0..y.len()).collect(), 0.25, &mut rng),
        SplitProtocol::FixedFile => {
            return Err(Error::Config("fixed_file splits are read from disk, not drawn".into()))
        }
    }
    for v in [&mut train, &mut val, &mut test] {
        v.sort_unstable();
    }
    let split = Split { train, val, test, seed, protocol };
    split.validate(y.len())?;
    Ok(split)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_node_balanced_sizes() {
        let y = LabelVector::new(vec![0, 0, 0, 0, 0, 1, 1, 1, 1, 1], 2).unwrap();
        let s = make_split(&y, SplitProtocol::PerClass602020, 3).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (6, 2, 2));
        for class in 0..2 {
            let count = |set: &[usize]| set.iter().filter(|&&i| y.get(i) == class).count();
            assert_eq!((count(&s.train), count(&s.val), count(&s.test)), (3, 1, 1));
        }
        assert_eq!(make_split(&y, SplitProtocol::PerClass602020, 3).unwrap(), s);
    }

    #[test]
    fn random_protocol_sizes() {
        let y = LabelVector::new(vec![0; 10], 1).unwrap();
        let s = make_split(&y, SplitProtocol::Random502525, 1).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (6, 2, 2));
    }

    #[test]
    fn overlapping_sets_rejected() {
        let s = Split {
            train: vec![0, 1],
            val: vec![1],
            test: vec![],
            seed: 0,
            protocol: SplitProtocol::FixedFile,
        };
        assert!(s.validate(3).is_err());
    }
}
