use super::GraphDataset;
use crate::graph::{LabelVector, SparseAdjacency};
use crate::train::{Split, SplitProtocol};
use crate::{Error, Matrix, ParseError, Result};
use std::fs;
use std::path::Path;

fn numbered_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn bad(line: usize, token: &str) -> Error {
    ParseError::BadToken { line, token: token.to_string() }.into()
}

/// Imports a benchmark stored as three files: `src<TAB>dst` edge lines (a
/// non-numeric first line is taken as a header and skipped), one feature row
/// per node with comma- or whitespace-separated reals, and one integer label
/// per node. Edges are kept as listed; the class count is `max label + 1`.
pub fn import_external(edges_path: &Path, features_path: &Path, labels_path: &Path) -> Result<GraphDataset> {
    let features_text = fs::read_to_string(features_path)?;
    let mut data = Vec::new();
    let mut q = None;
    let mut n = 0;
    for (ln, l) in numbered_lines(&features_text) {
        let row = l
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| bad(ln, t)))
            .collect::<Result<Vec<_>>>()?;
        let expected = *q.get_or_insert(row.len());
        if row.len() != expected {
            return Err(ParseError::FeatureCount { line: ln, expected, found: row.len() }.into());
        }
        data.extend(row);
        n += 1;
    }

    let labels_text = fs::read_to_string(labels_path)?;
    let labels = numbered_lines(&labels_text)
        .map(|(ln, l)| l.parse::<usize>().map_err(|_| bad(ln, l)))
        .collect::<Result<Vec<_>>>()?;
    if labels.len() != n {
        return Err(Error::Data(format!(
            "{} has {} labels but {} has {n} feature rows",
            labels_path.display(),
            labels.len(),
            features_path.display()
        )));
    }
    let classes = labels.iter().max().map_or(0, |m| m + 1);

    let edges_text = fs::read_to_string(edges_path)?;
    let mut edges = Vec::new();
    for (k, (ln, l)) in numbered_lines(&edges_text).enumerate() {
        let t: Vec<&str> = l.split_whitespace().collect();
        let parsed = match t.as_slice() {
            [s, d] => s.parse::<usize>().ok().zip(d.parse::<usize>().ok()),
            _ => None,
        };
        match parsed {
            Some((s, d)) => {
                if s.max(d) >= n {
                    return Err(Error::Data(format!(
                        "{} line {ln}: node {} but only {n} nodes have features",
                        edges_path.display(),
                        s.max(d)
                    )));
                }
                edges.push((s, d));
            }
            None if k == 0 => continue,
            None => return Err(bad(ln, l)),
        }
    }
    let name = edges_path
        .parent()
        .and_then(|p| p.file_name())
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "external".into());
    let adjacency = SparseAdjacency::from_edges(&edges, n, true)?.detect_symmetry();
    let features = Matrix::from_vec(n, q.unwrap_or(0), data)?;
    GraphDataset::new(name, adjacency, features, LabelVector::new(labels, classes)?)
}

/// Reads a fixed split: one token per node, `train`/`0`, `val`/`1`,
/// `test`/`2`, or `-` for unused nodes.
pub fn read_split_file(path: &Path, n: usize, index: u64) -> Result<Split> {
    let text = fs::read_to_string(path)?;
    let mut split = Split {
        train: Vec::new(),
        val: Vec::new(),
        test: Vec::new(),
        seed: index,
        protocol: SplitProtocol::FixedFile,
    };
    let mut count = 0;
    for (node, (ln, tok)) in numbered_lines(&text).enumerate() {
        match tok {
            "train" | "0" => split.train.push(node),
            "val" | "1" => split.val.push(node),
            "test" | "2" => split.test.push(node),
            "-" => {}
            other => return Err(bad(ln, other)),
        }
        count += 1;
    }
    if count != n {
        return Err(Error::Data(format!(
            "{} assigns {count} nodes, dataset has {n}",
            path.display()
        )));
    }
    split.validate(n)?;
    Ok(split)
}
