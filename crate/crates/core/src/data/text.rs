use super::{adjacency_from_file, GraphDataset};
use crate::graph::LabelVector;
use crate::{Error, Matrix, ParseError, Result};
use std::io::{BufRead, Write};
use std::str::FromStr;

/// Non-blank lines paired with their 1-based line numbers.
struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn next(&mut self, expected: &str) -> Result<(usize, String)> {
        loop {
            match self.inner.next() {
                None => {
                    return Err(ParseError::Truncated {
                        line: self.line + 1,
                        expected: expected.to_string(),
                    }
                    .into())
                }
                Some(l) => {
                    self.line += 1;
                    let l = l?;
                    if !l.trim().is_empty() {
                        return Ok((self.line, l));
                    }
                }
            }
        }
    }
}

fn token<T: FromStr>(line: usize, tok: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| ParseError::BadToken { line, token: tok.to_string() }.into())
}

pub fn read_text<R: BufRead>(reader: R, name: &str) -> Result<GraphDataset> {
    let mut lines = Lines { inner: reader.lines(), line: 0 };
    let (hl, header) = lines.next("header `N M C`")?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 3 {
        return Err(ParseError::MalformedHeader {
            line: hl,
            msg: format!("expected 3 fields `N M C`, found {}", parts.len()),
        }
        .into());
    }
    let parse = |t: &str| {
        t.parse::<usize>().map_err(|_| ParseError::MalformedHeader {
            line: hl,
            msg: format!("{t:?} is not a non-negative integer"),
        })
    };
    let (n, m, c) = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
    if n == 0 || c == 0 {
        return Err(ParseError::MalformedHeader {
            line: hl,
            msg: "node and class counts must be positive".into(),
        }
        .into());
    }

    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let (ln, l) = lines.next("edge `src dst`")?;
        let t: Vec<&str> = l.split_whitespace().collect();
        if t.len() != 2 {
            return Err(ParseError::BadToken { line: ln, token: l.trim().to_string() }.into());
        }
        let (s, d): (usize, usize) = (token(ln, t[0])?, token(ln, t[1])?);
        for idx in [s, d] {
            if idx >= n {
                return Err(ParseError::EdgeOutOfRange { line: ln, index: idx, n }.into());
            }
        }
        edges.push((s, d));
    }

    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let (ln, l) = lines.next("label")?;
        let t = l.trim();
        let label: usize = token(ln, t)?;
        if label >= c {
            return Err(ParseError::LabelOutOfRange { line: ln, label, classes: c }.into());
        }
        labels.push(label);
    }

    let mut data = Vec::new();
    let mut q = None;
    for _ in 0..n {
        let (ln, l) = lines.next("feature row")?;
        let row = l
            .split_whitespace()
            .map(|t| token::<f64>(ln, t))
            .collect::<Result<Vec<_>>>()?;
        let expected = *q.get_or_insert(row.len());
        if row.len() != expected {
            return Err(ParseError::FeatureCount { line: ln, expected, found: row.len() }.into());
        }
        if let Some(bad) = row.iter().find(|v| !v.is_finite()) {
            return Err(ParseError::BadToken { line: ln, token: bad.to_string() }.into());
        }
        data.extend(row);
    }
    let features = Matrix::from_vec(n, q.unwrap_or(0), data)?;
    let adjacency = adjacency_from_file(&edges, n)?;
    let labels = LabelVector::new(labels, c)?;
    GraphDataset::new(name, adjacency, features, labels)
}

/// Writes reals in shortest round-trip form, so reading back is exact.
pub fn write_text<W: Write>(mut w: W, ds: &GraphDataset) -> Result<()> {
    let edges = ds.edges();
    writeln!(w, "{} {} {}", ds.num_nodes(), edges.len(), ds.num_classes())?;
    for (s, d) in edges {
        writeln!(w, "{s} {d}")?;
    }
    for &l in ds.labels.labels() {
        writeln!(w, "{l}")?;
    }
    for i in 0..ds.num_nodes() {
        let row: Vec<String> = ds.features.row(i).iter().map(f64::to_string).collect();
        writeln!(w, "{}", row.join(" "))?;
    }
    w.flush().map_err(Error::from)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_NODES: &str = "2 2 2\n0 1\n1 0\n0\n1\n0.5 -1\n2.25 3e-7\n";

    #[test]
    fn handcrafted_round_trip() {
        let ds = read_text(TWO_NODES.as_bytes(), "tiny").unwrap();
        assert_eq!(ds.adjacency.nnz(), 2);
        assert!(ds.adjacency.symmetric_hint());
        assert_eq!(ds.features.row(1), &[2.25, 3e-7]);
        let mut buf = Vec::new();
        write_text(&mut buf, &ds).unwrap();
        assert_eq!(read_text(buf.as_slice(), "tiny").unwrap(), ds);
    }

    fn parse_err(src: &str) -> ParseError {
        match read_text(src.as_bytes(), "x") {
            Err(Error::Parse(e)) => e,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn errors_name_their_line() {
        assert!(matches!(parse_err("2 1\n"), ParseError::MalformedHeader { line: 1, .. }));
        assert!(matches!(parse_err("2 1 2\n0 1\n0\n"), ParseError::Truncated { line: 4, .. }));
        assert!(matches!(parse_err("2 1 2\n0 5\n"), ParseError::EdgeOutOfRange { line: 2, index: 5, .. }));
        assert!(matches!(parse_err("2 1 2\n0 1\n0\n2\n"), ParseError::LabelOutOfRange { line: 4, label: 2, .. }));
        assert!(matches!(
            parse_err("2 1 2\n0 1\n0\n1\n1 2\n3\n"),
            ParseError::FeatureCount { line: 6, expected: 2, found: 1 }
        ));
        assert!(matches!(parse_err("2 1 2\n0 x\n"), ParseError::BadToken { line: 2, .. }));
    }
}
