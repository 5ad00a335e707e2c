use super::{adjacency_from_file, GraphDataset};
use crate::graph::LabelVector;
use crate::{Error, Matrix, ParseError, Result};
use std::io::{Read, Write};

const MAGIC: &[u8; 4] = b"PGCN";
const VERSION: u8 = 1;

/// Reads little-endian words, counting records for error positions.
struct Words<R> {
    inner: R,
    record: usize,
}

impl<R: Read> Words<R> {
    fn u64(&mut self, what: &str) -> Result<u64> {
        let mut b = [0u8; 8];
        self.inner.read_exact(&mut b).map_err(|e| match e.kind() {
            std::io::ErrorKind::UnexpectedEof => Error::Parse(ParseError::Truncated {
                line: self.record,
                expected: what.to_string(),
            }),
            _ => Error::Io(e),
        })?;
        self.record += 1;
        Ok(u64::from_le_bytes(b))
    }

    fn usize(&mut self, what: &str) -> Result<usize> {
        let v = self.u64(what)?;
        usize::try_from(v).map_err(|_| {
            ParseError::BadToken { line: self.record, token: v.to_string() }.into()
        })
    }
}

pub fn read_binary<R: Read>(mut reader: R, name: &str) -> Result<GraphDataset> {
    let mut magic = [0u8; 5];
    reader.read_exact(&mut magic).map_err(|_| ParseError::BadMagic { expected: "PGCN".into() })?;
    if &magic[..4] != MAGIC {
        return Err(ParseError::BadMagic { expected: "PGCN".into() }.into());
    }
    if magic[4] != VERSION {
        return Err(ParseError::UnsupportedVersion(magic[4]).into());
    }
    let mut w = Words { inner: reader, record: 0 };
    let n = w.usize("node count")?;
    let m = w.usize("edge count")?;
    let c = w.usize("class count")?;
    let q = w.usize("feature dimension")?;
    if n == 0 || c == 0 {
        return Err(ParseError::MalformedHeader {
            line: 0,
            msg: "node and class counts must be positive".into(),
        }
        .into());
    }
    let mut edges = Vec::with_capacity(m.min(1 << 24));
    for _ in 0..m {
        let rec = w.record;
        let (s, d) = (w.usize("edge source")?, w.usize("edge target")?);
        for idx in [s, d] {
            if idx >= n {
                return Err(ParseError::EdgeOutOfRange { line: rec, index: idx, n }.into());
            }
        }
        edges.push((s, d));
    }
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let rec = w.record;
        let label = w.usize("label")?;
        if label >= c {
            return Err(ParseError::LabelOutOfRange { line: rec, label, classes: c }.into());
        }
        labels.push(label);
    }
    let len = n
        .checked_mul(q)
        .ok_or_else(|| Error::Data("feature matrix too large".into()))?;
    let mut data = Vec::with_capacity(len.min(1 << 24));
    for _ in 0..len {
        data.push(f64::from_bits(w.u64("feature value")?));
    }
    let features = Matrix::from_vec(n, q, data)?;
    GraphDataset::new(name, adjacency_from_file(&edges, n)?, features, LabelVector::new(labels, c)?)
}

pub fn write_binary<W: Write>(mut w: W, ds: &GraphDataset) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&[VERSION])?;
    let edges = ds.edges();
    for v in [ds.num_nodes(), edges.len(), ds.num_classes(), ds.num_features()] {
        w.write_all(&(v as u64).to_le_bytes())?;
    }
    for (s, d) in edges {
        w.write_all(&(s as u64).to_le_bytes())?;
        w.write_all(&(d as u64).to_le_bytes())?;
    }
    for &l in ds.labels.labels() {
        w.write_all(&(l as u64).to_le_bytes())?;
    }
    for v in ds.features.data() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush().map_err(Error::from)
}
