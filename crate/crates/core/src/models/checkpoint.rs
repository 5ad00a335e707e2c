//! Binary checkpoint: magic `PGCK`, a version byte, the model configuration
//! as length-prefixed JSON, then named tensors with shape headers. All
//! integers and payloads are little-endian.

use super::config::ModelConfig;
use super::params::ParameterSet;
use crate::{Error, Matrix, ParseError, Result};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"PGCK";
const VERSION: u8 = 1;

/// A trained model: its configuration and parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config: ModelConfig,
    pub params: ParameterSet,
}

pub fn write_checkpoint<W: Write>(mut w: W, ck: &Checkpoint) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&[VERSION])?;
    let cfg = serde_json::to_vec(&ck.config).map_err(|e| Error::Config(e.to_string()))?;
    w.write_all(&(cfg.len() as u32).to_le_bytes())?;
    w.write_all(&cfg)?;
    w.write_all(&(ck.params.len() as u32).to_le_bytes())?;
    for (name, m) in ck.params.iter() {
        w.write_all(&(name.len() as u32).to_le_bytes())?;
        w.write_all(name.as_bytes())?;
        w.write_all(&(m.rows() as u64).to_le_bytes())?;
        w.write_all(&(m.cols() as u64).to_le_bytes())?;
        for v in m.data() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::Parse(ParseError::Truncated {
            line: 0,
            expected: "checkpoint payload".into(),
        }),
        _ => Error::Io(e),
    })
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(u64::from_le_bytes(b))
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<Checkpoint> {
    let mut magic = [0u8; 4];
    read_exact(&mut r, &mut magic)?;
    if &magic != MAGIC {
        return Err(ParseError::BadMagic { expected: "PGCK".into() }.into());
    }
    let mut version = [0u8; 1];
    read_exact(&mut r, &mut version)?;
    if version[0] != VERSION {
        return Err(ParseError::UnsupportedVersion(version[0]).into());
    }
    let cfg_len = read_u32(&mut r)? as usize;
    let mut cfg = vec![0u8; cfg_len];
    read_exact(&mut r, &mut cfg)?;
    let config: ModelConfig =
        serde_json::from_slice(&cfg).map_err(|e| Error::Data(format!("checkpoint config: {e}")))?;
    let count = read_u32(&mut r)?;
    let mut params = ParameterSet::new();
    for _ in 0..count {
        let name_len = read_u32(&mut r)? as usize;
        let mut name = vec![0u8; name_len];
        read_exact(&mut r, &mut name)?;
        let name = String::from_utf8(name).map_err(|_| Error::Data("tensor name is not UTF-8".into()))?;
        let rows = read_u64(&mut r)? as usize;
        let cols = read_u64(&mut r)? as usize;
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::Data(format!("tensor {name} too large")))?;
        let mut data = Vec::with_capacity(len.min(1 << 24));
        for _ in 0..len {
            data.push(f64::from_le_bytes(read_u64(&mut r)?.to_le_bytes()));
        }
        params.insert(name, Matrix::from_vec(rows, cols, data)?);
    }
    Ok(Checkpoint { config, params })
}

pub fn save_checkpoint(path: &Path, ck: &Checkpoint) -> Result<()> {
    write_checkpoint(BufWriter::new(File::create(path)?), ck)
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    read_checkpoint(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{init_params, Dims, ModelKind};

    #[test]
    fn round_trip_is_exact() {
        let mut config = ModelConfig::new(ModelKind::AgpcnLink);
        config.hidden = 4;
        config.l_layers = 3;
        let params = init_params(&config, Dims { nodes: 5, features: 3, classes: 2 }, 9).unwrap();
        let ck = Checkpoint { config, params };
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &ck).unwrap();
        assert_eq!(read_checkpoint(buf.as_slice()).unwrap(), ck);
        assert!(read_checkpoint(&buf[..buf.len() - 3]).is_err());
        buf[0] = b'X';
        assert!(read_checkpoint(buf.as_slice()).is_err());
    }
}
