//! Binary parameter files.
//!
//! Layout: the 8 ASCII bytes `SMAMLP01`, then `input_size`, `hidden_size`
//! and `output_size` as little-endian `u32`, then every parameter as a
//! little-endian `f64` in segment order `w_ih`, `w_hh`, `b_gates`, `w_head`,
//! `b_head` (row-major within each matrix).

use std::path::Path;

use super::{LstmShape, ModelParams};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"SMAMLP01";

pub fn params_to_bytes(params: &ModelParams) -> Vec<u8> {
    let s = params.shape();
    let mut out = Vec::with_capacity(20 + 8 * params.len());
    out.extend_from_slice(MAGIC);
    for d in [s.input_size, s.hidden_size, s.output_size] {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for v in params.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn params_from_bytes(bytes: &[u8]) -> Result<ModelParams> {
    if bytes.len() < 20 || &bytes[..8] != MAGIC {
        return Err(Error::Checkpoint("missing SMAMLP01 header".into()));
    }
    let dim = |i: usize| u32::from_le_bytes(bytes[8 + 4 * i..12 + 4 * i].try_into().expect("4 bytes")) as usize;
    let shape = LstmShape::new(dim(0), dim(1), dim(2)).map_err(|e| Error::Checkpoint(e.to_string()))?;
    let body = &bytes[20..];
    if body.len() != 8 * shape.param_count() {
        return Err(Error::Checkpoint(format!(
            "expected {} parameter bytes for {shape:?}, found {}",
            8 * shape.param_count(),
            body.len()
        )));
    }
    let data = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    ModelParams::from_vec(shape, data).map_err(|e| Error::Checkpoint(e.to_string()))
}

pub fn save_params(path: &Path, params: &ModelParams) -> Result<()> {
    std::fs::write(path, params_to_bytes(params)).map_err(|e| Error::io(path, e))
}

pub fn load_params(path: &Path) -> Result<ModelParams> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    params_from_bytes(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let p = ModelParams::init(LstmShape::new(1, 5, 3).unwrap(), 11);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.bin");
        save_params(&path, &p).unwrap();
        assert_eq!(load_params(&path).unwrap(), p);
    }

    #[test]
    fn header_layout() {
        let p = ModelParams::zeros(LstmShape::new(2, 1, 3).unwrap());
        let b = params_to_bytes(&p);
        assert_eq!(&b[..8], b"SMAMLP01");
        assert_eq!(&b[8..20], &[2, 0, 0, 0, 1, 0, 0, 0, 3, 0, 0, 0]);
        assert_eq!(b.len(), 20 + 8 * p.len());
    }

    #[test]
    fn corrupt_files_rejected() {
        let p = ModelParams::zeros(LstmShape::new(1, 2, 1).unwrap());
        let mut b = params_to_bytes(&p);
        assert!(params_from_bytes(&b[..b.len() - 1]).is_err());
        b[0] = b'X';
        assert!(matches!(params_from_bytes(&b), Err(Error::Checkpoint(_))));
    }
}
