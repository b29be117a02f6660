//! Binary model checkpoints.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic      8 bytes  "TWCKPT01"
//! kind       str      model kind name, e.g. "transweight"
//! activation str      "identity" | "relu" | "tanh"
//! n, t, |V|  3 x u64
//! sections   u32      count, then per section:
//!              name str, ndim u32, dims ndim x u64, data prod(dims) x f32
//! lexicon    u32      token count (0 if absent), then count x str
//! ```
//!
//! `str` is a u32 byte length followed by UTF-8 bytes. Parameters are stored
//! as `f32`, so a checkpoint reloaded and saved again is byte-identical.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::model::lexical::Lexicon;
use crate::model::{ModelDims, ModelParams, Tensor};

const MAGIC: &[u8; 8] = b"TWCKPT01";

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: ModelParams,
    /// Words owning rows of the per-word tables, for lexicalized models.
    pub lexicon: Option<Lexicon>,
}

impl Checkpoint {
    pub fn new(params: ModelParams, lexicon: Option<Lexicon>) -> Self {
        Checkpoint { params, lexicon }
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        let p = &self.params;
        w.write_all(MAGIC)?;
        write_str(&mut w, p.kind().name())?;
        write_str(&mut w, p.activation().name())?;
        let ModelDims { n, t, vocab_size } = p.dims();
        for d in [n, t, vocab_size] {
            w.write_all(&(d as u64).to_le_bytes())?;
        }
        w.write_all(&(p.tensors().len() as u32).to_le_bytes())?;
        for tensor in p.tensors() {
            write_str(&mut w, &tensor.name)?;
            w.write_all(&(tensor.shape.len() as u32).to_le_bytes())?;
            for &d in &tensor.shape {
                w.write_all(&(d as u64).to_le_bytes())?;
            }
            let mut buf = Vec::with_capacity(tensor.data.len() * 4);
            for &x in &tensor.data {
                buf.extend_from_slice(&(x as f32).to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        let tokens = self.lexicon.as_ref().map(Lexicon::tokens).unwrap_or_default();
        w.write_all(&(tokens.len() as u32).to_le_bytes())?;
        for token in tokens {
            write_str(&mut w, token)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(|_| bad("missing header"))?;
        if &magic != MAGIC {
            return Err(bad("not a checkpoint file"));
        }
        let kind = read_str(&mut r)?.parse()?;
        let activation = read_str(&mut r)?.parse()?;
        let n = read_u64(&mut r)? as usize;
        let t = read_u64(&mut r)? as usize;
        let vocab_size = read_u64(&mut r)? as usize;

        let count = read_u32(&mut r)? as usize;
        let mut tensors = Vec::with_capacity(count.min(64));
        for _ in 0..count {
            let name = read_str(&mut r)?;
            let ndim = read_u32(&mut r)? as usize;
            if ndim > 8 {
                return Err(bad("implausible tensor rank"));
            }
            let shape = (0..ndim).map(|_| read_u64(&mut r).map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
            let len = shape.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
            let len = len.ok_or_else(|| bad("tensor too large"))?;
            let mut bytes = vec![0u8; len * 4];
            r.read_exact(&mut bytes).map_err(|_| bad("truncated tensor data"))?;
            let data = bytes.chunks_exact(4).map(|b| f64::from(f32::from_le_bytes([b[0], b[1], b[2], b[3]]))).collect();
            tensors.push(Tensor { name, shape, data });
        }

        let tokens = read_u32(&mut r)? as usize;
        let lexicon = if tokens == 0 {
            None
        } else {
            let words = (0..tokens).map(|_| read_str(&mut r)).collect::<Result<Vec<_>>>()?;
            Some(Lexicon::new(words))
        };

        let params = ModelParams::from_tensors(kind, ModelDims { n, t, vocab_size }, activation, tensors)?;
        Ok(Checkpoint { params, lexicon })
    }
}

fn bad(message: &str) -> Error {
    Error::Checkpoint(message.to_owned())
}

fn write_str<W: Write>(w: &mut W, s: &str) -> Result<()> {
    w.write_all(&(s.len() as u32).to_le_bytes())?;
    w.write_all(s.as_bytes())?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(|_| bad("truncated"))?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(|_| bad("truncated"))?;
    Ok(u64::from_le_bytes(b))
}

fn read_str<R: Read>(r: &mut R) -> Result<String> {
    let len = read_u32(r)? as usize;
    if len > 1 << 20 {
        return Err(bad("implausible string length"));
    }
    let mut b = vec![0u8; len];
    r.read_exact(&mut b).map_err(|_| bad("truncated"))?;
    String::from_utf8(b).map_err(|_| bad("string is not UTF-8"))
}
