//! Binary checkpoint layout (all integers and floats little-endian):
//!
//! ```text
//! magic   b"EVOGANCK"
//! u32     version (1)
//! u8      kind: 0 = discriminator, 1 = generator
//! u32     layer count
//! layer*  u8 activation (0 identity, 1 relu, 2 leaky relu), f64 leak,
//!         matrix weight, matrix bias
//! matrix  heads (discriminator only)
//! matrix: u32 rows, u32 cols, rows*cols f64 row-major
//! ```
//!
//! Values are stored as raw IEEE-754 bits, so a save/load round trip is
//! bit-exact.

use std::fs;
use std::path::Path;

use super::{Activation, Dense, Discriminator, Generator};
use crate::error::{Error, Result};
use crate::tensor::Matrix;

const MAGIC: &[u8; 8] = b"EVOGANCK";
const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub enum Checkpoint {
    Discriminator(Discriminator),
    Generator(Generator),
}

pub fn save_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<()> {
    fs::write(path, encode(ckpt)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes).map_err(|detail| Error::Format {
        path: path.to_path_buf(),
        detail,
    })
}

pub fn encode(ckpt: &Checkpoint) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    let (kind, layers, heads) = match ckpt {
        Checkpoint::Discriminator(d) => (0u8, &d.phi, Some(&d.heads)),
        Checkpoint::Generator(g) => (1u8, &g.layers, None),
    };
    out.push(kind);
    out.extend_from_slice(&(layers.len() as u32).to_le_bytes());
    for layer in layers {
        let (tag, leak) = match layer.activation {
            Activation::Identity => (0u8, 0.0),
            Activation::Relu => (1, 0.0),
            Activation::LeakyRelu(a) => (2, a),
        };
        out.push(tag);
        out.extend_from_slice(&leak.to_le_bytes());
        put_matrix(&mut out, &layer.weight);
        put_matrix(&mut out, &layer.bias);
    }
    if let Some(h) = heads {
        put_matrix(&mut out, h);
    }
    out
}

pub fn decode(bytes: &[u8]) -> std::result::Result<Checkpoint, String> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err("bad magic".into());
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(format!("unsupported version {version}"));
    }
    let kind = r.u8()?;
    let count = r.u32()? as usize;
    let mut layers = Vec::with_capacity(count.min(1024));
    for _ in 0..count {
        let tag = r.u8()?;
        let leak = r.f64()?;
        let activation = match tag {
            0 => Activation::Identity,
            1 => Activation::Relu,
            2 => Activation::LeakyRelu(leak),
            t => return Err(format!("unknown activation tag {t}")),
        };
        let weight = r.matrix()?;
        let bias = r.matrix()?;
        layers.push(Dense {
            weight,
            bias,
            activation,
        });
    }
    let ckpt = match kind {
        0 => {
            let heads = r.matrix()?;
            Checkpoint::Discriminator(Discriminator::new(layers, heads).map_err(|e| e.to_string())?)
        }
        1 => Checkpoint::Generator(Generator::new(layers).map_err(|e| e.to_string())?),
        k => return Err(format!("unknown checkpoint kind {k}")),
    };
    if r.pos != bytes.len() {
        return Err(format!("{} trailing bytes", bytes.len() - r.pos));
    }
    Ok(ckpt)
}

fn put_matrix(out: &mut Vec<u8>, m: &Matrix) {
    out.extend_from_slice(&(m.rows() as u32).to_le_bytes());
    out.extend_from_slice(&(m.cols() as u32).to_le_bytes());
    for v in m.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> std::result::Result<&'a [u8], String> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| format!("truncated at byte {}", self.pos))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> std::result::Result<u8, String> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> std::result::Result<u32, String> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> std::result::Result<f64, String> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn matrix(&mut self) -> std::result::Result<Matrix, String> {
        let rows = self.u32()? as usize;
        let cols = self.u32()? as usize;
        let n = rows.checked_mul(cols).ok_or("matrix size overflow")?;
        let raw = self.take(n.checked_mul(8).ok_or("matrix size overflow")?)?;
        let data = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Matrix::from_vec(rows, cols, data).map_err(|e| e.to_string())
    }
}
