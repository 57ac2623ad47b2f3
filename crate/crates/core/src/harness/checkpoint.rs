//! Model checkpoints.
//!
//! Binary layout (all integers and reals little-endian):
//!
//! ```text
//! magic     8 bytes  "NPSETCKP"
//! version   u32      = 1
//! method    u32 length + UTF-8 bytes
//! epoch     u64
//! dims      4 x u32  (n_features, h1, h2, n_classes)
//! 3 layer blocks:
//!   kind    u8       0 = sparse, 1 = dense
//!   n_in    u32
//!   n_out   u32
//!   sparse: nnz u64, then nnz x (row u32, col u32, weight f64)
//!   dense:  n_in * n_out x f64, row-major
//!   bias    n_out x f64
//! ```
//!
//! The text variant carries the same fields line by line and prints reals in
//! shortest round-trip form, so both formats reload bit-exactly. Momentum
//! buffers are not stored; a loaded model starts with zero velocity.

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::{Array1, Array2};

use super::config::CheckpointFormat;
use crate::error::{Error, Result};
use crate::network::{Dims, SparseMlp};
use crate::sparse::{Connection, DenseLayer, Layer, SparseLayer};

const MAGIC: &[u8; 8] = b"NPSETCKP";
const TEXT_MAGIC: &str = "NPSET-CHECKPOINT-TEXT";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckpointMeta {
    pub method: String,
    pub epoch: u64,
}

pub fn save_checkpoint(
    model: &SparseMlp,
    meta: &CheckpointMeta,
    path: impl AsRef<Path>,
    format: CheckpointFormat,
) -> Result<()> {
    let path = path.as_ref();
    let bytes = match format {
        CheckpointFormat::Binary => encode_binary(model, meta),
        CheckpointFormat::Text => encode_text(model, meta).into_bytes(),
    };
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&bytes).map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Loads either format, detected from the leading bytes.
pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<(SparseMlp, CheckpointMeta)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(MAGIC) {
        decode_binary(&bytes)
    } else if bytes.starts_with(TEXT_MAGIC.as_bytes()) {
        let text = std::str::from_utf8(&bytes)
            .map_err(|_| Error::Checkpoint("text checkpoint is not UTF-8".into()))?;
        decode_text(text)
    } else {
        Err(Error::Checkpoint(format!(
            "{}: unrecognized checkpoint header",
            path.display()
        )))
    }
}

pub fn encode_binary(model: &SparseMlp, meta: &CheckpointMeta) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(meta.method.len() as u32).to_le_bytes());
    out.extend_from_slice(meta.method.as_bytes());
    out.extend_from_slice(&meta.epoch.to_le_bytes());
    let d = model.dims();
    for v in [d.n_features, d.h1, d.h2, d.n_classes] {
        out.extend_from_slice(&(v as u32).to_le_bytes());
    }
    for layer in model.layers() {
        let (n_in, n_out) = (layer.n_in() as u32, layer.n_out() as u32);
        match layer {
            Layer::Sparse(l) => {
                out.push(0);
                out.extend_from_slice(&n_in.to_le_bytes());
                out.extend_from_slice(&n_out.to_le_bytes());
                out.extend_from_slice(&(l.nnz() as u64).to_le_bytes());
                for c in l.connections() {
                    out.extend_from_slice(&c.row.to_le_bytes());
                    out.extend_from_slice(&c.col.to_le_bytes());
                    out.extend_from_slice(&c.weight.to_le_bytes());
                }
            }
            Layer::Dense(l) => {
                out.push(1);
                out.extend_from_slice(&n_in.to_le_bytes());
                out.extend_from_slice(&n_out.to_le_bytes());
                for w in l.weights().iter() {
                    out.extend_from_slice(&w.to_le_bytes());
                }
            }
        }
        for b in layer.bias() {
            out.extend_from_slice(&b.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::Checkpoint(format!("truncated at byte {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        (0..n).map(|_| self.f64()).collect()
    }
}

pub fn decode_binary(bytes: &[u8]) -> Result<(SparseMlp, CheckpointMeta)> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let len = r.u32()? as usize;
    let method = String::from_utf8(r.take(len)?.to_vec())
        .map_err(|_| Error::Checkpoint("method name is not UTF-8".into()))?;
    let epoch = r.u64()?;
    let dims = Dims::new(
        r.u32()? as usize,
        r.u32()? as usize,
        r.u32()? as usize,
        r.u32()? as usize,
    );
    let mut layers = Vec::with_capacity(3);
    for _ in 0..3 {
        let kind = r.u8()?;
        let n_in = r.u32()? as usize;
        let n_out = r.u32()? as usize;
        let layer = match kind {
            0 => {
                let nnz = r.u64()? as usize;
                if nnz > n_in.saturating_mul(n_out) {
                    return Err(Error::Checkpoint(format!("nnz {nnz} exceeds layer capacity")));
                }
                let conns = (0..nnz)
                    .map(|_| Ok(Connection::new(r.u32()?, r.u32()?, r.f64()?)))
                    .collect::<Result<Vec<_>>>()?;
                let bias = r.f64s(n_out)?;
                Layer::Sparse(SparseLayer::from_connections(n_in, n_out, conns, bias)?)
            }
            1 => {
                let w = r.f64s(n_in.saturating_mul(n_out))?;
                let bias = r.f64s(n_out)?;
                let w = Array2::from_shape_vec((n_in, n_out), w)
                    .map_err(|e| Error::Checkpoint(e.to_string()))?;
                Layer::Dense(DenseLayer::new(w, Array1::from(bias))?)
            }
            k => return Err(Error::Checkpoint(format!("unknown layer kind {k}"))),
        };
        layers.push(layer);
    }
    if r.pos != bytes.len() {
        return Err(Error::Checkpoint(format!(
            "{} trailing bytes",
            bytes.len() - r.pos
        )));
    }
    finish(layers, dims, CheckpointMeta { method, epoch })
}

fn finish(layers: Vec<Layer>, dims: Dims, meta: CheckpointMeta) -> Result<(SparseMlp, CheckpointMeta)> {
    let layers: [Layer; 3] = layers
        .try_into()
        .map_err(|_| Error::Checkpoint("expected three layers".into()))?;
    let model = SparseMlp::from_layers(layers)?;
    if model.dims() != dims {
        return Err(Error::Checkpoint(format!(
            "header dims {dims} disagree with layer dims {}",
            model.dims()
        )));
    }
    Ok((model, meta))
}

pub fn encode_text(model: &SparseMlp, meta: &CheckpointMeta) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    let d = model.dims();
    let _ = writeln!(out, "{TEXT_MAGIC} {VERSION}");
    let _ = writeln!(out, "method {}", meta.method);
    let _ = writeln!(out, "epoch {}", meta.epoch);
    let _ = writeln!(out, "dims {} {} {} {}", d.n_features, d.h1, d.h2, d.n_classes);
    for layer in model.layers() {
        match layer {
            Layer::Sparse(l) => {
                let _ = writeln!(out, "layer sparse {} {} {}", l.n_in(), l.n_out(), l.nnz());
                for c in l.connections() {
                    let _ = writeln!(out, "{} {} {}", c.row, c.col, c.weight);
                }
            }
            Layer::Dense(l) => {
                let _ = writeln!(out, "layer dense {} {}", l.n_in(), l.n_out());
                for row in l.weights().rows() {
                    let cells: Vec<String> = row.iter().map(f64::to_string).collect();
                    let _ = writeln!(out, "{}", cells.join(" "));
                }
            }
        }
        let bias: Vec<String> = layer.bias().iter().map(f64::to_string).collect();
        let _ = writeln!(out, "bias {}", bias.join(" "));
    }
    out
}

pub fn decode_text(text: &str) -> Result<(SparseMlp, CheckpointMeta)> {
    let mut lines = text.lines().enumerate();
    let mut next = |what: &str| -> Result<(usize, Vec<&str>)> {
        lines
            .next()
            .map(|(i, l)| (i + 1, l.split_whitespace().collect()))
            .ok_or_else(|| Error::Checkpoint(format!("unexpected end of file, expected {what}")))
    };
    fn num<T: std::str::FromStr>(line: usize, s: Option<&&str>) -> Result<T> {
        s.and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Checkpoint(format!("line {line}: malformed number")))
    }
    fn expect(line: usize, tok: &[&str], key: &str) -> Result<()> {
        if tok.first() != Some(&key) {
            return Err(Error::Checkpoint(format!("line {line}: expected `{key}`")));
        }
        Ok(())
    }

    let (l, tok) = next("header")?;
    expect(l, &tok, TEXT_MAGIC)?;
    if num::<u32>(l, tok.get(1))? != VERSION {
        return Err(Error::Checkpoint("unsupported text version".into()));
    }
    let (l, tok) = next("method")?;
    expect(l, &tok, "method")?;
    let method = tok.get(1).copied().unwrap_or_default().to_string();
    let (l, tok) = next("epoch")?;
    expect(l, &tok, "epoch")?;
    let epoch = num(l, tok.get(1))?;
    let (l, tok) = next("dims")?;
    expect(l, &tok, "dims")?;
    let dims = Dims::new(
        num(l, tok.get(1))?,
        num(l, tok.get(2))?,
        num(l, tok.get(3))?,
        num(l, tok.get(4))?,
    );

    let mut layers = Vec::new();
    for _ in 0..3 {
        let (l, tok) = next("layer")?;
        expect(l, &tok, "layer")?;
        let n_in: usize = num(l, tok.get(2))?;
        let n_out: usize = num(l, tok.get(3))?;
        let parse_bias = |l: usize, tok: &[&str]| -> Result<Vec<f64>> {
            expect(l, tok, "bias")?;
            if tok.len() != n_out + 1 {
                return Err(Error::Checkpoint(format!("line {l}: expected {n_out} biases")));
            }
            tok[1..].iter().map(|s| num(l, Some(s))).collect()
        };
        let layer = match tok.get(1).copied() {
            Some("sparse") => {
                let nnz: usize = num(l, tok.get(4))?;
                let mut conns = Vec::with_capacity(nnz);
                for _ in 0..nnz {
                    let (l, t) = next("connection")?;
                    conns.push(Connection::new(
                        num(l, t.first())?,
                        num(l, t.get(1))?,
                        num(l, t.get(2))?,
                    ));
                }
                let (l, t) = next("bias")?;
                let bias = parse_bias(l, &t)?;
                Layer::Sparse(SparseLayer::from_connections(n_in, n_out, conns, bias)?)
            }
            Some("dense") => {
                let mut w = Vec::with_capacity(n_in * n_out);
                for _ in 0..n_in {
                    let (l, t) = next("weight row")?;
                    if t.len() != n_out {
                        return Err(Error::Checkpoint(format!("line {l}: expected {n_out} weights")));
                    }
                    for s in &t {
                        w.push(num(l, Some(s))?);
                    }
                }
                let (l, t) = next("bias")?;
                let bias = parse_bias(l, &t)?;
                let w = Array2::from_shape_vec((n_in, n_out), w)
                    .map_err(|e| Error::Checkpoint(e.to_string()))?;
                Layer::Dense(DenseLayer::new(w, Array1::from(bias))?)
            }
            _ => return Err(Error::Checkpoint(format!("line {l}: unknown layer kind"))),
        };
        layers.push(layer);
    }
    finish(layers, dims, CheckpointMeta { method, epoch })
}
