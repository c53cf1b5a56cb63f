//! Checkpoint files.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! [0..8)        magic b"DGGANCK1"
//! [8..12)       header length H (u32)
//! [12..12+H)    UTF-8 JSON header: version, config, schema, codec, rng, tensors
//! [12+H..)      f64 tensor data in the order listed by `tensors`
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use tabgen_core::codec::FittedCodec;
use tabgen_core::gan::{Checkpoint, GanConfig, RngState, CHECKPOINT_VERSION};
use tabgen_core::kernel::{Matrix, MlpParams};
use tabgen_core::table::ColumnSpec;

use crate::error::{require_input, Error, Result};

pub const MAGIC: &[u8; 8] = b"DGGANCK1";

const NETS: [&str; 2] = ["generator", "discriminator"];
const PARTS: [&str; 4] = ["w1", "b1", "w2", "b2"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TensorEntry {
    name: String,
    rows: usize,
    cols: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    version: u32,
    config: GanConfig,
    schema: Vec<ColumnSpec>,
    codec: FittedCodec,
    rng: RngState,
    tensors: Vec<TensorEntry>,
}

fn manifest(generator: &MlpParams, discriminator: &MlpParams) -> Vec<TensorEntry> {
    let mut out = Vec::with_capacity(8);
    for (net, p) in NETS.iter().zip([generator, discriminator]) {
        let shapes = [
            (p.in_dim(), p.hidden_dim()),
            (1, p.hidden_dim()),
            (p.hidden_dim(), p.out_dim()),
            (1, p.out_dim()),
        ];
        for (part, (rows, cols)) in PARTS.iter().zip(shapes) {
            out.push(TensorEntry {
                name: format!("{net}.{part}"),
                rows,
                cols,
            });
        }
    }
    out
}

/// Serializes a checkpoint. The output depends only on the checkpoint's
/// contents.
pub fn encode_checkpoint(c: &Checkpoint) -> Result<Vec<u8>> {
    let header = Header {
        version: c.version,
        config: c.config.clone(),
        schema: c.schema.clone(),
        codec: c.codec.clone(),
        rng: c.rng.clone(),
        tensors: manifest(&c.generator, &c.discriminator),
    };
    let json = serde_json::to_vec(&header).map_err(|e| Error::json(Path::new("<checkpoint header>"), e))?;
    let len = u32::try_from(json.len())
        .map_err(|_| Error::format(Path::new("<checkpoint header>"), "header exceeds 4 GiB"))?;
    let n_values: usize = header.tensors.iter().map(|t| t.rows * t.cols).sum();
    let mut buf = Vec::with_capacity(12 + json.len() + 8 * n_values);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&len.to_le_bytes());
    buf.extend_from_slice(&json);
    for p in [&c.generator, &c.discriminator] {
        for t in p.tensors() {
            for v in t {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    Ok(buf)
}

fn truncated(path: &Path, what: &str) -> Error {
    Error::io(
        path,
        std::io::Error::new(std::io::ErrorKind::UnexpectedEof, format!("file ends inside the {what}")),
    )
}

/// Parses checkpoint bytes; `path` only labels errors.
pub fn decode_checkpoint(bytes: &[u8], path: &Path) -> Result<Checkpoint> {
    if bytes.len() < 8 {
        return Err(truncated(path, "magic"));
    }
    if &bytes[..8] != MAGIC {
        return Err(Error::format(path, "not a checkpoint (bad magic)"));
    }
    if bytes.len() < 12 {
        return Err(truncated(path, "header length"));
    }
    let len = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
    let body = &bytes[12..];
    if body.len() < len {
        return Err(truncated(path, "header"));
    }
    let header: Header = serde_json::from_slice(&body[..len]).map_err(|e| Error::json(path, e))?;
    if header.version != CHECKPOINT_VERSION {
        return Err(Error::format(
            path,
            format!("unsupported checkpoint version {} (expected {CHECKPOINT_VERSION})", header.version),
        ));
    }

    let mut data = &body[len..];
    let mut take = |entry: &TensorEntry| -> Result<Vec<f64>> {
        let n = entry.rows.checked_mul(entry.cols).ok_or_else(|| Error::format(path, "tensor too large"))?;
        let bytes = n.checked_mul(8).ok_or_else(|| Error::format(path, "tensor too large"))?;
        if data.len() < bytes {
            return Err(truncated(path, &format!("tensor `{}`", entry.name)));
        }
        let (head, rest) = data.split_at(bytes);
        data = rest;
        Ok(head
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
            .collect())
    };

    let expected: Vec<String> = NETS
        .iter()
        .flat_map(|n| PARTS.iter().map(move |p| format!("{n}.{p}")))
        .collect();
    let names: Vec<&str> = header.tensors.iter().map(|t| t.name.as_str()).collect();
    if names != expected.iter().map(String::as_str).collect::<Vec<_>>() {
        return Err(Error::format(path, format!("unexpected tensor manifest {names:?}")));
    }
    let slopes = [header.config.gen_slope, header.config.disc_slope];
    let mut nets = Vec::with_capacity(2);
    for (k, slope) in slopes.into_iter().enumerate() {
        let e = &header.tensors[4 * k..4 * k + 4];
        let w1 = Matrix::from_vec(e[0].rows, e[0].cols, take(&e[0])?)?;
        let b1 = take(&e[1])?;
        let w2 = Matrix::from_vec(e[2].rows, e[2].cols, take(&e[2])?)?;
        let b2 = take(&e[3])?;
        nets.push(MlpParams::new(w1, b1, w2, b2, slope)?);
    }
    if !data.is_empty() {
        return Err(Error::format(path, format!("{} trailing bytes after the tensors", data.len())));
    }
    let discriminator = nets.pop().expect("two nets");
    let generator = nets.pop().expect("two nets");
    let c = Checkpoint {
        version: header.version,
        config: header.config,
        schema: header.schema,
        codec: header.codec,
        generator,
        discriminator,
        rng: header.rng,
    };
    c.validate().map_err(|e| Error::format(path, e.to_string()))?;
    Ok(c)
}

pub fn save_checkpoint(c: &Checkpoint, path: &Path) -> Result<()> {
    let bytes = encode_checkpoint(c)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    require_input(path)?;
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_checkpoint(&bytes, path)
}
