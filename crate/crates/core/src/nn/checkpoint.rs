//! Model checkpoints.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic     4 bytes  "WSCK"
//! version   u32      1
//! game      u8       0 othello, 1 connect4, 2 gobang
//! size      u8       board size
//! reserved  u16      0
//! channels  u32
//! hidden    u32
//! arch      u64      first 8 bytes of SHA-256 over the architecture description
//! tensors   u32      12
//! then per tensor, in declaration order:
//!   len     u32      number of values
//!   data    len x f32
//! ```

use std::fs;
use std::path::Path;

use super::network::{Model, NetShape, NUM_TENSORS};
use crate::error::{Error, Result};
use crate::game::GameKind;

const MAGIC: &[u8; 4] = b"WSCK";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 32;

pub fn encode_checkpoint(model: &Model) -> Vec<u8> {
    let shape = model.shape();
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * model.num_params() + 4 * NUM_TENSORS);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.push(shape.kind.code());
    out.push(shape.size as u8);
    out.extend_from_slice(&0u16.to_le_bytes());
    out.extend_from_slice(&(shape.channels as u32).to_le_bytes());
    out.extend_from_slice(&(shape.hidden as u32).to_le_bytes());
    out.extend_from_slice(&shape.hash().to_le_bytes());
    out.extend_from_slice(&(NUM_TENSORS as u32).to_le_bytes());
    for t in model.params() {
        out.extend_from_slice(&(t.len() as u32).to_le_bytes());
        for x in t {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

pub fn save_checkpoint(model: &Model, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, encode_checkpoint(model)).map_err(|e| Error::io(path, e))
}

/// Loads a checkpoint; with `expected` set, the stored game, board size and
/// architecture hash must all match it.
pub fn load_checkpoint(path: &Path, expected: Option<&NetShape>) -> Result<Model> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_checkpoint(&bytes, expected).map_err(|e| match e {
        Error::CorruptCheckpoint { reason, .. } => Error::CorruptCheckpoint {
            path: path.to_path_buf(),
            reason,
        },
        Error::CheckpointMismatch { reason, .. } => Error::CheckpointMismatch {
            path: path.to_path_buf(),
            reason,
        },
        other => other,
    })
}

pub fn decode_checkpoint(bytes: &[u8], expected: Option<&NetShape>) -> Result<Model> {
    let corrupt = |reason: String| Error::CorruptCheckpoint {
        path: Default::default(),
        reason,
    };
    if bytes.len() < HEADER_LEN {
        return Err(corrupt(format!("{} bytes is shorter than the header", bytes.len())));
    }
    if &bytes[..4] != MAGIC {
        return Err(corrupt("bad magic".into()));
    }
    let u32_at = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
    let version = u32_at(4);
    if version != FORMAT_VERSION {
        return Err(corrupt(format!("unsupported format version {version}")));
    }
    let kind = GameKind::from_code(bytes[8]).ok_or_else(|| corrupt(format!("unknown game code {}", bytes[8])))?;
    let size = bytes[9] as usize;
    let shape = NetShape::with_widths(kind, size, u32_at(12) as usize, u32_at(16) as usize);
    let hash = u64::from_le_bytes(bytes[20..28].try_into().unwrap());
    if hash != shape.hash() {
        return Err(corrupt("architecture hash does not match header fields".into()));
    }
    if let Some(want) = expected {
        if want.kind != kind || want.size != size || want.hash() != hash {
            return Err(Error::CheckpointMismatch {
                path: Default::default(),
                reason: format!(
                    "checkpoint holds {} but {} was expected",
                    shape.describe(),
                    want.describe()
                ),
            });
        }
    }
    let count = u32_at(28) as usize;
    if count != NUM_TENSORS {
        return Err(corrupt(format!("{count} tensors, expected {NUM_TENSORS}")));
    }
    let mut at = HEADER_LEN;
    let mut params = Vec::with_capacity(NUM_TENSORS);
    for (rows, cols) in shape.tensor_shapes() {
        if at + 4 > bytes.len() {
            return Err(corrupt("truncated tensor header".into()));
        }
        let len = u32_at(at) as usize;
        at += 4;
        if len != rows * cols {
            return Err(corrupt(format!("tensor of {len} values, expected {}", rows * cols)));
        }
        if at + 4 * len > bytes.len() {
            return Err(corrupt("truncated tensor data".into()));
        }
        params.push(
            bytes[at..at + 4 * len]
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                .collect(),
        );
        at += 4 * len;
    }
    if at != bytes.len() {
        return Err(corrupt("trailing bytes after last tensor".into()));
    }
    Model::from_params(shape, params)
}
