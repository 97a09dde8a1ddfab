//! Training examples, the per-iteration replay buffer, and the on-disk
//! example format.
//!
//! Example file layout (all integers little-endian):
//!
//! ```text
//! magic    4 bytes  "WSEX"
//! version  u32      1
//! game     u8       0 othello, 1 connect4, 2 gobang
//! size     u8       board size
//! reserved u16      0
//! count    u32      number of records
//! records  count x { len u32, plane size*size x i8, pi action_size x f32, z i8 }
//! ```

use std::collections::VecDeque;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::game::{GameKind, StateEncoding};

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingExample {
    pub encoding: StateEncoding,
    pub pi: Vec<f32>,
    /// Final result from the perspective of the side to move in `encoding`.
    pub z: f32,
}

/// Holds the examples of the last `capacity` iterations, one batch per
/// iteration; the oldest batch is evicted first.
#[derive(Clone, Debug, Default)]
pub struct ReplayBuffer {
    capacity: usize,
    batches: VecDeque<Vec<TrainingExample>>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        ReplayBuffer {
            capacity: capacity.max(1),
            batches: VecDeque::new(),
        }
    }

    pub fn append(&mut self, examples: Vec<TrainingExample>) {
        self.batches.push_back(examples);
        while self.batches.len() > self.capacity {
            self.batches.pop_front();
        }
    }

    pub fn num_batches(&self) -> usize {
        self.batches.len()
    }

    pub fn len(&self) -> usize {
        self.batches.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &TrainingExample> {
        self.batches.iter().flatten()
    }

    /// Every retained example in a uniformly shuffled order.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<&TrainingExample> {
        let mut all: Vec<&TrainingExample> = self.iter().collect();
        all.shuffle(rng);
        all
    }
}

const MAGIC: &[u8; 4] = b"WSEX";
const VERSION: u32 = 1;

pub fn write_examples(path: &Path, kind: GameKind, size: usize, examples: &[TrainingExample]) -> Result<()> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(kind.code());
    out.push(size as u8);
    out.extend_from_slice(&0u16.to_le_bytes());
    out.extend_from_slice(&(examples.len() as u32).to_le_bytes());
    for ex in examples {
        let len = ex.encoding.plane.len() + 4 * ex.pi.len() + 1;
        out.extend_from_slice(&(len as u32).to_le_bytes());
        out.extend(ex.encoding.plane.iter().map(|&v| v as u8));
        for p in &ex.pi {
            out.extend_from_slice(&p.to_le_bytes());
        }
        out.push(ex.z as i8 as u8);
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_examples(path: &Path, kind: GameKind, size: usize) -> Result<Vec<TrainingExample>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let corrupt = |reason: &str| Error::CorruptCheckpoint {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };
    if bytes.len() < 16 || &bytes[..4] != MAGIC {
        return Err(corrupt("bad example-file header"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(corrupt(&format!("unsupported version {version}")));
    }
    if GameKind::from_code(bytes[8]) != Some(kind) || bytes[9] as usize != size {
        return Err(Error::CheckpointMismatch {
            path: path.to_path_buf(),
            reason: format!("examples are not for {kind} {size}x{size}"),
        });
    }
    let count = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let cells = size * size;
    let actions = kind.action_size(size);
    let expected = cells + 4 * actions + 1;
    let mut at = 16;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        if at + 4 > bytes.len() {
            return Err(corrupt("truncated record header"));
        }
        let len = u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize;
        at += 4;
        if len != expected || at + len > bytes.len() {
            return Err(corrupt("truncated or mis-sized record"));
        }
        let rec = &bytes[at..at + len];
        let plane = rec[..cells].iter().map(|&b| b as i8).collect();
        let pi = rec[cells..cells + 4 * actions]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let z = rec[len - 1] as i8 as f32;
        out.push(TrainingExample {
            encoding: StateEncoding { size, plane },
            pi,
            z,
        });
        at += len;
    }
    if at != bytes.len() {
        return Err(corrupt("trailing bytes after last record"));
    }
    Ok(out)
}
