//! Flat little-endian binary layout for sparse matrices.
//!
//! ```text
//! offset  size  field
//!      0     4  magic "HTSP"
//!      4     1  version (1)
//!      5     1  kind (see `MatrixKind`)
//!      6     1  init mode (0 random, 1 rule-based)
//!      7     1  reserved, 0
//!      8     4  rows (u32)
//!     12     4  cols (u32)
//!     16     8  seed (u64)
//!     24     8  entry count n (u64)
//!     32  16*n  entries: row u32, col u32, value f64 bits
//! ```
//!
//! Entries are strictly ascending by `(row, col)`. Absent entries are zero.
//! Several sections may be concatenated in one file.

use alloc::vec::Vec;

use crate::config::InitMode;
use crate::error::{Error, Result};
use crate::synapse::{ConnectionMatrix, PermanenceMatrix};

pub const MAGIC: &[u8; 4] = b"HTSP";
pub const VERSION: u8 = 1;
const HEADER_LEN: usize = 32;
const ENTRY_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum MatrixKind {
    Permanence = 0,
    Connection = 1,
    /// Per-pixel bits of an encoded image.
    PixelBits = 2,
    /// Per-block activations of an encoded image.
    BlockBits = 3,
}

impl MatrixKind {
    fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            0 => MatrixKind::Permanence,
            1 => MatrixKind::Connection,
            2 => MatrixKind::PixelBits,
            3 => MatrixKind::BlockBits,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlatMatrix {
    pub kind: MatrixKind,
    pub mode: InitMode,
    pub rows: u32,
    pub cols: u32,
    pub seed: u64,
    pub entries: Vec<(u32, u32, f64)>,
}

impl FlatMatrix {
    pub fn encoded_len(&self) -> usize {
        HEADER_LEN + ENTRY_LEN * self.entries.len()
    }

    pub fn write_to(&self, out: &mut Vec<u8>) {
        out.reserve(self.encoded_len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&[VERSION, self.kind as u8, self.mode.code(), 0]);
        out.extend_from_slice(&self.rows.to_le_bytes());
        out.extend_from_slice(&self.cols.to_le_bytes());
        out.extend_from_slice(&self.seed.to_le_bytes());
        out.extend_from_slice(&(self.entries.len() as u64).to_le_bytes());
        for &(i, j, v) in &self.entries {
            out.extend_from_slice(&i.to_le_bytes());
            out.extend_from_slice(&j.to_le_bytes());
            out.extend_from_slice(&v.to_bits().to_le_bytes());
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out);
        out
    }

    /// Parse one section, returning it and the unread remainder.
    pub fn read_from(bytes: &[u8]) -> Result<(Self, &[u8])> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Format("truncated header"));
        }
        if &bytes[..4] != MAGIC {
            return Err(Error::Format("bad magic"));
        }
        if bytes[4] != VERSION {
            return Err(Error::Format("unsupported version"));
        }
        let kind = MatrixKind::from_code(bytes[5]).ok_or(Error::Format("unknown kind"))?;
        let mode = InitMode::from_code(bytes[6]).ok_or(Error::Format("unknown init mode"))?;
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let rows = u32_at(8);
        let cols = u32_at(12);
        let seed = u64_at(16);
        let count =
            usize::try_from(u64_at(24)).map_err(|_| Error::Format("entry count overflow"))?;
        let body_len = count
            .checked_mul(ENTRY_LEN)
            .ok_or(Error::Format("entry count overflow"))?;
        let body = bytes
            .get(HEADER_LEN..HEADER_LEN + body_len)
            .ok_or(Error::Format("truncated body"))?;
        let mut entries = Vec::with_capacity(count);
        for e in body.chunks_exact(ENTRY_LEN) {
            let i = u32::from_le_bytes(e[0..4].try_into().unwrap());
            let j = u32::from_le_bytes(e[4..8].try_into().unwrap());
            let v = f64::from_bits(u64::from_le_bytes(e[8..16].try_into().unwrap()));
            if i >= rows || j >= cols {
                return Err(Error::Format("entry out of bounds"));
            }
            if let Some(&(pi, pj, _)) = entries.last() {
                if (pi, pj) >= (i, j) {
                    return Err(Error::Format("entries not strictly ascending"));
                }
            }
            entries.push((i, j, v));
        }
        let matrix = Self {
            kind,
            mode,
            rows,
            cols,
            seed,
            entries,
        };
        Ok((matrix, &bytes[HEADER_LEN + body_len..]))
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let (m, rest) = Self::read_from(bytes)?;
        if !rest.is_empty() {
            return Err(Error::Format("trailing bytes"));
        }
        Ok(m)
    }

    fn group_rows<T>(&self, mut map: impl FnMut(u32, f64) -> T) -> Vec<Vec<T>> {
        let mut rows: Vec<Vec<T>> = (0..self.rows).map(|_| Vec::new()).collect();
        for &(i, j, v) in &self.entries {
            rows[i as usize].push(map(j, v));
        }
        rows
    }
}

impl PermanenceMatrix {
    pub fn to_flat(&self, mode: InitMode, seed: u64) -> FlatMatrix {
        FlatMatrix {
            kind: MatrixKind::Permanence,
            mode,
            rows: self.num_columns() as u32,
            cols: self.num_inputs() as u32,
            seed,
            entries: self.triples().collect(),
        }
    }

    pub fn from_flat(flat: &FlatMatrix) -> Result<Self> {
        if flat.kind != MatrixKind::Permanence {
            return Err(Error::Format("not a permanence matrix"));
        }
        PermanenceMatrix::from_rows(flat.cols as usize, flat.group_rows(|j, v| (j, v)))
    }
}

impl ConnectionMatrix {
    pub fn to_flat(&self, mode: InitMode, seed: u64) -> FlatMatrix {
        let entries = (0..self.num_columns())
            .flat_map(|i| self.connected(i).iter().map(move |&j| (i as u32, j, 1.0)))
            .collect();
        FlatMatrix {
            kind: MatrixKind::Connection,
            mode,
            rows: self.num_columns() as u32,
            cols: self.num_inputs() as u32,
            seed,
            entries,
        }
    }

    pub fn from_flat(flat: &FlatMatrix) -> Result<Self> {
        if flat.kind != MatrixKind::Connection {
            return Err(Error::Format("not a connection matrix"));
        }
        if flat.entries.iter().any(|e| e.2 != 1.0) {
            return Err(Error::Format("connection values must be 1"));
        }
        ConnectionMatrix::from_rows(flat.cols as usize, flat.group_rows(|j, _| j))
    }
}
