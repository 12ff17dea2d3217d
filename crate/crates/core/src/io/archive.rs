//! Versioned little-endian tensor archive.
//!
//! Layout: magic `HTNS`, `u32` version, `u32` header length, UTF-8 JSON
//! header, `u32` tensor count, then per tensor `u32` name length, name,
//! `u32` rank, `u32` dims, and `f32` values in row-major order.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::nn::Tensor;

pub const ARCHIVE_MAGIC: &[u8; 4] = b"HTNS";
pub const ARCHIVE_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct TensorArchive {
    pub header: serde_json::Value,
    pub tensors: BTreeMap<String, Tensor>,
}

impl TensorArchive {
    pub fn new(header: serde_json::Value) -> Self {
        Self {
            header,
            tensors: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, name: impl Into<String>, tensor: Tensor) {
        self.tensors.insert(name.into(), tensor);
    }

    pub fn take(&mut self, name: &str) -> Result<Tensor> {
        self.tensors
            .remove(name)
            .ok_or_else(|| Error::InvalidInput(format!("archive lacks tensor `{name}`")))
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let header = serde_json::to_vec(&self.header)
            .map_err(|e| Error::InvalidInput(format!("archive header: {e}")))?;
        let mut out = Vec::new();
        out.extend_from_slice(ARCHIVE_MAGIC);
        put_u32(&mut out, ARCHIVE_VERSION);
        put_len(&mut out, header.len())?;
        out.extend_from_slice(&header);
        put_len(&mut out, self.tensors.len())?;
        for (name, t) in &self.tensors {
            if t.data().iter().any(|v| !(*v as f32).is_finite()) {
                return Err(Error::NonFinite(format!("tensor `{name}` does not fit in f32")));
            }
            put_len(&mut out, name.len())?;
            out.extend_from_slice(name.as_bytes());
            put_len(&mut out, t.shape().len())?;
            for d in t.shape() {
                put_len(&mut out, *d)?;
            }
            for v in t.data() {
                out.extend_from_slice(&(*v as f32).to_le_bytes());
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8], origin: &Path) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0, origin };
        if r.take(4)? != ARCHIVE_MAGIC {
            return Err(r.unsupported("bad magic bytes".into()));
        }
        let version = r.u32()?;
        if version != ARCHIVE_VERSION {
            return Err(r.unsupported(format!("unsupported archive version {version}")));
        }
        let header_len = r.u32()? as usize;
        let header = serde_json::from_slice(r.take(header_len)?)
            .map_err(|e| r.unsupported(format!("header is not JSON: {e}")))?;
        let count = r.u32()?;
        let mut tensors = BTreeMap::new();
        for _ in 0..count {
            let name_len = r.u32()? as usize;
            let name = String::from_utf8(r.take(name_len)?.to_vec())
                .map_err(|_| r.unsupported("tensor name is not UTF-8".into()))?;
            let rank = r.u32()? as usize;
            let shape = (0..rank).map(|_| r.u32().map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
            let n = shape
                .iter()
                .try_fold(1usize, |acc, d| acc.checked_mul(*d))
                .filter(|n| n.checked_mul(4).is_some_and(|b| b <= bytes.len()))
                .ok_or_else(|| r.unsupported(format!("tensor `{name}` is larger than the file")))?;
            let raw = r.take(n * 4)?;
            let data = raw
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
                .collect();
            if tensors.insert(name.clone(), Tensor::new(shape, data)?).is_some() {
                return Err(r.unsupported(format!("tensor `{name}` appears twice")));
            }
        }
        if r.pos != bytes.len() {
            return Err(r.unsupported(format!("{} trailing bytes", bytes.len() - r.pos)));
        }
        Ok(Self { header, tensors })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let bytes = self.to_bytes()?;
        super::write_file(path, &bytes)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes, path)
    }
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_len(out: &mut Vec<u8>, v: usize) -> Result<()> {
    let v = u32::try_from(v).map_err(|_| Error::InvalidInput(format!("length {v} does not fit in u32")))?;
    put_u32(out, v);
    Ok(())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    origin: &'a Path,
}

impl<'a> Reader<'a> {
    fn unsupported(&self, reason: String) -> Error {
        Error::UnsupportedFormat {
            path: self.origin.display().to_string(),
            reason,
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|e| *e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(self.unsupported(format!("truncated at byte {}", self.pos))),
        }
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}
