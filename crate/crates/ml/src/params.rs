//! `SJM1` model parameter container.
//!
//! ```text
//! "SJM1" | version u8 | header_len u32 | header JSON
//!        | n_tensors u32 | { name_len u32 | name | ndim u32 | dims u32* | f32 payload }*
//!        | CRC-32 u32 (over every preceding byte)
//! ```
//! All integers and floats are little-endian.

use std::path::Path;

use serde_json::Value;

use crate::error::{MlError, Result};

pub const MAGIC: &[u8; 4] = b"SJM1";
pub const VERSION: u8 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct NamedTensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f32>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    /// Free-form description: model kind, architecture, hyperparameters.
    pub header: Value,
    pub tensors: Vec<NamedTensor>,
}

impl ModelParams {
    pub fn tensor(&self, name: &str) -> Result<&NamedTensor> {
        self.tensors
            .iter()
            .find(|t| t.name == name)
            .ok_or_else(|| MlError::Shape(format!("model has no tensor '{name}'")))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        let header = serde_json::to_vec(&self.header).expect("json value serializes");
        put_u32(&mut out, header.len());
        out.extend_from_slice(&header);
        put_u32(&mut out, self.tensors.len());
        for t in &self.tensors {
            put_u32(&mut out, t.name.len());
            out.extend_from_slice(t.name.as_bytes());
            put_u32(&mut out, t.shape.len());
            for &d in &t.shape {
                put_u32(&mut out, d);
            }
            for v in &t.data {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        let crc = crc32fast::hash(&out);
        out.extend_from_slice(&crc.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < MAGIC.len() + 1 + 4 {
            return Err(fmt_err(bytes.len(), "file too short"));
        }
        let body_len = bytes.len() - 4;
        let stored = u32::from_le_bytes(bytes[body_len..].try_into().unwrap());
        let mut r = Reader { buf: &bytes[..body_len], pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(fmt_err(0, "bad magic"));
        }
        let version = r.take(1)?[0];
        if version != VERSION {
            return Err(fmt_err(4, format!("unsupported version {version}")));
        }
        let computed = crc32fast::hash(&bytes[..body_len]);
        if computed != stored {
            return Err(fmt_err(body_len, format!("checksum mismatch (stored {stored:08x}, computed {computed:08x})")));
        }
        let hlen = r.u32()?;
        let hpos = r.pos;
        let header: Value =
            serde_json::from_slice(r.take(hlen)?).map_err(|e| fmt_err(hpos, format!("bad header: {e}")))?;
        let count = r.u32()?;
        let mut tensors = Vec::with_capacity(count.min(1024));
        for _ in 0..count {
            let nlen = r.u32()?;
            let npos = r.pos;
            let name = String::from_utf8(r.take(nlen)?.to_vec()).map_err(|_| fmt_err(npos, "tensor name not utf-8"))?;
            let ndim = r.u32()?;
            let shape = (0..ndim).map(|_| r.u32()).collect::<Result<Vec<_>>>()?;
            let len: usize = shape.iter().product();
            let payload = r.take(len.checked_mul(4).ok_or_else(|| fmt_err(r.pos, "tensor too large"))?)?;
            let data = payload.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
            tensors.push(NamedTensor { name, shape, data });
        }
        if r.pos != body_len {
            return Err(fmt_err(r.pos, "trailing bytes after tensors"));
        }
        Ok(ModelParams { header, tensors })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

fn put_u32(out: &mut Vec<u8>, v: usize) {
    out.extend_from_slice(&u32::try_from(v).expect("field fits in u32").to_le_bytes());
}

fn fmt_err(offset: usize, reason: impl Into<String>) -> MlError {
    MlError::Format { offset, reason: reason.into() }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(fmt_err(self.pos, format!("truncated: need {n} bytes")));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }
}
