//! Public side information Bob sends to Alice for one frame, and its wire
//! format.
//!
//! The message is a sequence of records `tag: u8, len: u32 LE, payload`:
//!
//! | tag   | payload                                           |
//! |-------|---------------------------------------------------|
//! | `'T'` | `count: u64`, then `count` little-endian `f64`    |
//! | `'R'` | `k: u32`, `nbits: u64`, bits packed LSB-first     |
//! | `'S'` | `nbits: u64`, bits packed LSB-first               |
//!
//! Bob's signs `u` are never sent.

use crate::error::{Error, Result};

/// Magnitudes, relative signs and syndrome for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SideInfo {
    /// Repetition length.
    pub k: usize,
    /// `|y|` for every sample of the frame.
    pub t: Vec<f64>,
    /// `true` where `sgn(y_{ij}) ≠ sgn(y_{i1})`; the first entry of each block
    /// is always `false`.
    pub rel_signs: Vec<bool>,
    pub syndrome: Vec<u8>,
}

const TAG_T: u8 = b'T';
const TAG_REL: u8 = b'R';
const TAG_SYND: u8 = b'S';

fn pack(bits: impl ExactSizeIterator<Item = bool>) -> Vec<u8> {
    let mut out = vec![0u8; bits.len().div_ceil(8)];
    for (i, b) in bits.enumerate() {
        if b {
            out[i / 8] |= 1 << (i % 8);
        }
    }
    out
}

fn unpack(bytes: &[u8], nbits: usize) -> Result<Vec<bool>> {
    if bytes.len() != nbits.div_ceil(8) {
        return Err(Error::Format(format!(
            "packed field holds {} bytes, expected {} for {nbits} bits",
            bytes.len(),
            nbits.div_ceil(8)
        )));
    }
    Ok((0..nbits).map(|i| bytes[i / 8] >> (i % 8) & 1 == 1).collect())
}

fn push_record(out: &mut Vec<u8>, tag: u8, payload: &[u8]) {
    out.push(tag);
    out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
    out.extend_from_slice(payload);
}

struct Cursor<'a> {
    data: &'a [u8],
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.data.len() < n {
            return Err(Error::Format("side information truncated".into()));
        }
        let (head, tail) = self.data.split_at(n);
        self.data = tail;
        Ok(head)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

impl SideInfo {
    /// Disclosed syndrome length, the only part that counts as leakage.
    pub fn leaked_bits(&self) -> usize {
        self.syndrome.len()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();

        let mut t = Vec::with_capacity(8 + 8 * self.t.len());
        t.extend_from_slice(&(self.t.len() as u64).to_le_bytes());
        for v in &self.t {
            t.extend_from_slice(&v.to_le_bytes());
        }
        push_record(&mut out, TAG_T, &t);

        let mut rel = Vec::new();
        rel.extend_from_slice(&(self.k as u32).to_le_bytes());
        rel.extend_from_slice(&(self.rel_signs.len() as u64).to_le_bytes());
        rel.extend(pack(self.rel_signs.iter().copied()));
        push_record(&mut out, TAG_REL, &rel);

        let mut synd = Vec::new();
        synd.extend_from_slice(&(self.syndrome.len() as u64).to_le_bytes());
        synd.extend(pack(self.syndrome.iter().map(|&b| b & 1 == 1)));
        push_record(&mut out, TAG_SYND, &synd);
        out
    }

    pub fn from_bytes(data: &[u8]) -> Result<SideInfo> {
        let mut cur = Cursor { data };
        let (mut t, mut rel, mut synd) = (None, None, None);
        while !cur.data.is_empty() {
            let tag = cur.take(1)?[0];
            let len = cur.u32()? as usize;
            let mut body = Cursor { data: cur.take(len)? };
            match tag {
                TAG_T => {
                    let count = body.u64()? as usize;
                    if body.data.len() != count.saturating_mul(8) {
                        return Err(Error::Format("magnitude record length mismatch".into()));
                    }
                    t = Some(
                        body.data
                            .chunks_exact(8)
                            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                            .collect::<Vec<_>>(),
                    );
                }
                TAG_REL => {
                    let k = body.u32()? as usize;
                    let nbits = body.u64()? as usize;
                    rel = Some((k, unpack(body.data, nbits)?));
                }
                TAG_SYND => {
                    let nbits = body.u64()? as usize;
                    synd = Some(unpack(body.data, nbits)?.into_iter().map(u8::from).collect::<Vec<_>>());
                }
                other => return Err(Error::Format(format!("unknown side-information record {other:#04x}"))),
            }
        }
        let (Some(t), Some((k, rel_signs)), Some(syndrome)) = (t, rel, synd) else {
            return Err(Error::Format("side information is missing a record".into()));
        };
        if k == 0 || rel_signs.len() != t.len() || t.len() % k != 0 {
            return Err(Error::Format("inconsistent side-information lengths".into()));
        }
        Ok(SideInfo {
            k,
            t,
            rel_signs,
            syndrome,
        })
    }
}
