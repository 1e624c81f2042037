//! On-disk formats.
//!
//! Record dump: a 16-byte header followed by packed little-endian records.
//!
//! | bytes | field                         |
//! |-------|-------------------------------|
//! | 0..4  | magic `SMSR`                  |
//! | 4..6  | key width in bits (u16 LE)    |
//! | 6..8  | value width in bits (u16 LE)  |
//! | 8..16 | record count (u64 LE)         |
//!
//! Binary CSR: `n` and `m` as u64 LE, then `n + 1` u64 offsets, then `m` u32
//! targets. Edge lists are text, one `u v` pair per line, `#` starts a
//! comment.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use semisort_core::Record;

use crate::apps::graph::CsrGraph;
use crate::word::Word;
use crate::{Error, Result};

pub const MAGIC: [u8; 4] = *b"SMSR";
pub const HEADER_LEN: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Header {
    pub key_bits: u16,
    pub value_bits: u16,
    pub n: u64,
}

impl Header {
    pub fn record_bytes(&self) -> usize {
        (self.key_bits as usize + self.value_bits as usize) / 8
    }
}

pub fn encode_records<K: Word, V: Word>(records: &[Record<K, V>]) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + records.len() * (K::BYTES + V::BYTES));
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&(K::BITS as u16).to_le_bytes());
    out.extend_from_slice(&(V::BITS as u16).to_le_bytes());
    out.extend_from_slice(&(records.len() as u64).to_le_bytes());
    for r in records {
        r.key.write_le(&mut out);
        r.value.write_le(&mut out);
    }
    out
}

pub fn decode_header(bytes: &[u8]) -> Result<Header> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format("record file shorter than its header".into()));
    }
    if bytes[..4] != MAGIC {
        return Err(Error::Format("bad magic in record file".into()));
    }
    let h = Header {
        key_bits: u16::from_le_bytes([bytes[4], bytes[5]]),
        value_bits: u16::from_le_bytes([bytes[6], bytes[7]]),
        n: u64::from_le_bytes(bytes[8..16].try_into().unwrap()),
    };
    if !matches!(h.key_bits, 32 | 64 | 128) || !matches!(h.value_bits, 0 | 32 | 64 | 128) {
        return Err(Error::Format(format!("unsupported widths {}/{}", h.key_bits, h.value_bits)));
    }
    let body = bytes.len() - HEADER_LEN;
    if (body as u64) != h.n.saturating_mul(h.record_bytes() as u64) {
        return Err(Error::Format(format!("record file holds {body} bytes, header promises {} records", h.n)));
    }
    Ok(h)
}

pub fn decode_records<K: Word, V: Word>(bytes: &[u8]) -> Result<Vec<Record<K, V>>> {
    let h = decode_header(bytes)?;
    if h.key_bits as u32 != K::BITS || h.value_bits as u32 != V::BITS {
        return Err(Error::Format(format!(
            "record widths {}/{} do not match requested {}/{}",
            h.key_bits,
            h.value_bits,
            K::BITS,
            V::BITS
        )));
    }
    let width = K::BYTES + V::BYTES;
    Ok(bytes[HEADER_LEN..]
        .chunks_exact(width)
        .map(|c| Record::new(K::read_le(&c[..K::BYTES]), V::read_le(&c[K::BYTES..])))
        .collect())
}

pub fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Parse a text edge list. Vertex count is one past the largest id.
pub fn parse_edge_list(text: impl BufRead, origin: &Path) -> Result<Vec<(u32, u32)>> {
    let mut edges = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.map_err(|e| Error::io(origin, e))?;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let mut field = || -> Result<u32> {
            it.next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::Format(format!("{}:{}: expected `u v`", origin.display(), lineno + 1)))
        };
        let (u, v) = (field()?, field()?);
        edges.push((u, v));
    }
    Ok(edges)
}

pub fn read_edge_list(path: &Path) -> Result<CsrGraph> {
    let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let edges = parse_edge_list(BufReader::new(f), path)?;
    let n = edges.iter().map(|&(u, v)| u.max(v) as usize + 1).max().unwrap_or(0);
    Ok(CsrGraph::from_edges(n, &edges))
}

pub fn write_edge_list(path: &Path, g: &CsrGraph) -> Result<()> {
    let f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(f);
    writeln!(w, "# {} vertices, {} edges", g.n(), g.m()).map_err(|e| Error::io(path, e))?;
    for (u, v) in g.edges() {
        writeln!(w, "{u} {v}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn encode_csr(g: &CsrGraph) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 8 * g.offsets.len() + 4 * g.targets.len());
    out.extend_from_slice(&(g.n() as u64).to_le_bytes());
    out.extend_from_slice(&(g.m() as u64).to_le_bytes());
    for &o in &g.offsets {
        out.extend_from_slice(&(o as u64).to_le_bytes());
    }
    for &t in &g.targets {
        out.extend_from_slice(&t.to_le_bytes());
    }
    out
}

pub fn decode_csr(bytes: &[u8]) -> Result<CsrGraph> {
    let short = || Error::Format("binary CSR truncated".into());
    let word = |i: usize| -> Result<u64> {
        bytes.get(i..i + 8).map(|b| u64::from_le_bytes(b.try_into().unwrap())).ok_or_else(short)
    };
    let n = word(0)? as usize;
    let m = word(8)? as usize;
    if n >= bytes.len() || m >= bytes.len() {
        return Err(Error::Format(format!("binary CSR size mismatch for n={n}, m={m}")));
    }
    let targets_at = 16 + 8 * (n + 1);
    if bytes.len() != targets_at + 4 * m {
        return Err(Error::Format(format!("binary CSR size mismatch for n={n}, m={m}")));
    }
    let offsets = (0..=n).map(|i| word(16 + 8 * i).map(|x| x as usize)).collect::<Result<Vec<_>>>()?;
    let targets = bytes[targets_at..].chunks_exact(4).map(|c| u32::from_le_bytes(c.try_into().unwrap())).collect();
    let g = CsrGraph { offsets, targets };
    g.validate()?;
    Ok(g)
}
