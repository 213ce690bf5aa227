//! On-disk formats.
//!
//! `PCG1`: magic, `u32 n`, `u8 variant`, `u32 k`, `u32 ell`, then the edge
//! bits in rank order, packed little-endian within bytes.
//! `HPG1`: magic, `u32 n`, `u8 variant`, `u8 s`, `u32 k`, then hyperedge bits
//! the same way. Integers are little-endian.
//! Reduced outputs: magic `RED1`, `u32` header length, a JSON header, then the
//! payload described by the header's `encoding`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bits::{binom, PackedBits};
use crate::error::{Error, Result};
use crate::graph::{
    GraphInstance, GraphParams, GraphVariant, HypergraphInstance, HypergraphParams, HypergraphVariant, Labeled,
};

pub const GRAPH_MAGIC: &[u8; 4] = b"PCG1";
pub const HYPERGRAPH_MAGIC: &[u8; 4] = b"HPG1";
pub const REDUCED_MAGIC: &[u8; 4] = b"RED1";

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::MalformedFile(format!("truncated while reading {what}")));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }
    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
    fn rest(&self) -> &'a [u8] {
        &self.bytes[self.pos..]
    }
}

fn magic(bytes: &[u8]) -> Option<&[u8]> {
    bytes.get(..4)
}

fn payload(c: &Cursor, bits: u64) -> Result<PackedBits> {
    let want = bits.div_ceil(8) as usize;
    let rest = c.rest();
    if rest.len() != want {
        return Err(Error::MalformedFile(format!("expected {want} payload bytes, found {}", rest.len())));
    }
    PackedBits::from_bytes(rest, bits).map_err(|e| Error::MalformedFile(e.to_string()))
}

pub fn encode_graph(g: &GraphInstance) -> Vec<u8> {
    let p = g.params();
    let mut out = GRAPH_MAGIC.to_vec();
    out.extend(p.n.to_le_bytes());
    out.push(p.variant.code());
    out.extend(p.k.to_le_bytes());
    out.extend(p.ell.to_le_bytes());
    out.extend(g.edges().to_bytes());
    out
}

pub fn decode_graph(bytes: &[u8]) -> Result<GraphInstance> {
    if magic(bytes) != Some(GRAPH_MAGIC) {
        return Err(Error::MalformedFile("missing PCG1 magic".into()));
    }
    let mut c = Cursor { bytes, pos: 4 };
    let n = c.u32("n")?;
    let variant = GraphVariant::from_code(c.u8("variant")?)?;
    let k = c.u32("k")?;
    let ell = c.u32("ell")?;
    let params = GraphParams { variant, n, k, ell };
    params.validate().map_err(|e| Error::MalformedFile(e.to_string()))?;
    let edges = payload(&c, binom(n.into(), 2))?;
    GraphInstance::new(params, edges)
}

pub fn encode_hypergraph(h: &HypergraphInstance) -> Vec<u8> {
    let p = h.params();
    let mut out = HYPERGRAPH_MAGIC.to_vec();
    out.extend(p.n.to_le_bytes());
    out.push(p.variant.code());
    out.push(p.s as u8);
    out.extend(p.k.to_le_bytes());
    out.extend(h.hyperedges().to_bytes());
    out
}

pub fn decode_hypergraph(bytes: &[u8]) -> Result<HypergraphInstance> {
    if magic(bytes) != Some(HYPERGRAPH_MAGIC) {
        return Err(Error::MalformedFile("missing HPG1 magic".into()));
    }
    let mut c = Cursor { bytes, pos: 4 };
    let n = c.u32("n")?;
    let variant = HypergraphVariant::from_code(c.u8("variant")?)?;
    let s = u32::from(c.u8("s")?);
    let k = c.u32("k")?;
    let params = HypergraphParams { variant, n, s, k };
    params.validate().map_err(|e| Error::MalformedFile(e.to_string()))?;
    if binom(n.into(), s.into()) > 1 << 36 {
        return Err(Error::MalformedFile(format!("C({n}, {s}) hyperedges is too many")));
    }
    let bits = payload(&c, binom(n.into(), s.into()))?;
    HypergraphInstance::new(params, bits)
}

/// Either kind of instance file.
#[derive(Debug, Clone)]
pub enum Instance {
    Graph(GraphInstance),
    Hypergraph(HypergraphInstance),
}

pub fn decode_instance(bytes: &[u8]) -> Result<Instance> {
    match magic(bytes) {
        Some(m) if m == GRAPH_MAGIC => Ok(Instance::Graph(decode_graph(bytes)?)),
        Some(m) if m == HYPERGRAPH_MAGIC => Ok(Instance::Hypergraph(decode_hypergraph(bytes)?)),
        _ => Err(Error::MalformedFile("not a PCG1 or HPG1 file".into())),
    }
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    decode_instance(&std::fs::read(path)?)
}

/// Secret companion of an instance file. Holds the planted set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sidecar {
    pub seed: u64,
    pub generator: String,
    pub variant: String,
    pub params: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planted: Option<Vec<u32>>,
    pub label: String,
}

impl Sidecar {
    pub fn for_graph(g: &Labeled<GraphInstance>, seed: u64, generator: &str) -> Self {
        let p = g.instance.params();
        Sidecar {
            seed,
            generator: generator.into(),
            variant: format!("{:?}", p.variant).to_lowercase(),
            params: serde_json::to_value(p).expect("params serialize"),
            planted: g.planted.clone(),
            label: if g.planted.is_some() { "planted" } else { "null" }.into(),
        }
    }

    pub fn for_hypergraph(h: &Labeled<HypergraphInstance>, seed: u64, generator: &str) -> Self {
        let p = h.instance.params();
        Sidecar {
            seed,
            generator: generator.into(),
            variant: format!("{:?}", p.variant).to_lowercase(),
            params: serde_json::to_value(p).expect("params serialize"),
            planted: h.planted.clone(),
            label: if h.planted.is_some() { "planted" } else { "null" }.into(),
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_slice(&std::fs::read(path)?)?)
    }
}

/// How the payload of a reduced file is laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Encoding {
    /// One signed byte per entry, row-major.
    Int8,
    /// One little-endian `i64` raw fixed-point value per entry, row-major.
    I64Le,
    /// Bits row-major, little-endian within bytes.
    PackedBits,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedHeader {
    pub target: String,
    pub rows: u64,
    pub cols: u64,
    pub encoding: Encoding,
    /// Fractional bits of fixed-point entries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_bits: Option<u32>,
    pub params: Value,
}

impl ReducedHeader {
    fn payload_len(&self) -> Result<u64> {
        let cells =
            self.rows.checked_mul(self.cols).ok_or_else(|| Error::MalformedFile("dimensions overflow".into()))?;
        Ok(match self.encoding {
            Encoding::Int8 => cells,
            Encoding::I64Le => cells * 8,
            Encoding::PackedBits => cells.div_ceil(8),
        })
    }
}

pub fn encode_reduced(header: &ReducedHeader, data: &[u8]) -> Result<Vec<u8>> {
    if data.len() as u64 != header.payload_len()? {
        return Err(Error::param(format!("payload of {} bytes does not match header", data.len())));
    }
    let json = serde_json::to_vec(header)?;
    let mut out = REDUCED_MAGIC.to_vec();
    out.extend((json.len() as u32).to_le_bytes());
    out.extend(json);
    out.extend_from_slice(data);
    Ok(out)
}

pub fn decode_reduced(bytes: &[u8]) -> Result<(ReducedHeader, &[u8])> {
    if magic(bytes) != Some(REDUCED_MAGIC) {
        return Err(Error::MalformedFile("missing RED1 magic".into()));
    }
    let mut c = Cursor { bytes, pos: 4 };
    let len = c.u32("header length")? as usize;
    let header: ReducedHeader =
        serde_json::from_slice(c.take(len, "header")?).map_err(|e| Error::MalformedFile(format!("header: {e}")))?;
    let data = c.rest();
    if data.len() as u64 != header.payload_len()? {
        return Err(Error::MalformedFile(format!(
            "expected {} payload bytes, found {}",
            header.payload_len()?,
            data.len()
        )));
    }
    Ok((header, data))
}

/// Header, dimensions and bit statistics of any supported file.
pub fn inspect_bytes(bytes: &[u8]) -> Result<Value> {
    let stats = |bits: &PackedBits| {
        let ones = bits.count_ones();
        let density = if bits.is_empty() { 0.0 } else { ones as f64 / bits.len() as f64 };
        (ones, density)
    };
    match magic(bytes) {
        Some(m) if m == GRAPH_MAGIC => {
            let g = decode_graph(bytes)?;
            let (ones, density) = stats(g.edges());
            Ok(serde_json::json!({
                "format": "PCG1", "params": g.params(), "n": g.n(),
                "edge_bits": g.edges().len(), "ones": ones, "density": density,
            }))
        }
        Some(m) if m == HYPERGRAPH_MAGIC => {
            let h = decode_hypergraph(bytes)?;
            let (ones, density) = stats(h.hyperedges());
            Ok(serde_json::json!({
                "format": "HPG1", "params": h.params(), "n": h.n(), "s": h.s(),
                "hyperedge_bits": h.hyperedges().len(), "ones": ones, "density": density,
            }))
        }
        Some(m) if m == REDUCED_MAGIC => {
            let (header, data) = decode_reduced(bytes)?;
            let cells = header.rows * header.cols;
            let summary = match header.encoding {
                Encoding::Int8 => {
                    let pos = data.iter().filter(|&&b| b as i8 > 0).count() as u64;
                    serde_json::json!({ "positive": pos, "nonpositive": cells - pos })
                }
                Encoding::I64Le => {
                    let vals: Vec<i64> =
                        data.chunks_exact(8).map(|c| i64::from_le_bytes(c.try_into().unwrap())).collect();
                    let scale = header.t_bits.map_or(1.0, |t| 2f64.powi(t as i32));
                    let mean = vals.iter().map(|&v| v as f64 / scale).sum::<f64>() / vals.len().max(1) as f64;
                    serde_json::json!({
                        "min_raw": vals.iter().min(), "max_raw": vals.iter().max(), "mean": mean,
                    })
                }
                Encoding::PackedBits => {
                    let bits = PackedBits::from_bytes(data, cells).map_err(|e| Error::MalformedFile(e.to_string()))?;
                    let (ones, density) = stats(&bits);
                    serde_json::json!({ "ones": ones, "density": density })
                }
            };
            Ok(serde_json::json!({ "format": "RED1", "header": header, "cells": cells, "stats": summary }))
        }
        _ => Err(Error::MalformedFile("unrecognised magic".into())),
    }
}

pub fn inspect(path: &Path) -> Result<Value> {
    inspect_bytes(&std::fs::read(path)?)
}
