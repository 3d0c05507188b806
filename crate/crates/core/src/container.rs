//! Single-file index container.
//!
//! Layout: magic `GDIX`, little-endian u32 version, then six sections in
//! fixed order, each a 4-byte tag, a little-endian u64 payload length, and
//! the payload. Integers inside payloads are LEB128 varints unless noted.
//!
//! - `META`: metasymbol length, document count, weight sample step, tracking
//!   exponent as raw f64 bits (u64), layout byte.
//! - `GRMR`: grammar rules in id order (0 = terminal string, 1 = pair of
//!   child ids), then the per-document start rules.
//! - `GRID`: row count, then per point in column order: row, label, weight;
//!   then the per-column point counts.
//! - `BORD`: column and row order representatives (rule ids), which fix the
//!   pattern-to-grid coordinate mapping without storing expansions.
//! - `LIST`: per-rule document lists as (lo, hi) range pairs.
//! - `SHRT`: optional stored short-pattern table.
//!
//! The file ends with a `CKSM` section holding the SHA-256 of all preceding
//! bytes. Everything derivable (expansion lengths, occurrence tables, the
//! wavelet tree, per-node list marks and run headers, samples) is rebuilt on
//! load, so the container stays small and every stored value is validated by
//! the same constructors the builder uses.

use crate::doclist::{DocIndex, RangeList, ShortTable};
use crate::error::{Error, Result};
use crate::grammar::{Grammar, Rule};
use crate::grid::{Grid, Layout};
use crate::index::PatternIndex;
use crate::{BuildOptions, Index};
use sha2::{Digest, Sha256};
use std::path::Path;

const MAGIC: &[u8; 4] = b"GDIX";
const VERSION: u32 = 1;

fn put_varint(out: &mut Vec<u8>, mut v: u64) {
    loop {
        let byte = (v & 0x7f) as u8;
        v >>= 7;
        if v == 0 {
            out.push(byte);
            return;
        }
        out.push(byte | 0x80);
    }
}

fn put_section(out: &mut Vec<u8>, tag: &[u8; 4], payload: &[u8]) {
    out.extend_from_slice(tag);
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    out.extend_from_slice(payload);
}

struct Rd<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Rd<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::Corrupt("container truncated".into()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u64_le(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn varint(&mut self) -> Result<u64> {
        let mut v: u64 = 0;
        for shift in (0..64).step_by(7) {
            let byte = self.u8()?;
            v |= ((byte & 0x7f) as u64) << shift;
            if byte & 0x80 == 0 {
                if shift == 63 && byte > 1 {
                    break;
                }
                return Ok(v);
            }
        }
        Err(Error::Corrupt("varint overflows 64 bits".into()))
    }

    /// A count of items that each occupy at least one byte.
    fn count(&mut self) -> Result<usize> {
        let n = self.varint()? as usize;
        if self.buf.len() - self.pos < n {
            return Err(Error::Corrupt("item count exceeds the container".into()));
        }
        Ok(n)
    }

    fn u32v(&mut self) -> Result<u32> {
        u32::try_from(self.varint()?).map_err(|_| Error::Corrupt("value exceeds 32 bits".into()))
    }

    fn done(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(Error::Corrupt("section has trailing bytes".into()));
        }
        Ok(())
    }
}

fn put_range_list(out: &mut Vec<u8>, rl: &RangeList) {
    put_varint(out, rl.ranges().len() as u64);
    for &(lo, hi) in rl.ranges() {
        put_varint(out, lo as u64);
        put_varint(out, hi as u64);
    }
}

fn read_range_list(rd: &mut Rd) -> Result<RangeList> {
    let n = rd.count()?;
    let mut ranges = Vec::with_capacity(n);
    for _ in 0..n {
        let lo = rd.u32v()?;
        let hi = rd.u32v()?;
        ranges.push((lo, hi));
    }
    RangeList::from_ranges(ranges)
}

/// Serializes `index` to its canonical byte form.
pub fn to_bytes(index: &Index) -> Vec<u8> {
    let g = index.pattern.grammar();
    let grid = index.pattern.grid();

    let mut meta = Vec::new();
    put_varint(&mut meta, g.ms_len() as u64);
    put_varint(&mut meta, index.doc.num_docs() as u64);
    put_varint(&mut meta, grid.tau() as u64);
    meta.extend_from_slice(&grid.epsilon().to_bits().to_le_bytes());
    meta.push(matches!(grid.layout(), Layout::Root) as u8);

    let mut grmr = Vec::new();
    put_varint(&mut grmr, g.num_rules() as u64);
    for rule in g.rules() {
        match rule {
            Rule::Leaf(s) => {
                grmr.push(0);
                put_varint(&mut grmr, s.len() as u64);
                grmr.extend_from_slice(s);
            }
            Rule::Node(b, c) => {
                grmr.push(1);
                put_varint(&mut grmr, *b as u64);
                put_varint(&mut grmr, *c as u64);
            }
        }
    }
    put_varint(&mut grmr, g.starts().len() as u64);
    for &s in g.starts() {
        put_varint(&mut grmr, s as u64);
    }

    let (rows, labels, weights, col_sizes) = grid.export_points();
    let mut gr = Vec::new();
    put_varint(&mut gr, grid.num_rows() as u64);
    put_varint(&mut gr, rows.len() as u64);
    for k in 0..rows.len() {
        put_varint(&mut gr, rows[k] as u64);
        put_varint(&mut gr, labels[k] as u64);
        put_varint(&mut gr, weights[k]);
    }
    put_varint(&mut gr, col_sizes.len() as u64);
    for &c in &col_sizes {
        put_varint(&mut gr, c as u64);
    }

    let mut bord = Vec::new();
    put_varint(&mut bord, index.pattern.col_reps().len() as u64);
    for &r in index.pattern.col_reps() {
        put_varint(&mut bord, r as u64);
    }
    put_varint(&mut bord, index.pattern.row_reps().len() as u64);
    for &r in index.pattern.row_reps() {
        put_varint(&mut bord, r as u64);
    }

    let mut list = Vec::new();
    put_varint(&mut list, index.doc.rule_lists().len() as u64);
    for rl in index.doc.rule_lists() {
        put_range_list(&mut list, rl);
    }

    let mut shrt = Vec::new();
    match index.doc.short_table() {
        None => shrt.push(0),
        Some(t) => {
            shrt.push(1);
            put_varint(&mut shrt, t.entries().len() as u64);
            for (key, total, docs) in t.entries() {
                put_varint(&mut shrt, key.len() as u64);
                shrt.extend_from_slice(key);
                put_varint(&mut shrt, *total);
                put_range_list(&mut shrt, docs);
            }
        }
    }

    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    put_section(&mut out, b"META", &meta);
    put_section(&mut out, b"GRMR", &grmr);
    put_section(&mut out, b"GRID", &gr);
    put_section(&mut out, b"BORD", &bord);
    put_section(&mut out, b"LIST", &list);
    put_section(&mut out, b"SHRT", &shrt);
    let digest = Sha256::digest(&out);
    put_section(&mut out, b"CKSM", &digest);
    out
}

pub fn save(index: &Index, path: &Path) -> Result<()> {
    std::fs::write(path, to_bytes(index))?;
    Ok(())
}

/// Reconstructs an index, revalidating every stored structure.
pub fn from_bytes(buf: &[u8]) -> Result<Index> {
    let mut rd = Rd { buf, pos: 0 };
    if rd.take(4)? != MAGIC {
        return Err(Error::Corrupt("not an index container".into()));
    }
    let version = u32::from_le_bytes(rd.take(4)?.try_into().unwrap());
    if version != VERSION {
        return Err(Error::Corrupt(format!("unsupported container version {version}")));
    }

    let mut sections = Vec::new();
    for tag in [b"META", b"GRMR", b"GRID", b"BORD", b"LIST", b"SHRT", b"CKSM"] {
        let body_end = rd.pos;
        if rd.take(4)? != tag {
            return Err(Error::Corrupt("unexpected section order".into()));
        }
        let len = rd.u64_le()?;
        let len = usize::try_from(len).map_err(|_| Error::Corrupt("section too large".into()))?;
        let payload = rd.take(len)?;
        if tag == b"CKSM" {
            if payload != Sha256::digest(&buf[..body_end]).as_slice() {
                return Err(Error::Corrupt("checksum mismatch".into()));
            }
        } else {
            sections.push(payload);
        }
    }
    rd.done()?;

    let mut meta = Rd { buf: sections[0], pos: 0 };
    let ms_len = meta.varint()? as usize;
    let ndocs = meta.u32v()?;
    let tau = meta.varint()? as usize;
    let epsilon = f64::from_bits(meta.u64_le()?);
    let layout_byte = meta.u8()?;
    meta.done()?;
    if ms_len == 0 || ndocs == 0 || !(epsilon > 0.0 && epsilon <= 1.0) || layout_byte > 1 {
        return Err(Error::Corrupt("invalid build parameters".into()));
    }
    let layout = if layout_byte == 1 { Layout::Root } else { Layout::Leaf };

    let mut grmr = Rd { buf: sections[1], pos: 0 };
    let nr = grmr.count()?;
    let mut rules = Vec::with_capacity(nr);
    for _ in 0..nr {
        match grmr.u8()? {
            0 => {
                let len = grmr.count()?;
                rules.push(Rule::Leaf(grmr.take(len)?.to_vec()));
            }
            1 => rules.push(Rule::Node(grmr.u32v()?, grmr.u32v()?)),
            _ => return Err(Error::Corrupt("unknown rule kind".into())),
        }
    }
    let ns = grmr.count()?;
    let mut starts = Vec::with_capacity(ns);
    for _ in 0..ns {
        starts.push(grmr.u32v()?);
    }
    grmr.done()?;
    let grammar = Grammar::assemble(rules, starts, ms_len)?;
    if grammar.num_docs() != ndocs {
        return Err(Error::Corrupt("document count does not match the grammar".into()));
    }

    let mut gr = Rd { buf: sections[2], pos: 0 };
    let r_rows = gr.varint()? as usize;
    let p = gr.count()?;
    let mut rows = Vec::with_capacity(p);
    let mut labels = Vec::with_capacity(p);
    let mut weights = Vec::with_capacity(p);
    for _ in 0..p {
        rows.push(gr.u32v()?);
        labels.push(gr.u32v()?);
        weights.push(gr.varint()?);
    }
    let nc = gr.count()?;
    let mut col_sizes = Vec::with_capacity(nc);
    for _ in 0..nc {
        col_sizes.push(gr.u32v()?);
    }
    gr.done()?;
    let grid = Grid::build(&rows, &labels, &weights, &col_sizes, r_rows, tau, epsilon, layout)
        .map_err(|e| Error::Corrupt(format!("invalid grid: {e}")))?;

    let mut bord = Rd { buf: sections[3], pos: 0 };
    let ncr = bord.count()?;
    let mut col_reps = Vec::with_capacity(ncr);
    for _ in 0..ncr {
        col_reps.push(bord.u32v()?);
    }
    let nrr = bord.count()?;
    let mut row_reps = Vec::with_capacity(nrr);
    for _ in 0..nrr {
        row_reps.push(bord.u32v()?);
    }
    bord.done()?;
    let pattern = PatternIndex::assemble(grammar, grid, col_reps, row_reps)?;

    let mut list = Rd { buf: sections[4], pos: 0 };
    let nl = list.count()?;
    let mut lists = Vec::with_capacity(nl);
    for _ in 0..nl {
        lists.push(read_range_list(&mut list)?);
    }
    list.done()?;

    let mut shrt = Rd { buf: sections[5], pos: 0 };
    let short = match shrt.u8()? {
        0 => None,
        1 => {
            let ne = shrt.count()?;
            let mut entries = Vec::with_capacity(ne);
            for _ in 0..ne {
                let klen = shrt.count()?;
                let key = shrt.take(klen)?.to_vec();
                let total = shrt.varint()?;
                entries.push((key, total, read_range_list(&mut shrt)?));
            }
            Some(ShortTable::from_entries(entries)?)
        }
        _ => return Err(Error::Corrupt("bad short table marker".into())),
    };
    shrt.done()?;
    if (ms_len > 1) != short.is_some() {
        return Err(Error::Corrupt("short table presence contradicts the metasymbol length".into()));
    }

    let options = BuildOptions { ms_len, epsilon, tau, root_layout: layout_byte == 1 };
    let doc = DocIndex::assemble(&pattern, lists, short, ndocs, &options)?;
    Ok(Index { pattern, doc, options })
}

pub fn load(path: &Path) -> Result<Index> {
    from_bytes(&std::fs::read(path)?)
}
