//! Document collections: generation from edit models, file ingestion, and
//! the naive scan oracles used to validate every index answer.
//!
//! A collection under the edit model starts from one base document; each
//! following document copies its predecessor. A logical edit carries a
//! document range `[d_from, d_to]`: it is applied when the lineage reaches
//! `d_from` and undone at `d_to + 1` if the edited position still carries
//! the edited value by then (later edits win; script order is
//! authoritative). Documents are snapshots of this single evolving string.
//!
//! The `subtree` model generates a version tree and renumbers documents in
//! preorder, which turns every subtree of versions into a contiguous
//! document range handled by the same machinery.

use crate::error::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EditKind {
    Insert,
    Delete,
    Substitute,
}

/// One logical edit over a range of documents.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edit {
    pub kind: EditKind,
    /// 1-based position in the evolving document at application time.
    pub pos: u64,
    /// Inserted or substituted byte; ignored for deletions.
    pub sym: u8,
    /// First document the edit applies to (at least 2: document 1 is the base).
    pub d_from: u32,
    /// Last document the edit applies to.
    pub d_to: u32,
}

/// An edit script: the full provenance of a generated collection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EditScript {
    pub base_len: u64,
    pub docs: u32,
    pub edits: Vec<Edit>,
}

/// A single-document operation produced by normalizing an [`EditScript`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrimOp {
    Insert(u64, u8),
    Delete(u64),
    Substitute(u64, u8),
}

/// Normalized script: the operations to apply when each document is reached.
pub struct Normalized {
    /// per_doc[d-1] holds the operations applied at document d, in order.
    pub per_doc: Vec<Vec<PrimOp>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Model {
    Single,
    Range,
    Subtree,
}

impl std::str::FromStr for Model {
    type Err = Error;
    fn from_str(s: &str) -> Result<Model> {
        match s {
            "single" => Ok(Model::Single),
            "range" => Ok(Model::Range),
            "subtree" => Ok(Model::Subtree),
            other => Err(Error::Params(format!("unknown model '{other}'"))),
        }
    }
}

/// Generator parameters.
#[derive(Clone, Copy, Debug)]
pub struct GenParams {
    pub seed: u64,
    /// Base document length.
    pub n: usize,
    /// Number of documents.
    pub docs: u32,
    /// Number of logical edits.
    pub edits: usize,
    /// Alphabet size; symbols map to bytes 'a'.. for sigma <= 26.
    pub sigma: u8,
    pub model: Model,
}

/// A materialized document collection.
#[derive(Clone, Debug)]
pub struct Collection {
    docs: Vec<Vec<u8>>,
    script: Option<EditScript>,
}

/// Version tree for the subtree edit model; node 1 is the root.
#[derive(Clone, Debug)]
pub struct VersionTree {
    /// parent[v-1] for v in 1..=len; parent[0] = 0 marks the root.
    pub parent: Vec<u32>,
    preorder: Vec<u32>,
    subtree_size: Vec<u32>,
}

impl VersionTree {
    pub fn random(rng: &mut ChaCha12Rng, nodes: u32) -> VersionTree {
        let mut parent = vec![0u32; nodes as usize];
        for v in 2..=nodes {
            parent[v as usize - 1] = rng.gen_range(1..v);
        }
        VersionTree::from_parents(parent)
    }

    pub fn from_parents(parent: Vec<u32>) -> VersionTree {
        let n = parent.len();
        let mut children: Vec<Vec<u32>> = vec![Vec::new(); n];
        for v in 2..=n as u32 {
            children[parent[v as usize - 1] as usize - 1].push(v);
        }
        let mut preorder = vec![0u32; n];
        let mut subtree_size = vec![1u32; n];
        let mut counter = 0u32;
        // Iterative preorder; post-visit accumulates subtree sizes.
        let mut stack: Vec<(u32, usize)> = vec![(1, 0)];
        while let Some(&mut (v, ref mut ci)) = stack.last_mut() {
            if *ci == 0 {
                counter += 1;
                preorder[v as usize - 1] = counter;
            }
            if *ci < children[v as usize - 1].len() {
                let c = children[v as usize - 1][*ci];
                *ci += 1;
                stack.push((c, 0));
            } else {
                stack.pop();
                if let Some(&mut (p, _)) = stack.last_mut() {
                    let grown = subtree_size[v as usize - 1];
                    subtree_size[p as usize - 1] += grown;
                }
            }
        }
        VersionTree {
            parent,
            preorder,
            subtree_size,
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Preorder numbers of node v's subtree form `[start, end]`.
    pub fn preorder_range(&self, v: u32) -> (u32, u32) {
        let start = self.preorder[v as usize - 1];
        (start, start + self.subtree_size[v as usize - 1] - 1)
    }
}

struct Pending {
    script_idx: usize,
    kind: EditKind,
    pos: u64,
    applied_sym: u8,
    prev_sym: u8,
    cancelled: bool,
}

enum Event {
    Apply(usize),
    Undo(usize),
}

/// Runs a script over its base, optionally drawing positions and symbols for
/// edits as they apply (generator mode). Returns the document snapshots and
/// the normalized per-document operations.
fn execute(
    script: &mut EditScript,
    base: &[u8],
    mut draw: Option<(&mut ChaCha12Rng, &[u8])>,
) -> Result<(Vec<Vec<u8>>, Normalized)> {
    let d_total = script.docs;
    if d_total == 0 {
        return Err(Error::Script("document count must be positive".into()));
    }
    if base.len() as u64 != script.base_len {
        return Err(Error::Script(format!(
            "base length {} does not match script header {}",
            base.len(),
            script.base_len
        )));
    }
    let mut events: BTreeMap<u32, Vec<(usize, Event)>> = BTreeMap::new();
    for (i, e) in script.edits.iter().enumerate() {
        if e.d_from < 2 || e.d_from > e.d_to || e.d_to > d_total {
            return Err(Error::Script(format!(
                "edit {} targets invalid document range [{}, {}]",
                i + 1,
                e.d_from,
                e.d_to
            )));
        }
        events.entry(e.d_from).or_default().push((i, Event::Apply(i)));
        if e.d_to < d_total {
            events.entry(e.d_to + 1).or_default().push((i, Event::Undo(i)));
        }
    }

    let mut state: Vec<u8> = base.to_vec();
    let mut docs: Vec<Vec<u8>> = Vec::with_capacity(d_total as usize);
    let mut per_doc: Vec<Vec<PrimOp>> = Vec::with_capacity(d_total as usize);
    let mut pending: Vec<Pending> = Vec::new();

    // Shifts tracked positions after `op` ran.
    fn shift(pending: &mut [Pending], op: PrimOp) {
        for p in pending.iter_mut() {
            if p.cancelled {
                continue;
            }
            match op {
                PrimOp::Insert(q, _) => {
                    if q <= p.pos {
                        p.pos += 1;
                    }
                }
                PrimOp::Delete(q) => {
                    if q < p.pos {
                        p.pos -= 1;
                    } else if q == p.pos && p.kind != EditKind::Delete {
                        // The tracked character was destroyed: the edit was
                        // overridden, so its undo is dropped.
                        p.cancelled = true;
                    }
                }
                PrimOp::Substitute(..) => {}
            }
        }
    }

    for d in 1..=d_total {
        let mut ops = Vec::new();
        if let Some(mut list) = events.remove(&d) {
            list.sort_by_key(|&(idx, _)| idx);
            for (_, ev) in list {
                match ev {
                    Event::Apply(i) => {
                        let e = &mut script.edits[i];
                        if let Some((rng, alphabet)) = draw.as_mut() {
                            if state.len() <= 1 && e.kind == EditKind::Delete {
                                // Keep documents nonempty.
                                e.kind = if rng.gen_bool(0.5) {
                                    EditKind::Insert
                                } else {
                                    EditKind::Substitute
                                };
                            }
                            let hi = match e.kind {
                                EditKind::Insert => state.len() as u64 + 1,
                                _ => state.len() as u64,
                            };
                            e.pos = rng.gen_range(1..=hi);
                            // Deletions carry no symbol (the text form writes '-').
                            e.sym = if e.kind == EditKind::Delete {
                                0
                            } else {
                                alphabet[rng.gen_range(0..alphabet.len())]
                            };
                        }
                        let len = state.len() as u64;
                        let op = match e.kind {
                            EditKind::Insert => {
                                if e.pos < 1 || e.pos > len + 1 {
                                    return Err(Error::Script(format!(
                                        "edit {}: insert position {} outside 1..={}",
                                        i + 1,
                                        e.pos,
                                        len + 1
                                    )));
                                }
                                PrimOp::Insert(e.pos, e.sym)
                            }
                            EditKind::Delete => {
                                if e.pos < 1 || e.pos > len {
                                    return Err(Error::Script(format!(
                                        "edit {}: delete position {} outside 1..={}",
                                        i + 1,
                                        e.pos,
                                        len
                                    )));
                                }
                                PrimOp::Delete(e.pos)
                            }
                            EditKind::Substitute => {
                                if e.pos < 1 || e.pos > len {
                                    return Err(Error::Script(format!(
                                        "edit {}: substitute position {} outside 1..={}",
                                        i + 1,
                                        e.pos,
                                        len
                                    )));
                                }
                                PrimOp::Substitute(e.pos, e.sym)
                            }
                        };
                        let prev_sym = match op {
                            PrimOp::Insert(..) => 0,
                            PrimOp::Delete(q) | PrimOp::Substitute(q, _) => state[q as usize - 1],
                        };
                        apply_op(&mut state, op);
                        shift(&mut pending, op);
                        if e.d_to < d_total {
                            pending.push(Pending {
                                script_idx: i,
                                kind: e.kind,
                                pos: e.pos,
                                applied_sym: e.sym,
                                prev_sym,
                                cancelled: false,
                            });
                        }
                        ops.push(op);
                    }
                    Event::Undo(i) => {
                        let slot = pending.iter().position(|p| p.script_idx == i).expect("undo without apply");
                        let p = pending.remove(slot);
                        if p.cancelled {
                            continue;
                        }
                        let undo = match p.kind {
                            EditKind::Substitute => {
                                if state.get(p.pos as usize - 1) == Some(&p.applied_sym) {
                                    Some(PrimOp::Substitute(p.pos, p.prev_sym))
                                } else {
                                    None
                                }
                            }
                            EditKind::Insert => {
                                if state.get(p.pos as usize - 1) == Some(&p.applied_sym) {
                                    Some(PrimOp::Delete(p.pos))
                                } else {
                                    None
                                }
                            }
                            EditKind::Delete => Some(PrimOp::Insert(p.pos.min(state.len() as u64 + 1), p.prev_sym)),
                        };
                        if let Some(op) = undo {
                            apply_op(&mut state, op);
                            shift(&mut pending, op);
                            ops.push(op);
                        }
                    }
                }
            }
        }
        docs.push(state.clone());
        per_doc.push(ops);
    }
    Ok((docs, Normalized { per_doc }))
}

fn apply_op(state: &mut Vec<u8>, op: PrimOp) {
    match op {
        PrimOp::Insert(p, s) => state.insert(p as usize - 1, s),
        PrimOp::Delete(p) => {
            state.remove(p as usize - 1);
        }
        PrimOp::Substitute(p, s) => state[p as usize - 1] = s,
    }
}

impl EditScript {
    /// Normalizes into per-document operations, validating every position.
    pub fn normalize(&self, base: &[u8]) -> Result<Normalized> {
        let mut copy = self.clone();
        execute(&mut copy, base, None).map(|(_, n)| n)
    }

    /// Replays the script over `base` into document snapshots.
    pub fn replay(&self, base: &[u8]) -> Result<Vec<Vec<u8>>> {
        let mut copy = self.clone();
        execute(&mut copy, base, None).map(|(docs, _)| docs)
    }

    /// Line-oriented text encoding; see FORMAT.md.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "gramdex-script v1");
        let _ = writeln!(s, "n {}", self.base_len);
        let _ = writeln!(s, "d {}", self.docs);
        for e in &self.edits {
            let kind = match e.kind {
                EditKind::Insert => "ins",
                EditKind::Delete => "del",
                EditKind::Substitute => "sub",
            };
            let sym = if e.kind == EditKind::Delete {
                "-".to_string()
            } else {
                encode_sym(e.sym)
            };
            let _ = writeln!(s, "{kind} {} {sym} {} {}", e.pos, e.d_from, e.d_to);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<EditScript> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Script("empty script".into()))?;
        if header.trim() != "gramdex-script v1" {
            return Err(Error::Script(format!("unknown script header '{header}'")));
        }
        let mut base_len = None;
        let mut docs = None;
        let mut edits = Vec::new();
        for line in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.as_slice() {
                ["n", v] => base_len = Some(parse_num(v, "base length")?),
                ["d", v] => docs = Some(parse_num(v, "document count")? as u32),
                [kind, pos, sym, d_from, d_to] => {
                    let kind = match *kind {
                        "ins" => EditKind::Insert,
                        "del" => EditKind::Delete,
                        "sub" => EditKind::Substitute,
                        other => return Err(Error::Script(format!("unknown edit kind '{other}'"))),
                    };
                    edits.push(Edit {
                        kind,
                        pos: parse_num(pos, "position")?,
                        sym: if kind == EditKind::Delete { 0 } else { decode_sym(sym)? },
                        d_from: parse_num(d_from, "d_from")? as u32,
                        d_to: parse_num(d_to, "d_to")? as u32,
                    });
                }
                _ => return Err(Error::Script(format!("malformed script line '{line}'"))),
            }
        }
        Ok(EditScript {
            base_len: base_len.ok_or_else(|| Error::Script("missing base length".into()))?,
            docs: docs.ok_or_else(|| Error::Script("missing document count".into()))?,
            edits,
        })
    }
}

fn parse_num(s: &str, what: &str) -> Result<u64> {
    s.parse().map_err(|_| Error::Script(format!("invalid {what} '{s}'")))
}

fn encode_sym(b: u8) -> String {
    if (b'!'..=b'~').contains(&b) && b != b'\\' && b != b'-' {
        (b as char).to_string()
    } else {
        format!("\\x{b:02x}")
    }
}

fn decode_sym(s: &str) -> Result<u8> {
    let bytes = s.as_bytes();
    if bytes.len() == 1 {
        return Ok(bytes[0]);
    }
    if let Some(hex) = s.strip_prefix("\\x") {
        if hex.len() == 2 {
            if let Ok(v) = u8::from_str_radix(hex, 16) {
                return Ok(v);
            }
        }
    }
    Err(Error::Script(format!("invalid symbol encoding '{s}'")))
}

/// Generates a collection under the given edit model. Deterministic in the
/// parameters: the same call yields byte-identical documents and script.
pub fn generate(params: &GenParams) -> Result<(Collection, EditScript)> {
    if params.n == 0 {
        return Err(Error::Params("base length must be positive".into()));
    }
    if params.docs == 0 {
        return Err(Error::Params("document count must be positive".into()));
    }
    if params.sigma == 0 {
        return Err(Error::Params("alphabet must be nonempty".into()));
    }
    if params.docs == 1 && params.edits > 0 {
        return Err(Error::Params("edits require at least two documents".into()));
    }
    let alphabet: Vec<u8> = if params.sigma <= 26 {
        (0..params.sigma).map(|k| b'a' + k).collect()
    } else {
        (1..=params.sigma).collect()
    };
    let mut rng = ChaCha12Rng::seed_from_u64(params.seed);
    let base: Vec<u8> = (0..params.n).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect();

    let tree = if params.model == Model::Subtree && params.docs >= 2 {
        Some(VersionTree::random(&mut rng, params.docs))
    } else {
        None
    };
    let mut edits = Vec::with_capacity(params.edits);
    for _ in 0..params.edits {
        let kind = match rng.gen_range(0..3) {
            0 => EditKind::Insert,
            1 => EditKind::Delete,
            _ => EditKind::Substitute,
        };
        let (d_from, d_to) = match params.model {
            Model::Single => {
                let d = rng.gen_range(2..=params.docs);
                (d, d)
            }
            Model::Range => {
                let d = rng.gen_range(2..=params.docs);
                (d, rng.gen_range(d..=params.docs))
            }
            Model::Subtree => {
                let v = rng.gen_range(2..=params.docs);
                tree.as_ref().unwrap().preorder_range(v)
            }
        };
        // Position and symbol are drawn at application time by `execute`.
        edits.push(Edit {
            kind,
            pos: 0,
            sym: 0,
            d_from,
            d_to,
        });
    }
    let mut script = EditScript {
        base_len: params.n as u64,
        docs: params.docs,
        edits,
    };
    let (docs, _) = execute(&mut script, &base, Some((&mut rng, &alphabet)))?;
    let collection = Collection {
        docs,
        script: Some(script.clone()),
    };
    Ok((collection, script))
}

impl Collection {
    /// Wraps already-materialized documents (no provenance script).
    pub fn from_documents(docs: Vec<Vec<u8>>) -> Result<Collection> {
        if docs.is_empty() {
            return Err(Error::Params("collection must hold at least one document".into()));
        }
        Ok(Collection { docs, script: None })
    }

    /// Attaches a provenance script, verifying it replays to the documents.
    pub fn with_script(docs: Vec<Vec<u8>>, script: EditScript) -> Result<Collection> {
        let replayed = script.replay(docs.first().map(Vec::as_slice).unwrap_or(&[]))?;
        if replayed != docs {
            return Err(Error::Script("script replay does not reproduce the documents".into()));
        }
        Ok(Collection {
            docs,
            script: Some(script),
        })
    }

    pub fn documents(&self) -> &[Vec<u8>] {
        &self.docs
    }

    pub fn doc(&self, d: u32) -> &[u8] {
        &self.docs[d as usize - 1]
    }

    pub fn num_docs(&self) -> u32 {
        self.docs.len() as u32
    }

    pub fn base(&self) -> &[u8] {
        &self.docs[0]
    }

    pub fn script(&self) -> Option<&EditScript> {
        self.script.as_ref()
    }

    pub fn total_len(&self) -> u64 {
        self.docs.iter().map(|d| d.len() as u64).sum()
    }

    pub fn doc_lens(&self) -> Vec<u64> {
        self.docs.iter().map(|d| d.len() as u64).collect()
    }

    /// Reads a collection directory: `doc_*` files in name order plus an
    /// optional `script.gds`.
    pub fn read_dir(dir: &Path) -> Result<Collection> {
        let mut doc_files: Vec<_> = std::fs::read_dir(dir)?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| {
                p.file_name()
                    .and_then(|n| n.to_str())
                    .map(|n| n.starts_with("doc_"))
                    .unwrap_or(false)
            })
            .collect();
        doc_files.sort();
        if doc_files.is_empty() {
            return Err(Error::Params(format!("no doc_* files in {}", dir.display())));
        }
        let docs: Vec<Vec<u8>> = doc_files
            .iter()
            .map(|p| std::fs::read(p).map_err(Error::from))
            .collect::<Result<_>>()?;
        let script_path = dir.join("script.gds");
        if script_path.exists() {
            let text = std::fs::read_to_string(&script_path)?;
            Collection::with_script(docs, EditScript::from_text(&text)?)
        } else {
            Collection::from_documents(docs)
        }
    }

    /// Writes `doc_NNNN` files plus `script.gds` when provenance is known.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (i, doc) in self.docs.iter().enumerate() {
            std::fs::write(dir.join(format!("doc_{:04}", i + 1)), doc)?;
        }
        if let Some(script) = &self.script {
            std::fs::write(dir.join("script.gds"), script.to_text())?;
        }
        Ok(())
    }

    /// Single-file encoding: records separated by 0x1E, with 0x1B as escape
    /// (0x1B 0x00 encodes 0x1B, 0x1B 0x01 encodes 0x1E).
    pub fn to_single_file(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for (i, doc) in self.docs.iter().enumerate() {
            if i > 0 {
                out.push(0x1e);
            }
            for &b in doc {
                match b {
                    0x1b => out.extend_from_slice(&[0x1b, 0x00]),
                    0x1e => out.extend_from_slice(&[0x1b, 0x01]),
                    _ => out.push(b),
                }
            }
        }
        out
    }

    pub fn from_single_file(data: &[u8]) -> Result<Collection> {
        let mut docs = vec![Vec::new()];
        let mut i = 0;
        while i < data.len() {
            match data[i] {
                0x1e => docs.push(Vec::new()),
                0x1b => {
                    i += 1;
                    match data.get(i) {
                        Some(0x00) => docs.last_mut().unwrap().push(0x1b),
                        Some(0x01) => docs.last_mut().unwrap().push(0x1e),
                        _ => return Err(Error::Params("dangling escape in single-file collection".into())),
                    }
                }
                b => docs.last_mut().unwrap().push(b),
            }
            i += 1;
        }
        Collection::from_documents(docs)
    }
}

/// Small worked collection used in documentation and tests: the documents
/// "abracada", "abrakada", "ablakada" as a base plus two ranged
/// substitutions.
pub fn example_script() -> (Vec<u8>, EditScript) {
    (
        b"abracada".to_vec(),
        EditScript {
            base_len: 8,
            docs: 3,
            edits: vec![
                Edit {
                    kind: EditKind::Substitute,
                    pos: 5,
                    sym: b'k',
                    d_from: 2,
                    d_to: 3,
                },
                Edit {
                    kind: EditKind::Substitute,
                    pos: 3,
                    sym: b'l',
                    d_from: 3,
                    d_to: 3,
                },
            ],
        },
    )
}

/// Every occurrence of `pattern` in `docs` by forward scanning; overlapping
/// occurrences count. Returns `(document, 1-based offset)` pairs in order.
pub fn naive_occurrences(docs: &[Vec<u8>], pattern: &[u8]) -> Vec<(u32, u64)> {
    let mut out = Vec::new();
    if pattern.is_empty() {
        return out;
    }
    for (d, doc) in docs.iter().enumerate() {
        let mut i = 0usize;
        while i + pattern.len() <= doc.len() {
            if &doc[i..i + pattern.len()] == pattern {
                out.push((d as u32 + 1, i as u64 + 1));
            }
            i += 1;
        }
    }
    out
}

/// Independent second scan for cross-checking: window iterator based.
pub fn naive_occurrences_alt(docs: &[Vec<u8>], pattern: &[u8]) -> Vec<(u32, u64)> {
    let mut out = Vec::new();
    if pattern.is_empty() {
        return out;
    }
    for (d, doc) in docs.iter().enumerate() {
        if doc.len() < pattern.len() {
            continue;
        }
        for (i, w) in doc.windows(pattern.len()).enumerate() {
            if w == pattern {
                out.push((d as u32 + 1, i as u64 + 1));
            }
        }
    }
    out
}

/// Ascending documents containing `pattern`.
pub fn naive_list(docs: &[Vec<u8>], pattern: &[u8]) -> Vec<u32> {
    let mut out: Vec<u32> = naive_occurrences(docs, pattern).iter().map(|&(d, _)| d).collect();
    out.dedup();
    out
}

pub fn naive_count(docs: &[Vec<u8>], pattern: &[u8]) -> u64 {
    naive_occurrences(docs, pattern).len() as u64
}
