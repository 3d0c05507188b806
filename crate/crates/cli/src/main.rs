//! gramdex: generate repetitive collections, build compressed document
//! indexes, query them, and verify against direct scans.
//!
//! Exit codes: 0 success, 1 verification mismatch, 2 usage error,
//! 3 I/O or corrupt data.

use clap::{Args, Parser, Subcommand};
use gramdex::collection::{self, Collection, Model};
use gramdex::{BuildOptions, Error, Index};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde_json::json;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "gramdex", version, about = "Compressed document listing over repetitive collections")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic collection from an edit model.
    Gen(GenArgs),
    /// Build an index container from a collection.
    Build(BuildArgs),
    /// Run list/count/locate queries against a container.
    Query(QueryArgs),
    /// Compare index answers with direct scans of the collection.
    Verify(VerifyArgs),
    /// Report sizes and shape of a container.
    Stats(StatsArgs),
    /// Time queries over a pattern-length sweep, CSV on stdout.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Base document length.
    #[arg(long)]
    n: usize,
    /// Number of documents.
    #[arg(long = "D")]
    docs: u32,
    /// Number of edits.
    #[arg(long = "s")]
    edits: usize,
    /// Alphabet size.
    #[arg(long, default_value_t = 4)]
    sigma: u8,
    /// Edit lifetime model: single, range, or subtree.
    #[arg(long, default_value = "range")]
    model: String,
    /// Output directory (doc_0001.. plus script.gds).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BuildArgs {
    /// Collection directory or single concatenated file.
    #[arg(long = "in")]
    input: PathBuf,
    /// Container output path.
    #[arg(long)]
    out: PathBuf,
    /// Maximum stored-terminal length.
    #[arg(long = "ms-len", default_value_t = 1)]
    ms_len: usize,
    /// Upward-tracking sample exponent in (0, 1].
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    /// Weight sample step; 0 picks log2 of the point count.
    #[arg(long, default_value_t = 0)]
    tau: usize,
    /// Point storage: leaf (labels at wavelet leaves) or root.
    #[arg(long = "list-layout", default_value = "leaf")]
    list_layout: String,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    index: PathBuf,
    /// One of list, count, locate.
    #[arg(long)]
    op: String,
    /// Pattern bytes; ASCII with \xHH escapes, repeatable.
    #[arg(long, required = true)]
    pattern: Vec<String>,
    /// Interpret patterns as hex strings.
    #[arg(long, default_value_t = false)]
    hex: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    index: PathBuf,
    /// Collection the container was built from.
    #[arg(long)]
    collection: PathBuf,
    #[arg(long = "num-patterns", default_value_t = 200)]
    num_patterns: usize,
    /// Longest sampled pattern.
    #[arg(long = "max-m", default_value_t = 8)]
    max_m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    index: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    index: PathBuf,
    /// Pattern lengths 1..=max-m are swept.
    #[arg(long = "max-m", default_value_t = 12)]
    max_m: usize,
    /// Patterns sampled per length.
    #[arg(long = "per-length", default_value_t = 25)]
    per_length: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // clap exits 2 on usage errors and 0 for --help/--version.
        Err(e) => e.exit(),
    };
    let res = match cli.cmd {
        Cmd::Gen(a) => cmd_gen(a),
        Cmd::Build(a) => cmd_build(a),
        Cmd::Query(a) => cmd_query(a),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Stats(a) => cmd_stats(a),
        Cmd::Bench(a) => cmd_bench(a),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("gramdex: {e}");
            match e {
                Error::Io(_) | Error::Corrupt(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

/// Prints one output line; a closed pipe ends the program quietly.
fn emit(line: std::fmt::Arguments) {
    let mut out = std::io::stdout().lock();
    if let Err(e) = out.write_fmt(format_args!("{line}\n")) {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("gramdex: {e}");
        std::process::exit(3);
    }
}

macro_rules! emit {
    ($($arg:tt)*) => { emit(format_args!($($arg)*)) };
}

fn cmd_gen(a: GenArgs) -> Result<ExitCode, Error> {
    let model: Model = a.model.parse()?;
    let params = gramdex::GenParams {
        seed: a.seed,
        n: a.n,
        docs: a.docs,
        edits: a.edits,
        sigma: a.sigma,
        model,
    };
    let (coll, _) = collection::generate(&params)?;
    coll.write_dir(&a.out)?;
    eprintln!(
        "wrote {} documents ({} bytes) to {}",
        coll.num_docs(),
        coll.total_len(),
        a.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn read_collection(path: &Path) -> Result<Collection, Error> {
    if path.is_dir() {
        Collection::read_dir(path)
    } else {
        Collection::from_single_file(&std::fs::read(path)?)
    }
}

fn cmd_build(a: BuildArgs) -> Result<ExitCode, Error> {
    let root_layout = match a.list_layout.as_str() {
        "leaf" => false,
        "root" => true,
        other => return Err(Error::Params(format!("unknown layout '{other}'"))),
    };
    let coll = read_collection(&a.input)?;
    let options = BuildOptions {
        ms_len: a.ms_len,
        epsilon: a.epsilon,
        tau: a.tau,
        root_layout,
    };
    let ix = Index::build(&coll, &options)?;
    ix.save(&a.out)?;
    let s = ix.stats();
    eprintln!(
        "indexed {} documents, {} rules, {} grid points, {} bits -> {}",
        s.docs,
        s.rules,
        s.points,
        s.total_bits,
        a.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

/// Decodes `\xHH` escapes (and `\\`) in a pattern argument.
fn decode_pattern(s: &str, hex: bool) -> Result<Vec<u8>, Error> {
    if hex {
        let clean: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if !clean.len().is_multiple_of(2) || !clean.chars().all(|c| c.is_ascii_hexdigit()) {
            return Err(Error::Params(format!("bad hex pattern '{s}'")));
        }
        return Ok((0..clean.len())
            .step_by(2)
            .map(|i| u8::from_str_radix(&clean[i..i + 2], 16).unwrap())
            .collect());
    }
    let bytes = s.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'\\' {
            match bytes.get(i + 1) {
                Some(b'\\') => {
                    out.push(b'\\');
                    i += 2;
                }
                Some(b'x') if i + 3 < bytes.len() => {
                    let h = std::str::from_utf8(&bytes[i + 2..i + 4])
                        .ok()
                        .and_then(|h| u8::from_str_radix(h, 16).ok())
                        .ok_or_else(|| Error::Params(format!("bad escape in pattern '{s}'")))?;
                    out.push(h);
                    i += 4;
                }
                _ => return Err(Error::Params(format!("bad escape in pattern '{s}'"))),
            }
        } else {
            out.push(bytes[i]);
            i += 1;
        }
    }
    Ok(out)
}

/// Printable ASCII stays literal; everything else becomes `\xHH`.
fn encode_pattern(b: &[u8]) -> String {
    let mut out = String::new();
    for &c in b {
        if c == b'\\' {
            out.push_str("\\\\");
        } else if (0x20..0x7f).contains(&c) {
            out.push(c as char);
        } else {
            out.push_str(&format!("\\x{c:02x}"));
        }
    }
    out
}

fn cmd_query(a: QueryArgs) -> Result<ExitCode, Error> {
    if !matches!(a.op.as_str(), "list" | "count" | "locate") {
        return Err(Error::Params(format!("unknown op '{}'", a.op)));
    }
    let ix = Index::load(&a.index)?;
    for raw in &a.pattern {
        let pat = decode_pattern(raw, a.hex)?;
        let record = match a.op.as_str() {
            "count" => json!({
                "op": "count",
                "pattern": encode_pattern(&pat),
                "result": ix.count(&pat)?,
            }),
            "locate" => {
                let occ = ix.locate(&pat)?;
                json!({
                    "op": "locate",
                    "pattern": encode_pattern(&pat),
                    "result": occ.iter().map(|o| json!({
                        "doc": o.doc, "offset": o.offset, "global": o.global,
                    })).collect::<Vec<_>>(),
                })
            }
            _ => {
                let res = ix.list(&pat)?;
                json!({
                    "op": "list",
                    "pattern": encode_pattern(&pat),
                    "result": res.docs,
                    "stats": {
                        "rmq_calls": res.stats.rmq_calls,
                        "lists_opened": res.stats.lists_opened,
                        "elements_scanned": res.stats.elements_scanned,
                        "nodes_visited": res.stats.nodes_visited,
                    },
                })
            }
        };
        emit!("{record}");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(a: VerifyArgs) -> Result<ExitCode, Error> {
    let ix = Index::load(&a.index)?;
    let coll = read_collection(&a.collection)?;
    if a.num_patterns == 0 {
        eprintln!("warning: 0 patterns requested; nothing verified");
        return Ok(ExitCode::SUCCESS);
    }
    if ix.doc.num_docs() != coll.num_docs() {
        emit!(
            "{}",
            json!({"check": "docs", "expected": coll.num_docs(), "got": ix.doc.num_docs()})
        );
        return Ok(ExitCode::from(1));
    }
    let docs = coll.documents();
    let mut failures = 0usize;
    for d in 1..=coll.num_docs() {
        let text = &docs[d as usize - 1];
        let got = ix.extract(d, 1, text.len() as u64)?;
        if &got != text {
            emit!(
                "{}",
                json!({"check": "extract", "doc": d, "expected": encode_pattern(text), "got": encode_pattern(&got)})
            );
            failures += 1;
        }
    }
    let alphabet: Vec<u8> = {
        let mut set = [false; 256];
        for doc in docs {
            for &b in doc {
                set[b as usize] = true;
            }
        }
        (0u16..256).filter(|&b| set[b as usize]).map(|b| b as u8).collect()
    };
    let mut rng = ChaCha12Rng::seed_from_u64(a.seed);
    let mut checked = 0usize;
    while checked < a.num_patterns {
        let m = rng.gen_range(1..=a.max_m.max(1));
        let pat: Vec<u8> = if rng.gen_bool(0.75) {
            let doc = &docs[rng.gen_range(0..docs.len())];
            if doc.len() < m {
                continue;
            }
            let s = rng.gen_range(0..=doc.len() - m);
            doc[s..s + m].to_vec()
        } else {
            (0..m).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect()
        };
        checked += 1;

        let want_count = collection::naive_count(docs, &pat);
        let got_count = ix.count(&pat)?;
        if got_count != want_count {
            emit!(
                "{}",
                json!({"check": "count", "seed": a.seed, "pattern": encode_pattern(&pat), "expected": want_count, "got": got_count})
            );
            failures += 1;
        }

        let want_list = collection::naive_list(docs, &pat);
        let got_list = ix.list(&pat)?.docs;
        if got_list != want_list {
            emit!(
                "{}",
                json!({"check": "list", "seed": a.seed, "pattern": encode_pattern(&pat), "expected": want_list, "got": got_list})
            );
            failures += 1;
        }

        let want_occ = collection::naive_occurrences(docs, &pat);
        let got_occ: Vec<(u32, u64)> = ix.locate(&pat)?.iter().map(|o| (o.doc, o.offset)).collect();
        if got_occ != want_occ {
            emit!(
                "{}",
                json!({"check": "locate", "seed": a.seed, "pattern": encode_pattern(&pat), "expected": want_occ.len(), "got": got_occ.len()})
            );
            failures += 1;
        }
    }
    if failures > 0 {
        eprintln!("{failures} mismatches over {checked} patterns");
        return Ok(ExitCode::from(1));
    }
    eprintln!("verified {checked} patterns: all match");
    Ok(ExitCode::SUCCESS)
}

fn cmd_stats(a: StatsArgs) -> Result<ExitCode, Error> {
    let ix = Index::load(&a.index)?;
    let s = ix.stats();
    let record = json!({
        "docs": s.docs,
        "total_len": s.total_len,
        "rules": s.rules,
        "leaves": s.leaves,
        "grammar_symbols": s.grammar_symbols,
        "points": s.points,
        "cols": s.cols,
        "rows": s.rows,
        "ms_len": s.ms_len,
        "rho_per_level": s.rho_per_level,
        "bits": {
            "grammar": s.grammar_bits,
            "grid": s.grid_bits,
            "marks": s.marks_bits,
            "rmq": s.rmq_bits,
            "lists": s.lists_bits,
            "short": s.short_bits,
            "total": s.total_bits,
        },
    });
    emit!("{record}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench(a: BenchArgs) -> Result<ExitCode, Error> {
    let ix = Index::load(&a.index)?;
    let mut rng = ChaCha12Rng::seed_from_u64(a.seed);
    let ndocs = ix.doc.num_docs();
    emit!("op,m,queries,total_ns,avg_ns");
    for m in 1..=a.max_m {
        let mut pats: Vec<Vec<u8>> = Vec::new();
        for _ in 0..a.per_length.max(1) * 4 {
            if pats.len() >= a.per_length.max(1) {
                break;
            }
            let d = rng.gen_range(1..=ndocs);
            let len = ix.pattern.doc_len(d);
            if len < m as u64 {
                continue;
            }
            let s = rng.gen_range(1..=len - m as u64 + 1);
            pats.push(ix.extract(d, s, s + m as u64 - 1)?);
        }
        if pats.is_empty() {
            break;
        }
        for op in ["list", "count", "locate"] {
            let start = Instant::now();
            let mut sink = 0u64;
            for pat in &pats {
                sink = sink.wrapping_add(match op {
                    "list" => ix.list(pat)?.docs.len() as u64,
                    "count" => ix.count(pat)?,
                    _ => ix.locate(pat)?.len() as u64,
                });
            }
            let total = start.elapsed().as_nanos() as u64;
            std::hint::black_box(sink);
            emit!("{op},{m},{},{},{}", pats.len(), total, total / pats.len() as u64);
        }
    }
    Ok(ExitCode::SUCCESS)
}
