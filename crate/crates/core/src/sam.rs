//! The collision-sampling oracle, its interaction trace, the query forest and
//! normal-form accounting.
//!
//! Canonical query bytes (version 1), which key the per-query permutation:
//!
//! ```text
//! 0x01 | u8 has_w | u64le w (0 when absent) | u8 has_c | [C id (32)] | C_next id (32)
//! ```
//!
//! Trace serialization is JSON lines: a header `{"schema":"samlab.trace.v1"}`
//! followed by one record per Sam or direct oracle call.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::circuit::{Program, ProgramId};
use crate::error::{Error, Result};
use crate::oracle::{OracleAccess, OracleName};
use crate::prp::{HashFamily, Prp};

pub const TRACE_SCHEMA: &str = "samlab.trace.v1";
pub const MAX_SAM_BITS: u32 = 24;

/// A Sam query `(w, C, C_next)`; `w` and `C` are absent together.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SamQuery {
    pub w: Option<u64>,
    pub c: Option<Program>,
    pub c_next: Program,
}

impl SamQuery {
    pub fn root(c_next: Program) -> Self {
        SamQuery { w: None, c: None, c_next }
    }

    pub fn child(w: u64, c: Program, c_next: Program) -> Self {
        SamQuery { w: Some(w), c: Some(c), c_next }
    }

    pub fn m(&self) -> u32 {
        self.c_next.input_len()
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.m();
        if m > MAX_SAM_BITS {
            return Err(Error::MalformedQuery(format!("input length {m} above cap {MAX_SAM_BITS}")));
        }
        match (&self.w, &self.c) {
            (None, None) => Ok(()),
            (Some(w), Some(c)) => {
                if c.input_len() != m {
                    return Err(Error::MalformedQuery(format!(
                        "C takes {} bits but C_next takes {m}",
                        c.input_len()
                    )));
                }
                if m < 64 && w >> m != 0 {
                    return Err(Error::MalformedQuery(format!("w = {w} wider than {m} bits")));
                }
                Ok(())
            }
            _ => Err(Error::MalformedQuery("w and C must be absent together".into())),
        }
    }

    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut b = Vec::with_capacity(1 + 9 + 33 + 32);
        b.push(1);
        b.push(self.w.is_some() as u8);
        b.extend(self.w.unwrap_or(0).to_le_bytes());
        match &self.c {
            Some(c) => {
                b.push(1);
                b.extend(c.id().0);
            }
            None => b.push(0),
        }
        b.extend(self.c_next.id().0);
        b
    }

    pub fn permutation(&self, h: &HashFamily) -> Prp {
        h.perm(&self.canonical_bytes(), self.m())
    }
}

/// Answer of the oracle: `h_q(0)` for a root query, otherwise `h_q(v)` for the
/// smallest `v` with `C(h_q(v)) = C(w)`.
pub fn sam_answer(h: &HashFamily, oracle: &mut dyn OracleAccess, q: &SamQuery) -> Result<u64> {
    q.validate()?;
    let p = q.permutation(h);
    let (w, c) = match (&q.w, &q.c) {
        (Some(w), Some(c)) => (*w, c),
        _ => return Ok(p.eval(0)),
    };
    let target = c.eval_plain(w, oracle)?;
    for v in 0..1u64 << q.m() {
        let u = p.eval(v);
        if c.eval_plain(u, oracle)? == target {
            return Ok(u);
        }
    }
    Err(Error::Internal("no preimage found although w is one".into()))
}

#[derive(Clone, Debug)]
pub enum TraceEntry {
    Sam { query: SamQuery, answer: u64 },
    Direct { oracle: OracleName, input: u64, output: u64 },
}

/// A Sam instance: hash family plus the chronological interaction record.
#[derive(Clone, Debug)]
pub struct SamOracle {
    hash: HashFamily,
    trace: Vec<TraceEntry>,
}

impl SamOracle {
    pub fn new(hash: HashFamily) -> Self {
        SamOracle { hash, trace: Vec::new() }
    }

    pub fn hash(&self) -> &HashFamily {
        &self.hash
    }

    pub fn query(&mut self, oracle: &mut dyn OracleAccess, q: SamQuery) -> Result<u64> {
        let answer = sam_answer(&self.hash, oracle, &q)?;
        self.trace.push(TraceEntry::Sam { query: q, answer });
        Ok(answer)
    }

    /// A direct oracle call made by the caller, recorded for cost accounting.
    pub fn direct(&mut self, oracle: &mut dyn OracleAccess, name: OracleName, x: u64) -> Result<u64> {
        let y = oracle.query(name, x)?;
        self.record_direct(name, x, y);
        Ok(y)
    }

    pub fn record_direct(&mut self, oracle: OracleName, input: u64, output: u64) {
        self.trace.push(TraceEntry::Direct { oracle, input, output });
    }

    pub fn trace(&self) -> &[TraceEntry] {
        &self.trace
    }

    pub fn sam_calls(&self) -> usize {
        self.trace.iter().filter(|e| matches!(e, TraceEntry::Sam { .. })).count()
    }

    pub fn records(&self) -> Vec<TraceRecord> {
        to_records(&self.trace)
    }

    pub fn stats(&self) -> TraceStats {
        TraceStats::compute(&self.records())
    }
}

/// Serializable description of a program inside a trace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgramRef {
    pub id: ProgramId,
    /// Id with trivial-extension wrappers removed.
    pub core: ProgramId,
    /// Lineage ids, nearest ancestor first.
    pub chain: Vec<ProgramId>,
    pub query_bound: u32,
    pub input_len: u32,
    pub output_len: u32,
}

impl ProgramRef {
    pub fn of(p: &Program) -> Self {
        ProgramRef {
            id: p.id(),
            core: p.core().id(),
            chain: p.lineage_ids(),
            query_bound: p.query_bound(),
            input_len: p.input_len(),
            output_len: p.output_len(),
        }
    }

    /// Same rule as [`crate::circuit::is_extension`], on recorded data.
    pub fn extended_by(&self, b: &ProgramRef) -> bool {
        let t = [self.id, self.core];
        t.contains(&b.id) || b.chain.iter().any(|x| t.contains(x))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum TraceRecord {
    Sam { w: Option<u64>, c: Option<ProgramRef>, c_next: ProgramRef, answer: u64 },
    Direct { oracle: OracleName, input: u64, output: u64 },
}

pub fn to_records(trace: &[TraceEntry]) -> Vec<TraceRecord> {
    trace
        .iter()
        .map(|e| match e {
            TraceEntry::Sam { query, answer } => TraceRecord::Sam {
                w: query.w,
                c: query.c.as_ref().map(ProgramRef::of),
                c_next: ProgramRef::of(&query.c_next),
                answer: *answer,
            },
            TraceEntry::Direct { oracle, input, output } => {
                TraceRecord::Direct { oracle: *oracle, input: *input, output: *output }
            }
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
struct Header {
    schema: String,
}

pub fn write_jsonl(records: &[TraceRecord], mut out: impl Write) -> std::io::Result<()> {
    serde_json::to_writer(&mut out, &Header { schema: TRACE_SCHEMA.into() })?;
    out.write_all(b"\n")?;
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_jsonl(input: impl BufRead) -> Result<Vec<TraceRecord>> {
    let mut lines = input.lines();
    let bad = |e: String| Error::Decode(format!("trace: {e}"));
    let head = lines.next().ok_or_else(|| bad("empty".into()))?.map_err(|e| bad(e.to_string()))?;
    let h: Header = serde_json::from_str(&head).map_err(|e| bad(e.to_string()))?;
    if h.schema != TRACE_SCHEMA {
        return Err(bad(format!("unknown schema {}", h.schema)));
    }
    let mut out = Vec::new();
    for l in lines {
        let l = l.map_err(|e| bad(e.to_string()))?;
        if l.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&l).map_err(|e| bad(e.to_string()))?);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    DuplicateNext,
    NotExtension,
    Orphan,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// Position among the Sam calls.
    pub sam_index: usize,
    pub kind: ViolationKind,
}

/// Parent links over the Sam calls of a trace, in chronological order.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct QueryForest {
    pub parents: Vec<Option<usize>>,
    pub depths: Vec<u32>,
    #[serde(skip)]
    index: HashMap<(ProgramId, u64), usize>,
}

impl PartialEq for QueryForest {
    fn eq(&self, other: &Self) -> bool {
        self.parents == other.parents && self.depths == other.depths
    }
}

impl Eq for QueryForest {}

impl QueryForest {
    /// Appends a node; the parent is the earliest node whose `C_next` is this
    /// query's `C` and whose answer is this query's `w`.
    pub fn insert(&mut self, w: Option<u64>, c: Option<ProgramId>, c_next: ProgramId, answer: u64) -> Option<usize> {
        let i = self.parents.len();
        let parent = match (w, c) {
            (Some(w), Some(c)) => self.index.get(&(c, w)).copied(),
            _ => None,
        };
        self.parents.push(parent);
        self.depths.push(parent.map_or(1, |p| self.depths[p] + 1));
        self.index.entry((c_next, answer)).or_insert(i);
        parent
    }

    pub fn depth(&self) -> u32 {
        self.depths.iter().copied().max().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parents.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStats {
    pub sam_calls: u64,
    pub direct_calls: u64,
    pub depth: u32,
    pub augmented_cost: u64,
    pub normal_form: bool,
    pub violations: Vec<Violation>,
    pub forest: QueryForest,
}

impl TraceStats {
    pub fn compute(records: &[TraceRecord]) -> TraceStats {
        let mut forest = QueryForest::default();
        let mut seen_next: HashSet<ProgramId> = HashSet::new();
        let mut violations = Vec::new();
        let (mut sam_calls, mut direct_calls, mut cost) = (0u64, 0u64, 0u64);
        for r in records {
            match r {
                TraceRecord::Direct { .. } => {
                    direct_calls += 1;
                    cost += 1;
                }
                TraceRecord::Sam { w, c, c_next, answer } => {
                    let i = forest.len();
                    sam_calls += 1;
                    let parent = forest.insert(*w, c.as_ref().map(|c| c.id), c_next.id, *answer);
                    if !seen_next.insert(c_next.id) {
                        violations.push(Violation { sam_index: i, kind: ViolationKind::DuplicateNext });
                    }
                    if let Some(c) = c {
                        cost += c.query_bound as u64;
                        if !c.extended_by(c_next) {
                            violations.push(Violation { sam_index: i, kind: ViolationKind::NotExtension });
                        }
                        if parent.is_none() {
                            violations.push(Violation { sam_index: i, kind: ViolationKind::Orphan });
                        }
                    }
                }
            }
        }
        TraceStats {
            sam_calls,
            direct_calls,
            depth: forest.depth(),
            augmented_cost: cost,
            normal_form: violations.is_empty(),
            violations,
            forest,
        }
    }
}

/// Sam calls (positions among Sam calls) whose `C`, evaluated on the answer,
/// queries `pi_n` at the preimage of `y`.
pub fn hit_events(trace: &[TraceEntry], oracle: &mut dyn OracleAccess, n: u32, y: u64) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    let mut k = 0;
    for e in trace {
        if let TraceEntry::Sam { query, answer } = e {
            if let Some(c) = &query.c {
                if hits(c, *answer, oracle, n, y)? {
                    out.push(k);
                }
            }
            k += 1;
        }
    }
    Ok(out)
}

/// Whether evaluating `c` on `w` queries `pi_n` at `pi_n^{-1}(y)`.
pub fn hits(c: &Program, w: u64, oracle: &mut dyn OracleAccess, n: u32, y: u64) -> Result<bool> {
    let mut hit = false;
    c.eval_observed(w, oracle, |call| {
        if call.oracle == OracleName::Perm(n as u8) && call.output == y {
            hit = true;
        }
    })?;
    Ok(hit)
}
