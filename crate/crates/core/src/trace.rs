//! Replayable construction certificates.
//!
//! A trace is an ordered list of steps, each producing a fresh digraph id,
//! closed by an `END` declaration of the final id, order and counted
//! operation total. The text form is line-based and byte-deterministic:
//!
//! ```text
//! HAJOS-TRACE 1
//! BASE g<id> K3 <a> <b> <c>
//! COPY g<src> g<dst> OFFSET <d>
//! JOIN g<A> <u1> <v1> g<B> <v2> <u2> g<out>
//! IDENT g<id> <l1>,<l2>[,...] <target> g<out>
//! RELABEL g<id> ADD <c> MOD <M> g<out>
//! END g<id> ORDER <N> OPS <X>
//! ```
//!
//! Labels are decimal, identification sets are comma-separated ascending,
//! one step per line, LF endings. Only JOIN and IDENT count as operations.
//! Replay re-executes every step through the primitive operations and is
//! independent of whatever shortcuts produced the trace.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::hash::{BuildHasherDefault, Hasher};

use thiserror::Error;

use crate::digraph::{Digraph, Label};
use crate::hajos_ops::{self, JoinSpec, OpError};

/// Multiply-shift hasher for graph-id keys (small dense integers).
#[derive(Default)]
struct IdHasher(u64);

impl Hasher for IdHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = (self.0 ^ u64::from(b)).wrapping_mul(0x9e37_79b9_7f4a_7c15);
        }
    }

    fn write_u64(&mut self, v: u64) {
        self.0 = v.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    }
}

type IdMap<V> = HashMap<u64, V, BuildHasherDefault<IdHasher>>;
type IdSet = HashSet<u64, BuildHasherDefault<IdHasher>>;

/// Identifier of one digraph snapshot inside a trace; rendered as `g<id>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GraphId(pub u64);

impl fmt::Display for GraphId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TraceError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },

    #[error("line {line}: undefined digraph id {id}")]
    UndefinedId { line: usize, id: GraphId },

    #[error("line {line}: digraph id {id} is already defined")]
    DuplicateId { line: usize, id: GraphId },

    #[error("trace is already finished")]
    AlreadyFinished,

    #[error("trace has no END declaration")]
    Unfinished,

    #[error("step {step}: {source}")]
    Replay { step: usize, source: OpError },

    #[error("declared order {declared} but the final digraph has order {actual}")]
    OrderMismatch { declared: u64, actual: u64 },

    #[error("declared {declared} operations but replay counted {actual}")]
    OpsMismatch { declared: u64, actual: u64 },
}

/// One recorded construction event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceStep {
    /// Complete symmetric digraph on three labelled vertices.
    Base { out: GraphId, labels: [Label; 3] },
    /// Isomorphic copy with all labels shifted by `offset`.
    Copy {
        src: GraphId,
        out: GraphId,
        offset: u64,
    },
    /// Directed Hajos join of two previously defined digraphs.
    Join {
        a: GraphId,
        u1: Label,
        v1: Label,
        b: GraphId,
        v2: Label,
        u2: Label,
        out: GraphId,
    },
    /// Identification of an independent set into `target`.
    Ident {
        src: GraphId,
        set: Vec<Label>,
        target: Label,
        out: GraphId,
    },
    /// Cyclic relabel: every vertex v becomes (v + add) mod modulus.
    Relabel {
        src: GraphId,
        add: u64,
        modulus: u64,
        out: GraphId,
    },
}

impl TraceStep {
    /// Joins and identifications count as Hajos operations; base graphs,
    /// copies and relabels do not.
    pub fn counted(&self) -> bool {
        matches!(self, TraceStep::Join { .. } | TraceStep::Ident { .. })
    }

    pub fn out(&self) -> GraphId {
        match *self {
            TraceStep::Base { out, .. }
            | TraceStep::Copy { out, .. }
            | TraceStep::Join { out, .. }
            | TraceStep::Ident { out, .. }
            | TraceStep::Relabel { out, .. } => out,
        }
    }

    fn reads(&self) -> [Option<GraphId>; 2] {
        match *self {
            TraceStep::Base { .. } => [None, None],
            TraceStep::Copy { src, .. } => [Some(src), None],
            TraceStep::Join { a, b, .. } => [Some(a), Some(b)],
            TraceStep::Ident { src, .. } => [Some(src), None],
            TraceStep::Relabel { src, .. } => [Some(src), None],
        }
    }

    fn render(&self) -> String {
        match self {
            TraceStep::Base { out, labels } => {
                format!("BASE {out} K3 {} {} {}", labels[0], labels[1], labels[2])
            }
            TraceStep::Copy { src, out, offset } => format!("COPY {src} {out} OFFSET {offset}"),
            TraceStep::Join {
                a,
                u1,
                v1,
                b,
                v2,
                u2,
                out,
            } => {
                format!("JOIN {a} {u1} {v1} {b} {v2} {u2} {out}")
            }
            TraceStep::Ident {
                src,
                set,
                target,
                out,
            } => {
                let items: Vec<String> = set.iter().map(|l| l.to_string()).collect();
                format!("IDENT {src} {} {target} {out}", items.join(","))
            }
            TraceStep::Relabel {
                src,
                add,
                modulus,
                out,
            } => {
                format!("RELABEL {src} ADD {add} MOD {modulus} {out}")
            }
        }
    }
}

/// End-of-trace declaration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EndDecl {
    pub final_id: GraphId,
    pub order: u64,
    pub ops: u64,
}

/// The ordered, replayable certificate of a construction.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HajosTrace {
    steps: Vec<TraceStep>,
    defined: IdSet,
    counted: u64,
    end: Option<EndDecl>,
}

impl HajosTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn steps(&self) -> &[TraceStep] {
        &self.steps
    }

    pub fn is_finished(&self) -> bool {
        self.end.is_some()
    }

    pub fn final_id(&self) -> Option<GraphId> {
        self.end.map(|e| e.final_id)
    }

    pub fn declared_order(&self) -> Option<u64> {
        self.end.map(|e| e.order)
    }

    /// Running count of counted steps while recording; the END declaration
    /// once finished.
    pub fn declared_ops(&self) -> u64 {
        self.end.map(|e| e.ops).unwrap_or(self.counted)
    }

    /// Appends a step. Every id the step reads must already be defined and
    /// its output id must be fresh (single assignment).
    pub fn record(&mut self, step: TraceStep) -> Result<GraphId, TraceError> {
        if self.end.is_some() {
            return Err(TraceError::AlreadyFinished);
        }
        let line = self.steps.len() + 2; // header is line 1
        for id in step.reads().into_iter().flatten() {
            if !self.defined.contains(&id.0) {
                return Err(TraceError::UndefinedId { line, id });
            }
        }
        let out = step.out();
        if !self.defined.insert(out.0) {
            return Err(TraceError::DuplicateId { line, id: out });
        }
        if step.counted() {
            self.counted += 1;
        }
        self.steps.push(step);
        Ok(out)
    }

    /// Closes the trace, declaring the final digraph and its order. The
    /// operation total is the number of counted steps recorded.
    pub fn finish(&mut self, final_id: GraphId, order: u64) -> Result<(), TraceError> {
        if self.end.is_some() {
            return Err(TraceError::AlreadyFinished);
        }
        if !self.defined.contains(&final_id.0) {
            return Err(TraceError::UndefinedId {
                line: self.steps.len() + 2,
                id: final_id,
            });
        }
        self.end = Some(EndDecl {
            final_id,
            order,
            ops: self.counted,
        });
        Ok(())
    }

    /// Deterministic text form; byte-identical for equal traces.
    pub fn serialize(&self) -> String {
        let mut out = String::from("HAJOS-TRACE 1\n");
        for step in &self.steps {
            out.push_str(&step.render());
            out.push('\n');
        }
        if let Some(end) = self.end {
            out.push_str(&format!(
                "END {} ORDER {} OPS {}\n",
                end.final_id, end.order, end.ops
            ));
        }
        out
    }

    /// Strict parser for the text form. Reports the offending line on
    /// syntax errors and validates id definitions and set ordering.
    pub fn parse(text: &str) -> Result<Self, TraceError> {
        let syntax = |line: usize, msg: &str| TraceError::Syntax {
            line,
            msg: msg.into(),
        };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, "HAJOS-TRACE 1")) => {}
            Some((i, _)) => return Err(syntax(i + 1, "expected header `HAJOS-TRACE 1`")),
            None => return Err(syntax(1, "empty input")),
        }
        let mut trace = HajosTrace::new();
        let mut last_good = 1usize;
        for (idx, line) in lines {
            let lineno = idx + 1;
            if trace.is_finished() {
                return Err(syntax(lineno, "content after END"));
            }
            let toks: Vec<&str> = line.split(' ').collect();
            let step = match toks.as_slice() {
                ["BASE", out, "K3", a, b, c] => {
                    let labels = [
                        parse_label(a, lineno)?,
                        parse_label(b, lineno)?,
                        parse_label(c, lineno)?,
                    ];
                    if labels[0] == labels[1] || labels[1] == labels[2] || labels[0] == labels[2] {
                        return Err(syntax(lineno, "base labels must be distinct"));
                    }
                    TraceStep::Base {
                        out: parse_id(out, lineno)?,
                        labels,
                    }
                }
                ["COPY", src, out, "OFFSET", d] => TraceStep::Copy {
                    src: parse_id(src, lineno)?,
                    out: parse_id(out, lineno)?,
                    offset: parse_label(d, lineno)?,
                },
                ["JOIN", a, u1, v1, b, v2, u2, out] => TraceStep::Join {
                    a: parse_id(a, lineno)?,
                    u1: parse_label(u1, lineno)?,
                    v1: parse_label(v1, lineno)?,
                    b: parse_id(b, lineno)?,
                    v2: parse_label(v2, lineno)?,
                    u2: parse_label(u2, lineno)?,
                    out: parse_id(out, lineno)?,
                },
                ["IDENT", src, set, target, out] => {
                    let mut labels = Vec::new();
                    for item in set.split(',') {
                        let l = parse_label(item, lineno)?;
                        if labels.last().is_some_and(|&p| p >= l) {
                            return Err(syntax(lineno, "set must be strictly ascending"));
                        }
                        labels.push(l);
                    }
                    TraceStep::Ident {
                        src: parse_id(src, lineno)?,
                        set: labels,
                        target: parse_label(target, lineno)?,
                        out: parse_id(out, lineno)?,
                    }
                }
                ["RELABEL", src, "ADD", c, "MOD", m, out] => TraceStep::Relabel {
                    src: parse_id(src, lineno)?,
                    add: parse_label(c, lineno)?,
                    modulus: parse_label(m, lineno)?,
                    out: parse_id(out, lineno)?,
                },
                ["END", id, "ORDER", n, "OPS", x] => {
                    let final_id = parse_id(id, lineno)?;
                    let order = parse_label(n, lineno)?;
                    let ops = parse_label(x, lineno)?;
                    if !trace.defined.contains(&final_id.0) {
                        return Err(TraceError::UndefinedId {
                            line: lineno,
                            id: final_id,
                        });
                    }
                    trace.end = Some(EndDecl {
                        final_id,
                        order,
                        ops,
                    });
                    last_good = lineno;
                    continue;
                }
                _ => {
                    return Err(TraceError::Syntax {
                        line: lineno,
                        msg: format!("unrecognized step after line {last_good}"),
                    })
                }
            };
            // remap record's internal line numbering onto the file's
            match trace.record(step) {
                Ok(_) => {}
                Err(TraceError::UndefinedId { id, .. }) => {
                    return Err(TraceError::UndefinedId { line: lineno, id })
                }
                Err(TraceError::DuplicateId { id, .. }) => {
                    return Err(TraceError::DuplicateId { line: lineno, id })
                }
                Err(e) => return Err(e),
            }
            last_good = lineno;
        }
        if !trace.is_finished() {
            return Err(TraceError::Syntax {
                line: last_good,
                msg: format!("truncated trace: no END after line {last_good}"),
            });
        }
        Ok(trace)
    }

    /// Re-executes every step through the primitive digraph operations.
    /// Returns the final digraph (per the END declaration) and the number
    /// of counted operations replayed. Does not check the END declarations.
    pub fn replay(&self) -> Result<(Digraph, u64), TraceError> {
        let mut graphs: IdMap<Digraph> = IdMap::default();
        let mut ops = 0u64;
        fn fetch(
            graphs: &IdMap<Digraph>,
            id: GraphId,
            line: usize,
        ) -> Result<&Digraph, TraceError> {
            graphs
                .get(&id.0)
                .ok_or(TraceError::UndefinedId { line, id })
        }
        // last step reading each id, so dead snapshots can be dropped early
        let mut last_use: IdMap<usize> =
            IdMap::with_capacity_and_hasher(self.steps.len(), Default::default());
        for (idx, step) in self.steps.iter().enumerate() {
            for id in step.reads().into_iter().flatten() {
                last_use.insert(id.0, idx);
            }
        }
        let keep = self.end.map(|e| e.final_id.0);
        for (step_idx, step) in self.steps.iter().enumerate() {
            let fail = |source: OpError| TraceError::Replay {
                step: step_idx,
                source,
            };
            let line = step_idx + 2;
            let result = match step {
                TraceStep::Base { labels, .. } => Digraph::from_parts(
                    labels.iter().copied(),
                    labels
                        .iter()
                        .flat_map(|&a| labels.iter().map(move |&b| (a, b)))
                        .filter(|(a, b)| a != b),
                )
                .map_err(|e| fail(e.into()))?,
                TraceStep::Copy { src, offset, .. } => fetch(&graphs, *src, line)?
                    .with_offset(*offset)
                    .map_err(|e| fail(e.into()))?,
                TraceStep::Join {
                    a,
                    u1,
                    v1,
                    b,
                    v2,
                    u2,
                    ..
                } => {
                    let da = fetch(&graphs, *a, line)?;
                    let db = fetch(&graphs, *b, line)?;
                    let spec = JoinSpec {
                        u1: *u1,
                        v1: *v1,
                        v2: *v2,
                        u2: *u2,
                    };
                    ops += 1;
                    hajos_ops::hajos_join(da, db, &spec).map_err(fail)?
                }
                TraceStep::Ident {
                    src, set, target, ..
                } => {
                    let d = fetch(&graphs, *src, line)?;
                    let set: BTreeSet<Label> = set.iter().copied().collect();
                    ops += 1;
                    hajos_ops::identify(d, &set, *target).map_err(fail)?
                }
                TraceStep::Relabel {
                    src, add, modulus, ..
                } => fetch(&graphs, *src, line)?
                    .relabel_mod(*add, *modulus)
                    .map_err(|e| fail(e.into()))?,
            };
            graphs.insert(step.out().0, result);
            for id in step.reads().into_iter().flatten() {
                if last_use.get(&id.0) == Some(&step_idx) && keep != Some(id.0) {
                    graphs.remove(&id.0);
                }
            }
        }
        let end = self.end.ok_or(TraceError::Unfinished)?;
        let final_graph = graphs
            .remove(&end.final_id.0)
            .ok_or(TraceError::UndefinedId {
                line: self.steps.len() + 2,
                id: end.final_id,
            })?;
        Ok((final_graph, ops))
    }

    /// Replays and checks the END declarations: the declared order must
    /// match the final digraph, the declared total must match the count.
    pub fn verify(&self) -> Result<Digraph, TraceError> {
        let end = self.end.ok_or(TraceError::Unfinished)?;
        let (digraph, ops) = self.replay()?;
        if digraph.order() as u64 != end.order {
            return Err(TraceError::OrderMismatch {
                declared: end.order,
                actual: digraph.order() as u64,
            });
        }
        if ops != end.ops {
            return Err(TraceError::OpsMismatch {
                declared: end.ops,
                actual: ops,
            });
        }
        Ok(digraph)
    }
}

fn parse_id(tok: &str, line: usize) -> Result<GraphId, TraceError> {
    tok.strip_prefix('g')
        .and_then(|n| n.parse::<u64>().ok())
        .map(GraphId)
        .ok_or_else(|| TraceError::Syntax {
            line,
            msg: format!("bad digraph id `{tok}`"),
        })
}

fn parse_label(tok: &str, line: usize) -> Result<u64, TraceError> {
    // reject redundant leading zeros so serialization is a bijection
    if tok.len() > 1 && tok.starts_with('0') {
        return Err(TraceError::Syntax {
            line,
            msg: format!("bad number `{tok}`"),
        });
    }
    tok.parse::<u64>().map_err(|_| TraceError::Syntax {
        line,
        msg: format!("bad number `{tok}`"),
    })
}
