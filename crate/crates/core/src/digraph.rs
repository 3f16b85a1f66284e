//! Loopless simple digraphs with integer vertex labels.
//!
//! Every operation in the crate works over this value type. Digraphs are
//! immutable once built: operations that "modify" a digraph return a fresh
//! value, so snapshots referenced by certificates stay valid.
//!
//! Storage is sorted vectors. Membership queries are binary searches over
//! contiguous memory, construction is a bulk copy plus a run-merging sort,
//! and every iteration order is the sorted order, so serialized forms are
//! byte-stable with no extra work.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

/// Vertex label. Labels are arbitrary non-negative integers and need not be
/// contiguous; disjoint copies are made by offsetting all labels.
pub type Label = u64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DigraphError {
    #[error("vertex {0} is not in the digraph")]
    UnknownVertex(Label),

    #[error("arc ({0}, {1}) is not in the digraph")]
    MissingArc(Label, Label),

    #[error("arc ({0}, {0}) would be a loop")]
    LoopArc(Label),

    #[error("arc ({0}, {1}) has an endpoint outside the vertex set")]
    DanglingArc(Label, Label),

    #[error("cycle order must be at least 3, got {0}")]
    OrderTooSmall(u64),

    #[error("label offset overflows: {label} + {offset}")]
    LabelOverflow { label: Label, offset: u64 },

    #[error("relabel (+{add} mod {modulus}) maps {a} and {b} to the same label")]
    RelabelCollision {
        add: u64,
        modulus: u64,
        a: Label,
        b: Label,
    },

    #[error("relabel modulus must be positive")]
    ZeroModulus,

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Whether an arc's reverse is also present.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArcClass {
    Symmetric,
    Asymmetric,
}

/// Finite digraph without loops or multiple arcs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Digraph {
    /// Sorted, deduplicated.
    vertices: Vec<Label>,
    /// Sorted by (tail, head), deduplicated.
    arcs: Vec<(Label, Label)>,
}

impl Digraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a digraph from explicit vertex and arc collections, rejecting
    /// loops and arcs with endpoints outside the vertex set. Duplicate arcs
    /// collapse (arc sets, not multisets).
    pub fn from_parts<V, A>(vertices: V, arcs: A) -> Result<Self, DigraphError>
    where
        V: IntoIterator<Item = Label>,
        A: IntoIterator<Item = (Label, Label)>,
    {
        let mut vertices: Vec<Label> = vertices.into_iter().collect();
        vertices.sort();
        vertices.dedup();
        let mut arcs: Vec<(Label, Label)> = arcs.into_iter().collect();
        arcs.sort();
        arcs.dedup();
        for &(u, v) in &arcs {
            if u == v {
                return Err(DigraphError::LoopArc(u));
            }
            if vertices.binary_search(&u).is_err() || vertices.binary_search(&v).is_err() {
                return Err(DigraphError::DanglingArc(u, v));
            }
        }
        Ok(Self { vertices, arcs })
    }

    /// Internal constructor for operation results whose arc endpoints are
    /// valid by construction: sorts and deduplicates, checks only the
    /// no-loop invariant.
    pub(crate) fn from_op_parts(
        mut vertices: Vec<Label>,
        mut arcs: Vec<(Label, Label)>,
    ) -> Result<Self, DigraphError> {
        vertices.sort();
        vertices.dedup();
        arcs.sort();
        arcs.dedup();
        if let Some(&(u, _)) = arcs.iter().find(|&&(u, v)| u == v) {
            return Err(DigraphError::LoopArc(u));
        }
        Ok(Self { vertices, arcs })
    }

    /// Internal constructor for inputs already sorted and deduplicated,
    /// with endpoints valid by construction.
    pub(crate) fn from_sorted_parts(
        vertices: Vec<Label>,
        arcs: Vec<(Label, Label)>,
    ) -> Result<Self, DigraphError> {
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(arcs.windows(2).all(|w| w[0] < w[1]));
        if let Some(&(u, _)) = arcs.iter().find(|&&(u, v)| u == v) {
            return Err(DigraphError::LoopArc(u));
        }
        Ok(Self { vertices, arcs })
    }

    pub fn order(&self) -> usize {
        self.vertices.len()
    }

    pub fn size(&self) -> usize {
        self.arcs.len()
    }

    pub fn has_vertex(&self, v: Label) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }

    pub fn has_arc(&self, u: Label, v: Label) -> bool {
        self.arcs.binary_search(&(u, v)).is_ok()
    }

    /// Vertices in ascending label order.
    pub fn vertices(&self) -> impl Iterator<Item = Label> + '_ {
        self.vertices.iter().copied()
    }

    pub fn min_label(&self) -> Option<Label> {
        self.vertices.first().copied()
    }

    pub fn max_label(&self) -> Option<Label> {
        self.vertices.last().copied()
    }

    /// Arcs in ascending (tail, head) order.
    pub fn arcs(&self) -> impl Iterator<Item = (Label, Label)> + '_ {
        self.arcs.iter().copied()
    }

    /// Arcs sorted by (tail, head), as an owned vector.
    pub fn arcs_sorted(&self) -> Vec<(Label, Label)> {
        self.arcs.clone()
    }

    /// `{ v | (u, v) ∈ A }`. Arcs sharing a tail are contiguous, so this is
    /// a binary search plus a linear walk over the out-degree.
    pub fn out_neighborhood(&self, u: Label) -> Result<BTreeSet<Label>, DigraphError> {
        if !self.has_vertex(u) {
            return Err(DigraphError::UnknownVertex(u));
        }
        let start = self.arcs.partition_point(|&(t, _)| t < u);
        Ok(self.arcs[start..]
            .iter()
            .take_while(|&&(t, _)| t == u)
            .map(|&(_, h)| h)
            .collect())
    }

    /// `{ v | (v, u) ∈ A }`.
    pub fn in_neighborhood(&self, u: Label) -> Result<BTreeSet<Label>, DigraphError> {
        if !self.has_vertex(u) {
            return Err(DigraphError::UnknownVertex(u));
        }
        Ok(self
            .arcs
            .iter()
            .filter(|&&(_, h)| h == u)
            .map(|&(t, _)| t)
            .collect())
    }

    /// True iff no arc joins two members of `set`, in either direction.
    pub fn is_independent(&self, set: &BTreeSet<Label>) -> Result<bool, DigraphError> {
        for &v in set {
            if !self.has_vertex(v) {
                return Err(DigraphError::UnknownVertex(v));
            }
        }
        for &a in set {
            for &b in set {
                if a != b && self.has_arc(a, b) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Classifies an existing arc as symmetric (reverse present) or not.
    pub fn classify_arc(&self, u: Label, v: Label) -> Result<ArcClass, DigraphError> {
        if !self.has_arc(u, v) {
            return Err(DigraphError::MissingArc(u, v));
        }
        Ok(if self.has_arc(v, u) {
            ArcClass::Symmetric
        } else {
            ArcClass::Asymmetric
        })
    }

    /// All arcs whose reverse is absent, sorted.
    pub fn asymmetric_arcs(&self) -> Vec<(Label, Label)> {
        self.arcs
            .iter()
            .filter(|&&(u, w)| !self.has_arc(w, u))
            .copied()
            .collect()
    }

    /// Isomorphic copy with every label increased by `offset`.
    pub fn with_offset(&self, offset: u64) -> Result<Self, DigraphError> {
        let shift = |v: Label| {
            v.checked_add(offset)
                .ok_or(DigraphError::LabelOverflow { label: v, offset })
        };
        let mut vertices = Vec::with_capacity(self.vertices.len());
        for &v in &self.vertices {
            vertices.push(shift(v)?);
        }
        let mut arcs = Vec::with_capacity(self.arcs.len());
        for &(u, v) in &self.arcs {
            arcs.push((shift(u)?, shift(v)?));
        }
        // the shift preserves order, so both vectors stay sorted
        Ok(Self { vertices, arcs })
    }

    /// Relabels every vertex `v` to `(v + add) mod modulus`; arcs move with
    /// their endpoints. The map must be injective on the vertex set.
    pub fn relabel_mod(&self, add: u64, modulus: u64) -> Result<Self, DigraphError> {
        if modulus == 0 {
            return Err(DigraphError::ZeroModulus);
        }
        let map = |v: Label| (v % modulus + add % modulus) % modulus;
        let mut imaged: Vec<(Label, Label)> = self.vertices.iter().map(|&v| (map(v), v)).collect();
        imaged.sort();
        for pair in imaged.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(DigraphError::RelabelCollision {
                    add,
                    modulus,
                    a: pair[0].1,
                    b: pair[1].1,
                });
            }
        }
        let vertices: Vec<Label> = imaged.into_iter().map(|(img, _)| img).collect();
        let mut arcs: Vec<(Label, Label)> =
            self.arcs.iter().map(|&(u, v)| (map(u), map(v))).collect();
        arcs.sort();
        Ok(Self { vertices, arcs })
    }

    /// Digraph with `v` and all incident arcs removed.
    pub fn without_vertex(&self, v: Label) -> Result<Self, DigraphError> {
        if !self.has_vertex(v) {
            return Err(DigraphError::UnknownVertex(v));
        }
        let vertices = self.vertices.iter().copied().filter(|&u| u != v).collect();
        let arcs = self
            .arcs
            .iter()
            .copied()
            .filter(|&(t, h)| t != v && h != v)
            .collect();
        Ok(Self { vertices, arcs })
    }

    /// Line-based text form: header, then vertices, then arcs, all sorted.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "DIGRAPH {} {}", self.order(), self.size());
        for v in self.vertices() {
            let _ = writeln!(out, "V {v}");
        }
        for (u, v) in self.arcs() {
            let _ = writeln!(out, "A {u} {v}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, DigraphError> {
        let err = |line: usize, msg: &str| DigraphError::Parse {
            line,
            msg: msg.into(),
        };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| err(1, "empty input, expected DIGRAPH header"))?;
        let parts: Vec<&str> = header.split(' ').collect();
        if parts.len() != 3 || parts[0] != "DIGRAPH" {
            return Err(err(1, "expected `DIGRAPH <order> <size>`"));
        }
        let order: usize = parts[1].parse().map_err(|_| err(1, "bad order"))?;
        let size: usize = parts[2].parse().map_err(|_| err(1, "bad size"))?;

        let mut vertices: Vec<Label> = Vec::with_capacity(order);
        let mut arcs: Vec<(Label, Label)> = Vec::with_capacity(size);
        for (idx, line) in lines {
            let lineno = idx + 1;
            let toks: Vec<&str> = line.split(' ').collect();
            match toks.as_slice() {
                ["V", l] => {
                    if !arcs.is_empty() {
                        return Err(err(lineno, "vertex line after arc lines"));
                    }
                    let label: Label = l.parse().map_err(|_| err(lineno, "bad vertex label"))?;
                    if vertices.last().is_some_and(|&p| p >= label) {
                        return Err(err(lineno, "vertex labels must be strictly ascending"));
                    }
                    vertices.push(label);
                }
                ["A", t, h] => {
                    let tail: Label = t.parse().map_err(|_| err(lineno, "bad arc tail"))?;
                    let head: Label = h.parse().map_err(|_| err(lineno, "bad arc head"))?;
                    if arcs.last().is_some_and(|&p| p >= (tail, head)) {
                        return Err(err(
                            lineno,
                            "arcs must be strictly ascending by (tail, head)",
                        ));
                    }
                    arcs.push((tail, head));
                }
                _ => return Err(err(lineno, "expected `V <label>` or `A <tail> <head>`")),
            }
        }
        if vertices.len() != order {
            return Err(err(1, "declared order does not match vertex lines"));
        }
        if arcs.len() != size {
            return Err(err(1, "declared size does not match arc lines"));
        }
        Self::from_parts(vertices, arcs)
    }
}

/// Merges two sorted deduplicated arc lists, collapsing duplicates.
pub(crate) fn merge_sorted_arcs(a: &[(Label, Label)], b: &[(Label, Label)]) -> Vec<(Label, Label)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// The symmetric cycle D(C_N): vertices `0..N-1`, a digon between each pair
/// of cyclically consecutive vertices. N = 3 gives the complete symmetric
/// digraph on three vertices.
pub fn symmetric_cycle(n: u64) -> Result<Digraph, DigraphError> {
    if n < 3 {
        return Err(DigraphError::OrderTooSmall(n));
    }
    // emit directly in (tail, head) order
    let mut arcs = Vec::with_capacity(2 * n as usize);
    for i in 0..n {
        let prev = (i + n - 1) % n;
        let next = (i + 1) % n;
        arcs.push((i, prev.min(next)));
        arcs.push((i, prev.max(next)));
    }
    Digraph::from_sorted_parts((0..n).collect(), arcs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn directed_triangle() -> Digraph {
        Digraph::from_parts(0..3, [(0, 1), (1, 2), (2, 0)]).unwrap()
    }

    fn set(labels: &[Label]) -> BTreeSet<Label> {
        labels.iter().copied().collect()
    }

    #[test]
    fn out_neighborhoods() {
        let tri = directed_triangle();
        assert_eq!(tri.out_neighborhood(0).unwrap(), set(&[1]));
        let k3 = symmetric_cycle(3).unwrap();
        assert_eq!(k3.out_neighborhood(0).unwrap(), set(&[1, 2]));
        let c5 = symmetric_cycle(5).unwrap();
        assert_eq!(c5.out_neighborhood(3).unwrap(), set(&[2, 4]));
        assert_eq!(c5.out_neighborhood(9), Err(DigraphError::UnknownVertex(9)));
    }

    #[test]
    fn in_neighborhoods() {
        let tri = directed_triangle();
        assert_eq!(tri.in_neighborhood(0).unwrap(), set(&[2]));
        let k3 = symmetric_cycle(3).unwrap();
        assert_eq!(k3.in_neighborhood(1).unwrap(), set(&[0, 2]));
        let c5 = symmetric_cycle(5).unwrap();
        assert_eq!(c5.in_neighborhood(0).unwrap(), set(&[1, 4]));
    }

    #[test]
    fn independence() {
        let c5 = symmetric_cycle(5).unwrap();
        assert!(c5.is_independent(&set(&[0, 2])).unwrap());
        assert!(!c5.is_independent(&set(&[0, 1])).unwrap());
        assert!(c5.is_independent(&set(&[3])).unwrap());
        assert_eq!(
            c5.is_independent(&set(&[0, 7])),
            Err(DigraphError::UnknownVertex(7))
        );
    }

    #[test]
    fn arc_classification() {
        let c5 = symmetric_cycle(5).unwrap();
        assert_eq!(c5.classify_arc(0, 1).unwrap(), ArcClass::Symmetric);
        let tri = directed_triangle();
        assert_eq!(tri.classify_arc(0, 1).unwrap(), ArcClass::Asymmetric);
        assert_eq!(tri.classify_arc(1, 0), Err(DigraphError::MissingArc(1, 0)));
    }

    #[test]
    fn symmetric_cycle_shapes() {
        let k3 = symmetric_cycle(3).unwrap();
        assert_eq!(k3.order(), 3);
        assert_eq!(k3.size(), 6);

        let c5 = symmetric_cycle(5).unwrap();
        assert_eq!(c5.order(), 5);
        assert_eq!(c5.size(), 10);
        for (u, v) in c5.arcs() {
            assert_eq!(c5.classify_arc(u, v).unwrap(), ArcClass::Symmetric);
        }

        let c4 = symmetric_cycle(4).unwrap();
        assert_eq!(c4.order(), 4);
        assert_eq!(c4.size(), 8);

        assert_eq!(symmetric_cycle(2), Err(DigraphError::OrderTooSmall(2)));
    }

    #[test]
    fn cycle_degrees_are_two() {
        for n in [3u64, 4, 5, 9, 16] {
            let c = symmetric_cycle(n).unwrap();
            for v in c.vertices() {
                assert_eq!(c.out_neighborhood(v).unwrap().len(), 2);
                assert_eq!(c.in_neighborhood(v).unwrap().len(), 2);
            }
        }
    }

    #[test]
    fn rejects_loops_and_dangling_arcs() {
        assert_eq!(
            Digraph::from_parts(0..2, [(0, 0)]),
            Err(DigraphError::LoopArc(0))
        );
        assert_eq!(
            Digraph::from_parts(0..2, [(0, 5)]),
            Err(DigraphError::DanglingArc(0, 5))
        );
    }

    #[test]
    fn duplicate_arcs_collapse() {
        let d = Digraph::from_parts(0..2, [(0, 1), (0, 1)]).unwrap();
        assert_eq!(d.size(), 1);
    }

    #[test]
    fn offset_copy() {
        let k3 = symmetric_cycle(3).unwrap();
        let shifted = k3.with_offset(3).unwrap();
        assert_eq!(shifted.vertices().collect::<Vec<_>>(), vec![3, 4, 5]);
        assert_eq!(shifted.size(), 6);
        assert!(shifted.has_arc(3, 4));

        let c5 = symmetric_cycle(5).unwrap();
        let s = c5.with_offset(5).unwrap();
        assert_eq!(s.min_label(), Some(5));
        assert_eq!(s.max_label(), Some(9));
        for (u, v) in c5.arcs() {
            assert!(s.has_arc(u + 5, v + 5));
        }
    }

    #[test]
    fn offset_overflow_detected() {
        let k3 = symmetric_cycle(3).unwrap();
        assert!(matches!(
            k3.with_offset(u64::MAX),
            Err(DigraphError::LabelOverflow { .. })
        ));
    }

    #[test]
    fn relabel_rotation_and_inverse() {
        let c5 = symmetric_cycle(5).unwrap();
        assert_eq!(c5.relabel_mod(0, 5).unwrap(), c5);
        let once = c5.relabel_mod(2, 5).unwrap();
        assert_eq!(once.relabel_mod(3, 5).unwrap(), c5);
    }

    #[test]
    fn relabel_reduces_offset_labels() {
        // labels {0..2} ∪ {8, 9} under +0 mod 5 land on {0, 1, 2, 3, 4}
        let d = Digraph::from_parts([0, 1, 2, 8, 9], [(0, 1), (8, 9), (2, 8)]).unwrap();
        let r = d.relabel_mod(0, 5).unwrap();
        assert_eq!(r.vertices().collect::<Vec<_>>(), vec![0, 1, 2, 3, 4]);
        assert!(r.has_arc(3, 4) && r.has_arc(2, 3));
    }

    #[test]
    fn relabel_collision_detected() {
        let d = Digraph::from_parts([0, 5], []).unwrap();
        assert!(matches!(
            d.relabel_mod(0, 5),
            Err(DigraphError::RelabelCollision { .. })
        ));
    }

    #[test]
    fn text_round_trip() {
        for n in [3u64, 4, 5, 9] {
            let c = symmetric_cycle(n).unwrap();
            let text = c.to_text();
            assert_eq!(Digraph::from_text(&text).unwrap(), c);
        }
        let c5 = symmetric_cycle(5).unwrap();
        let text = c5.to_text();
        assert!(text.starts_with("DIGRAPH 5 10\n"));
        assert!(text.ends_with('\n'));
    }

    #[test]
    fn text_parse_errors() {
        assert!(matches!(
            Digraph::from_text(""),
            Err(DigraphError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            Digraph::from_text("DIGRAPH 1 0\nV 0\nV 0\n"),
            Err(DigraphError::Parse { .. })
        ));
        // arc order not ascending
        assert!(matches!(
            Digraph::from_text("DIGRAPH 2 2\nV 0\nV 1\nA 1 0\nA 0 1\n"),
            Err(DigraphError::Parse { .. })
        ));
    }
}
