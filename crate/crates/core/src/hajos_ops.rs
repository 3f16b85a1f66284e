//! The three directed Hajos operations: identification of an independent
//! vertex set, the directed Hajos join, and the cyclic identification that
//! composes one join with a round of index-shifted pair identifications.
//!
//! All functions are pure: they take digraph values and return new ones.

use std::collections::BTreeSet;

use smallvec::SmallVec;
use thiserror::Error;

use crate::digraph::{Digraph, DigraphError, Label};

/// Per-slot neighbor list; degrees in this crate's workloads stay small,
/// so the inline capacity avoids heap traffic almost always.
type Neighbors = SmallVec<[u32; 8]>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OpError {
    #[error(transparent)]
    Digraph(#[from] DigraphError),

    #[error("identification set is empty")]
    EmptySet,

    #[error("set is not independent: arc between {a} and {b}")]
    DependentSet { a: Label, b: Label },

    #[error("target {target} is not a member of the identified set")]
    TargetNotInSet { target: Label },

    #[error("operand vertex sets overlap (label {0} on both sides)")]
    LabelCollision(Label),

    #[error("arc endpoints must differ: ({0}, {0})")]
    DegenerateArc(Label),

    #[error("spec indices must lie below the order {order}: got {index}")]
    IndexOutOfRange { index: Label, order: u64 },

    #[error("digraph is not canonically labelled 0..{order}-1")]
    NotCanonical { order: u64 },

    #[error("copy is not a contiguous label block of width {order} disjoint from 0..{order}-1")]
    BadCopyBlock { order: u64 },

    #[error("orders differ from the spec order {order}")]
    OrderMismatch { order: u64 },

    #[error("(j-i) and (k-l) coincide mod {order}: identification would close a loop")]
    ShiftCollision { order: u64 },

    #[error("identification pair at r={r} is not independent: {a} and {b} are adjacent")]
    DependentPair { r: u64, a: Label, b: Label },
}

/// Operands of a directed Hajos join: `(u1, v1)` is an arc of the first
/// digraph, `(v2, u2)` an arc of the second; the vertex sets must be
/// disjoint. The join deletes both arcs, merges `v1` with `v2` (keeping
/// label `v1`) and adds the arc `(u1, u2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JoinSpec {
    pub u1: Label,
    pub v1: Label,
    pub v2: Label,
    pub u2: Label,
}

/// Operands of a cyclic identification of two order-`order` digraphs.
///
/// `i`, `j`, `k`, `l` are cyclic indices: the first digraph carries canonical
/// labels `0..order-1` and holds the arc `(i, j)`; the second is a contiguous
/// label block `off..off+order-1` (index `t` at label `off + t`) and holds
/// the arc `(off+k, off+l)`. `(j - i)` and `(k - l)` must differ mod `order`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CyclicSpec {
    pub i: Label,
    pub j: Label,
    pub k: Label,
    pub l: Label,
    pub order: u64,
}

/// One primitive operation performed inside a cyclic identification, in
/// label space, in execution order. Callers record these in certificates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CyclicStep {
    Join(JoinSpec),
    Ident { pair: [Label; 2], target: Label },
}

/// Merges the independent set `set` into the single vertex `target ∈ set`.
///
/// The merged vertex inherits the union of the set's in- and
/// out-neighborhoods; arcs not incident to the set are unchanged.
pub fn identify(d: &Digraph, set: &BTreeSet<Label>, target: Label) -> Result<Digraph, OpError> {
    if set.is_empty() {
        return Err(OpError::EmptySet);
    }
    if !set.contains(&target) {
        return Err(OpError::TargetNotInSet { target });
    }
    for &v in set {
        if !d.has_vertex(v) {
            return Err(DigraphError::UnknownVertex(v).into());
        }
    }
    for &a in set {
        for &b in set {
            if a != b && d.has_arc(a, b) {
                return Err(OpError::DependentSet { a, b });
            }
        }
    }
    let members: Vec<Label> = set.iter().copied().collect();
    let in_set = |x: Label| match members.as_slice() {
        [a] => x == *a,
        [a, b] => x == *a || x == *b,
        ms => ms.binary_search(&x).is_ok(),
    };
    let vertices: Vec<Label> = d
        .vertices()
        .filter(|&v| !in_set(v) || v == target)
        .collect();
    // arcs not incident to the set keep their sorted order; the remapped
    // ones are few, so sort those alone and merge
    let mut untouched = Vec::with_capacity(d.size());
    let mut remapped = Vec::new();
    for (u, v) in d.arcs() {
        let tu = in_set(u);
        let tv = in_set(v);
        if !tu && !tv {
            untouched.push((u, v));
        } else {
            // independence guarantees the endpoints stay distinct
            remapped.push((if tu { target } else { u }, if tv { target } else { v }));
        }
    }
    remapped.sort_unstable();
    remapped.dedup();
    let arcs = crate::digraph::merge_sorted_arcs(&untouched, &remapped);
    Ok(Digraph::from_sorted_parts(vertices, arcs)?)
}

/// Directed Hajos join of two disjoint digraphs.
pub fn hajos_join(d1: &Digraph, d2: &Digraph, spec: &JoinSpec) -> Result<Digraph, OpError> {
    let JoinSpec { u1, v1, v2, u2 } = *spec;
    if let Some(shared) = d1.vertices().find(|&v| d2.has_vertex(v)) {
        return Err(OpError::LabelCollision(shared));
    }
    if !d1.has_arc(u1, v1) {
        return Err(DigraphError::MissingArc(u1, v1).into());
    }
    if !d2.has_arc(v2, u2) {
        return Err(DigraphError::MissingArc(v2, u2).into());
    }
    let vertices: Vec<Label> = d1
        .vertices()
        .chain(d2.vertices().filter(|&v| v != v2))
        .collect();
    let mut arcs: Vec<(Label, Label)> = Vec::with_capacity(d1.size() + d2.size());
    for (u, v) in d1.arcs() {
        if (u, v) != (u1, v1) {
            arcs.push((u, v));
        }
    }
    for (u, v) in d2.arcs() {
        if (u, v) == (v2, u2) {
            continue;
        }
        let nu = if u == v2 { v1 } else { u };
        let nv = if v == v2 { v1 } else { v };
        arcs.push((nu, nv));
    }
    arcs.push((u1, u2));
    Ok(Digraph::from_op_parts(vertices, arcs)?)
}

fn validate_cyclic(d: &Digraph, dp: &Digraph, spec: &CyclicSpec) -> Result<Label, OpError> {
    let n = spec.order;
    if d.order() as u64 != n || dp.order() as u64 != n {
        return Err(OpError::OrderMismatch { order: n });
    }
    if !d.vertices().eq(0..n) {
        return Err(OpError::NotCanonical { order: n });
    }
    let off = dp.min_label().expect("order checked nonzero");
    if off < n || !dp.vertices().eq(off..off + n) {
        return Err(OpError::BadCopyBlock { order: n });
    }
    for idx in [spec.i, spec.j, spec.k, spec.l] {
        if idx >= n {
            return Err(OpError::IndexOutOfRange {
                index: idx,
                order: n,
            });
        }
    }
    if spec.i == spec.j {
        return Err(OpError::DegenerateArc(spec.i));
    }
    if spec.k == spec.l {
        return Err(OpError::DegenerateArc(spec.k));
    }
    // Read mod n: had (j - i) ≡ (k - l), the copy vertex merged onto v_i
    // would carry the freshly added arc back into v_i as a loop.
    if (n + spec.j - spec.i) % n == (n + spec.k - spec.l) % n {
        return Err(OpError::ShiftCollision { order: n });
    }
    if !d.has_arc(spec.i, spec.j) {
        return Err(DigraphError::MissingArc(spec.i, spec.j).into());
    }
    if !dp.has_arc(off + spec.k, off + spec.l) {
        return Err(DigraphError::MissingArc(off + spec.k, off + spec.l).into());
    }
    Ok(off)
}

struct SlotAdjacency {
    out: Vec<Neighbors>,
    inc: Vec<Neighbors>,
}

impl SlotAdjacency {
    fn add(&mut self, u: u32, v: u32) {
        self.out[u as usize].push(v);
        self.inc[v as usize].push(u);
    }

    fn add_dedup(&mut self, u: u32, v: u32) {
        if !self.out[u as usize].contains(&v) {
            self.add(u, v);
        }
    }

    fn remove(&mut self, u: u32, v: u32) {
        if let Some(p) = self.out[u as usize].iter().position(|&x| x == v) {
            self.out[u as usize].swap_remove(p);
        }
        if let Some(p) = self.inc[v as usize].iter().position(|&x| x == u) {
            self.inc[v as usize].swap_remove(p);
        }
    }

    /// Moves every arc incident to slot `from` onto slot `to`, collapsing
    /// arcs that already exist at `to`.
    fn merge(&mut self, from: u32, to: u32) {
        let outs = std::mem::take(&mut self.out[from as usize]);
        for w in outs {
            let p = self.inc[w as usize]
                .iter()
                .position(|&x| x == from)
                .expect("incidence mirrors adjacency");
            self.inc[w as usize].swap_remove(p);
            debug_assert_ne!(w, to);
            self.add_dedup(to, w);
        }
        let ins = std::mem::take(&mut self.inc[from as usize]);
        for w in ins {
            let p = self.out[w as usize]
                .iter()
                .position(|&x| x == from)
                .expect("adjacency mirrors incidence");
            self.out[w as usize].swap_remove(p);
            debug_assert_ne!(w, to);
            if !self.out[w as usize].contains(&to) {
                self.add(w, to);
            }
        }
    }
}

/// Cyclic identification `H = (D, v_i, v_j) ⊗ (D', v'_k, v'_l)`.
///
/// Performs the directed Hajos join that deletes `(i, j)` and `(k, l)` and
/// merges `v'_k` into `v_j`, then for `r = 1..order-1` identifies `v'_{k+r}`
/// with `v_{j+r}` (indices mod `order`), checking each pair for independence.
/// Returns the resulting digraph on labels `0..order-1` together with the
/// constituent operation list (one join plus `order - 1` identifications).
pub fn cyclic_identification(
    d: &Digraph,
    dp: &Digraph,
    spec: &CyclicSpec,
) -> Result<(Digraph, Vec<CyclicStep>), OpError> {
    let off = validate_cyclic(d, dp, spec)?;
    let n = spec.order;
    let (i, j, k, l) = (spec.i, spec.j, spec.k, spec.l);

    // Working adjacency over slots: 0..n for D's labels, n..2n for the copy
    // (slot n + t holds label off + t). Degrees stay tiny, so plain vectors
    // with linear membership scans beat hashed sets here.
    let slots = (2 * n) as usize;
    let mut work = SlotAdjacency {
        out: vec![Neighbors::new(); slots],
        inc: vec![Neighbors::new(); slots],
    };
    for (u, v) in d.arcs() {
        work.add(u as u32, v as u32);
    }
    for (u, v) in dp.arcs() {
        work.add((n + u - off) as u32, (n + v - off) as u32);
    }

    let mut steps = Vec::with_capacity(n as usize);

    // join: delete (i, j) and (k, l), merge v'_k into v_j, add (i, v'_l)
    let (si, sj, sk, sl) = (i as u32, j as u32, (n + k) as u32, (n + l) as u32);
    work.remove(si, sj);
    work.remove(sk, sl);
    work.merge(sk, sj);
    work.add_dedup(si, sl);
    steps.push(CyclicStep::Join(JoinSpec {
        u1: i,
        v1: j,
        v2: off + k,
        u2: off + l,
    }));

    for r in 1..n {
        let copy_idx = (k + r) % n;
        let copy_slot = (n + copy_idx) as u32;
        let target = (j + r) % n;
        let target_slot = target as u32;
        if work.out[copy_slot as usize].contains(&target_slot)
            || work.out[target_slot as usize].contains(&copy_slot)
        {
            return Err(OpError::DependentPair {
                r,
                a: off + copy_idx,
                b: target,
            });
        }
        work.merge(copy_slot, target_slot);
        steps.push(CyclicStep::Ident {
            pair: [target.min(off + copy_idx), target.max(off + copy_idx)],
            target,
        });
    }

    // all copy slots merged away
    debug_assert!(work.out[n as usize..].iter().all(|s| s.is_empty()));
    let mut arcs = Vec::new();
    for (u, set) in work.out.iter().enumerate().take(n as usize) {
        for &v in set {
            arcs.push((u as Label, v as Label));
        }
    }
    let result = Digraph::from_op_parts((0..n).collect(), arcs)?;
    Ok((result, steps))
}

/// Arc-transport form of the cyclic identification: the same result computed
/// without executing any identification, by shifting the copy's surviving
/// arcs from index `a` to `(a - k + j) mod order` and adding the transported
/// join arc `(i, (l - k + j) mod order)`.
pub fn cyclic_closed_form(
    d: &Digraph,
    dp: &Digraph,
    spec: &CyclicSpec,
) -> Result<Digraph, OpError> {
    let off = validate_cyclic(d, dp, spec)?;
    let n = spec.order;
    let (i, j, k, l) = (spec.i, spec.j, spec.k, spec.l);
    let shift = |a: Label| (a + n - k + j) % n;

    let mut arcs: Vec<(Label, Label)> = Vec::with_capacity(d.size() + dp.size());
    for (u, v) in d.arcs() {
        if (u, v) != (i, j) {
            arcs.push((u, v));
        }
    }
    for (u, v) in dp.arcs() {
        let (b, a) = (u - off, v - off);
        if (b, a) != (k, l) {
            arcs.push((shift(b), shift(a)));
        }
    }
    arcs.push((i, shift(l)));
    Ok(Digraph::from_op_parts((0..n).collect(), arcs)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::symmetric_cycle;

    fn set(labels: &[Label]) -> BTreeSet<Label> {
        labels.iter().copied().collect()
    }

    #[test]
    fn identify_merges_neighborhoods() {
        // D(C5), merge {2, 4} into 2: the new vertex sees 1, 3 and 0
        let c5 = symmetric_cycle(5).unwrap();
        let d = identify(&c5, &set(&[2, 4]), 2).unwrap();
        assert_eq!(d.order(), 4);
        assert_eq!(d.out_neighborhood(2).unwrap(), set(&[0, 1, 3]));
        assert_eq!(d.in_neighborhood(2).unwrap(), set(&[0, 1, 3]));

        // then merge {3, 0} into 3: complete symmetric digraph on {1, 2, 3}
        let d2 = identify(&d, &set(&[3, 0]), 3).unwrap();
        assert_eq!(d2.order(), 3);
        assert_eq!(d2.vertices().collect::<Vec<_>>(), vec![1, 2, 3]);
        assert_eq!(d2.size(), 6);
        for (u, v) in d2.arcs_sorted() {
            assert!(d2.has_arc(v, u));
        }
    }

    #[test]
    fn identify_singleton_is_identity() {
        let c5 = symmetric_cycle(5).unwrap();
        assert_eq!(identify(&c5, &set(&[3]), 3).unwrap(), c5);
    }

    #[test]
    fn identify_rejects_bad_input() {
        let c5 = symmetric_cycle(5).unwrap();
        assert_eq!(identify(&c5, &set(&[]), 0), Err(OpError::EmptySet));
        assert_eq!(
            identify(&c5, &set(&[0, 1]), 0),
            Err(OpError::DependentSet { a: 0, b: 1 })
        );
        assert_eq!(
            identify(&c5, &set(&[0, 2]), 3),
            Err(OpError::TargetNotInSet { target: 3 })
        );
        assert!(matches!(
            identify(&c5, &set(&[0, 7]), 0),
            Err(OpError::Digraph(DigraphError::UnknownVertex(7)))
        ));
    }

    #[test]
    fn identify_preserves_untouched_arcs() {
        let c5 = symmetric_cycle(5).unwrap();
        let d = identify(&c5, &set(&[2, 4]), 2).unwrap();
        assert!(d.has_arc(0, 1) && d.has_arc(1, 0));
    }

    #[test]
    fn join_of_directed_triangles_is_directed_pentagon() {
        let t1 = Digraph::from_parts(0..3, [(0, 1), (1, 2), (2, 0)]).unwrap();
        let t2 = Digraph::from_parts(3..6, [(3, 4), (4, 5), (5, 3)]).unwrap();
        let d = hajos_join(
            &t1,
            &t2,
            &JoinSpec {
                u1: 2,
                v1: 0,
                v2: 3,
                u2: 4,
            },
        )
        .unwrap();
        assert_eq!(d.order(), 5);
        let expected =
            Digraph::from_parts([0, 1, 2, 4, 5], [(0, 1), (1, 2), (2, 4), (4, 5), (5, 0)]).unwrap();
        assert_eq!(d, expected);
    }

    #[test]
    fn join_of_single_arcs() {
        let d1 = Digraph::from_parts([0, 1], [(0, 1)]).unwrap();
        let d2 = Digraph::from_parts([2, 3], [(2, 3)]).unwrap();
        let d = hajos_join(
            &d1,
            &d2,
            &JoinSpec {
                u1: 0,
                v1: 1,
                v2: 2,
                u2: 3,
            },
        )
        .unwrap();
        assert_eq!(d.vertices().collect::<Vec<_>>(), vec![0, 1, 3]);
        assert_eq!(d.arcs_sorted(), vec![(0, 3)]);
    }

    #[test]
    fn join_of_two_k3_copies() {
        let a = symmetric_cycle(3).unwrap();
        let b = a.with_offset(3).unwrap();
        let d = hajos_join(
            &a,
            &b,
            &JoinSpec {
                u1: 2,
                v1: 0,
                v2: 3,
                u2: 4,
            },
        )
        .unwrap();
        assert_eq!(d.order(), 5);
        assert_eq!(d.size(), 11);
        assert_eq!(d.asymmetric_arcs().len(), 3);
    }

    #[test]
    fn join_rejects_overlap_and_missing_arcs() {
        let a = symmetric_cycle(3).unwrap();
        assert_eq!(
            hajos_join(
                &a,
                &a,
                &JoinSpec {
                    u1: 0,
                    v1: 1,
                    v2: 0,
                    u2: 1
                }
            ),
            Err(OpError::LabelCollision(0))
        );
        let c5 = symmetric_cycle(5).unwrap().with_offset(3).unwrap();
        assert!(matches!(
            hajos_join(
                &a,
                &c5,
                &JoinSpec {
                    u1: 0,
                    v1: 1,
                    v2: 3,
                    u2: 5
                }
            ),
            Err(OpError::Digraph(DigraphError::MissingArc(3, 5)))
        ));
    }

    fn cycle_plus_chords(n: u64, chords: &[(Label, Label)]) -> Digraph {
        let base = symmetric_cycle(n).unwrap();
        let mut arcs = base.arcs_sorted();
        arcs.extend_from_slice(chords);
        Digraph::from_parts(0..n, arcs).unwrap()
    }

    #[test]
    fn cyclic_identification_moves_the_chord() {
        // order-5 chord-doubling instance: cycle + chords (0,2), (4,1);
        // (D, v4, v1) ⊗ (D', v'0, v'2) leaves the single chord (0,2)
        let d = cycle_plus_chords(5, &[(0, 2), (4, 1)]);
        let dp = d.with_offset(5).unwrap();
        let spec = CyclicSpec {
            i: 4,
            j: 1,
            k: 0,
            l: 2,
            order: 5,
        };
        let (h, steps) = cyclic_identification(&d, &dp, &spec).unwrap();
        assert_eq!(h, cycle_plus_chords(5, &[(0, 2)]));
        assert_eq!(steps.len(), 5); // one join + four identifications
        assert!(matches!(steps[0], CyclicStep::Join(_)));
    }

    #[test]
    fn cyclic_identification_matches_closed_form() {
        let d = cycle_plus_chords(5, &[(0, 2), (4, 1)]);
        let dp = d.with_offset(5).unwrap();
        let spec = CyclicSpec {
            i: 4,
            j: 1,
            k: 0,
            l: 2,
            order: 5,
        };
        let (h, _) = cyclic_identification(&d, &dp, &spec).unwrap();
        assert_eq!(h, cyclic_closed_form(&d, &dp, &spec).unwrap());
    }

    #[test]
    fn cyclic_identification_rejects_coinciding_shift() {
        let d = symmetric_cycle(5).unwrap();
        let dp = d.with_offset(5).unwrap();
        // j - i = 1 and k - l = -4 ≡ 1 (mod 5)
        let spec = CyclicSpec {
            i: 0,
            j: 1,
            k: 0,
            l: 4,
            order: 5,
        };
        assert_eq!(
            cyclic_identification(&d, &dp, &spec),
            Err(OpError::ShiftCollision { order: 5 })
        );
    }

    #[test]
    fn cyclic_identification_validates_labels() {
        let d = symmetric_cycle(5).unwrap();
        let dp = d.with_offset(3).unwrap(); // overlaps 0..4
        let spec = CyclicSpec {
            i: 0,
            j: 1,
            k: 1,
            l: 2,
            order: 5,
        };
        assert_eq!(
            cyclic_identification(&d, &dp, &spec),
            Err(OpError::BadCopyBlock { order: 5 })
        );

        let dp = d.with_offset(5).unwrap();
        let bad = CyclicSpec {
            i: 0,
            j: 7,
            k: 1,
            l: 2,
            order: 5,
        };
        assert_eq!(
            cyclic_identification(&d, &dp, &bad),
            Err(OpError::IndexOutOfRange { index: 7, order: 5 })
        );
    }

    #[test]
    fn cyclic_steps_replay_to_same_result() {
        // execute the emitted step list through the pure primitives
        let d = cycle_plus_chords(9, &[(0, 4), (6, 1)]);
        let dp = d.with_offset(9).unwrap();
        let spec = CyclicSpec {
            i: 6,
            j: 1,
            k: 0,
            l: 4,
            order: 9,
        };
        let (h, steps) = cyclic_identification(&d, &dp, &spec).unwrap();

        let mut cur: Option<Digraph> = None;
        for step in &steps {
            cur = Some(match step {
                CyclicStep::Join(js) => hajos_join(&d, &dp, js).unwrap(),
                CyclicStep::Ident { pair, target } => {
                    identify(cur.as_ref().unwrap(), &set(pair), *target).unwrap()
                }
            });
        }
        assert_eq!(cur.unwrap(), h);
    }
}
