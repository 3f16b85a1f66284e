//! Independent oracles: symmetric-cycle recognition, acyclicity, and
//! exhaustive dichromatic-number computation for desk-scale digraphs.
//!
//! Nothing here shares code with the construction pipeline; these functions
//! are the ground truth the rest of the crate is checked against.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::digraph::{Digraph, Label};

/// Default cap on the order of digraphs the exhaustive search will accept.
pub const DEFAULT_BF_LIMIT: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("digraph order {order} exceeds the brute-force limit {limit}")]
    SizeLimit { order: usize, limit: usize },

    #[error("no acyclic coloring with at most {cap} colors")]
    NoColoringWithinCap { cap: u32 },

    #[error("color cap must be at least 1")]
    ZeroCap,
}

/// A vertex coloring in which every color class induces an acyclic
/// subdigraph; witnesses the upper bound `num_colors` on the dichromatic
/// number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoringWitness {
    pub colors: BTreeMap<Label, u32>,
    pub num_colors: u32,
}

impl ColoringWitness {
    /// Re-checks the witness against `d`: complete, within `num_colors`,
    /// and every class acyclic.
    pub fn is_valid_for(&self, d: &Digraph) -> bool {
        if d.vertices().any(|v| !self.colors.contains_key(&v)) {
            return false;
        }
        if self.colors.len() != d.order() {
            return false;
        }
        for &c in self.colors.values() {
            if c >= self.num_colors.max(1) {
                return false;
            }
        }
        for class in 0..self.num_colors {
            let members: Vec<Label> = self
                .colors
                .iter()
                .filter(|&(_, &c)| c == class)
                .map(|(&v, _)| v)
                .collect();
            if !induced_is_acyclic(d, &members) {
                return false;
            }
        }
        true
    }
}

/// True iff `d` is isomorphic to the symmetric cycle on its own order:
/// every arc symmetric, every vertex with in- and out-degree 2, and one
/// closed walk covering all vertices.
pub fn is_symmetric_cycle(d: &Digraph) -> bool {
    let n = d.order();
    if n < 3 {
        return false;
    }
    let verts: Vec<Label> = d.vertices().collect();
    let mut nbrs: BTreeMap<Label, Vec<Label>> = BTreeMap::new();
    for &v in &verts {
        let out = d.out_neighborhood(v).expect("vertex present");
        let inn = d.in_neighborhood(v).expect("vertex present");
        if out.len() != 2 || out != inn {
            return false;
        }
        nbrs.insert(v, out.into_iter().collect());
    }
    // walk the 2-regular symmetric structure; it must close after n steps
    let start = verts[0];
    let mut prev = start;
    let mut cur = nbrs[&start][0];
    let mut visited = 1usize;
    while cur != start {
        visited += 1;
        if visited > n {
            return false;
        }
        let ns = &nbrs[&cur];
        let next = if ns[0] == prev { ns[1] } else { ns[0] };
        prev = cur;
        cur = next;
    }
    visited == n
}

/// True iff `d` has no directed cycle. Digons count: a symmetric arc pair
/// is a directed 2-cycle.
pub fn is_acyclic(d: &Digraph) -> bool {
    let members: Vec<Label> = d.vertices().collect();
    induced_is_acyclic(d, &members)
}

/// Acyclicity of the subdigraph induced by `members` (iterative DFS,
/// white/grey/black marking).
fn induced_is_acyclic(d: &Digraph, members: &[Label]) -> bool {
    let index: BTreeMap<Label, usize> = members.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let n = members.len();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (u, v) in d.arcs() {
        if let (Some(&iu), Some(&iv)) = (index.get(&u), index.get(&v)) {
            succ[iu].push(iv);
        }
    }
    let mut state = vec![0u8; n]; // 0 unvisited, 1 on stack, 2 done
    for root in 0..n {
        if state[root] != 0 {
            continue;
        }
        // stack of (vertex, next successor position)
        let mut stack = vec![(root, 0usize)];
        state[root] = 1;
        while let Some(&mut (v, ref mut pos)) = stack.last_mut() {
            if *pos < succ[v].len() {
                let w = succ[v][*pos];
                *pos += 1;
                match state[w] {
                    0 => {
                        state[w] = 1;
                        stack.push((w, 0));
                    }
                    1 => return false,
                    _ => {}
                }
            } else {
                state[v] = 2;
                stack.pop();
            }
        }
    }
    true
}

struct ColoringSearch<'a> {
    verts: Vec<Label>,
    d: &'a Digraph,
    colors: Vec<u32>,
    classes: Vec<Vec<Label>>,
}

impl<'a> ColoringSearch<'a> {
    fn run(d: &'a Digraph, num_colors: u32) -> Option<ColoringWitness> {
        let verts: Vec<Label> = d.vertices().collect();
        let n = verts.len();
        let mut s = ColoringSearch {
            verts,
            d,
            colors: vec![0; n],
            classes: vec![Vec::new(); num_colors as usize],
        };
        if s.assign(0, 0, num_colors) {
            let colors = s
                .verts
                .iter()
                .copied()
                .zip(s.colors.iter().copied())
                .collect();
            Some(ColoringWitness { colors, num_colors })
        } else {
            None
        }
    }

    fn assign(&mut self, idx: usize, used: u32, cap: u32) -> bool {
        if idx == self.verts.len() {
            return true;
        }
        let v = self.verts[idx];
        // canonical colorings: colors are introduced in increasing order,
        // so vertex idx may reuse an existing color or open color `used`
        let highest = used.min(cap.saturating_sub(1));
        for c in 0..=highest {
            self.classes[c as usize].push(v);
            if induced_is_acyclic(self.d, &self.classes[c as usize]) {
                self.colors[idx] = c;
                let next_used = used.max(c + 1);
                if self.assign(idx + 1, next_used, cap) {
                    return true;
                }
            }
            self.classes[c as usize].pop();
        }
        false
    }
}

/// Searches for an acyclic vertex coloring with at most `num_colors` colors.
pub fn exists_coloring(d: &Digraph, num_colors: u32) -> Option<ColoringWitness> {
    ColoringSearch::run(d, num_colors)
}

/// Exhaustively computes the dichromatic number of `d`, trying caps
/// 1, 2, ..., `cap` in order, returning the first witness found.
///
/// `limit` bounds the order the search will accept (the canonical-coloring
/// enumeration is exponential).
pub fn dichromatic_number(
    d: &Digraph,
    cap: u32,
    limit: usize,
) -> Result<(u32, ColoringWitness), AnalysisError> {
    if d.order() > limit {
        return Err(AnalysisError::SizeLimit {
            order: d.order(),
            limit,
        });
    }
    if cap == 0 {
        return Err(AnalysisError::ZeroCap);
    }
    if d.order() == 0 {
        return Ok((
            0,
            ColoringWitness {
                colors: BTreeMap::new(),
                num_colors: 0,
            },
        ));
    }
    for c in 1..=cap {
        if let Some(witness) = exists_coloring(d, c) {
            return Ok((c, witness));
        }
    }
    Err(AnalysisError::NoColoringWithinCap { cap })
}

/// Vertex-criticality at 3: the dichromatic number is exactly 3 and drops
/// below 3 after deleting any single vertex.
pub fn is_3_critical(d: &Digraph, limit: usize) -> Result<bool, AnalysisError> {
    if d.order() > limit {
        return Err(AnalysisError::SizeLimit {
            order: d.order(),
            limit,
        });
    }
    if d.order() == 0 {
        return Ok(false);
    }
    let (chi, _) = dichromatic_number(d, d.order() as u32, limit)?;
    if chi != 3 {
        return Ok(false);
    }
    for v in d.vertices().collect::<Vec<_>>() {
        let reduced = d.without_vertex(v).expect("vertex present");
        if reduced.order() > 0 && exists_coloring(&reduced, 2).is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}
