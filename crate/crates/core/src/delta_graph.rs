//! Layered store of the delta lists that picked up an `∞` coefficient.
//!
//! A stored list stands for the cylinder of assignments it selects; the
//! graph as a whole covers the union of those cylinders. Lists of the same
//! length form a layer, and two lists in a layer are joined by an edge
//! labelled `j` when they differ only in the value picked at index `j`.
//! Whenever a full fan of such siblings is present (up to coverage by
//! shorter lists) it is fused into the common shorter list. Reaching the
//! empty list means every assignment is covered.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::choice_poly::{is_sub_list, Assignment, Delta, Registry};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DeltaGraph {
    registry: Registry,
    layers: BTreeMap<usize, BTreeSet<Vec<Delta>>>,
}

impl DeltaGraph {
    pub fn new(registry: Registry) -> Self {
        DeltaGraph {
            registry,
            layers: BTreeMap::new(),
        }
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    /// Replaces the registry by an extension of it (choice points are only
    /// ever appended during an analysis).
    pub fn set_registry(&mut self, registry: &Registry) {
        debug_assert!(registry
            .cardinalities()
            .starts_with(self.registry.cardinalities()));
        self.registry = registry.clone();
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    pub fn vertex_count(&self) -> usize {
        self.layers.values().map(BTreeSet::len).sum()
    }

    /// Stored lists, shortest layer first.
    pub fn vertices(&self) -> impl Iterator<Item = &Vec<Delta>> {
        self.layers.values().flatten()
    }

    pub fn layer(&self, size: usize) -> impl Iterator<Item = &Vec<Delta>> {
        self.layers.get(&size).into_iter().flatten()
    }

    /// Labels `j` such that `a` and `b` differ exactly in the value at `j`.
    pub fn edge_label(a: &[Delta], b: &[Delta]) -> Option<u32> {
        if a.len() != b.len() {
            return None;
        }
        let mut label = None;
        for (x, y) in a.iter().zip(b) {
            if x.index != y.index {
                return None;
            }
            if x.value != y.value {
                if label.is_some() {
                    return None;
                }
                label = Some(x.index);
            }
        }
        label
    }

    /// Edges of the graph as `(list, list, label)` with the first list
    /// smaller, in layer order.
    pub fn edges(&self) -> Vec<(&Vec<Delta>, &Vec<Delta>, u32)> {
        let mut out = Vec::new();
        for layer in self.layers.values() {
            let items: Vec<&Vec<Delta>> = layer.iter().collect();
            for (k, a) in items.iter().enumerate() {
                for b in &items[k + 1..] {
                    if let Some(j) = Self::edge_label(a, b) {
                        out.push((*a, *b, j));
                    }
                }
            }
        }
        out
    }

    fn covers_list(&self, deltas: &[Delta]) -> bool {
        self.layers
            .range(..=deltas.len())
            .flat_map(|(_, l)| l)
            .any(|stored| is_sub_list(stored, deltas))
    }

    /// Whether `assignment` falls in some stored cylinder.
    pub fn covered(&self, assignment: &Assignment) -> bool {
        self.vertices().any(|stored| {
            stored
                .iter()
                .all(|d| assignment.get(d.index as usize) == Some(d.value))
        })
    }

    /// Records a cylinder that carries `∞`, then fuses to a fixpoint.
    pub fn insert(&mut self, deltas: Vec<Delta>) {
        debug_assert!(deltas.windows(2).all(|w| w[0].index < w[1].index));
        debug_assert!(deltas.iter().all(|d| self.registry.admits(*d)));
        if self.add_minimal(deltas) {
            self.fuse();
        }
    }

    /// Records a cylinder without fusing.
    pub fn insert_unfused(&mut self, deltas: Vec<Delta>) {
        self.add_minimal(deltas);
    }

    /// Adds `deltas` unless already covered, dropping the stored lists it
    /// absorbs. Returns whether anything changed.
    fn add_minimal(&mut self, deltas: Vec<Delta>) -> bool {
        if self.covers_list(&deltas) {
            return false;
        }
        let len = deltas.len();
        for (_, layer) in self.layers.range_mut(len + 1..) {
            layer.retain(|stored| !is_sub_list(&deltas, stored));
        }
        self.layers.retain(|_, l| !l.is_empty());
        self.layers.entry(len).or_default().insert(deltas);
        true
    }

    /// Applies fusion until no vertex qualifies.
    ///
    /// A vertex `v` fuses at index `i` when, for every other value `k` of
    /// index `i`, the sibling `v[i := k]` is stored or covered by a shorter
    /// stored list. The fan then covers exactly the cylinder of `v` without
    /// its delta at `i`, which replaces it.
    pub fn fuse(&mut self) {
        loop {
            let Some(shorter) = self.find_fusion() else {
                return;
            };
            self.add_minimal(shorter);
        }
    }

    fn find_fusion(&self) -> Option<Vec<Delta>> {
        for v in self.vertices() {
            for (pos, d) in v.iter().enumerate() {
                let card = self.registry.cardinality(d.index as usize);
                let mut sibling = v.clone();
                let fan_complete = (0..card).filter(|&k| k != d.value).all(|k| {
                    sibling[pos].value = k;
                    self.covers_list(&sibling)
                });
                if fan_complete {
                    let mut shorter = v.clone();
                    shorter.remove(pos);
                    return Some(shorter);
                }
            }
        }
        None
    }

    /// Lexicographically smallest assignment outside every stored cylinder.
    ///
    /// Depth-first over the indices with pruning on any stored list already
    /// satisfied by the prefix; indices no stored list mentions are fixed to
    /// `0`.
    pub fn first_uncovered(&self) -> Option<Assignment> {
        if self.layers.contains_key(&0) {
            return None;
        }
        let p = self.registry.len();
        let mut mentioned = vec![false; p];
        for v in self.vertices() {
            for d in v {
                mentioned[d.index as usize] = true;
            }
        }
        // A stored list is decided once its last index is assigned.
        let mut by_last: Vec<Vec<&Vec<Delta>>> = vec![Vec::new(); p];
        for v in self.vertices() {
            if let Some(last) = v.last() {
                by_last[last.index as usize].push(v);
            }
        }
        let mut current = vec![0u32; p];
        if self.search(0, &mut current, &mentioned, &by_last) {
            Some(Assignment(current))
        } else {
            None
        }
    }

    fn search(
        &self,
        depth: usize,
        current: &mut Vec<u32>,
        mentioned: &[bool],
        by_last: &[Vec<&Vec<Delta>>],
    ) -> bool {
        if depth == current.len() {
            return true;
        }
        let values = if mentioned[depth] {
            self.registry.cardinality(depth)
        } else {
            1
        };
        for k in 0..values {
            current[depth] = k;
            let hit = by_last[depth]
                .iter()
                .any(|v| v.iter().all(|d| current[d.index as usize] == d.value));
            if !hit && self.search(depth + 1, current, mentioned, by_last) {
                return true;
            }
        }
        current[depth] = 0;
        false
    }

    /// Every assignment hits `∞`.
    ///
    /// Normally visible as the graph having fused down to the empty list;
    /// when a cover is total but fusion stalls on it (sibling fusion is not
    /// a complete consensus procedure), the exhaustive search settles it.
    pub fn is_complete(&self) -> bool {
        self.layers.contains_key(&0) || self.first_uncovered().is_none()
    }

    /// Whether fusion alone reduced the graph to the empty list.
    pub fn is_fused_complete(&self) -> bool {
        self.layers.contains_key(&0)
    }
}

impl fmt::Display for DeltaGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (size, layer) in &self.layers {
            for v in layer {
                let parts: Vec<String> = v.iter().map(|d| d.to_string()).collect();
                writeln!(f, "layer={size} {}", parts.join("."))?;
            }
        }
        writeln!(
            f,
            "complete: {}",
            if self.is_complete() { "yes" } else { "no" }
        )
    }
}
