//! The ranked tree poset P_k(n_1, ..., n_k) and its automorphisms.

use std::collections::HashMap;
use std::fmt::Write;

use super::group::{act_on_leaves, GroupElement};
use super::perm::Perm;
use crate::iterated::PartitionType;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PosetNode {
    pub level: usize,
    /// 0-based position within the level; printed 1-based as `π^level_index`.
    pub index: usize,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

/// Hasse tree: a node at level `i < k` has `n_{k-i}` children; level `k` holds
/// the `n` leaves in canonical order.
#[derive(Clone, Debug)]
pub struct Poset {
    pub ptype: PartitionType,
    pub nodes: Vec<PosetNode>,
}

pub fn build_poset(ptype: &PartitionType) -> Poset {
    let k = ptype.k();
    let mut nodes = vec![PosetNode { level: 0, index: 0, parent: None, children: Vec::new() }];
    let mut frontier = vec![0usize];
    for level in 1..=k {
        let fan = ptype.ns()[k - level];
        let mut next = Vec::with_capacity(frontier.len() * fan);
        for (pos, &parent) in frontier.iter().enumerate() {
            for c in 0..fan {
                let id = nodes.len();
                nodes.push(PosetNode { level, index: pos * fan + c, parent: Some(parent), children: Vec::new() });
                nodes[parent].children.push(id);
                next.push(id);
            }
        }
        frontier = next;
    }
    Poset { ptype: ptype.clone(), nodes }
}

impl Poset {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.ptype.k() + 1];
        for n in &self.nodes {
            sizes[n.level] += 1;
        }
        sizes
    }

    /// Node ids of the leaves, in canonical order.
    pub fn leaves(&self) -> Vec<usize> {
        let k = self.ptype.k();
        let mut leaves: Vec<usize> = (0..self.nodes.len()).filter(|&i| self.nodes[i].level == k).collect();
        leaves.sort_by_key(|&i| self.nodes[i].index);
        leaves
    }

    /// `a ≼ b`: `b` lies on the path from `a` to the root.
    pub fn le(&self, a: usize, b: usize) -> bool {
        let mut cur = Some(a);
        while let Some(c) = cur {
            if c == b {
                return true;
            }
            cur = self.nodes[c].parent;
        }
        false
    }

    /// Sorted leaf positions below each node.
    fn leaf_sets(&self) -> Vec<Vec<usize>> {
        let mut sets = vec![Vec::new(); self.nodes.len()];
        for (pos, &leaf) in self.leaves().iter().enumerate() {
            let mut cur = Some(leaf);
            while let Some(c) = cur {
                sets[c].push(pos);
                cur = self.nodes[c].parent;
            }
        }
        for s in &mut sets {
            s.sort_unstable();
        }
        sets
    }

    /// Extends a permutation of the leaves to the whole poset, if it preserves
    /// levels and order.
    pub fn extend_leaf_permutation(&self, pi: &Perm) -> Option<Vec<usize>> {
        if pi.len() != self.leaves().len() {
            return None;
        }
        let sets = self.leaf_sets();
        let lookup: HashMap<&[usize], usize> = sets.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect();
        let mut map = Vec::with_capacity(self.nodes.len());
        for (i, s) in sets.iter().enumerate() {
            let mut image: Vec<usize> = s.iter().map(|&l| pi.apply(l)).collect();
            image.sort_unstable();
            let &j = lookup.get(image.as_slice())?;
            if self.nodes[j].level != self.nodes[i].level {
                return None;
            }
            map.push(j);
        }
        let mut hit = vec![false; map.len()];
        for &j in &map {
            if std::mem::replace(&mut hit[j], true) {
                return None;
            }
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if let Some(p) = n.parent {
                if self.nodes[map[i]].parent != Some(map[p]) {
                    return None;
                }
            }
        }
        Some(map)
    }

    pub fn verify_leaf_permutation(&self, pi: &Perm) -> bool {
        self.extend_leaf_permutation(pi).is_some()
    }

    /// Graphviz rendering of the Hasse tree, root at the top.
    pub fn to_dot(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "digraph poset {{");
        let _ = writeln!(s, "  label=\"P_{}({})\";", self.ptype.k(), self.ptype);
        let _ = writeln!(s, "  rankdir=TB;");
        let _ = writeln!(s, "  node [shape=circle, fontsize=10];");
        for (i, n) in self.nodes.iter().enumerate() {
            let _ = writeln!(s, "  n{i} [label=\"π^{}_{}\"];", n.level, n.index + 1);
        }
        for (i, n) in self.nodes.iter().enumerate() {
            for c in &n.children {
                let _ = writeln!(s, "  n{i} -> n{c};");
            }
        }
        s.push_str("}\n");
        s
    }
}

pub fn verify_automorphism(g: &GroupElement, poset: &Poset) -> bool {
    g.check(&poset.ptype).is_ok() && poset.verify_leaf_permutation(&act_on_leaves(g))
}
