//! The wreath group S_k(n_1, ..., n_k) as recursive tree automorphisms and its
//! actions on leaves, site trees and W_k(d; n).

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::perm::Perm;
use crate::error::{Error, Result};
use crate::iterated::{check_d, wvector_dim, PartitionType, SiteTree, WVector};

/// `(Σ_1, ..., Σ_{n_k}; σ)`; `children` is empty when k = 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupElement {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<GroupElement>,
    pub sigma: Perm,
}

impl GroupElement {
    pub fn identity(ptype: &PartitionType) -> Self {
        GroupElement {
            children: match ptype.inner() {
                Some(inner) => vec![GroupElement::identity(&inner); ptype.top()],
                None => Vec::new(),
            },
            sigma: Perm::identity(ptype.top()),
        }
    }

    /// Element acting only by `sigma` on the top level.
    pub fn slot_permutation(ptype: &PartitionType, sigma: Perm) -> Result<Self> {
        if sigma.len() != ptype.top() {
            return Err(Error::ShapeMismatch(format!("slot permutation of degree {} for type {ptype}", sigma.len())));
        }
        let mut g = GroupElement::identity(ptype);
        g.sigma = sigma;
        Ok(g)
    }

    /// Element acting by `h` inside top-level slot `slot` only.
    pub fn in_slot(ptype: &PartitionType, slot: usize, h: GroupElement) -> Result<Self> {
        let inner = ptype.inner().ok_or_else(|| Error::ShapeMismatch("level-1 types have no slots".into()))?;
        h.check(&inner)?;
        let mut g = GroupElement::identity(ptype);
        g.children[slot] = h;
        Ok(g)
    }

    pub fn check(&self, ptype: &PartitionType) -> Result<()> {
        if self.sigma.len() != ptype.top() {
            return Err(Error::ShapeMismatch(format!(
                "permutation of degree {} where type {ptype} needs {}",
                self.sigma.len(),
                ptype.top()
            )));
        }
        match ptype.inner() {
            None if self.children.is_empty() => Ok(()),
            Some(inner) if self.children.len() == ptype.top() => {
                self.children.iter().enumerate().try_for_each(|(i, c)| c.check(&inner).map_err(|e| e.at(i)))
            }
            _ => Err(Error::ShapeMismatch(format!("group element does not match type {ptype}"))),
        }
    }

    /// `(Σ; σ)(Θ; θ) = (Σ_i Θ_{σ^{-1}(i)}; σθ)`.
    pub fn compose(&self, other: &GroupElement) -> Result<GroupElement> {
        if self.sigma.len() != other.sigma.len() || self.children.len() != other.children.len() {
            return Err(Error::ShapeMismatch("composing elements of different types".into()));
        }
        let inv = self.sigma.inverse();
        let children = self
            .children
            .iter()
            .enumerate()
            .map(|(i, s)| s.compose(&other.children[inv.apply(i)]))
            .collect::<Result<Vec<_>>>()?;
        Ok(GroupElement { children, sigma: self.sigma.compose(&other.sigma) })
    }

    pub fn inverse(&self) -> GroupElement {
        let children = (0..self.children.len()).map(|j| self.children[self.sigma.apply(j)].inverse()).collect();
        GroupElement { children, sigma: self.sigma.inverse() }
    }

    pub fn is_identity(&self) -> bool {
        self.sigma.is_identity() && self.children.iter().all(GroupElement::is_identity)
    }

    fn leaf_count(&self) -> usize {
        if self.children.is_empty() {
            self.sigma.len()
        } else {
            self.sigma.len() * self.children[0].leaf_count()
        }
    }
}

/// `|S_k| = |S_{k-1}|^{n_k} · n_k!`.
pub fn group_order(ptype: &PartitionType) -> Result<u128> {
    let overflow = || Error::Overflow(format!("order of the wreath group of type {ptype} exceeds u128"));
    let mut order: u128 = 1;
    for &n in ptype.ns() {
        let fact = (1..=n as u128).try_fold(1u128, |a, b| a.checked_mul(b)).ok_or_else(overflow)?;
        order = order
            .checked_pow(u32::try_from(n).map_err(|_| overflow())?)
            .and_then(|o| o.checked_mul(fact))
            .ok_or_else(overflow)?;
    }
    Ok(order)
}

/// Every group element; refuses groups larger than `limit`.
pub fn enumerate_group(ptype: &PartitionType, limit: u128) -> Result<Vec<GroupElement>> {
    let order = group_order(ptype)?;
    if order > limit {
        return Err(Error::TooLarge(format!("group of type {ptype} has {order} elements (limit {limit})")));
    }
    Ok(enumerate_rec(ptype))
}

fn enumerate_rec(ptype: &PartitionType) -> Vec<GroupElement> {
    let perms = Perm::all(ptype.top());
    let Some(inner) = ptype.inner() else {
        return perms.into_iter().map(|sigma| GroupElement { children: Vec::new(), sigma }).collect();
    };
    let sub = enumerate_rec(&inner);
    let mut tuples: Vec<Vec<GroupElement>> = vec![Vec::new()];
    for _ in 0..ptype.top() {
        tuples = tuples
            .into_iter()
            .flat_map(|t| {
                sub.iter().map(move |s| {
                    let mut t = t.clone();
                    t.push(s.clone());
                    t
                })
            })
            .collect();
    }
    tuples
        .into_iter()
        .flat_map(|children| {
            perms.iter().map(move |sigma| GroupElement { children: children.clone(), sigma: sigma.clone() })
        })
        .collect()
}

/// Uniformly random element.
pub fn random_element(ptype: &PartitionType, rng: &mut impl Rng) -> GroupElement {
    let mut images: Vec<usize> = (0..ptype.top()).collect();
    images.shuffle(rng);
    let children = match ptype.inner() {
        Some(inner) => (0..ptype.top()).map(|_| random_element(&inner, rng)).collect(),
        None => Vec::new(),
    };
    GroupElement { children, sigma: Perm::new(images).expect("shuffled identity") }
}

/// Induced permutation of the `n` leaves: leaf `b·n' + j` goes to
/// `σ(b)·n' + Σ_{σ(b)}(j)`.
pub fn act_on_leaves(g: &GroupElement) -> Perm {
    if g.children.is_empty() {
        return g.sigma.clone();
    }
    let per = g.children[0].leaf_count();
    let inner: Vec<Perm> = g.children.iter().map(act_on_leaves).collect();
    let mut images = vec![0; g.sigma.len() * per];
    for b in 0..g.sigma.len() {
        let slot = g.sigma.apply(b);
        for j in 0..per {
            images[b * per + j] = slot * per + inner[slot].apply(j);
        }
    }
    Perm::new(images).expect("wreath action is a bijection")
}

/// Moves per-leaf data along the leaf action: `out[π(l)] = values[l]`.
pub fn act_on_values<T: Clone>(g: &GroupElement, values: &[T]) -> Result<Vec<T>> {
    let pi = act_on_leaves(g);
    if values.len() != pi.len() {
        return Err(Error::ShapeMismatch(format!("{} values for {} leaves", values.len(), pi.len())));
    }
    Ok(pi.permute_slice(values))
}

/// The wreath product action on `W_k(d; n)`.
pub fn act_on_wvector(g: &GroupElement, v: &WVector) -> Result<WVector> {
    if v.children.len() != g.children.len() || v.blocks.iter().any(|b| b.len() != g.sigma.len()) {
        return Err(Error::ShapeMismatch("group element and WVector have different types".into()));
    }
    let inv = g.sigma.inverse();
    let children = g
        .children
        .iter()
        .enumerate()
        .map(|(i, s)| act_on_wvector(s, &v.children[inv.apply(i)]))
        .collect::<Result<Vec<_>>>()?;
    Ok(WVector { children, blocks: v.blocks.iter().map(|b| g.sigma.permute_slice(b)).collect() })
}

/// The same action on site trees: the sites of slot `b` move to slot `σ(b)`.
pub fn act_on_tree(g: &GroupElement, tree: &SiteTree) -> Result<SiteTree> {
    if tree.children.len() != g.children.len() || tree.sites.len() != g.sigma.len() {
        return Err(Error::ShapeMismatch("group element and site tree have different types".into()));
    }
    let inv = g.sigma.inverse();
    let children = g
        .children
        .iter()
        .enumerate()
        .map(|(i, s)| act_on_tree(s, &tree.children[inv.apply(i)]))
        .collect::<Result<Vec<_>>>()?;
    Ok(SiteTree { children, sites: tree.sites.permuted(g.sigma.images()) })
}

/// Orientation function: `sgn(σ)^{d-1}` for k = 1, otherwise
/// `sgn(σ)^{(d-1)·n'} · Π orient(Σ_i)`.
pub fn orient(g: &GroupElement, d: usize) -> i32 {
    let s = g.sigma.sign();
    if g.children.is_empty() {
        return if s < 0 && (d - 1) % 2 == 1 { -1 } else { 1 };
    }
    let per = g.children[0].leaf_count();
    let top = if s < 0 && ((d - 1) * per) % 2 == 1 { -1 } else { 1 };
    g.children.iter().fold(top, |acc, c| acc * orient(c, d))
}

/// Integer matrix of `v ↦ g·v` in the coordinates of [`WVector::coords`].
pub fn wvector_action_matrix(g: &GroupElement, ptype: &PartitionType, d: usize) -> Result<Vec<Vec<i64>>> {
    check_d(d)?;
    g.check(ptype)?;
    let dim = wvector_dim(ptype, d)?;
    let mut cols = Vec::with_capacity(dim);
    for c in 0..dim {
        let mut e = vec![0.0; dim];
        e[c] = 1.0;
        let image = act_on_wvector(g, &WVector::from_coords(ptype, d, &e)?)?.coords();
        cols.push(image.iter().map(|x| *x as i64).collect::<Vec<_>>());
    }
    Ok((0..dim).map(|r| cols.iter().map(|col| col[r]).collect()).collect())
}

/// Exact determinant by fraction-free (Bareiss) elimination.
pub fn determinant(m: &[Vec<i64>]) -> Result<i128> {
    let n = m.len();
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&r| a[r][k] != 0) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return Ok(0),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = a[i][j]
                    .checked_mul(a[k][k])
                    .and_then(|x| a[i][k].checked_mul(a[k][j]).and_then(|y| x.checked_sub(y)))
                    .ok_or_else(|| Error::Overflow("determinant entries exceed i128".into()))?;
                a[i][j] = num / prev;
            }
        }
        prev = a[k][k];
    }
    Ok(if n == 0 { 1 } else { sign * a[n - 1][n - 1] })
}
