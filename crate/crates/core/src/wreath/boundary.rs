//! The index set B_k of the top-dimensional boundary cells, with strata and
//! orientation signs.
//!
//! `B_1` is the set of nonempty proper subsets of `[n_1]`, and
//! `B_k = B_{k-1} × [n_k] ∪ {nonempty proper subsets of [n_k]}`.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::iterated::{check_d, PartitionType};

/// Largest `n_k` whose subsets are enumerated.
pub const MAX_SUBSET_FAN: usize = 20;
/// Largest `|B_k|` that is enumerated.
pub const MAX_BOUNDARY_SIZE: u128 = 5_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum BoundaryIndex {
    /// An element of `B_{k-1}` placed in top-level slot `slot` (0-based).
    Lift { inner: Box<BoundaryIndex>, slot: usize },
    /// Nonempty proper subset of `[n_k]`, sorted, 0-based.
    Subset(Vec<usize>),
}

impl fmt::Display for BoundaryIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryIndex::Lift { inner, slot } => write!(f, "({inner}, {})", slot + 1),
            BoundaryIndex::Subset(j) => {
                let s: Vec<String> = j.iter().map(|x| (x + 1).to_string()).collect();
                write!(f, "{{{}}}", s.join(","))
            }
        }
    }
}

/// Orbit stratum `C([n_i], m) × {(j_{i+1}, ..., j_k)}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Stratum {
    /// Level `i` (1-based) whose subsets index the stratum.
    pub level: usize,
    /// Subset size `m`.
    pub m: usize,
    /// 0-based slots `j_{i+1}, ..., j_k`.
    pub slots: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundaryEntry {
    pub index: BoundaryIndex,
    pub stratum: Stratum,
    pub sign: i8,
}

/// `M_k = (d - 1)(n_1 ⋯ n_k - 1)` as a parity-relevant u128.
fn m_dim(ns: &[usize], d: usize) -> u128 {
    let n: u128 = ns.iter().map(|&x| x as u128).product();
    (d as u128 - 1) * (n - 1)
}

/// `|B_k|` by the recursion `|B_k| = |B_{k-1}| n_k + 2^{n_k} - 2`.
pub fn boundary_size(ptype: &PartitionType) -> Result<u128> {
    let mut size: u128 = 0;
    for &n in ptype.ns() {
        let subsets =
            1u128.checked_shl(n as u32).filter(|_| n < 127).ok_or_else(|| Error::Overflow(format!("2^{n} subsets")))?
                - 2;
        size = size
            .checked_mul(n as u128)
            .and_then(|s| s.checked_add(subsets))
            .ok_or_else(|| Error::Overflow(format!("|B_k| for type {ptype}")))?;
    }
    Ok(size)
}

fn proper_subsets(n: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> =
        (1u64..(1u64 << n) - 1).map(|mask| (0..n).filter(|&i| mask >> i & 1 == 1).collect()).collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

/// All of `B_k` with strata and signs, for `d >= 2`.
///
/// Signs: `sgn_1 ≡ +1`, `sgn_k(c, i) = (-1)^{(i-1) M_{k-1}} sgn_{k-1}(c)` and
/// `sgn_k(J) = (-1)^{n_k M_{k-1}}` for subsets at level `k >= 2`.
pub fn enumerate_boundary(ptype: &PartitionType, d: usize) -> Result<Vec<BoundaryEntry>> {
    check_d(d)?;
    if let Some(n) = ptype.ns().iter().find(|&&n| n > MAX_SUBSET_FAN) {
        return Err(Error::TooLarge(format!("n_i = {n} exceeds the subset enumeration limit {MAX_SUBSET_FAN}")));
    }
    let size = boundary_size(ptype)?;
    if size > MAX_BOUNDARY_SIZE {
        return Err(Error::TooLarge(format!("|B_k| = {size} exceeds {MAX_BOUNDARY_SIZE}")));
    }
    let ns = ptype.ns();
    let mut entries: Vec<BoundaryEntry> = proper_subsets(ns[0])
        .into_iter()
        .map(|j| BoundaryEntry {
            stratum: Stratum { level: 1, m: j.len(), slots: Vec::new() },
            index: BoundaryIndex::Subset(j),
            sign: 1,
        })
        .collect();
    for level in 2..=ns.len() {
        let nk = ns[level - 1];
        let m_prev = m_dim(&ns[..level - 1], d);
        let mut next = Vec::with_capacity(entries.len() * nk + (1 << nk));
        for slot in 0..nk {
            let flip = (slot as u128 * m_prev) % 2 == 1;
            for e in &entries {
                let mut stratum = e.stratum.clone();
                stratum.slots.push(slot);
                next.push(BoundaryEntry {
                    index: BoundaryIndex::Lift { inner: Box::new(e.index.clone()), slot },
                    stratum,
                    sign: if flip { -e.sign } else { e.sign },
                });
            }
        }
        let subset_sign = if (nk as u128 * m_prev) % 2 == 1 { -1 } else { 1 };
        for j in proper_subsets(nk) {
            next.push(BoundaryEntry {
                stratum: Stratum { level, m: j.len(), slots: Vec::new() },
                index: BoundaryIndex::Subset(j),
                sign: subset_sign,
            });
        }
        entries = next;
    }
    Ok(entries)
}
