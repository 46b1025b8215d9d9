//! Sylow p-subgroups of wreath groups and vectors of W_k(d; n) they fix.

use std::collections::{HashSet, VecDeque};

use super::group::{act_on_wvector, GroupElement};
use super::obstruction::{is_prime, prime_power};
use super::perm::Perm;
use crate::error::{Error, Result};
use crate::iterated::{check_d, PartitionType, WVector};

fn check_prime(p: usize) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::InvalidInput(format!("{p} is not prime")));
    }
    Ok(())
}

/// Orbit blocks of the standard Sylow p-subgroup of `S_n`: the base-p digits
/// of `n`, largest blocks first, as `(offset, size)`.
pub fn sylow_blocks(n: usize, p: usize) -> Vec<(usize, usize)> {
    let mut digits = Vec::new();
    let mut rest = n;
    let mut power = 1;
    while rest > 0 {
        digits.push((rest % p, power));
        rest /= p;
        power *= p;
    }
    let mut blocks = Vec::new();
    let mut offset = 0;
    for &(count, size) in digits.iter().rev() {
        for _ in 0..count {
            blocks.push((offset, size));
            offset += size;
        }
    }
    blocks
}

/// Generators of the standard Sylow p-subgroup of `S_n`. Inside a block of
/// size `p^j`, generator `t` maps `x ↦ (x + p^{t-1}) mod p^t` on the first
/// `p^t` points of the block.
pub fn symmetric_sylow_generators(n: usize, p: usize) -> Result<Vec<Perm>> {
    check_prime(p)?;
    let mut gens = Vec::new();
    for (offset, size) in sylow_blocks(n, p) {
        let mut span = p;
        while span <= size {
            let step = span / p;
            let mut images: Vec<usize> = (0..n).collect();
            for x in 0..span {
                images[offset + x] = offset + (x + step) % span;
            }
            gens.push(Perm::new(images).expect("cyclic shift is a bijection"));
            span *= p;
        }
    }
    Ok(gens)
}

/// Generators of the Sylow p-subgroup of the wreath group of `ptype`.
pub fn sylow_generators(ptype: &PartitionType, p: usize) -> Result<Vec<GroupElement>> {
    let top = symmetric_sylow_generators(ptype.top(), p)?;
    let Some(inner) = ptype.inner() else {
        return Ok(top.into_iter().map(|sigma| GroupElement { children: Vec::new(), sigma }).collect());
    };
    let mut gens = Vec::new();
    for h in sylow_generators(&inner, p)? {
        for slot in 0..ptype.top() {
            gens.push(GroupElement::in_slot(ptype, slot, h.clone())?);
        }
    }
    for sigma in top {
        gens.push(GroupElement::slot_permutation(ptype, sigma)?);
    }
    Ok(gens)
}

/// The subgroup generated by `gens`; errors once it exceeds `limit` elements.
pub fn closure(ptype: &PartitionType, gens: &[GroupElement], limit: usize) -> Result<Vec<GroupElement>> {
    let id = GroupElement::identity(ptype);
    let mut seen: HashSet<GroupElement> = HashSet::from([id.clone()]);
    let mut order = vec![id.clone()];
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = g.compose(&x)?;
            if seen.insert(y.clone()) {
                if seen.len() > limit {
                    return Err(Error::TooLarge(format!("generated subgroup exceeds {limit} elements")));
                }
                order.push(y.clone());
                queue.push_back(y);
            }
        }
    }
    Ok(order)
}

fn centred_first_orbit(n: usize, p: usize) -> Vec<f64> {
    let (_, size) = sylow_blocks(n, p)[0];
    (0..n).map(|i| if i < size { (n - size) as f64 } else { -(size as f64) }).collect()
}

fn fixed_rec(ptype: &PartitionType, d: usize, p: usize) -> Option<WVector> {
    let top_is_power = prime_power(ptype.top()).is_some_and(|(q, _)| q == p);
    match ptype.inner() {
        None if top_is_power => None,
        None => Some(WVector { children: Vec::new(), blocks: vec![centred_first_orbit(ptype.top(), p); d - 1] }),
        Some(_) if !top_is_power => {
            let mut v = WVector::zeros(ptype, d);
            v.blocks = vec![centred_first_orbit(ptype.top(), p); d - 1];
            Some(v)
        }
        Some(inner) => {
            let child = fixed_rec(&inner, d, p)?;
            Some(WVector { children: vec![child; ptype.top()], blocks: vec![vec![0.0; ptype.top()]; d - 1] })
        }
    }
}

/// A nonzero vector fixed by the Sylow p-subgroup, or `None` when every `n_i`
/// is a power of `p`. The result is checked against every generator.
pub fn sylow_fixed_vector(ptype: &PartitionType, d: usize, p: usize) -> Result<Option<WVector>> {
    check_d(d)?;
    check_prime(p)?;
    let Some(v) = fixed_rec(ptype, d, p) else {
        return Ok(None);
    };
    if v.is_zero() {
        return Err(Error::Verification(format!("fixed vector for type {ptype}, p = {p} is zero")));
    }
    for g in sylow_generators(ptype, p)? {
        if act_on_wvector(&g, &v)? != v {
            return Err(Error::Verification(format!("generator {g:?} moves the fixed vector")));
        }
    }
    Ok(Some(v))
}
