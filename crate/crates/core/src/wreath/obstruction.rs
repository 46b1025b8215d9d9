//! Existence of the equivariant map, decided through the gcd of the binomial
//! coefficients `C(n_i, m)`, with an explicit Bezout certificate when the gcd
//! is one.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::iterated::{check_d, PartitionType};

/// Up to this `n` the gcd is computed from all binomials directly.
pub const DIRECT_GCD_LIMIT: usize = 64;
/// Largest `n_i` accepted (trial-division factorisation).
pub const MAX_FACTOR_N: usize = 1_000_000_000_000;
/// Largest certificate binomial, in bits.
pub const MAX_BINOMIAL_BITS: f64 = 4_000_000.0;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BezoutTerm {
    /// Level `i`, 1-based.
    pub level: usize,
    pub m: usize,
    #[serde(serialize_with = "as_string")]
    pub binomial: BigUint,
    #[serde(serialize_with = "as_string")]
    pub coefficient: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub exists_map: bool,
    pub gcd: u64,
    pub prime: Option<u64>,
    /// `Σ coefficient · binomial = 1`; present exactly when `gcd = 1`.
    pub bezout: Option<Vec<BezoutTerm>>,
}

fn as_string<T: ToString, S: Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

pub fn binomial(n: usize, m: usize) -> BigUint {
    if m > n {
        return BigUint::zero();
    }
    let m = m.min(n - m);
    let mut acc = BigUint::one();
    for i in 0..m {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// `gcd{C(n, m) : 1 <= m <= n - 1}` from the binomials themselves.
pub fn binomial_gcd_direct(n: usize) -> BigUint {
    (1..n).fold(BigUint::zero(), |g, m| g.gcd(&binomial(n, m)))
}

/// `Some((p, a))` when `n = p^a` with `a >= 1`.
pub fn prime_power(n: usize) -> Option<(usize, u32)> {
    let factors = factorize(n);
    match factors.as_slice() {
        [(p, a)] => Some((*p, *a)),
        _ => None,
    }
}

/// Trial division; `(prime, exponent)` pairs in increasing prime order.
pub fn factorize(mut n: usize) -> Vec<(usize, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut a = 0;
            while n % p == 0 {
                n /= p;
                a += 1;
            }
            out.push((p, a));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_prime(n: usize) -> bool {
    n >= 2 && factorize(n) == vec![(n, 1)]
}

/// `(g, x, y)` with `a x + b y = g = gcd(a, b)`, by the Euclidean recursion.
pub fn extended_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut s0, mut s1) = (BigInt::one(), BigInt::zero());
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while !r1.is_zero() {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let s2 = &s0 - &q * &s1;
        let t2 = &t0 - &q * &t1;
        (r0, r1) = (r1, r2);
        (s0, s1) = (s1, s2);
        (t0, t1) = (t1, t2);
    }
    if r0 < BigInt::zero() {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

fn level_gcd(n: usize) -> u64 {
    if n <= DIRECT_GCD_LIMIT {
        let g = binomial_gcd_direct(n);
        g.try_into().expect("gcd divides n")
    } else {
        prime_power(n).map_or(1, |(p, _)| p as u64)
    }
}

/// Subset sizes whose binomials already have the gcd of all `C(n, m)`.
fn certificate_sizes(n: usize) -> Vec<usize> {
    if n <= DIRECT_GCD_LIMIT {
        return (1..n).collect();
    }
    let mut ms = vec![1];
    for (p, a) in factorize(n) {
        let q = p.pow(a);
        if q < n {
            ms.push(q.min(n - q));
        }
    }
    ms
}

/// Decides existence of the obstructing equivariant map for `d >= 2`.
pub fn decide_obstruction(ptype: &PartitionType, d: usize) -> Result<Verdict> {
    check_d(d)?;
    if let Some(n) = ptype.ns().iter().find(|&&n| n > MAX_FACTOR_N) {
        return Err(Error::TooLarge(format!("n_i = {n} exceeds {MAX_FACTOR_N}")));
    }
    let gcd = ptype.ns().iter().fold(0u64, |g, &n| g.gcd(&level_gcd(n)));
    if gcd != 1 {
        return Ok(Verdict { exists_map: false, gcd, prime: Some(gcd), bezout: None });
    }

    let mut terms: Vec<BezoutTerm> = Vec::new();
    let mut g = BigInt::zero();
    'outer: for (i, &n) in ptype.ns().iter().enumerate() {
        for m in certificate_sizes(n) {
            let bits = (m.min(n - m) as f64) * (n as f64).log2();
            if bits > MAX_BINOMIAL_BITS {
                return Err(Error::TooLarge(format!("certificate binomial C({n}, {m}) is too large")));
            }
            let c = binomial(n, m);
            let ci = BigInt::from(c.clone());
            if terms.is_empty() {
                g = ci;
                terms.push(BezoutTerm { level: i + 1, m, binomial: c, coefficient: BigInt::one() });
            } else {
                let (g2, s, t) = extended_gcd(&g, &ci);
                for term in &mut terms {
                    term.coefficient *= &s;
                }
                terms.push(BezoutTerm { level: i + 1, m, binomial: c, coefficient: t });
                g = g2;
            }
            if g.is_one() {
                break 'outer;
            }
        }
    }
    if !g.is_one() {
        return Err(Error::Verification(format!("certificate gcd is {g}, expected 1")));
    }
    terms.retain(|t| !t.coefficient.is_zero());
    Ok(Verdict { exists_map: true, gcd: 1, prime: None, bezout: Some(terms) })
}
