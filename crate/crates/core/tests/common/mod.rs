//! Reference computations for tests, written without the library's geometry,
//! power-diagram or arithmetic code.
#![allow(dead_code)]

use num_bigint::{BigInt, BigUint};

pub type P = (f64, f64);

pub fn shoelace(poly: &[P]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a.0 * b.1 - b.0 * a.1
        })
        .sum::<f64>()
        / 2.0
}

pub fn perimeter(poly: &[P]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt()
        })
        .sum()
}

/// Sutherland-Hodgman against `a.0*x + a.1*y <= b`.
pub fn clip(poly: &[P], a: P, b: f64) -> Vec<P> {
    let f = |p: P| a.0 * p.0 + a.1 * p.1 - b;
    let mut out = Vec::new();
    for i in 0..poly.len() {
        let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
        let (fp, fq) = (f(p), f(q));
        if fp <= 0.0 {
            out.push(p);
        }
        if (fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0) {
            let t = fp / (fp - fq);
            out.push((p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1)));
        }
    }
    out
}

/// Intersection of two counter-clockwise convex polygons.
pub fn intersect(p: &[P], q: &[P]) -> Vec<P> {
    let mut out = p.to_vec();
    for i in 0..q.len() {
        if out.is_empty() {
            break;
        }
        let (u, v) = (q[i], q[(i + 1) % q.len()]);
        // Left of u->v: (v-u) x (p-u) >= 0.
        let a = (v.1 - u.1, -(v.0 - u.0));
        let b = a.0 * u.0 + a.1 * u.1;
        out = clip(&out, a, b);
    }
    out
}

pub fn area_of(poly: &[P]) -> f64 {
    if poly.len() < 3 {
        0.0
    } else {
        shoelace(poly).abs()
    }
}

/// Lebesgue measure of the symmetric difference.
pub fn sym_diff(p: &[P], q: &[P]) -> f64 {
    (area_of(p) + area_of(q) - 2.0 * area_of(&intersect(p, q))).max(0.0)
}

/// Power cells `{ |z - x_i|^2 - w_i <= |z - x_j|^2 - w_j }` clipped to `body`.
pub fn power_cells(body: &[P], sites: &[P], w: &[f64]) -> Vec<Vec<P>> {
    (0..sites.len())
        .map(|i| {
            let mut cell = body.to_vec();
            for j in 0..sites.len() {
                if i == j {
                    continue;
                }
                let (xi, xj) = (sites[i], sites[j]);
                let a = (2.0 * (xj.0 - xi.0), 2.0 * (xj.1 - xi.1));
                let b = (xj.0 * xj.0 + xj.1 * xj.1) - (xi.0 * xi.0 + xi.1 * xi.1) + w[i] - w[j];
                cell = clip(&cell, a, b);
            }
            cell
        })
        .collect()
}

pub fn point_in(poly: &[P], z: P, eps: f64) -> bool {
    let n = poly.len();
    n >= 3
        && (0..n).all(|i| {
            let (u, v) = (poly[i], poly[(i + 1) % n]);
            let len = ((v.0 - u.0).powi(2) + (v.1 - u.1).powi(2)).sqrt();
            (v.0 - u.0) * (z.1 - u.1) - (v.1 - u.1) * (z.0 - u.0) >= -eps * len
        })
}

pub fn to_pairs(v: &[equipart::Point2]) -> Vec<P> {
    v.iter().map(|p| (p.x, p.y)).collect()
}

pub fn binomial(n: u64, m: u64) -> BigUint {
    let mut r = BigUint::from(1u32);
    for i in 0..m {
        r = r * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    r
}

/// Pascal's triangle row `n` in u128.
pub fn pascal_row(n: usize) -> Vec<u128> {
    let mut row = vec![1u128];
    for _ in 0..n {
        let mut next = vec![1u128; row.len() + 1];
        for i in 1..row.len() {
            next[i] = row[i - 1] + row[i];
        }
        row = next;
    }
    row
}

pub fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Smallest prime factor by trial division.
pub fn smallest_prime_factor(n: u64) -> u64 {
    (2..).find(|p| p * p > n || n % p == 0).map(|p| if p * p > n { n } else { p }).unwrap()
}

/// `Some(p)` when `n = p^a` with `a >= 1`.
pub fn prime_base(n: u64) -> Option<u64> {
    if n < 2 {
        return None;
    }
    let p = smallest_prime_factor(n);
    let mut m = n;
    while m % p == 0 {
        m /= p;
    }
    (m == 1).then_some(p)
}

/// The common prime when every entry is a power of the same prime.
pub fn common_prime(ns: &[usize]) -> Option<u64> {
    let p = prime_base(ns[0] as u64)?;
    ns.iter().all(|&n| prime_base(n as u64) == Some(p)).then_some(p)
}

pub fn primes_up_to(n: usize) -> Vec<usize> {
    (2..=n).filter(|&k| smallest_prime_factor(k as u64) == k as u64).collect()
}

pub fn big(v: &BigUint) -> BigInt {
    BigInt::from(v.clone())
}

/// Integer determinant by partial-pivot LU in f64, rounded; panics if the
/// result is not close to an integer.
#[allow(clippy::needless_range_loop)]
pub fn det(m: &[Vec<i64>]) -> i128 {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect();
    let mut det = 1.0;
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        if a[p][c] == 0.0 {
            return 0;
        }
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= a[c][c];
        for r in (c + 1)..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    let rounded = det.round();
    assert!((det - rounded).abs() < 1e-6, "determinant {det} is not integral");
    rounded as i128
}

/// Every type with `k` levels and entries in `lo..=hi`.
pub fn all_types(k: usize, lo: usize, hi: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|t| {
                (lo..=hi).map(move |n| {
                    let mut t = t.clone();
                    t.push(n);
                    t
                })
            })
            .collect();
    }
    out
}
