//! Dense univariate polynomials over GF(q), used for checking base moduli.
//!
//! Coefficients are stored low degree first with no trailing zeros.

use super::prime::PrimeField;

fn trim(p: &mut Vec<u64>) {
    while p.last() == Some(&0) {
        p.pop();
    }
}

fn degree(p: &[u64]) -> Option<usize> {
    p.iter().rposition(|&c| c != 0)
}

/// Remainder of `a` modulo the non-zero polynomial `m`.
pub fn rem(fp: &PrimeField, a: &[u64], m: &[u64]) -> Vec<u64> {
    let mut r: Vec<u64> = a.to_vec();
    trim(&mut r);
    let dm = degree(m).expect("division by the zero polynomial");
    let lead_inv = fp.inv(m[dm]).expect("leading coefficient is a unit");
    while let Some(dr) = degree(&r) {
        if dr < dm {
            break;
        }
        let c = fp.mul(r[dr], lead_inv);
        let shift = dr - dm;
        for (i, &mi) in m.iter().enumerate().take(dm + 1) {
            r[shift + i] = fp.sub(r[shift + i], fp.mul(c, mi));
        }
        trim(&mut r);
    }
    r
}

pub fn mul_mod(fp: &PrimeField, a: &[u64], b: &[u64], m: &[u64]) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            prod[i + j] = fp.add(prod[i + j], fp.mul(ai, bj));
        }
    }
    rem(fp, &prod, m)
}

pub fn gcd(fp: &PrimeField, a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let r = rem(fp, &x, &y);
        x = y;
        y = r;
    }
    x
}

/// `x^(q^k) mod m` by repeated q-th powering.
fn frobenius_of_x(fp: &PrimeField, m: &[u64], k: usize) -> Vec<u64> {
    let mut acc = rem(fp, &[0, 1], m);
    for _ in 0..k {
        let mut base = acc.clone();
        let mut e = fp.modulus();
        let mut out = vec![1u64];
        while e > 0 {
            if e & 1 == 1 {
                out = mul_mod(fp, &out, &base, m);
            }
            base = mul_mod(fp, &base, &base, m);
            e >>= 1;
        }
        acc = out;
    }
    acc
}

/// Rabin's irreducibility test.
pub fn is_irreducible_rabin(fp: &PrimeField, f: &[u64]) -> bool {
    let Some(d) = degree(f) else { return false };
    if d == 0 {
        return false;
    }
    if d == 1 {
        return true;
    }
    let x_qd = frobenius_of_x(fp, f, d);
    let mut check = x_qd;
    check.resize(check.len().max(2), 0);
    check[1] = fp.sub(check[1], 1);
    trim(&mut check);
    if !check.is_empty() {
        return false;
    }
    let mut primes = Vec::new();
    let mut n = d;
    let mut p = 2;
    while n > 1 {
        if n % p == 0 {
            primes.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    for p in primes {
        let mut h = frobenius_of_x(fp, f, d / p);
        h.resize(h.len().max(2), 0);
        h[1] = fp.sub(h[1], 1);
        let g = gcd(fp, f, &h);
        if degree(&g) != Some(0) {
            return false;
        }
    }
    true
}

/// Exhaustive check: `f` has no monic divisor of degree `1..=deg(f)/2`.
pub fn is_irreducible_exhaustive(fp: &PrimeField, f: &[u64]) -> bool {
    let Some(d) = degree(f) else { return false };
    if d == 0 {
        return false;
    }
    let q = fp.modulus();
    for k in 1..=d / 2 {
        let count = q.pow(k as u32);
        for idx in 0..count {
            let mut divisor = Vec::with_capacity(k + 1);
            let mut t = idx;
            for _ in 0..k {
                divisor.push(t % q);
                t /= q;
            }
            divisor.push(1);
            if rem(fp, f, &divisor).is_empty() {
                return false;
            }
        }
    }
    true
}

/// Irreducibility over GF(q): discriminant test for odd quadratics, exhaustive
/// divisor search when the search space is small, Rabin's test otherwise.
pub fn is_irreducible(fp: &PrimeField, f: &[u64]) -> bool {
    let Some(d) = degree(f) else { return false };
    let q = fp.modulus();
    if d == 2 && q != 2 {
        // x^2 + c1 x + c0 with discriminant c1^2 - 4 c0 (after making f monic)
        let inv = fp.inv(f[2]).expect("non-zero leading coefficient");
        let c1 = fp.mul(f[1], inv);
        let c0 = fp.mul(f[0], inv);
        let disc = fp.sub(fp.mul(c1, c1), fp.mul(4 % q, c0));
        return disc != 0 && !fp.is_square(disc);
    }
    let space = (q as f64).powi((d / 2) as i32);
    if space <= 1e6 {
        is_irreducible_exhaustive(fp, f)
    } else {
        is_irreducible_rabin(fp, f)
    }
}
