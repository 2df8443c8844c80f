//! Primality tests: trial division, deterministic Miller-Rabin below 2^64 and
//! strong-pseudoprime rounds above.

use std::sync::OnceLock;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

/// Bases that make Miller-Rabin deterministic for every n < 2^64.
const DETERMINISTIC_BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Number of strong-pseudoprime rounds used for integers of 64 bits and more.
pub const BIG_ROUNDS: usize = 40;

/// Upper bound (exclusive) of the trial-division prime table.
pub const SIEVE_LIMIT: u64 = 1_000_000;

/// All primes below [`SIEVE_LIMIT`].
pub fn small_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| sieve(SIEVE_LIMIT))
}

fn sieve(limit: u64) -> Vec<u64> {
    let n = limit as usize;
    let mut composite = vec![false; n];
    let mut primes = Vec::new();
    for i in 2..n {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j < n {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

pub fn is_prime_trial(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n % 2 == 0 {
        return false;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut a: u64, mut k: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    a %= m;
    while k > 0 {
        if k & 1 == 1 {
            acc = mul_mod(acc, a, m);
        }
        a = mul_mod(a, a, m);
        k >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &DETERMINISTIC_BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'bases: for &a in &DETERMINISTIC_BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// Primality for arbitrary-precision integers. Exact below 2^64, otherwise
/// [`BIG_ROUNDS`] strong-pseudoprime rounds over the first prime bases.
pub fn is_probable_prime(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    let primes = small_primes();
    for &p in &primes[..200] {
        if (n % p).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    'bases: for &a in primes.iter().take(BIG_ROUNDS) {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sieve_agrees_with_trial_division() {
        let primes = small_primes();
        assert_eq!(primes.len(), 78_498);
        for n in 0..5000u64 {
            assert_eq!(primes.binary_search(&n).is_ok(), is_prime_trial(n), "n = {n}");
            assert_eq!(is_prime_u64(n), is_prime_trial(n), "n = {n}");
        }
    }

    #[test]
    fn strong_pseudoprimes_are_rejected() {
        // 3215031751 is a strong pseudoprime to bases 2, 3, 5 and 7.
        assert!(!is_prime_u64(3_215_031_751));
        assert!(!is_prime_u64(3_825_123_056_546_413_051));
        assert!(is_prime_u64(18_446_744_073_709_551_557));
    }

    #[test]
    fn big_integers() {
        let m127 = (BigUint::one() << 127u32) - 1u32;
        assert!(is_probable_prime(&m127));
        let composite = &m127 * BigUint::from(3u32);
        assert!(!is_probable_prime(&composite));
        // 2^128 + 1 = 59649589127497217 * 5704689200685129054721
        let f7 = (BigUint::one() << 128u32) + 1u32;
        assert!(!is_probable_prime(&f7));
        assert!(is_probable_prime(&BigUint::from(5_704_689_200_685_129_054_721u128)));
    }
}
