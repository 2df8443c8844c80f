//! Integer factorization for multiplicative group orders: algebraic splitting
//! along the tower chain, trial division, Pollard p-1 and Pollard-Brent rho,
//! with optional verified hints and a wall-clock budget.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::{OnceLock, RwLock};
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Deserialize;

use super::primality::{is_probable_prime, small_primes, SIEVE_LIMIT};
use crate::error::{Error, Result};

/// A positive integer split as `cofactor * prod p^e`.
///
/// Every key of `factors` is prime; `cofactor` is the part nobody managed to
/// split (1 when the factorization is complete) and shares no factor with
/// the listed primes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactoredInteger {
    pub value: BigUint,
    pub factors: BTreeMap<BigUint, u32>,
    pub cofactor: BigUint,
}

impl FactoredInteger {
    pub fn unfactored(value: BigUint) -> Self {
        FactoredInteger { value: value.clone(), factors: BTreeMap::new(), cofactor: value }
    }

    pub fn one() -> Self {
        FactoredInteger::unfactored(BigUint::one())
    }

    pub fn is_complete(&self) -> bool {
        self.cofactor.is_one()
    }

    /// `prod p^e` over the known primes.
    pub fn factored_part(&self) -> BigUint {
        self.factors.iter().fold(BigUint::one(), |acc, (p, &e)| acc * p.pow(e))
    }

    /// Whether `value = cofactor * prod p^e`.
    pub fn is_consistent(&self) -> bool {
        self.factored_part() * &self.cofactor == self.value
    }

    fn add_prime(&mut self, p: BigUint, e: u32) {
        *self.factors.entry(p).or_insert(0) += e;
    }

    /// Product of two factorizations.
    pub fn multiply(&self, other: &FactoredInteger) -> FactoredInteger {
        let mut out = FactoredInteger {
            value: &self.value * &other.value,
            factors: self.factors.clone(),
            cofactor: &self.cofactor * &other.cofactor,
        };
        for (p, &e) in &other.factors {
            out.add_prime(p.clone(), e);
        }
        out.strip_known_primes();
        out
    }

    // Moves every known prime out of the cofactor.
    fn strip_known_primes(&mut self) {
        let primes: Vec<BigUint> = self.factors.keys().cloned().collect();
        for p in primes {
            while !self.cofactor.is_one() && (&self.cofactor % &p).is_zero() {
                self.cofactor /= &p;
                self.add_prime(p.clone(), 1);
            }
        }
    }

    /// Number of prime factors counted with multiplicity (known part only).
    pub fn omega(&self) -> u32 {
        self.factors.values().sum()
    }

    /// Exponent of `p` in the known part.
    pub fn valuation(&self, p: u64) -> u32 {
        self.factors.get(&BigUint::from(p)).copied().unwrap_or(0)
    }
}

impl fmt::Display for FactoredInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self
            .factors
            .iter()
            .map(|(p, &e)| if e == 1 { p.to_string() } else { format!("{p}^{e}") })
            .collect();
        if !self.cofactor.is_one() {
            parts.push(format!("[{}]", self.cofactor));
        }
        if parts.is_empty() {
            parts.push("1".into());
        }
        write!(f, "{}", parts.join(" * "))
    }
}

/// A verified external factorization of some integer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorHint {
    pub n: BigUint,
    pub factors: Vec<(BigUint, u32)>,
    pub cofactor: BigUint,
}

#[derive(Deserialize)]
struct RawHint {
    n: String,
    factors: Vec<(String, u32)>,
    #[serde(default)]
    cofactor: Option<String>,
}

fn parse_big(s: &str) -> Result<BigUint> {
    BigUint::from_str(s.trim()).map_err(|_| Error::BadHint(format!("not a decimal integer: {s:?}")))
}

/// A set of verified hints, consulted before any general-purpose factoring.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HintSet {
    hints: Vec<FactorHint>,
}

impl HintSet {
    /// Parses and verifies a hint document: every listed prime must pass the
    /// primality test and the product times the cofactor must equal `n`.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: Vec<RawHint> =
            serde_json::from_str(text).map_err(|e| Error::BadHint(format!("malformed hint file: {e}")))?;
        let mut hints = Vec::with_capacity(raw.len());
        for r in raw {
            let n = parse_big(&r.n)?;
            let cofactor = match &r.cofactor {
                Some(c) => parse_big(c)?,
                None => BigUint::one(),
            };
            let mut product = cofactor.clone();
            let mut factors = Vec::with_capacity(r.factors.len());
            for (p, e) in &r.factors {
                let p = parse_big(p)?;
                if !is_probable_prime(&p) {
                    return Err(Error::BadHint(format!("{p} is listed as prime but is composite")));
                }
                product *= p.pow(*e);
                factors.push((p, *e));
            }
            if product != n {
                return Err(Error::BadHint(format!("factors of {n} multiply to {product}")));
            }
            hints.push(FactorHint { n, factors, cofactor });
        }
        Ok(HintSet { hints })
    }

    pub fn is_empty(&self) -> bool {
        self.hints.is_empty()
    }

    pub fn len(&self) -> usize {
        self.hints.len()
    }

    fn exact(&self, n: &BigUint) -> Option<&FactorHint> {
        self.hints.iter().find(|h| &h.n == n)
    }

    fn primes(&self) -> impl Iterator<Item = &BigUint> {
        self.hints.iter().flat_map(|h| h.factors.iter().map(|(p, _)| p))
    }
}

/// Tuning for the general-purpose stages.
#[derive(Debug, Clone)]
pub struct FactorConfig {
    /// Wall-clock budget for one factorization request.
    pub budget: Duration,
    /// Stage-1 smoothness bound of Pollard p-1.
    pub pm1_bound: u64,
}

/// Environment variable holding the factoring budget in seconds.
pub const BUDGET_ENV: &str = "FFTOWER_FACTOR_BUDGET";

impl Default for FactorConfig {
    fn default() -> Self {
        FactorConfig { budget: Duration::from_secs(300), pm1_bound: 100_000 }
    }
}

impl FactorConfig {
    /// Defaults, with the budget taken from [`BUDGET_ENV`] when set.
    pub fn from_env() -> Self {
        let mut cfg = FactorConfig::default();
        if let Some(secs) = std::env::var(BUDGET_ENV).ok().and_then(|s| s.trim().parse::<f64>().ok()) {
            if secs.is_finite() && secs >= 0.0 {
                cfg.budget = Duration::from_secs_f64(secs);
            }
        }
        cfg
    }
}

type CacheKey = (u64, usize, bool);

fn chain_cache() -> &'static RwLock<HashMap<CacheKey, FactoredInteger>> {
    static CACHE: OnceLock<RwLock<HashMap<CacheKey, FactoredInteger>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// The pieces of the group-order chain of level `n`.
///
/// Odd q: `q - 1`, `q + 1`, `q^(2^j) + 1` for `1 <= j < n` (only `q - 1` at
/// level 0). q = 2: `3` and `4^(2*3^j) + 4^(3^j) + 1` for `0 <= j < n` (the
/// level-0 group of GF(2) is trivial).
pub fn chain_pieces(q: u64, n: usize, char2: bool) -> Vec<BigUint> {
    let mut pieces = Vec::with_capacity(n + 1);
    for k in 0..=n {
        if let Some(p) = chain_piece(q, k, char2, n) {
            pieces.push(p);
        }
    }
    pieces
}

fn chain_piece(q: u64, k: usize, char2: bool, n: usize) -> Option<BigUint> {
    if char2 {
        if n == 0 {
            return None;
        }
        if k == 0 {
            return Some(BigUint::from(3u32));
        }
        let t = BigUint::from(4u32).pow(3u32.pow(k as u32 - 1));
        Some(&t * &t + &t + 1u32)
    } else {
        let q = BigUint::from(q);
        match k {
            0 => Some(q - 1u32),
            1 => Some(q + 1u32),
            _ => Some(q.pow(1u32 << (k - 1)) + 1u32),
        }
    }
}

/// `|K_n^*|` for the tower over GF(q) (`char2`: q = 2 with the cubic chain).
pub fn group_order_value(q: u64, n: usize, char2: bool) -> BigUint {
    if char2 && n == 0 {
        // level 0 of the even towers is GF(2)
        BigUint::one()
    } else if char2 {
        BigUint::from(4u32).pow(3u32.pow(n as u32)) - 1u32
    } else {
        BigUint::from(q).pow(1u32 << n) - 1u32
    }
}

/// Factorization front end holding configuration and hints.
#[derive(Debug, Clone, Default)]
pub struct Factorizer {
    pub config: FactorConfig,
    pub hints: HintSet,
}

impl Factorizer {
    pub fn new(config: FactorConfig) -> Self {
        Factorizer { config, hints: HintSet::default() }
    }

    pub fn with_hints(mut self, hints: HintSet) -> Self {
        self.hints = hints;
        self
    }

    /// Factors `q^(2^n) - 1` (or `4^(3^n) - 1`) piece by piece. Pieces are
    /// factored in parallel and complete results are cached per `(q, piece)`.
    pub fn group_order(&self, q: u64, n: usize, char2: bool) -> FactoredInteger {
        let deadline = Instant::now() + self.config.budget;
        let pieces: Vec<(usize, BigUint)> =
            (0..=n).filter_map(|k| chain_piece(q, k, char2, n).map(|p| (k, p))).collect();
        let results: Vec<FactoredInteger> = pieces
            .par_iter()
            .map(|(k, piece)| {
                let key = (q, *k, char2);
                if let Some(hit) = chain_cache().read().expect("cache lock").get(&key) {
                    return hit.clone();
                }
                let f = self.factor_until(piece, deadline);
                if f.is_complete() {
                    chain_cache().write().expect("cache lock").insert(key, f.clone());
                }
                f
            })
            .collect();
        let total = results.iter().fold(FactoredInteger::one(), |acc, f| acc.multiply(f));
        debug_assert_eq!(total.value, group_order_value(q, n, char2));
        total
    }

    /// Factors an arbitrary positive integer within the configured budget.
    pub fn factor(&self, n: &BigUint) -> FactoredInteger {
        self.factor_until(n, Instant::now() + self.config.budget)
    }

    fn factor_until(&self, n: &BigUint, deadline: Instant) -> FactoredInteger {
        let mut out = FactoredInteger::unfactored(n.clone());
        if n.is_zero() || n.is_one() {
            return out;
        }
        out.cofactor = BigUint::one();
        let mut rest = n.clone();
        if let Some(h) = self.hints.exact(n) {
            for (p, e) in &h.factors {
                out.add_prime(p.clone(), *e);
            }
            rest = h.cofactor.clone();
        }
        for p in self.hints.primes() {
            while !rest.is_one() && (&rest % p).is_zero() {
                rest /= p;
                out.add_prime(p.clone(), 1);
            }
        }
        rest = trial_divide(rest, &mut out);
        let mut work = vec![rest];
        while let Some(c) = work.pop() {
            if c.is_one() {
                continue;
            }
            // no prime factor below the sieve limit is left
            if c < BigUint::from(SIEVE_LIMIT) * SIEVE_LIMIT || is_probable_prime(&c) {
                out.add_prime(c, 1);
                continue;
            }
            if let Some((root, k)) = perfect_power(&c) {
                for _ in 0..k {
                    work.push(root.clone());
                }
                continue;
            }
            match self.split(&c, deadline) {
                Some(d) => {
                    let other = &c / &d;
                    work.push(d);
                    work.push(other);
                }
                None => out.cofactor *= c,
            }
        }
        out.strip_known_primes();
        debug_assert!(out.is_consistent());
        out
    }

    // A non-trivial divisor of the composite `n`, or None once the deadline passes.
    fn split(&self, n: &BigUint, deadline: Instant) -> Option<BigUint> {
        if let Some(small) = n.to_u64() {
            for seed in 1u64.. {
                if Instant::now() >= deadline {
                    return None;
                }
                if let Some(d) = rho_u64(small, seed, deadline) {
                    return Some(BigUint::from(d));
                }
            }
        }
        if let Some(d) = pollard_pm1(n, self.config.pm1_bound, deadline) {
            return Some(d);
        }
        for seed in 1u64.. {
            if Instant::now() >= deadline {
                return None;
            }
            if let Some(d) = rho_big(n, seed, deadline) {
                return Some(d);
            }
        }
        None
    }
}

/// Factors with the default configuration (budget from the environment).
pub fn factor_group_order(q: u64, n: usize, char2: bool, hints: Option<&HintSet>) -> FactoredInteger {
    let mut f = Factorizer::new(FactorConfig::from_env());
    if let Some(h) = hints {
        f.hints = h.clone();
    }
    f.group_order(q, n, char2)
}

fn mod_small(n: &BigUint, p: u64) -> u64 {
    let mut r: u128 = 0;
    for d in n.iter_u64_digits().rev() {
        r = ((r << 64) | d as u128) % p as u128;
    }
    r as u64
}

fn trial_divide(mut n: BigUint, out: &mut FactoredInteger) -> BigUint {
    for &p in small_primes() {
        if n.is_one() {
            break;
        }
        if let Some(small) = n.to_u64() {
            if p.saturating_mul(p) > small {
                out.add_prime(n, 1);
                return BigUint::one();
            }
        }
        if mod_small(&n, p) == 0 {
            let pb = BigUint::from(p);
            while mod_small(&n, p) == 0 {
                n /= &pb;
                out.add_prime(pb.clone(), 1);
            }
        }
    }
    n
}

fn perfect_power(n: &BigUint) -> Option<(BigUint, u32)> {
    let bits = n.bits() as u32;
    for k in 2..=bits {
        let r = n.nth_root(k);
        if r.pow(k) == *n {
            return Some((r, k));
        }
    }
    None
}

#[inline]
fn mulmod64(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 * b as u128) % n as u128) as u64
}

// Brent's cycle finding with products of 128 differences per gcd.
fn rho_u64(n: u64, seed: u64, deadline: Instant) -> Option<u64> {
    if n % 2 == 0 {
        return Some(2);
    }
    let c = seed % (n - 1) + 1;
    let f = |x: u64| (mulmod64(x, x, n) + c) % n;
    let m = 128u64;
    let mut y = (seed.wrapping_mul(0x9e37_79b9_7f4a_7c15)) % n;
    let (mut g, mut r, mut q) = (1u64, 1u64, 1u64);
    let mut x = y;
    let mut ys = y;
    while g == 1 {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        let mut k = 0;
        while k < r && g == 1 {
            ys = y;
            for _ in 0..m.min(r - k) {
                y = f(y);
                q = mulmod64(q, x.abs_diff(y), n);
            }
            g = q.gcd(&n);
            k += m;
        }
        r *= 2;
        if r > 1 << 12 && Instant::now() >= deadline {
            return None;
        }
    }
    if g == n {
        loop {
            ys = f(ys);
            g = x.abs_diff(ys).gcd(&n);
            if g > 1 {
                break;
            }
        }
    }
    (g != n).then_some(g)
}

fn rho_big(n: &BigUint, seed: u64, deadline: Instant) -> Option<BigUint> {
    let c = BigUint::from(seed);
    let f = |x: &BigUint| (x * x + &c) % n;
    let m = 128u64;
    let mut y = BigUint::from(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15)) % n;
    let mut g = BigUint::one();
    let mut r = 1u64;
    let mut q = BigUint::one();
    let mut x = y.clone();
    let mut ys = y.clone();
    let diff = |a: &BigUint, b: &BigUint| if a >= b { a - b } else { b - a };
    while g.is_one() {
        x = y.clone();
        for _ in 0..r {
            y = f(&y);
        }
        let mut k = 0;
        while k < r && g.is_one() {
            ys = y.clone();
            for _ in 0..m.min(r - k) {
                y = f(&y);
                q = (&q * diff(&x, &y)) % n;
            }
            g = q.gcd(n);
            k += m;
            if Instant::now() >= deadline {
                return None;
            }
        }
        r *= 2;
    }
    if &g == n {
        loop {
            ys = f(&ys);
            g = diff(&x, &ys).gcd(n);
            if !g.is_one() {
                break;
            }
        }
    }
    (&g != n).then_some(g)
}

fn pollard_pm1(n: &BigUint, bound: u64, deadline: Instant) -> Option<BigUint> {
    let mut a = BigUint::from(2u32);
    for (i, &p) in small_primes().iter().take_while(|&&p| p <= bound).enumerate() {
        let mut pk = p;
        while pk.saturating_mul(p) <= bound {
            pk *= p;
        }
        a = a.modpow(&BigUint::from(pk), n);
        if i % 256 == 255 {
            if Instant::now() >= deadline {
                return None;
            }
            let g = (&a + n - 1u32).gcd(n);
            if &g == n {
                return None;
            }
            if !g.is_one() {
                return Some(g);
            }
        }
    }
    let g = (&a + n - 1u32).gcd(n);
    (!g.is_one() && &g != n).then_some(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fi(n: u128) -> FactoredInteger {
        Factorizer::default().factor(&BigUint::from(n))
    }

    fn primes_of(f: &FactoredInteger) -> Vec<(u128, u32)> {
        f.factors.iter().map(|(p, &e)| (p.to_u128().unwrap(), e)).collect()
    }

    #[test]
    fn small_group_orders() {
        let f = factor_group_order(3, 2, false, None);
        assert_eq!(primes_of(&f), vec![(2, 4), (5, 1)]);
        let f = factor_group_order(3, 1, false, None);
        assert_eq!(primes_of(&f), vec![(2, 3)]);
        let f = factor_group_order(2, 1, true, None);
        assert_eq!(primes_of(&f), vec![(3, 2), (7, 1)]);
        assert!(f.is_complete() && f.is_consistent());
        assert_eq!(factor_group_order(2, 0, true, None).value, BigUint::one());
        assert_eq!(factor_group_order(7, 0, false, None).value, BigUint::from(6u32));
    }

    #[test]
    fn chain_multiplies_to_group_order() {
        for (q, char2) in [(3, false), (5, false), (11, false), (2, true)] {
            for n in 0..6 {
                let prod = chain_pieces(q, n, char2).iter().fold(BigUint::one(), |a, b| a * b);
                assert_eq!(prod, group_order_value(q, n, char2), "q={q} n={n}");
            }
        }
    }

    #[test]
    fn rho_splits_semiprimes() {
        let f = fi(1_000_003u128 * 1_000_033);
        assert_eq!(primes_of(&f), vec![(1_000_003, 1), (1_000_033, 1)]);
        // two 40-bit primes, above the u64 fast path
        let p = 1_099_511_627_791u128;
        let q = 1_099_511_628_401u128;
        let f = fi(p * q);
        assert_eq!(primes_of(&f), vec![(p, 1), (q, 1)]);
        // a prime square
        let f = fi(p * p);
        assert_eq!(primes_of(&f), vec![(p, 2)]);
    }

    #[test]
    fn cubic_chain_level_four() {
        let f = Factorizer::default().group_order(2, 4, true);
        assert!(f.is_complete());
        assert!(f.factors.contains_key(&BigUint::from(272_010_961u64)));
        assert_eq!(f.valuation(3), 5);
    }

    #[test]
    fn zero_budget_leaves_a_cofactor() {
        let cfg = FactorConfig { budget: Duration::ZERO, pm1_bound: 100_000 };
        let p = 1_099_511_627_791u128;
        let q = 1_099_511_628_401u128;
        let n = BigUint::from(p * q) * 6u32;
        let f = Factorizer::new(cfg).factor(&n);
        assert!(!f.is_complete());
        assert!(f.is_consistent());
        assert_eq!(f.cofactor, BigUint::from(p * q));
        assert_eq!(primes_of(&f), vec![(2, 1), (3, 1)]);
    }

    #[test]
    fn hints_are_verified_and_used() {
        let p = 1_099_511_627_791u128;
        let q = 1_099_511_628_401u128;
        let text = format!(r#"[{{"n": "{}", "factors": [["{p}", 1], ["{q}", 1]]}}]"#, p * q);
        let hints = HintSet::from_json(&text).unwrap();
        let cfg = FactorConfig { budget: Duration::ZERO, pm1_bound: 100_000 };
        let f = Factorizer::new(cfg).with_hints(hints).factor(&(BigUint::from(p * q) * 10u32));
        assert!(f.is_complete());
        let bad_product = format!(r#"[{{"n": "{}", "factors": [["{p}", 1]]}}]"#, p * q);
        assert!(matches!(HintSet::from_json(&bad_product), Err(Error::BadHint(_))));
        let composite = r#"[{"n": "15", "factors": [["15", 1]]}]"#;
        assert!(matches!(HintSet::from_json(composite), Err(Error::BadHint(_))));
        let with_cofactor = r#"[{"n": "30", "factors": [["2", 1]], "cofactor": "15"}]"#;
        assert_eq!(HintSet::from_json(with_cofactor).unwrap().len(), 1);
    }

    #[test]
    fn display_lists_cofactor() {
        let mut f = FactoredInteger::unfactored(BigUint::from(60u32));
        f.cofactor = BigUint::from(15u32);
        f.factors.insert(BigUint::from(2u32), 2);
        assert_eq!(f.to_string(), "2^2 * [15]");
        assert!(f.is_consistent());
    }
}
