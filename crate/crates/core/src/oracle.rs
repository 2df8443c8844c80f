//! Brute-force ground truth for small fields.
//!
//! A [`FlatField`] is GF(q)[t]/(P) for a primitive P found by exhaustive
//! search, with exp/log tables. It shares no code with the tower arithmetic:
//! the tower is embedded into it by scanning for roots of the defining
//! polynomials, and every comparison goes through that embedding.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ff::{FieldElement, TowerField};
use crate::orders::{factor_group_order, multiplicative_order};
use crate::residues;
use crate::towers::{TowerSpec, TowerState};

/// Largest field the oracle will enumerate.
pub const MAX_FIELD_SIZE: u64 = 1 << 14;

/// Pairs checked exhaustively up to this field size, sampled above it.
const EXHAUSTIVE_PAIRS: u64 = 1024;
const SAMPLED_PAIRS: usize = 20_000;
const SAMPLED_ORDERS: usize = 64;

/// GF(q^k) as integers `0..q^k` read as base-q digit vectors (low digit
/// first) of polynomials in t modulo a primitive P.
#[derive(Debug, Clone)]
pub struct FlatField {
    q: u64,
    degree: usize,
    modulus: Vec<u64>,
    exp: Vec<u32>,
    log: Vec<u32>,
}

fn mismatch(operation: &str, detail: String) -> Error {
    Error::OracleMismatch { operation: operation.into(), detail }
}

impl FlatField {
    pub fn new(q: u64, degree: usize) -> Result<Self> {
        if q < 2 || (2..q).take_while(|d| d * d <= q).any(|d| q % d == 0) {
            return Err(Error::NotPrime(q.to_string()));
        }
        let size = (q as u128).checked_pow(degree as u32).unwrap_or(u128::MAX);
        if degree == 0 || size > MAX_FIELD_SIZE as u128 {
            return Err(Error::FieldTooLarge(format!("GF({q}^{degree}) exceeds {MAX_FIELD_SIZE} elements")));
        }
        let size = size as u64;
        // monic P = t^k + sum c_i t^i, candidates enumerated by their low coefficients
        for low in 0..size {
            let mut modulus = digits(low, q, degree);
            if modulus[0] == 0 {
                continue;
            }
            modulus.push(1);
            if let Some(exp) = power_cycle(q, &modulus, size) {
                let mut log = vec![0u32; size as usize];
                for (i, &e) in exp.iter().enumerate() {
                    log[e as usize] = i as u32;
                }
                return Ok(FlatField { q, degree, modulus, exp, log });
            }
        }
        unreachable!("every finite field has a primitive polynomial")
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn size(&self) -> u64 {
        self.log.len() as u64
    }

    /// The primitive modulus P, monic, low degree first.
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn from_prime(&self, c: u64) -> u32 {
        (c % self.q) as u32
    }

    pub fn digits(&self, a: u32) -> Vec<u64> {
        digits(a as u64, self.q, self.degree)
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        let (mut a, mut b) = (a as u64, b as u64);
        let (mut out, mut place) = (0u64, 1u64);
        for _ in 0..self.degree {
            out += ((a % self.q + b % self.q) % self.q) * place;
            a /= self.q;
            b /= self.q;
            place *= self.q;
        }
        out as u32
    }

    pub fn neg(&self, a: u32) -> u32 {
        let d: Vec<u64> = self.digits(a).iter().map(|&c| (self.q - c) % self.q).collect();
        undigits(&d, self.q)
    }

    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        let n = self.size() - 1;
        let e = (self.log[a as usize] as u64 + self.log[b as usize] as u64) % n;
        self.exp[e as usize]
    }

    pub fn inv(&self, a: u32) -> Option<u32> {
        if a == 0 {
            return None;
        }
        let n = self.size() - 1;
        Some(self.exp[((n - self.log[a as usize] as u64) % n) as usize])
    }

    pub fn pow(&self, a: u32, k: u64) -> u32 {
        if k == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let n = self.size() - 1;
        let e = (self.log[a as usize] as u128 * k as u128 % n as u128) as usize;
        self.exp[e]
    }

    /// Evaluates `sum c_i y^i` with flat coefficients.
    pub fn eval(&self, coeffs: &[u32], y: u32) -> u32 {
        coeffs.iter().rev().fold(0, |acc, &c| self.add(self.mul(acc, y), c))
    }

    /// All roots of `sum c_i y^i`, by scanning every element.
    pub fn roots(&self, coeffs: &[u32]) -> Vec<u32> {
        (0..self.size() as u32).filter(|&y| self.eval(coeffs, y) == 0).collect()
    }

    /// Size of the orbit of `a` under `y -> y^sub` (`sub` a subfield size).
    pub fn orbit_len(&self, a: u32, sub: u64) -> usize {
        let mut y = self.pow(a, sub);
        let mut len = 1;
        while y != a {
            y = self.pow(y, sub);
            len += 1;
        }
        len
    }

    /// Elements of the subfield with `sub` elements.
    pub fn subfield(&self, sub: u64) -> Vec<u32> {
        (0..self.size() as u32).filter(|&a| self.pow(a, sub) == a).collect()
    }
}

fn digits(mut a: u64, q: u64, len: usize) -> Vec<u64> {
    let mut d = Vec::with_capacity(len);
    for _ in 0..len {
        d.push(a % q);
        a /= q;
    }
    d
}

fn undigits(d: &[u64], q: u64) -> u32 {
    d.iter().rev().fold(0u64, |acc, &c| acc * q + c) as u32
}

// Powers t^0, t^1, ... when t has order exactly size - 1 modulo `modulus`.
fn power_cycle(q: u64, modulus: &[u64], size: u64) -> Option<Vec<u32>> {
    let k = modulus.len() - 1;
    let mut cur = vec![0u64; k];
    cur[0] = 1;
    let mut exp = Vec::with_capacity(size as usize - 1);
    for i in 0..size - 1 {
        if i > 0 && cur[0] == 1 && cur[1..].iter().all(|&c| c == 0) {
            return None;
        }
        exp.push(undigits(&cur, q));
        // multiply by t: shift up and fold t^k back with -P
        let top = cur[k - 1];
        for j in (1..k).rev() {
            cur[j] = cur[j - 1];
        }
        cur[0] = 0;
        for j in 0..k {
            cur[j] = (cur[j] + (q - modulus[j]) * top) % q;
        }
    }
    let back_to_one = cur[0] == 1 && cur[1..].iter().all(|&c| c == 0);
    back_to_one.then_some(exp)
}

/// Smallest `k >= 1` with `a^k = 1`, by repeated multiplication.
pub fn brute_order(field: &FlatField, a: u32) -> Result<u64> {
    if a == 0 {
        return Err(Error::ZeroElement);
    }
    let mut y = a;
    let mut k = 1;
    while y != 1 {
        y = field.mul(y, a);
        k += 1;
    }
    Ok(k)
}

/// A translation class `{a + c : c in GF(q)}` and how many of its members are
/// nonzero squares.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranslationOrbit {
    pub members: Vec<u32>,
    pub squares: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueCensus {
    pub field_size: u64,
    /// Squares, counting 0.
    pub squares: u64,
    /// Cubes counting 0, when 3 divides the group order.
    pub cubes: Option<u64>,
    /// Odd q: the classes of `x -> x + c` outside GF(q).
    pub orbits: Vec<TranslationOrbit>,
}

fn power_set(field: &FlatField, k: u64) -> HashSet<u32> {
    (0..field.size() as u32).map(|a| field.pow(a, k)).collect()
}

/// Counts squares and cubes by enumeration, and for odd q the translation
/// classes of the elements outside the prime field.
pub fn residue_census(field: &FlatField) -> ResidueCensus {
    let squares = power_set(field, 2);
    let cubes = ((field.size() - 1) % 3 == 0).then(|| power_set(field, 3).len() as u64);
    let mut orbits = Vec::new();
    if field.q() != 2 {
        let mut seen = vec![false; field.size() as usize];
        for a in field.q() as u32..field.size() as u32 {
            if seen[a as usize] {
                continue;
            }
            let members: Vec<u32> = (0..field.q()).map(|c| field.add(a, field.from_prime(c))).collect();
            for &m in &members {
                seen[m as usize] = true;
            }
            let sq = members.iter().filter(|m| squares.contains(m)).count();
            orbits.push(TranslationOrbit { members, squares: sq });
        }
    }
    ResidueCensus { field_size: field.size(), squares: squares.len() as u64, cubes, orbits }
}

/// A flat copy of levels `1..=level` of the tower described by a spec,
/// built from the spec alone.
#[derive(Debug, Clone)]
pub struct Oracle {
    spec: TowerSpec,
    level: usize,
    flat: FlatField,
    // images of x_1..x_level; gens[0] is unused
    gens: Vec<u32>,
}

impl Oracle {
    /// Level limits: 2 for odd q, 1 for q = 2.
    pub fn from_spec(spec: &TowerSpec, level: usize) -> Result<Self> {
        spec.validate()?;
        let char2 = spec.is_char2();
        let max_level = if char2 { 1 } else { 2 };
        if level == 0 || level > max_level {
            return Err(Error::FieldTooLarge(format!(
                "oracle covers levels 1..={max_level} for q = {}, got {level}",
                spec.q
            )));
        }
        let base = spec.base_modulus()?;
        let base_degree = base.len() - 1;
        let step: usize = if char2 { 3 } else { 2 };
        let degree = base_degree * step.pow(level as u32 - 1);
        let flat = FlatField::new(spec.q, degree)?;
        let q = spec.q;
        let coeffs: Vec<u32> = base.iter().map(|&c| flat.from_prime(c)).collect();
        let x1 = *flat
            .roots(&coeffs)
            .first()
            .ok_or_else(|| mismatch("embedding", "base modulus has no root in the flat field".into()))?;
        let mut gens = vec![0, x1];
        for _ in 2..=level {
            let prev = *gens.last().unwrap();
            let v = flat.eval(&spec.v_coeffs.iter().map(|&c| flat.from_prime(c)).collect::<Vec<_>>(), prev);
            // y^2 + y - v
            let poly = vec![flat.neg(v), 1, 1];
            let root = *flat
                .roots(&poly)
                .first()
                .ok_or_else(|| mismatch("embedding", format!("y^2 + y - v has no root over GF({q})")))?;
            gens.push(root);
        }
        Ok(Oracle { spec: spec.clone(), level, flat, gens })
    }

    pub fn flat(&self) -> &FlatField {
        &self.flat
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// Image of `x_n`.
    pub fn generator(&self, n: usize) -> u32 {
        self.gens[n]
    }

    fn dim(&self, n: usize) -> usize {
        let base = self.spec.init_minpoly.len();
        if n == 0 {
            1
        } else {
            let step: usize = if self.spec.is_char2() { 3 } else { 2 };
            base * step.pow(n as u32 - 1)
        }
    }

    /// Image of a tower element given by its coordinates at level `n`.
    pub fn embed_coeffs(&self, n: usize, coeffs: &[u64]) -> u32 {
        if n <= 1 {
            let x = self.gens.get(1).copied().unwrap_or(0);
            return coeffs.iter().rev().fold(0, |acc, &c| self.flat.add(self.flat.mul(acc, x), self.flat.from_prime(c)));
        }
        let d = self.dim(n - 1);
        let blocks: Vec<u32> = coeffs.chunks(d).map(|b| self.embed_coeffs(n - 1, b)).collect();
        self.flat.eval(&blocks, self.gens[n])
    }

    pub fn embed(&self, a: &FieldElement) -> u32 {
        self.embed_coeffs(a.level(), a.coeffs())
    }

    /// `v(y)` in the flat field.
    pub fn v(&self, y: u32) -> u32 {
        let coeffs: Vec<u32> = self.spec.v_coeffs.iter().map(|&c| self.flat.from_prime(c)).collect();
        self.flat.eval(&coeffs, y)
    }

    /// `|K_n|` as a subfield size of the flat field.
    pub fn level_size(&self, n: usize) -> u64 {
        self.spec.q.pow(self.dim(n) as u32)
    }
}

/// What a successful cross-check covered.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CrossCheckReport {
    pub level: usize,
    pub field_size: u64,
    pub elements_embedded: u64,
    pub pairs_checked: u64,
    pub orders_checked: u64,
    pub residues_checked: u64,
    pub norms_checked: u64,
    pub irreducibility_checked: u64,
    pub census: Option<ResidueCensus>,
}

/// Cross-checks a built tower at level `n` against the oracle.
pub fn cross_check(tower: &TowerState, n: usize) -> Result<CrossCheckReport> {
    cross_check_field(tower.spec(), tower.field(), n)
}

/// Cross-checks an arbitrary tower field against the oracle built from
/// `spec`; any disagreement is an [`Error::OracleMismatch`].
pub fn cross_check_field(spec: &TowerSpec, field: &TowerField, n: usize) -> Result<CrossCheckReport> {
    if n > field.top_level() {
        return Err(Error::LevelNotBuilt(n));
    }
    let oracle = Oracle::from_spec(spec, n)?;
    let flat = oracle.flat();
    let q = spec.q;
    let size = flat.size();
    if field.field_size(n) != size.into() {
        return Err(mismatch("field size", format!("tower has {} elements, oracle {size}", field.field_size(n))));
    }
    let mut report = CrossCheckReport { level: n, field_size: size, ..Default::default() };

    // every coordinate vector maps to a distinct flat element
    let dim = field.dim(n);
    let elements: Vec<FieldElement> =
        (0..size).map(|i| field.element(n, &digits(i, q, dim)).expect("valid coordinates")).collect();
    let images: Vec<u32> = elements.iter().map(|a| oracle.embed(a)).collect();
    let mut hit = vec![false; size as usize];
    for &im in &images {
        if std::mem::replace(&mut hit[im as usize], true) {
            return Err(mismatch("embedding", format!("two elements map to flat element {im}")));
        }
    }
    report.elements_embedded = size;

    // ring operations
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let pairs: Vec<(usize, usize)> = if size <= EXHAUSTIVE_PAIRS {
        (0..size as usize).flat_map(|i| (0..size as usize).map(move |j| (i, j))).collect()
    } else {
        (0..SAMPLED_PAIRS).map(|_| (rng.gen_range(0..size as usize), rng.gen_range(0..size as usize))).collect()
    };
    for &(i, j) in &pairs {
        let (a, b) = (&elements[i], &elements[j]);
        let (fa, fb) = (images[i], images[j]);
        let prod = oracle.embed(&field.mul(a, b));
        if prod != flat.mul(fa, fb) {
            return Err(mismatch("mul", format!("{a} * {b}")));
        }
        if oracle.embed(&field.add(a, b)) != flat.add(fa, fb) {
            return Err(mismatch("add", format!("{a} + {b}")));
        }
        if !b.is_zero() {
            let quo = field.div(a, b)?;
            if Some(oracle.embed(&quo)) != flat.inv(fb).map(|ib| flat.mul(fa, ib)) {
                return Err(mismatch("div", format!("{a} / {b}")));
            }
        }
    }
    report.pairs_checked = pairs.len() as u64;

    // irreducibility of every defining polynomial, by root scan: a degree-d
    // polynomial over K is irreducible iff it has a root of K-degree d
    let base = spec.base_modulus()?;
    let base_flat: Vec<u32> = base.iter().map(|&c| flat.from_prime(c)).collect();
    let base_irreducible = flat.roots(&base_flat).iter().any(|&r| flat.orbit_len(r, q) == base.len() - 1);
    if base_irreducible != field.base_is_irreducible() {
        return Err(mismatch("irreducibility", format!("base modulus {base:?}")));
    }
    report.irreducibility_checked += 1;
    for k in 2..=n {
        let v = oracle.v(oracle.generator(k - 1));
        let step = [flat.neg(v), 1, 1];
        let sub = oracle.level_size(k - 1);
        let irreducible = flat.roots(&step).iter().any(|&r| flat.orbit_len(r, sub) == 2);
        let delta = field.add(&field.one(k - 1), &field.scale(&field.eval_poly(&spec.v_coeffs, &field.generator(k - 1)), 4));
        let main = !residues::is_square_or_zero(field, &delta)?;
        if irreducible != main {
            return Err(mismatch("irreducibility", format!("step polynomial of level {k}")));
        }
        report.irreducibility_checked += 1;
    }

    // orders
    let group = factor_group_order(q, n, spec.is_char2(), None);
    let mut probes: Vec<FieldElement> = vec![field.generator(n), field.one(n)];
    if !spec.is_char2() {
        probes.push(field.add(&field.one(n), &field.scale(&field.eval_poly(&spec.v_coeffs, &field.generator(n)), 4)));
    }
    probes.extend((0..SAMPLED_ORDERS).map(|_| field.random_nonzero(n, &mut rng)));
    for a in probes.iter().filter(|a| !a.is_zero()) {
        let brute = brute_order(flat, oracle.embed(a))?;
        let main = multiplicative_order(field, a, &group)?;
        if main.order != brute.into() {
            return Err(mismatch("multiplicative_order", format!("{a}: brute force {brute}, main {}", main.order)));
        }
        report.orders_checked += 1;
    }

    // residue classes of every element
    let squares = power_set(flat, 2);
    let cubes = ((size - 1) % 3 == 0).then(|| power_set(flat, 3));
    for (a, &im) in elements.iter().zip(&images) {
        if squares.contains(&im) != residues::is_square_or_zero(field, a)? {
            return Err(mismatch("is_square_or_zero", a.to_string()));
        }
        if let Some(cubes) = &cubes {
            let main = a.is_zero() || residues::is_nth_residue(field, a, 3)?;
            if cubes.contains(&im) != main {
                return Err(mismatch("is_nth_residue(3)", a.to_string()));
            }
        }
        report.residues_checked += 1;
    }

    // relative norms as products of Frobenius conjugates
    let mut norm_probes = vec![field.generator(n)];
    norm_probes.extend((0..8).map(|_| field.random_nonzero(n, &mut rng)));
    for a in &norm_probes {
        for j in 1..=n {
            let sub = oracle.level_size(n - j);
            let fa = oracle.embed(a);
            let mut conj = fa;
            let mut prod = fa;
            loop {
                conj = flat.pow(conj, sub);
                if conj == fa {
                    break;
                }
                prod = flat.mul(prod, conj);
            }
            // repeated conjugates when a lies in an intermediate field
            let orbit = flat.orbit_len(fa, sub) as u64;
            let relative_degree = (oracle.dim(n) / oracle.dim(n - j)) as u64;
            let expected = flat.pow(prod, relative_degree / orbit);
            let main = field.norm(a, j)?;
            if oracle.embed(&main) != expected {
                return Err(mismatch("norm", format!("N_{{{n},{j}}}({a})")));
            }
            report.norms_checked += 1;
        }
    }

    if spec.is_char2() {
        even_seed_checks(spec, field, &oracle)?;
    }
    report.census = Some(residue_census(flat));
    Ok(report)
}

// Level-1 facts for q = 2: x_1 is a non-cube, the roots of y^2 + v(x_1) y + 1
// lie in the field and are non-cubes, and y^3 + y + v(x_1) has no root.
fn even_seed_checks(spec: &TowerSpec, field: &TowerField, oracle: &Oracle) -> Result<()> {
    let flat = oracle.flat();
    let cubes = power_set(flat, 3);
    let x = field.generator(1);
    let fx = oracle.generator(1);
    if cubes.contains(&fx) != residues::is_nth_residue(field, &x, 3)? {
        return Err(mismatch("is_nth_residue(3)", "x_1".into()));
    }
    let c = field.eval_poly(&spec.v_coeffs, &x);
    let fc = oracle.v(fx);
    if oracle.embed(&c) != fc {
        return Err(mismatch("eval_poly", "v(x_1)".into()));
    }
    let scanned = flat.roots(&[1, fc, 1]);
    let main = residues::solve_quadratic_char2(field, &c, &field.one(1))?;
    let main_images: Option<Vec<u32>> = main.as_ref().map(|(a, b)| {
        let mut v = vec![oracle.embed(a), oracle.embed(b)];
        v.sort_unstable();
        v.dedup();
        v
    });
    if main_images.as_deref().unwrap_or(&[]) != scanned.as_slice() {
        return Err(mismatch("solve_quadratic_char2", format!("roots {scanned:?} vs {main_images:?}")));
    }
    if residues::resolvent_splits(field, &c)? != !scanned.is_empty() {
        return Err(mismatch("resolvent_splits", "y^2 + v(x_1) y + 1".into()));
    }
    for e in main.iter().flat_map(|(a, b)| [a, b]) {
        if cubes.contains(&oracle.embed(e)) != residues::is_nth_residue(field, e, 3)? {
            return Err(mismatch("is_nth_residue(3)", format!("resolvent root {e}")));
        }
    }
    let cubic_roots = flat.roots(&[fc, 1, 0, 1]);
    let (one, zero) = (field.one(1), field.zero(1));
    if residues::cubic_has_root(field, [&c, &one, &zero])? != !cubic_roots.is_empty() {
        return Err(mismatch("cubic_has_root", "y^3 + y + v(x_1)".into()));
    }
    Ok(())
}
