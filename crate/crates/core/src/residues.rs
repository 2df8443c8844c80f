//! Residue and root-solvability tests: Euler's criterion, r-th power residues
//! and roots, quadratics and cubics in characteristic two, and the quadratic
//! resolvent of the cubic tower step.

use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::ff::{FieldElement, TowerField};

/// Whether `a` is an `p`-th power in its level's field: `a^((Q-1)/p) = 1`.
pub fn is_nth_residue(field: &TowerField, a: &FieldElement, p: u64) -> Result<bool> {
    field.check(a)?;
    if a.is_zero() {
        return Err(Error::ZeroElement);
    }
    let order = field.group_order(a.level());
    if p == 0 || !(&order % p).is_zero() {
        return Err(Error::ExponentNotDividing { p });
    }
    Ok(field.pow(a, &(order / p)).is_one())
}

/// `a^((Q-1)/2)`, which is `1` on non-zero squares and `-1` otherwise (odd q).
pub fn euler_symbol(field: &TowerField, a: &FieldElement) -> Result<FieldElement> {
    field.check(a)?;
    let order = field.group_order(a.level());
    Ok(field.pow(a, &(order >> 1u32)))
}

/// Square test where zero counts as a square.
pub fn is_square_or_zero(field: &TowerField, a: &FieldElement) -> Result<bool> {
    if a.is_zero() {
        return Ok(true);
    }
    if field.characteristic() == 2 {
        return Ok(true);
    }
    is_nth_residue(field, a, 2)
}

/// An `r`-th root of `a` for a prime `r` dividing `Q - 1`, if one exists.
///
/// Tonelli-Shanks style: `a^k` is corrected by an element of the
/// `r`-Sylow subgroup whose discrete logarithm is found digit by digit.
pub fn nth_root(field: &TowerField, a: &FieldElement, r: u64) -> Result<Option<FieldElement>> {
    field.check(a)?;
    let level = a.level();
    if a.is_zero() {
        return Ok(Some(a.clone()));
    }
    let order = field.group_order(level);
    if r < 2 || !(&order % r).is_zero() {
        return Err(Error::ExponentNotDividing { p: r });
    }
    if !field.pow(a, &(&order / r)).is_one() {
        return Ok(None);
    }
    // Q - 1 = r^s t with r not dividing t
    let mut s = 0u32;
    let mut t = order.clone();
    while (&t % r).is_zero() {
        t /= r;
        s += 1;
    }
    let z = field.pow(&sylow_non_residue(field, level, r, &order), &t);
    // k with r k = 1 mod t
    let k = if t == BigUint::from(1u32) {
        BigUint::zero()
    } else {
        BigUint::from(r).modinv(&t).expect("r is coprime to t")
    };
    let x0 = field.pow(a, &k);
    // b = x0^r / a lies in the Sylow subgroup generated by z
    let b = field.div(&field.pow_u64(&x0, r), a)?;
    let log = sylow_log(field, &z, &b, r, s);
    debug_assert!((&log % r).is_zero());
    let r_s = BigUint::from(r).pow(s);
    let correction = (&r_s - (&log / r) % &r_s) % &r_s;
    let x = field.mul(&x0, &field.pow(&z, &correction));
    debug_assert_eq!(field.pow_u64(&x, r), *a);
    Ok(Some(x))
}

// Smallest element in coordinate order that is not an r-th power.
fn sylow_non_residue(field: &TowerField, level: usize, r: u64, order: &BigUint) -> FieldElement {
    let e = order / r;
    let q = field.characteristic();
    let dim = field.dim(level);
    let mut idx: u64 = 1;
    loop {
        let mut coeffs = vec![0u64; dim];
        let mut m = idx;
        for c in coeffs.iter_mut() {
            if m == 0 {
                break;
            }
            *c = m % q;
            m /= q;
        }
        let g = field.element(level, &coeffs).expect("well-formed");
        if !field.pow(&g, &e).is_one() {
            return g;
        }
        idx += 1;
    }
}

// Discrete log of b to base z in the cyclic group of order r^s.
fn sylow_log(field: &TowerField, z: &FieldElement, b: &FieldElement, r: u64, s: u32) -> BigUint {
    let level = z.level();
    let r_big = BigUint::from(r);
    let gamma = field.pow(z, &r_big.pow(s.saturating_sub(1)));
    let digits: Vec<FieldElement> = {
        let mut v = Vec::with_capacity(r as usize);
        let mut cur = field.one(level);
        for _ in 0..r {
            v.push(cur.clone());
            cur = field.mul(&cur, &gamma);
        }
        v
    };
    let z_inv = field.inv(z).expect("generator is non-zero");
    let mut log = BigUint::zero();
    let mut rest = b.clone();
    for k in 0..s {
        let h = field.pow(&rest, &r_big.pow(s - 1 - k));
        let d = digits.iter().position(|g| *g == h).expect("element of the Sylow subgroup") as u64;
        if d != 0 {
            let step = r_big.pow(k) * d;
            rest = field.mul(&rest, &field.pow(&z_inv, &step));
            log += step;
        }
    }
    log
}

fn require_char2(field: &TowerField) -> Result<()> {
    if field.characteristic() != 2 {
        return Err(Error::Unsupported {
            expected: "characteristic 2",
            found: format!("characteristic {}", field.characteristic()),
        });
    }
    Ok(())
}

/// Roots of `y^2 + c y + d` in characteristic two, at the higher of the two levels.
///
/// Returns `None` when the absolute trace of `d / c^2` is one. For `c = 0` the
/// unique (double) root `d^(2^(m-1))` is returned twice.
pub fn solve_quadratic_char2(
    field: &TowerField,
    c: &FieldElement,
    d: &FieldElement,
) -> Result<Option<(FieldElement, FieldElement)>> {
    require_char2(field)?;
    field.check(c)?;
    field.check(d)?;
    let level = c.level().max(d.level());
    let c = field.lift(c, level)?;
    let d = field.lift(d, level)?;
    let m = field.dim(level);
    if c.is_zero() {
        let mut r = d.clone();
        for _ in 1..m {
            r = field.square(&r);
        }
        return Ok(Some((r.clone(), r)));
    }
    let beta = field.div(&d, &field.square(&c))?;
    if field.abs_trace_char2(&beta)? {
        return Ok(None);
    }
    // Solve z^2 + z = beta with a trace-one tau:
    // z = sum_{i<m} (sum_{j<i} tau^(2^j)) beta^(2^i)
    let tau = trace_one_element(field, level)?;
    let mut z = field.zero(level);
    let mut tau_partial = field.zero(level);
    let mut tau_pow = tau;
    let mut beta_pow = beta;
    for _ in 0..m {
        z = field.add(&z, &field.mul(&tau_partial, &beta_pow));
        tau_partial = field.add(&tau_partial, &tau_pow);
        tau_pow = field.square(&tau_pow);
        beta_pow = field.square(&beta_pow);
    }
    let r1 = field.mul(&c, &z);
    let r2 = field.add(&r1, &c);
    debug_assert!(field.add(&field.mul(&r1, &field.add(&r1, &c)), &d).is_zero());
    Ok(Some((r1, r2)))
}

fn trace_one_element(field: &TowerField, level: usize) -> Result<FieldElement> {
    let dim = field.dim(level);
    for i in 0..dim {
        let mut coeffs = vec![0u64; dim];
        coeffs[i] = 1;
        let e = field.element(level, &coeffs)?;
        if field.abs_trace_char2(&e)? {
            return Ok(e);
        }
    }
    unreachable!("the trace is a non-zero linear form")
}

/// Whether the quadratic resolvent `y^2 + c y + c^2 + 1`, `c = x^(2^e)`, of the
/// cubic `y^3 + y + c` has a root at `x`'s level, i.e. whether the cubic step
/// over that level is normal (Galois group of order three).
pub fn resolvent_reducible(field: &TowerField, x_prev: &FieldElement, e: u32) -> Result<bool> {
    require_char2(field)?;
    field.check(x_prev)?;
    if x_prev.is_zero() {
        return Err(Error::ZeroElement);
    }
    let mut c = x_prev.clone();
    for _ in 0..e {
        c = field.square(&c);
    }
    resolvent_splits(field, &c)
}

/// Whether `y^2 + c y + c^2 + 1`, the quadratic resolvent of `y^3 + y + c` in
/// characteristic two, has a root at `c`'s level.
pub fn resolvent_splits(field: &TowerField, c: &FieldElement) -> Result<bool> {
    require_char2(field)?;
    field.check(c)?;
    let d = field.add(&field.square(c), &field.one(c.level()));
    Ok(solve_quadratic_char2(field, c, &d)?.is_some())
}

/// A root of `y^3 + y + t` at `t`'s level via `y = u + 1/u`, where `u^3` is a
/// root of `w^2 + t w + 1`.
///
/// `Ok(None)` means the auxiliary quadratic or cube root is not solvable at
/// `t`'s level: the root, if any, lies in a higher extension.
pub fn cardano_cubic_char2(field: &TowerField, t: &FieldElement) -> Result<Option<FieldElement>> {
    require_char2(field)?;
    field.check(t)?;
    if t.is_zero() {
        return Err(Error::ZeroElement);
    }
    let level = t.level();
    let one = field.one(level);
    let Some((w, _)) = solve_quadratic_char2(field, t, &one)? else {
        return Ok(None);
    };
    let u = if (field.group_order(level) % 3u32).is_zero() {
        match nth_root(field, &w, 3)? {
            Some(u) => u,
            None => return Ok(None),
        }
    } else {
        // cubing is a bijection; its inverse is a power map
        let order = field.group_order(level);
        let k = BigUint::from(3u32).modinv(&order).expect("3 is a unit");
        field.pow(&w, &k)
    };
    let y = field.add(&u, &field.inv(&u)?);
    debug_assert!(field.add(&field.add(&field.pow_u64(&y, 3), &y), t).is_zero());
    Ok(Some(y))
}

/// Whether the monic cubic `y^3 + a2 y^2 + a1 y + a0` over the level of its
/// coefficients has a root there, through `gcd(f, y^Q - y)` with `Q` the size
/// of that level.
pub fn cubic_has_root(field: &TowerField, coeffs: [&FieldElement; 3]) -> Result<bool> {
    let level = coeffs.iter().map(|c| c.level()).max().unwrap();
    let f: Vec<FieldElement> = coeffs
        .iter()
        .map(|c| field.lift(c, level))
        .chain(std::iter::once(Ok(field.one(level))))
        .collect::<Result<_>>()?;
    // y^Q mod f, by raising y to the q-th power dim times
    let q = field.characteristic();
    let mut acc = vec![field.zero(level), field.one(level), field.zero(level)];
    for _ in 0..field.dim(level) {
        acc = poly_pow_mod(field, &acc, q, &f);
    }
    acc[1] = field.sub(&acc[1], &field.one(level));
    let g = poly_gcd(field, f, acc)?;
    Ok(g.len() > 1)
}

fn poly_trim(p: &mut Vec<FieldElement>) {
    while p.last().is_some_and(FieldElement::is_zero) {
        p.pop();
    }
}

fn poly_mul_mod(field: &TowerField, a: &[FieldElement], b: &[FieldElement], f: &[FieldElement]) -> Vec<FieldElement> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut prod = vec![field.zero(f[0].level()); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            prod[i + j] = field.add(&prod[i + j], &field.mul(x, y));
        }
    }
    poly_rem(field, prod, f)
}

fn poly_rem(field: &TowerField, mut a: Vec<FieldElement>, f: &[FieldElement]) -> Vec<FieldElement> {
    let df = f.len() - 1;
    let lead_inv = field.inv(&f[df]).expect("non-zero leading coefficient");
    poly_trim(&mut a);
    while a.len() > df {
        let top = a.len() - 1;
        let c = field.mul(&a[top], &lead_inv);
        for i in 0..=df {
            a[top - df + i] = field.sub(&a[top - df + i], &field.mul(&c, &f[i]));
        }
        poly_trim(&mut a);
    }
    a
}

fn poly_pow_mod(field: &TowerField, a: &[FieldElement], mut k: u64, f: &[FieldElement]) -> Vec<FieldElement> {
    let mut result = vec![field.one(f[0].level())];
    let mut base = a.to_vec();
    while k > 0 {
        if k & 1 == 1 {
            result = poly_mul_mod(field, &result, &base, f);
        }
        k >>= 1;
        if k > 0 {
            base = poly_mul_mod(field, &base, &base, f);
        }
    }
    result.resize(f.len() - 1, field.zero(f[0].level()));
    result
}

fn poly_gcd(field: &TowerField, a: Vec<FieldElement>, b: Vec<FieldElement>) -> Result<Vec<FieldElement>> {
    let mut x = a;
    let mut y = b;
    poly_trim(&mut x);
    poly_trim(&mut y);
    while !y.is_empty() {
        let r = poly_rem(field, x, &y);
        x = y;
        y = r;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::PrimeField;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gf9() -> TowerField {
        TowerField::new(PrimeField::new(3).unwrap(), &[2, 2, 1]).unwrap()
    }

    fn gf64() -> TowerField {
        TowerField::new(PrimeField::new(2).unwrap(), &[1, 0, 1, 1, 0, 1, 1]).unwrap()
    }

    fn all(field: &TowerField, level: usize) -> Vec<FieldElement> {
        let q = field.characteristic();
        let dim = field.dim(level);
        let total = q.pow(dim as u32);
        (0..total)
            .map(|mut i| {
                let c: Vec<u64> = (0..dim)
                    .map(|_| {
                        let r = i % q;
                        i /= q;
                        r
                    })
                    .collect();
                field.element(level, &c).unwrap()
            })
            .collect()
    }

    #[test]
    fn squares_in_gf9() {
        let f = gf9();
        let squares: Vec<_> = all(&f, 1).iter().map(|w| f.square(w)).collect();
        for a in all(&f, 1).into_iter().filter(|a| !a.is_zero()) {
            assert_eq!(is_nth_residue(&f, &a, 2).unwrap(), squares.contains(&a));
        }
        assert!(!is_nth_residue(&f, &f.generator(1), 2).unwrap());
        assert_eq!(is_nth_residue(&f, &f.zero(1), 2), Err(Error::ZeroElement));
        assert_eq!(is_nth_residue(&f, &f.one(1), 3), Err(Error::ExponentNotDividing { p: 3 }));
        // -1 is a square in every field of square order
        assert!(is_nth_residue(&f, &f.from_prime(1, 2), 2).unwrap());
    }

    #[test]
    fn seed_is_not_a_cube() {
        let f = gf64();
        assert!(!is_nth_residue(&f, &f.generator(1), 3).unwrap());
        let cubes: std::collections::HashSet<_> = all(&f, 1).iter().map(|w| f.pow_u64(w, 3)).collect();
        for a in all(&f, 1).into_iter().filter(|a| !a.is_zero()) {
            assert_eq!(is_nth_residue(&f, &a, 3).unwrap(), cubes.contains(&a));
            assert_eq!(is_nth_residue(&f, &a, 7).unwrap(), f.pow_u64(&a, 9).is_one());
        }
    }

    #[test]
    fn roots_where_they_exist() {
        for (f, rs) in [(gf9(), vec![2u64]), (gf64(), vec![3, 7])] {
            for a in all(&f, 1) {
                for &r in &rs {
                    match nth_root(&f, &a, r).unwrap() {
                        Some(x) => assert_eq!(f.pow_u64(&x, r), a),
                        None => assert!(!is_nth_residue(&f, &a, r).unwrap()),
                    }
                }
            }
        }
    }

    #[test]
    fn quadratic_char2_small_cases() {
        let f = gf64();
        let (one, zero) = (f.one(1), f.zero(1));
        let (r1, r2) = solve_quadratic_char2(&f, &one, &zero).unwrap().unwrap();
        let mut roots = [r1, r2];
        roots.sort_by_key(|r| r.coeffs().to_vec());
        assert_eq!(roots, [zero.clone(), one.clone()]);
        let x = f.generator(1);
        let d = f.add(&f.square(&x), &one);
        assert!(solve_quadratic_char2(&f, &x, &d).unwrap().is_some());
        // c = 0: square root
        let (s, s2) = solve_quadratic_char2(&f, &zero, &x).unwrap().unwrap();
        assert_eq!(s, s2);
        assert_eq!(f.square(&s), x);
    }

    #[test]
    fn quadratic_char2_matches_root_scan() {
        let f = gf64();
        let elems = all(&f, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let c = f.random_nonzero(1, &mut rng);
            let d = f.random(1, &mut rng);
            let scan: Vec<_> = elems
                .iter()
                .filter(|y| f.add(&f.mul(y, &f.add(y, &c)), &d).is_zero())
                .cloned()
                .collect();
            match solve_quadratic_char2(&f, &c, &d).unwrap() {
                Some((r1, r2)) => {
                    assert_eq!(f.add(&r1, &r2), c);
                    assert_eq!(f.mul(&r1, &r2), d);
                    assert!(scan.contains(&r1) && scan.contains(&r2));
                }
                None => assert!(scan.is_empty()),
            }
        }
    }

    #[test]
    fn resolvent_of_seed_splits() {
        let f = gf64();
        let x = f.generator(1);
        for e in 0..8 {
            assert!(resolvent_reducible(&f, &x, e).unwrap(), "e = {e}");
        }
        // scan: y^2 + x y + x^2 + 1
        let c = f.add(&f.square(&x), &f.one(1));
        assert!(all(&f, 1).iter().any(|y| f.add(&f.mul(y, &f.add(y, &x)), &c).is_zero()));
        assert_eq!(resolvent_reducible(&f, &f.zero(1), 0), Err(Error::ZeroElement));
    }

    #[test]
    fn cardano_agrees_with_root_scan() {
        let f = gf64();
        let elems = all(&f, 1);
        let cubic = |y: &FieldElement, t: &FieldElement| f.add(&f.add(&f.pow_u64(y, 3), y), t);
        for t in elems.iter().filter(|t| !t.is_zero()) {
            let has_root = elems.iter().any(|y| cubic(y, t).is_zero());
            assert_eq!(cubic_has_root(&f, [t, &f.one(1), &f.zero(1)]).unwrap(), has_root);
            if let Some(y) = cardano_cubic_char2(&f, t).unwrap() {
                assert!(cubic(&y, t).is_zero());
            }
        }
        let x = f.generator(1);
        assert_eq!(cardano_cubic_char2(&f, &x).unwrap(), None);
        assert!(!cubic_has_root(&f, [&x, &f.one(1), &f.zero(1)]).unwrap());
        let one = f.one(1);
        assert_eq!(elems.iter().filter(|y| cubic(y, &one).is_zero()).count(), 3);
        let y = cardano_cubic_char2(&f, &one).unwrap().unwrap();
        assert!(cubic(&y, &one).is_zero());
    }

    #[test]
    fn odd_fields_reject_char2_operations() {
        let f = gf9();
        assert!(solve_quadratic_char2(&f, &f.one(1), &f.one(1)).is_err());
        assert!(resolvent_reducible(&f, &f.one(1), 0).is_err());
    }

    proptest! {
        #[test]
        fn euler_duality(c0 in 0u64..7, c1 in 0u64..7) {
            let f = TowerField::new(PrimeField::new(7).unwrap(), &[3, 6, 1]).unwrap();
            prop_assume!(c0 != 0 || c1 != 0);
            let a = f.element(1, &[c0, c1]).unwrap();
            let sym = euler_symbol(&f, &a).unwrap();
            let res = is_nth_residue(&f, &a, 2).unwrap();
            prop_assert_eq!(!res, sym == f.from_prime(1, 6));
            let sq = f.square(&a);
            prop_assert!(is_nth_residue(&f, &sq, 2).unwrap());
        }

        #[test]
        fn quadratic_roots_sum_and_multiply(seed: u64) {
            let f = gf64();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = f.random_nonzero(1, &mut rng);
            let d = f.random(1, &mut rng);
            if let Some((r1, r2)) = solve_quadratic_char2(&f, &c, &d).unwrap() {
                prop_assert_eq!(f.add(&r1, &r2), c);
                prop_assert_eq!(f.mul(&r1, &r2), d);
            }
        }

        #[test]
        fn cardano_result_is_a_root(seed: u64) {
            let f = gf64();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            // plant a root: t = y^3 + y
            let y0 = f.random_nonzero(1, &mut rng);
            let t = f.add(&f.pow_u64(&y0, 3), &y0);
            prop_assume!(!t.is_zero());
            if let Some(y) = cardano_cubic_char2(&f, &t).unwrap() {
                prop_assert!(f.add(&f.add(&f.pow_u64(&y, 3), &y), &t).is_zero());
            }
        }
    }
}
