use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use super::factor::FactoredInteger;
use crate::error::{Error, Result};
use crate::ff::{FieldElement, TowerField};

/// Whether an order is known exactly or only a certified divisor of it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderKind {
    Exact,
    Divisor,
}

impl OrderKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OrderKind::Exact => "exact",
            OrderKind::Divisor => "divisor",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderResult {
    pub kind: OrderKind,
    /// The exact order, or a divisor of it for [`OrderKind::Divisor`].
    pub order: BigUint,
    /// `log2(order)` with one decimal.
    pub log2_order: String,
    /// Unfactored part of the group order that may still divide the true
    /// order (1 for exact results).
    pub cofactor: BigUint,
}

impl OrderResult {
    pub fn is_exact(&self) -> bool {
        self.kind == OrderKind::Exact
    }
}

/// `log2(n)` as an f64, accurate for integers of any size.
pub fn log2_big(n: &BigUint) -> f64 {
    assert!(!n.is_zero(), "log2 of zero");
    let bits = n.bits();
    if bits <= 64 {
        return (n.to_u64().unwrap() as f64).log2();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_u64().unwrap();
    (top as f64).log2() + shift as f64
}

/// `log2(n)` rounded half-up to one decimal.
pub fn format_log2(n: &BigUint) -> String {
    let x = log2_big(n);
    let tenths = (x * 10.0 + 0.5).floor();
    format!("{:.1}", tenths / 10.0)
}

/// Multiplicative order of `a` in the group of nonzero elements of its level.
///
/// `group` must factor `|K_level^*|`. With a complete factorization the result
/// is exact; otherwise the order's part over the known primes is returned as a
/// certified divisor, unless `a^(t/cofactor) = 1` shows the cofactor is
/// irrelevant, in which case the result is still exact.
pub fn multiplicative_order(field: &TowerField, a: &FieldElement, group: &FactoredInteger) -> Result<OrderResult> {
    field.check(a)?;
    if a.is_zero() {
        return Err(Error::ZeroElement);
    }
    let level = a.level();
    let expected = field.group_order(level);
    if group.value != expected || !group.is_consistent() {
        return Err(Error::GroupMismatch(format!(
            "group order {} does not match |K_{level}^*| = {expected}",
            group.value
        )));
    }
    if !field.pow(a, &group.value).is_one() {
        return Err(Error::GroupMismatch(format!("a^{} != 1 at level {level}", group.value)));
    }
    let mut t = group.value.clone();
    let mut cofactor = group.cofactor.clone();
    if !cofactor.is_one() && field.pow(a, &(&t / &cofactor)).is_one() {
        t /= &cofactor;
        cofactor = BigUint::one();
    }
    let mut order = BigUint::one();
    for (p, &e) in &group.factors {
        let pe = p.pow(e);
        let mut y = field.pow(a, &(&t / &pe));
        while !y.is_one() {
            y = field.pow(&y, p);
            order *= p;
        }
    }
    let kind = if cofactor.is_one() { OrderKind::Exact } else { OrderKind::Divisor };
    Ok(OrderResult { kind, log2_order: format_log2(&order), order, cofactor })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orders::factor::factor_group_order;
    use crate::towers::{Family, TowerSpec, TowerState};

    fn tower(q: u64, family: Family, levels: usize) -> TowerState {
        TowerState::build(TowerSpec::with_reference_seed(q, family).unwrap(), levels).unwrap()
    }

    #[test]
    fn log2_rounding() {
        assert_eq!(format_log2(&BigUint::from(8u32)), "3.0");
        assert_eq!(format_log2(&BigUint::from(80u32)), "6.3");
        assert_eq!(format_log2(&BigUint::from(63u32)), "6.0");
        assert_eq!(format_log2(&BigUint::from(24u32)), "4.6");
        assert_eq!(format_log2(&BigUint::from(1u32)), "0.0");
        assert_eq!(format_log2(&BigUint::from(45u32)), "5.5");
        let big = BigUint::from(3u32).pow(32) - 1u32;
        assert_eq!(format_log2(&big), "50.7");
        assert_eq!(format_log2(&(BigUint::one() << 161u32)), "161.0");
    }

    #[test]
    fn first_family_generators_are_primitive() {
        let t = tower(3, Family::F1, 3);
        for n in 1..=3 {
            let g = factor_group_order(3, n, false, None);
            let r = multiplicative_order(t.field(), t.x(n).unwrap(), &g).unwrap();
            assert!(r.is_exact());
            assert_eq!(r.order, g.value);
        }
        let g = factor_group_order(3, 1, false, None);
        let r = multiplicative_order(t.field(), t.x(1).unwrap(), &g).unwrap();
        assert_eq!((r.order.to_u64().unwrap(), r.log2_order.as_str()), (8, "3.0"));
    }

    #[test]
    fn one_has_order_one() {
        let t = tower(5, Family::F1, 2);
        let g = factor_group_order(5, 2, false, None);
        let r = multiplicative_order(t.field(), &t.field().one(2), &g).unwrap();
        assert_eq!(r.order, BigUint::one());
        assert!(r.is_exact());
    }

    #[test]
    fn third_family_discriminant() {
        let t = tower(3, Family::F3, 2);
        let g = factor_group_order(3, 2, false, None);
        let r = multiplicative_order(t.field(), t.delta(2).unwrap(), &g).unwrap();
        assert_eq!((r.order.to_u64().unwrap(), r.log2_order.as_str()), (16, "4.0"));
    }

    #[test]
    fn rejects_bad_inputs() {
        let t = tower(3, Family::F1, 2);
        let f = t.field();
        let g1 = factor_group_order(3, 1, false, None);
        assert!(matches!(multiplicative_order(f, t.x(2).unwrap(), &g1), Err(Error::GroupMismatch(_))));
        let g2 = factor_group_order(3, 2, false, None);
        assert_eq!(multiplicative_order(f, &f.zero(2), &g2).unwrap_err(), Error::ZeroElement);
    }

    #[test]
    fn partial_factorization_gives_divisor_or_exact() {
        let t = tower(3, Family::F1, 3);
        let f = t.field();
        // pretend 41 | 3^8 - 1 = 2^5 * 5 * 41 was not split off
        let mut g = factor_group_order(3, 3, false, None);
        g.factors.remove(&BigUint::from(41u32));
        g.cofactor = BigUint::from(41u32);
        let r = multiplicative_order(f, t.x(3).unwrap(), &g).unwrap();
        assert_eq!(r.kind, OrderKind::Divisor);
        assert_eq!(r.order, BigUint::from(160u32));
        // x_1 lives in the subgroup of order 8, so the cofactor drops out
        let x1 = f.lift(t.x(1).unwrap(), 3).unwrap();
        let r = multiplicative_order(f, &x1, &g).unwrap();
        assert!(r.is_exact());
        assert_eq!(r.order, BigUint::from(8u32));
    }

    #[test]
    fn exact_orders_are_minimal() {
        let t = tower(7, Family::F2, 3);
        let f = t.field();
        for n in 1..=3 {
            let g = factor_group_order(7, n, false, None);
            for a in [t.x(n).unwrap(), t.delta(n).unwrap()] {
                let r = multiplicative_order(f, a, &g).unwrap();
                assert!(f.pow(a, &r.order).is_one());
                for p in g.factors.keys() {
                    if (&r.order % p).is_zero() {
                        assert!(!f.pow(a, &(&r.order / p)).is_one());
                    }
                }
            }
        }
    }
}
