use rayon::prelude::*;

use super::factor::Factorizer;
use super::order::{multiplicative_order, OrderKind, OrderResult};
use crate::error::Result;
use crate::towers::TowerState;

/// Orders of `x_n` (and optionally `delta_n`) at one level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderRow {
    pub n: usize,
    pub x: OrderResult,
    pub delta: Option<OrderResult>,
}

impl OrderRow {
    /// Exact only when every reported order is exact.
    pub fn kind(&self) -> OrderKind {
        let exact = self.x.is_exact() && self.delta.as_ref().map_or(true, |d| d.is_exact());
        if exact {
            OrderKind::Exact
        } else {
            OrderKind::Divisor
        }
    }
}

/// Computes order rows for levels `1..=levels` of a built tower. Levels are
/// processed in parallel; the rows come back in level order.
pub fn order_rows(tower: &TowerState, levels: usize, with_delta: bool, factorizer: &Factorizer) -> Result<Vec<OrderRow>> {
    let q = tower.spec().q;
    let char2 = tower.is_char2();
    (1..=levels)
        .into_par_iter()
        .map(|n| {
            let group = factorizer.group_order(q, n, char2);
            let field = tower.field();
            let x = multiplicative_order(field, tower.x(n)?, &group)?;
            let delta = match (with_delta, tower.level(n)?.delta.as_ref()) {
                (true, Some(d)) => Some(multiplicative_order(field, d, &group)?),
                _ => None,
            };
            Ok(OrderRow { n, x, delta })
        })
        .collect()
}
