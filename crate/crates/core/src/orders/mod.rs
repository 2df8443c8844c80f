//! Group-order factorization, exact multiplicative orders and order bounds.

pub mod bounds;
pub mod factor;
pub mod order;
pub mod primality;
pub mod table;

pub use bounds::{
    paper_lower_bound, paper_lower_bound_log2, table_lower_bound_log2, two_adic_valuation_check, verify_lemma21,
    SumCheckReport,
};
pub use factor::{factor_group_order, FactorConfig, FactoredInteger, Factorizer, HintSet};
pub use order::{format_log2, log2_big, multiplicative_order, OrderKind, OrderResult};
pub use table::{order_rows, OrderRow};
