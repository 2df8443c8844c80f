//! Prime-field and tower-field arithmetic.

mod element;
pub mod poly;
mod prime;
mod tower;

pub use element::FieldElement;
pub use prime::PrimeField;
pub use tower::{ArithOp, LevelContext, StepKind, TowerField};
