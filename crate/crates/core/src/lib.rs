//! Recursive finite-field towers with elements of high multiplicative order.
//!
//! The crate builds towers GF(q) ⊂ K_1 ⊂ K_2 ⊂ ... where each step is
//! `x_n^2 + x_n = v(x_{n-1})` (odd q) or `x_n^3 + x_n + x_{n-1}^(2^e) = 0`
//! (q = 2), certifies the residue conditions that make every step
//! irreducible, and computes multiplicative orders of the generators and
//! discriminants by factoring the group order along its algebraic chain.

pub mod error;
pub mod ff;
pub mod oracle;
pub mod orders;
pub mod residues;
pub mod towers;

pub use error::{Error, Result};
pub use ff::{FieldElement, PrimeField, TowerField};
