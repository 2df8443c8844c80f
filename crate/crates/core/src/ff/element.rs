use std::fmt;
use std::hash::{Hash, Hasher};

/// An element of a tower level, stored as its coordinates in the tower basis.
///
/// A level-`n` element is the concatenation of `step_degree(n)` blocks, each a
/// level-`n-1` coordinate vector; block `i` multiplies `x_n^i`. The level-1
/// coordinates are the polynomial coefficients over the base modulus. Because
/// lower levels are prefixes, equality and hashing ignore trailing zeros, so an
/// element compares equal to its demotion.
#[derive(Clone)]
pub struct FieldElement {
    pub(crate) level: usize,
    pub(crate) coeffs: Vec<u64>,
}

impl FieldElement {
    /// The level this element is declared at (not necessarily the lowest it lives in).
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0] == 1 && self.coeffs[1..].iter().all(|&c| c == 0)
    }

    /// Number of coordinates up to and including the last non-zero one.
    pub(crate) fn significant_len(&self) -> usize {
        self.coeffs.iter().rposition(|&c| c != 0).map_or(0, |i| i + 1)
    }
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        let (short, long) = if self.coeffs.len() <= other.coeffs.len() {
            (&self.coeffs, &other.coeffs)
        } else {
            (&other.coeffs, &self.coeffs)
        };
        short[..] == long[..short.len()] && long[short.len()..].iter().all(|&c| c == 0)
    }
}

impl Eq for FieldElement {}

impl Hash for FieldElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.coeffs[..self.significant_len()].hash(state);
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L{}{:?}", self.level, self.coeffs)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list: Vec<String> = self.coeffs.iter().map(u64::to_string).collect();
        write!(f, "[{}]", list.join(","))
    }
}
