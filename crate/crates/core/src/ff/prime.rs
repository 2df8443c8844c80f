//! The prime field GF(q) with word-sized residues.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orders::primality;

/// GF(q) for a prime q < 2^63.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrimeField {
    q: u64,
}

impl PrimeField {
    /// Checks primality (trial division below 2^32, strong-pseudoprime bases above).
    pub fn new(q: u64) -> Result<Self> {
        if q >= 1 << 63 {
            return Err(Error::InvalidSpec(format!("modulus {q} does not fit in 63 bits")));
        }
        let prime = if q < 1 << 32 {
            primality::is_prime_trial(q)
        } else {
            primality::is_prime_u64(q)
        };
        if !prime {
            return Err(Error::NotPrime(q.to_string()));
        }
        Ok(PrimeField { q })
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.q
    }

    #[inline]
    pub fn reduce(&self, a: u64) -> u64 {
        a % self.q
    }

    /// Reduces a signed integer into `[0, q)`.
    pub fn from_i64(&self, a: i64) -> u64 {
        a.rem_euclid(self.q as i64) as u64
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.q {
            s - self.q
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.q - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        if self.q <= u32::MAX as u64 {
            (a * b) % self.q
        } else {
            ((a as u128 * b as u128) % self.q as u128) as u64
        }
    }

    pub fn pow(&self, mut a: u64, mut k: u64) -> u64 {
        let mut acc = 1 % self.q;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(acc, a);
            }
            a = self.mul(a, a);
            k >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: u64) -> Result<u64> {
        if a % self.q == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(self.pow(a, self.q - 2))
    }

    /// Euler's criterion in GF(q); zero counts as a square.
    pub fn is_square(&self, a: u64) -> bool {
        if self.q == 2 || a % self.q == 0 {
            return true;
        }
        self.pow(a, (self.q - 1) / 2) == 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_composites() {
        assert!(PrimeField::new(9).is_err());
        assert!(PrimeField::new(1).is_err());
        assert!(PrimeField::new(0).is_err());
        assert!(PrimeField::new(2).is_ok());
        assert!(PrimeField::new(2_147_483_647).is_ok());
        // 2^61 - 1 is a Mersenne prime, above the trial-division range
        assert!(PrimeField::new((1 << 61) - 1).is_ok());
        assert!(PrimeField::new((1 << 61) + 1).is_err());
    }

    #[test]
    fn arithmetic_mod_seven() {
        let f = PrimeField::new(7).unwrap();
        assert_eq!(f.add(5, 4), 2);
        assert_eq!(f.sub(2, 5), 4);
        assert_eq!(f.mul(3, 5), 1);
        assert_eq!(f.inv(3).unwrap(), 5);
        assert_eq!(f.from_i64(-1), 6);
        assert!(f.is_square(2));
        assert!(!f.is_square(3));
        assert_eq!(f.inv(0), Err(Error::DivisionByZero));
    }
}
