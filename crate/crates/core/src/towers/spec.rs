use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ff::PrimeField;

/// The named tower families, plus user-supplied `v(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    F1,
    F2,
    F3,
    F4,
    F5,
    F6,
    F7,
    Custom,
}

impl Family {
    pub const ODD: [Family; 5] = [Family::F1, Family::F2, Family::F3, Family::F4, Family::F5];
    pub const EVEN: [Family; 2] = [Family::F6, Family::F7];

    pub fn is_even(self) -> bool {
        matches!(self, Family::F6 | Family::F7)
    }

    pub fn is_odd(self) -> bool {
        Family::ODD.contains(&self)
    }

    /// The exponent e of `v(x) = x^(2^e)` for the even families.
    pub fn even_exponent(self) -> Option<u32> {
        match self {
            Family::F6 => Some(0),
            Family::F7 => Some(1),
            _ => None,
        }
    }

    /// Whether the second residue condition divides by `x` (false: by `delta`).
    pub fn condition_two_over_x(self) -> Option<bool> {
        match self {
            Family::F1 | Family::F2 => Some(true),
            Family::F3 | Family::F4 | Family::F5 => Some(false),
            _ => None,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::F1 => "f1",
            Family::F2 => "f2",
            Family::F3 => "f3",
            Family::F4 => "f4",
            Family::F5 => "f5",
            Family::F6 => "f6",
            Family::F7 => "f7",
            Family::Custom => "custom",
        };
        f.write_str(s)
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "f1" => Family::F1,
            "f2" => Family::F2,
            "f3" => Family::F3,
            "f4" => Family::F4,
            "f5" => Family::F5,
            "f6" => Family::F6,
            "f7" => Family::F7,
            "custom" => Family::Custom,
            other => return Err(Error::Parse(format!("unknown family {other:?}"))),
        })
    }
}

/// One term `coeff * delta_{n-1}^i * delta_n^j` of a discriminant recurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GTerm {
    pub i: u32,
    pub j: u32,
    pub coeff: u64,
}

/// Everything needed to rebuild a tower: the prime, the step polynomial and
/// the minimal polynomial of `x_1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct TowerSpec {
    pub q: u64,
    pub family: Family,
    /// Frobenius exponent for characteristic two (`v(x) = x^(2^e)`); zero otherwise.
    pub e: u32,
    /// `v(x)` over GF(q), low degree first.
    pub v_coeffs: Vec<u64>,
    /// Odd q: `[a, b]` with `x_1^2 = a x_1 + b`. q = 2: the base modulus, low
    /// degree first, with its leading 1.
    pub init_minpoly: Vec<u64>,
    /// Discriminant recurrence `g(delta_{n-1}, delta_n) = 0`, if known.
    pub g_terms: Option<Vec<GTerm>>,
}

/// The base polynomial used for both even families.
pub const EVEN_SEED: [u64; 7] = [1, 0, 1, 1, 0, 1, 1];

fn poly_mul(fp: &PrimeField, a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = fp.add(out[i + j], fp.mul(x, y));
        }
    }
    out
}

fn trim(mut p: Vec<u64>) -> Vec<u64> {
    while p.len() > 1 && p.last() == Some(&0) {
        p.pop();
    }
    p
}

impl TowerSpec {
    /// A named family over GF(q) with the given initial polynomial.
    pub fn family(q: u64, family: Family, init_minpoly: Vec<u64>) -> Result<Self> {
        let fp = PrimeField::new(q)?;
        if family == Family::Custom {
            return Err(Error::InvalidSpec("custom towers need explicit v(x); use TowerSpec::custom".into()));
        }
        if family.is_odd() && q == 2 {
            return Err(Error::InvalidSpec(format!("family {family} requires an odd prime")));
        }
        if family.is_even() && q != 2 {
            return Err(Error::InvalidSpec(format!("family {family} requires q = 2")));
        }
        let (v_coeffs, e, g_terms) = match family.even_exponent() {
            Some(e) => {
                let mut v = vec![0u64; (1usize << e) + 1];
                v[1 << e] = 1;
                (v, e, None)
            }
            None => (family_v(&fp, family), 0, Some(family_g(&fp, family))),
        };
        let spec = TowerSpec { q, family, e, v_coeffs, init_minpoly, g_terms };
        spec.validate()?;
        Ok(spec)
    }

    /// A tower with user-supplied `v(x)` and optional recurrence.
    pub fn custom(
        q: u64,
        v_coeffs: Vec<u64>,
        e: u32,
        init_minpoly: Vec<u64>,
        g_terms: Option<Vec<GTerm>>,
    ) -> Result<Self> {
        let spec = TowerSpec { q, family: Family::Custom, e, v_coeffs, init_minpoly, g_terms };
        spec.validate()?;
        Ok(spec)
    }

    /// A named family with the initial polynomial used for the published tables.
    pub fn with_reference_seed(q: u64, family: Family) -> Result<Self> {
        let seed = reference_seed(q, family)
            .ok_or_else(|| Error::InvalidSpec(format!("no reference seed for {family} over GF({q})")))?;
        TowerSpec::family(q, family, seed)
    }

    pub fn prime(&self) -> Result<PrimeField> {
        PrimeField::new(self.q)
    }

    pub fn is_char2(&self) -> bool {
        self.q == 2
    }

    /// Monic base modulus, low degree first.
    pub fn base_modulus(&self) -> Result<Vec<u64>> {
        let fp = self.prime()?;
        if self.is_char2() {
            Ok(self.init_minpoly.clone())
        } else {
            let (a, b) = (self.init_minpoly[0], self.init_minpoly[1]);
            Ok(vec![fp.neg(b), fp.neg(a), 1])
        }
    }

    /// `4^{-1} mod q`.
    pub fn epsilon(&self) -> Result<u64> {
        let fp = self.prime()?;
        fp.inv(4 % self.q)
    }

    pub fn validate(&self) -> Result<()> {
        let fp = PrimeField::new(self.q)?;
        let q = self.q;
        if self.family.is_odd() && q == 2 {
            return Err(Error::InvalidSpec(format!("family {} requires an odd prime", self.family)));
        }
        if self.family.is_even() && q != 2 {
            return Err(Error::InvalidSpec(format!("family {} requires q = 2", self.family)));
        }
        if self.v_coeffs.is_empty() || self.v_coeffs.iter().all(|&c| c == 0) {
            return Err(Error::InvalidSpec("v(x) must be a non-zero polynomial".into()));
        }
        if self.v_coeffs.iter().chain(&self.init_minpoly).any(|&c| c >= q) {
            return Err(Error::InvalidSpec(format!("coefficients must be reduced modulo {q}")));
        }
        if q == 2 {
            if self.init_minpoly.len() < 2 || self.init_minpoly.last() != Some(&1) {
                return Err(Error::InvalidSpec(
                    "the q = 2 initial polynomial must be monic, low degree first".into(),
                ));
            }
        } else {
            if self.init_minpoly.len() != 2 {
                return Err(Error::InvalidSpec("odd initial polynomial must be [a, b] for x^2 = a x + b".into()));
            }
            let eps = fp.inv(4 % q)?;
            debug_assert_eq!(fp.mul(eps, 4 % q), 1);
        }
        if let Some(g) = &self.g_terms {
            if g.iter().any(|t| t.coeff >= q) {
                return Err(Error::InvalidSpec("recurrence coefficients must be reduced".into()));
            }
        }
        Ok(())
    }
}

/// `v(x)` of the odd families, computed with `eps = 4^{-1}` in GF(q).
pub fn family_v(fp: &PrimeField, family: Family) -> Vec<u64> {
    let eps = fp.inv(4 % fp.modulus()).expect("odd prime");
    let c = |k: i64| fp.from_i64(k);
    let x = [0, 1];
    let v = match family {
        Family::F1 => vec![0, eps],
        Family::F3 => vec![0, fp.mul(2, eps)],
        Family::F2 | Family::F5 => {
            // lead * x (x + 3 eps)^2
            let lin = [fp.mul(3, eps), 1];
            let sq = poly_mul(fp, &lin, &lin);
            let lead = if family == Family::F2 { 4 } else { 8 };
            poly_mul(fp, &poly_mul(fp, &x, &sq), &[c(lead)])
        }
        Family::F4 => {
            // 8 x (2x + 3 eps)^2
            let lin = [fp.mul(3, eps), 2 % fp.modulus()];
            let sq = poly_mul(fp, &lin, &lin);
            poly_mul(fp, &poly_mul(fp, &x, &sq), &[c(8)])
        }
        _ => unreachable!("only the odd families have a closed-form v"),
    };
    trim(v)
}

/// Discriminant recurrences `g(delta_{n-1}, delta_n)` of the odd families.
pub fn family_g(fp: &PrimeField, family: Family) -> Vec<GTerm> {
    let eps = fp.inv(4 % fp.modulus()).expect("odd prime") as i64;
    let raw: Vec<(u32, u32, i64)> = match family {
        Family::F1 => vec![(0, 2, 1), (0, 1, -1), (1, 0, -eps), (0, 0, eps)],
        Family::F2 => vec![(0, 2, 1), (0, 1, -1), (3, 0, -4), (2, 0, 6), (1, 0, -9 * eps), (0, 0, eps)],
        Family::F3 => vec![(0, 2, 1), (1, 0, -1)],
        Family::F4 => vec![(0, 2, 1), (1, 1, 48), (3, 0, -256), (2, 0, 288), (1, 0, -81)],
        Family::F5 => vec![(0, 2, 1), (3, 0, -16), (2, 0, 24), (1, 0, -9)],
        _ => unreachable!("only the odd families have a recurrence"),
    };
    raw.into_iter()
        .map(|(i, j, c)| GTerm { i, j, coeff: fp.from_i64(c) })
        .filter(|t| t.coeff != 0)
        .collect()
}

/// Initial polynomials used for the published tables (and the small-q seeds
/// for the fifth family). Odd q: `[a, b]` with `x_1^2 = a x_1 + b`.
pub fn reference_seed(q: u64, family: Family) -> Option<Vec<u64>> {
    let pair = match (family, q) {
        (Family::F6 | Family::F7, 2) => return Some(EVEN_SEED.to_vec()),
        (Family::F1 | Family::F2, 3) => (2, 1),
        (Family::F1 | Family::F2, 5) => (3, 2),
        (Family::F1 | Family::F2, 7) => (1, 4),
        (Family::F1 | Family::F2, 11) => (4, 9),
        (Family::F3, 3) => (1, 1),
        (Family::F3, 5) => (2, 2),
        (Family::F3, 7) => (3, 2),
        (Family::F3, 11) => (4, 9),
        (Family::F4, 3) => (1, 1),
        (Family::F4, 5) => (4, 3),
        (Family::F4, 7) => (2, 4),
        (Family::F4, 11) => (7, 4),
        (Family::F5, 3) => (1, 1),
        (Family::F5, 5) => (1, 3),
        (Family::F5, 7) => (2, 2),
        (Family::F5, 11) => (4, 4),
        _ => return None,
    };
    Some(vec![pair.0, pair.1])
}

// JSON shape: decimal strings for every field coefficient
#[derive(Serialize, Deserialize)]
struct RawSpec {
    q: u64,
    family: Family,
    #[serde(default)]
    e: u32,
    v_coeffs: Vec<String>,
    init_minpoly: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    g_terms: Option<Vec<(u32, u32, String)>>,
}

fn parse_residue(s: &str, q: u64) -> Result<u64> {
    let s = s.trim();
    let (neg, digits) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let v = num_bigint::BigUint::from_str(digits).map_err(|_| Error::Parse(format!("not a decimal integer: {s:?}")))?;
    let r = (v % q).iter_u64_digits().next().unwrap_or(0);
    Ok(if neg && r != 0 { q - r } else { r })
}

impl TryFrom<RawSpec> for TowerSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        let q = raw.q;
        PrimeField::new(q)?;
        let parse = |v: &[String]| v.iter().map(|s| parse_residue(s, q)).collect::<Result<Vec<_>>>();
        let g_terms = raw
            .g_terms
            .map(|terms| {
                terms
                    .iter()
                    .map(|(i, j, c)| Ok(GTerm { i: *i, j: *j, coeff: parse_residue(c, q)? }))
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()?;
        let spec = TowerSpec {
            q,
            family: raw.family,
            e: raw.e,
            v_coeffs: trim(parse(&raw.v_coeffs)?),
            init_minpoly: parse(&raw.init_minpoly)?,
            g_terms,
        };
        spec.validate()?;
        if spec.family != Family::Custom {
            let expected = TowerSpec::family(q, spec.family, spec.init_minpoly.clone())?;
            if expected.v_coeffs != spec.v_coeffs || expected.e != spec.e {
                return Err(Error::InvalidSpec(format!(
                    "v(x) or e does not match family {}",
                    spec.family
                )));
            }
        }
        Ok(spec)
    }
}

impl From<TowerSpec> for RawSpec {
    fn from(s: TowerSpec) -> Self {
        let dec = |v: &[u64]| v.iter().map(u64::to_string).collect();
        RawSpec {
            q: s.q,
            family: s.family,
            e: s.e,
            v_coeffs: dec(&s.v_coeffs),
            init_minpoly: dec(&s.init_minpoly),
            g_terms: s
                .g_terms
                .map(|g| g.iter().map(|t| (t.i, t.j, t.coeff.to_string())).collect()),
        }
    }
}
