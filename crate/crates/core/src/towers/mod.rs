//! Recursive towers: construction, certification of each step, the residue
//! conditions behind the order bounds, and the initial-element search.

mod spec;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::ff::{FieldElement, PrimeField, TowerField};
use crate::residues;

pub use spec::{family_g, family_v, reference_seed, Family, GTerm, TowerSpec, EVEN_SEED};

/// Evaluation cap for norm identities.
pub const DEFAULT_NORM_CAP: usize = 5;

/// One recorded check made while building a level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub name: String,
    pub holds: bool,
}

/// Data for one built level `n >= 1`.
#[derive(Debug, Clone)]
pub struct LevelData {
    pub n: usize,
    pub x: FieldElement,
    /// `1 + 4 v(x_n)`; absent in characteristic two.
    pub delta: Option<FieldElement>,
    pub certificates: Vec<Certificate>,
}

/// The residue conditions on `v` that drive the order bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Condition {
    /// `-v(x_{n-1}) / x_{n-1}` is a square.
    C1,
    /// `g(delta_{n-1}, 0) / x_{n-1}` is a square.
    C2,
    /// `g(delta_{n-1}, 0) / delta_{n-1}` is a square.
    C2Prime,
    /// `v(x_{n-1}) = x_{n-1}^(2^e)`.
    C3,
}

impl Condition {
    pub const ALL: [Condition; 4] = [Condition::C1, Condition::C2, Condition::C2Prime, Condition::C3];
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::C1 => "C1",
            Condition::C2 => "C2",
            Condition::C2Prime => "C2'",
            Condition::C3 => "C3",
        })
    }
}

impl FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "C1" => Ok(Condition::C1),
            "C2" => Ok(Condition::C2),
            "C2'" | "C2PRIME" => Ok(Condition::C2Prime),
            "C3" => Ok(Condition::C3),
            other => Err(Error::Parse(format!("unknown condition {other:?}"))),
        }
    }
}

/// Outcome of a condition check, with the element that was tested.
#[derive(Debug, Clone)]
pub struct ConditionCheck {
    pub condition: Condition,
    pub n: usize,
    pub holds: bool,
    pub witness: FieldElement,
}

/// Outcome of the norm product identity at `(n, j)`.
#[derive(Debug, Clone)]
pub struct NormIdentityCheck {
    pub n: usize,
    pub j: usize,
    pub holds: bool,
    /// Odd q: whether `N_{n,j}(x_n) / x_{n-j}` is a square at level `n - j`.
    pub lhs_square: Option<bool>,
    pub lhs: FieldElement,
}

/// A built tower: the field stack plus `x_n` and `delta_n` per level.
#[derive(Debug, Clone)]
pub struct TowerState {
    spec: TowerSpec,
    field: TowerField,
    levels: Vec<LevelData>,
}

/// Builds and certifies level 1 of the tower described by `spec`.
pub fn new_tower(spec: TowerSpec) -> Result<TowerState> {
    TowerState::new(spec)
}

impl TowerState {
    pub fn new(spec: TowerSpec) -> Result<Self> {
        spec.validate()?;
        let fp = spec.prime()?;
        let modulus = spec.base_modulus()?;
        let field = TowerField::new(fp, &modulus)?;
        if !field.base_is_irreducible() {
            return Err(Error::ReducibleInitial(format!("{:?} over GF({})", spec.init_minpoly, spec.q)));
        }
        let mut state = TowerState { spec, field, levels: Vec::new() };
        let x = state.field.generator(1);
        let mut certificates = Vec::new();
        let delta = if state.spec.is_char2() {
            state.certify_even_seed(&x, &mut certificates)?;
            None
        } else {
            let delta = state.discriminant(&x);
            for (name, e) in [("x_1 is a non-square", &x), ("delta_1 is a non-square", &delta)] {
                if residues::is_square_or_zero(&state.field, e)? {
                    return Err(Error::CertificateFailed(format!(
                        "{} fails: {} is a square in GF({}^2)",
                        name.replace(" is a non-square", ""),
                        e,
                        state.spec.q
                    )));
                }
                certificates.push(Certificate { name: name.into(), holds: true });
            }
            Some(delta)
        };
        state.levels.push(LevelData { n: 1, x, delta, certificates });
        Ok(state)
    }

    fn certify_even_seed(&self, x: &FieldElement, certificates: &mut Vec<Certificate>) -> Result<()> {
        let field = &self.field;
        if residues::is_nth_residue(field, x, 3)? {
            return Err(Error::CertificateFailed("x_1 is a cube".into()));
        }
        certificates.push(Certificate { name: "x_1 is a non-cube".into(), holds: true });
        let c = self.v_at(x);
        if c.is_zero() {
            return Err(Error::CertificateFailed("v(x_1) vanishes".into()));
        }
        let Some((r1, r2)) = residues::solve_quadratic_char2(field, &c, &field.one(1))? else {
            return Err(Error::CertificateFailed("y^2 + v(x_1) y + 1 has no root at level 1".into()));
        };
        for r in [&r1, &r2] {
            if residues::is_nth_residue(field, r, 3)? {
                return Err(Error::CertificateFailed(format!(
                    "root {} of y^2 + v(x_1) y + 1 is a cube",
                    r
                )));
            }
        }
        certificates.push(Certificate { name: "roots of y^2 + v(x_1) y + 1 are non-cubes".into(), holds: true });
        if !residues::resolvent_splits(field, &c)? {
            return Err(Error::CertificateFailed("quadratic resolvent at level 1 is irreducible".into()));
        }
        certificates.push(Certificate { name: "resolvent splits at level 1".into(), holds: true });
        Ok(())
    }

    /// Builds `spec` and extends it to `levels`.
    pub fn build(spec: TowerSpec, levels: usize) -> Result<Self> {
        let mut t = TowerState::new(spec)?;
        t.extend_to(levels)?;
        Ok(t)
    }

    pub fn spec(&self) -> &TowerSpec {
        &self.spec
    }

    pub fn field(&self) -> &TowerField {
        &self.field
    }

    pub fn prime(&self) -> &PrimeField {
        self.field.prime()
    }

    pub fn top_level(&self) -> usize {
        self.levels.len()
    }

    pub fn is_char2(&self) -> bool {
        self.spec.is_char2()
    }

    pub fn level(&self, n: usize) -> Result<&LevelData> {
        if n == 0 {
            return Err(Error::LevelMismatch("levels are numbered from 1".into()));
        }
        self.levels.get(n - 1).ok_or(Error::LevelNotBuilt(n))
    }

    pub fn levels(&self) -> &[LevelData] {
        &self.levels
    }

    pub fn x(&self, n: usize) -> Result<&FieldElement> {
        Ok(&self.level(n)?.x)
    }

    pub fn delta(&self, n: usize) -> Result<&FieldElement> {
        self.level(n)?.delta.as_ref().ok_or(Error::Unsupported {
            expected: "an odd-characteristic tower",
            found: "characteristic 2 (no discriminant)".into(),
        })
    }

    /// `v(a)` at `a`'s level.
    pub fn v_at(&self, a: &FieldElement) -> FieldElement {
        self.field.eval_poly(&self.spec.v_coeffs, a)
    }

    /// `1 + 4 v(a)`.
    pub fn discriminant(&self, a: &FieldElement) -> FieldElement {
        let v = self.v_at(a);
        let four_v = self.field.scale(&v, 4);
        self.field.add(&self.field.one(a.level()), &four_v)
    }

    /// Appends level `top + 1` after certifying that the step polynomial is
    /// irreducible over the current top (and normal, in characteristic two).
    pub fn extend(&mut self) -> Result<()> {
        let n = self.top_level() + 1;
        let prev = self.levels[n - 2].clone();
        let v = self.v_at(&prev.x);
        let mut certificates = Vec::new();
        if self.is_char2() {
            self.certify_cubic_step(n, &v, &mut certificates)?;
            self.field.push_cubic(&v)?;
        } else {
            let dp = prev.delta.as_ref().expect("odd levels carry a discriminant");
            if residues::is_square_or_zero(&self.field, dp)? {
                return Err(Error::CertificateFailed(format!(
                    "delta_{} is a square, so y^2 + y - v(x_{}) is reducible",
                    n - 1,
                    n - 1
                )));
            }
            certificates.push(Certificate { name: format!("delta_{} is a non-square", n - 1), holds: true });
            self.field.push_quadratic(&v)?;
        }
        let x = self.field.generator(n);
        let delta = (!self.is_char2()).then(|| self.discriminant(&x));
        self.levels.push(LevelData { n, x, delta, certificates });
        Ok(())
    }

    fn certify_cubic_step(&self, n: usize, c: &FieldElement, certificates: &mut Vec<Certificate>) -> Result<()> {
        let field = &self.field;
        if c.is_zero() {
            return Err(Error::CertificateFailed(format!("v(x_{}) vanishes", n - 1)));
        }
        if !residues::resolvent_splits(field, c)? {
            return Err(Error::CertificateFailed(format!(
                "quadratic resolvent over level {} is irreducible, the step is not normal",
                n - 1
            )));
        }
        certificates.push(Certificate { name: format!("resolvent splits at level {}", n - 1), holds: true });
        let one = field.one(c.level());
        let zero = field.zero(c.level());
        if residues::cubic_has_root(field, [c, &one, &zero])? {
            return Err(Error::CertificateFailed(format!(
                "y^3 + y + v(x_{}) has a root at level {}",
                n - 1,
                n - 1
            )));
        }
        if let Some(y) = residues::cardano_cubic_char2(field, c)? {
            return Err(Error::CertificateFailed(format!(
                "Cardano's formula found the root {} at level {} although the gcd test found none",
                y,
                n - 1
            )));
        }
        certificates.push(Certificate { name: format!("y^3 + y + v(x_{}) has no root at level {}", n - 1, n - 1), holds: true });
        Ok(())
    }

    /// Extends until `levels` levels are built.
    pub fn extend_to(&mut self, levels: usize) -> Result<()> {
        while self.top_level() < levels {
            self.extend()?;
        }
        Ok(())
    }

    /// The conditions that apply to this tower's family.
    pub fn applicable_conditions(&self) -> Vec<Condition> {
        if self.is_char2() {
            return vec![Condition::C3];
        }
        match self.spec.family.condition_two_over_x() {
            Some(true) => vec![Condition::C1, Condition::C2],
            Some(false) => vec![Condition::C1, Condition::C2Prime],
            None if self.spec.g_terms.is_some() => vec![Condition::C1, Condition::C2, Condition::C2Prime],
            None => vec![Condition::C1],
        }
    }

    fn g_terms(&self) -> Result<&[GTerm]> {
        self.spec.g_terms.as_deref().ok_or(Error::MissingRecurrence)
    }

    /// `g(a, b)` at the higher level of the two.
    pub fn eval_g(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
        let field = &self.field;
        let level = a.level().max(b.level());
        let mut acc = field.zero(level);
        for t in self.g_terms()? {
            let term = field.mul(&field.pow_u64(a, t.i as u64), &field.pow_u64(b, t.j as u64));
            acc = field.add(&acc, &field.scale(&field.lift(&term, level)?, t.coeff));
        }
        Ok(acc)
    }

    /// Evaluates `kind` at level `n - 1` (the hypothesis used for step `n`).
    pub fn check_condition(&self, n: usize, kind: Condition) -> Result<ConditionCheck> {
        if n < 2 {
            return Err(Error::LevelMismatch("conditions are stated for n >= 2".into()));
        }
        let x = self.x(n - 1)?.clone();
        let field = &self.field;
        let (holds, witness) = match kind {
            Condition::C3 => {
                if !self.is_char2() {
                    return Err(Error::Unsupported {
                        expected: "characteristic 2 for C3",
                        found: format!("q = {}", self.spec.q),
                    });
                }
                let v = self.v_at(&x);
                let mut power = x.clone();
                for _ in 0..self.spec.e {
                    power = field.square(&power);
                }
                (v == power, v)
            }
            _ if self.is_char2() => {
                return Err(Error::Unsupported {
                    expected: "odd characteristic for C1/C2/C2'",
                    found: "q = 2".into(),
                })
            }
            Condition::C1 => {
                let w = field.div(&field.neg(&self.v_at(&x)), &x)?;
                (residues::is_square_or_zero(field, &w)?, w)
            }
            Condition::C2 | Condition::C2Prime => {
                let d = self.delta(n - 1)?.clone();
                let g0 = self.eval_g(&d, &field.zero(n - 1))?;
                let w = if kind == Condition::C2 { field.div(&g0, &x)? } else { field.div(&g0, &d)? };
                (residues::is_square_or_zero(field, &w)?, w)
            }
        };
        Ok(ConditionCheck { condition: kind, n, holds, witness })
    }

    /// Whether `g(delta_{n-1}, delta_n) = 0` holds exactly.
    pub fn verify_discriminant_recurrence(&self, n: usize) -> Result<bool> {
        if self.is_char2() {
            return Err(Error::Unsupported { expected: "odd characteristic", found: "q = 2".into() });
        }
        if n < 2 {
            return Err(Error::LevelMismatch("the recurrence links levels n - 1 and n, n >= 2".into()));
        }
        let g = self.eval_g(self.delta(n - 1)?, self.delta(n)?)?;
        Ok(g.is_zero())
    }

    /// Checks the product formula for `N_{n,j}(x_n) / x_{n-j}` (odd q) or
    /// `N_{n,j}(x_n) = x_{n-j}^(2^(e j))` (q = 2) exactly, for `0 <= j < n <= cap`.
    pub fn verify_norm_identity(&self, n: usize, j: usize, cap: usize) -> Result<NormIdentityCheck> {
        if n > cap {
            return Err(Error::CapExceeded { level: n, cap });
        }
        if j >= n {
            return Err(Error::NormTooDeep { j, level: n });
        }
        let field = &self.field;
        let x_n = self.x(n)?;
        let norm = field.norm(x_n, j)?;
        if self.is_char2() {
            let x_low = self.x(n - j)?;
            if !self.check_condition(n.max(2), Condition::C3)?.holds {
                return Err(Error::Unsupported {
                    expected: "v(x) = x^(2^e) for the even norm identity",
                    found: format!("v = {:?}", self.spec.v_coeffs),
                });
            }
            let mut rhs = x_low.clone();
            for _ in 0..(self.spec.e as usize * j) {
                rhs = field.square(&rhs);
            }
            return Ok(NormIdentityCheck { n, j, holds: norm == rhs, lhs_square: None, lhs: norm });
        }
        let lhs = field.div(&norm, self.x(n - j)?)?;
        let mut rhs = field.one(n - j);
        for k in 1..=j {
            let inner_norm = field.norm(self.x(n - k + 1)?, 1)?;
            let inner = field.div(&inner_norm, self.x(n - k)?)?;
            rhs = field.mul(&rhs, &field.norm(&inner, j - k)?);
        }
        let lhs_square = residues::is_square_or_zero(field, &lhs)?;
        Ok(NormIdentityCheck { n, j, holds: lhs == rhs, lhs_square: Some(lhs_square), lhs })
    }
}

/// Searches the smallest `(a, b)` (lexicographic) such that `x_1^2 = a x_1 + b`
/// is irreducible and both `x_1` and `delta_1` are non-squares. Fixed seeds
/// are returned for q = 2 and for the fifth family with q < 11.
pub fn find_initial(q: u64, family: Family) -> Result<TowerSpec> {
    let fp = PrimeField::new(q)?;
    if family == Family::Custom {
        return Err(Error::InvalidSpec("the seed search needs a named family".into()));
    }
    if family.is_even() || (family == Family::F5 && q < 11) {
        return TowerSpec::with_reference_seed(q, family);
    }
    if q == 2 {
        return Err(Error::InvalidSpec(format!("family {family} requires an odd prime")));
    }
    for a in 0..q {
        for b in 0..q {
            let disc = fp.add(fp.mul(a, a), fp.mul(4 % q, b));
            if disc == 0 || fp.is_square(disc) {
                continue;
            }
            let spec = TowerSpec::family(q, family, vec![a, b])?;
            match TowerState::new(spec.clone()) {
                Ok(_) => return Ok(spec),
                Err(Error::CertificateFailed(_)) => continue,
                Err(e) => return Err(e),
            }
        }
    }
    Err(Error::SearchFailed(format!("no seed for {family} over GF({q})")))
}
