use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;

use super::element::FieldElement;
use super::poly;
use super::prime::PrimeField;
use crate::error::{Error, Result};

/// How a level is obtained from the one below it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    /// GF(q)[x]/(m(x)) for the base modulus m.
    Base,
    /// `x^2 = -x + v`, i.e. `x^2 + x - v = 0`.
    Quadratic,
    /// `x^3 = -x - v`, i.e. `x^3 + x + v = 0` (characteristic two in practice).
    Cubic,
}

/// Reduction data for one level `n >= 2`.
#[derive(Debug, Clone)]
pub struct LevelContext {
    pub level: usize,
    pub step: StepKind,
    pub step_degree: usize,
    /// `v(x_{n-1})`, declared at level `n - 1`.
    pub reduction_constant: FieldElement,
    // canonical (lowest) level of the constant, for block-wise multiplication
    const_level: usize,
}

/// The four field operations accepted by [`TowerField::arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// A stack of field extensions GF(q) = K_0 ⊂ K_1 ⊂ ... ⊂ K_top.
///
/// K_1 is GF(q)[x]/(m) for a monic irreducible base modulus m; every further
/// level is a degree-2 or degree-3 extension given by its reduction constant.
/// Elements are plain coordinate vectors (see [`FieldElement`]); all operations
/// are `&self` and the type is `Sync`, so a built field can be shared freely.
#[derive(Debug, Clone)]
pub struct TowerField {
    fp: PrimeField,
    // base modulus, monic, low degree first, including the leading 1
    base_modulus: Vec<u64>,
    // contexts[n] for n >= 2; entries 0 and 1 are unused placeholders
    contexts: Vec<Option<LevelContext>>,
    dims: Vec<usize>,
    scratch_len: Vec<usize>,
}

impl TowerField {
    /// Creates K_1 = GF(q)[x]/(m). `modulus` is monic, low degree first.
    ///
    /// Irreducibility is not checked here; see [`TowerField::base_is_irreducible`].
    pub fn new(fp: PrimeField, modulus: &[u64]) -> Result<Self> {
        if modulus.len() < 2 || *modulus.last().unwrap() != 1 {
            return Err(Error::InvalidSpec(
                "base modulus must be monic of degree at least 1".into(),
            ));
        }
        if modulus.iter().any(|&c| c >= fp.modulus()) {
            return Err(Error::InvalidSpec("base modulus coefficients must be reduced".into()));
        }
        let d = modulus.len() - 1;
        Ok(TowerField {
            fp,
            base_modulus: modulus.to_vec(),
            contexts: vec![None, None],
            dims: vec![1, d],
            scratch_len: vec![0, 2 * d],
        })
    }

    pub fn base_is_irreducible(&self) -> bool {
        poly::is_irreducible(&self.fp, &self.base_modulus)
    }

    /// Appends a level with `x^2 + x - v = 0` over the current top.
    pub fn push_quadratic(&mut self, v: &FieldElement) -> Result<()> {
        self.push_level(StepKind::Quadratic, v)
    }

    /// Appends a level with `x^3 + x + v = 0` over the current top.
    pub fn push_cubic(&mut self, v: &FieldElement) -> Result<()> {
        self.push_level(StepKind::Cubic, v)
    }

    fn push_level(&mut self, step: StepKind, v: &FieldElement) -> Result<()> {
        let top = self.top_level();
        self.check(v)?;
        let constant = self.lift(v, top)?;
        let const_level = self.level_of(&constant);
        let degree = match step {
            StepKind::Quadratic => 2,
            StepKind::Cubic => 3,
            StepKind::Base => unreachable!("the base level is created by TowerField::new"),
        };
        let h = self.dims[top];
        let extra = match step {
            StepKind::Quadratic => 4 * h,
            _ => 3 * h,
        };
        let level = top + 1;
        self.dims.push(h * degree);
        self.scratch_len.push(extra + self.scratch_len[top]);
        self.contexts.push(Some(LevelContext {
            level,
            step,
            step_degree: degree,
            reduction_constant: constant,
            const_level,
        }));
        Ok(())
    }

    /// Drops every level above `level`.
    pub fn truncate(&mut self, level: usize) {
        let keep = level.max(1) + 1;
        self.contexts.truncate(keep);
        self.dims.truncate(keep);
        self.scratch_len.truncate(keep);
    }

    pub fn prime(&self) -> &PrimeField {
        &self.fp
    }

    pub fn characteristic(&self) -> u64 {
        self.fp.modulus()
    }

    pub fn base_modulus(&self) -> &[u64] {
        &self.base_modulus
    }

    pub fn top_level(&self) -> usize {
        self.dims.len() - 1
    }

    /// Degree of K_level over GF(q).
    pub fn dim(&self, level: usize) -> usize {
        self.dims[level]
    }

    pub fn step_kind(&self, level: usize) -> StepKind {
        match level {
            0 | 1 => StepKind::Base,
            n => self.contexts[n].as_ref().expect("built level").step,
        }
    }

    /// Degree of K_level over K_{level-1}.
    pub fn step_degree(&self, level: usize) -> usize {
        match level {
            0 => 1,
            n => self.dims[n] / self.dims[n - 1],
        }
    }

    pub fn context(&self, level: usize) -> Option<&LevelContext> {
        self.contexts.get(level).and_then(Option::as_ref)
    }

    /// |K_level| = q^dim.
    pub fn field_size(&self, level: usize) -> BigUint {
        BigUint::from(self.fp.modulus()).pow(self.dims[level] as u32)
    }

    /// |K_level^*|.
    pub fn group_order(&self, level: usize) -> BigUint {
        self.field_size(level) - 1u32
    }

    // ---- element construction ------------------------------------------------

    pub fn zero(&self, level: usize) -> FieldElement {
        FieldElement { level, coeffs: vec![0; self.dims[level]] }
    }

    pub fn one(&self, level: usize) -> FieldElement {
        self.from_prime(level, 1)
    }

    pub fn from_prime(&self, level: usize, c: u64) -> FieldElement {
        let mut e = self.zero(level);
        e.coeffs[0] = self.fp.reduce(c);
        e
    }

    /// The generator x_level (x_1 is the class of x modulo the base modulus).
    pub fn generator(&self, level: usize) -> FieldElement {
        assert!(level >= 1 && level <= self.top_level(), "level {level} has no generator");
        let mut e = self.zero(level);
        let pos = if level == 1 { 1 } else { self.dims[level - 1] };
        if self.dims[level] > pos {
            e.coeffs[pos] = 1;
        } else {
            // degree-1 base: x is the negated constant term of the modulus
            e.coeffs[0] = self.fp.neg(self.base_modulus[0]);
        }
        e
    }

    pub fn element(&self, level: usize, coeffs: &[u64]) -> Result<FieldElement> {
        if level > self.top_level() {
            return Err(Error::LevelNotBuilt(level));
        }
        if coeffs.len() != self.dims[level] {
            return Err(Error::LevelMismatch(format!(
                "level {level} expects {} coordinates, got {}",
                self.dims[level],
                coeffs.len()
            )));
        }
        Ok(FieldElement {
            level,
            coeffs: coeffs.iter().map(|&c| self.fp.reduce(c)).collect(),
        })
    }

    pub fn random<R: Rng + ?Sized>(&self, level: usize, rng: &mut R) -> FieldElement {
        let q = self.fp.modulus();
        FieldElement { level, coeffs: (0..self.dims[level]).map(|_| rng.gen_range(0..q)).collect() }
    }

    pub fn random_nonzero<R: Rng + ?Sized>(&self, level: usize, rng: &mut R) -> FieldElement {
        loop {
            let e = self.random(level, rng);
            if !e.is_zero() {
                return e;
            }
        }
    }

    /// Validates that `a` is a structurally well-formed element of this tower.
    pub fn check(&self, a: &FieldElement) -> Result<()> {
        if a.level > self.top_level() {
            return Err(Error::LevelNotBuilt(a.level));
        }
        if a.coeffs.len() != self.dims[a.level] {
            return Err(Error::LevelMismatch(format!(
                "element declared at level {} has {} coordinates, this tower expects {}",
                a.level,
                a.coeffs.len(),
                self.dims[a.level]
            )));
        }
        Ok(())
    }

    /// Embeds `a` into `level >= a.level()`.
    pub fn lift(&self, a: &FieldElement, level: usize) -> Result<FieldElement> {
        if level < a.level {
            return Err(Error::LevelMismatch(format!(
                "cannot lift level {} to lower level {level}",
                a.level
            )));
        }
        if level > self.top_level() {
            return Err(Error::LevelNotBuilt(level));
        }
        let mut coeffs = a.coeffs.clone();
        coeffs.resize(self.dims[level], 0);
        Ok(FieldElement { level, coeffs })
    }

    /// Lowest level containing `a`.
    pub fn level_of(&self, a: &FieldElement) -> usize {
        let len = a.significant_len();
        self.dims.iter().position(|&d| d >= len).unwrap_or(a.level).min(a.level)
    }

    /// Re-declares `a` at the lowest level containing it.
    pub fn demote(&self, a: &FieldElement) -> FieldElement {
        self.demote_to(a, self.level_of(a)).expect("element lives at its own level")
    }

    /// Re-declares `a` at `level`, failing if `a` is not contained in K_level.
    pub fn demote_to(&self, a: &FieldElement, level: usize) -> Result<FieldElement> {
        if level >= a.level {
            return self.lift(a, level);
        }
        let d = self.dims[level];
        if a.coeffs[d..].iter().any(|&c| c != 0) {
            return Err(Error::LevelMismatch(format!("element is not contained in level {level}")));
        }
        Ok(FieldElement { level, coeffs: a.coeffs[..d].to_vec() })
    }

    /// Whether `a` lies in K_level.
    pub fn lies_in(&self, a: &FieldElement, level: usize) -> bool {
        a.significant_len() <= self.dims[level]
    }

    // ---- additive structure -------------------------------------------------

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        self.zip(a, b, |x, y| self.fp.add(x, y))
    }

    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        self.zip(a, b, |x, y| self.fp.sub(x, y))
    }

    pub fn neg(&self, a: &FieldElement) -> FieldElement {
        FieldElement { level: a.level, coeffs: a.coeffs.iter().map(|&c| self.fp.neg(c)).collect() }
    }

    pub fn scale(&self, a: &FieldElement, c: u64) -> FieldElement {
        let c = self.fp.reduce(c);
        FieldElement { level: a.level, coeffs: a.coeffs.iter().map(|&x| self.fp.mul(x, c)).collect() }
    }

    fn zip(&self, a: &FieldElement, b: &FieldElement, f: impl Fn(u64, u64) -> u64) -> FieldElement {
        let level = a.level.max(b.level);
        let n = self.dims[level];
        let coeffs = (0..n)
            .map(|i| f(a.coeffs.get(i).copied().unwrap_or(0), b.coeffs.get(i).copied().unwrap_or(0)))
            .collect();
        FieldElement { level, coeffs }
    }

    // ---- multiplication -----------------------------------------------------

    /// Product at the higher of the two levels.
    ///
    /// Panics on elements that are not well-formed for this tower; use
    /// [`TowerField::arith`] for a checked variant.
    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let (hi, lo) = if a.level >= b.level { (a, b) } else { (b, a) };
        let level = hi.level;
        let mut out = vec![0u64; self.dims[level]];
        let mut scratch = vec![0u64; self.scratch_len[level]];
        if lo.level == level {
            self.mul_into(level, &hi.coeffs, &lo.coeffs, &mut out, &mut scratch);
        } else {
            self.mul_blocks(lo.level, &hi.coeffs, &lo.coeffs, &mut out, &mut scratch);
        }
        FieldElement { level, coeffs: out }
    }

    pub fn square(&self, a: &FieldElement) -> FieldElement {
        let level = a.level;
        let mut out = vec![0u64; self.dims[level]];
        let mut scratch = vec![0u64; self.scratch_len[level]];
        self.sqr_into(level, &a.coeffs, &mut out, &mut scratch);
        FieldElement { level, coeffs: out }
    }

    pub fn inv(&self, a: &FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let canonical = self.demote(a);
        let inv = self.inv_at(canonical.level, &canonical.coeffs);
        self.lift(&FieldElement { level: canonical.level, coeffs: inv }, a.level)
    }

    pub fn div(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
        let binv = self.inv(b)?;
        Ok(self.mul(a, &binv))
    }

    /// Checked arithmetic: validates both operands against this tower.
    pub fn arith(&self, a: &FieldElement, b: &FieldElement, op: ArithOp) -> Result<FieldElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(match op {
            ArithOp::Add => self.add(a, b),
            ArithOp::Sub => self.sub(a, b),
            ArithOp::Mul => self.mul(a, b),
            ArithOp::Div => self.div(a, b)?,
        })
    }

    /// Square-and-multiply; costs `bits(k)` squarings plus one multiplication
    /// per set bit, all at `a`'s level.
    pub fn pow(&self, a: &FieldElement, k: &BigUint) -> FieldElement {
        let level = a.level;
        let n = self.dims[level];
        let mut acc = vec![0u64; n];
        acc[0] = 1;
        if k.is_zero() {
            return FieldElement { level, coeffs: acc };
        }
        let mut tmp = vec![0u64; n];
        let mut scratch = vec![0u64; self.scratch_len[level]];
        for i in (0..k.bits()).rev() {
            self.sqr_into(level, &acc, &mut tmp, &mut scratch);
            std::mem::swap(&mut acc, &mut tmp);
            if k.bit(i) {
                self.mul_into(level, &acc, &a.coeffs, &mut tmp, &mut scratch);
                std::mem::swap(&mut acc, &mut tmp);
            }
        }
        FieldElement { level, coeffs: acc }
    }

    pub fn pow_u64(&self, a: &FieldElement, k: u64) -> FieldElement {
        self.pow(a, &BigUint::from(k))
    }

    /// `a^q`, the absolute Frobenius.
    pub fn frobenius(&self, a: &FieldElement) -> FieldElement {
        self.pow_u64(a, self.fp.modulus())
    }

    /// Evaluates a polynomial with GF(q) coefficients (low degree first) at `x`.
    pub fn eval_poly(&self, coeffs: &[u64], x: &FieldElement) -> FieldElement {
        let mut acc = self.zero(x.level);
        for &c in coeffs.iter().rev() {
            acc = self.mul(&acc, x);
            acc.coeffs[0] = self.fp.add(acc.coeffs[0], self.fp.reduce(c));
        }
        acc
    }

    fn mul_into(&self, level: usize, a: &[u64], b: &[u64], out: &mut [u64], scratch: &mut [u64]) {
        match level {
            0 => out[0] = self.fp.mul(a[0], b[0]),
            1 => self.base_mul(a, b, out, scratch),
            _ => {
                let ctx = self.contexts[level].as_ref().expect("built level");
                match ctx.step {
                    StepKind::Quadratic => self.quadratic_mul(level, ctx, a, b, out, scratch),
                    StepKind::Cubic => self.cubic_mul(level, ctx, a, b, out, scratch),
                    StepKind::Base => unreachable!(),
                }
            }
        }
    }

    // Squaring: cross terms vanish in characteristic two.
    fn sqr_into(&self, level: usize, a: &[u64], out: &mut [u64], scratch: &mut [u64]) {
        if level < 2 {
            return self.mul_into(level, a, a, out, scratch);
        }
        let ctx = self.contexts[level].as_ref().expect("built level");
        let fp = &self.fp;
        let char2 = fp.modulus() == 2;
        let h = self.dims[level - 1];
        let below = level - 1;
        let double = |x: &mut [u64]| x.iter_mut().for_each(|c| *c = fp.add(*c, *c));
        match ctx.step {
            StepKind::Quadratic => {
                // (a0 + a1 x)^2 = a0^2 + a1^2 v + (2 a0 a1 - a1^2) x
                let (a0, a1) = a.split_at(h);
                let (lo, hi) = out.split_at_mut(h);
                let (m0, rest) = scratch.split_at_mut(h);
                let (m2, rest) = rest.split_at_mut(h);
                self.sqr_into(below, a0, m0, rest);
                self.sqr_into(below, a1, m2, rest);
                if char2 {
                    hi.fill(0);
                } else {
                    self.mul_into(below, a0, a1, hi, rest);
                    double(hi);
                }
                for i in 0..h {
                    hi[i] = fp.sub(hi[i], m2[i]);
                }
                self.mul_by_constant(ctx, m2, lo, rest);
                for i in 0..h {
                    lo[i] = fp.add(lo[i], m0[i]);
                }
            }
            StepKind::Cubic => {
                // c0..c4 of the square, then x^3 = -x - v, x^4 = -x^2 - v x
                let (t, rest) = scratch.split_at_mut(h);
                let (c3, rest) = rest.split_at_mut(h);
                let (c4, rest) = rest.split_at_mut(h);
                let (c0, tail) = out.split_at_mut(h);
                let (c1, c2) = tail.split_at_mut(h);
                let a_ = |i: usize| &a[i * h..(i + 1) * h];
                self.sqr_into(below, a_(0), c0, rest);
                self.sqr_into(below, a_(1), c2, rest);
                self.sqr_into(below, a_(2), c4, rest);
                if char2 {
                    c1.fill(0);
                    c3.fill(0);
                } else {
                    self.mul_into(below, a_(0), a_(1), c1, rest);
                    double(c1);
                    self.mul_into(below, a_(0), a_(2), t, rest);
                    double(t);
                    for i in 0..h {
                        c2[i] = fp.add(c2[i], t[i]);
                    }
                    self.mul_into(below, a_(1), a_(2), c3, rest);
                    double(c3);
                }
                for i in 0..h {
                    c1[i] = fp.sub(c1[i], c3[i]);
                    c2[i] = fp.sub(c2[i], c4[i]);
                }
                if !char2 {
                    self.mul_by_constant(ctx, c3, t, rest);
                    for i in 0..h {
                        c0[i] = fp.sub(c0[i], t[i]);
                    }
                }
                self.mul_by_constant(ctx, c4, t, rest);
                for i in 0..h {
                    c1[i] = fp.sub(c1[i], t[i]);
                }
            }
            StepKind::Base => unreachable!(),
        }
    }

    /// `out = hi * lo` where `lo` lives at `lo_level`, below `hi`'s level:
    /// every `dim(lo_level)`-sized block of `hi` is a K_{lo_level} coordinate.
    fn mul_blocks(&self, lo_level: usize, hi: &[u64], lo: &[u64], out: &mut [u64], scratch: &mut [u64]) {
        let d = self.dims[lo_level];
        let lo = &lo[..d];
        if lo_level == 0 {
            let c = lo[0];
            for (o, &x) in out.iter_mut().zip(hi) {
                *o = self.fp.mul(x, c);
            }
            return;
        }
        for (ob, hb) in out.chunks_mut(d).zip(hi.chunks(d)) {
            if hb.iter().all(|&c| c == 0) {
                ob.fill(0);
            } else {
                self.mul_into(lo_level, hb, lo, ob, scratch);
            }
        }
    }

    fn base_mul(&self, a: &[u64], b: &[u64], out: &mut [u64], scratch: &mut [u64]) {
        let d = self.dims[1];
        let fp = &self.fp;
        let prod = &mut scratch[..2 * d - 1];
        prod.fill(0);
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                prod[i + j] = fp.add(prod[i + j], fp.mul(ai, bj));
            }
        }
        // x^d = -(m_0 + ... + m_{d-1} x^{d-1})
        for k in (d..2 * d - 1).rev() {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            prod[k] = 0;
            for i in 0..d {
                let m = self.base_modulus[i];
                if m != 0 {
                    prod[k - d + i] = fp.sub(prod[k - d + i], fp.mul(c, m));
                }
            }
        }
        out.copy_from_slice(&prod[..d]);
    }

    /// `out = x * v` for `x` at `level - 1` and `v` the level's reduction constant.
    fn mul_by_constant(&self, ctx: &LevelContext, x: &[u64], out: &mut [u64], scratch: &mut [u64]) {
        let below = ctx.level - 1;
        if ctx.const_level == below {
            self.mul_into(below, x, &ctx.reduction_constant.coeffs, out, scratch);
        } else {
            self.mul_blocks(ctx.const_level, x, &ctx.reduction_constant.coeffs, out, scratch);
        }
    }

    // (a0 + a1 x)(b0 + b1 x) with x^2 = v - x, Karatsuba on the middle term.
    fn quadratic_mul(
        &self,
        level: usize,
        ctx: &LevelContext,
        a: &[u64],
        b: &[u64],
        out: &mut [u64],
        scratch: &mut [u64],
    ) {
        let fp = &self.fp;
        let h = self.dims[level - 1];
        let (a0, a1) = a.split_at(h);
        let (b0, b1) = b.split_at(h);
        let (lo, hi) = out.split_at_mut(h);
        let (m0, rest) = scratch.split_at_mut(h);
        let (m2, rest) = rest.split_at_mut(h);
        let (sa, rest) = rest.split_at_mut(h);
        let (sb, rest) = rest.split_at_mut(h);
        self.mul_into(level - 1, a0, b0, m0, rest);
        self.mul_into(level - 1, a1, b1, m2, rest);
        for i in 0..h {
            sa[i] = fp.add(a0[i], a1[i]);
            sb[i] = fp.add(b0[i], b1[i]);
        }
        self.mul_into(level - 1, sa, sb, hi, rest);
        for i in 0..h {
            // a0 b1 + a1 b0 - a1 b1
            hi[i] = fp.sub(fp.sub(hi[i], m0[i]), fp.add(m2[i], m2[i]));
        }
        self.mul_by_constant(ctx, m2, lo, rest);
        for i in 0..h {
            lo[i] = fp.add(lo[i], m0[i]);
        }
    }

    // schoolbook with x^3 = -x - v, x^4 = -x^2 - v x
    fn cubic_mul(
        &self,
        level: usize,
        ctx: &LevelContext,
        a: &[u64],
        b: &[u64],
        out: &mut [u64],
        scratch: &mut [u64],
    ) {
        let fp = &self.fp;
        let h = self.dims[level - 1];
        let (t, rest) = scratch.split_at_mut(h);
        let (c3, rest) = rest.split_at_mut(h);
        let (c4, rest) = rest.split_at_mut(h);
        let below = level - 1;
        let acc = |dst: &mut [u64], src: &[u64]| {
            for (d, &s) in dst.iter_mut().zip(src) {
                *d = fp.add(*d, s);
            }
        };
        let (c0, tail) = out.split_at_mut(h);
        let (c1, c2) = tail.split_at_mut(h);
        let a_ = |i: usize| &a[i * h..(i + 1) * h];
        let b_ = |i: usize| &b[i * h..(i + 1) * h];

        self.mul_into(below, a_(0), b_(0), c0, rest);

        self.mul_into(below, a_(0), b_(1), c1, rest);
        self.mul_into(below, a_(1), b_(0), t, rest);
        acc(c1, t);

        self.mul_into(below, a_(0), b_(2), c2, rest);
        self.mul_into(below, a_(1), b_(1), t, rest);
        acc(c2, t);
        self.mul_into(below, a_(2), b_(0), t, rest);
        acc(c2, t);

        self.mul_into(below, a_(1), b_(2), c3, rest);
        self.mul_into(below, a_(2), b_(1), t, rest);
        acc(c3, t);

        self.mul_into(below, a_(2), b_(2), c4, rest);

        for i in 0..h {
            c1[i] = fp.sub(c1[i], c3[i]);
            c2[i] = fp.sub(c2[i], c4[i]);
        }
        self.mul_by_constant(ctx, c3, t, rest);
        for i in 0..h {
            c0[i] = fp.sub(c0[i], t[i]);
        }
        self.mul_by_constant(ctx, c4, t, rest);
        for i in 0..h {
            c1[i] = fp.sub(c1[i], t[i]);
        }
    }

    // ---- inversion ----------------------------------------------------------

    fn mul_vec(&self, level: usize, a: &[u64], b: &[u64]) -> Vec<u64> {
        let mut out = vec![0u64; self.dims[level]];
        let mut scratch = vec![0u64; self.scratch_len[level]];
        self.mul_into(level, a, b, &mut out, &mut scratch);
        out
    }

    fn inv_at(&self, level: usize, a: &[u64]) -> Vec<u64> {
        match level {
            0 => vec![self.fp.inv(a[0]).expect("non-zero")],
            1 => {
                let e = self.field_size(1) - 2u32;
                self.pow(&FieldElement { level: 1, coeffs: a.to_vec() }, &e).coeffs
            }
            n => match self.step_kind(n) {
                StepKind::Quadratic => {
                    let h = self.dims[n - 1];
                    let conj = self.conjugate_slices(n, a);
                    let norm = self.mul_vec(n, a, &conj);
                    debug_assert!(norm[h..].iter().all(|&c| c == 0));
                    let ninv = self.inv_at(n - 1, &norm[..h]);
                    let mut out = vec![0u64; 2 * h];
                    let mut scratch = vec![0u64; self.scratch_len[n - 1]];
                    self.mul_blocks(n - 1, &conj, &ninv, &mut out, &mut scratch);
                    out
                }
                StepKind::Cubic => self.cubic_inv(n, a),
                StepKind::Base => unreachable!(),
            },
        }
    }

    // Solves a * c = 1 through the adjugate of the multiplication-by-a matrix
    // over K_{n-1}; the determinant is the relative norm.
    fn cubic_inv(&self, n: usize, a: &[u64]) -> Vec<u64> {
        let h = self.dims[n - 1];
        let below = n - 1;
        let fp = &self.fp;
        let ctx = self.contexts[n].as_ref().unwrap();
        let v = &ctx.reduction_constant.coeffs;
        let sub = |x: &[u64], y: &[u64]| -> Vec<u64> { x.iter().zip(y).map(|(&p, &q)| fp.sub(p, q)).collect() };
        let neg = |x: &[u64]| -> Vec<u64> { x.iter().map(|&p| fp.neg(p)).collect() };
        let times_x = |c: &[Vec<u64>; 3]| -> [Vec<u64>; 3] {
            // (c0 + c1 x + c2 x^2) x = -c2 v + (c0 - c2) x + c1 x^2
            let c2v = self.mul_vec(below, &c[2], v);
            [neg(&c2v), sub(&c[0], &c[2]), c[1].clone()]
        };
        let col0: [Vec<u64>; 3] = [a[..h].to_vec(), a[h..2 * h].to_vec(), a[2 * h..].to_vec()];
        let col1 = times_x(&col0);
        let col2 = times_x(&col1);
        // m[r][c]
        let m = |r: usize, c: usize| -> &[u64] {
            match c {
                0 => &col0[r],
                1 => &col1[r],
                _ => &col2[r],
            }
        };
        let mm = |x: &[u64], y: &[u64]| self.mul_vec(below, x, y);
        let c00 = sub(&mm(m(1, 1), m(2, 2)), &mm(m(1, 2), m(2, 1)));
        let c01 = sub(&mm(m(1, 2), m(2, 0)), &mm(m(1, 0), m(2, 2)));
        let c02 = sub(&mm(m(1, 0), m(2, 1)), &mm(m(1, 1), m(2, 0)));
        let mut det = mm(m(0, 0), &c00);
        for (x, y) in det.iter_mut().zip(mm(m(0, 1), &c01)) {
            *x = fp.add(*x, y);
        }
        for (x, y) in det.iter_mut().zip(mm(m(0, 2), &c02)) {
            *x = fp.add(*x, y);
        }
        let dinv = self.inv_at(below, &det);
        let mut out = Vec::with_capacity(3 * h);
        for c in [&c00, &c01, &c02] {
            out.extend(mm(c, &dinv));
        }
        out
    }

    // ---- Galois structure ---------------------------------------------------

    fn conjugate_slices(&self, level: usize, a: &[u64]) -> Vec<u64> {
        let fp = &self.fp;
        let h = self.dims[level - 1];
        let (a0, a1) = a.split_at(h);
        let mut out = vec![0u64; 2 * h];
        if level == 1 {
            // roots of x^2 + m1 x + m0 sum to -m1
            let m1 = self.base_modulus[1];
            out[0] = fp.sub(a0[0], fp.mul(m1, a1[0]));
            out[1] = fp.neg(a1[0]);
        } else {
            // roots of y^2 + y - v sum to -1
            for i in 0..h {
                out[i] = fp.sub(a0[i], a1[i]);
                out[h + i] = fp.neg(a1[i]);
            }
        }
        out
    }

    /// The non-trivial automorphism of K_n over K_{n-1} for a quadratic level:
    /// `a0 + a1 x_n -> (a0 - a1) - a1 x_n`.
    pub fn conjugate_top(&self, a: &FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        let n = a.level;
        let quadratic = match n {
            0 => false,
            1 => self.dims[1] == 2,
            _ => self.step_kind(n) == StepKind::Quadratic,
        };
        if !quadratic {
            return Err(Error::Unsupported {
                expected: "a quadratic level (use pow-based Frobenius instead)",
                found: format!("level {n} of degree {}", self.step_degree(n)),
            });
        }
        Ok(FieldElement { level: n, coeffs: self.conjugate_slices(n, &a.coeffs) })
    }

    /// Relative norm N_{n,j} from K_n (n = `a.level()`) down to K_{n-j}.
    ///
    /// Quadratic steps use `a * conjugate_top(a)` repeatedly; other steps fall
    /// back to exponentiation by `(|K_n| - 1) / (|K_{n-j}| - 1)`.
    pub fn norm(&self, a: &FieldElement, j: usize) -> Result<FieldElement> {
        self.check(a)?;
        let n = a.level;
        if j > n {
            return Err(Error::NormTooDeep { j, level: n });
        }
        let all_quadratic = (n - j + 1..=n).all(|k| match k {
            1 => self.dims[1] == 2,
            _ => self.step_kind(k) == StepKind::Quadratic,
        });
        if !all_quadratic {
            return self.norm_by_pow(a, j);
        }
        let mut cur = a.clone();
        for _ in 0..j {
            let conj = self.conjugate_top(&cur)?;
            let prod = self.mul(&cur, &conj);
            cur = self.demote_to(&prod, cur.level - 1)?;
        }
        Ok(cur)
    }

    /// Norm through direct exponentiation; independent of the conjugation path.
    pub fn norm_by_pow(&self, a: &FieldElement, j: usize) -> Result<FieldElement> {
        self.check(a)?;
        let n = a.level;
        if j > n {
            return Err(Error::NormTooDeep { j, level: n });
        }
        let e = self.group_order(n) / self.group_order(n - j);
        let p = self.pow(a, &e);
        self.demote_to(&p, n - j)
    }

    /// Absolute trace to GF(2).
    ///
    /// The relative trace of `a0 + a1 y + a2 y^2` through a step `y^3 + y + v`
    /// is `a0`, and of `a0 + a1 y` through `y^2 + y + v` it is `a1`, so the
    /// trace is pushed down to K_1 and finished there with squarings.
    pub fn abs_trace_char2(&self, a: &FieldElement) -> Result<bool> {
        self.require_char2_field(a)?;
        let mut level = a.level;
        let mut coeffs = a.coeffs.clone();
        while level >= 2 {
            let d = self.dims[level - 1];
            let block = match self.step_kind(level) {
                StepKind::Cubic => 0,
                _ => 1,
            };
            coeffs = coeffs[block * d..(block + 1) * d].to_vec();
            level -= 1;
        }
        self.abs_trace_by_squaring(&FieldElement { level, coeffs })
    }

    /// `sum_{i < m} a^(2^i)` with m the degree of `a`'s level.
    pub fn abs_trace_by_squaring(&self, a: &FieldElement) -> Result<bool> {
        self.require_char2_field(a)?;
        let m = self.dims[a.level];
        let mut s = a.clone();
        let mut acc = a.clone();
        for _ in 1..m {
            s = self.square(&s);
            acc = self.add(&acc, &s);
        }
        debug_assert!(acc.coeffs[1..].iter().all(|&c| c == 0));
        Ok(acc.coeffs[0] == 1)
    }

    fn require_char2_field(&self, a: &FieldElement) -> Result<()> {
        self.check(a)?;
        if self.characteristic() != 2 {
            return Err(Error::Unsupported {
                expected: "characteristic 2",
                found: format!("characteristic {}", self.characteristic()),
            });
        }
        Ok(())
    }

    /// The exponent `|K_level| - 1` as a `u64` when it fits.
    pub fn small_group_order(&self, level: usize) -> Option<u64> {
        self.group_order(level).to_u64()
    }
}
