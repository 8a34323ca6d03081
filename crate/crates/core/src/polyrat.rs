//! Univariate polynomials and rational functions over GF(2^k).
//!
//! Covers the usual Euclidean toolkit, factorization (squarefree, distinct
//! degree and trace-based equal degree splitting), splitting fields, orders of
//! vanishing, Laurent expansions at a point or at infinity, and partial
//! fractions over a field in which the denominator splits.

use std::cmp::Ordering;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::gf2k::{Embedding, FieldCtx, FieldElem, FieldError};

/// Seed used when the caller does not supply a random generator.
pub const DEFAULT_SEED: u64 = 0x6b6c_6569_6e34;

/// Order of vanishing of the zero function.
pub const ORD_INF: i64 = i64::MAX;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("operation undefined for the zero polynomial")]
    ZeroPolynomial,
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("denominator does not split over {0}")]
    UnsplitDenominator(FieldCtx),
    #[error("splitting field needs degree {needed} over GF(2), above the cap {cap}")]
    FieldDegreeCap { needed: u32, cap: u32 },
    #[error("precision {prec} does not exceed the order {ord}")]
    Precision { prec: i64, ord: i64 },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Dense polynomial, lowest degree first, without trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Poly {
    ctx: FieldCtx,
    c: Vec<u64>,
}

impl Poly {
    pub fn from_raw(ctx: FieldCtx, c: Vec<u64>) -> Poly {
        let mask = ctx.mask();
        debug_assert!(c.iter().all(|&a| a & !mask == 0));
        let mut p = Poly { ctx, c };
        p.trim();
        p
    }

    pub fn from_elems(ctx: FieldCtx, c: &[FieldElem]) -> Poly {
        assert!(c.iter().all(|a| a.ctx() == ctx), "coefficient from a different field");
        Poly::from_raw(ctx, c.iter().map(|a| a.bits()).collect())
    }

    pub fn zero(ctx: FieldCtx) -> Poly {
        Poly { ctx, c: Vec::new() }
    }

    pub fn one(ctx: FieldCtx) -> Poly {
        Poly::constant(ctx, 1)
    }

    pub fn x(ctx: FieldCtx) -> Poly {
        Poly::monomial(ctx, 1, 1)
    }

    pub fn constant(ctx: FieldCtx, a: u64) -> Poly {
        Poly::from_raw(ctx, vec![a])
    }

    pub fn monomial(ctx: FieldCtx, a: u64, d: usize) -> Poly {
        let mut c = vec![0; d + 1];
        c[d] = a;
        Poly::from_raw(ctx, c)
    }

    /// `x - q` (which is `x + q` in characteristic 2).
    pub fn linear(ctx: FieldCtx, q: u64) -> Poly {
        Poly::from_raw(ctx, vec![q, 1])
    }

    fn trim(&mut self) {
        while self.c.last() == Some(&0) {
            self.c.pop();
        }
    }

    pub fn ctx(&self) -> FieldCtx {
        self.ctx
    }

    pub fn raw(&self) -> &[u64] {
        &self.c
    }

    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    /// Degree as a signed integer, with `-1` for the zero polynomial.
    pub fn deg(&self) -> i64 {
        self.c.len() as i64 - 1
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.c.len() <= 1
    }

    pub fn is_one(&self) -> bool {
        self.c == [1]
    }

    pub fn lead(&self) -> u64 {
        self.c.last().copied().unwrap_or(0)
    }

    pub fn coeff(&self, i: usize) -> u64 {
        self.c.get(i).copied().unwrap_or(0)
    }

    pub fn coeff_elem(&self, i: usize) -> FieldElem {
        self.ctx.elem(self.coeff(i))
    }

    fn same_field(&self, other: &Poly) {
        assert_eq!(self.ctx, other.ctx, "polynomials over different fields");
    }

    pub fn add(&self, other: &Poly) -> Poly {
        self.same_field(other);
        let n = self.c.len().max(other.c.len());
        let c = (0..n).map(|i| self.coeff(i) ^ other.coeff(i)).collect();
        Poly::from_raw(self.ctx, c)
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        self.same_field(other);
        if self.is_zero() || other.is_zero() {
            return Poly::zero(self.ctx);
        }
        let mut c = vec![0u64; self.c.len() + other.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.c.iter().enumerate() {
                c[i + j] ^= self.ctx.mul(a, b);
            }
        }
        Poly::from_raw(self.ctx, c)
    }

    pub fn scale(&self, a: u64) -> Poly {
        Poly::from_raw(self.ctx, self.c.iter().map(|&b| self.ctx.mul(a, b)).collect())
    }

    /// Multiplies by `x^n`.
    pub fn shift_up(&self, n: usize) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let mut c = vec![0; n];
        c.extend_from_slice(&self.c);
        Poly { ctx: self.ctx, c }
    }

    pub fn square(&self) -> Poly {
        // Frobenius is additive in characteristic 2.
        let mut c = vec![0u64; (2 * self.c.len()).saturating_sub(1)];
        for (i, &a) in self.c.iter().enumerate() {
            c[2 * i] = self.ctx.square(a);
        }
        Poly::from_raw(self.ctx, c)
    }

    pub fn pow(&self, mut e: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one(self.ctx);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.square();
            }
        }
        acc
    }

    /// Euclidean division. Panics if `d` is zero.
    pub fn divrem(&self, d: &Poly) -> (Poly, Poly) {
        self.same_field(d);
        assert!(!d.is_zero(), "polynomial division by zero");
        let dd = d.c.len() - 1;
        if self.c.len() <= dd {
            return (Poly::zero(self.ctx), self.clone());
        }
        let inv_lead = self.ctx.inv(d.lead()).expect("nonzero leading coefficient");
        let mut r = self.c.clone();
        let mut q = vec![0u64; r.len() - dd];
        for i in (0..q.len()).rev() {
            let top = r[i + dd];
            if top == 0 {
                continue;
            }
            let f = self.ctx.mul(top, inv_lead);
            q[i] = f;
            for (j, &b) in d.c.iter().enumerate() {
                r[i + j] ^= self.ctx.mul(f, b);
            }
        }
        (Poly::from_raw(self.ctx, q), Poly::from_raw(self.ctx, r))
    }

    pub fn rem(&self, d: &Poly) -> Poly {
        self.divrem(d).1
    }

    /// Exact quotient; panics (in debug builds) if the division leaves a remainder.
    pub fn exact_div(&self, d: &Poly) -> Poly {
        let (q, r) = self.divrem(d);
        debug_assert!(r.is_zero(), "inexact polynomial division");
        q
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() || self.lead() == 1 {
            return self.clone();
        }
        let inv = self.ctx.inv(self.lead()).unwrap();
        self.scale(inv)
    }

    /// Monic gcd; `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn deriv(&self) -> Poly {
        let c = self
            .c
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &a)| if i % 2 == 1 { a } else { 0 })
            .collect();
        Poly::from_raw(self.ctx, c)
    }

    pub fn eval(&self, x: u64) -> u64 {
        self.c.iter().rev().fold(0, |acc, &a| self.ctx.mul(acc, x) ^ a)
    }

    /// `f(x + q)`.
    pub fn taylor_shift(&self, q: u64) -> Poly {
        let lin = Poly::linear(self.ctx, q);
        let mut acc = Poly::zero(self.ctx);
        for &a in self.c.iter().rev() {
            acc = acc.mul(&lin).add(&Poly::constant(self.ctx, a));
        }
        acc
    }

    /// Coefficient sequence reversed against degree `n` (`x^n f(1/x)`).
    pub fn reversed(&self, n: usize) -> Poly {
        let mut c = vec![0u64; n + 1];
        for (i, &a) in self.c.iter().enumerate() {
            c[n - i] = a;
        }
        Poly::from_raw(self.ctx, c)
    }

    /// Square root of a polynomial whose odd coefficients all vanish.
    pub fn sqrt_if_square(&self) -> Option<Poly> {
        if self.c.iter().skip(1).step_by(2).any(|&a| a != 0) {
            return None;
        }
        let c = self.c.iter().step_by(2).map(|&a| self.ctx.sqrt(a)).collect();
        Some(Poly::from_raw(self.ctx, c))
    }

    /// Multiplicity of the root `q` (the polynomial must be nonzero).
    pub fn multiplicity_at(&self, q: u64) -> usize {
        assert!(!self.is_zero());
        let shifted = self.taylor_shift(q);
        shifted.c.iter().position(|&a| a != 0).unwrap()
    }

    pub fn embed(&self, e: &Embedding) -> Poly {
        assert_eq!(self.ctx, e.source());
        Poly::from_raw(e.target(), self.c.iter().map(|&a| e.apply_raw(a)).collect())
    }

    fn mulmod(&self, other: &Poly, m: &Poly) -> Poly {
        self.mul(other).rem(m)
    }

    /// `self^(2^n) mod m`.
    fn frobenius_mod(&self, n: u32, m: &Poly) -> Poly {
        let mut t = self.rem(m);
        for _ in 0..n {
            t = t.square().rem(m);
        }
        t
    }

    /// Distinct roots in the coefficient field, sorted by bit pattern.
    pub fn split_roots(&self) -> Vec<u64> {
        let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
        self.split_roots_with(&mut rng)
    }

    pub fn split_roots_with<R: Rng>(&self, rng: &mut R) -> Vec<u64> {
        if self.deg() < 1 {
            return Vec::new();
        }
        let f = self.monic();
        let x = Poly::x(self.ctx);
        let xq = x.frobenius_mod(self.ctx.degree(), &f);
        let linear_part = f.gcd(&xq.add(&x.rem(&f)));
        let mut roots: Vec<u64> = equal_degree_split(&linear_part, 1, rng)
            .into_iter()
            .map(|p| p.coeff(0))
            .collect();
        roots.sort_unstable();
        roots
    }

    fn fmt_in(&self, var: &str, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, &a) in self.c.iter().enumerate().rev() {
            if a == 0 {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            let lit = self.ctx.elem(a).to_string();
            let mono = match i {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{i}"),
            };
            if i == 0 {
                write!(f, "{lit}")?;
            } else if a == 1 {
                write!(f, "{mono}")?;
            } else if lit.contains('+') {
                write!(f, "({lit})*{mono}")?;
            } else {
                write!(f, "{lit}*{mono}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_in("x", f)
    }
}

// ---------------------------------------------------------------------------
// Factorization

/// Complete factorization `unit * prod factor^mult` into monic irreducibles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorList {
    pub unit: FieldElem,
    pub factors: Vec<(Poly, u32)>,
}

impl FactorList {
    pub fn product(&self) -> Poly {
        let ctx = self.unit.ctx();
        self.factors
            .iter()
            .fold(Poly::constant(ctx, self.unit.bits()), |acc, (p, e)| acc.mul(&p.pow(*e)))
    }
}

fn poly_order(a: &Poly, b: &Poly) -> Ordering {
    a.c.len().cmp(&b.c.len()).then_with(|| a.c.iter().rev().cmp(b.c.iter().rev()))
}

/// Squarefree decomposition of a monic polynomial in characteristic 2.
pub fn squarefree_decomposition(f: &Poly) -> Vec<(Poly, u32)> {
    let mut out = Vec::new();
    if f.deg() < 1 {
        return out;
    }
    let df = f.deriv();
    if df.is_zero() {
        let root = f.sqrt_if_square().expect("zero derivative means a square");
        for (p, e) in squarefree_decomposition(&root) {
            out.push((p, 2 * e));
        }
        return out;
    }
    let mut c = f.gcd(&df);
    let mut w = f.exact_div(&c);
    let mut i = 1;
    while w.deg() > 0 {
        let y = w.gcd(&c);
        let z = w.exact_div(&y);
        if z.deg() > 0 {
            out.push((z.monic(), i));
        }
        i += 1;
        w = y;
        c = c.exact_div(&w);
    }
    if c.deg() > 0 {
        let root = c.sqrt_if_square().expect("leftover cofactor is a square");
        for (p, e) in squarefree_decomposition(&root.monic()) {
            out.push((p, 2 * e));
        }
    }
    out
}

/// Splits a squarefree monic polynomial into products of irreducibles of equal degree.
pub fn distinct_degree_factorization(f: &Poly) -> Vec<(Poly, usize)> {
    let ctx = f.ctx();
    let x = Poly::x(ctx);
    let mut out = Vec::new();
    let mut rest = f.monic();
    let mut h = x.rem(&rest);
    let mut d = 1;
    while rest.deg() >= 2 * d as i64 {
        h = h.frobenius_mod(ctx.degree(), &rest);
        let g = rest.gcd(&h.add(&x));
        if g.deg() > 0 {
            rest = rest.exact_div(&g);
            h = h.rem(&rest);
            out.push((g, d));
        }
        d += 1;
    }
    if rest.deg() > 0 {
        let n = rest.deg() as usize;
        out.push((rest, n));
    }
    out
}

/// Splits a product of distinct monic irreducibles of degree `d` using the
/// absolute trace `a + a^2 + ... + a^(2^(k d - 1))` of random residues `a`.
pub fn equal_degree_split<R: Rng>(f: &Poly, d: usize, rng: &mut R) -> Vec<Poly> {
    let f = f.monic();
    let n = f.deg();
    if n <= 0 {
        return Vec::new();
    }
    if n as usize == d {
        return vec![f];
    }
    let ctx = f.ctx();
    let steps = ctx.degree() as usize * d;
    loop {
        let a = Poly::from_raw(ctx, (0..n).map(|_| rng.gen::<u64>() & ctx.mask()).collect());
        if a.deg() < 1 {
            continue;
        }
        let mut t = a.clone();
        let mut acc = a;
        for _ in 1..steps {
            t = t.mulmod(&t, &f);
            acc = acc.add(&t);
        }
        let g = f.gcd(&acc);
        if g.deg() > 0 && g.deg() < n {
            let h = f.exact_div(&g);
            let mut out = equal_degree_split(&g, d, rng);
            out.extend(equal_degree_split(&h, d, rng));
            return out;
        }
    }
}

pub fn poly_factor(f: &Poly) -> Result<FactorList, PolyError> {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    poly_factor_with(f, &mut rng)
}

pub fn poly_factor_with<R: Rng>(f: &Poly, rng: &mut R) -> Result<FactorList, PolyError> {
    if f.is_zero() {
        return Err(PolyError::ZeroPolynomial);
    }
    let ctx = f.ctx();
    let unit = ctx.elem(f.lead());
    let mut factors: Vec<(Poly, u32)> = Vec::new();
    for (sq, e) in squarefree_decomposition(&f.monic()) {
        for (block, d) in distinct_degree_factorization(&sq) {
            for p in equal_degree_split(&block, d, rng) {
                match factors.iter_mut().find(|(q, _)| *q == p) {
                    Some(entry) => entry.1 += e,
                    None => factors.push((p, e)),
                }
            }
        }
    }
    factors.sort_by(|a, b| poly_order(&a.0, &b.0));
    Ok(FactorList { unit, factors })
}

// ---------------------------------------------------------------------------
// Splitting fields

#[derive(Clone, Debug)]
pub struct SplittingData {
    pub base: FieldCtx,
    pub ext: FieldCtx,
    pub embedding: Embedding,
    /// Every root with its multiplicity, sorted by bit pattern.
    pub roots: Vec<(FieldElem, u32)>,
}

impl SplittingData {
    pub fn root_points(&self) -> Vec<FieldElem> {
        self.roots.iter().map(|(r, _)| *r).collect()
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

/// The smallest extension of the coefficient field over which `f` splits,
/// together with all roots of `f` there. `max_degree` caps the absolute degree.
pub fn splitting_data(f: &Poly, max_degree: u32) -> Result<SplittingData, PolyError> {
    let base = f.ctx();
    let factors = poly_factor(f)?;
    let l = factors.factors.iter().fold(1u64, |acc, (p, _)| lcm(acc, p.deg() as u64));
    let needed = l * base.degree() as u64;
    if needed > max_degree as u64 || needed > crate::gf2k::MAX_DEGREE as u64 {
        return Err(PolyError::FieldDegreeCap { needed: needed.min(u32::MAX as u64) as u32, cap: max_degree });
    }
    let ext = if l == 1 { base } else { FieldCtx::new(needed as u32, None)? };
    let embedding = Embedding::new(base, ext)?;
    let mut roots = Vec::new();
    for (p, e) in &factors.factors {
        for r in p.embed(&embedding).split_roots() {
            roots.push((ext.elem(r), *e));
        }
    }
    roots.sort_by_key(|(r, _)| r.bits());
    Ok(SplittingData { base, ext, embedding, roots })
}

// ---------------------------------------------------------------------------
// Rational functions

/// A reduced fraction with monic denominator.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct RatFun {
    num: Poly,
    den: Poly,
}

impl RatFun {
    pub fn new(num: Poly, den: Poly) -> Result<RatFun, PolyError> {
        if den.is_zero() {
            return Err(PolyError::ZeroDenominator);
        }
        num.same_field(&den);
        if num.is_zero() {
            return Ok(RatFun::zero(num.ctx));
        }
        let g = num.gcd(&den);
        let (mut num, mut den) = if g.is_one() { (num, den) } else { (num.exact_div(&g), den.exact_div(&g)) };
        let lead = den.lead();
        if lead != 1 {
            let inv = num.ctx.inv(lead).unwrap();
            num = num.scale(inv);
            den = den.scale(inv);
        }
        Ok(RatFun { num, den })
    }

    pub fn from_poly(p: Poly) -> RatFun {
        let ctx = p.ctx;
        RatFun { num: p, den: Poly::one(ctx) }
    }

    pub fn zero(ctx: FieldCtx) -> RatFun {
        RatFun::from_poly(Poly::zero(ctx))
    }

    pub fn one(ctx: FieldCtx) -> RatFun {
        RatFun::from_poly(Poly::one(ctx))
    }

    pub fn constant(ctx: FieldCtx, a: u64) -> RatFun {
        RatFun::from_poly(Poly::constant(ctx, a))
    }

    pub fn x(ctx: FieldCtx) -> RatFun {
        RatFun::from_poly(Poly::x(ctx))
    }

    /// `c / (x - q)^j`.
    pub fn pole_term(ctx: FieldCtx, c: u64, q: u64, j: u32) -> RatFun {
        RatFun::new(Poly::constant(ctx, c), Poly::linear(ctx, q).pow(j)).expect("nonzero denominator")
    }

    pub fn ctx(&self) -> FieldCtx {
        self.num.ctx
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.den.is_one() && self.num.is_constant()
    }

    pub fn as_poly(&self) -> Option<&Poly> {
        self.is_polynomial().then_some(&self.num)
    }

    pub fn add(&self, other: &RatFun) -> RatFun {
        if self.den == other.den {
            return RatFun::new(self.num.add(&other.num), self.den.clone()).unwrap();
        }
        let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
        RatFun::new(num, self.den.mul(&other.den)).unwrap()
    }

    pub fn mul(&self, other: &RatFun) -> RatFun {
        RatFun::new(self.num.mul(&other.num), self.den.mul(&other.den)).unwrap()
    }

    pub fn square(&self) -> RatFun {
        // numerator and denominator stay coprime
        let num = self.num.square();
        let den = self.den.square();
        RatFun { num, den }
    }

    pub fn inv(&self) -> Result<RatFun, PolyError> {
        RatFun::new(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, other: &RatFun) -> Result<RatFun, PolyError> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow(&self, e: i64) -> Result<RatFun, PolyError> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let e = e.unsigned_abs();
        let e = u32::try_from(e).map_err(|_| PolyError::ZeroDenominator)?;
        Ok(RatFun { num: base.num.pow(e), den: base.den.pow(e) })
    }

    pub fn scale(&self, a: u64) -> RatFun {
        RatFun::new(self.num.scale(a), self.den.clone()).unwrap()
    }

    pub fn embed(&self, e: &Embedding) -> RatFun {
        RatFun { num: self.num.embed(e), den: self.den.embed(e) }
    }

    /// Order of vanishing at the finite point `q`; [`ORD_INF`] for zero.
    pub fn ord_at(&self, q: FieldElem) -> i64 {
        assert_eq!(q.ctx(), self.ctx(), "point from a different field");
        if self.is_zero() {
            return ORD_INF;
        }
        self.num.multiplicity_at(q.bits()) as i64 - self.den.multiplicity_at(q.bits()) as i64
    }

    /// `deg den - deg num`; [`ORD_INF`] for zero.
    pub fn ord_at_infinity(&self) -> i64 {
        if self.is_zero() {
            return ORD_INF;
        }
        self.den.deg() - self.num.deg()
    }

    pub fn ord_at_point(&self, p: &Point) -> i64 {
        match p {
            Point::Finite(q) => self.ord_at(*q),
            Point::Infinity => self.ord_at_infinity(),
        }
    }

    /// Pole order `max(0, -ord)` at a point.
    pub fn pole_at(&self, p: &Point) -> i64 {
        let o = self.ord_at_point(p);
        if o == ORD_INF {
            0
        } else {
            (-o).max(0)
        }
    }
}

impl fmt::Display for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else if self.num.c.iter().filter(|&&a| a != 0).count() == 1 && self.num.c.len() == 1 && self.num.c[0] == 1 {
            write!(f, "1/({})", self.den)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

// ---------------------------------------------------------------------------
// Local expansions

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Point {
    Finite(FieldElem),
    Infinity,
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Finite(q) => write!(f, "{q}"),
            Point::Infinity => f.write_str("inf"),
        }
    }
}

/// Truncated Laurent series `sum coeffs[i] t^(start + i)`, exact below `prec`.
///
/// The local parameter is `t = x - q` at a finite point and `t = 1/x` at infinity.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LaurentSeries {
    pub ctx: FieldCtx,
    pub at: Point,
    pub start: i64,
    pub coeffs: Vec<u64>,
    pub prec: i64,
}

impl LaurentSeries {
    pub fn coeff(&self, e: i64) -> u64 {
        assert!(e < self.prec, "exponent {e} beyond precision {}", self.prec);
        if e < self.start {
            return 0;
        }
        self.coeffs.get((e - self.start) as usize).copied().unwrap_or(0)
    }

    pub fn is_zero_to_precision(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// The truncated series as a rational function of `x`.
    pub fn to_ratfun(&self) -> RatFun {
        let ctx = self.ctx;
        let mut acc = RatFun::zero(ctx);
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let e = self.start + i as i64;
            let t = match self.at {
                Point::Finite(q) => RatFun::from_poly(Poly::linear(ctx, q.bits())),
                Point::Infinity => RatFun::x(ctx).inv().unwrap(),
            };
            acc = acc.add(&t.pow(e).unwrap().scale(c));
        }
        acc
    }
}

// Power series quotient n/d to `len` terms; d(0) must be nonzero.
fn series_div(ctx: FieldCtx, n: &[u64], d: &[u64], len: usize) -> Vec<u64> {
    let inv0 = ctx.inv(d[0]).expect("unit constant term");
    let mut q = Vec::with_capacity(len);
    for i in 0..len {
        let mut acc = n.get(i).copied().unwrap_or(0);
        for j in 1..=i.min(d.len().saturating_sub(1)) {
            acc ^= ctx.mul(d[j], q[i - j]);
        }
        q.push(ctx.mul(acc, inv0));
    }
    q
}

/// Laurent expansion of `h` at `at`, exact for all exponents below `prec`.
pub fn laurent_at(h: &RatFun, at: Point, prec: i64) -> Result<LaurentSeries, PolyError> {
    let ctx = h.ctx();
    if h.is_zero() {
        return Ok(LaurentSeries { ctx, at, start: prec, coeffs: Vec::new(), prec });
    }
    let (start, n, d) = match at {
        Point::Finite(q) => {
            assert_eq!(q.ctx(), ctx, "point from a different field");
            let n = h.num.taylor_shift(q.bits());
            let d = h.den.taylor_shift(q.bits());
            let vn = n.c.iter().position(|&a| a != 0).unwrap();
            let vd = d.c.iter().position(|&a| a != 0).unwrap();
            (vn as i64 - vd as i64, n.c[vn..].to_vec(), d.c[vd..].to_vec())
        }
        Point::Infinity => {
            let dn = h.num.deg() as usize;
            let dd = h.den.deg() as usize;
            (dd as i64 - dn as i64, h.num.reversed(dn).c, h.den.reversed(dd).c)
        }
    };
    if prec <= start {
        return Err(PolyError::Precision { prec, ord: start });
    }
    let len = (prec - start) as usize;
    let coeffs = series_div(ctx, &n, &d, len);
    Ok(LaurentSeries { ctx, at, start, coeffs, prec })
}

// ---------------------------------------------------------------------------
// Partial fractions

/// Principal part `sum_j coeffs[j-1] / (x - at)^j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrincipalPart {
    pub at: FieldElem,
    pub coeffs: Vec<u64>,
}

impl PrincipalPart {
    pub fn order(&self) -> usize {
        self.coeffs.iter().rposition(|&c| c != 0).map_or(0, |i| i + 1)
    }

    pub fn to_ratfun(&self) -> RatFun {
        let ctx = self.at.ctx();
        if self.coeffs.iter().all(|&c| c == 0) {
            return RatFun::zero(ctx);
        }
        // sum_j c_j (x-q)^(e-j) / (x-q)^e
        let e = self.coeffs.len();
        let lin = Poly::linear(ctx, self.at.bits());
        let mut num = Poly::zero(ctx);
        for &c in &self.coeffs {
            num = num.mul(&lin).add(&Poly::constant(ctx, c));
        }
        RatFun::new(num, lin.pow(e as u32)).unwrap()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialFractions {
    pub ctx: FieldCtx,
    pub polypart: Poly,
    pub parts: Vec<PrincipalPart>,
}

impl PartialFractions {
    pub fn reassemble(&self) -> RatFun {
        self.parts
            .iter()
            .fold(RatFun::from_poly(self.polypart.clone()), |acc, p| acc.add(&p.to_ratfun()))
    }
}

/// `h = polypart + sum_q sum_j c_(q,j) / (x - q)^j` over a field where the
/// denominator splits with the given (distinct) roots.
pub fn partial_fractions(h: &RatFun, roots: &[FieldElem]) -> Result<PartialFractions, PolyError> {
    let ctx = h.ctx();
    let polypart = h.num.divrem(&h.den).0;
    let mut parts = Vec::new();
    let mut covered = 0usize;
    for &q in roots {
        if q.ctx() != ctx {
            return Err(FieldError::ContextMismatch(q.ctx(), ctx).into());
        }
        let e = h.den.multiplicity_at(q.bits());
        if e == 0 {
            continue;
        }
        covered += e;
        let s = laurent_at(h, Point::Finite(q), 0)?;
        let coeffs = (1..=e as i64).map(|j| s.coeff(-j)).collect();
        parts.push(PrincipalPart { at: q, coeffs });
    }
    if covered as i64 != h.den.deg() {
        return Err(PolyError::UnsplitDenominator(ctx));
    }
    Ok(PartialFractions { ctx, polypart, parts })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(k: u32) -> FieldCtx {
        FieldCtx::new(k, None).unwrap()
    }

    fn p2(bits: &[u64]) -> Poly {
        Poly::from_raw(FieldCtx::gf2(), bits.to_vec())
    }

    #[test]
    fn factor_examples() {
        // x^2 + x
        let f = poly_factor(&p2(&[0, 1, 1])).unwrap();
        assert_eq!(f.factors, vec![(p2(&[0, 1]), 1), (p2(&[1, 1]), 1)]);
        // x^2 + x + 1 irreducible
        let f = poly_factor(&p2(&[1, 1, 1])).unwrap();
        assert_eq!(f.factors, vec![(p2(&[1, 1, 1]), 1)]);
        // x^4 + x^2 = x^2 (x+1)^2
        let f = poly_factor(&p2(&[0, 0, 1, 0, 1])).unwrap();
        assert_eq!(f.factors, vec![(p2(&[0, 1]), 2), (p2(&[1, 1]), 2)]);
        assert_eq!(poly_factor(&Poly::zero(FieldCtx::gf2())), Err(PolyError::ZeroPolynomial));
    }

    #[test]
    fn factor_with_mixed_multiplicities() {
        // x^3 (x+1)^5 (x^2+x+1)^2 (x^3+x+1)
        let ctx = FieldCtx::gf2();
        let f = Poly::x(ctx)
            .pow(3)
            .mul(&p2(&[1, 1]).pow(5))
            .mul(&p2(&[1, 1, 1]).pow(2))
            .mul(&p2(&[1, 1, 0, 1]));
        let fl = poly_factor(&f).unwrap();
        assert_eq!(fl.product(), f);
        let mults: Vec<u32> = fl.factors.iter().map(|(_, e)| *e).collect();
        assert_eq!(mults, vec![3, 5, 2, 1]);
    }

    #[test]
    fn splitting_examples() {
        let s = splitting_data(&p2(&[0, 1, 1]), 64).unwrap();
        assert_eq!(s.ext, FieldCtx::gf2());
        assert_eq!(s.roots.iter().map(|(r, _)| r.bits()).collect::<Vec<_>>(), vec![0, 1]);

        let s = splitting_data(&p2(&[1, 1, 1]), 64).unwrap();
        assert_eq!(s.ext, gf(2));
        let g = s.ext.generator();
        assert_eq!(s.root_points(), vec![g, g + s.ext.one()]);

        let f = p2(&[1, 1, 0, 1]);
        let s = splitting_data(&f, 64).unwrap();
        assert_eq!(s.ext.degree(), 3);
        assert_eq!(s.roots.len(), 3);
        let fe = f.embed(&s.embedding);
        for (r, m) in &s.roots {
            assert_eq!(fe.eval(r.bits()), 0);
            assert_eq!(*m, 1);
        }
        assert!(matches!(splitting_data(&f, 2), Err(PolyError::FieldDegreeCap { needed: 3, cap: 2 })));
    }

    #[test]
    fn orders() {
        let ctx = FieldCtx::gf2();
        let x = RatFun::x(ctx);
        let h = x.pow(3).unwrap().add(&x).add(&x.pow(-5).unwrap());
        assert_eq!(h.ord_at(ctx.zero()), -5);
        let h = x.pow(3).unwrap().add(&x).add(&RatFun::pole_term(ctx, 1, 1, 7));
        assert_eq!(h.ord_at_infinity(), -3);
        let sq = RatFun::from_poly(Poly::linear(ctx, 1).pow(2));
        assert_eq!(sq.ord_at(ctx.one()), 2);
        assert_eq!(RatFun::zero(ctx).ord_at(ctx.one()), ORD_INF);
    }

    #[test]
    fn laurent_examples() {
        let ctx = FieldCtx::gf2();
        let s = laurent_at(&RatFun::pole_term(ctx, 1, 1, 1), Point::Finite(ctx.one()), 4).unwrap();
        assert_eq!((s.start, s.coeffs.clone()), (-1, vec![1, 0, 0, 0, 0]));
        let s = laurent_at(&RatFun::x(ctx).pow(-2).unwrap(), Point::Infinity, 5).unwrap();
        assert_eq!((s.start, s.coeffs.clone()), (2, vec![1, 0, 0]));
        let h = RatFun::new(Poly::one(ctx), p2(&[0, 1, 1])).unwrap();
        let s = laurent_at(&h, Point::Finite(ctx.zero()), 3).unwrap();
        assert_eq!((s.start, s.coeffs.clone()), (-1, vec![1, 1, 1, 1]));
        assert!(matches!(laurent_at(&h, Point::Finite(ctx.zero()), -1), Err(PolyError::Precision { .. })));
    }

    #[test]
    fn partial_fraction_examples() {
        let ctx = FieldCtx::gf2();
        let x = RatFun::x(ctx);
        let pf = partial_fractions(&x.pow(3).unwrap(), &[]).unwrap();
        assert_eq!(pf.polypart, Poly::x(ctx).pow(3));
        assert!(pf.parts.is_empty());

        let h = RatFun::new(Poly::one(ctx), p2(&[0, 1, 1])).unwrap();
        let pf = partial_fractions(&h, &[ctx.zero(), ctx.one()]).unwrap();
        assert_eq!(pf.parts[0].coeffs, vec![1]);
        assert_eq!(pf.parts[1].coeffs, vec![1]);
        assert_eq!(pf.reassemble(), h);

        let h = x.pow(3).unwrap().add(&x).add(&RatFun::pole_term(ctx, 1, 1, 7));
        let pf = partial_fractions(&h, &[ctx.one()]).unwrap();
        assert_eq!(pf.polypart, p2(&[0, 1, 0, 1]));
        assert_eq!(pf.parts[0].coeffs, vec![0, 0, 0, 0, 0, 0, 1]);
        assert_eq!(pf.reassemble(), h);

        let h = RatFun::new(Poly::one(ctx), p2(&[1, 1, 1])).unwrap();
        assert!(matches!(partial_fractions(&h, &[]), Err(PolyError::UnsplitDenominator(_))));
    }

    #[test]
    fn display() {
        let ctx = gf(2);
        let g = ctx.generator().bits();
        let p = Poly::from_raw(ctx, vec![g ^ 1, 0, g]);
        assert_eq!(p.to_string(), "g*x^2 + g + 1");
        let q = Poly::from_raw(ctx, vec![0, g ^ 1, 1]);
        assert_eq!(q.to_string(), "x^2 + (g + 1)*x");
    }
}
