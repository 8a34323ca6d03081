//! Exact arithmetic in GF(2^k), square roots via Frobenius, and field embeddings.
//!
//! A field is described by a [`FieldCtx`]: the extension degree `k` together
//! with an irreducible modulus over GF(2). Elements are stored as the `k`
//! coefficient bits of their residue class (bit `i` is the coefficient of
//! `g^i`, where `g` is the class of the indeterminate).
//!
//! [`FieldCtx`] exposes raw arithmetic on `u64` residues for the hot loops in
//! the polynomial and matrix code; [`FieldElem`] is the checked value type
//! that refuses to mix contexts.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub};
use std::sync::OnceLock;

use thiserror::Error;

/// Largest supported extension degree (elements are stored in a `u64`).
pub const MAX_DEGREE: u32 = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("extension degree {k} is outside the supported range 1..={cap}")]
    DegreeOutOfRange { k: u32, cap: u32 },
    #[error("modulus {modulus} does not have degree {k}")]
    WrongModulusDegree { k: u32, modulus: String },
    #[error("modulus {0} has zero constant term")]
    ZeroConstantTerm(String),
    #[error("modulus {0} is reducible over GF(2)")]
    ReducibleModulus(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("GF(2^{from}) does not embed into GF(2^{to})")]
    NoEmbedding { from: u32, to: u32 },
    #[error("mixed field contexts {0} and {1}")]
    ContextMismatch(FieldCtx, FieldCtx),
}

// ---------------------------------------------------------------------------
// GF(2)[x] helpers on u128 bit vectors (degree <= 127).

fn bit_degree(a: u128) -> Option<u32> {
    if a == 0 {
        None
    } else {
        Some(127 - a.leading_zeros())
    }
}

fn gf2_rem(mut a: u128, f: u128) -> u128 {
    let df = bit_degree(f).expect("nonzero modulus");
    while let Some(da) = bit_degree(a) {
        if da < df {
            break;
        }
        a ^= f << (da - df);
    }
    a
}

fn gf2_gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let r = gf2_rem(a, b);
        a = b;
        b = r;
    }
    a
}

/// Multiply two residues modulo `f` (degree `k`); inputs must already be reduced.
fn gf2_mulmod(a: u128, b: u128, f: u128, k: u32) -> u128 {
    let mut acc = 0u128;
    let mut a = a;
    let mut b = b;
    let top = 1u128 << k;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a & top != 0 {
            a ^= f;
        }
    }
    acc
}

/// Renders a GF(2)[g] bit vector as a polynomial literal in `g`.
pub fn bits_to_literal(bits: u128) -> String {
    if bits == 0 {
        return "0".to_string();
    }
    let mut terms = Vec::new();
    for i in (0..128).rev() {
        if (bits >> i) & 1 == 1 {
            terms.push(match i {
                0 => "1".to_string(),
                1 => "g".to_string(),
                _ => format!("g^{i}"),
            });
        }
    }
    terms.join(" + ")
}

fn prime_divisors(mut n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Rabin's irreducibility test for a degree-`k` polynomial over GF(2).
pub fn is_irreducible_gf2(f: u128) -> bool {
    let Some(k) = bit_degree(f) else { return false };
    if k == 0 {
        return false;
    }
    if k == 1 {
        return true;
    }
    // x^(2^j) mod f by repeated squaring
    let x = gf2_rem(2, f);
    let frob = |j: u32| {
        let mut t = x;
        for _ in 0..j {
            t = gf2_mulmod(t, t, f, k);
        }
        t
    };
    if frob(k) != x {
        return false;
    }
    prime_divisors(k)
        .into_iter()
        .all(|p| gf2_gcd(f, frob(k / p) ^ x) == 1)
}

static DEFAULT_MODULI: [OnceLock<u128>; (MAX_DEGREE + 1) as usize] =
    [const { OnceLock::new() }; (MAX_DEGREE + 1) as usize];

/// The lexicographically smallest irreducible polynomial of degree `k` with
/// nonzero constant term (`x + 1` for `k = 1`).
pub fn default_modulus(k: u32) -> u128 {
    assert!((1..=MAX_DEGREE).contains(&k), "degree {k} out of range");
    *DEFAULT_MODULI[k as usize].get_or_init(|| {
        let top = 1u128 << k;
        let mut low = 1u128;
        loop {
            let f = top | low;
            if is_irreducible_gf2(f) {
                return f;
            }
            low += 2;
        }
    })
}

// ---------------------------------------------------------------------------

/// A finite field GF(2^k) presented as GF(2)[g] / (modulus).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct FieldCtx {
    k: u32,
    modulus: u128,
}

impl FieldCtx {
    /// Builds GF(2^k) with the given modulus, or with the default modulus when
    /// `modulus` is `None`.
    pub fn new(k: u32, modulus: Option<u128>) -> Result<Self, FieldError> {
        Self::with_cap(k, modulus, MAX_DEGREE)
    }

    pub fn with_cap(k: u32, modulus: Option<u128>, cap: u32) -> Result<Self, FieldError> {
        let cap = cap.min(MAX_DEGREE);
        if k == 0 || k > cap {
            return Err(FieldError::DegreeOutOfRange { k, cap });
        }
        let modulus = match modulus {
            None => default_modulus(k),
            Some(f) => {
                if bit_degree(f) != Some(k) {
                    return Err(FieldError::WrongModulusDegree {
                        k,
                        modulus: bits_to_literal(f),
                    });
                }
                if f & 1 == 0 {
                    return Err(FieldError::ZeroConstantTerm(bits_to_literal(f)));
                }
                if !is_irreducible_gf2(f) {
                    return Err(FieldError::ReducibleModulus(bits_to_literal(f)));
                }
                f
            }
        };
        Ok(FieldCtx { k, modulus })
    }

    pub fn gf2() -> Self {
        FieldCtx { k: 1, modulus: 0b11 }
    }

    pub fn degree(&self) -> u32 {
        self.k
    }

    pub fn modulus(&self) -> u128 {
        self.modulus
    }

    /// Number of elements, `2^k`.
    pub fn order(&self) -> u128 {
        1u128 << self.k
    }

    pub fn mask(&self) -> u64 {
        if self.k == 64 {
            u64::MAX
        } else {
            (1u64 << self.k) - 1
        }
    }

    pub fn elem(&self, bits: u64) -> FieldElem {
        assert!(bits & !self.mask() == 0, "{bits:#x} is not a residue of {self}");
        FieldElem { ctx: *self, bits }
    }

    pub fn zero(&self) -> FieldElem {
        self.elem(0)
    }

    pub fn one(&self) -> FieldElem {
        self.elem(1)
    }

    /// The class of the indeterminate, `g`.
    pub fn generator(&self) -> FieldElem {
        self.elem(self.reduce(2))
    }

    fn reduce(&self, a: u128) -> u64 {
        gf2_rem(a, self.modulus) as u64
    }

    /// All field elements in increasing bit order. Only sensible for small `k`.
    pub fn elements(&self) -> impl Iterator<Item = FieldElem> + '_ {
        assert!(self.k <= 24, "refusing to enumerate GF(2^{})", self.k);
        (0..(1u64 << self.k)).map(move |b| FieldElem { ctx: *self, bits: b })
    }

    // Raw residue arithmetic. Inputs must be reduced residues of this field.

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        a ^ b
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        if self.k == 1 {
            return a & b;
        }
        gf2_mulmod(a as u128, b as u128, self.modulus, self.k) as u64
    }

    #[inline]
    pub fn square(&self, a: u64) -> u64 {
        self.mul(a, a)
    }

    pub fn pow(&self, a: u64, mut e: u128) -> u64 {
        let mut base = a;
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.square(base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: u64) -> Option<u64> {
        if a == 0 {
            None
        } else {
            Some(self.pow(a, self.order() - 2))
        }
    }

    pub fn div(&self, a: u64, b: u64) -> Option<u64> {
        self.inv(b).map(|bi| self.mul(a, bi))
    }

    /// The unique square root, `a^(2^(k-1))`.
    pub fn sqrt(&self, a: u64) -> u64 {
        let mut r = a;
        for _ in 1..self.k {
            r = self.square(r);
        }
        r
    }

    /// Absolute trace to GF(2), returned as 0 or 1.
    pub fn trace(&self, a: u64) -> u64 {
        let mut t = a;
        let mut acc = 0;
        for _ in 0..self.k {
            acc ^= t;
            t = self.square(t);
        }
        debug_assert!(acc <= 1);
        acc
    }

    /// Parity of an integer, viewed in the prime field.
    pub fn from_int(&self, n: i64) -> u64 {
        (n.rem_euclid(2)) as u64
    }
}

impl fmt::Display for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF(2^{})", self.k)
    }
}

/// An element of GF(2^k) that remembers its field.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct FieldElem {
    ctx: FieldCtx,
    bits: u64,
}

impl FieldElem {
    pub fn ctx(&self) -> FieldCtx {
        self.ctx
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    pub fn is_one(&self) -> bool {
        self.bits == 1
    }

    fn check(&self, other: &FieldElem) -> Result<(), FieldError> {
        if self.ctx == other.ctx {
            Ok(())
        } else {
            Err(FieldError::ContextMismatch(self.ctx, other.ctx))
        }
    }

    pub fn try_add(self, other: FieldElem) -> Result<FieldElem, FieldError> {
        self.check(&other)?;
        Ok(FieldElem { ctx: self.ctx, bits: self.bits ^ other.bits })
    }

    pub fn try_mul(self, other: FieldElem) -> Result<FieldElem, FieldError> {
        self.check(&other)?;
        Ok(FieldElem { ctx: self.ctx, bits: self.ctx.mul(self.bits, other.bits) })
    }

    pub fn inv(self) -> Result<FieldElem, FieldError> {
        self.ctx
            .inv(self.bits)
            .map(|bits| FieldElem { ctx: self.ctx, bits })
            .ok_or(FieldError::DivisionByZero)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn div(self, other: FieldElem) -> Result<FieldElem, FieldError> {
        self.check(&other)?;
        self.try_mul(other.inv()?)
    }

    pub fn pow(self, e: u128) -> FieldElem {
        FieldElem { ctx: self.ctx, bits: self.ctx.pow(self.bits, e) }
    }

    pub fn square(self) -> FieldElem {
        FieldElem { ctx: self.ctx, bits: self.ctx.square(self.bits) }
    }

    pub fn sqrt(self) -> FieldElem {
        FieldElem { ctx: self.ctx, bits: self.ctx.sqrt(self.bits) }
    }

    pub fn trace(self) -> u64 {
        self.ctx.trace(self.bits)
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&bits_to_literal(self.bits as u128))
    }
}

// Operators panic on mixed contexts; use the `try_*` methods to get an error.
impl Add for FieldElem {
    type Output = FieldElem;
    fn add(self, rhs: FieldElem) -> FieldElem {
        self.try_add(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Sub for FieldElem {
    type Output = FieldElem;
    // characteristic 2
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn sub(self, rhs: FieldElem) -> FieldElem {
        self + rhs
    }
}

impl Neg for FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        self
    }
}

impl Mul for FieldElem {
    type Output = FieldElem;
    fn mul(self, rhs: FieldElem) -> FieldElem {
        self.try_mul(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl AddAssign for FieldElem {
    fn add_assign(&mut self, rhs: FieldElem) {
        *self = *self + rhs;
    }
}

impl MulAssign for FieldElem {
    fn mul_assign(&mut self, rhs: FieldElem) {
        *self = *self * rhs;
    }
}

// ---------------------------------------------------------------------------

/// A fixed ring embedding GF(2^a) -> GF(2^b), determined by the image of `g`.
///
/// The image is the smallest (by bit pattern) root of the small modulus in the
/// big field, so the embedding is deterministic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Embedding {
    from: FieldCtx,
    to: FieldCtx,
    // images of g^0, g^1, ..., g^(a-1)
    basis_images: Vec<u64>,
}

impl Embedding {
    pub fn new(from: FieldCtx, to: FieldCtx) -> Result<Self, FieldError> {
        if !to.k.is_multiple_of(from.k) {
            return Err(FieldError::NoEmbedding { from: from.k, to: to.k });
        }
        if from == to {
            return Ok(Self::identity(from));
        }
        let root = if from.k == 1 {
            // modulus x + 1, so g = 1
            1
        } else {
            let coeffs: Vec<u64> = (0..=from.k).map(|i| ((from.modulus >> i) & 1) as u64).collect();
            let f = crate::polyrat::Poly::from_raw(to, coeffs);
            let roots = f.split_roots();
            *roots.iter().min().expect("small modulus splits in the big field")
        };
        let mut basis_images = Vec::with_capacity(from.k as usize);
        let mut p = 1u64;
        for _ in 0..from.k {
            basis_images.push(p);
            p = to.mul(p, root);
        }
        Ok(Embedding { from, to, basis_images })
    }

    pub fn identity(ctx: FieldCtx) -> Self {
        let basis_images = (0..ctx.k).map(|i| 1u64 << i).collect();
        Embedding { from: ctx, to: ctx, basis_images }
    }

    pub fn source(&self) -> FieldCtx {
        self.from
    }

    pub fn target(&self) -> FieldCtx {
        self.to
    }

    pub fn apply_raw(&self, a: u64) -> u64 {
        let mut acc = 0;
        let mut a = a;
        let mut i = 0;
        while a != 0 {
            if a & 1 == 1 {
                acc ^= self.basis_images[i];
            }
            a >>= 1;
            i += 1;
        }
        acc
    }

    pub fn apply(&self, a: FieldElem) -> FieldElem {
        assert_eq!(a.ctx, self.from, "embedding applied to an element of the wrong field");
        self.to.elem(self.apply_raw(a.bits))
    }
}

/// Embeds `a` into `big` along the fixed embedding of [`Embedding::new`].
pub fn embed(a: FieldElem, big: FieldCtx) -> Result<FieldElem, FieldError> {
    Ok(Embedding::new(a.ctx, big)?.apply(a))
}

#[cfg(test)]
mod tests {
    use super::*;

    // Irreducibility by trial division against every polynomial of degree <= k/2.
    fn irreducible_by_trial_division(f: u128) -> bool {
        let k = bit_degree(f).unwrap();
        for d in 1..=k / 2 {
            for low in 0..(1u128 << d) {
                let p = (1u128 << d) | low;
                if gf2_rem(f, p) == 0 {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn rabin_matches_trial_division() {
        for k in 1..=11u32 {
            for low in 0..(1u128 << k) {
                let f = (1u128 << k) | low;
                assert_eq!(is_irreducible_gf2(f), irreducible_by_trial_division(f), "{f:#b}");
            }
        }
    }

    #[test]
    fn default_moduli() {
        assert_eq!(default_modulus(1), 0b11);
        assert_eq!(default_modulus(2), 0b111);
        assert_eq!(default_modulus(3), 0b1011);
        assert_eq!(default_modulus(4), 0b10011);
        assert_eq!(default_modulus(8), 0x11b);
        // lexicographic minimality, checked by brute force
        for k in 2..=10 {
            let f = default_modulus(k);
            let top = 1u128 << k;
            for low in (1..(f - top)).step_by(2) {
                assert!(!irreducible_by_trial_division(top | low));
            }
        }
    }

    #[test]
    fn field_make_examples() {
        let f2 = FieldCtx::new(1, None).unwrap();
        assert_eq!(f2.elements().count(), 2);
        assert_eq!(FieldCtx::new(2, None).unwrap().modulus(), 0b111);
        assert_eq!(FieldCtx::new(2, Some(0b101)), Err(FieldError::ReducibleModulus("g^2 + 1".into())));
        assert!(matches!(FieldCtx::new(3, Some(0b111)), Err(FieldError::WrongModulusDegree { .. })));
        assert!(matches!(FieldCtx::new(0, None), Err(FieldError::DegreeOutOfRange { .. })));
        assert!(matches!(FieldCtx::with_cap(9, None, 8), Err(FieldError::DegreeOutOfRange { .. })));
    }

    #[test]
    fn gf4_arithmetic() {
        let f2 = FieldCtx::gf2();
        assert_eq!(f2.one() + f2.one(), f2.zero());
        let f4 = FieldCtx::new(2, None).unwrap();
        let g = f4.generator();
        assert_eq!(g * g, g + f4.one());
        assert_eq!(f4.one().div(g).unwrap(), g + f4.one());
        assert_eq!(g.div(f4.zero()), Err(FieldError::DivisionByZero));
        assert_eq!(g.sqrt(), g + f4.one());
        assert_eq!(f4.zero().sqrt(), f4.zero());
        assert_eq!(f4.one().sqrt(), f4.one());
        assert_eq!(g.to_string(), "g");
        assert_eq!((g + f4.one()).to_string(), "g + 1");
    }

    #[test]
    fn mixed_context_is_an_error() {
        let f4 = FieldCtx::new(2, None).unwrap();
        let f8 = FieldCtx::new(3, None).unwrap();
        assert!(matches!(f4.one().try_add(f8.one()), Err(FieldError::ContextMismatch(..))));
    }

    #[test]
    fn sqrt_exhaustive_small_fields() {
        for k in 1..=8 {
            let f = FieldCtx::new(k, None).unwrap();
            for a in f.elements() {
                let r = a.sqrt();
                assert_eq!(r * r, a);
            }
        }
    }

    #[test]
    fn embeddings() {
        let f2 = FieldCtx::gf2();
        let f4 = FieldCtx::new(2, None).unwrap();
        let f16 = FieldCtx::new(4, None).unwrap();
        assert_eq!(embed(f2.one(), f4).unwrap(), f4.one());
        let r = embed(f4.generator(), f16).unwrap();
        assert_eq!(r * r + r + f16.one(), f16.zero());
        assert!(matches!(embed(f4.one(), FieldCtx::new(3, None).unwrap()), Err(FieldError::NoEmbedding { .. })));

        // composite GF(2) -> GF(4) -> GF(16) agrees with GF(2) -> GF(16), and
        // GF(4) -> GF(16) -> GF(256) is a homomorphism on all of GF(4)
        let f256 = FieldCtx::new(8, None).unwrap();
        let e1 = Embedding::new(f4, f16).unwrap();
        let e2 = Embedding::new(f16, f256).unwrap();
        for a in f2.elements() {
            assert_eq!(embed(embed(a, f4).unwrap(), f16).unwrap(), embed(a, f16).unwrap());
        }
        for a in f4.elements() {
            for b in f4.elements() {
                let img = |x: FieldElem| e2.apply(e1.apply(x));
                assert_eq!(img(a + b), img(a) + img(b));
                assert_eq!(img(a * b), img(a) * img(b));
            }
        }
    }
}
