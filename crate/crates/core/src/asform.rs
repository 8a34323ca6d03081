//! Reduction of Artin-Schreier right-hand sides to odd-only standard form.
//!
//! Replacing `y` by `y + s` changes `h` into `h + s^2 + s`. Every even-exponent
//! term `c u^(2j)` of a principal part (with `u` the inverse local parameter)
//! is removed with `s = sqrt(c) u^j`, which only feeds back into exponent `j`.
//! Working from the top exponent down clears all even exponents.

use thiserror::Error;

use crate::gf2k::{Embedding, FieldCtx, FieldElem};
use crate::polyrat::{partial_fractions, splitting_data, Point, Poly, PolyError, PrincipalPart, RatFun};
use crate::ramdata::Slot;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AsError {
    #[error("the cover is disconnected: h_{} reduces to a constant", slot_name(*.0))]
    DisconnectedCover(Slot),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

pub fn slot_name(s: Slot) -> &'static str {
    match s {
        Slot::Zero => "0",
        Slot::One => "1",
        Slot::Inf => "inf",
    }
}

/// One elimination step: the term `coeff * t^exponent` was removed at `point`,
/// where `t` is the local parameter (`x - q`, or `1/x` at infinity).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubstStep {
    pub point: Point,
    pub exponent: i64,
    pub coeff: FieldElem,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubstRecord {
    /// The new generator is `y + s`.
    pub s: RatFun,
    pub log: Vec<SubstStep>,
}

impl SubstRecord {
    pub fn is_trivial(&self) -> bool {
        self.s.is_zero()
    }
}

// Clears even exponents >= 2 of `c[1..]` (c[j] is the coefficient of u^j),
// returning the s-coefficients (same indexing) and the killed terms.
fn reduce_odd(c: &mut Vec<u64>, ctx: FieldCtx) -> (Vec<u64>, Vec<(usize, u64)>) {
    let mut s = vec![0u64; c.len()];
    let mut killed = Vec::new();
    for j in (2..c.len()).rev() {
        if j % 2 == 0 && c[j] != 0 {
            let r = ctx.sqrt(c[j]);
            killed.push((j, c[j]));
            c[j] = 0;
            c[j / 2] ^= r;
            s[j / 2] ^= r;
        }
    }
    while c.last() == Some(&0) {
        c.pop();
    }
    (s, killed)
}

/// Odd-only representative of `h` modulo `t^2 + t`. `roots` must contain every
/// root of the denominator of `h`.
pub fn canonical_odd_form(h: &RatFun, roots: &[FieldElem]) -> Result<(RatFun, SubstRecord), AsError> {
    let ctx = h.ctx();
    let pf = partial_fractions(h, roots)?;
    let mut log = Vec::new();

    let mut poly = pf.polypart.raw().to_vec();
    let (s_poly, killed) = reduce_odd(&mut poly, ctx);
    for (j, c) in killed {
        log.push(SubstStep { point: Point::Infinity, exponent: -(j as i64), coeff: ctx.elem(c) });
    }
    let mut s = RatFun::from_poly(Poly::from_raw(ctx, s_poly));
    let mut h_red = RatFun::from_poly(Poly::from_raw(ctx, poly));

    for part in &pf.parts {
        // coeffs[j - 1] is the coefficient of u^j
        let mut c = vec![0u64];
        c.extend_from_slice(&part.coeffs);
        let (s_loc, killed) = reduce_odd(&mut c, ctx);
        for (j, coeff) in killed {
            log.push(SubstStep { point: Point::Finite(part.at), exponent: -(j as i64), coeff: ctx.elem(coeff) });
        }
        let reduced = PrincipalPart { at: part.at, coeffs: c.get(1..).unwrap_or(&[]).to_vec() };
        h_red = h_red.add(&reduced.to_ratfun());
        let s_part = PrincipalPart { at: part.at, coeffs: s_loc[1..].to_vec() };
        s = s.add(&s_part.to_ratfun());
    }
    debug_assert_eq!(h.add(&s.square()).add(&s), h_red);
    Ok((h_red, SubstRecord { s, log }))
}

/// True if no principal part (finite or at infinity) has an even exponent >= 2.
pub fn is_odd_form(h: &RatFun, roots: &[FieldElem]) -> Result<bool, AsError> {
    let pf = partial_fractions(h, roots)?;
    let even_poly = pf.polypart.raw().iter().enumerate().any(|(i, &c)| i >= 2 && i % 2 == 0 && c != 0);
    let even_part = pf
        .parts
        .iter()
        .any(|p| p.coeffs.iter().enumerate().any(|(i, &c)| (i + 1) % 2 == 0 && c != 0));
    Ok(!even_poly && !even_part)
}

#[derive(Clone, Debug)]
pub struct StandardTriple {
    pub base: FieldCtx,
    pub ctx: FieldCtx,
    pub embedding: Embedding,
    pub h0s: RatFun,
    pub h1s: RatFun,
    pub hinfs: RatFun,
    pub subs: (SubstRecord, SubstRecord),
    /// Distinct finite poles of the inputs, sorted by bit pattern.
    pub roots: Vec<FieldElem>,
}

impl StandardTriple {
    pub fn get(&self, slot: Slot) -> &RatFun {
        match slot {
            Slot::Zero => &self.h0s,
            Slot::One => &self.h1s,
            Slot::Inf => &self.hinfs,
        }
    }
}

/// Standard form of the pair `(h0, h1)` over the splitting field of their
/// denominators. `max_degree` caps the absolute degree of that field.
pub fn global_standard_form(h0: &RatFun, h1: &RatFun, max_degree: u32) -> Result<StandardTriple, AsError> {
    let base = h0.ctx();
    assert_eq!(base, h1.ctx(), "h0 and h1 over different fields");
    let split = splitting_data(&h0.den().mul(h1.den()), max_degree)?;
    let ctx = split.ext;
    let roots = split.root_points();
    let (h0e, h1e) = (h0.embed(&split.embedding), h1.embed(&split.embedding));
    let (h0s, r0) = canonical_odd_form(&h0e, &roots)?;
    let (h1s, r1) = canonical_odd_form(&h1e, &roots)?;
    let hinfs = h0s.add(&h1s);
    for (slot, h) in [(Slot::Zero, &h0s), (Slot::One, &h1s), (Slot::Inf, &hinfs)] {
        if h.is_constant() {
            return Err(AsError::DisconnectedCover(slot));
        }
    }
    Ok(StandardTriple { base, ctx, embedding: split.embedding, h0s, h1s, hinfs, subs: (r0, r1), roots })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(ctx: FieldCtx) -> RatFun {
        RatFun::x(ctx)
    }

    #[test]
    fn reduction_examples() {
        let ctx = FieldCtx::gf2();
        let zero = ctx.zero();
        let inv_x = x(ctx).inv().unwrap();

        let (h, rec) = canonical_odd_form(&x(ctx).pow(-2).unwrap(), &[zero]).unwrap();
        assert_eq!(h, inv_x);
        assert_eq!(rec.s, inv_x);

        let (h, rec) = canonical_odd_form(&x(ctx).pow(-4).unwrap(), &[zero]).unwrap();
        assert_eq!(h, inv_x);
        assert_eq!(rec.s, x(ctx).pow(-2).unwrap().add(&inv_x));
        assert_eq!(rec.log.len(), 2);

        let h0 = x(ctx).pow(3).unwrap().add(&RatFun::pole_term(ctx, 1, 1, 7));
        let (h, rec) = canonical_odd_form(&h0, &[ctx.one()]).unwrap();
        assert_eq!(h, h0);
        assert!(rec.is_trivial());
    }

    #[test]
    fn standard_form_examples() {
        let ctx = FieldCtx::gf2();
        let t = global_standard_form(&x(ctx).pow(2).unwrap(), &x(ctx).pow(3).unwrap(), 64).unwrap();
        assert_eq!(t.h0s, x(ctx));
        assert_eq!(t.h1s, x(ctx).pow(3).unwrap());
        assert_eq!(t.hinfs, x(ctx).pow(3).unwrap().add(&x(ctx)));

        let inv = x(ctx).inv().unwrap();
        assert_eq!(global_standard_form(&inv, &inv, 64).unwrap_err(), AsError::DisconnectedCover(Slot::Inf));

        let h0 = x(ctx).pow(3).unwrap().add(&x(ctx)).add(&RatFun::pole_term(ctx, 1, 1, 7));
        let h1 = x(ctx).pow(3).unwrap().add(&x(ctx)).add(&x(ctx).pow(-5).unwrap());
        let t = global_standard_form(&h0, &h1, 64).unwrap();
        assert_eq!((t.h0s.clone(), t.h1s.clone()), (h0, h1));
        assert!(t.subs.0.is_trivial() && t.subs.1.is_trivial());
    }

    #[test]
    fn splitting_field_is_used() {
        // 1/(x^2+x+1)^2 needs GF(4)
        let ctx = FieldCtx::gf2();
        let q = RatFun::from_poly(Poly::from_raw(ctx, vec![1, 1, 1]));
        let h0 = q.pow(-2).unwrap();
        let t = global_standard_form(&h0, &x(ctx).pow(3).unwrap(), 64).unwrap();
        assert_eq!(t.ctx.degree(), 2);
        assert_eq!(t.roots.len(), 2);
        assert!(is_odd_form(&t.h0s, &t.roots).unwrap());
        for r in &t.roots {
            assert_eq!(t.h0s.ord_at(*r), -1);
        }
    }
}
