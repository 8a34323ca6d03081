//! V4-covers of the projective line ramified only above infinity.
//!
//! After relabeling, `y0^2 + y0 = h0` and `y1^2 + y1 = h1` with odd degrees
//! `m = deg h0 <= M = deg h1`. Matrices are built in the relabeled frame and
//! then pulled back to the caller's sigma and tau.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::asform::{canonical_odd_form, AsError};
use crate::gf2k::FieldCtx;
use crate::kleinrep::{
    induced_from, multiplicities, rank_profile, standard_module, Decomp, IndecType, KleinModule, RankProfile,
    RepError,
};
use crate::linalg::Matrix;
use crate::polyrat::{Poly, RatFun};
use crate::ramdata::{Slot, Subgroup};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HkgError {
    #[error("both h0 and h1 reduce to constants: the cover is trivial")]
    TrivialCover,
    #[error("h{0} is not a polynomial, so the cover is ramified at a finite point")]
    NotPolynomial(&'static str),
    #[error("h{0} has an even-degree term; reduce it to standard form first")]
    NotStandardForm(&'static str),
    #[error("no polynomial alpha meets the valuation certificate: {0}")]
    AlphaSearchFailed(String),
    #[error("basis range violated: {0}")]
    BasisRangeViolation(String),
    #[error("this operation needs a V4 stabilizer, not a cyclic one")]
    NotKlein,
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error(transparent)]
    As(#[from] AsError),
}

/// Normalized data of a V4 cover. `twist[i]` is the original slot of the new slot `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HkgData {
    pub h0: Poly,
    pub h1: Poly,
    pub m: u32,
    pub big_m: u32,
    pub twist: [Slot; 3],
    pub mprime: u32,
    pub big_mprime: u32,
    pub mdd: u32,
    pub m0: u32,
    pub genus: u32,
}

impl HkgData {
    fn new(h0: Poly, h1: Poly, twist: [Slot; 3]) -> HkgData {
        let (m, big_m) = (h0.deg() as u32, h1.deg() as u32);
        HkgData {
            h0,
            h1,
            m,
            big_m,
            twist,
            mprime: (m - 1) / 2,
            big_mprime: (big_m - 1) / 2,
            mdd: (big_m - m) / 2,
            m0: (2 * big_m - m - 1) / 4,
            genus: (m + 2 * big_m - 3) / 2,
        }
    }

    pub fn ctx(&self) -> FieldCtx {
        self.h0.ctx()
    }

    /// Original label of the last nontrivial filtration group.
    pub fn bprime(&self) -> Subgroup {
        if self.m == self.big_m {
            Subgroup::V4
        } else {
            Subgroup::from_slot(self.twist[0])
        }
    }

    /// Carries a decomposition from the relabeled frame back to the original labels.
    pub fn untwist(&self, d: &Decomp) -> Decomp {
        let n = |s: Slot| IndecType::n_type(Subgroup::from_slot(s)).unwrap();
        d.relabel(|t| match t {
            IndecType::N0 => n(self.twist[0]),
            IndecType::N1 => n(self.twist[1]),
            IndecType::Ninf => n(self.twist[2]),
            t => t,
        })
    }

    /// Original (sigma, tau) from actions of the relabeled (sigma', tau').
    /// The generator of `H_i` acts as tau' on the new slot 0, as sigma' on the
    /// new slot 1 and as their product on the new slot inf.
    pub fn untwist_module(&self, s: &Matrix, t: &Matrix) -> Result<KleinModule, RepError> {
        let st = s.mul(t);
        let gen_of = |orig: Slot| {
            let i = self.twist.iter().position(|&x| x == orig).unwrap();
            match i {
                0 => t.clone(),
                1 => s.clone(),
                _ => st.clone(),
            }
        };
        KleinModule::new(gen_of(Slot::One), gen_of(Slot::Zero))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HkgCase {
    Klein(HkgData),
    /// Only one of the three quotient covers ramifies trivially; the stabilizer is `H_label`.
    Cyclic { label: Subgroup, big_m: u32, h: Poly },
}

fn pole(h: &Poly) -> u32 {
    h.deg().max(0) as u32
}

fn check_standard(h: &Poly, name: &'static str) -> Result<(), HkgError> {
    if h.raw().iter().enumerate().any(|(i, &c)| i >= 2 && i % 2 == 0 && c != 0) {
        return Err(HkgError::NotStandardForm(name));
    }
    Ok(())
}

/// Chooses the slot of least pole order as the new slot 0 and the first
/// other slot of largest pole order as the new slot 1.
pub fn hkg_normalize(h0: &Poly, h1: &Poly) -> Result<HkgCase, HkgError> {
    check_standard(h0, "0")?;
    check_standard(h1, "1")?;
    let hs = [h0.clone(), h1.clone(), h0.add(h1)];
    let poles = [pole(&hs[0]), pole(&hs[1]), pole(&hs[2])];
    let constant: Vec<usize> = (0..3).filter(|&i| poles[i] == 0).collect();
    match constant.len() {
        0 => {}
        1 => {
            let i = constant[0];
            let other = (i + 1) % 3;
            return Ok(HkgCase::Cyclic {
                label: Subgroup::from_slot(Slot::from_index(i)),
                big_m: poles[other],
                h: hs[other].clone(),
            });
        }
        _ => return Err(HkgError::TrivialCover),
    }
    let min = *poles.iter().min().unwrap();
    let max = *poles.iter().max().unwrap();
    let (a, b) = if min == max {
        (0, 1)
    } else {
        let a = (0..3).find(|&i| poles[i] == min).unwrap();
        (a, (0..3).find(|&i| i != a && poles[i] == max).unwrap())
    };
    let c = 3 - a - b;
    let twist = [Slot::from_index(a), Slot::from_index(b), Slot::from_index(c)];
    Ok(HkgCase::Klein(HkgData::new(hs[a].clone(), hs[b].clone(), twist)))
}

/// Alpha together with the data certifying `ord(y1 + alpha y0 + beta) = m - 2M`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlphaResult {
    pub alpha: Poly,
    pub beta: Poly,
    /// Degree of `A = h1 + alpha^2 h0 + beta^2 + beta`; `None` when `A = 0`.
    pub deg_a: Option<i64>,
    /// Degree of `B = alpha^2 + alpha`.
    pub deg_b: i64,
}

impl AlphaResult {
    /// `4 deg A` is divisible by 4 while `4 deg B + 2m` is 2 mod 4, so the
    /// valuation is the larger of the two pole contributions.
    pub fn certifies(&self, d: &HkgData) -> bool {
        let rhs = 4 * self.deg_b + 2 * d.m as i64;
        self.deg_b == (d.big_m - d.m) as i64 && self.deg_a.is_none_or(|a| 4 * a < rhs)
    }

    /// Order at the point above infinity (uniformizer order 1, `ord x = -4`).
    pub fn valuation(&self, d: &HkgData) -> i64 {
        -(4 * self.deg_b + 2 * d.m as i64) / 2
    }
}

type Laurent = BTreeMap<i64, u64>;

fn l_add_term(a: &mut Laurent, e: i64, c: u64) {
    if c == 0 {
        return;
    }
    let v = a.entry(e).or_insert(0);
    *v ^= c;
    if *v == 0 {
        a.remove(&e);
    }
}

fn l_add_poly_shifted(a: &mut Laurent, ctx: FieldCtx, p: &Poly, shift: i64, scale: u64) {
    for (i, &c) in p.raw().iter().enumerate() {
        l_add_term(a, i as i64 + shift, ctx.mul(c, scale));
    }
}

fn poly_of(ctx: FieldCtx, l: &Laurent) -> Poly {
    let n = l.keys().next_back().map_or(0, |&e| e.max(-1) + 1) as usize;
    let mut c = vec![0u64; n];
    for (&e, &v) in l.range(0..) {
        c[e as usize] = v;
    }
    Poly::from_raw(ctx, c)
}

// Kills the terms of `A` in degrees >= thr from the top down. With
// `laurent = false` an odd term below degree m ends the search.
fn greedy(d: &HkgData, alpha: &mut Laurent, beta: &mut Laurent, a: &mut Laurent, laurent: bool) -> bool {
    let ctx = d.ctx();
    let thr = (d.big_m - d.mprime) as i64;
    let lc0 = d.h0.lead();
    let m = d.m as i64;
    while let Some((&deg, &c)) = a.iter().next_back() {
        if deg < thr {
            break;
        }
        if deg % 2 == 0 {
            let r = ctx.sqrt(c);
            let j = deg / 2;
            l_add_term(beta, j, r);
            l_add_term(a, deg, c);
            l_add_term(a, j, r);
        } else {
            let e2 = deg - m;
            if e2 < 0 && !laurent {
                return false;
            }
            let r = ctx.sqrt(ctx.div(c, lc0).unwrap());
            l_add_term(alpha, e2 / 2, r);
            l_add_poly_shifted(a, ctx, &d.h0, e2, ctx.square(r));
        }
    }
    true
}

fn certificate(d: &HkgData, alpha: &Poly) -> AlphaResult {
    let ctx = d.ctx();
    let mut a = Laurent::new();
    let mut beta = Laurent::new();
    l_add_poly_shifted(&mut a, ctx, &d.h1, 0, 1);
    l_add_poly_shifted(&mut a, ctx, &alpha.square().mul(&d.h0), 0, 1);
    // even terms of A at or above the threshold are removed by beta
    let thr = (d.big_m - d.mprime) as i64;
    while let Some((&deg, &c)) = a.iter().rev().find(|(&e, _)| e >= thr && e % 2 == 0) {
        let r = ctx.sqrt(c);
        l_add_term(&mut beta, deg / 2, r);
        l_add_term(&mut a, deg, c);
        l_add_term(&mut a, deg / 2, r);
    }
    let b = alpha.square().add(alpha);
    AlphaResult {
        alpha: alpha.clone(),
        beta: poly_of(ctx, &beta),
        deg_a: a.keys().next_back().copied(),
        deg_b: b.deg(),
    }
}

/// Finds a polynomial alpha of degree `(M - m) / 2` with the certificate above.
pub fn compute_alpha(d: &HkgData) -> Result<AlphaResult, HkgError> {
    let ctx = d.ctx();
    let start = || {
        let mut a = Laurent::new();
        l_add_poly_shifted(&mut a, ctx, &d.h1, 0, 1);
        a
    };
    let (mut alpha, mut beta, mut a) = (Laurent::new(), Laurent::new(), start());
    greedy(d, &mut alpha, &mut beta, &mut a, true);
    let res = certificate(d, &poly_of(ctx, &alpha));
    if res.certifies(d) {
        return Ok(res);
    }
    let (mut alpha, mut beta, mut a) = (Laurent::new(), Laurent::new(), start());
    if greedy(d, &mut alpha, &mut beta, &mut a, false) {
        let res = certificate(d, &poly_of(ctx, &alpha));
        if res.certifies(d) {
            return Ok(res);
        }
    }
    Err(HkgError::AlphaSearchFailed(format!(
        "(m, M) = ({}, {}): the polynomial part of the Laurent solution leaves deg A = {:?} with deg B = {}",
        d.m, d.big_m, res.deg_a, res.deg_b
    )))
}

/// Counts of the three families of de Rham basis blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DrBlocks {
    pub counts: (u32, u32, u32),
    pub module: KleinModule,
}

/// De Rham cohomology as a module: `m'` blocks of type M31, `m'` of type M32
/// and `M - m` of type N0, all in the relabeled frame, then pulled back.
pub fn dr_matrices(d: &HkgData) -> Result<DrBlocks, HkgError> {
    let ctx = d.ctx();
    let mut blocks = Vec::new();
    let counts = (d.mprime, d.mprime, d.big_m - d.m);
    for (t, n) in [(IndecType::M31, counts.0), (IndecType::M32, counts.1), (IndecType::N0, counts.2)] {
        for _ in 0..n {
            blocks.push(standard_module(t, ctx));
        }
    }
    let sum = KleinModule::direct_sum(ctx, &blocks);
    let module = d.untwist_module(sum.s(), sum.t())?;
    debug_assert_eq!(module.dim(), 2 * d.genus as usize);
    Ok(DrBlocks { counts, module })
}

/// Closed-form decomposition of de Rham cohomology.
pub fn dr_formula(case: &HkgCase) -> Decomp {
    match case {
        HkgCase::Klein(d) => {
            let mut out = Decomp::of(&[(IndecType::M31, d.mprime as u64), (IndecType::M32, d.mprime as u64)]);
            if let Some(n) = IndecType::n_type(d.bprime()) {
                out.add(n, (d.big_m - d.m) as u64);
            }
            out
        }
        HkgCase::Cyclic { label, big_m, .. } => {
            Decomp::of(&[(IndecType::n_type(*label).unwrap(), (*big_m - 1) as u64)])
        }
    }
}

/// The module whose decomposition the formula predicts, built independently.
pub fn dr_module(case: &HkgCase) -> Result<KleinModule, HkgError> {
    match case {
        HkgCase::Klein(d) => Ok(dr_matrices(d)?.module),
        HkgCase::Cyclic { label, big_m, h } => {
            let w = Matrix::identity(h.ctx(), (*big_m - 1) as usize);
            Ok(induced_from(*label, &w)?)
        }
    }
}

/// Holomorphic differentials in the basis `x^i dx` (i <= M - M0 - 2),
/// `y0 x^i dx` (i <= M0 - 1), `(y1 + alpha y0) x^i dx` (i <= m' - 1).
pub fn h0_matrices(d: &HkgData, a: &AlphaResult) -> Result<KleinModule, HkgError> {
    let ctx = d.ctx();
    let np = (d.big_m - d.m0 - 1) as usize;
    let ny = d.m0 as usize;
    let nw = d.mprime as usize;
    let n = np + ny + nw;
    if n != d.genus as usize {
        return Err(HkgError::BasisRangeViolation(format!("basis has {n} elements but the genus is {}", d.genus)));
    }
    let mut s = Matrix::identity(ctx, n);
    let mut t = Matrix::identity(ctx, n);
    for i in 0..ny {
        s.set(i, np + i, 1);
    }
    for i in 0..nw {
        let col = np + ny + i;
        t.set(i, col, 1);
        for (j, &c) in a.alpha.raw().iter().enumerate() {
            if c == 0 {
                continue;
            }
            if i + j >= np {
                return Err(HkgError::BasisRangeViolation(format!(
                    "alpha x^{i} has degree {} outside the polynomial block",
                    i + j
                )));
            }
            s.set(i + j, col, c);
        }
    }
    Ok(d.untwist_module(&s, &t)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct H0Summary {
    pub status: &'static str,
    pub dim: usize,
    pub rank_profile: Option<[usize; 7]>,
    pub decomp: Option<Decomp>,
    pub detail: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct HkgReport {
    pub field: String,
    pub h0: String,
    pub h1: String,
    pub stabilizer: Subgroup,
    pub m: u32,
    #[serde(rename = "M")]
    pub big_m: u32,
    pub bprime: Subgroup,
    pub genus: u32,
    pub twist: [&'static str; 3],
    pub alpha: Option<String>,
    pub valuation: Option<i64>,
    pub formula: Decomp,
    pub oracle: Option<Decomp>,
    pub agree: Option<bool>,
    pub h0_module: Option<H0Summary>,
    pub notes: Vec<String>,
}

fn profile_array(p: &RankProfile) -> [usize; 7] {
    let t = p.as_tuple();
    [t.0, t.1, t.2, t.3, t.4, t.5, t.6]
}

fn summarize_h0(d: &HkgData) -> H0Summary {
    let alpha = match compute_alpha(d) {
        Ok(a) => a,
        Err(e) => {
            return H0Summary { status: "unavailable", dim: d.genus as usize, rank_profile: None, decomp: None, detail: Some(e.to_string()) }
        }
    };
    match h0_matrices(d, &alpha) {
        Ok(v) => {
            let profile = Some(profile_array(&rank_profile(&v)));
            match multiplicities(&v) {
                Ok(dec) => H0Summary { status: "decomposed", dim: v.dim(), rank_profile: profile, decomp: Some(dec), detail: None },
                Err(RepError::OutsideClassification(msg)) => {
                    H0Summary { status: "outside", dim: v.dim(), rank_profile: profile, decomp: None, detail: Some(msg) }
                }
                Err(e) => H0Summary { status: "error", dim: v.dim(), rank_profile: profile, decomp: None, detail: Some(e.to_string()) },
            }
        }
        Err(e) => H0Summary { status: "error", dim: d.genus as usize, rank_profile: None, decomp: None, detail: Some(e.to_string()) },
    }
}

/// Reduces `h0`, `h1` (polynomials) to standard form and reports the local
/// structure. With `oracle` the matrices are decomposed and compared.
pub fn hkg_report(h0: &RatFun, h1: &RatFun, oracle: bool) -> Result<HkgReport, HkgError> {
    let p0 = h0.as_poly().ok_or(HkgError::NotPolynomial("0"))?;
    let p1 = h1.as_poly().ok_or(HkgError::NotPolynomial("1"))?;
    let (r0, _) = canonical_odd_form(&RatFun::from_poly(p0.clone()), &[])?;
    let (r1, _) = canonical_odd_form(&RatFun::from_poly(p1.clone()), &[])?;
    let (q0, q1) = (r0.as_poly().unwrap().clone(), r1.as_poly().unwrap().clone());
    let mut notes = Vec::new();
    if &q0 != p0 || &q1 != p1 {
        notes.push(format!("reduced to standard form: h0 = {q0}, h1 = {q1}"));
    }
    let case = hkg_normalize(&q0, &q1)?;
    let formula = dr_formula(&case);
    let (oracle_d, agree) = if oracle {
        let od = multiplicities(&dr_module(&case)?)?;
        (Some(od), Some(od == formula))
    } else {
        (None, None)
    };
    let mut report = HkgReport {
        field: h0.ctx().to_string(),
        h0: q0.to_string(),
        h1: q1.to_string(),
        stabilizer: Subgroup::V4,
        m: 1,
        big_m: 1,
        bprime: Subgroup::V4,
        genus: 0,
        twist: ["0", "1", "inf"],
        alpha: None,
        valuation: None,
        formula,
        oracle: oracle_d,
        agree,
        h0_module: None,
        notes,
    };
    match &case {
        HkgCase::Klein(d) => {
            report.m = d.m;
            report.big_m = d.big_m;
            report.bprime = d.bprime();
            report.genus = d.genus;
            report.twist = d.twist.map(crate::asform::slot_name);
            if let Ok(a) = compute_alpha(d) {
                report.alpha = Some(a.alpha.to_string());
                report.valuation = Some(a.valuation(d));
            }
            report.h0_module = Some(summarize_h0(d));
        }
        HkgCase::Cyclic { label, big_m, .. } => {
            report.stabilizer = *label;
            report.bprime = *label;
            report.big_m = *big_m;
            report.genus = *big_m - 1;
            report.notes.push(format!(
                "h{} is constant: the cover is induced from a Z/2-cover of genus {}",
                crate::asform::slot_name(label.slot().unwrap()),
                (*big_m - 1) / 2
            ));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kleinrep::{iso_check, IsoResult};
    use crate::polyrat::DEFAULT_SEED;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn mono(ctx: FieldCtx, c: u64, d: usize) -> Poly {
        Poly::monomial(ctx, c, d)
    }

    fn klein(h0: &Poly, h1: &Poly) -> HkgData {
        match hkg_normalize(h0, h1).unwrap() {
            HkgCase::Klein(d) => d,
            c => panic!("expected a V4 case, got {c:?}"),
        }
    }

    #[test]
    fn normalization_examples() {
        let k = FieldCtx::gf2();
        let d = klein(&mono(k, 1, 9), &mono(k, 1, 15));
        assert_eq!((d.m, d.big_m, d.twist), (9, 15, [Slot::Zero, Slot::One, Slot::Inf]));
        assert_eq!((d.mprime, d.big_mprime, d.mdd, d.m0, d.genus), (4, 7, 3, 5, 18));

        let d = klein(&mono(k, 1, 15), &mono(k, 1, 9));
        assert_eq!((d.m, d.big_m, d.twist), (9, 15, [Slot::One, Slot::Zero, Slot::Inf]));

        let x3 = mono(k, 1, 3);
        let d = klein(&x3, &x3.add(&Poly::x(k)));
        assert_eq!((d.m, d.big_m), (1, 3));
        assert_eq!(d.twist[0], Slot::Inf);

        let c = hkg_normalize(&mono(k, 1, 21), &mono(k, 1, 21)).unwrap();
        assert_eq!(dr_formula(&c), Decomp::of(&[(IndecType::Ninf, 20)]));
        assert_eq!(hkg_normalize(&Poly::one(k), &Poly::zero(k)), Err(HkgError::TrivialCover));
        assert_eq!(hkg_normalize(&mono(k, 1, 4), &x3), Err(HkgError::NotStandardForm("0")));
    }

    #[test]
    fn alpha_examples() {
        let k = FieldCtx::gf2();
        let d = klein(&mono(k, 1, 9), &mono(k, 1, 15));
        let a = compute_alpha(&d).unwrap();
        assert_eq!(a.alpha, mono(k, 1, 3));
        assert_eq!((a.deg_a, a.deg_b), (None, 6));
        assert_eq!(a.valuation(&d), -21);

        let d = klein(&Poly::x(k), &mono(k, 1, 3));
        let a = compute_alpha(&d).unwrap();
        assert_eq!(a.alpha, Poly::x(k));
        assert_eq!(a.valuation(&d), -5);

        let gf4 = FieldCtx::new(2, None).unwrap();
        let g = gf4.generator().bits();
        let d = klein(&mono(gf4, 1, 3), &mono(gf4, g, 3));
        assert_eq!((d.m, d.big_m, d.bprime()), (3, 3, Subgroup::V4));
        let a = compute_alpha(&d).unwrap();
        assert_eq!(a.alpha.deg(), 0);
        assert!(a.certifies(&d));
    }

    #[test]
    fn dr_examples() {
        let k = FieldCtx::gf2();
        let d = klein(&mono(k, 1, 9), &mono(k, 1, 15));
        let b = dr_matrices(&d).unwrap();
        assert_eq!(b.counts, (4, 4, 6));
        assert_eq!(b.module.dim(), 36);
        let f = dr_formula(&HkgCase::Klein(d.clone()));
        assert_eq!(f, Decomp::of(&[(IndecType::N0, 6), (IndecType::M31, 4), (IndecType::M32, 4)]));
        assert_eq!(multiplicities(&b.module).unwrap(), f);

        // swapped inputs: the N-type follows the label of the smaller pole
        let d = klein(&mono(k, 1, 15), &mono(k, 1, 9));
        let f = dr_formula(&HkgCase::Klein(d.clone()));
        assert_eq!(f.get(IndecType::N1), 6);
        assert_eq!(multiplicities(&dr_matrices(&d).unwrap().module).unwrap(), f);

        let d = klein(&Poly::x(k), &mono(k, 1, 7));
        assert_eq!(dr_matrices(&d).unwrap().module.dim(), 12);
        assert_eq!(dr_formula(&HkgCase::Klein(d)), Decomp::of(&[(IndecType::N0, 6)]));
    }

    #[test]
    fn holomorphic_examples() {
        let k = FieldCtx::gf2();
        let d = klein(&mono(k, 1, 9), &mono(k, 1, 15));
        let a = compute_alpha(&d).unwrap();
        let v = h0_matrices(&d, &a).unwrap();
        assert_eq!(v.dim(), 18);
        let fixed = v.s().add_identity().vstack(&v.t().add_identity()).nullity();
        assert!(fixed >= 9);

        // another admissible alpha gives an isomorphic module
        let alt = certificate(&d, &mono(k, 1, 3).add(&Poly::one(k)));
        assert!(alt.certifies(&d));
        let w = h0_matrices(&d, &alt).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
        assert!(matches!(iso_check(&v, &w, &mut rng).unwrap(), IsoResult::Isomorphic(_)));
    }

    #[test]
    fn report_examples() {
        let k = FieldCtx::gf2();
        let r = |a: usize, b: usize| {
            hkg_report(&RatFun::from_poly(mono(k, 1, a)), &RatFun::from_poly(mono(k, 1, b)), true).unwrap()
        };
        let rep = r(9, 15);
        assert_eq!(rep.genus, 18);
        assert_eq!(rep.agree, Some(true));
        assert_eq!(rep.valuation, Some(-21));

        let rep = r(3, 5);
        assert_eq!(rep.formula, Decomp::of(&[(IndecType::N0, 2), (IndecType::M31, 1), (IndecType::M32, 1)]));
        assert_eq!((rep.genus, rep.formula.dim()), (5, 10));

        let rep = r(21, 21);
        assert_eq!(rep.formula, Decomp::of(&[(IndecType::Ninf, 20)]));
        assert_eq!(rep.agree, Some(true));
    }
}
