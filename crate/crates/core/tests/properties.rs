use klein_derham::asform::AsError;
use klein_derham::exprparse::parse_expr;
use klein_derham::gf2k::FieldCtx;
use klein_derham::globaldecomp::{branch_analysis, h1dr_abstract, h1dr_global, GlobalError, GlobalOptions};
use klein_derham::hkgbasis::{compute_alpha, dr_formula, h0_matrices, hkg_normalize, HkgCase, HkgError};
use klein_derham::kleinrep::{multiplicities, rank_profile, Decomp, IndecType};
use klein_derham::linalg::Matrix;
use klein_derham::polyrat::{partial_fractions, poly_factor, Poly, RatFun};
use klein_derham::ramdata::{classify_point, genus_rh, BranchPoint, BranchTable, Location, Subgroup};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn field(k: u32) -> FieldCtx {
    FieldCtx::new(k, None).unwrap()
}

fn poly_strategy(k: u32, max_deg: usize) -> impl Strategy<Value = Poly> {
    let mask = (1u64 << k) - 1;
    prop::collection::vec(any::<u64>(), 0..=max_deg + 1)
        .prop_map(move |c| Poly::from_raw(field(k), c.into_iter().map(|a| a & mask).collect()))
}

/// Standard-form polynomial of exact odd degree `deg` with leading coefficient `lead`.
fn standard_poly(ctx: FieldCtx, deg: u32, lead: u64, coeffs: &[u64]) -> Poly {
    let mut c = vec![0u64; deg as usize + 1];
    c[0] = coeffs[0] & ctx.mask();
    for i in (1..deg as usize).step_by(2) {
        c[i] = coeffs[i] & ctx.mask();
    }
    c[deg as usize] = lead;
    Poly::from_raw(ctx, c)
}

fn odd(max: u32) -> impl Strategy<Value = u32> {
    (0..=(max - 1) / 2).prop_map(|i| 2 * i + 1)
}

/// Rational function over GF(4) with poles at up to four points (infinity included via the polynomial part).
fn cover_function() -> impl Strategy<Value = RatFun> {
    (
        prop::collection::vec((0u64..4, 1u32..=9, 1u64..4), 0..=3),
        0usize..=9,
        prop::collection::vec(0u64..4, 10),
    )
        .prop_map(|(poles, deg, coeffs)| {
            let ctx = field(2);
            let mut c = coeffs;
            c.truncate(deg + 1);
            let mut h = RatFun::from_poly(Poly::from_raw(ctx, c));
            for (q, order, lead) in poles {
                h = h.add(&RatFun::pole_term(ctx, lead, q, order));
            }
            h
        })
}

fn swap01(t: IndecType) -> IndecType {
    match t {
        IndecType::N0 => IndecType::N1,
        IndecType::N1 => IndecType::N0,
        t => t,
    }
}

fn swap1inf(t: IndecType) -> IndecType {
    match t {
        IndecType::N1 => IndecType::Ninf,
        IndecType::Ninf => IndecType::N1,
        t => t,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms(k in 1u32..=12, a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let f = field(k);
        let (a, b, c) = (a & f.mask(), b & f.mask(), c & f.mask());
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.square(f.sqrt(a)), a);
        if a != 0 {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        }
        prop_assert!(f.trace(a) <= 1);
    }

    #[test]
    fn factorization_multiplies_back(k in 1u32..=3, p in poly_strategy(3, 14)) {
        let mask = (1u64 << k) - 1;
        let p = Poly::from_raw(field(k), p.raw().iter().map(|c| c & mask).collect());
        prop_assume!(!p.is_zero());
        let fl = poly_factor(&p).unwrap();
        prop_assert_eq!(fl.product(), p);
    }

    #[test]
    fn parse_print_round_trip(num in poly_strategy(2, 8), den in poly_strategy(2, 5)) {
        prop_assume!(!den.is_zero());
        let h = RatFun::new(num, den).unwrap();
        let back = parse_expr(&h.to_string(), h.ctx()).unwrap();
        prop_assert_eq!(back, h);
    }

    #[test]
    fn partial_fractions_reassemble(h in cover_function()) {
        let roots: Vec<_> = (0..4).map(|q| field(2).elem(q)).collect();
        let pf = partial_fractions(&h, &roots).unwrap();
        prop_assert_eq!(pf.reassemble(), h);
    }

    #[test]
    fn classification_gives_integral_genus(a in odd(31), b in odd(31)) {
        // two equal poles and a smaller third, in every slot arrangement
        let (lo, hi) = (a.min(b) as i64, a.max(b) as i64);
        for ords in [[-lo, -hi, -hi], [-hi, -lo, -hi], [-hi, -hi, -lo], [0, -hi, -hi]] {
            let t = classify_point(ords[0], ords[1], ords[2]).unwrap().unwrap();
            let p = BranchPoint::from_local(Location::Infinity, &t);
            let expected_d = if ords[0] == 0 { hi + 1 } else { lo + 2 * hi + 3 };
            prop_assert_eq!(p.d as i64, expected_d);
            // two such points over the line always give an integral genus
            genus_rh(&BranchTable { g_y: 0, entries: vec![p.clone(), p] }).unwrap();
        }
    }

    #[test]
    fn multiplicities_round_trip(counts in prop::array::uniform7(0u64..3), k in 1u32..=2, seed in any::<u64>()) {
        let d = Decomp(counts);
        prop_assume!(!d.is_empty() && d.dim() <= 24);
        let ctx = field(k);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = Matrix::random_invertible(ctx, d.dim() as usize, &mut rng);
        let v = d.module(ctx).change_basis(&p);
        prop_assert_eq!(multiplicities(&v).unwrap(), d);
        prop_assert_eq!(rank_profile(&v), rank_profile(&d.module(ctx)));
    }

    #[test]
    fn alpha_certificate(m in odd(15), extra in 0u32..=7, k in 1u32..=2, lead in 1u64..4, coeffs in prop::collection::vec(any::<u64>(), 32)) {
        let big_m = (m + 2 * extra).min(15);
        let ctx = field(k);
        let lead = if k == 1 { 1 } else { lead };
        prop_assume!(m < big_m || lead != 1);
        let h0 = standard_poly(ctx, m, 1, &coeffs);
        let h1 = standard_poly(ctx, big_m, lead, &coeffs[16..]);
        let HkgCase::Klein(d) = hkg_normalize(&h0, &h1).unwrap() else { panic!("cyclic case") };
        match compute_alpha(&d) {
            Ok(a) => {
                prop_assert!(a.certifies(&d));
                prop_assert_eq!(a.alpha.deg(), d.mdd as i64);
                prop_assert_eq!(a.valuation(&d), d.m as i64 - 2 * d.big_m as i64);
                let v = h0_matrices(&d, &a).unwrap();
                prop_assert_eq!(v.dim(), d.genus as usize);
            }
            // a polynomial alpha can only be blocked by an odd term strictly between M - m' and m
            Err(HkgError::AlphaSearchFailed(_)) => prop_assert!(d.big_m + 2 <= d.m + d.mprime),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }

    #[test]
    fn untwisting_only_moves_n_types(m in odd(15), extra in 0u32..=7, perm in 0usize..6, coeffs in prop::collection::vec(any::<u64>(), 32)) {
        let big_m = (m + 2 * extra).min(15);
        prop_assume!(m < big_m);
        let ctx = field(1);
        let a = standard_poly(ctx, m, 1, &coeffs);
        let b = standard_poly(ctx, big_m, 1, &coeffs[16..]);
        let ab = a.add(&b);
        let pres = [(&a, &b), (&b, &a), (&a, &ab), (&ab, &a), (&b, &ab), (&ab, &b)];
        let (h0, h1) = pres[perm];
        let case = hkg_normalize(h0, h1).unwrap();
        let HkgCase::Klein(d) = &case else { panic!("cyclic case") };
        let f = dr_formula(&case);
        prop_assert_eq!(f.dim(), 2 * d.genus as u64);
        for t in [IndecType::Triv, IndecType::Reg, IndecType::M31, IndecType::M32] {
            prop_assert_eq!(f.get(t), d.untwist(&f).get(t));
        }
        let n: u64 = [IndecType::N0, IndecType::N1, IndecType::Ninf].iter().map(|&t| f.get(t)).sum();
        prop_assert_eq!(n, (big_m - m) as u64);
        // the N-type names the slot that carries the smaller pole
        let slot = if h0 == &a { Subgroup::H0 } else if h1 == &a { Subgroup::H1 } else { Subgroup::Hinf };
        prop_assert_eq!(f.get(IndecType::n_type(slot).unwrap()), (big_m - m) as u64);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn global_reports_are_consistent(h0 in cover_function(), h1 in cover_function()) {
        let opts = GlobalOptions { cross_check: true, ..GlobalOptions::default() };
        let r = match h1dr_global(&h0, &h1, &opts) {
            Ok(r) => r,
            Err(GlobalError::As(AsError::DisconnectedCover(_))) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        prop_assert_eq!(r.dim, 2 * r.genus as u64);
        prop_assert_eq!(r.h1dr.dual(), r.h1dr);
        prop_assert!(r.all_passed());

        let swapped = h1dr_global(&h1, &h0, &opts).unwrap();
        prop_assert_eq!(swapped.h1dr, r.h1dr.relabel(swap01));
        let sum = h0.add(&h1);
        let rotated = h1dr_global(&h0, &sum, &opts).unwrap();
        prop_assert_eq!(rotated.h1dr, r.h1dr.relabel(swap1inf));

        let (_, table) = branch_analysis(&h0, &h1, 64).unwrap();
        let abs = h1dr_abstract(&table, true, h0.ctx()).unwrap();
        prop_assert_eq!(abs.h1dr, r.h1dr);
    }
}

#[test]
fn abstract_tables_have_even_dimension() {
    // every admissible single V4 point over a base of genus 0..2
    for g_y in 0..=2 {
        for m in (1..=11).step_by(2) {
            for big_m in (m..=11).step_by(2) {
                let bprimes = if m == big_m { vec![Subgroup::V4] } else { Subgroup::ORDER2.to_vec() };
                for bp in bprimes {
                    let p = BranchPoint::new(Location::Named("P".into()), Subgroup::V4, bp, m, big_m).unwrap();
                    let r = h1dr_abstract(&BranchTable { g_y, entries: vec![p] }, true, field(1)).unwrap();
                    assert_eq!(r.dim, 2 * r.genus as u64);
                }
            }
        }
    }
}
