//! Global decomposition of de Rham cohomology of a V4-cover.
//!
//! The answer is assembled from the base genus, the branch class counts (which
//! determine `I_{X/Y}`) and a local term for every branch point.

use serde::Serialize;
use thiserror::Error;

use crate::asform::{global_standard_form, AsError, StandardTriple};
use crate::gf2k::FieldCtx;
use crate::hkgbasis::{dr_formula, dr_module, hkg_normalize, HkgError};
use crate::kleinrep::{multiplicities, Decomp, IndecType, RepError};
use crate::polyrat::{partial_fractions, Poly, PolyError, RatFun};
use crate::ramdata::{classify_point, genus_rh, BranchPoint, BranchTable, Location, RamError, Subgroup};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GlobalError {
    #[error(transparent)]
    As(#[from] AsError),
    #[error(transparent)]
    Ram(#[from] RamError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("no case applies: {0}")]
    NoCaseMatches(String),
    #[error("dimension mismatch: the decomposition has dimension {dim} but 2g = {two_g}")]
    DimensionMismatch { dim: u64, two_g: u64 },
    #[error("abstract branch data needs condition (B) to be asserted")]
    ConditionBNotAsserted,
    #[error("local check at {0} failed: {1}")]
    LocalCheck(String, String),
    #[error(transparent)]
    Hkg(#[from] HkgError),
    #[error(transparent)]
    Rep(#[from] RepError),
}

/// Which shape `I_{X/Y}` takes.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CaseLabel {
    Case1,
    Case2,
    /// `B(V4)` and `B(H_a)` are empty; the payload is `H_a`.
    Case3(Subgroup),
}

impl std::fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CaseLabel::Case1 => f.write_str("Case1"),
            CaseLabel::Case2 => f.write_str("Case2"),
            CaseLabel::Case3(a) => write!(f, "Case3({a})"),
        }
    }
}

impl Serialize for CaseLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Standard form plus the ramified points: finite ones by bit pattern, then infinity.
pub fn branch_analysis(h0: &RatFun, h1: &RatFun, max_degree: u32) -> Result<(StandardTriple, BranchTable), GlobalError> {
    let triple = global_standard_form(h0, h1, max_degree)?;
    let mut entries = Vec::new();
    let mut roots = triple.roots.clone();
    roots.sort_by_key(|r| r.bits());
    for q in roots {
        let ords = [triple.h0s.ord_at(q), triple.h1s.ord_at(q), triple.hinfs.ord_at(q)];
        if let Some(t) = classify_point(ords[0], ords[1], ords[2])? {
            entries.push(BranchPoint::from_local(Location::Finite(q), &t));
        }
    }
    let ords = [triple.h0s.ord_at_infinity(), triple.h1s.ord_at_infinity(), triple.hinfs.ord_at_infinity()];
    if let Some(t) = classify_point(ords[0], ords[1], ords[2])? {
        entries.push(BranchPoint::from_local(Location::Infinity, &t));
    }
    Ok((triple, BranchTable { g_y: 0, entries }))
}

pub fn detect_case(table: &BranchTable) -> Result<CaseLabel, GlobalError> {
    if table.count(Subgroup::V4) > 0 {
        return Ok(CaseLabel::Case1);
    }
    let empty: Vec<Subgroup> = Subgroup::ORDER2.into_iter().filter(|&h| table.count(h) == 0).collect();
    match empty.as_slice() {
        [] => Ok(CaseLabel::Case2),
        [a] => Ok(CaseLabel::Case3(*a)),
        _ => Err(GlobalError::NoCaseMatches(format!(
            "no V4 points and {} of the three order-two classes are empty; a connected cover needs at least two nonempty",
            empty.len()
        ))),
    }
}

/// `I_{X/Y}` and its dual.
pub fn ixy(table: &BranchTable, case: CaseLabel) -> (Decomp, Decomp) {
    let n = |h: Subgroup| IndecType::n_type(h).unwrap();
    let count = |h: Subgroup| table.count(h) as u64;
    let mut d = Decomp::new();
    match case {
        CaseLabel::Case1 => {
            d.add(IndecType::M31, count(Subgroup::V4) - 1);
            for h in Subgroup::ORDER2 {
                d.add(n(h), count(h));
            }
        }
        CaseLabel::Case2 => {
            d.add(IndecType::M32, 1);
            for h in Subgroup::ORDER2 {
                d.add(n(h), count(h) - 1);
            }
        }
        CaseLabel::Case3(a) => {
            d.add(IndecType::Triv, 1);
            for h in Subgroup::ORDER2.into_iter().filter(|&h| h != a) {
                d.add(n(h), count(h) - 1);
            }
        }
    }
    (d, d.dual())
}

/// Local term of a branch point: `N_{B'}^(M - m) + M31^m' + M32^m'`.
pub fn local_contribution(p: &BranchPoint) -> Decomp {
    let mprime = ((p.m - 1) / 2) as u64;
    let mut d = Decomp::of(&[(IndecType::M31, mprime), (IndecType::M32, mprime)]);
    if let Some(n) = IndecType::n_type(p.bprime) {
        d.add(n, (p.big_m - p.m) as u64);
    }
    d
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct BranchRecord {
    pub location: String,
    pub class: Subgroup,
    pub bprime: Subgroup,
    pub m: u32,
    #[serde(rename = "M")]
    pub big_m: u32,
    pub d: u32,
    pub jumps: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub poles: Option<[u32; 3]>,
}

impl From<&BranchPoint> for BranchRecord {
    fn from(p: &BranchPoint) -> Self {
        BranchRecord {
            location: p.location.to_string(),
            class: p.cls,
            bprime: p.bprime,
            m: p.m,
            big_m: p.big_m,
            d: p.d,
            jumps: p.jumps(),
            poles: p.poles,
        }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct DecompReport {
    pub field: String,
    pub genus: u32,
    pub case: CaseLabel,
    pub branch: Vec<BranchRecord>,
    pub ixy: Decomp,
    pub ixy_dual: Decomp,
    pub h1dr: Decomp,
    pub dim: u64,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl DecompReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("field: {}\ngenus: {}\ncase: {}\n", self.field, self.genus, self.case));
        out.push_str("branch points:\n");
        for b in &self.branch {
            out.push_str(&format!(
                "  {}: class {}, bprime {}, m = {}, M = {}, d = {}, jumps {:?}\n",
                b.location, b.class, b.bprime, b.m, b.big_m, b.d, b.jumps
            ));
        }
        out.push_str(&format!("I_X/Y: {}\nI_X/Y dual: {}\n", self.ixy, self.ixy_dual));
        out.push_str(&format!("H1_dR: {}\ndim: {}\n", self.h1dr, self.dim));
        for c in &self.checks {
            let mark = if c.passed { "ok" } else { "FAILED" };
            out.push_str(&format!("check {}: {} ({})\n", c.name, mark, c.detail));
        }
        for n in &self.notes {
            out.push_str(&format!("note: {n}\n"));
        }
        out
    }
}

/// Assembles the report for a branch table; fails on a dimension mismatch.
pub fn assemble(table: &BranchTable, field: String, mut notes: Vec<String>) -> Result<DecompReport, GlobalError> {
    let case = detect_case(table)?;
    if let CaseLabel::Case3(a) = case {
        notes.push(format!("Case 3 read as: no V4 points, B({a}) empty, the other two classes nonempty"));
    }
    let (ixy_d, dual) = ixy(table, case);
    let mut total = Decomp::of(&[(IndecType::Reg, 2 * table.g_y as u64)]).plus(&ixy_d).plus(&dual);
    for p in &table.entries {
        total = total.plus(&local_contribution(p));
    }
    let genus = genus_rh(table)?;
    let dim = total.dim();
    if dim != 2 * genus as u64 {
        return Err(GlobalError::DimensionMismatch { dim, two_g: 2 * genus as u64 });
    }
    let checks = vec![
        Check { name: "dimension".into(), passed: true, detail: format!("dim {dim} = 2g with g = {genus}") },
        Check {
            name: "self_dual".into(),
            passed: total.dual() == total,
            detail: "the multiset is stable under M31 <-> M32".into(),
        },
    ];
    Ok(DecompReport {
        field,
        genus,
        case,
        branch: table.entries.iter().map(BranchRecord::from).collect(),
        ixy: ixy_d,
        ixy_dual: dual,
        h1dr: total,
        dim,
        checks,
        notes,
    })
}

/// Report for abstract branch data over a base curve of genus `table.g_y`.
pub fn h1dr_abstract(table: &BranchTable, condition_b: bool, field: FieldCtx) -> Result<DecompReport, GlobalError> {
    if !condition_b {
        return Err(GlobalError::ConditionBNotAsserted);
    }
    let notes = vec!["condition (B) asserted by the caller".to_string()];
    assemble(table, field.to_string(), notes)
}

#[derive(Clone, Copy, Debug)]
pub struct GlobalOptions {
    pub max_field_degree: u32,
    /// Run the local HKG comparison at every V4 point.
    pub cross_check: bool,
}

impl Default for GlobalOptions {
    fn default() -> Self {
        GlobalOptions { max_field_degree: 64, cross_check: false }
    }
}

/// Principal part of `h` at a location, rewritten as a polynomial in the inverse
/// local parameter (constant term dropped).
pub fn principal_poly(h: &RatFun, at: &Location, roots: &[crate::gf2k::FieldElem]) -> Result<Poly, GlobalError> {
    let ctx = h.ctx();
    let pf = partial_fractions(h, roots)?;
    let mut c = vec![0u64];
    match at {
        Location::Infinity => c.extend_from_slice(pf.polypart.raw().get(1..).unwrap_or(&[])),
        Location::Finite(q) => {
            if let Some(p) = pf.parts.iter().find(|p| p.at == *q) {
                c.extend_from_slice(&p.coeffs);
            }
        }
        Location::Named(_) => {}
    }
    Ok(Poly::from_raw(ctx, c))
}

/// Report for the cover `y0^2 + y0 = h0`, `y1^2 + y1 = h1` of the projective line.
pub fn h1dr_global(h0: &RatFun, h1: &RatFun, opts: &GlobalOptions) -> Result<DecompReport, GlobalError> {
    let (triple, table) = branch_analysis(h0, h1, opts.max_field_degree)?;
    let mut notes = Vec::new();
    if triple.ctx != triple.base {
        notes.push(format!(
            "branch points are defined over {} with modulus {}",
            triple.ctx,
            crate::gf2k::bits_to_literal(triple.ctx.modulus())
        ));
    }
    if !triple.subs.0.is_trivial() || !triple.subs.1.is_trivial() {
        notes.push(format!("standard form: h0 = {}, h1 = {}", triple.h0s, triple.h1s));
    }
    let mut report = assemble(&table, triple.ctx.to_string(), notes)?;
    if opts.cross_check {
        for p in table.entries.iter().filter(|p| p.cls == Subgroup::V4) {
            let p0 = principal_poly(&triple.h0s, &p.location, &triple.roots)?;
            let p1 = principal_poly(&triple.h1s, &p.location, &triple.roots)?;
            let case = hkg_normalize(&p0, &p1)?;
            let formula = dr_formula(&case);
            let oracle = multiplicities(&dr_module(&case)?)?;
            let expected = local_contribution(p);
            let passed = formula == expected && oracle == expected;
            report.checks.push(Check {
                name: format!("local:{}", p.location),
                passed,
                detail: format!("expected {expected}, formula {formula}, matrices {oracle}"),
            });
            if !passed {
                return Err(GlobalError::LocalCheck(
                    p.location.to_string(),
                    format!("expected {expected}, formula {formula}, matrices {oracle}"),
                ));
            }
        }
    }
    Ok(report)
}
