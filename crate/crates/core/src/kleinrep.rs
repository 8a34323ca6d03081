//! Modules over k[V4]: the seven indecomposables that occur in de Rham
//! cohomology, Hom spaces, multiplicity recovery and isomorphism testing.
//!
//! A module is a pair of commuting involutions `(S, T)` giving the actions of
//! sigma and tau. Matrices act on column vectors; column `j` of a matrix is the
//! image of basis vector `j`.

use std::fmt;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::gf2k::{Embedding, FieldCtx, FieldError};
use crate::linalg::{random_combination, Matrix};
use crate::polyrat::DEFAULT_SEED;
use crate::ramdata::Subgroup;

/// Random Hom elements tried before giving up.
pub const WITNESS_TRIES: usize = 64;

/// Exhaustive isomorphism search is allowed up to this many Hom elements.
pub const EXHAUSTIVE_LIMIT: u128 = 1 << 20;

/// The generic Hom solver refuses systems with more unknowns than this.
pub const GENERIC_HOM_LIMIT: usize = 1600;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RepError {
    #[error("{name} is not square of size {n}")]
    Shape { name: &'static str, n: usize },
    #[error("{0} is not an involution")]
    NotInvolution(&'static str),
    #[error("the actions of sigma and tau do not commute")]
    NotCommuting,
    #[error("modules live over different fields")]
    FieldMismatch,
    #[error("module lies outside the seven indecomposable types: {0}")]
    OutsideClassification(String),
    #[error("Hom system with {0} unknowns is too large for the generic solver")]
    TooLarge(usize),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct KleinModule {
    s: Matrix,
    t: Matrix,
}

impl KleinModule {
    pub fn new(s: Matrix, t: Matrix) -> Result<KleinModule, RepError> {
        let n = s.rows();
        if !s.is_square() {
            return Err(RepError::Shape { name: "S", n });
        }
        if t.rows() != n || t.cols() != n {
            return Err(RepError::Shape { name: "T", n });
        }
        if s.ctx() != t.ctx() {
            return Err(RepError::FieldMismatch);
        }
        if !s.mul(&s).is_identity() {
            return Err(RepError::NotInvolution("S"));
        }
        if !t.mul(&t).is_identity() {
            return Err(RepError::NotInvolution("T"));
        }
        if s.mul(&t) != t.mul(&s) {
            return Err(RepError::NotCommuting);
        }
        Ok(KleinModule { s, t })
    }

    pub fn zero(ctx: FieldCtx) -> KleinModule {
        KleinModule { s: Matrix::zeros(ctx, 0, 0), t: Matrix::zeros(ctx, 0, 0) }
    }

    pub fn dim(&self) -> usize {
        self.s.rows()
    }

    pub fn ctx(&self) -> FieldCtx {
        self.s.ctx()
    }

    pub fn s(&self) -> &Matrix {
        &self.s
    }

    pub fn t(&self) -> &Matrix {
        &self.t
    }

    pub fn st(&self) -> Matrix {
        self.s.mul(&self.t)
    }

    pub fn direct_sum(ctx: FieldCtx, parts: &[KleinModule]) -> KleinModule {
        let s: Vec<Matrix> = parts.iter().map(|p| p.s.clone()).collect();
        let t: Vec<Matrix> = parts.iter().map(|p| p.t.clone()).collect();
        KleinModule { s: Matrix::block_diag(ctx, &s), t: Matrix::block_diag(ctx, &t) }
    }

    /// The module in the basis given by the columns of `p`: `(P^-1 S P, P^-1 T P)`.
    pub fn change_basis(&self, p: &Matrix) -> KleinModule {
        let inv = p.inverse().expect("base change must be invertible");
        KleinModule { s: inv.mul(&self.s).mul(p), t: inv.mul(&self.t).mul(p) }
    }

    pub fn embed(&self, e: &Embedding) -> KleinModule {
        KleinModule { s: self.s.embed(e), t: self.t.embed(e) }
    }

    /// Contragredient module. Group elements are involutions, so the dual
    /// action is just the transpose.
    pub fn dual(&self) -> KleinModule {
        KleinModule { s: self.s.transpose(), t: self.t.transpose() }
    }

    /// Exchange format: `n k`, then `n` rows of S and `n` rows of T.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.dim(), self.ctx().degree());
        out.push_str(&self.s.to_string());
        out.push_str(&self.t.to_string());
        out
    }
}

/// The indecomposable types occurring in de Rham cohomology.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum IndecType {
    Triv,
    Reg,
    N0,
    N1,
    Ninf,
    M31,
    M32,
}

impl IndecType {
    pub const ALL: [IndecType; 7] = [
        IndecType::Triv,
        IndecType::Reg,
        IndecType::N0,
        IndecType::N1,
        IndecType::Ninf,
        IndecType::M31,
        IndecType::M32,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn dim(self) -> usize {
        match self {
            IndecType::Triv => 1,
            IndecType::Reg => 4,
            IndecType::N0 | IndecType::N1 | IndecType::Ninf => 2,
            IndecType::M31 | IndecType::M32 => 3,
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            IndecType::Triv => "k",
            IndecType::Reg => "kV4",
            IndecType::N0 => "N0",
            IndecType::N1 => "N1",
            IndecType::Ninf => "Ninf",
            IndecType::M31 => "M31",
            IndecType::M32 => "M32",
        }
    }

    pub fn from_key(s: &str) -> Option<IndecType> {
        IndecType::ALL.into_iter().find(|t| t.key() == s)
    }

    pub fn dual_type(self) -> IndecType {
        match self {
            IndecType::M31 => IndecType::M32,
            IndecType::M32 => IndecType::M31,
            t => t,
        }
    }

    /// `N_(2,i)` for an order-two subgroup `H_i`.
    pub fn n_type(h: Subgroup) -> Option<IndecType> {
        match h {
            Subgroup::V4 => None,
            Subgroup::H0 => Some(IndecType::N0),
            Subgroup::H1 => Some(IndecType::N1),
            Subgroup::Hinf => Some(IndecType::Ninf),
        }
    }
}

impl fmt::Display for IndecType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// Multiplicities of the seven types, indexed by [`IndecType::index`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub struct Decomp(pub [u64; 7]);

impl Decomp {
    pub fn new() -> Decomp {
        Decomp::default()
    }

    pub fn of(pairs: &[(IndecType, u64)]) -> Decomp {
        let mut d = Decomp::new();
        for &(t, m) in pairs {
            d.add(t, m);
        }
        d
    }

    pub fn get(&self, t: IndecType) -> u64 {
        self.0[t.index()]
    }

    pub fn add(&mut self, t: IndecType, m: u64) {
        self.0[t.index()] += m;
    }

    pub fn plus(&self, other: &Decomp) -> Decomp {
        let mut d = *self;
        for i in 0..7 {
            d.0[i] += other.0[i];
        }
        d
    }

    pub fn dim(&self) -> u64 {
        IndecType::ALL.iter().map(|t| t.dim() as u64 * self.get(*t)).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&m| m == 0)
    }

    pub fn dual(&self) -> Decomp {
        let mut d = Decomp::new();
        for t in IndecType::ALL {
            d.add(t.dual_type(), self.get(t));
        }
        d
    }

    /// Applies a relabeling of types (which must be a bijection on the seven types).
    pub fn relabel(&self, f: impl Fn(IndecType) -> IndecType) -> Decomp {
        let mut d = Decomp::new();
        for t in IndecType::ALL {
            d.add(f(t), self.get(t));
        }
        d
    }

    pub fn iter(&self) -> impl Iterator<Item = (IndecType, u64)> + '_ {
        IndecType::ALL.into_iter().map(|t| (t, self.get(t))).filter(|&(_, m)| m > 0)
    }

    /// Standard modules in canonical order, repeated by multiplicity.
    pub fn summands(&self) -> Vec<IndecType> {
        self.iter().flat_map(|(t, m)| std::iter::repeat_n(t, m as usize)).collect()
    }

    pub fn module(&self, ctx: FieldCtx) -> KleinModule {
        let parts: Vec<KleinModule> = self.summands().into_iter().map(|t| standard_module(t, ctx)).collect();
        KleinModule::direct_sum(ctx, &parts)
    }
}

impl fmt::Display for Decomp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .iter()
            .map(|(t, m)| if m == 1 { t.key().to_string() } else { format!("{}^{}", t.key(), m) })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

impl Serialize for Decomp {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(7))?;
        for t in IndecType::ALL {
            map.serialize_entry(t.key(), &self.get(t))?;
        }
        map.end()
    }
}

fn elementary(ctx: FieldCtx, n: usize, entries: &[(usize, usize)]) -> Matrix {
    let mut m = Matrix::identity(ctx, n);
    for &(i, j) in entries {
        m.set(i, j, 1);
    }
    m
}

pub fn standard_module(t: IndecType, ctx: FieldCtx) -> KleinModule {
    let (s, t) = match t {
        IndecType::Triv => (Matrix::identity(ctx, 1), Matrix::identity(ctx, 1)),
        IndecType::Reg => (
            // basis e, sigma, tau, sigma tau
            Matrix::permutation(ctx, &[1, 0, 3, 2]),
            Matrix::permutation(ctx, &[2, 3, 0, 1]),
        ),
        IndecType::N0 => (elementary(ctx, 2, &[(0, 1)]), Matrix::identity(ctx, 2)),
        IndecType::N1 => (Matrix::identity(ctx, 2), elementary(ctx, 2, &[(0, 1)])),
        IndecType::Ninf => (elementary(ctx, 2, &[(0, 1)]), elementary(ctx, 2, &[(0, 1)])),
        IndecType::M31 => (elementary(ctx, 3, &[(0, 2)]), elementary(ctx, 3, &[(0, 1)])),
        IndecType::M32 => (elementary(ctx, 3, &[(0, 2)]), elementary(ctx, 3, &[(1, 2)])),
    };
    KleinModule { s, t }
}

/// Module induced from an order-two subgroup, where `w` is the action of its
/// generator. Coset representatives are `e` and one element outside `H`.
pub fn induced_from(h: Subgroup, w: &Matrix) -> Result<KleinModule, RepError> {
    let ctx = w.ctx();
    let n = w.rows();
    if !w.is_square() {
        return Err(RepError::Shape { name: "W", n });
    }
    if !w.mul(w).is_identity() {
        return Err(RepError::NotInvolution("W"));
    }
    let id = Matrix::identity(ctx, n);
    let swap = |a: &Matrix| {
        let mut m = Matrix::zeros(ctx, 2 * n, 2 * n);
        m.set_block(0, n, a);
        m.set_block(n, 0, a);
        m
    };
    let diag = |a: &Matrix| Matrix::block_diag(ctx, &[a.clone(), a.clone()]);
    let (s, t) = match h {
        Subgroup::H0 => (swap(&id), diag(w)),
        Subgroup::H1 => (diag(w), swap(&id)),
        Subgroup::Hinf => (swap(&id), swap(w)),
        Subgroup::V4 => return Err(RepError::OutsideClassification("induction from V4 itself".into())),
    };
    KleinModule::new(s, t)
}

/// Rank fingerprint of a module.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize)]
pub struct RankProfile {
    pub dim: usize,
    pub rank_s: usize,
    pub rank_t: usize,
    pub rank_st: usize,
    pub fixed: usize,
    pub rank_st_prod: usize,
    pub radical: usize,
}

impl RankProfile {
    pub fn as_tuple(&self) -> (usize, usize, usize, usize, usize, usize, usize) {
        (self.dim, self.rank_s, self.rank_t, self.rank_st, self.fixed, self.rank_st_prod, self.radical)
    }
}

pub fn rank_profile(v: &KleinModule) -> RankProfile {
    let a = v.s.add_identity();
    let b = v.t.add_identity();
    let c = v.st().add_identity();
    RankProfile {
        dim: v.dim(),
        rank_s: a.rank(),
        rank_t: b.rank(),
        rank_st: c.rank(),
        fixed: a.vstack(&b).nullity(),
        rank_st_prod: a.mul(&b).rank(),
        radical: a.hstack(&b).rank(),
    }
}

// ---------------------------------------------------------------------------
// Hom spaces

/// Basis of `Hom(V, W)` as `dim W x dim V` matrices, by solving the
/// intertwining equations directly. Only for small modules.
pub fn hom_basis(v: &KleinModule, w: &KleinModule) -> Result<Vec<Matrix>, RepError> {
    if v.ctx() != w.ctx() {
        return Err(RepError::FieldMismatch);
    }
    let ctx = v.ctx();
    let (a, b) = (v.dim(), w.dim());
    let unknowns = a * b;
    if unknowns > GENERIC_HOM_LIMIT {
        return Err(RepError::TooLarge(unknowns));
    }
    if unknowns == 0 {
        return Ok(Vec::new());
    }
    // X S_V + S_W X = 0 and the same for T, with X[i][j] at index i * a + j.
    let mut sys = Matrix::zeros(ctx, 2 * unknowns, unknowns);
    for (blk, (mv, mw)) in [(&v.s, &w.s), (&v.t, &w.t)].into_iter().enumerate() {
        for i in 0..b {
            for l in 0..a {
                let row = blk * unknowns + i * a + l;
                for j in 0..a {
                    let c = mv.get(j, l);
                    if c != 0 {
                        let idx = i * a + j;
                        sys.set(row, idx, sys.get(row, idx) ^ c);
                    }
                }
                for j in 0..b {
                    let c = mw.get(i, j);
                    if c != 0 {
                        let idx = j * a + l;
                        sys.set(row, idx, sys.get(row, idx) ^ c);
                    }
                }
            }
        }
    }
    Ok(sys
        .nullspace()
        .into_iter()
        .map(|x| {
            let rows: Vec<Vec<u64>> = x.chunks(a).map(|r| r.to_vec()).collect();
            Matrix::from_rows(ctx, &rows)
        })
        .collect())
}

pub fn hom_dim(v: &KleinModule, w: &KleinModule) -> Result<usize, RepError> {
    Ok(hom_basis(v, w)?.len())
}

// Coefficient systems describing Hom(standard(t), V). The parameter vectors
// are the kernel of `hom_system`; `hom_image` turns one into the matrix of the
// homomorphism.
fn hom_system(t: IndecType, v: &KleinModule) -> Matrix {
    let ctx = v.ctx();
    let n = v.dim();
    let a = v.s.add_identity();
    let b = v.t.add_identity();
    match t {
        IndecType::Triv => a.vstack(&b),
        IndecType::Reg => Matrix::zeros(ctx, 0, n),
        IndecType::N0 => b,
        IndecType::N1 => a,
        IndecType::Ninf => v.st().add_identity(),
        IndecType::M31 => {
            // (v, w): (S-1) v = 0, (T-1) w = 0, (T-1) v = (S-1) w
            let z = Matrix::zeros(ctx, n, n);
            let top = a.hstack(&z);
            let mid = z.hstack(&b);
            let bot = b.hstack(&a);
            top.vstack(&mid).vstack(&bot)
        }
        IndecType::M32 => a.mul(&b),
    }
}

fn hom_image(t: IndecType, v: &KleinModule, p: &[u64]) -> Matrix {
    let ctx = v.ctx();
    let n = v.dim();
    let a = v.s.add_identity();
    let b = v.t.add_identity();
    let cols: Vec<Vec<u64>> = match t {
        IndecType::Triv => vec![p.to_vec()],
        IndecType::Reg => {
            let sv = v.s.mul_vec(p);
            let tv = v.t.mul_vec(p);
            let stv = v.s.mul_vec(&tv);
            vec![p.to_vec(), sv, tv, stv]
        }
        IndecType::N0 | IndecType::Ninf => vec![a.mul_vec(p), p.to_vec()],
        IndecType::N1 => vec![b.mul_vec(p), p.to_vec()],
        IndecType::M31 => {
            let (x, y) = p.split_at(n);
            vec![b.mul_vec(x), x.to_vec(), y.to_vec()]
        }
        IndecType::M32 => vec![a.mul_vec(p), b.mul_vec(p), p.to_vec()],
    };
    Matrix::from_cols(ctx, n, &cols)
}

fn hom_params(t: IndecType, v: &KleinModule) -> Vec<Vec<u64>> {
    if t == IndecType::Reg {
        let n = v.dim();
        return (0..n)
            .map(|i| {
                let mut e = vec![0; n];
                e[i] = 1;
                e
            })
            .collect();
    }
    hom_system(t, v).nullspace()
}

/// `dim Hom(standard(t), V)`, computed from the presentation of `standard(t)`.
pub fn hom_from_standard_dim(t: IndecType, v: &KleinModule) -> usize {
    if t == IndecType::Reg {
        return v.dim();
    }
    hom_system(t, v).nullity()
}

/// Basis of `Hom(standard(t), V)` via the presentation of `standard(t)`.
pub fn hom_from_standard(t: IndecType, v: &KleinModule) -> Vec<Matrix> {
    hom_params(t, v).iter().map(|p| hom_image(t, v, p)).collect()
}

/// `[dim Hom(standard(t), V)]` over the seven types.
pub fn hom_signature(v: &KleinModule) -> [usize; 7] {
    IndecType::ALL.map(|t| hom_from_standard_dim(t, v))
}

/// The 7x7 matrix `dim Hom(standard(i), standard(j))`. It does not depend on
/// the field, so it is computed once over GF(2).
pub fn gram_matrix() -> &'static [[i64; 7]; 7] {
    static GRAM: OnceLock<[[i64; 7]; 7]> = OnceLock::new();
    GRAM.get_or_init(|| {
        let ctx = FieldCtx::gf2();
        let mut g = [[0i64; 7]; 7];
        for j in IndecType::ALL {
            let w = standard_module(j, ctx);
            for i in IndecType::ALL {
                g[i.index()][j.index()] = hom_from_standard_dim(i, &w) as i64;
            }
        }
        assert_ne!(determinant(&g), 0, "the Hom-Gram matrix must be nonsingular");
        g
    })
}

/// Exact determinant by fraction-free elimination.
pub fn determinant<const N: usize>(m: &[[i64; N]; N]) -> i128 {
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..N {
        if a[k][k] == 0 {
            let Some(p) = (k + 1..N).find(|&i| a[i][k] != 0) else {
                return 0;
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..N {
            for j in k + 1..N {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
            a[i][k] = 0;
        }
        prev = a[k][k];
    }
    if N == 0 {
        1
    } else {
        sign * a[N - 1][N - 1]
    }
}

/// Solves `gram * m = b` exactly; `None` unless the solution is a vector of
/// nonnegative integers.
fn solve_gram(b: &[usize; 7]) -> Option<[u64; 7]> {
    let g = gram_matrix();
    let det = determinant(g);
    let mut out = [0u64; 7];
    for col in 0..7 {
        let mut gi = *g;
        for row in 0..7 {
            gi[row][col] = b[row] as i64;
        }
        let num = determinant(&gi);
        if num % det != 0 {
            return None;
        }
        let q = num / det;
        if q < 0 {
            return None;
        }
        out[col] = q as u64;
    }
    Some(out)
}

/// Extension of degree at least 8 over GF(2) containing `ctx`, used so that
/// random Hom elements are invertible with high probability.
pub fn sampling_field(ctx: FieldCtx) -> Result<(FieldCtx, Embedding), FieldError> {
    let k = ctx.degree();
    if k >= 8 {
        return Ok((ctx, Embedding::identity(ctx)));
    }
    let big = FieldCtx::new(k * 8_u32.div_ceil(k), None)?;
    Ok((big, Embedding::new(ctx, big)?))
}

/// Result of a verified decomposition.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub decomp: Decomp,
    /// Isomorphism from the standard direct sum to the module (over `witness_field`).
    pub witness: Matrix,
    pub witness_field: FieldCtx,
}

/// Multiplicities of the seven types in `V`, verified by an explicit isomorphism.
pub fn multiplicities(v: &KleinModule) -> Result<Decomp, RepError> {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    decompose(v, &mut rng).map(|d| d.decomp)
}

pub fn decompose<R: Rng>(v: &KleinModule, rng: &mut R) -> Result<Decomposition, RepError> {
    let b = hom_signature(v);
    let m = solve_gram(&b).ok_or_else(|| {
        RepError::OutsideClassification(format!("Hom signature {b:?} has no nonnegative integral solution"))
    })?;
    let decomp = Decomp(m);
    if decomp.dim() != v.dim() as u64 {
        return Err(RepError::OutsideClassification(format!(
            "multiplicities {decomp} have dimension {} but the module has dimension {}",
            decomp.dim(),
            v.dim()
        )));
    }
    let (rv, rt) = (rank_profile(v), rank_profile(&decomp.module(v.ctx())));
    if rv != rt {
        return Err(RepError::OutsideClassification(format!(
            "Hom signature suggests {decomp}, but its rank profile {:?} differs from {:?}",
            rt.as_tuple(),
            rv.as_tuple()
        )));
    }
    let (big, emb) = sampling_field(v.ctx())?;
    let vb = v.embed(&emb);
    let target = decomp.module(big);
    let params: Vec<(IndecType, Vec<Vec<u64>>)> =
        decomp.iter().map(|(t, _)| (t, hom_params(t, &vb))).collect();
    let summands = decomp.summands();
    let n = v.dim();
    for _ in 0..WITNESS_TRIES {
        let mut cols: Vec<Vec<u64>> = Vec::with_capacity(n);
        for &t in &summands {
            let basis = &params.iter().find(|(u, _)| *u == t).unwrap().1;
            let len = basis.first().map_or(0, |p| p.len());
            let p = random_combination(big, basis, len, rng);
            let img = hom_image(t, &vb, &p);
            for j in 0..img.cols() {
                cols.push(img.col(j));
            }
        }
        let x = Matrix::from_cols(big, n, &cols);
        if !x.is_invertible() {
            continue;
        }
        if x.mul(target.s()) == vb.s().mul(&x) && x.mul(target.t()) == vb.t().mul(&x) {
            return Ok(Decomposition { decomp, witness: x, witness_field: big });
        }
    }
    Err(RepError::OutsideClassification(format!(
        "no isomorphism onto {decomp} found in {WITNESS_TRIES} random attempts"
    )))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IsoResult {
    /// An invertible intertwiner `X` with `X S_V = S_W X`, `X T_V = T_W X`,
    /// possibly over an extension field.
    Isomorphic(Matrix),
    NotIsomorphic(String),
    Inconclusive,
}

impl IsoResult {
    pub fn is_isomorphic(&self) -> bool {
        matches!(self, IsoResult::Isomorphic(_))
    }
}

pub fn verify_witness(v: &KleinModule, w: &KleinModule, x: &Matrix) -> bool {
    let Ok(ev) = Embedding::new(v.ctx(), x.ctx()) else {
        return false;
    };
    let Ok(ew) = Embedding::new(w.ctx(), x.ctx()) else {
        return false;
    };
    let (v, w) = (v.embed(&ev), w.embed(&ew));
    x.is_invertible() && x.mul(v.s()) == w.s().mul(x) && x.mul(v.t()) == w.t().mul(x)
}

pub fn iso_check<R: Rng>(v: &KleinModule, w: &KleinModule, rng: &mut R) -> Result<IsoResult, RepError> {
    if v.ctx() != w.ctx() {
        return Err(RepError::FieldMismatch);
    }
    if v.dim() != w.dim() {
        return Ok(IsoResult::NotIsomorphic(format!("dimensions {} and {}", v.dim(), w.dim())));
    }
    let (pv, pw) = (rank_profile(v), rank_profile(w));
    if pv != pw {
        return Ok(IsoResult::NotIsomorphic(format!(
            "rank profiles {:?} and {:?}",
            pv.as_tuple(),
            pw.as_tuple()
        )));
    }
    let (sv, sw) = (hom_signature(v), hom_signature(w));
    if sv != sw {
        return Ok(IsoResult::NotIsomorphic(format!("Hom signatures {sv:?} and {sw:?}")));
    }
    if v.dim() == 0 {
        return Ok(IsoResult::Isomorphic(Matrix::zeros(v.ctx(), 0, 0)));
    }
    // Through the common standard form when both decompose.
    if let (Ok(dv), Ok(dw)) = (decompose(v, rng), decompose(w, rng)) {
        debug_assert_eq!(dv.decomp, dw.decomp);
        let x = dw.witness.mul(&dv.witness.inverse().unwrap());
        if verify_witness(v, w, &x) {
            return Ok(IsoResult::Isomorphic(x));
        }
    }
    // Generic Hom space for small modules.
    let basis = match hom_basis(v, w) {
        Ok(b) => b,
        Err(RepError::TooLarge(_)) => return Ok(IsoResult::Inconclusive),
        Err(e) => return Err(e),
    };
    let (big, emb) = sampling_field(v.ctx())?;
    let big_basis: Vec<Matrix> = basis.iter().map(|b| b.embed(&emb)).collect();
    let n = v.dim();
    for _ in 0..WITNESS_TRIES {
        let mut x = Matrix::zeros(big, n, n);
        for b in &big_basis {
            x = x.add(&b.scale(rng.gen::<u64>() & big.mask()));
        }
        if x.is_invertible() {
            debug_assert!(verify_witness(v, w, &x));
            return Ok(IsoResult::Isomorphic(x));
        }
    }
    let q = v.ctx().order();
    let size = q.checked_pow(basis.len() as u32);
    if let Some(size) = size.filter(|&s| s <= EXHAUSTIVE_LIMIT) {
        let ctx = v.ctx();
        for idx in 0..size {
            let mut x = Matrix::zeros(ctx, n, n);
            let mut rest = idx;
            for b in &basis {
                let c = (rest % q) as u64;
                rest /= q;
                if c != 0 {
                    x = x.add(&b.scale(c));
                }
            }
            if x.is_invertible() {
                return Ok(IsoResult::Isomorphic(x));
            }
        }
        return Ok(IsoResult::NotIsomorphic("exhaustive search over Hom found no isomorphism".into()));
    }
    Ok(IsoResult::Inconclusive)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXPECTED_GRAM: [[i64; 7]; 7] = [
        [1, 1, 1, 1, 1, 1, 2],
        [1, 4, 2, 2, 2, 3, 3],
        [1, 2, 2, 1, 1, 2, 2],
        [1, 2, 1, 2, 1, 2, 2],
        [1, 2, 1, 1, 2, 2, 2],
        [2, 3, 2, 2, 2, 3, 4],
        [1, 3, 2, 2, 2, 3, 3],
    ];

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn standard_modules_are_valid() {
        for k in [1, 2, 3] {
            let ctx = FieldCtx::new(k, None).unwrap();
            for t in IndecType::ALL {
                let m = standard_module(t, ctx);
                KleinModule::new(m.s.clone(), m.t.clone()).unwrap();
                assert_eq!(m.dim(), t.dim());
            }
        }
    }

    #[test]
    fn rank_profiles() {
        let ctx = FieldCtx::gf2();
        let p = |t| rank_profile(&standard_module(t, ctx)).as_tuple();
        assert_eq!(p(IndecType::Triv), (1, 0, 0, 0, 1, 0, 0));
        assert_eq!(p(IndecType::Reg), (4, 2, 2, 2, 1, 1, 3));
        assert_eq!(p(IndecType::M32), (3, 1, 1, 1, 2, 0, 2));
    }

    #[test]
    fn gram_matches_generic_solver() {
        let g = gram_matrix();
        assert_eq!(*g, EXPECTED_GRAM);
        assert_eq!(determinant(g), 1);
        for k in [1, 2] {
            let ctx = FieldCtx::new(k, None).unwrap();
            for i in IndecType::ALL {
                for j in IndecType::ALL {
                    let d = hom_dim(&standard_module(i, ctx), &standard_module(j, ctx)).unwrap();
                    assert_eq!(d as i64, g[i.index()][j.index()], "{i} -> {j}");
                }
            }
        }
    }

    #[test]
    fn fast_hom_images_intertwine() {
        let ctx = FieldCtx::new(2, None).unwrap();
        let mut r = rng();
        let v = Decomp::of(&[(IndecType::Reg, 1), (IndecType::M31, 2), (IndecType::Ninf, 1), (IndecType::Triv, 1)])
            .module(ctx)
            .change_basis(&Matrix::random_invertible(ctx, 13, &mut r));
        for t in IndecType::ALL {
            let src = standard_module(t, ctx);
            let fast = hom_from_standard(t, &v);
            assert_eq!(fast.len(), hom_dim(&src, &v).unwrap(), "{t}");
            for x in &fast {
                assert_eq!(x.mul(src.s()), v.s().mul(x));
                assert_eq!(x.mul(src.t()), v.t().mul(x));
            }
            let span = fast.iter().fold(Matrix::zeros(ctx, 0, 13 * t.dim()), |acc, x| {
                let flat = Matrix::from_rows(ctx, &[(0..13).flat_map(|i| x.row(i).to_vec()).collect()]);
                acc.vstack(&flat)
            });
            assert_eq!(span.rank(), fast.len(), "{t} images independent");
        }
    }

    #[test]
    fn hom_examples() {
        let ctx = FieldCtx::gf2();
        let s = |t| standard_module(t, ctx);
        assert_eq!(hom_dim(&s(IndecType::Triv), &s(IndecType::Triv)).unwrap(), 1);
        assert_eq!(hom_dim(&s(IndecType::Reg), &s(IndecType::M31)).unwrap(), 3);
        assert_eq!(hom_dim(&s(IndecType::M31), &s(IndecType::M32)).unwrap(), 4);
    }

    #[test]
    fn multiplicity_examples() {
        let ctx = FieldCtx::new(2, None).unwrap();
        let d = Decomp::of(&[(IndecType::N0, 1), (IndecType::M31, 1)]);
        assert_eq!(multiplicities(&d.module(ctx)).unwrap(), d);
        let p = Matrix::random_invertible(ctx, 5, &mut rng());
        assert_eq!(multiplicities(&d.module(ctx).change_basis(&p)).unwrap(), d);
        let triv5 = KleinModule::new(Matrix::identity(ctx, 5), Matrix::identity(ctx, 5)).unwrap();
        assert_eq!(multiplicities(&triv5).unwrap(), Decomp::of(&[(IndecType::Triv, 5)]));
    }

    #[test]
    fn outside_classification() {
        let ctx = FieldCtx::new(2, None).unwrap();
        let g = ctx.generator().bits();
        // N_(2,lambda) with lambda = g: sigma = [[1,1],[0,1]], tau = [[1,g],[0,1]]
        let mut s2 = Matrix::identity(ctx, 2);
        s2.set(0, 1, 1);
        let mut t2 = Matrix::identity(ctx, 2);
        t2.set(0, 1, g);
        let v = KleinModule::new(s2, t2).unwrap();
        assert!(matches!(multiplicities(&v), Err(RepError::OutsideClassification(_))));
    }

    #[test]
    fn constructor_rejects() {
        let ctx = FieldCtx::gf2();
        let s = Matrix::from_rows(ctx, &[vec![1, 1], vec![0, 1]]);
        let t = Matrix::from_rows(ctx, &[vec![1, 0], vec![1, 1]]);
        assert_eq!(KleinModule::new(s.clone(), t), Err(RepError::NotCommuting));
        let bad = Matrix::from_rows(ctx, &[vec![1, 1], vec![1, 0]]);
        assert_eq!(KleinModule::new(bad, s), Err(RepError::NotInvolution("S")));
    }

    #[test]
    fn induced_modules() {
        let ctx = FieldCtx::gf2();
        let mut r = rng();
        let one = Matrix::identity(ctx, 1);
        for (h, t) in [(Subgroup::H0, IndecType::N0), (Subgroup::H1, IndecType::N1), (Subgroup::Hinf, IndecType::Ninf)] {
            let m = induced_from(h, &one).unwrap();
            assert!(iso_check(&m, &standard_module(t, ctx), &mut r).unwrap().is_isomorphic());
        }
        let reg_h = Matrix::from_rows(ctx, &[vec![0, 1], vec![1, 0]]);
        let m = induced_from(Subgroup::H0, &reg_h).unwrap();
        assert!(iso_check(&m, &standard_module(IndecType::Reg, ctx), &mut r).unwrap().is_isomorphic());
    }

    #[test]
    fn iso_examples() {
        let ctx = FieldCtx::gf2();
        let mut r = rng();
        let reg = standard_module(IndecType::Reg, ctx);
        assert!(iso_check(&reg, &reg, &mut r).unwrap().is_isomorphic());
        let m31 = standard_module(IndecType::M31, ctx);
        let m32 = standard_module(IndecType::M32, ctx);
        match iso_check(&m31, &m32, &mut r).unwrap() {
            IsoResult::NotIsomorphic(why) => assert!(why.contains("rank profiles")),
            other => panic!("{other:?}"),
        }
        let a = Decomp::of(&[(IndecType::M31, 1), (IndecType::M32, 1)]).module(ctx);
        let b = Decomp::of(&[(IndecType::N0, 1), (IndecType::N1, 1), (IndecType::Ninf, 1)]).module(ctx);
        assert_eq!(rank_profile(&a), rank_profile(&b));
        assert_eq!(hom_from_standard_dim(IndecType::M31, &a), 7);
        assert_eq!(hom_from_standard_dim(IndecType::M31, &b), 6);
        assert!(matches!(iso_check(&a, &b, &mut r).unwrap(), IsoResult::NotIsomorphic(_)));
    }

    #[test]
    fn duals() {
        let ctx = FieldCtx::gf2();
        let mut r = rng();
        for t in IndecType::ALL {
            let d = standard_module(t, ctx).dual();
            match iso_check(&d, &standard_module(t.dual_type(), ctx), &mut r).unwrap() {
                IsoResult::Isomorphic(x) => {
                    assert!(verify_witness(&d, &standard_module(t.dual_type(), ctx), &x))
                }
                other => panic!("{t}: {other:?}"),
            }
        }
    }

    #[test]
    fn decomp_json_and_display() {
        let d = Decomp::of(&[(IndecType::N0, 6), (IndecType::M31, 4), (IndecType::M32, 4)]);
        assert_eq!(
            serde_json::to_string(&d).unwrap(),
            r#"{"k":0,"kV4":0,"N0":6,"N1":0,"Ninf":0,"M31":4,"M32":4}"#
        );
        assert_eq!(d.to_string(), "N0^6 + M31^4 + M32^4");
        assert_eq!(d.dim(), 36);
    }
}
