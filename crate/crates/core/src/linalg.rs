//! Dense matrices over GF(2^k).

use std::fmt;

use rand::Rng;

use crate::gf2k::{Embedding, FieldCtx, FieldElem};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Matrix {
    ctx: FieldCtx,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl Matrix {
    pub fn zeros(ctx: FieldCtx, rows: usize, cols: usize) -> Matrix {
        Matrix { ctx, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(ctx: FieldCtx, n: usize) -> Matrix {
        let mut m = Matrix::zeros(ctx, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Builds a matrix from rows of raw residues. Panics on ragged input.
    pub fn from_rows(ctx: FieldCtx, rows: &[Vec<u64>]) -> Matrix {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged matrix rows");
            assert!(row.iter().all(|&a| a & !ctx.mask() == 0), "entry outside {ctx}");
            data.extend_from_slice(row);
        }
        Matrix { ctx, rows: r, cols: c, data }
    }

    /// Matrix whose columns are the given vectors (all of length `rows`).
    pub fn from_cols(ctx: FieldCtx, rows: usize, cols: &[Vec<u64>]) -> Matrix {
        let mut m = Matrix::zeros(ctx, rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), rows);
            for (i, &a) in col.iter().enumerate() {
                m.set(i, j, a);
            }
        }
        m
    }

    /// Permutation matrix sending basis vector `j` to basis vector `p[j]`.
    pub fn permutation(ctx: FieldCtx, p: &[usize]) -> Matrix {
        let mut m = Matrix::zeros(ctx, p.len(), p.len());
        for (j, &i) in p.iter().enumerate() {
            m.set(i, j, 1);
        }
        m
    }

    pub fn random<R: Rng>(ctx: FieldCtx, rows: usize, cols: usize, rng: &mut R) -> Matrix {
        let mask = ctx.mask();
        let data = (0..rows * cols).map(|_| rng.gen::<u64>() & mask).collect();
        Matrix { ctx, rows, cols, data }
    }

    pub fn random_invertible<R: Rng>(ctx: FieldCtx, n: usize, rng: &mut R) -> Matrix {
        loop {
            let m = Matrix::random(ctx, n, n, rng);
            if m.rank() == n {
                return m;
            }
        }
    }

    pub fn ctx(&self) -> FieldCtx {
        self.ctx
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, a: u64) {
        self.data[i * self.cols + j] = a;
    }

    pub fn entry(&self, i: usize, j: usize) -> FieldElem {
        self.ctx.elem(self.get(i, j))
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<u64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&a| a == 0)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..self.cols).all(|j| self.get(i, j) == u64::from(i == j)))
    }

    fn same_shape(&self, other: &Matrix) {
        assert_eq!(self.ctx, other.ctx, "matrices over different fields");
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        self.same_shape(other);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a ^ b).collect();
        Matrix { ctx: self.ctx, rows: self.rows, cols: self.cols, data }
    }

    /// `self + I`, which is `self - I` in characteristic 2.
    pub fn add_identity(&self) -> Matrix {
        assert!(self.is_square());
        let mut m = self.clone();
        for i in 0..self.rows {
            let v = m.get(i, i) ^ 1;
            m.set(i, i, v);
        }
        m
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.ctx, other.ctx, "matrices over different fields");
        assert_eq!(self.cols, other.rows, "shape mismatch in product");
        let ctx = self.ctx;
        let mut out = Matrix::zeros(ctx, self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.get(i, l);
                if a == 0 {
                    continue;
                }
                let orow = &other.data[l * other.cols..(l + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d ^= ctx.mul(a, b);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[u64]) -> Vec<u64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).fold(0, |acc, (&a, &b)| acc ^ self.ctx.mul(a, b)))
            .collect()
    }

    pub fn scale(&self, c: u64) -> Matrix {
        let data = self.data.iter().map(|&a| self.ctx.mul(a, c)).collect();
        Matrix { ctx: self.ctx, rows: self.rows, cols: self.cols, data }
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.ctx, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// Stacks `self` above `other`.
    pub fn vstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.ctx, other.ctx);
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Matrix { ctx: self.ctx, rows: self.rows + other.rows, cols: self.cols, data }
    }

    /// Places `other` to the right of `self`.
    pub fn hstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.ctx, other.ctx);
        assert_eq!(self.rows, other.rows);
        let cols = self.cols + other.cols;
        let mut m = Matrix::zeros(self.ctx, self.rows, cols);
        for i in 0..self.rows {
            m.data[i * cols..i * cols + self.cols].copy_from_slice(self.row(i));
            m.data[i * cols + self.cols..(i + 1) * cols].copy_from_slice(other.row(i));
        }
        m
    }

    pub fn block_diag(ctx: FieldCtx, blocks: &[Matrix]) -> Matrix {
        let r: usize = blocks.iter().map(|b| b.rows).sum();
        let c: usize = blocks.iter().map(|b| b.cols).sum();
        let mut m = Matrix::zeros(ctx, r, c);
        let (mut oi, mut oj) = (0, 0);
        for b in blocks {
            assert_eq!(b.ctx, ctx);
            for i in 0..b.rows {
                for j in 0..b.cols {
                    m.set(oi + i, oj + j, b.get(i, j));
                }
            }
            oi += b.rows;
            oj += b.cols;
        }
        m
    }

    /// Copies `block` into `self` with its top-left corner at `(i0, j0)`.
    pub fn set_block(&mut self, i0: usize, j0: usize, block: &Matrix) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self.set(i0 + i, j0 + j, block.get(i, j));
            }
        }
    }

    pub fn embed(&self, e: &Embedding) -> Matrix {
        assert_eq!(self.ctx, e.source());
        let data = self.data.iter().map(|&a| e.apply_raw(a)).collect();
        Matrix { ctx: e.target(), rows: self.rows, cols: self.cols, data }
    }

    /// Reduced row echelon form in place; returns the pivot columns.
    pub fn rref_in_place(&mut self) -> Vec<usize> {
        let ctx = self.ctx;
        let cols = self.cols;
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| self.get(i, c) != 0) else {
                continue;
            };
            if p != r {
                for j in 0..cols {
                    self.data.swap(p * cols + j, r * cols + j);
                }
            }
            let inv = ctx.inv(self.get(r, c)).unwrap();
            if inv != 1 {
                for j in c..cols {
                    let v = ctx.mul(self.get(r, j), inv);
                    self.set(r, j, v);
                }
            }
            let (before, rest) = self.data.split_at_mut(r * cols);
            let (prow, after) = rest.split_at_mut(cols);
            for other in before.chunks_mut(cols).chain(after.chunks_mut(cols)) {
                let f = other[c];
                if f == 0 {
                    continue;
                }
                for j in c..cols {
                    other[j] ^= ctx.mul(f, prow[j]);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref_in_place().len()
    }

    /// Basis of the right kernel `{v : self * v = 0}`.
    pub fn nullspace(&self) -> Vec<Vec<u64>> {
        let mut m = self.clone();
        let pivots = m.rref_in_place();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|&j| !is_pivot[j]) {
            let mut v = vec![0u64; self.cols];
            v[free] = 1;
            for (r, &p) in pivots.iter().enumerate() {
                // char 2: -a = a
                v[p] = m.get(r, free);
            }
            basis.push(v);
        }
        basis
    }

    pub fn nullity(&self) -> usize {
        self.cols - self.rank()
    }

    pub fn inverse(&self) -> Option<Matrix> {
        assert!(self.is_square());
        let n = self.rows;
        let mut aug = self.hstack(&Matrix::identity(self.ctx, n));
        let pivots = aug.rref_in_place();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let mut inv = Matrix::zeros(self.ctx, n, n);
        for i in 0..n {
            inv.data[i * n..(i + 1) * n].copy_from_slice(&aug.row(i)[n..]);
        }
        Some(inv)
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|&a| self.ctx.elem(a).to_string()).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// Random linear combination of basis vectors.
pub fn random_combination<R: Rng>(ctx: FieldCtx, basis: &[Vec<u64>], len: usize, rng: &mut R) -> Vec<u64> {
    let mut v = vec![0u64; len];
    for b in basis {
        let c = rng.gen::<u64>() & ctx.mask();
        if c == 0 {
            continue;
        }
        for (x, &y) in v.iter_mut().zip(b) {
            *x ^= ctx.mul(c, y);
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn inverse_and_rank() {
        let ctx = FieldCtx::new(3, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..8 {
            let a = Matrix::random_invertible(ctx, n, &mut rng);
            let inv = a.inverse().unwrap();
            assert!(a.mul(&inv).is_identity());
            assert!(inv.mul(&a).is_identity());
        }
        let sing = Matrix::from_rows(FieldCtx::gf2(), &[vec![1, 1], vec![1, 1]]);
        assert_eq!(sing.rank(), 1);
        assert!(sing.inverse().is_none());
    }

    #[test]
    fn nullspace_is_kernel() {
        let ctx = FieldCtx::new(2, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let a = Matrix::random(ctx, 4, 7, &mut rng);
            let ns = a.nullspace();
            assert_eq!(ns.len() + a.rank(), 7);
            for v in &ns {
                assert!(a.mul_vec(v).iter().all(|&x| x == 0));
            }
        }
    }

    #[test]
    fn permutation_convention() {
        let ctx = FieldCtx::gf2();
        let p = Matrix::permutation(ctx, &[1, 0, 3, 2]);
        assert_eq!(p.mul_vec(&[1, 0, 0, 0]), vec![0, 1, 0, 0]);
        assert_eq!(p.mul_vec(&[0, 0, 1, 0]), vec![0, 0, 0, 1]);
    }
}
