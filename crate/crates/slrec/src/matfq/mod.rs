//! Dense matrices over GF(q).
//!
//! Row vectors act on the right of matrices throughout: the image of `v`
//! under `A` is `v * A`, kernels are row-vector kernels `{v : v A = 0}`,
//! and base changes store the new basis vectors as rows.

mod stdgens;
mod subspace;

pub use stdgens::{embed, standard_generators, transvection, z1, z2};
pub use subspace::{
    extend_to_basis, image_and_kernel, irreducible_on, restrict, BaseChange, Subspace,
};

use crate::gfq::{FieldSpec, Fq, Poly};
use num_bigint::BigUint;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum MatError {
    #[error("shape mismatch: ({0},{1}) vs ({2},{3})")]
    ShapeMismatch(usize, usize, usize, usize),
    #[error("matrix is singular")]
    Singular,
    #[error("ambient dimensions differ: {0} vs {1}")]
    AmbientMismatch(usize, usize),
    #[error("input rows are linearly dependent")]
    DependentInput,
    #[error("subspace is not invariant under the matrix")]
    NotInvariant,
    #[error("matrices live over different fields")]
    FieldMismatch,
}

#[derive(Clone)]
pub struct Matrix {
    nrows: usize,
    ncols: usize,
    data: Vec<Fq>,
    field: Arc<FieldSpec>,
}

impl PartialEq for Matrix {
    fn eq(&self, other: &Self) -> bool {
        self.nrows == other.nrows
            && self.ncols == other.ncols
            && self.data == other.data
            && *self.field == *other.field
    }
}
impl Eq for Matrix {}

impl std::fmt::Debug for Matrix {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(fm, "Matrix {}x{} over GF({})", self.nrows, self.ncols, self.field.q())?;
        for i in 0..self.nrows {
            writeln!(fm, "  {:?}", &self.data[i * self.ncols..(i + 1) * self.ncols])?;
        }
        Ok(())
    }
}

impl Matrix {
    pub fn zero(nrows: usize, ncols: usize, field: Arc<FieldSpec>) -> Matrix {
        Matrix { nrows, ncols, data: vec![0; nrows * ncols], field }
    }

    pub fn identity(n: usize, field: Arc<FieldSpec>) -> Matrix {
        let mut m = Matrix::zero(n, n, field);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Fq>], field: Arc<FieldSpec>) -> Matrix {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(nrows * ncols);
        for r in rows {
            assert_eq!(r.len(), ncols, "ragged rows");
            data.extend_from_slice(r);
        }
        Matrix { nrows, ncols, data, field }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }
    pub fn ncols(&self) -> usize {
        self.ncols
    }
    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }
    pub fn field(&self) -> &Arc<FieldSpec> {
        &self.field
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Fq {
        self.data[i * self.ncols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Fq) {
        self.data[i * self.ncols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Fq] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Fq]> {
        self.data.chunks(self.ncols)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && self
                .data
                .iter()
                .enumerate()
                .all(|(k, &v)| v == u64::from(k / self.ncols == k % self.ncols))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    fn check_same_field(&self, other: &Matrix) -> Result<(), MatError> {
        if *self.field != *other.field {
            return Err(MatError::FieldMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix, MatError> {
        self.check_same_field(other)?;
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(MatError::ShapeMismatch(self.nrows, self.ncols, other.nrows, other.ncols));
        }
        let f = &self.field;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f.add(a, b)).collect();
        Ok(Matrix { nrows: self.nrows, ncols: self.ncols, data, field: self.field.clone() })
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix, MatError> {
        self.check_same_field(other)?;
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(MatError::ShapeMismatch(self.nrows, self.ncols, other.nrows, other.ncols));
        }
        let f = &self.field;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f.sub(a, b)).collect();
        Ok(Matrix { nrows: self.nrows, ncols: self.ncols, data, field: self.field.clone() })
    }

    pub fn neg(&self) -> Matrix {
        let f = &self.field;
        let data = self.data.iter().map(|&a| f.neg(a)).collect();
        Matrix { nrows: self.nrows, ncols: self.ncols, data, field: self.field.clone() }
    }

    pub fn scalar_mul(&self, c: Fq) -> Matrix {
        let f = &self.field;
        let data = self.data.iter().map(|&a| f.mul(a, c)).collect();
        Matrix { nrows: self.nrows, ncols: self.ncols, data, field: self.field.clone() }
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix, MatError> {
        self.check_same_field(other)?;
        if self.ncols != other.nrows {
            return Err(MatError::ShapeMismatch(self.nrows, self.ncols, other.nrows, other.ncols));
        }
        if self.field.p() == 2 {
            return Ok(self.mul_char2(other));
        }
        let f = &self.field;
        let mut out = Matrix::zero(self.nrows, other.ncols, self.field.clone());
        let oc = other.ncols;
        for i in 0..self.nrows {
            for k in 0..self.ncols {
                let a = self.at(i, k);
                if a == 0 {
                    continue;
                }
                let brow = &other.data[k * oc..(k + 1) * oc];
                let crow = &mut out.data[i * oc..(i + 1) * oc];
                for j in 0..oc {
                    crow[j] = f.add(crow[j], f.mul(a, brow[j]));
                }
            }
        }
        Ok(out)
    }

    /// Characteristic-2 kernel: rows of `other` are held as f bit planes so a
    /// scalar multiply-accumulate costs O(f^2) word XORs per plane word.
    fn mul_char2(&self, other: &Matrix) -> Matrix {
        let f = &self.field;
        let fdeg = f.f();
        let oc = other.ncols;
        let words = oc.div_ceil(64);
        // bit planes of other: plane[t][k] holds bit t of row k
        let mut planes = vec![vec![0u64; words * other.nrows]; fdeg];
        for k in 0..other.nrows {
            for j in 0..oc {
                let v = other.at(k, j);
                if v == 0 {
                    continue;
                }
                let mut digits = v;
                let mut t = 0;
                while digits > 0 {
                    if digits & 1 == 1 {
                        planes[t][k * words + j / 64] |= 1u64 << (j % 64);
                    }
                    digits >>= 1;
                    t += 1;
                }
            }
        }
        // scalar action bitmaps: for scalar a and source plane s, which output
        // planes receive plane s (the F_2-linear map of multiplication by a)
        let q = f.q();
        let mut scalar_map = vec![0u64; (q as usize) * fdeg];
        for a in 1..q {
            for s in 0..fdeg {
                let prod = f.mul(a, f.omega(s + 1));
                scalar_map[a as usize * fdeg + s] = prod;
            }
        }
        let mut out = Matrix::zero(self.nrows, oc, self.field.clone());
        let mut acc = vec![0u64; fdeg * words];
        for i in 0..self.nrows {
            acc.iter_mut().for_each(|w| *w = 0);
            for k in 0..self.ncols {
                let a = self.at(i, k);
                if a == 0 {
                    continue;
                }
                for s in 0..fdeg {
                    let mut prod = scalar_map[a as usize * fdeg + s];
                    let mut t = 0;
                    while prod > 0 {
                        if prod & 1 == 1 {
                            let src = &planes[s][k * words..(k + 1) * words];
                            let dst = &mut acc[t * words..(t + 1) * words];
                            for (d, &sw) in dst.iter_mut().zip(src) {
                                *d ^= sw;
                            }
                        }
                        prod >>= 1;
                        t += 1;
                    }
                }
            }
            for j in 0..oc {
                let mut v: u64 = 0;
                for t in (0..fdeg).rev() {
                    v = (v << 1) | ((acc[t * words + j / 64] >> (j % 64)) & 1);
                }
                out.data[i * oc + j] = v;
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zero(self.ncols, self.nrows, self.field.clone());
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                out.data[j * self.nrows + i] = self.at(i, j);
            }
        }
        out
    }

    pub fn pow(&self, e: &BigUint) -> Result<Matrix, MatError> {
        assert!(self.is_square());
        let mut acc = Matrix::identity(self.nrows, self.field.clone());
        let mut base = self.clone();
        let bits = e.bits();
        for i in 0..bits {
            if e.bit(i) {
                acc = acc.mul(&base)?;
            }
            if i + 1 < bits {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    pub fn pow_u64(&self, e: u64) -> Result<Matrix, MatError> {
        self.pow(&BigUint::from(e))
    }

    /// Gauss-Jordan inverse.
    pub fn inv(&self) -> Result<Matrix, MatError> {
        assert!(self.is_square());
        let n = self.nrows;
        let f = self.field.clone();
        let mut a = self.clone();
        let mut b = Matrix::identity(n, f.clone());
        for col in 0..n {
            let piv = (col..n).find(|&r| a.at(r, col) != 0).ok_or(MatError::Singular)?;
            if piv != col {
                a.swap_rows(piv, col);
                b.swap_rows(piv, col);
            }
            let pinv = f.inv(a.at(col, col)).unwrap();
            a.scale_row(col, pinv);
            b.scale_row(col, pinv);
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a.at(r, col);
                if factor == 0 {
                    continue;
                }
                let nf = f.neg(factor);
                a.add_row_multiple(r, col, nf);
                b.add_row_multiple(r, col, nf);
            }
        }
        Ok(b)
    }

    pub fn det(&self) -> Fq {
        assert!(self.is_square());
        let n = self.nrows;
        let f = &self.field;
        let mut a = self.clone();
        let mut det = f.one();
        for col in 0..n {
            let piv = match (col..n).find(|&r| a.at(r, col) != 0) {
                Some(p) => p,
                None => return 0,
            };
            if piv != col {
                a.swap_rows(piv, col);
                det = f.neg(det);
            }
            let pv = a.at(col, col);
            det = f.mul(det, pv);
            let pinv = f.inv(pv).unwrap();
            for r in col + 1..n {
                let factor = f.mul(a.at(r, col), pinv);
                if factor != 0 {
                    a.add_row_multiple(r, col, f.neg(factor));
                }
            }
        }
        det
    }

    pub fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.ncols {
            self.data.swap(i * self.ncols + c, j * self.ncols + c);
        }
    }

    pub fn scale_row(&mut self, i: usize, c: Fq) {
        let f = self.field.clone();
        for v in &mut self.data[i * self.ncols..(i + 1) * self.ncols] {
            *v = f.mul(*v, c);
        }
    }

    /// row_i += c * row_j
    pub fn add_row_multiple(&mut self, i: usize, j: usize, c: Fq) {
        assert_ne!(i, j);
        let f = self.field.clone();
        let (lo, hi) = (i.min(j), i.max(j));
        let (head, tail) = self.data.split_at_mut(hi * self.ncols);
        let row_lo = &head[lo * self.ncols..(lo + 1) * self.ncols];
        let row_hi = &mut tail[..self.ncols];
        if i > j {
            for (d, &s) in row_hi.iter_mut().zip(row_lo) {
                *d = f.add(*d, f.mul(c, s));
            }
        } else {
            let row_i = &mut head[lo * self.ncols..(lo + 1) * self.ncols];
            for (d, &s) in row_i.iter_mut().zip(row_hi.iter()) {
                *d = f.add(*d, f.mul(c, s));
            }
        }
    }

    /// col_i += c * col_j
    pub fn add_col_multiple(&mut self, i: usize, j: usize, c: Fq) {
        assert_ne!(i, j);
        let f = self.field.clone();
        for r in 0..self.nrows {
            let v = f.mul(c, self.at(r, j));
            let cur = self.at(r, i);
            self.set(r, i, f.add(cur, v));
        }
    }

    /// Reduced row echelon form; returns (rref, pivot columns).
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let f = self.field.clone();
        let mut a = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..a.ncols {
            if row == a.nrows {
                break;
            }
            let piv = match (row..a.nrows).find(|&r| a.at(r, col) != 0) {
                Some(p) => p,
                None => continue,
            };
            a.swap_rows(piv, row);
            let pinv = f.inv(a.at(row, col)).unwrap();
            a.scale_row(row, pinv);
            for r in 0..a.nrows {
                if r != row && a.at(r, col) != 0 {
                    let c = f.neg(a.at(r, col));
                    a.add_row_multiple(r, row, c);
                }
            }
            pivots.push(col);
            row += 1;
        }
        (a, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of `{v : v A = 0}` as rows of a matrix (possibly 0 rows).
    pub fn kernel(&self) -> Matrix {
        let at = self.transpose();
        let (r, pivots) = at.rref();
        let n = self.nrows;
        let f = &self.field;
        let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
        let mut rows = Vec::with_capacity(free.len());
        for &fc in &free {
            let mut v = vec![0; n];
            v[fc] = 1;
            for (ri, &pc) in pivots.iter().enumerate() {
                v[pc] = f.neg(r.at(ri, fc));
            }
            rows.push(v);
        }
        Matrix::from_rows(&rows, self.field.clone())
    }

    /// Monic characteristic polynomial via Hessenberg reduction.
    pub fn charpoly(&self) -> Poly {
        assert!(self.is_square());
        let n = self.nrows;
        let f = &self.field;
        if n == 0 {
            return Poly::one();
        }
        let mut h = self.clone();
        for j in 0..n.saturating_sub(2) {
            if h.at(j + 1, j) == 0 {
                if let Some(r) = (j + 2..n).find(|&r| h.at(r, j) != 0) {
                    h.swap_rows(j + 1, r);
                    h.swap_cols(j + 1, r);
                } else {
                    continue;
                }
            }
            let pinv = f.inv(h.at(j + 1, j)).unwrap();
            for r in j + 2..n {
                let factor = f.mul(h.at(r, j), pinv);
                if factor == 0 {
                    continue;
                }
                h.add_row_multiple(r, j + 1, f.neg(factor));
                h.add_col_multiple(j + 1, r, factor);
            }
        }
        // recurrence over leading principal minors of the Hessenberg form
        let mut ps: Vec<Poly> = Vec::with_capacity(n + 1);
        ps.push(Poly::one());
        for m in 1..=n {
            let lin = Poly::from_coeffs(vec![f.neg(h.at(m - 1, m - 1)), 1]);
            let mut pm = lin.mul(&ps[m - 1], f);
            let mut subprod = f.one();
            for i in (1..m).rev() {
                subprod = f.mul(subprod, h.at(i, i - 1));
                let c = f.mul(h.at(i - 1, m - 1), subprod);
                if c != 0 {
                    pm = pm.sub(&ps[i - 1].mul_scalar(c, f), f);
                }
            }
            ps.push(pm);
        }
        ps.pop().unwrap()
    }

    pub fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for r in 0..self.nrows {
            self.data.swap(r * self.ncols + i, r * self.ncols + j);
        }
    }

    /// Evaluate a polynomial at this matrix (Horner).
    pub fn eval_poly(&self, p: &Poly) -> Matrix {
        assert!(self.is_square());
        let n = self.nrows;
        let mut acc = Matrix::zero(n, n, self.field.clone());
        for &c in p.coeffs().iter().rev() {
            acc = acc.mul(self).unwrap();
            for i in 0..n {
                let cur = acc.at(i, i);
                acc.set(i, i, self.field.add(cur, c));
            }
        }
        acc
    }

    /// v * A for a row vector v.
    pub fn apply_row(&self, v: &[Fq]) -> Vec<Fq> {
        assert_eq!(v.len(), self.nrows);
        let f = &self.field;
        let mut out = vec![0; self.ncols];
        for (k, &a) in v.iter().enumerate() {
            if a == 0 {
                continue;
            }
            let row = self.row(k);
            for j in 0..self.ncols {
                out[j] = f.add(out[j], f.mul(a, row[j]));
            }
        }
        out
    }

    /// Top-left block of the given size.
    pub fn block_top_left(&self, k: usize) -> Matrix {
        let mut out = Matrix::zero(k, k, self.field.clone());
        for i in 0..k {
            for j in 0..k {
                out.set(i, j, self.at(i, j));
            }
        }
        out
    }

    /// True iff the matrix equals diag(block, I) for the given block size.
    pub fn is_embedded_block(&self, k: usize) -> bool {
        assert!(self.is_square());
        let n = self.nrows;
        for i in 0..n {
            for j in 0..n {
                if i >= k || j >= k {
                    let want = u64::from(i == j);
                    if self.at(i, j) != want {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn random<R: rand::Rng>(
        nrows: usize,
        ncols: usize,
        field: Arc<FieldSpec>,
        rng: &mut R,
    ) -> Matrix {
        let q = field.q();
        let data = (0..nrows * ncols).map(|_| rng.gen_range(0..q)).collect();
        Matrix { nrows, ncols, data, field }
    }

    pub fn random_invertible<R: rand::Rng>(
        n: usize,
        field: Arc<FieldSpec>,
        rng: &mut R,
    ) -> Matrix {
        loop {
            let m = Matrix::random(n, n, field.clone(), rng);
            if m.det() != 0 {
                return m;
            }
        }
    }
}
