//! Subspaces of F_q^d in reduced-echelon canonical form, base changes,
//! restrictions and invariance tests.

use super::{MatError, Matrix};
use crate::gfq::Fq;

/// Row space in reduced row echelon form; equality of subspaces is equality
/// of their canonical basis matrices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subspace {
    ambient: usize,
    basis: Matrix,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn from_rows(rows: &Matrix) -> Subspace {
        let (r, pivots) = rows.rref();
        let dim = pivots.len();
        let mut basis = Matrix::zero(dim, rows.ncols(), rows.field().clone());
        for i in 0..dim {
            for j in 0..rows.ncols() {
                basis.set(i, j, r.at(i, j));
            }
        }
        Subspace { ambient: rows.ncols(), basis, pivots }
    }

    pub fn zero(ambient: usize, field: std::sync::Arc<crate::gfq::FieldSpec>) -> Subspace {
        Subspace {
            ambient,
            basis: Matrix::zero(0, ambient, field),
            pivots: Vec::new(),
        }
    }

    pub fn full(ambient: usize, field: std::sync::Arc<crate::gfq::FieldSpec>) -> Subspace {
        Subspace::from_rows(&Matrix::identity(ambient, field))
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    fn check_ambient(&self, other: &Subspace) -> Result<(), MatError> {
        if self.ambient != other.ambient {
            return Err(MatError::AmbientMismatch(self.ambient, other.ambient));
        }
        Ok(())
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace, MatError> {
        self.check_ambient(other)?;
        let mut rows: Vec<Vec<Fq>> = Vec::with_capacity(self.dim() + other.dim());
        rows.extend(self.basis.rows().map(|r| r.to_vec()));
        rows.extend(other.basis.rows().map(|r| r.to_vec()));
        Ok(Subspace::from_rows(&Matrix::from_rows(&rows, self.basis.field().clone())))
    }

    /// Zassenhaus: row reduce [U | U; W | 0]; rows with zero left half have
    /// right halves spanning the intersection.
    pub fn intersect(&self, other: &Subspace) -> Result<Subspace, MatError> {
        self.check_ambient(other)?;
        let d = self.ambient;
        let field = self.basis.field().clone();
        let mut rows: Vec<Vec<Fq>> = Vec::new();
        for r in self.basis.rows() {
            let mut v = r.to_vec();
            v.extend_from_slice(r);
            rows.push(v);
        }
        for r in other.basis.rows() {
            let mut v = r.to_vec();
            v.extend(std::iter::repeat(0).take(d));
            rows.push(v);
        }
        if rows.is_empty() {
            return Ok(Subspace::zero(d, field));
        }
        let stacked = Matrix::from_rows(&rows, field.clone());
        let (r, _) = stacked.rref();
        let mut out: Vec<Vec<Fq>> = Vec::new();
        for i in 0..r.nrows() {
            let row = r.row(i);
            if row[..d].iter().all(|&x| x == 0) && row[d..].iter().any(|&x| x != 0) {
                out.push(row[d..].to_vec());
            }
        }
        if out.is_empty() {
            return Ok(Subspace::zero(d, field));
        }
        Ok(Subspace::from_rows(&Matrix::from_rows(&out, field)))
    }

    pub fn contains_vector(&self, v: &[Fq]) -> bool {
        self.coords_of(v).is_some()
    }

    /// Coordinates of `v` in the echelon basis, or None if v is outside.
    pub fn coords_of(&self, v: &[Fq]) -> Option<Vec<Fq>> {
        assert_eq!(v.len(), self.ambient);
        let f = self.basis.field();
        let mut residual = v.to_vec();
        let mut coords = vec![0; self.dim()];
        for (i, &pc) in self.pivots.iter().enumerate() {
            let c = residual[pc];
            if c != 0 {
                coords[i] = c;
                let row = self.basis.row(i);
                for j in 0..self.ambient {
                    residual[j] = f.sub(residual[j], f.mul(c, row[j]));
                }
            }
        }
        if residual.iter().all(|&x| x == 0) {
            Some(coords)
        } else {
            None
        }
    }

    pub fn contains(&self, other: &Subspace) -> Result<bool, MatError> {
        self.check_ambient(other)?;
        Ok(other.basis.rows().all(|r| self.contains_vector(r)))
    }
}

/// Invertible base change; rows of `l` are the new basis vectors expressed in
/// the old coordinates. A matrix `a` is rewritten to the new basis as
/// `l * a * l^-1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseChange {
    l: Matrix,
    l_inv: Matrix,
}

impl BaseChange {
    pub fn new(l: Matrix) -> Result<BaseChange, MatError> {
        let l_inv = l.inv().map_err(|_| MatError::Singular)?;
        Ok(BaseChange { l, l_inv })
    }

    pub fn identity(d: usize, field: std::sync::Arc<crate::gfq::FieldSpec>) -> BaseChange {
        let l = Matrix::identity(d, field);
        BaseChange { l_inv: l.clone(), l }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.l
    }

    pub fn inverse(&self) -> &Matrix {
        &self.l_inv
    }

    /// Representation of `a` in the new basis.
    pub fn conjugate(&self, a: &Matrix) -> Matrix {
        self.l.mul(a).unwrap().mul(&self.l_inv).unwrap()
    }
}

/// Image (row space) and kernel `{v : v A = 0}` of a square matrix; for a
/// stingray element s the caller passes s - I to get body and tail.
pub fn image_and_kernel(a: &Matrix) -> (Subspace, Subspace) {
    let image = Subspace::from_rows(a);
    let kernel = Subspace::from_rows(&a.kernel());
    (image, kernel)
}

/// Complete independent rows to a basis, drawing completion rows first from
/// `preferred` (greedy scan of its basis) and then from the standard basis.
pub fn extend_to_basis(
    partial: &Matrix,
    preferred: Option<&Subspace>,
) -> Result<BaseChange, MatError> {
    let d = partial.ncols();
    let field = partial.field().clone();
    if partial.rank() != partial.nrows() {
        return Err(MatError::DependentInput);
    }
    let mut rows: Vec<Vec<Fq>> = partial.rows().map(|r| r.to_vec()).collect();
    let mut rank = rows.len();
    let mut candidates: Vec<Vec<Fq>> = Vec::new();
    if let Some(p) = preferred {
        candidates.extend(p.basis().rows().map(|r| r.to_vec()));
    }
    for i in 0..d {
        let mut e = vec![0; d];
        e[i] = 1;
        candidates.push(e);
    }
    for cand in candidates {
        if rank == d {
            break;
        }
        let mut trial = rows.clone();
        trial.push(cand.clone());
        let m = Matrix::from_rows(&trial, field.clone());
        if m.rank() == rank + 1 {
            rows.push(cand);
            rank += 1;
        }
    }
    debug_assert_eq!(rank, d);
    BaseChange::new(Matrix::from_rows(&rows, field))
}

/// Matrix of the action of `a` on the invariant subspace `w`, written in the
/// echelon basis of `w`.
pub fn restrict(a: &Matrix, w: &Subspace) -> Result<Matrix, MatError> {
    let k = w.dim();
    let mut out = Matrix::zero(k, k, a.field().clone());
    for i in 0..k {
        let image = a.apply_row(w.basis().row(i));
        let coords = w.coords_of(&image).ok_or(MatError::NotInvariant)?;
        for j in 0..k {
            out.set(i, j, coords[j]);
        }
    }
    Ok(out)
}

/// True iff the characteristic polynomial of the restriction is irreducible,
/// which for a single matrix is equivalent to acting irreducibly on `w`.
pub fn irreducible_on(a: &Matrix, w: &Subspace) -> Result<bool, MatError> {
    let r = restrict(a, w)?;
    Ok(r.charpoly().is_irreducible(a.field()))
}
