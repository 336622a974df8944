//! Elementary matrices, the two standard cycles and the standard generating
//! set of SL(n,q): E_{1,2}(omega_i), E_{2,1}(omega_i) for i <= f together
//! with the signed permutation matrices z1 and z2.

use super::Matrix;
use crate::gfq::{FieldSpec, Fq};
use std::sync::Arc;

/// E_{i,j}(lambda), 1-based indices, i != j.
pub fn transvection(d: usize, i: usize, j: usize, lambda: Fq, field: Arc<FieldSpec>) -> Matrix {
    assert!(i != j && 1 <= i && i <= d && 1 <= j && j <= d);
    let mut m = Matrix::identity(d, field);
    m.set(i - 1, j - 1, lambda);
    m
}

/// Permutation matrix of the n-cycle (1, n, n-1, ..., 2) with the (1,n) entry
/// replaced by -1 when n is even, which puts it in SL(n,q).
pub fn z1(n: usize, field: Arc<FieldSpec>) -> Matrix {
    assert!(n >= 2);
    let neg1 = field.neg(1);
    let mut m = Matrix::zero(n, n, field);
    m.set(0, n - 1, if n % 2 == 0 { neg1 } else { 1 });
    for k in 1..n {
        m.set(k, k - 1, 1);
    }
    m
}

/// Permutation matrix of the (n-1)-cycle (2, n, n-1, ..., 3) fixing 1, with
/// the (2,n) entry replaced by -1 when n is odd. For n = 2 this is the
/// identity.
pub fn z2(n: usize, field: Arc<FieldSpec>) -> Matrix {
    assert!(n >= 2);
    let neg1 = field.neg(1);
    let mut m = Matrix::zero(n, n, field);
    m.set(0, 0, 1);
    if n == 2 {
        m.set(1, 1, 1);
        return m;
    }
    m.set(1, n - 1, if n % 2 == 1 { neg1 } else { 1 });
    for k in 2..n {
        m.set(k, k - 1, 1);
    }
    m
}

/// diag(a, I_{d - a.nrows}).
pub fn embed(a: &Matrix, d: usize) -> Matrix {
    assert!(a.is_square() && a.nrows() <= d);
    let n = a.nrows();
    let mut m = Matrix::identity(d, a.field().clone());
    for i in 0..n {
        for j in 0..n {
            m.set(i, j, a.at(i, j));
        }
    }
    m
}

/// The 2f+2 standard generators of SL(n,q), embedded as diag(. , I_{d-n}).
/// Order: E_{1,2}(omega_1..omega_f), E_{2,1}(omega_1..omega_f), z1, z2.
pub fn standard_generators(n: usize, d: usize, field: Arc<FieldSpec>) -> Vec<Matrix> {
    assert!(2 <= n && n <= d);
    let f = field.f();
    let mut gens = Vec::with_capacity(2 * f + 2);
    for i in 1..=f {
        gens.push(transvection(d, 1, 2, field.omega(i), field.clone()));
    }
    for i in 1..=f {
        gens.push(transvection(d, 2, 1, field.omega(i), field.clone()));
    }
    gens.push(embed(&z1(n, field.clone()), d));
    gens.push(embed(&z2(n, field.clone()), d));
    gens
}
