//! Polynomials over GF(q) and their complete factorization
//! (square-free split, distinct-degree, Cantor-Zassenhaus equal-degree).

use super::{FieldSpec, Fq};
use num_bigint::BigUint;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Dense polynomial in canonical form: no trailing zero coefficients,
/// the zero polynomial has an empty coefficient list.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    coeffs: Vec<Fq>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Poly {
        Poly { coeffs: vec![1] }
    }

    pub fn x() -> Poly {
        Poly { coeffs: vec![0, 1] }
    }

    pub fn constant(c: Fq) -> Poly {
        Poly::from_coeffs(vec![c])
    }

    pub fn from_coeffs(mut coeffs: Vec<Fq>) -> Poly {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn coeffs(&self) -> &[Fq] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Fq {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn deg(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> Fq {
        *self.coeffs.last().expect("leading coefficient of zero polynomial")
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last() == Some(&1)
    }

    pub fn add(&self, other: &Poly, field: &FieldSpec) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(field.add(self.coeff(i), other.coeff(i)));
        }
        Poly::from_coeffs(out)
    }

    pub fn sub(&self, other: &Poly, field: &FieldSpec) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(field.sub(self.coeff(i), other.coeff(i)));
        }
        Poly::from_coeffs(out)
    }

    pub fn mul(&self, other: &Poly, field: &FieldSpec) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = field.add(out[i + j], field.mul(a, b));
            }
        }
        Poly::from_coeffs(out)
    }

    pub fn mul_scalar(&self, c: Fq, field: &FieldSpec) -> Poly {
        Poly::from_coeffs(self.coeffs.iter().map(|&a| field.mul(a, c)).collect())
    }

    pub fn monic(&self, field: &FieldSpec) -> Poly {
        if self.is_zero() || self.is_monic() {
            return self.clone();
        }
        let li = field.inv(self.lead()).expect("nonzero leading coefficient");
        self.mul_scalar(li, field)
    }

    /// Euclidean division, `divisor` nonzero.
    pub fn divrem(&self, divisor: &Poly, field: &FieldSpec) -> (Poly, Poly) {
        assert!(!divisor.is_zero(), "division by zero polynomial");
        let dd = divisor.deg().unwrap();
        if self.deg().is_none() || self.deg().unwrap() < dd {
            return (Poly::zero(), self.clone());
        }
        let li = field.inv(divisor.lead()).unwrap();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![0; rem.len() - dd];
        for k in (dd..rem.len()).rev() {
            let c = field.mul(rem[k], li);
            if c == 0 {
                continue;
            }
            quot[k - dd] = c;
            for (l, &mc) in divisor.coeffs.iter().enumerate() {
                rem[k - dd + l] = field.sub(rem[k - dd + l], field.mul(c, mc));
            }
        }
        (Poly::from_coeffs(quot), Poly::from_coeffs(rem))
    }

    pub fn rem(&self, divisor: &Poly, field: &FieldSpec) -> Poly {
        self.divrem(divisor, field).1
    }

    /// Monic gcd.
    pub fn gcd(a: &Poly, b: &Poly, field: &FieldSpec) -> Poly {
        let mut a = a.clone();
        let mut b = b.clone();
        while !b.is_zero() {
            let r = a.rem(&b, field);
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            a.monic(field)
        }
    }

    pub fn eval(&self, x: Fq, field: &FieldSpec) -> Fq {
        let mut acc = 0;
        for &c in self.coeffs.iter().rev() {
            acc = field.add(field.mul(acc, x), c);
        }
        acc
    }

    pub fn derivative(&self, field: &FieldSpec) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        let mut out = Vec::with_capacity(self.coeffs.len() - 1);
        for (i, &c) in self.coeffs.iter().enumerate().skip(1) {
            let ip = (i as u64) % field.p();
            out.push(field.mul(c, ip % field.q()));
        }
        Poly::from_coeffs(out)
    }

    pub fn powmod_u128(&self, e: u128, modulus: &Poly, field: &FieldSpec) -> Poly {
        self.powmod(&BigUint::from(e), modulus, field)
    }

    pub fn powmod(&self, e: &BigUint, modulus: &Poly, field: &FieldSpec) -> Poly {
        let mut base = self.rem(modulus, field);
        let mut acc = Poly::one();
        let bits = e.bits();
        for i in 0..bits {
            if e.bit(i) {
                acc = acc.mul(&base, field).rem(modulus, field);
            }
            if i + 1 < bits {
                base = base.mul(&base, field).rem(modulus, field);
            }
        }
        acc
    }

    /// Irreducibility over GF(q) via the distinct-degree criterion.
    pub fn is_irreducible(&self, field: &FieldSpec) -> bool {
        match self.deg() {
            None | Some(0) => false,
            Some(1) => true,
            Some(n) => {
                let m = self.monic(field);
                let x = Poly::x();
                let mut h = x.clone();
                for _ in 0..n {
                    h = h.powmod_u128(field.q() as u128, &m, field);
                }
                if h != x {
                    return false;
                }
                for r in super::prime_divisors(n as u64) {
                    let k = n / r as usize;
                    let mut h = x.clone();
                    for _ in 0..k {
                        h = h.powmod_u128(field.q() as u128, &m, field);
                    }
                    if Poly::gcd(&h.sub(&x, field), &m, field).deg() != Some(0) {
                        return false;
                    }
                }
                true
            }
        }
    }
}

/// Multiset of irreducible factors with multiplicities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorProfile {
    pub factors: Vec<(Poly, usize)>,
}

impl FactorProfile {
    /// Re-multiply all factors; used as the factorization oracle in tests.
    pub fn product(&self, field: &FieldSpec) -> Poly {
        let mut acc = Poly::one();
        for (p, e) in &self.factors {
            for _ in 0..*e {
                acc = acc.mul(p, field);
            }
        }
        acc
    }

    /// Factors of a given degree.
    pub fn of_degree(&self, d: usize) -> Vec<&(Poly, usize)> {
        self.factors.iter().filter(|(p, _)| p.deg() == Some(d)).collect()
    }
}

/// Complete factorization of a nonzero monic polynomial into irreducibles.
pub fn poly_factor(chi: &Poly, field: &FieldSpec) -> FactorProfile {
    assert!(!chi.is_zero(), "cannot factor the zero polynomial");
    let mut p = chi.monic(field);
    let mut factors: Vec<(Poly, usize)> = Vec::new();
    // Deterministic rng for the equal-degree splits, seeded from the input.
    let mut seed = [0u8; 32];
    for (i, &c) in chi.coeffs().iter().enumerate() {
        seed[i % 32] ^= (c as u8).wrapping_add(i as u8);
    }
    let mut rng = ChaCha8Rng::from_seed(seed);

    while p.deg() != Some(0) {
        let s = squarefree_part(&p, field);
        for irr in factor_squarefree(&s, field, &mut rng) {
            let mut mult = 0usize;
            loop {
                let (q, r) = p.divrem(&irr, field);
                if !r.is_zero() {
                    break;
                }
                p = q;
                mult += 1;
            }
            debug_assert!(mult > 0);
            factors.push((irr, mult));
        }
    }
    factors.sort_by(|a, b| {
        (a.0.deg(), a.0.coeffs(), a.1).cmp(&(b.0.deg(), b.0.coeffs(), b.1))
    });
    FactorProfile { factors }
}

/// A squarefree polynomial with the same irreducible factors as `p`.
fn squarefree_part(p: &Poly, field: &FieldSpec) -> Poly {
    let d = p.derivative(field);
    if d.is_zero() {
        // p = r(x^p); its irreducible factors are those of the p-th root
        return squarefree_part(&pth_root(p, field), field);
    }
    let g = Poly::gcd(p, &d, field);
    p.divrem(&g, field).0.monic(field)
}

/// For p with vanishing derivative, p(x) = r(x^char); return r with
/// coefficients replaced by their char-th roots.
fn pth_root(p: &Poly, field: &FieldSpec) -> Poly {
    let ch = field.p() as usize;
    let mut out = Vec::new();
    for (i, &c) in p.coeffs().iter().enumerate() {
        if i % ch == 0 {
            // c^(q/p) is the p-th root in GF(q)
            out.push(field.pow(c, (field.q() / field.p()) as u128));
        } else {
            debug_assert_eq!(c, 0);
        }
    }
    Poly::from_coeffs(out)
}

fn factor_squarefree(s: &Poly, field: &FieldSpec, rng: &mut ChaCha8Rng) -> Vec<Poly> {
    let mut out = Vec::new();
    let mut s = s.clone();
    if s.deg() == Some(0) {
        return out;
    }
    // distinct-degree split
    let x = Poly::x();
    let mut h = x.clone();
    let mut k = 0usize;
    while let Some(ds) = s.deg() {
        if ds == 0 {
            break;
        }
        k += 1;
        if 2 * k > ds {
            // what is left is irreducible
            out.push(s.monic(field));
            break;
        }
        h = h.powmod_u128(field.q() as u128, &s, field);
        let g = Poly::gcd(&h.sub(&x, field), &s, field);
        if g.deg() != Some(0) {
            equal_degree_split(&g, k, field, rng, &mut out);
            s = s.divrem(&g, field).0;
            h = h.rem(&s, field);
        }
    }
    out
}

/// Cantor-Zassenhaus: split a product of distinct irreducibles of degree k.
fn equal_degree_split(
    g: &Poly,
    k: usize,
    field: &FieldSpec,
    rng: &mut ChaCha8Rng,
    out: &mut Vec<Poly>,
) {
    let dg = g.deg().unwrap();
    if dg == k {
        out.push(g.monic(field));
        return;
    }
    let q = BigUint::from(field.q());
    loop {
        let deg_r = rng.gen_range(1..dg);
        let mut coeffs = vec![0; deg_r + 1];
        for c in coeffs.iter_mut() {
            *c = rng.gen_range(0..field.q());
        }
        let r = Poly::from_coeffs(coeffs);
        if r.deg().is_none() {
            continue;
        }
        let h = if field.p() == 2 {
            // trace map sum r^(2^i), i < f*k
            let mut t = r.rem(g, field);
            let mut acc = t.clone();
            let steps = field.f() * k;
            for _ in 1..steps {
                t = t.mul(&t, field).rem(g, field);
                acc = acc.add(&t, field);
            }
            acc
        } else {
            let e = (q.pow(k as u32) - 1u32) / 2u32;
            let pw = r.powmod(&e, g, field);
            pw.sub(&Poly::one(), field)
        };
        let d = Poly::gcd(&h, g, field);
        if let Some(dd) = d.deg() {
            if dd > 0 && dd < dg {
                equal_degree_split(&d, k, field, rng, out);
                equal_degree_split(&g.divrem(&d, field).0, k, field, rng, out);
                return;
            }
        }
    }
}
