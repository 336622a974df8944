//! Exact arithmetic in GF(p^f).
//!
//! A [`FieldSpec`] fixes the prime `p`, the extension degree `f` and a monic
//! irreducible modulus of degree `f` over F_p. Elements are stored in the
//! integer encoding `sum a_k p^(k-1)` of their coordinate vector with respect
//! to the basis (omega_1, ..., omega_f), omega_k = x^(k-1) mod modulus.

mod poly;
mod ppd;

pub use poly::{poly_factor, FactorProfile, Poly};
pub use ppd::{factor_integer, ppd_phi, ppd_witness};

use thiserror::Error;

/// Integer encoding of a field element, always `< q`.
pub type Fq = u64;

/// Largest q for which full multiplication/addition tables are precomputed.
const TABLE_LIMIT: u64 = 1024;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus is not a monic irreducible polynomial of the requested degree")]
    ReducibleModulus,
    #[error("division by zero")]
    DivisionByZero,
    #[error("integer factorization of {0} exceeds the configured bit bound")]
    FactorizationTooLarge(u128),
    #[error("q = p^f does not fit the configured integer width")]
    FieldTooLarge,
    #[error("element {0} is not a valid encoding in this field")]
    BadElement(u64),
    #[error("invalid field parameter: {0}")]
    BadParameter(String),
}

#[derive(Debug, Clone)]
struct Tables {
    mul: Vec<u32>,
    add: Vec<u32>,
    inv: Vec<u32>,
    neg: Vec<u32>,
}

/// Description of GF(p^f) with explicit F_p-basis (1, x, ..., x^(f-1)).
#[derive(Debug, Clone)]
pub struct FieldSpec {
    p: u64,
    f: usize,
    q: u64,
    /// f+1 coefficients over F_p, monic.
    modulus: Vec<u64>,
    tables: Option<Tables>,
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.f == other.f && self.modulus == other.modulus
    }
}
impl Eq for FieldSpec {}

impl FieldSpec {
    /// Build GF(p^f). When `modulus` is omitted the lexicographically smallest
    /// monic irreducible of degree f over F_p is chosen, which makes fields
    /// reproducible across runs.
    pub fn new(p: u64, f: usize, modulus: Option<Vec<u64>>) -> Result<FieldSpec, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if f == 0 {
            return Err(FieldError::BadParameter("extension degree must be >= 1".into()));
        }
        let q = checked_pow_u64(p, f).ok_or(FieldError::FieldTooLarge)?;
        let modulus = match modulus {
            Some(m) => {
                let m: Vec<u64> = m.into_iter().map(|c| c % p).collect();
                if m.len() != f + 1 || *m.last().unwrap() != 1 {
                    return Err(FieldError::ReducibleModulus);
                }
                if !irreducible_over_prime(&m, p) {
                    return Err(FieldError::ReducibleModulus);
                }
                m
            }
            None => default_modulus(p, f),
        };
        let mut field = FieldSpec { p, f, q, modulus, tables: None };
        if q <= TABLE_LIMIT {
            field.tables = Some(field.build_tables());
        }
        Ok(field)
    }

    /// Build GF(q) from the field order, factoring q = p^f.
    pub fn from_order(q: u64) -> Result<FieldSpec, FieldError> {
        if q < 2 {
            return Err(FieldError::BadParameter(format!("{q} is not a prime power")));
        }
        let mut p = q;
        for cand in 2..=u64::min(q, 1 << 20) {
            if cand * cand > q {
                break;
            }
            if q % cand == 0 {
                p = cand;
                break;
            }
        }
        let mut f = 0usize;
        let mut rem = q;
        while rem > 1 {
            if rem % p != 0 {
                return Err(FieldError::BadParameter(format!("{q} is not a prime power")));
            }
            rem /= p;
            f += 1;
        }
        FieldSpec::new(p, f, None)
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn f(&self) -> usize {
        self.f
    }
    pub fn q(&self) -> u64 {
        self.q
    }
    /// Modulus coefficients c_0..c_f over F_p, monic.
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn zero(&self) -> Fq {
        0
    }
    pub fn one(&self) -> Fq {
        1
    }

    /// Basis element omega_i = x^(i-1), 1-based, i <= f.
    pub fn omega(&self, i: usize) -> Fq {
        assert!(i >= 1 && i <= self.f, "omega index out of range");
        checked_pow_u64(self.p, i - 1).unwrap()
    }

    /// Validate an integer encoding.
    pub fn element(&self, a: u64) -> Result<Fq, FieldError> {
        if a < self.q {
            Ok(a)
        } else {
            Err(FieldError::BadElement(a))
        }
    }

    /// Coordinates of `a` with respect to (omega_1, ..., omega_f).
    pub fn coeffs(&self, a: Fq) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.f);
        let mut a = a;
        for _ in 0..self.f {
            out.push(a % self.p);
            a /= self.p;
        }
        out
    }

    pub fn from_coeffs(&self, coeffs: &[u64]) -> Fq {
        assert!(coeffs.len() <= self.f);
        let mut a = 0u64;
        for &c in coeffs.iter().rev() {
            a = a * self.p + c % self.p;
        }
        a
    }

    pub fn add(&self, a: Fq, b: Fq) -> Fq {
        if let Some(t) = &self.tables {
            return t.add[(a * self.q + b) as usize] as Fq;
        }
        self.add_generic(a, b)
    }

    pub fn neg(&self, a: Fq) -> Fq {
        if let Some(t) = &self.tables {
            return t.neg[a as usize] as Fq;
        }
        let mut digits = self.coeffs(a);
        for d in digits.iter_mut() {
            *d = (self.p - *d) % self.p;
        }
        self.from_coeffs(&digits)
    }

    pub fn sub(&self, a: Fq, b: Fq) -> Fq {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Fq, b: Fq) -> Fq {
        if let Some(t) = &self.tables {
            return t.mul[(a * self.q + b) as usize] as Fq;
        }
        self.mul_generic(a, b)
    }

    pub fn inv(&self, a: Fq) -> Result<Fq, FieldError> {
        if a == 0 {
            return Err(FieldError::DivisionByZero);
        }
        if let Some(t) = &self.tables {
            return Ok(t.inv[a as usize] as Fq);
        }
        // a^(q-2) = a^(-1) in GF(q)
        Ok(self.pow(a, (self.q - 2) as u128))
    }

    pub fn div(&self, a: Fq, b: Fq) -> Result<Fq, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Fq, mut e: u128) -> Fq {
        let mut base = a;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    fn add_generic(&self, a: Fq, b: Fq) -> Fq {
        if self.f == 1 {
            return (a + b) % self.p;
        }
        let da = self.coeffs(a);
        let db = self.coeffs(b);
        let sum: Vec<u64> = da.iter().zip(&db).map(|(x, y)| (x + y) % self.p).collect();
        self.from_coeffs(&sum)
    }

    fn mul_generic(&self, a: Fq, b: Fq) -> Fq {
        if self.f == 1 {
            return ((a as u128 * b as u128) % self.p as u128) as u64;
        }
        let da = self.coeffs(a);
        let db = self.coeffs(b);
        let mut prod = vec![0u64; 2 * self.f - 1];
        for (i, &x) in da.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % self.p;
            }
        }
        // reduce modulo the monic modulus
        for k in (self.f..prod.len()).rev() {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            prod[k] = 0;
            for (l, &mc) in self.modulus.iter().enumerate().take(self.f) {
                let idx = k - self.f + l;
                prod[idx] = (prod[idx] + c * (self.p - mc) % self.p) % self.p;
            }
        }
        self.from_coeffs(&prod[..self.f])
    }

    fn build_tables(&self) -> Tables {
        let q = self.q as usize;
        let mut mul = vec![0u32; q * q];
        let mut add = vec![0u32; q * q];
        let mut neg = vec![0u32; q];
        let mut inv = vec![0u32; q];
        for a in 0..self.q {
            for b in 0..self.q {
                mul[(a * self.q + b) as usize] = self.mul_generic(a, b) as u32;
                add[(a * self.q + b) as usize] = self.add_generic(a, b) as u32;
            }
        }
        for a in 0..self.q {
            let mut digits = self.coeffs(a);
            for d in digits.iter_mut() {
                *d = (self.p - *d) % self.p;
            }
            neg[a as usize] = self.from_coeffs(&digits) as u32;
        }
        for a in 1..self.q {
            if inv[a as usize] != 0 {
                continue;
            }
            for b in 1..self.q {
                if mul[(a * self.q + b) as usize] == 1 {
                    inv[a as usize] = b as u32;
                    inv[b as usize] = a as u32;
                    break;
                }
            }
        }
        Tables { mul, add, inv, neg }
    }
}

fn checked_pow_u64(base: u64, exp: usize) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

/// Deterministic Miller-Rabin, valid for all u64.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub(crate) fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod_u64(mut base: u64, mut exp: u64, m: u64) -> u64 {
    base %= m;
    let mut acc = 1u64 % m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_u64(acc, base, m);
        }
        base = mul_mod_u64(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Lexicographically smallest monic irreducible of degree f over F_p, where
/// lower-degree coefficients weigh less: candidates are enumerated in order of
/// c_0 + c_1 p + ... + c_{f-1} p^{f-1}.
fn default_modulus(p: u64, f: usize) -> Vec<u64> {
    if f == 1 {
        // x itself: basis (1), arithmetic is plain mod p
        return vec![0, 1];
    }
    let qf = checked_pow_u64(p, f).expect("validated by caller");
    for enc in 0..qf {
        let mut coeffs = Vec::with_capacity(f + 1);
        let mut e = enc;
        for _ in 0..f {
            coeffs.push(e % p);
            e /= p;
        }
        coeffs.push(1);
        if irreducible_over_prime(&coeffs, p) {
            return coeffs;
        }
    }
    unreachable!("irreducible polynomials of every degree exist over F_p")
}

/// Irreducibility of a monic polynomial over F_p via the distinct-degree
/// criterion: P of degree f is irreducible iff x^(p^f) = x (mod P) and
/// gcd(x^(p^(f/r)) - x, P) = 1 for every prime divisor r of f.
fn irreducible_over_prime(coeffs: &[u64], p: u64) -> bool {
    let f = coeffs.len() - 1;
    if f == 0 {
        return false;
    }
    if coeffs[f] != 1 {
        return false;
    }
    if f == 1 {
        return true;
    }
    let fp = FieldSpec { p, f: 1, q: p, modulus: vec![0, 1], tables: None };
    let m = Poly::from_coeffs(coeffs.to_vec());
    let x = Poly::x();
    // x^(p^f) mod m by f-fold Frobenius
    let mut h = x.clone();
    for _ in 0..f {
        h = h.powmod_u128(p as u128, &m, &fp);
    }
    if h != x {
        return false;
    }
    for r in prime_divisors(f as u64) {
        let k = f / r as usize;
        let mut h = x.clone();
        for _ in 0..k {
            h = h.powmod_u128(p as u128, &m, &fp);
        }
        let g = Poly::gcd(&h.sub(&x, &fp), &m, &fp);
        if g.deg() != Some(0) {
            return false;
        }
    }
    true
}

pub(crate) fn prime_divisors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}
