//! Finding ppd stingray elements: classify pre-stingray candidates from
//! characteristic polynomials, power them up to kill the non-stingray part
//! of the spectrum, and certify the result.

use crate::gfq::{poly_factor, FactorProfile, FieldError, FieldSpec, Poly};
use crate::matfq::{image_and_kernel, irreducible_on, Matrix, Subspace};
use crate::mslp::{Handle, WordArena};
use crate::rnd::{Budget, PrSource, RndError};
use num_bigint::BigUint;

/// A certified stingray element: s has a (d-m)-dimensional fixed space
/// (the tail) and acts irreducibly on the complementary m-dimensional
/// invariant body im(s-1).
#[derive(Debug, Clone)]
pub struct StingrayCert {
    pub s: Matrix,
    pub m: usize,
    pub body: Subspace,
    pub tail: Subspace,
    pub stingray_factor: Poly,
    pub ppd_certified: bool,
    /// Exponent the sampled candidate was raised to.
    pub power: BigUint,
    pub word: Handle,
}

impl StingrayCert {
    /// Re-check every certificate invariant from scratch; the test suites use
    /// this as the oracle.
    pub fn verify(&self) -> bool {
        let d = self.s.nrows();
        let id = Matrix::identity(d, self.s.field().clone());
        let smi = match self.s.sub(&id) {
            Ok(m) => m,
            Err(_) => return false,
        };
        let (body, tail) = image_and_kernel(&smi);
        if body.dim() != self.m || body != self.body || tail != self.tail {
            return false;
        }
        if body.dim() + tail.dim() != d {
            return false;
        }
        match body.intersect(&tail) {
            Ok(i) if i.is_zero() => {}
            _ => return false,
        }
        // every tail vector is fixed
        for r in 0..tail.dim() {
            if self.s.apply_row(tail.basis().row(r)) != tail.basis().row(r) {
                return false;
            }
        }
        matches!(irreducible_on(&self.s, &body), Ok(true))
    }
}

/// ceil(log2(n))
pub fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// Stingray body bounds used during descent from degree d1: bodies of
/// dimension 2 up to 2*ceil(log2 d1), and at most d1 - 2 so a nontrivial
/// tail remains.
pub fn body_bounds(d1: usize) -> (usize, usize) {
    let hi = (2 * ceil_log2(d1)).min(d1.saturating_sub(2)).max(2);
    (2, hi)
}

/// Scan the factored characteristic polynomial for a stingray factor: an
/// irreducible factor of multiplicity 1 whose degree m lies in
/// [m_lo, m_hi] and divides no other factor's degree. The smallest
/// qualifying degree wins.
pub fn classify_prestingray(
    g: &Matrix,
    m_lo: usize,
    m_hi: usize,
) -> Option<(Poly, FactorProfile)> {
    let profile = poly_factor(&g.charpoly(), g.field());
    classify_profile(&profile, m_lo, m_hi).map(|p1| (p1, profile))
}

fn classify_profile(profile: &FactorProfile, m_lo: usize, m_hi: usize) -> Option<Poly> {
    let mut best: Option<&Poly> = None;
    for (p, mult) in &profile.factors {
        let m = p.deg().unwrap();
        if m < m_lo.max(2) || m > m_hi || *mult != 1 {
            continue;
        }
        let clean = profile
            .factors
            .iter()
            .filter(|(q, _)| q != p)
            .all(|(q, _)| q.deg().unwrap() % m != 0);
        if clean && best.map_or(true, |b| m < b.deg().unwrap()) {
            best = Some(p);
        }
    }
    best.cloned()
}

/// The powering exponent B = p^beta * prod_{i >= 2} (q^deg(P_i) - 1) with
/// beta = ceil(log_p(max other multiplicity)); B = 1 when the stingray
/// factor is the whole characteristic polynomial.
pub fn power_exponent(p1: &Poly, profile: &FactorProfile, field: &FieldSpec) -> BigUint {
    let mut b = BigUint::from(1u32);
    let mut max_mult = 0usize;
    for (p, mult) in &profile.factors {
        if p == p1 {
            continue;
        }
        b *= BigUint::from(field.q()).pow(p.deg().unwrap() as u32) - 1u32;
        max_mult = max_mult.max(*mult);
    }
    if max_mult > 1 {
        // smallest beta with p^beta >= max multiplicity
        let mut beta = 0u32;
        let mut acc = 1usize;
        while acc < max_mult {
            acc = acc.saturating_mul(field.p() as usize);
            beta += 1;
        }
        b *= BigUint::from(field.p()).pow(beta);
    }
    b
}

/// s = g^B; for a pre-stingray candidate this has a (d-m)-dimensional
/// 1-eigenspace.
pub fn power_to_stingray(g: &Matrix, profile: &FactorProfile, p1: &Poly) -> Matrix {
    let b = power_exponent(p1, profile, g.field());
    g.pow(&b).expect("square matrix")
}

/// Outcome of the ppd check for one candidate.
enum PpdStatus {
    Certified,
    NotPpd,
    /// Phi was not computable at these parameters; fall back to explicit
    /// irreducibility certification after powering.
    Unknown,
}

fn ppd_check(p1: &Poly, field: &FieldSpec) -> PpdStatus {
    let m = p1.deg().unwrap();
    match crate::gfq::ppd_phi(m, field) {
        // q^m - 1 has no primitive prime divisor at all (Zsigmondy
        // exception, e.g. m = 2 with q + 1 a power of two): no candidate can
        // ever be ppd-certified, so rely on explicit certification instead
        Ok(1) => PpdStatus::Unknown,
        Ok(_) => match crate::gfq::ppd_witness(p1, field) {
            Ok(true) => PpdStatus::Certified,
            _ => PpdStatus::NotPpd,
        },
        Err(FieldError::FactorizationTooLarge(_)) => PpdStatus::Unknown,
        Err(_) => PpdStatus::NotPpd,
    }
}

/// Build and fully check a certificate for s = g^B.
fn certify(
    s: Matrix,
    p1: Poly,
    ppd_certified: bool,
    power: BigUint,
    word: Handle,
) -> Option<StingrayCert> {
    let d = s.nrows();
    let m = p1.deg().unwrap();
    let id = Matrix::identity(d, s.field().clone());
    let smi = s.sub(&id).ok()?;
    let (body, tail) = image_and_kernel(&smi);
    if body.dim() != m || tail.dim() != d - m {
        return None;
    }
    if !body.intersect(&tail).ok()?.is_zero() {
        return None;
    }
    if !matches!(irreducible_on(&s, &body), Ok(true)) {
        return None;
    }
    Some(StingrayCert { s, m, body, tail, stingray_factor: p1, ppd_certified, power, word })
}

/// When no ppd certificate is available, the theorem's exponent can collapse
/// the body spectrum into the base field. Reduced exponents B/(2^i 3^j 5^k
/// 7^l) keep the rest of the spectrum annihilated often enough; each trial is
/// fully certified, so wrong candidates are simply rejected.
fn exponent_ladder(b: &BigUint) -> Vec<BigUint> {
    let mut out = vec![b.clone()];
    let mut frontier = vec![b.clone()];
    for prime in [2u32, 3, 5, 7] {
        let p = BigUint::from(prime);
        let mut next = Vec::new();
        for base in &frontier {
            let mut cur = base.clone();
            for _ in 0..4 {
                if (&cur % &p) != BigUint::from(0u32) {
                    break;
                }
                cur /= &p;
                if cur == BigUint::from(0u32) {
                    break;
                }
                next.push(cur.clone());
            }
        }
        for x in next {
            if !out.contains(&x) {
                out.push(x.clone());
                frontier.push(x);
            }
        }
        if out.len() > 32 {
            break;
        }
    }
    out.truncate(32);
    out
}

/// Draw random elements until one is a ppd pre-stingray candidate with body
/// dimension in [m_lo, m_hi], power it up and certify. One-sided: a returned
/// certificate always satisfies all invariants; budget exhaustion is `fail`.
pub fn find_stingray_element(
    src: &mut PrSource,
    arena: &mut WordArena,
    budget: &mut Budget,
    m_lo: usize,
    m_hi: usize,
) -> Result<StingrayCert, RndError> {
    loop {
        let (g, word) = src.next(arena, budget)?;
        if m_lo > m_hi {
            continue;
        }
        let Some((p1, profile)) = classify_prestingray(&g, m_lo, m_hi) else {
            continue;
        };
        let certified = match ppd_check(&p1, g.field()) {
            PpdStatus::Certified => true,
            PpdStatus::NotPpd => continue,
            PpdStatus::Unknown => false,
        };
        let b = power_exponent(&p1, &profile, g.field());
        let exponents = if certified { vec![b] } else { exponent_ladder(&b) };
        for b in exponents {
            let s = g.pow(&b).expect("square matrix");
            if s.is_identity() {
                continue;
            }
            if let Some(cert) = certify(s, p1.clone(), certified, b.clone(), word) {
                let word_s =
                    if b == BigUint::from(1u32) { word } else { arena.pow(word, &b) };
                return Ok(StingrayCert { word: word_s, ..cert });
            }
        }
    }
}
