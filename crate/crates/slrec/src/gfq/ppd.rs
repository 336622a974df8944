//! Primitive prime divisors: Phi(m,q) and the ppd witness test.

use super::poly::Poly;
use super::{FieldError, FieldSpec};

/// Factorizations are refused above this bit size.
const FACTOR_BIT_BOUND: u32 = 96;

/// Trial division below this bound, Pollard rho above.
const TRIAL_BOUND: u128 = 1_000_000;

/// Product of all primitive prime divisors of q^m - 1, counting multiplicity:
/// primes r | q^m - 1 with r not dividing q^i - 1 for any i < m. Returns 1
/// when no primitive prime divisor exists (the Zsigmondy exceptions).
pub fn ppd_phi(m: usize, field: &FieldSpec) -> Result<u128, FieldError> {
    assert!(m >= 1);
    let q = field.q() as u128;
    let n = checked_pow_u128(q, m as u32)
        .filter(|v| v.leading_zeros() >= 128 - FACTOR_BIT_BOUND)
        .ok_or(FieldError::FactorizationTooLarge(u128::MAX))?
        - 1;
    if n == 0 {
        // q^m - 1 = 0 cannot happen for q >= 2; q = 2, m = 1 gives n = 1
        return Ok(1);
    }
    let mut phi: u128 = 1;
    for (r, v) in factor_integer(n)? {
        let mut primitive = true;
        for i in 1..m {
            if pow_mod_u128(q % r, i as u128, r) == 1 {
                primitive = false;
                break;
            }
        }
        if primitive {
            for _ in 0..v {
                phi *= r;
            }
        }
    }
    Ok(phi)
}

/// Theorem-level witness: true iff x^((q^m-1)/Phi(m,q)) != 1 in
/// F_q[x]/<P1>, certifying that the originating element is a
/// ppd(d,q;m)-element.
pub fn ppd_witness(p1: &Poly, field: &FieldSpec) -> Result<bool, FieldError> {
    let m = p1.deg().expect("P1 must be nonzero");
    assert!(m >= 1, "P1 must be non-constant");
    let phi = ppd_phi(m, field)?;
    if phi == 1 {
        // exponent is the full group order, x^(q^m - 1) = 1
        return Ok(false);
    }
    let q = field.q() as u128;
    let e = (checked_pow_u128(q, m as u32).unwrap() - 1) / phi;
    let x = Poly::x();
    let pw = x.powmod_u128(e, p1, field);
    Ok(pw != Poly::one())
}

/// Factor n into primes with multiplicities; trial division then Pollard rho.
pub fn factor_integer(n: u128) -> Result<Vec<(u128, u32)>, FieldError> {
    if n.leading_zeros() < 128 - FACTOR_BIT_BOUND {
        return Err(FieldError::FactorizationTooLarge(n));
    }
    let mut n = n;
    let mut out: Vec<(u128, u32)> = Vec::new();
    let push = |p: u128, out: &mut Vec<(u128, u32)>| {
        if let Some(last) = out.iter_mut().find(|(q, _)| *q == p) {
            last.1 += 1;
        } else {
            out.push((p, 1));
        }
    };
    let mut d: u128 = 2;
    while d <= TRIAL_BOUND && d * d <= n {
        while n % d == 0 {
            push(d, &mut out);
            n /= d;
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        let mut stack = vec![n];
        while let Some(m) = stack.pop() {
            if is_prime_u128(m) {
                push(m, &mut out);
                continue;
            }
            let f = pollard_rho(m);
            stack.push(f);
            stack.push(m / f);
        }
    }
    out.sort_unstable();
    Ok(out)
}

fn checked_pow_u128(base: u128, exp: u32) -> Option<u128> {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

fn mul_mod_u128(a: u128, b: u128, m: u128) -> u128 {
    if let (Ok(a64), Ok(b64), Ok(m64)) = (u64::try_from(a), u64::try_from(b), u64::try_from(m)) {
        return (a64 as u128 * b64 as u128) % m64 as u128;
    }
    // schoolbook double-and-add; m < 2^96 so this stays exact
    let mut acc: u128 = 0;
    let mut a = a % m;
    let mut b = b;
    while b > 0 {
        if b & 1 == 1 {
            acc = (acc + a) % m;
        }
        a = (a << 1) % m;
        b >>= 1;
    }
    acc
}

fn pow_mod_u128(mut base: u128, mut exp: u128, m: u128) -> u128 {
    base %= m;
    let mut acc = 1 % m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_u128(acc, base, m);
        }
        base = mul_mod_u128(base, base, m);
        exp >>= 1;
    }
    acc
}

fn is_prime_u128(n: u128) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u128, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u128, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod_u128(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mul_mod_u128(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_rho(n: u128) -> u128 {
    debug_assert!(n > 1 && !is_prime_u128(n) && n % 2 == 1);
    let mut c: u128 = 1;
    loop {
        let f = |x: u128| (mul_mod_u128(x, x, n) + c) % n;
        let mut x: u128 = 2;
        let mut y: u128 = 2;
        let mut d: u128 = 1;
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd_u128(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}
