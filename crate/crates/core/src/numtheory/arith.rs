//! Modular arithmetic over arbitrary-precision integers.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Multiplicative inverse of `a` modulo `m`, when `gcd(a, m) = 1`.
pub fn mod_inverse(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    let a = BigInt::from(a.clone());
    let m_int = BigInt::from(m.clone());
    let ext = a.extended_gcd(&m_int);
    if !ext.gcd.is_one() {
        return None;
    }
    let x = ext.x.mod_floor(&m_int);
    Some(x.to_biguint().expect("mod_floor of positive modulus"))
}

/// `base^exp mod m` for a signed exponent; `None` when a negative exponent
/// hits a non-invertible base.
pub fn modpow_signed(base: &BigUint, exp: &BigInt, m: &BigUint) -> Option<BigUint> {
    if exp.is_negative() {
        let inv = mod_inverse(&(base % m), m)?;
        let e = exp.magnitude();
        Some(inv.modpow(&BigUint::from(e.clone()), m))
    } else {
        Some(base.modpow(&exp.to_biguint().expect("non-negative"), m))
    }
}

/// Solves `a * x = b (mod m)`. Returns `x` in `[0, m/g)` where `g = gcd(a, m)`,
/// or `None` when `g` does not divide `b`.
pub fn solve_linear_congruence(a: &BigUint, b: &BigUint, m: &BigUint) -> Option<BigUint> {
    let g = a.gcd(m);
    if !b.is_multiple_of(&g) {
        return None;
    }
    let m_red = m / &g;
    if m_red.is_one() {
        return Some(BigUint::zero());
    }
    let a_red = (a / &g) % &m_red;
    let b_red = (b / &g) % &m_red;
    let inv = mod_inverse(&a_red, &m_red)?;
    Some((b_red * inv) % m_red)
}

/// CRT combination: `x = r1 (mod m1)`, `x = r2 (mod m2)` for coprime moduli.
pub fn crt_pair(r1: &BigUint, m1: &BigUint, r2: &BigUint, m2: &BigUint) -> BigUint {
    let inv = mod_inverse(&(m1 % m2), m2).expect("moduli must be coprime");
    let diff = (r2 + m2 - (r1 % m2)) % m2;
    let k = (diff * inv) % m2;
    r1 + m1 * k
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(x: u64) -> BigUint {
        BigUint::from(x)
    }

    #[test]
    fn inverse_roundtrip() {
        let m = b(101);
        for a in [1u64, 2, 57, 100] {
            let inv = mod_inverse(&b(a), &m).unwrap();
            assert_eq!((b(a) * inv) % &m, b(1));
        }
        assert!(mod_inverse(&b(6), &b(9)).is_none());
    }

    #[test]
    fn signed_powers() {
        let m = b(11);
        assert_eq!(modpow_signed(&b(2), &BigInt::from(3), &m).unwrap(), b(8));
        // 2^-1 = 6 mod 11, 2^-2 = 36 = 3 mod 11
        assert_eq!(modpow_signed(&b(2), &BigInt::from(-2), &m).unwrap(), b(3));
    }

    #[test]
    fn linear_congruences() {
        // 4x = 6 mod 10 -> g=2, x = 4 mod 5
        assert_eq!(solve_linear_congruence(&b(4), &b(6), &b(10)).unwrap(), b(4));
        // 4x = 3 mod 10 unsolvable
        assert!(solve_linear_congruence(&b(4), &b(3), &b(10)).is_none());
        // 3x = 5 mod 7 -> x = 4
        assert_eq!(solve_linear_congruence(&b(3), &b(5), &b(7)).unwrap(), b(4));
    }

    #[test]
    fn crt_combines() {
        // x = 2 mod 3, x = 3 mod 5 -> 8
        assert_eq!(crt_pair(&b(2), &b(3), &b(3), &b(5)), b(8));
    }
}
