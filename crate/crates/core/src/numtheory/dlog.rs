//! Ground-truth discrete-logarithm oracles: Pohlig–Hellman with baby-step
//! giant-step per prime digit, bounded by the configured step budget.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::arith::{crt_pair, mod_inverse};
use super::NumTheoryError;

/// Least `r >= 1` with `g^r = 1 (mod modulus)`, given the factorization of a
/// multiple of the group exponent (e.g. the group order).
pub fn element_order(
    g: &BigUint,
    modulus: &BigUint,
    group_order_factorization: &[(BigUint, u32)],
) -> BigUint {
    let mut r: BigUint = group_order_factorization
        .iter()
        .map(|(p, e)| p.pow(*e))
        .product();
    for (p, e) in group_order_factorization {
        for _ in 0..*e {
            let cand = &r / p;
            if g.modpow(&cand, modulus).is_one() {
                r = cand;
            } else {
                break;
            }
        }
    }
    r
}

/// Baby-step giant-step in the cyclic group generated by `gamma` (order
/// dividing `order`): returns `e` with `gamma^e = target`, or
/// `NotInSubgroup`. `max_steps` bounds the table size.
pub fn bsgs(
    gamma: &BigUint,
    target: &BigUint,
    order: &BigUint,
    modulus: &BigUint,
    max_steps: u64,
) -> Result<BigUint, NumTheoryError> {
    if target.is_one() {
        return Ok(BigUint::zero());
    }
    let m = order.sqrt() + BigUint::one();
    if m > BigUint::from(max_steps) {
        return Err(NumTheoryError::BudgetExceeded);
    }
    let m_u64 = u64::try_from(&m).expect("step count fits after budget check");

    let mut table: HashMap<BigUint, u64> = HashMap::with_capacity(m_u64 as usize);
    let mut cur = BigUint::one();
    for j in 0..m_u64 {
        table.entry(cur.clone()).or_insert(j);
        cur = (&cur * gamma) % modulus;
    }
    let giant = mod_inverse(&gamma.modpow(&m, modulus), modulus)
        .ok_or_else(|| NumTheoryError::BadInput("generator not invertible".into()))?;
    let mut y = target.clone();
    for i in 0..=m_u64 {
        if let Some(&j) = table.get(&y) {
            return Ok(BigUint::from(i) * &m + BigUint::from(j));
        }
        y = (y * &giant) % modulus;
    }
    Err(NumTheoryError::NotInSubgroup)
}

/// Discrete log in the `p^e`-order component: digit lifting with BSGS in the
/// order-`p` subgroup.
fn dlog_prime_power(
    g: &BigUint,
    x: &BigUint,
    p: &BigUint,
    e: u32,
    modulus: &BigUint,
    max_steps: u64,
) -> Result<BigUint, NumTheoryError> {
    let gamma = g.modpow(&p.pow(e - 1), modulus);
    let g_inv = mod_inverse(g, modulus)
        .ok_or_else(|| NumTheoryError::BadInput("generator not invertible".into()))?;
    let mut result = BigUint::zero();
    let mut cur = x.clone();
    for k in 0..e {
        let h = cur.modpow(&p.pow(e - 1 - k), modulus);
        let digit = bsgs(&gamma, &h, p, modulus, max_steps)?;
        result += &digit * p.pow(k);
        cur = (cur * g_inv.modpow(&(digit * p.pow(k)), modulus)) % modulus;
    }
    Ok(result)
}

/// Pohlig–Hellman: `e in [0, ord(g))` with `g^e = x (mod modulus)`.
///
/// `group_order_factorization` must cover a multiple of `ord(g)`. Verifies
/// the answer and reports `NotInSubgroup` when no exponent exists.
pub fn dlog(
    g: &BigUint,
    x: &BigUint,
    modulus: &BigUint,
    group_order_factorization: &[(BigUint, u32)],
    max_steps: u64,
) -> Result<BigUint, NumTheoryError> {
    let ord_g = element_order(g, modulus, group_order_factorization);
    let mut e = BigUint::zero();
    let mut m_acc = BigUint::one();
    for (p, e_max) in group_order_factorization {
        let mut pe = 0u32;
        let mut q = BigUint::one();
        for _ in 0..*e_max {
            if ord_g.is_multiple_of(&(&q * p)) {
                q *= p;
                pe += 1;
            } else {
                break;
            }
        }
        if pe == 0 {
            continue;
        }
        let cof = &ord_g / &q;
        let g_p = g.modpow(&cof, modulus);
        let x_p = x.modpow(&cof, modulus);
        let e_p = dlog_prime_power(&g_p, &x_p, p, pe, modulus, max_steps)?;
        e = crt_pair(&e, &m_acc, &e_p, &q);
        m_acc *= q;
    }
    e %= &ord_g;
    if g.modpow(&e, modulus) == x % modulus {
        Ok(e)
    } else {
        Err(NumTheoryError::NotInSubgroup)
    }
}
