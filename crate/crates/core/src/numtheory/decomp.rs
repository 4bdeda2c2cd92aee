//! Cyclic decomposition of the unit group of an odd modulus.
//!
//! Every modulus in this crate is coprime to the first few primes and in
//! particular odd, so the unit group splits as a product of cyclic groups,
//! one per odd prime-power divisor. Ground-truth exponent vectors of group
//! elements are taken with respect to a fixed primitive root per component.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::One;

use super::dlog;
use super::factor::factor_oracle;
use super::NumTheoryError;

/// One cyclic component `(Z/p^e)^*` of the unit group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclicComponent {
    pub prime_power: BigUint,
    pub order: BigUint,
    pub generator: BigUint,
    pub order_factorization: Vec<(BigUint, u32)>,
}

/// Smallest primitive root modulo an odd prime power `p^e`.
fn primitive_root(
    p: &BigUint,
    e: u32,
    p_minus_1_fact: &[(BigUint, u32)],
) -> Result<BigUint, NumTheoryError> {
    let p_minus_1 = p - BigUint::one();
    let mut g = BigUint::from(2u32);
    let root_mod_p = loop {
        if &g >= p {
            return Err(NumTheoryError::BadInput("no primitive root found".into()));
        }
        let ok = p_minus_1_fact
            .iter()
            .all(|(q, _)| !g.modpow(&(&p_minus_1 / q), p).is_one());
        if ok {
            break g;
        }
        g += BigUint::one();
    };
    if e == 1 {
        return Ok(root_mod_p);
    }
    // lift: g is primitive mod p^e unless g^(p-1) = 1 mod p^2, where g + p works
    let p_sq = p * p;
    if root_mod_p.modpow(&p_minus_1, &p_sq).is_one() {
        Ok(root_mod_p + p)
    } else {
        Ok(root_mod_p)
    }
}

/// Decomposes `(Z/modulus)^*` for odd `modulus` into cyclic components with
/// explicit generators. Deterministic given the modulus.
pub fn decompose(modulus: &BigUint) -> Result<Vec<CyclicComponent>, NumTheoryError> {
    if modulus.is_even() {
        return Err(NumTheoryError::BadInput(
            "decomposition requires an odd modulus".into(),
        ));
    }
    let factors = factor_oracle(modulus)?;
    let mut components = Vec::with_capacity(factors.len());
    for (p, e) in &factors {
        let pe = p.pow(*e);
        let order = p.pow(e - 1) * (p - BigUint::one());
        let p_minus_1_fact = factor_oracle(&(p - BigUint::one()))?;
        let generator = primitive_root(p, *e, &p_minus_1_fact)?;
        let order_factorization = factor_oracle(&order)?;
        components.push(CyclicComponent {
            prime_power: pe,
            order,
            generator,
            order_factorization,
        });
    }
    Ok(components)
}

/// Exponent vector of `elem` over the components: its discrete log with
/// respect to each component generator.
pub fn exponent_vector(
    elem: &BigUint,
    components: &[CyclicComponent],
    max_steps: u64,
) -> Result<Vec<BigUint>, NumTheoryError> {
    components
        .iter()
        .map(|c| {
            let reduced = elem % &c.prime_power;
            if reduced.gcd(&c.prime_power) != BigUint::one() {
                return Err(NumTheoryError::BadInput(
                    "element not a unit in component".into(),
                ));
            }
            dlog::dlog(
                &c.generator,
                &reduced,
                &c.prime_power,
                &c.order_factorization,
                max_steps,
            )
        })
        .collect()
}

/// Factorization of the full group order (the product of component orders).
pub fn group_order_factorization(components: &[CyclicComponent]) -> Vec<(BigUint, u32)> {
    let mut merged: Vec<(BigUint, u32)> = Vec::new();
    for c in components {
        for (p, e) in &c.order_factorization {
            match merged.iter_mut().find(|(q, _)| q == p) {
                Some((_, acc)) => *acc += e,
                None => merged.push((p.clone(), *e)),
            }
        }
    }
    merged.sort_by(|a, b| a.0.cmp(&b.0));
    merged
}

pub fn group_order(components: &[CyclicComponent]) -> BigUint {
    components.iter().map(|c| c.order.clone()).product()
}
