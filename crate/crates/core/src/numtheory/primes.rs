//! Primality testing and prime generation.

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use rand::Rng;

/// First `count` primes, by sieve.
pub fn first_primes(count: usize) -> Vec<u64> {
    if count == 0 {
        return Vec::new();
    }
    // overshoot: p_n < n (ln n + ln ln n) for n >= 6
    let mut limit = 16usize.max((count as f64 * ((count as f64).ln() + 3.0)) as usize);
    loop {
        let sieve = sieve_upto(limit);
        if sieve.len() >= count {
            return sieve.into_iter().take(count).collect();
        }
        limit *= 2;
    }
}

fn sieve_upto(limit: usize) -> Vec<u64> {
    let mut is_comp = vec![false; limit + 1];
    let mut primes = Vec::new();
    for i in 2..=limit {
        if !is_comp[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= limit {
                is_comp[j] = true;
                j += i;
            }
        }
    }
    primes
}

/// Miller–Rabin primality test. Deterministic base set below 2^64, a fixed
/// extended base schedule above (reproducible; failure probability far below
/// 2^-128 for the desk-scale inputs this crate handles).
pub fn is_prime(n: &BigUint) -> bool {
    let two = BigUint::from(2u32);
    if n < &two {
        return false;
    }
    for &p in &[2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let p = BigUint::from(p);
        if n == &p {
            return true;
        }
        if n.is_multiple_of(&p) {
            return false;
        }
    }
    // n odd, > 37 here
    let n_minus_1 = n - BigUint::one();
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;

    let witness = |a: &BigUint| -> bool {
        // true if a proves n composite
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            return false;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                return false;
            }
        }
        true
    };

    if n.bits() <= 64 {
        // deterministic for all n < 2^64
        for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
            if witness(&BigUint::from(a)) {
                return false;
            }
        }
        true
    } else {
        let mut rng = crate::rng::substream(0x4d52, &[n.bits()]);
        for _ in 0..64 {
            let a = rng.gen_biguint_range(&two, &n_minus_1);
            if witness(&a) {
                return false;
            }
        }
        true
    }
}

/// Uniform random prime with exactly `bits` bits.
pub fn random_prime<R: Rng>(bits: u64, rng: &mut R) -> BigUint {
    assert!(bits >= 2);
    if bits == 2 {
        return BigUint::from(if rng.gen_bool(0.5) { 2u32 } else { 3 });
    }
    loop {
        let mut cand = rng.gen_biguint(bits);
        cand.set_bit(bits - 1, true);
        cand.set_bit(0, true);
        if cand.bits() == bits && is_prime(&cand) {
            return cand;
        }
    }
}

/// Smallest prime factor found by trial division up to `bound`, if any.
pub fn trial_division(n: &BigUint, bound: u64) -> Option<u64> {
    if n.is_even() && *n != BigUint::from(2u32) {
        return (!n.is_one()).then_some(2);
    }
    let n_small = n.to_u64();
    let mut p = 3u64;
    while p <= bound && p.checked_mul(p).map_or(false, |sq| match n_small {
        Some(ns) => sq <= ns,
        None => true,
    }) {
        if n.is_multiple_of(&BigUint::from(p)) {
            return Some(p);
        }
        p += 2;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_primes_prefix() {
        assert_eq!(first_primes(8), vec![2, 3, 5, 7, 11, 13, 17, 19]);
        assert_eq!(first_primes(0), Vec::<u64>::new());
    }

    #[test]
    fn primality_small_cases() {
        let primes = [2u64, 3, 5, 97, 65537, 2147483647];
        for p in primes {
            assert!(is_prime(&BigUint::from(p)), "{p} should be prime");
        }
        let composites = [1u64, 4, 91, 561, 1373653, 25326001, 3215031751];
        for c in composites {
            assert!(!is_prime(&BigUint::from(c)), "{c} should be composite");
        }
    }

    #[test]
    fn primality_large_known() {
        // 2^89 - 1 is a Mersenne prime
        let p = (BigUint::one() << 89) - BigUint::one();
        assert!(is_prime(&p));
        // 2^67 - 1 = 193707721 * 761838257287
        let c = (BigUint::one() << 67) - BigUint::one();
        assert!(!is_prime(&c));
    }

    #[test]
    fn random_primes_have_requested_size() {
        let mut rng = crate::rng::substream(1, &[]);
        for bits in [8u64, 16, 24] {
            let p = random_prime(bits, &mut rng);
            assert_eq!(p.bits(), bits);
            assert!(is_prime(&p));
        }
    }
}
