//! Integer factorization oracles.
//!
//! `factor_oracle` is the crate's referee-side complete factorization (trial
//! division, then Brent's cycle variant of Pollard rho with Miller–Rabin
//! certificates). `factor_from_exponent_multiple` is the solver-side
//! randomized Miller split driven by a multiple of an element order or of the
//! group order.

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Zero};

use super::primes::{is_prime, trial_division};
use super::NumTheoryError;
use crate::rng::{substream, tag};

const TRIAL_BOUND: u64 = 1 << 16;
const RHO_MAX_ITERS: u64 = 1 << 24;

/// Complete prime factorization, sorted by prime. Deterministic.
pub fn factor_oracle(n: &BigUint) -> Result<Vec<(BigUint, u32)>, NumTheoryError> {
    if n < &BigUint::from(2u32) {
        return Ok(Vec::new());
    }
    let mut pending = vec![n.clone()];
    let mut primes: Vec<BigUint> = Vec::new();
    while let Some(m) = pending.pop() {
        if m.is_one() {
            continue;
        }
        if let Some(p) = trial_division(&m, TRIAL_BOUND) {
            let p = BigUint::from(p);
            primes.push(p.clone());
            pending.push(&m / &p);
            continue;
        }
        if is_prime(&m) {
            primes.push(m);
            continue;
        }
        if let Some((root, _)) = perfect_power(&m) {
            // rho struggles on p^k; peel the root instead
            let e = exponent_of(&m, &root);
            for _ in 0..e {
                pending.push(root.clone());
            }
            continue;
        }
        let d = pollard_brent(&m).ok_or(NumTheoryError::BudgetExceeded)?;
        pending.push(&m / &d);
        pending.push(d);
    }
    primes.sort();
    let mut out: Vec<(BigUint, u32)> = Vec::new();
    for p in primes {
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    Ok(out)
}

/// Euler's totient via complete factorization.
pub fn phi_oracle(n: &BigUint) -> Result<BigUint, NumTheoryError> {
    if n.is_zero() {
        return Err(NumTheoryError::BadInput("phi(0) undefined".into()));
    }
    Ok(phi_from_factorization(&factor_oracle(n)?))
}

pub fn phi_from_factorization(factors: &[(BigUint, u32)]) -> BigUint {
    let mut phi = BigUint::one();
    for (p, e) in factors {
        phi *= p.pow(e - 1) * (p - BigUint::one());
    }
    phi
}

/// `(root, k)` with `n = root^k`, `k >= 2` maximal, if `n` is a perfect power.
pub fn perfect_power(n: &BigUint) -> Option<(BigUint, u32)> {
    if n < &BigUint::from(4u32) {
        return None;
    }
    let max_k = n.bits() as u32;
    for k in (2..=max_k).rev() {
        let r = n.nth_root(k);
        if &r.pow(k) == n {
            return Some((r, k));
        }
    }
    None
}

fn exponent_of(n: &BigUint, p: &BigUint) -> u32 {
    let mut e = 0;
    let mut m = n.clone();
    while m.is_multiple_of(p) {
        m /= p;
        e += 1;
    }
    e
}

/// Brent's variant of Pollard rho. Deterministic: sweeps the polynomial
/// offset c = 1, 2, ... with a fixed iteration budget per offset.
pub fn pollard_brent(n: &BigUint) -> Option<BigUint> {
    if n.is_even() {
        return Some(BigUint::from(2u32));
    }
    for c in 1u64..32 {
        if let Some(d) = brent_attempt(n, &BigUint::from(c)) {
            return Some(d);
        }
    }
    None
}

fn brent_attempt(n: &BigUint, c: &BigUint) -> Option<BigUint> {
    let one = BigUint::one();
    let g = |x: &BigUint| (x * x + c) % n;
    let mut y = BigUint::from(2u32);
    let mut r: u64 = 1;
    let mut q = one.clone();
    let mut d = one.clone();
    let mut x = y.clone();
    let mut ys = y.clone();
    let m = 128u64;
    let mut iters: u64 = 0;
    while d.is_one() {
        x = y.clone();
        for _ in 0..r {
            y = g(&y);
        }
        let mut k = 0u64;
        while k < r && d.is_one() {
            ys = y.clone();
            for _ in 0..m.min(r - k) {
                y = g(&y);
                let diff = if x > y { &x - &y } else { &y - &x };
                q = (q * diff) % n;
            }
            d = q.gcd(n);
            k += m;
        }
        r *= 2;
        iters += r;
        if iters > RHO_MAX_ITERS {
            return None;
        }
    }
    if &d == n {
        // backtrack one step at a time
        loop {
            ys = g(&ys);
            let diff = if x > ys { &x - &ys } else { &ys - &x };
            d = diff.gcd(n);
            if !d.is_one() {
                break;
            }
        }
    }
    (&d != n && !d.is_one()).then_some(d)
}

/// Result of the Miller-style splitting procedure. The parts always multiply
/// back to `n`; `complete` marks that every part is prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitResult {
    pub factors: Vec<(BigUint, u32)>,
    pub complete: bool,
}

impl SplitResult {
    pub fn product(&self) -> BigUint {
        self.factors.iter().map(|(p, e)| p.pow(*e)).product()
    }
}

/// Factors `n` given a presumed multiple `m` of an element order or of the
/// group exponent, via the randomized Miller construction: write
/// `m = 2^s * o`, draw random bases `a` coprime to `n`, and collect
/// `gcd(a^(o 2^j) - 1, n)` and `gcd(a^(o 2^j) + 1, n)` at each of the `s`
/// squaring steps. Odd `m` has no squaring chain and yields nothing.
/// Exhausting the trial budget gives an incomplete (not an error) result.
pub fn factor_from_exponent_multiple(
    n: &BigUint,
    m: &BigUint,
    trials: u32,
    seed: u64,
) -> SplitResult {
    let one = BigUint::one();
    let two = BigUint::from(2u32);
    let mut parts: Vec<BigUint> = vec![n.clone()];

    if n <= &BigUint::from(3u32) || m.is_zero() {
        return assemble(parts);
    }

    let s = m.trailing_zeros().unwrap_or(0);
    let o = m >> s;
    let mut rng = substream(seed, &[tag::FACTOR_BASES]);

    for _ in 0..trials {
        if parts.iter().all(|p| p.is_one() || is_prime(p)) {
            break;
        }
        let Some(a) = (0..64)
            .map(|_| rng.gen_biguint_range(&two, &(n - &one)))
            .find(|a| a.gcd(n).is_one())
        else {
            break;
        };
        let mut v = a.modpow(&o, n);
        for _ in 0..s {
            if v.is_one() {
                break;
            }
            refine(&mut parts, &(&v - &one).gcd(n));
            refine(&mut parts, &(&v + &one).gcd(n));
            v = (&v * &v) % n;
        }
    }
    assemble(parts)
}

/// Splits every part that shares a nontrivial factor with `d`.
pub(crate) fn refine(parts: &mut Vec<BigUint>, d: &BigUint) {
    if d.is_one() {
        return;
    }
    let mut next = Vec::with_capacity(parts.len() + 1);
    for p in parts.drain(..) {
        let g = p.gcd(d);
        if g.is_one() || g == p {
            next.push(p);
        } else {
            next.push(&p / &g);
            next.push(g);
        }
    }
    *parts = next;
}

pub(crate) fn assemble(parts: Vec<BigUint>) -> SplitResult {
    let mut pieces: Vec<BigUint> = Vec::new();
    let mut complete = true;
    let mut stack = parts;
    while let Some(p) = stack.pop() {
        if p.is_one() {
            continue;
        }
        if is_prime(&p) {
            pieces.push(p);
        } else if let Some((root, k)) = perfect_power(&p) {
            for _ in 0..k {
                stack.push(root.clone());
            }
        } else {
            complete = false;
            pieces.push(p);
        }
    }
    pieces.sort();
    let mut factors: Vec<(BigUint, u32)> = Vec::new();
    for p in pieces {
        match factors.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => factors.push((p, 1)),
        }
    }
    SplitResult { factors, complete }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(x: u64) -> BigUint {
        BigUint::from(x)
    }

    #[test]
    fn factor_oracle_examples() {
        assert_eq!(factor_oracle(&b(15)).unwrap(), vec![(b(3), 1), (b(5), 1)]);
        assert_eq!(factor_oracle(&b(2)).unwrap(), vec![(b(2), 1)]);
        assert_eq!(factor_oracle(&b(77)).unwrap(), vec![(b(7), 1), (b(11), 1)]);
        assert_eq!(factor_oracle(&b(1)).unwrap(), vec![]);
        assert_eq!(factor_oracle(&b(720)).unwrap(), vec![(b(2), 4), (b(3), 2), (b(5), 1)]);
    }

    #[test]
    fn factor_oracle_semiprime_beyond_trial_division() {
        // both factors above the 2^16 trial bound
        let p = b(1_000_003);
        let q = b(1_000_033);
        let n = &p * &q;
        assert_eq!(factor_oracle(&n).unwrap(), vec![(p, 1), (q, 1)]);
    }

    #[test]
    fn factor_oracle_multiplies_back() {
        for n in [b(999_999), b(123_456_789), b(2u64.pow(32) - 1)] {
            let f = factor_oracle(&n).unwrap();
            let prod: BigUint = f.iter().map(|(p, e)| p.pow(*e)).product();
            assert_eq!(prod, n);
            assert!(f.iter().all(|(p, _)| is_prime(p)));
        }
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi_oracle(&b(15)).unwrap(), b(8));
        assert_eq!(phi_oracle(&b(2)).unwrap(), b(1));
        assert_eq!(phi_oracle(&b(77)).unwrap(), b(60));
    }

    #[test]
    fn phi_matches_exhaustive_count() {
        // full cross-check over every modulus up to 10^4
        for n in 2u64..=10_000 {
            let big = b(n);
            let count = (1..n).filter(|&k| k.gcd(&n) == 1).count() as u64;
            assert_eq!(phi_oracle(&big).unwrap(), b(count), "phi({n})");
        }
    }

    #[test]
    fn perfect_powers() {
        assert_eq!(perfect_power(&b(8)), Some((b(2), 3)));
        assert_eq!(perfect_power(&b(36)), Some((b(6), 2)));
        assert_eq!(perfect_power(&b(10)), None);
    }

    #[test]
    fn exponent_multiple_splits_fifteen() {
        // lambda(15) = 4
        let r = factor_from_exponent_multiple(&b(15), &b(4), 8, 0);
        assert!(r.complete);
        assert_eq!(r.factors, vec![(b(3), 1), (b(5), 1)]);
    }

    #[test]
    fn exponent_multiple_with_odd_multiple_is_incomplete() {
        // odd m has no squaring chain; the composite part is kept so the
        // product invariant still holds
        let r = factor_from_exponent_multiple(&b(15), &b(1), 8, 0);
        assert!(!r.complete);
        assert_eq!(r.product(), b(15));
        assert_eq!(r.factors, vec![(b(15), 1)]);
    }

    #[test]
    fn exponent_multiple_phi_77() {
        let r = factor_from_exponent_multiple(&b(77), &b(60), 16, 1);
        assert!(r.complete);
        assert_eq!(r.factors, vec![(b(7), 1), (b(11), 1)]);
    }
}
