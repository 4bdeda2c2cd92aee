//! Exhaustive short-vector enumeration.
//!
//! A tiny exact Fincke–Pohst enumerator used as an independent oracle by the
//! test suites: it computes its own rational Gram–Schmidt data and walks the
//! coefficient tree with exact pruning, so it shares no code path with the
//! reduction algorithms it is used to check.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::{norm_sq, rat, LatticeBasis};

/// All nonzero lattice vectors with squared norm at most `bound_sq`, one per
/// `{v, -v}` pair (the representative has a positive first nonzero entry).
pub fn vectors_within(basis: &LatticeBasis, bound_sq: &BigRational) -> Vec<Vec<BigInt>> {
    let mut out = Vec::new();
    enumerate(basis, bound_sq.clone(), &mut |v, _| {
        out.push(v.to_vec());
        None
    });
    out
}

/// Squared norm of a shortest nonzero vector, by enumeration with a
/// dynamically shrinking bound.
pub fn shortest_vector_sq(basis: &LatticeBasis) -> BigInt {
    let mut best: BigInt = basis
        .rows()
        .iter()
        .map(|r| norm_sq(r))
        .min()
        .expect("basis has rows");
    enumerate(basis, rat(best.clone()), &mut |_, nsq| {
        if nsq < &best {
            best = nsq.clone();
        }
        Some(rat(best.clone()))
    });
    best
}

/// Exact coefficient-tree enumeration. `visit` receives each nonzero vector
/// (sign-canonical) with its squared norm and may return a smaller bound.
fn enumerate(
    basis: &LatticeBasis,
    mut bound_sq: BigRational,
    visit: &mut dyn FnMut(&[BigInt], &BigInt) -> Option<BigRational>,
) {
    let rows = basis.rows();
    let k = rows.len();
    let (mu, bnorm) = local_gso(rows);
    assert!(
        bnorm.iter().all(|n| !n.is_zero()),
        "enumeration requires a full-rank basis"
    );

    // depth-first over coefficients c[k-1], ..., c[0]
    let mut coeffs = vec![BigInt::zero(); k];
    walk(
        k,
        rows,
        &mu,
        &bnorm,
        &mut coeffs,
        BigRational::zero(),
        &mut bound_sq,
        visit,
    );
}

#[allow(clippy::too_many_arguments)]
fn walk(
    level: usize,
    rows: &[Vec<BigInt>],
    mu: &[Vec<BigRational>],
    bnorm: &[BigRational],
    coeffs: &mut Vec<BigInt>,
    partial: BigRational,
    bound_sq: &mut BigRational,
    visit: &mut dyn FnMut(&[BigInt], &BigInt) -> Option<BigRational>,
) {
    if level == 0 {
        let v = combine(rows, coeffs);
        if v.iter().all(Zero::is_zero) {
            return;
        }
        let nsq = norm_sq(&v);
        if rat(nsq.clone()) > *bound_sq {
            return;
        }
        let canonical = v.iter().find(|x| !x.is_zero()).unwrap().is_positive();
        if canonical {
            if let Some(nb) = visit(&v, &nsq) {
                *bound_sq = nb;
            }
        }
        return;
    }
    let t = level - 1;
    // y_t = c_t + sum_{j>t} mu[j][t] c_j; contribution y_t^2 * bnorm[t]
    let center: BigRational = (t + 1..rows.len())
        .map(|j| &mu[j][t] * rat(coeffs[j].clone()))
        .sum();
    let start = super::round_rational(&-center.clone());

    // scan upward then downward from the rounded center while feasible
    for dir in [0i8, 1] {
        let mut c = if dir == 0 { start.clone() } else { &start - 1 };
        loop {
            let y = rat(c.clone()) + &center;
            let contrib = &y * &y * &bnorm[t];
            let total = &partial + &contrib;
            if total > *bound_sq {
                break;
            }
            coeffs[t] = c.clone();
            walk(level - 1, rows, mu, bnorm, coeffs, total, bound_sq, visit);
            coeffs[t] = BigInt::zero();
            if dir == 0 {
                c += 1;
            } else {
                c -= 1;
            }
        }
    }
}

fn combine(rows: &[Vec<BigInt>], coeffs: &[BigInt]) -> Vec<BigInt> {
    let cols = rows[0].len();
    let mut v = vec![BigInt::zero(); cols];
    for (c, row) in coeffs.iter().zip(rows) {
        if c.is_zero() {
            continue;
        }
        for (vi, ri) in v.iter_mut().zip(row) {
            *vi += c * ri;
        }
    }
    v
}

// Deliberately local: the oracle must stay independent of the Gram-Schmidt
// code used by the reduction path.
fn local_gso(rows: &[Vec<BigInt>]) -> (Vec<Vec<BigRational>>, Vec<BigRational>) {
    let n = rows.len();
    let cols = rows[0].len();
    let mut bstar: Vec<Vec<BigRational>> = Vec::with_capacity(n);
    let mut norms: Vec<BigRational> = Vec::with_capacity(n);
    let mut mu: Vec<Vec<BigRational>> = vec![vec![BigRational::zero(); n]; n];
    for i in 0..n {
        let mut cur: Vec<BigRational> = rows[i].iter().map(|x| rat(x.clone())).collect();
        for j in 0..i {
            if norms[j].is_zero() {
                continue;
            }
            let num: BigRational = (0..cols)
                .map(|t| rat(rows[i][t].clone()) * &bstar[j][t])
                .sum();
            let m = num / &norms[j];
            for t in 0..cols {
                let sub = &m * &bstar[j][t];
                cur[t] -= sub;
            }
            mu[i][j] = m;
        }
        norms.push(cur.iter().map(|x| x * x).sum());
        bstar.push(cur);
    }
    (mu, norms)
}
