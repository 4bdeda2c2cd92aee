//! LLL reduction with exact integer arithmetic.
//!
//! The certified path is the all-integer variant of LLL (Cohen, Algorithm
//! 2.6.7): it maintains the exact rational Gram–Schmidt data as integers
//! `lambda[i][j] = d_{j+1} * mu_{i,j}` and `d[i] = det Gram(b_1..b_i)`, so no
//! floating point enters any size-reduction or Lovász decision. An optional
//! `f64` pre-pass (same lattice, unimodular operations only) can precondition
//! large bases before the exact pass certifies the result.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};

use super::{dot, norm_sq, rat, round_rational, IntMatrix, LatticeBasis, LatticeError};

#[derive(Debug, Clone)]
pub struct LllOptions {
    /// Lovász parameter in (1/4, 1), as an exact fraction.
    pub delta: (u32, u32),
    /// Run the heuristic f64 pre-pass before the exact pass. The exact pass
    /// always runs and certifies the output either way.
    pub float_prepass: bool,
}

impl Default for LllOptions {
    fn default() -> Self {
        Self {
            delta: DEFAULT_DELTA,
            float_prepass: false,
        }
    }
}

/// Default Lovász parameter 99/100.
pub const DEFAULT_DELTA: (u32, u32) = (99, 100);

/// Exact Gram–Schmidt data of the rows: `mu[i][j]` for `j < i`, and the
/// squared norms of the orthogonalized rows. Dependent rows show up as zero
/// norms (their `mu` entries against later rows are taken as zero).
pub fn gram_schmidt(matrix: &IntMatrix) -> (Vec<Vec<BigRational>>, Vec<BigRational>) {
    let rows = matrix.rows();
    let n = rows.len();
    let cols = matrix.col_count();
    let mut bstar: Vec<Vec<BigRational>> = Vec::with_capacity(n);
    let mut norms: Vec<BigRational> = Vec::with_capacity(n);
    let mut mu: Vec<Vec<BigRational>> = vec![Vec::new(); n];
    for i in 0..n {
        let mut cur: Vec<BigRational> = rows[i].iter().map(|x| rat(x.clone())).collect();
        for j in 0..i {
            let m = if norms[j].is_zero() {
                BigRational::zero()
            } else {
                let num: BigRational = (0..cols)
                    .map(|t| rat(rows[i][t].clone()) * &bstar[j][t])
                    .sum();
                num / &norms[j]
            };
            for t in 0..cols {
                let sub = &m * &bstar[j][t];
                cur[t] -= sub;
            }
            mu[i].push(m);
        }
        let nrm: BigRational = cur.iter().map(|x| x * x).sum();
        norms.push(nrm);
        bstar.push(cur);
    }
    (mu, norms)
}

/// LLL-reduces a full-rank basis with exact rational Gram–Schmidt arithmetic.
/// The output spans the same lattice, is size-reduced (|mu_ij| <= 1/2), and
/// satisfies the Lovász condition at `delta`.
pub fn lll_reduce(basis: &LatticeBasis, delta: (u32, u32)) -> Result<LatticeBasis, LatticeError> {
    lll_reduce_with(
        basis,
        &LllOptions {
            delta,
            float_prepass: false,
        },
    )
}

pub fn lll_reduce_with(
    basis: &LatticeBasis,
    options: &LllOptions,
) -> Result<LatticeBasis, LatticeError> {
    let (p, q) = options.delta;
    if !(4 * p > q && p < q) {
        return Err(LatticeError::BadDelta);
    }
    let mut rows = basis.rows().to_vec();
    if options.float_prepass {
        float_prepass(&mut rows, p as f64 / q as f64);
    }
    exact_lll(&mut rows, &BigInt::from(p), &BigInt::from(q))?;
    Ok(LatticeBasis::from_rows_unchecked(rows))
}

/// Claim-style short generating set: LLL-reduce, then keep the reduced
/// vectors of norm at most `2^{k/2} sqrt(k) T`. Every lattice vector of norm
/// at most `T` is an integer combination of the returned vectors.
pub fn short_generating_set(
    basis: &LatticeBasis,
    t: &BigRational,
) -> Result<Vec<Vec<BigInt>>, LatticeError> {
    short_generating_set_norm_sq(basis, &(t * t))
}

/// Same operation with the bound supplied as `T^2`; callers whose natural
/// datum is a squared norm (say `T = 2 lambda_1`) stay exact this way.
pub fn short_generating_set_norm_sq(
    basis: &LatticeBasis,
    t_sq: &BigRational,
) -> Result<Vec<Vec<BigInt>>, LatticeError> {
    let k = basis.rank();
    let reduced = lll_reduce(basis, DEFAULT_DELTA)?;
    // norm^2 <= 2^k * k * T^2, compared exactly
    let bound = rat(BigInt::from(1) << k) * rat(BigInt::from(k as u64)) * t_sq;
    Ok(reduced
        .rows()
        .iter()
        .filter(|v| rat(norm_sq(v)) <= bound)
        .cloned()
        .collect())
}

/// All-integer LLL (Cohen 2.6.7). `d[i]` is the Gram determinant of the
/// first `i` rows (`d[0] = 1`), `lambda[i][j] = d[j+1] * mu_{i,j}`.
fn exact_lll(rows: &mut Vec<Vec<BigInt>>, p: &BigInt, q: &BigInt) -> Result<(), LatticeError> {
    let n = rows.len();
    let mut d: Vec<BigInt> = vec![BigInt::from(1); n + 1];
    let mut lambda: Vec<Vec<BigInt>> = vec![vec![BigInt::zero(); n]; n];

    // integral Gram-Schmidt initialization
    for i in 0..n {
        for j in 0..=i {
            let mut u = dot(&rows[i], &rows[j]);
            for r in 0..j {
                u = (&d[r + 1] * &u - &lambda[i][r] * &lambda[j][r]) / &d[r];
            }
            if j < i {
                lambda[i][j] = u;
            } else {
                if u <= BigInt::zero() {
                    return Err(LatticeError::RankDeficient);
                }
                d[i + 1] = u;
            }
        }
    }

    let mut k = 1usize;
    while k < n {
        red(rows, &mut lambda, &d, k, k - 1);
        // swap iff q*d[k+1]*d[k-1] < p*d[k]^2 - q*lambda[k][k-1]^2
        let lhs = q * &d[k + 1] * &d[k - 1];
        let rhs = p * &d[k] * &d[k] - q * &lambda[k][k - 1] * &lambda[k][k - 1];
        if lhs < rhs {
            swap_step(rows, &mut lambda, &mut d, k);
            k = k.saturating_sub(1).max(1);
        } else {
            for l in (0..k.saturating_sub(1)).rev() {
                red(rows, &mut lambda, &d, k, l);
            }
            k += 1;
        }
    }
    Ok(())
}

fn red(rows: &mut [Vec<BigInt>], lambda: &mut [Vec<BigInt>], d: &[BigInt], k: usize, l: usize) {
    let two = BigInt::from(2);
    if &lambda[k][l].abs() * &two <= d[l + 1] {
        return;
    }
    let q = round_rational(&BigRational::new(lambda[k][l].clone(), d[l + 1].clone()));
    let src = rows[l].clone();
    for (x, y) in rows[k].iter_mut().zip(&src) {
        *x -= &q * y;
    }
    let lam_l = lambda[l].clone();
    lambda[k][l] -= &q * &d[l + 1];
    for i in 0..l {
        lambda[k][i] -= &q * &lam_l[i];
    }
}

fn swap_step(rows: &mut [Vec<BigInt>], lambda: &mut [Vec<BigInt>], d: &mut [BigInt], k: usize) {
    let n = rows.len();
    rows.swap(k, k - 1);
    for j in 0..k.saturating_sub(1) {
        let tmp = lambda[k][j].clone();
        lambda[k][j] = lambda[k - 1][j].clone();
        lambda[k - 1][j] = tmp;
    }
    let lam = lambda[k][k - 1].clone();
    let b = (&d[k - 1] * &d[k + 1] + &lam * &lam) / &d[k];
    for i in k + 1..n {
        let t = lambda[i][k].clone();
        let new_ik = (&d[k + 1] * &lambda[i][k - 1] - &lam * &t) / &d[k];
        let new_ik1 = (&b * &t + &lam * &new_ik) / &d[k + 1];
        lambda[i][k] = new_ik;
        lambda[i][k - 1] = new_ik1;
    }
    d[k] = b;
}

/// Heuristic f64 preconditioner. Applies only unimodular operations to the
/// integer rows; decisions come from approximate Gram-Schmidt data. Bails out
/// on overflow or after a step budget.
fn float_prepass(rows: &mut Vec<Vec<BigInt>>, delta: f64) {
    let n = rows.len();
    if n < 2 {
        return;
    }
    let cols = rows[0].len();
    let to_f64 = |rows: &[Vec<BigInt>]| -> Option<Vec<Vec<f64>>> {
        rows.iter()
            .map(|r| {
                r.iter()
                    .map(|x| {
                        let v = x.to_f64()?;
                        v.is_finite().then_some(v)
                    })
                    .collect()
            })
            .collect()
    };

    let mut budget = 64 * n * n;
    let mut mu = vec![vec![0.0f64; n]; n];
    let mut bnorm = vec![0.0f64; n];

    let recompute = |rows: &[Vec<BigInt>], mu: &mut Vec<Vec<f64>>, bnorm: &mut Vec<f64>| -> bool {
        let Some(f) = to_f64(rows) else { return false };
        let mut bstar = f.clone();
        for i in 0..n {
            for j in 0..i {
                let num: f64 = (0..cols).map(|t| f[i][t] * bstar[j][t]).sum();
                mu[i][j] = if bnorm[j] > 0.0 { num / bnorm[j] } else { 0.0 };
                for t in 0..cols {
                    bstar[i][t] = bstar[i][t] - mu[i][j] * bstar[j][t];
                }
            }
            bnorm[i] = bstar[i].iter().map(|x| x * x).sum();
            if !bnorm[i].is_finite() {
                return false;
            }
        }
        true
    };

    if !recompute(rows, &mut mu, &mut bnorm) {
        return;
    }
    let mut k = 1usize;
    while k < n && budget > 0 {
        budget -= 1;
        let mut changed = false;
        for j in (0..k).rev() {
            let r = mu[k][j].round();
            if r != 0.0 && r.is_finite() {
                let Some(q) = BigInt::from_f64(r) else { return };
                let src = rows[j].clone();
                for (x, y) in rows[k].iter_mut().zip(&src) {
                    *x -= &q * y;
                }
                changed = true;
            }
        }
        if changed && !recompute(rows, &mut mu, &mut bnorm) {
            return;
        }
        if bnorm[k] < (delta - mu[k][k - 1] * mu[k][k - 1]) * bnorm[k - 1] {
            rows.swap(k, k - 1);
            if !recompute(rows, &mut mu, &mut bnorm) {
                return;
            }
            k = k.saturating_sub(1).max(1);
        } else {
            k += 1;
        }
    }
}
