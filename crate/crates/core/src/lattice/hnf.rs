//! Hermite normal form and derived operations.
//!
//! The HNF here is row-style echelon form: pivot columns strictly increase
//! with the row index, pivots are positive, and every entry above a pivot is
//! reduced into `[0, pivot)`. This form is unique for a given lattice, which
//! makes it the canonical representative used throughout the crate.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::{IntMatrix, LatticeBasis, LatticeError};

/// Row-style Hermite normal form of the lattice generated by the rows.
/// Zero rows drop; the result is a basis of the generated lattice.
pub fn hnf(generators: &IntMatrix) -> Result<LatticeBasis, LatticeError> {
    let (h, _) = echelonize(generators.rows().to_vec());
    if h.is_empty() {
        return Err(LatticeError::BadShape);
    }
    Ok(LatticeBasis::from_rows_unchecked(h))
}

/// HNF together with a unimodular transform `U` such that `U * input = [H; 0]`.
/// Returns `(hnf_rows, kernel_rows)` where the kernel rows are the rows of
/// `U` that map to zero: a basis of the left kernel of the input.
pub(crate) fn hnf_with_kernel(rows: Vec<Vec<BigInt>>) -> (Vec<Vec<BigInt>>, Vec<Vec<BigInt>>) {
    let n = rows.len();
    let mut u: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { BigInt::from(1) } else { BigInt::zero() })
                .collect()
        })
        .collect();
    let (h, rank) = echelonize_with(rows, &mut u);
    let kernel = u.split_off(rank);
    (h, kernel)
}

/// Basis of the left kernel `{ x : x * mat = 0 }` of an integer matrix.
pub(crate) fn left_kernel(rows: Vec<Vec<BigInt>>) -> Vec<Vec<BigInt>> {
    hnf_with_kernel(rows).1
}

fn echelonize(rows: Vec<Vec<BigInt>>) -> (Vec<Vec<BigInt>>, usize) {
    let mut no_transform: Vec<Vec<BigInt>> = Vec::new();
    let (h, rank) = echelonize_with_inner(rows, &mut no_transform, false);
    (h, rank)
}

fn echelonize_with(
    rows: Vec<Vec<BigInt>>,
    transform: &mut Vec<Vec<BigInt>>,
) -> (Vec<Vec<BigInt>>, usize) {
    echelonize_with_inner(rows, transform, true)
}

fn echelonize_with_inner(
    mut m: Vec<Vec<BigInt>>,
    u: &mut Vec<Vec<BigInt>>,
    track: bool,
) -> (Vec<Vec<BigInt>>, usize) {
    if m.is_empty() {
        return (m, 0);
    }
    let cols = m[0].len();
    let nrows = m.len();
    let mut r = 0usize;
    for c in 0..cols {
        if r == nrows {
            break;
        }
        // Eliminate column c below position r down to a single nonzero entry
        // via nearest-quotient reductions.
        loop {
            let mut best: Option<usize> = None;
            for i in r..nrows {
                if !m[i][c].is_zero() {
                    best = match best {
                        None => Some(i),
                        Some(b) if m[i][c].abs() < m[b][c].abs() => Some(i),
                        other => other,
                    };
                }
            }
            let Some(b) = best else { break };
            let mut others = false;
            for i in r..nrows {
                if i == b || m[i][c].is_zero() {
                    continue;
                }
                others = true;
                // nearest quotient keeps entries small
                let q = nearest_quotient(&m[i][c], &m[b][c]);
                if !q.is_zero() {
                    row_sub_scaled(&mut m, i, b, &q);
                    if track {
                        row_sub_scaled(u, i, b, &q);
                    }
                }
            }
            if !others {
                // column settled: move pivot into place
                m.swap(r, b);
                if track {
                    u.swap(r, b);
                }
                if m[r][c].is_negative() {
                    negate_row(&mut m[r]);
                    if track {
                        negate_row(&mut u[r]);
                    }
                }
                // reduce entries above the pivot into [0, pivot)
                for i in 0..r {
                    let q = m[i][c].div_floor(&m[r][c]);
                    if !q.is_zero() {
                        row_sub_scaled(&mut m, i, r, &q);
                        if track {
                            row_sub_scaled(u, i, r, &q);
                        }
                    }
                }
                r += 1;
                break;
            }
        }
    }
    m.truncate(r);
    (m, r)
}

fn nearest_quotient(a: &BigInt, b: &BigInt) -> BigInt {
    // round(a / b), half away from zero; result q minimizes |a - q b|
    let two = BigInt::from(2);
    let (q, rem) = a.div_mod_floor(b);
    if &rem * &two >= b.abs() {
        q + 1
    } else {
        q
    }
}

fn row_sub_scaled(m: &mut [Vec<BigInt>], dst: usize, src: usize, q: &BigInt) {
    let src_row = m[src].clone();
    for (d, s) in m[dst].iter_mut().zip(&src_row) {
        *d -= q * s;
    }
}

fn negate_row(row: &mut [BigInt]) {
    for x in row.iter_mut() {
        *x = -&*x;
    }
}

fn pivot_col(row: &[BigInt]) -> usize {
    row.iter().position(|x| !x.is_zero()).expect("nonzero row")
}

/// True iff `v` is an integer combination of the basis rows, by HNF
/// back-substitution.
pub fn membership(basis: &LatticeBasis, v: &[BigInt]) -> Result<bool, LatticeError> {
    if v.len() != basis.ambient_dim() {
        return Err(LatticeError::DimensionMismatch {
            expected: basis.ambient_dim(),
            got: v.len(),
        });
    }
    let h = hnf(basis.matrix())?;
    Ok(reduce_against(h.rows(), v).is_some())
}

/// Expresses `v` over echelon rows, returning one coefficient per row, or
/// `None` when `v` is outside the generated lattice. The rows must be in
/// echelon form (e.g. HNF output).
pub(crate) fn reduce_against(rows: &[Vec<BigInt>], v: &[BigInt]) -> Option<Vec<BigInt>> {
    let mut v = v.to_vec();
    let mut coeffs = Vec::with_capacity(rows.len());
    for row in rows {
        let c = pivot_col(row);
        if v[c].is_zero() {
            coeffs.push(BigInt::zero());
            continue;
        }
        let (q, rem) = v[c].div_mod_floor(&row[c]);
        if !rem.is_zero() {
            return None;
        }
        for (x, y) in v.iter_mut().zip(row) {
            *x -= &q * y;
        }
        coeffs.push(q);
    }
    if v.iter().all(Zero::is_zero) {
        Some(coeffs)
    } else {
        None
    }
}

/// Solves `x * mat = target` over the integers, returning one coefficient per
/// input row, or `None` when the target is outside the row span lattice.
pub fn solve_in_rowspan(mat: &IntMatrix, target: &[BigInt]) -> Option<Vec<BigInt>> {
    let (h, mut u) = {
        let n = mat.row_count();
        let mut u: Vec<Vec<BigInt>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { BigInt::from(1) } else { BigInt::zero() })
                    .collect()
            })
            .collect();
        let (h, _) = echelonize_with(mat.rows().to_vec(), &mut u);
        (h, u)
    };
    let coeffs = reduce_against(&h, target)?;
    u.truncate(h.len());
    let n = mat.row_count();
    let mut x = vec![BigInt::zero(); n];
    for (c, urow) in coeffs.iter().zip(&u) {
        for (xi, ui) in x.iter_mut().zip(urow) {
            *xi += c * ui;
        }
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::dot;
    use proptest::prelude::*;

    fn mat(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_i64(rows)
    }

    fn as_i64(rows: &[Vec<BigInt>]) -> Vec<Vec<i64>> {
        rows.iter()
            .map(|r| r.iter().map(|x| i64::try_from(x).unwrap()).collect())
            .collect()
    }

    #[test]
    fn hnf_parity_lattice() {
        // rows generate {(a, b) : a + b even}
        let h = hnf(&mat(&[&[2, 0], &[0, 2], &[1, 1]])).unwrap();
        assert_eq!(as_i64(h.rows()), vec![vec![1, 1], vec![0, 2]]);
    }

    #[test]
    fn hnf_identity_fixed_point() {
        let h = hnf(&mat(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]])).unwrap();
        assert_eq!(h.rows(), IntMatrix::identity(3).rows());
    }

    #[test]
    fn hnf_drops_zero_rows() {
        let h = hnf(&mat(&[&[0, 0], &[1, 0], &[0, 0], &[0, 1]])).unwrap();
        assert_eq!(h.rows(), IntMatrix::identity(2).rows());
    }

    #[test]
    fn hnf_determinant_matches_pivot_product() {
        let g = mat(&[&[10, 0], &[3, 1]]);
        let h = hnf(&g).unwrap();
        assert_eq!(as_i64(h.rows()), vec![vec![1, 7], vec![0, 10]]);
        assert_eq!(h.determinant().unwrap(), BigInt::from(10));
    }

    #[test]
    fn membership_parity() {
        let b = hnf(&mat(&[&[1, 1], &[0, 2]])).unwrap();
        assert!(!membership(&b, &[BigInt::from(1), BigInt::from(0)]).unwrap());
        assert!(membership(&b, &[BigInt::from(3), BigInt::from(5)]).unwrap());
        let id = hnf(&mat(&[&[1, 0], &[0, 1]])).unwrap();
        assert!(membership(&id, &[BigInt::from(-17), BigInt::from(4)]).unwrap());
    }

    #[test]
    fn left_kernel_is_kernel() {
        // rows of a with an exact dependency 2*r0 + r1 - r2 = 0
        let rows = vec![
            vec![BigInt::from(1), BigInt::from(2)],
            vec![BigInt::from(3), BigInt::from(4)],
            vec![BigInt::from(5), BigInt::from(8)],
        ];
        let k = left_kernel(rows.clone());
        assert_eq!(k.len(), 1);
        for krow in &k {
            for c in 0..2 {
                let s: BigInt = (0..3).map(|i| &krow[i] * &rows[i][c]).sum();
                assert!(s.is_zero());
            }
        }
    }

    #[test]
    fn solve_in_rowspan_roundtrip() {
        let m = mat(&[&[2, 1, 0], &[0, 3, 1]]);
        let target = vec![BigInt::from(4), BigInt::from(8), BigInt::from(2)];
        let x = solve_in_rowspan(&m, &target).unwrap();
        for c in 0..3 {
            let got: BigInt = (0..2).map(|i| &x[i] * &m.rows()[i][c]).sum();
            assert_eq!(got, target[c]);
        }
        let bad = vec![BigInt::from(1), BigInt::from(0), BigInt::from(0)];
        assert!(solve_in_rowspan(&m, &bad).is_none());
    }

    proptest! {
        #[test]
        fn hnf_is_idempotent(vals in proptest::collection::vec(-30i64..=30, 12)) {
            let rows: Vec<&[i64]> = vals.chunks(4).collect();
            let m = mat(&rows);
            if let Ok(h1) = hnf(&m) {
                let h2 = hnf(h1.matrix()).unwrap();
                prop_assert_eq!(h1.rows(), h2.rows());
            }
        }

        #[test]
        fn membership_agrees_with_exhaustive_search(vals in proptest::collection::vec(-6i64..=6, 4),
                                                    target in proptest::collection::vec(-8i64..=8, 2)) {
            let m = mat(&[&vals[0..2], &vals[2..4]]);
            if let Ok(h) = hnf(&m) {
                let v: Vec<BigInt> = target.iter().map(|&x| BigInt::from(x)).collect();
                let got = membership(&h, &v).unwrap();
                // coefficient bound: |coef| <= max|target| * max|adj entry| / |det| <= 96
                let mut expect = false;
                'outer: for a in -96i64..=96 {
                    for b in -96i64..=96 {
                        if (0..2).all(|c| a * vals[c] + b * vals[2 + c] == target[c]) {
                            expect = true;
                            break 'outer;
                        }
                    }
                }
                prop_assert_eq!(got, expect);
            }
        }

        #[test]
        fn kernel_rows_annihilate(vals in proptest::collection::vec(-9i64..=9, 12)) {
            let rows: Vec<Vec<BigInt>> = vals.chunks(3)
                .map(|ch| ch.iter().map(|&x| BigInt::from(x)).collect())
                .collect();
            let kernel = left_kernel(rows.clone());
            for k in &kernel {
                for c in 0..3 {
                    let col: Vec<BigInt> = rows.iter().map(|r| r[c].clone()).collect();
                    prop_assert!(dot(k, &col).is_zero());
                }
            }
        }
    }
}
