//! Exact integer-lattice toolkit.
//!
//! Everything in this module runs over arbitrary-precision integers (or
//! exact rationals where Gram–Schmidt data is needed). Bases are row-major:
//! the rows of a matrix generate the lattice.

mod enumerate;
mod hnf;
mod lll;

pub use enumerate::{shortest_vector_sq, vectors_within};
pub use hnf::{hnf, membership, solve_in_rowspan};
pub use lll::{
    gram_schmidt, lll_reduce, lll_reduce_with, short_generating_set,
    short_generating_set_norm_sq, LllOptions, DEFAULT_DELTA,
};
pub(crate) use hnf::left_kernel;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LatticeError {
    #[error("matrix must be rectangular with at least one row and column")]
    BadShape,
    #[error("rank-deficient input: rows are linearly dependent")]
    RankDeficient,
    #[error("operation requires a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("ambient dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("delta must satisfy 1/4 < delta < 1")]
    BadDelta,
}

/// Row-major matrix of arbitrary-precision integers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntMatrix {
    #[serde(
        serialize_with = "crate::encode::serialize_bigint_matrix",
        deserialize_with = "crate::encode::deserialize_bigint_matrix"
    )]
    rows: Vec<Vec<BigInt>>,
}

impl IntMatrix {
    pub fn new(rows: Vec<Vec<BigInt>>) -> Result<Self, LatticeError> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(LatticeError::BadShape);
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(LatticeError::BadShape);
        }
        Ok(Self { rows })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self {
            rows: rows
                .iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { BigInt::from(1) } else { BigInt::zero() })
                    .collect()
            })
            .collect();
        Self { rows }
    }

    pub fn rows(&self) -> &[Vec<BigInt>] {
        &self.rows
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn col_count(&self) -> usize {
        self.rows[0].len()
    }

    /// Absolute value of the determinant, by fraction-free (Bareiss)
    /// elimination. Rejects non-square input.
    pub fn determinant_abs(&self) -> Result<BigInt, LatticeError> {
        let n = self.row_count();
        if n != self.col_count() {
            return Err(LatticeError::NotSquare {
                rows: n,
                cols: self.col_count(),
            });
        }
        let mut m = self.rows.clone();
        let mut denom = BigInt::from(1);
        for k in 0..n - 1 {
            if m[k][k].is_zero() {
                let Some(p) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else {
                    return Ok(BigInt::zero());
                };
                m.swap(k, p);
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                    m[i][j] = num / &denom;
                }
                m[i][k] = BigInt::zero();
            }
            denom = m[k][k].clone();
        }
        Ok(m[n - 1][n - 1].abs())
    }
}

/// A lattice basis: rows are linearly independent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeBasis {
    matrix: IntMatrix,
}

impl LatticeBasis {
    /// Validates linear independence via exact Gram–Schmidt: every
    /// orthogonalized row must have nonzero norm.
    pub fn new(matrix: IntMatrix) -> Result<Self, LatticeError> {
        let (_, norms) = gram_schmidt(&matrix);
        if norms.iter().any(|n| n.is_zero()) {
            return Err(LatticeError::RankDeficient);
        }
        Ok(Self { matrix })
    }

    /// For rows already known to be independent (HNF output, LLL output).
    pub(crate) fn from_rows_unchecked(rows: Vec<Vec<BigInt>>) -> Self {
        Self {
            matrix: IntMatrix { rows },
        }
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn rows(&self) -> &[Vec<BigInt>] {
        self.matrix.rows()
    }

    pub fn rank(&self) -> usize {
        self.matrix.row_count()
    }

    pub fn ambient_dim(&self) -> usize {
        self.matrix.col_count()
    }

    /// |det| of a square full-rank basis.
    pub fn determinant(&self) -> Result<BigInt, LatticeError> {
        self.matrix.determinant_abs()
    }
}

pub(crate) fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Squared Euclidean norm of an integer vector.
pub fn norm_sq(v: &[BigInt]) -> BigInt {
    dot(v, v)
}

pub(crate) fn rat(n: BigInt) -> BigRational {
    BigRational::from_integer(n)
}

/// Nearest integer to an exact rational, rounding half away from zero.
pub(crate) fn round_rational(q: &BigRational) -> BigInt {
    q.round().to_integer()
}
