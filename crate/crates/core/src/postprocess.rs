//! Classical recovery pipeline.
//!
//! Embeds the run vectors into the (d+m)-dimensional lattice generated by
//! `[I | S w_1^T .. S w_m^T; 0 | S I]`, reduces it exactly, and keeps every
//! reduced vector whose first d coordinates verify as a group relation.
//! Verification replaces the probabilistic first-d-coordinates guarantee:
//! a candidate that fails the group identity is discarded, never returned.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{
    hnf, lll_reduce_with, IntMatrix, LatticeBasis, LatticeError, LllOptions, DEFAULT_DELTA,
};
use crate::numtheory::{sign_normalize, EvalContext};
use crate::simulate::RunRecord;

#[derive(Debug, Error)]
pub enum PostprocessError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("scaling factor must be a positive multiple of the grid denominator")]
    ScaleNotMultipleOfGrid,
    #[error("run vectors disagree in dimension or grid")]
    InconsistentRuns,
    #[error("no relations recovered from {candidates} candidates")]
    NoRelationsRecovered { candidates: usize },
    #[error("no verified vectors supplied")]
    EmptyInput,
    #[error("parameter range: need m >= d + 4 and m2 <= m - (d + 4)")]
    ParamRange,
}

/// Parameters of the recovery pipeline. `log2_scale` fixes the embedding
/// factor `S = 2^log2_scale` (a power of two and a multiple of the grid
/// denominator D; S = D by default), `lll_delta` the Lovász parameter,
/// `t_claim` an optional norm bound used only for diagnostics counting.
#[derive(Debug, Clone)]
pub struct PostprocessParams {
    pub d: usize,
    pub m: usize,
    pub log2_scale: u32,
    pub lll_delta: (u32, u32),
    pub float_prepass: bool,
    pub t_claim: Option<f64>,
}

impl PostprocessParams {
    /// Defaults for a batch sampled at grid `2^log2_grid`: S = D.
    pub fn for_grid(d: usize, m: usize, log2_grid: u32) -> Self {
        Self {
            d,
            m,
            log2_scale: log2_grid,
            lll_delta: DEFAULT_DELTA,
            float_prepass: true,
            t_claim: None,
        }
    }

    pub fn scale(&self) -> BigUint {
        BigUint::one() << self.log2_scale
    }

    /// Diagnostic epsilon `(4 det L)^(-1/m) / 3`; needs the ground-truth
    /// determinant, so it never feeds the solver path.
    pub fn epsilon(&self, det_l: &BigUint) -> f64 {
        let det = det_l.to_f64().unwrap_or(f64::MAX);
        (4.0 * det).powf(-1.0 / self.m as f64) / 3.0
    }
}

/// Recovery diagnostics: how many reduced vectors were considered, how many
/// verified, and how many fell within the claim-style norm bound (when a
/// bound was supplied).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RecoveryDiagnostics {
    pub candidate_count: usize,
    pub verified_count: usize,
    pub within_claim_bound: Option<usize>,
}

/// Verified relation vectors plus the canonical basis of their span.
#[derive(Debug, Clone)]
pub struct RecoveredLattice {
    pub relation_vectors: Vec<Vec<BigInt>>,
    pub basis: LatticeBasis,
    pub diagnostics: RecoveryDiagnostics,
}

impl RecoveredLattice {
    pub fn determinant(&self) -> Option<BigUint> {
        self.basis
            .determinant()
            .ok()
            .map(|d| d.to_biguint().expect("HNF determinant is positive"))
    }
}

/// Assembles the exact integer embedding lattice
/// `[I_d | S w_1^T .. S w_m^T; 0 | S I_m]` from run vectors on the 1/D
/// grid. Rejects a scale that is not a positive multiple of D, since that
/// would force rounding.
pub fn assemble_embedding_lattice(
    runs: &[RunRecord],
    d: usize,
    scale: &BigUint,
) -> Result<LatticeBasis, PostprocessError> {
    let m = runs.len();
    if m == 0 {
        return Ok(LatticeBasis::new(IntMatrix::identity(d)).expect("identity"));
    }
    let log2_grid = runs[0].log2_grid;
    if runs
        .iter()
        .any(|r| r.log2_grid != log2_grid || r.w_num.len() != d)
    {
        return Err(PostprocessError::InconsistentRuns);
    }
    let grid = runs[0].grid();
    if scale.is_zero() || !(scale % &grid).is_zero() {
        return Err(PostprocessError::ScaleNotMultipleOfGrid);
    }
    let ratio = BigInt::from(scale / &grid);
    let scale_int = BigInt::from(scale.clone());

    let n = d + m;
    let mut rows: Vec<Vec<BigInt>> = vec![vec![BigInt::zero(); n]; n];
    for i in 0..d {
        rows[i][i] = BigInt::one();
        for (j, run) in runs.iter().enumerate() {
            // S * w_j[i] = (S/D) * w_num, exactly integral
            rows[i][d + j] = &ratio * BigInt::from(run.w_num[i].clone());
        }
    }
    for j in 0..m {
        rows[d + j][d + j] = scale_int.clone();
    }
    Ok(LatticeBasis::new(IntMatrix::new(rows).expect("shape"))
        .expect("embedding lattice is triangular with nonzero diagonal"))
}

/// Reduces the embedding lattice and extracts verified relation vectors:
/// for each reduced basis vector, the first d coordinates are kept iff the
/// group identity holds. All d+m reduced vectors are tested (the claim
/// bound is recorded in diagnostics only; testing the rest is free recall).
pub fn extract_relations(
    embedding: &LatticeBasis,
    ctx: &EvalContext,
    params: &PostprocessParams,
) -> Result<RecoveredLattice, PostprocessError> {
    let d = params.d;
    assert_eq!(ctx.dim(), d, "eval context dimension");
    let reduced = lll_reduce_with(
        embedding,
        &LllOptions {
            delta: params.lll_delta,
            float_prepass: params.float_prepass,
        },
    )?;

    let claim_bound_sq = params.t_claim.map(|t| {
        let k = embedding.rank() as f64;
        // (2^(k/2) sqrt(k) sqrt(m+1) T)^2
        2f64.powf(k) * k * (params.m as f64 + 1.0) * t * t
    });

    let mut candidates = 0usize;
    let mut within = 0usize;
    let mut verified: Vec<Vec<BigInt>> = Vec::new();
    for row in reduced.rows() {
        let mut z: Vec<BigInt> = row[..d].to_vec();
        if z.iter().all(Zero::is_zero) {
            continue;
        }
        candidates += 1;
        if let Some(bound) = claim_bound_sq {
            let norm: BigInt = row.iter().map(|x| x * x).sum();
            if norm.to_f64().unwrap_or(f64::MAX) <= bound {
                within += 1;
            }
        }
        sign_normalize(&mut z);
        if verified.contains(&z) {
            continue;
        }
        if ctx.is_relation(&z) {
            verified.push(z);
        }
    }

    if verified.is_empty() {
        return Err(PostprocessError::NoRelationsRecovered { candidates });
    }
    let basis = recover_sublattice(&verified)?;
    Ok(RecoveredLattice {
        diagnostics: RecoveryDiagnostics {
            candidate_count: candidates,
            verified_count: verified.len(),
            within_claim_bound: params.t_claim.map(|_| within),
        },
        relation_vectors: verified,
        basis,
    })
}

/// Canonical (HNF) basis of the integer span of verified relation vectors.
pub fn recover_sublattice(vectors: &[Vec<BigInt>]) -> Result<LatticeBasis, PostprocessError> {
    if vectors.is_empty() {
        return Err(PostprocessError::EmptyInput);
    }
    Ok(hnf(&IntMatrix::new(vectors.to_vec())?)?)
}

/// Lower bound on the window-scaling constant C under bad runs:
/// `(5/2 + m/(2d)) (1 + m2/d)`, the o(1) term excluded.
pub fn c_threshold(d: usize, m: usize, m2: usize) -> Result<BigRational, PostprocessError> {
    if m < d + 4 || m2 > m - (d + 4) {
        return Err(PostprocessError::ParamRange);
    }
    let d_big = BigInt::from(d as u64);
    let first = BigRational::new(BigInt::from(5), BigInt::from(2))
        + BigRational::new(BigInt::from(m as u64), BigInt::from(2) * &d_big);
    let second = BigRational::one() + BigRational::new(BigInt::from(m2 as u64), d_big);
    Ok(first * second)
}

/// The embedded image of a ground-truth relation vector `u`: coordinates
/// `(u, S<u, w_1> mod S, ..., S<u, w_m> mod S)` with centered residues.
/// Diagnostic companion to `embedding_bound_holds`.
pub fn embed_vector(u: &[BigInt], runs: &[RunRecord], scale: &BigUint) -> Vec<BigInt> {
    let mut out = u.to_vec();
    let scale_int = BigInt::from(scale.clone());
    for run in runs {
        let grid = BigInt::from(run.grid());
        let ratio = &scale_int / &grid;
        // S<u, w> is integral since S is a multiple of D
        let dot: BigInt = u
            .iter()
            .zip(&run.w_num)
            .map(|(ui, wi)| ui * BigInt::from(wi.clone()) * &ratio)
            .sum();
        // centered residue mod S in (-S/2, S/2]
        let mut r = dot.mod_floor(&scale_int);
        if &r * 2 > scale_int {
            r -= &scale_int;
        }
        out.push(r);
    }
    out
}

/// Exact check of the embedding bound `|u'|^2 <= |u|^2 (1 + m S^2 delta'^2)`
/// using a rational lower bound for `delta'` (a few ulps below the true
/// value, so a pass is sound).
pub fn embedding_bound_holds(
    u: &[BigInt],
    u_embedded: &[BigInt],
    m: usize,
    scale: &BigUint,
    delta_prime: f64,
) -> bool {
    let norm_u: BigInt = u.iter().map(|x| x * x).sum();
    let norm_e: BigInt = u_embedded.iter().map(|x| x * x).sum();
    let dp = f64_to_rational_lower(delta_prime);
    let s = BigRational::from_integer(BigInt::from(scale.clone()));
    let bound = BigRational::from_integer(norm_u)
        * (BigRational::one()
            + BigRational::from_integer(BigInt::from(m as u64)) * &s * &s * &dp * &dp);
    BigRational::from_integer(norm_e) <= bound
}

fn f64_to_rational_lower(x: f64) -> BigRational {
    if x <= 0.0 {
        return BigRational::zero();
    }
    let down = f64::from_bits(x.to_bits().saturating_sub(4));
    let bits = down.to_bits();
    let mut exp = ((bits >> 52) & 0x7ff) as i64;
    let mut man = bits & 0xf_ffff_ffff_ffff;
    if exp == 0 {
        exp = -1074;
    } else {
        man |= 1 << 52;
        exp -= 1075;
    }
    let m = BigInt::from(man);
    if exp >= 0 {
        BigRational::from_integer(m << exp as u64)
    } else {
        BigRational::new(m, BigInt::one() << (-exp) as u64)
    }
}

/// JSON report for the `post` workflow: counts, the recovered HNF basis,
/// and its determinant when square.
#[derive(Debug, Serialize, Deserialize)]
pub struct PostReport {
    pub verified_count: usize,
    pub candidate_count: usize,
    pub hnf_basis: Vec<Vec<String>>,
    pub det: Option<String>,
}

impl PostReport {
    pub fn from_recovered(rec: &RecoveredLattice) -> Self {
        Self {
            verified_count: rec.diagnostics.verified_count,
            candidate_count: rec.diagnostics.candidate_count,
            hnf_basis: rec
                .basis
                .rows()
                .iter()
                .map(|r| r.iter().map(|x| x.to_string()).collect())
                .collect(),
            det: rec.determinant().map(|d| d.to_string()),
        }
    }
}
