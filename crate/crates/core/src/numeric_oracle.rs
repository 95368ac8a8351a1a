//! Structural controllability by definition: draw integer weights, build
//! `(A, B)` and test the Kalman rank exactly.
//!
//! `true` is a certificate (the witness weights make the pair controllable);
//! `false` only means every trial landed on a rank-deficient point.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph_model::CommunicationTopology;
use crate::matrix::{DimensionError, Matrix};
use crate::parameterization::{assemble_matrices, build_parameterization, LinearParameterization, WeightAssignment};
use crate::scalar::{Exact, Scalar};
use crate::structural_analysis::{Decision, Evidence, Route, Verdict};
use crate::BigInt;

pub const DEFAULT_TRIALS: usize = 5;
pub const DEFAULT_WEIGHT_RANGE: (i64, i64) = (1, 1_000_000);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleConfigError {
    #[error("at least one trial is required")]
    NoTrials,
    #[error("weight range [{0}, {1}] is empty")]
    EmptyRange(i64, i64),
    #[error("weight range [{0}, {1}] contains zero")]
    RangeContainsZero(i64, i64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleConfig {
    trials: usize,
    seed: u64,
    weight_range: (i64, i64),
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            trials: DEFAULT_TRIALS,
            seed: 0,
            weight_range: DEFAULT_WEIGHT_RANGE,
        }
    }
}

impl OracleConfig {
    pub fn new(trials: usize, seed: u64, weight_range: (i64, i64)) -> Result<Self, OracleConfigError> {
        let (lo, hi) = weight_range;
        if trials == 0 {
            return Err(OracleConfigError::NoTrials);
        }
        if lo > hi {
            return Err(OracleConfigError::EmptyRange(lo, hi));
        }
        if lo <= 0 && hi >= 0 {
            return Err(OracleConfigError::RangeContainsZero(lo, hi));
        }
        Ok(Self {
            trials,
            seed,
            weight_range,
        })
    }

    pub fn with_seed(trials: usize, seed: u64) -> Result<Self, OracleConfigError> {
        Self::new(trials, seed, DEFAULT_WEIGHT_RANGE)
    }

    pub fn trials(&self) -> usize {
        self.trials
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn weight_range(&self) -> (i64, i64) {
        self.weight_range
    }

    /// Weights for trial `t` (1-based). Each trial has its own stream seeded
    /// from `(seed, t)`, so the draw does not depend on evaluation order.
    pub fn trial_weights(&self, sigma: usize, t: usize) -> WeightAssignment<BigInt> {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(self.seed ^ splitmix64(t as u64)));
        let (lo, hi) = self.weight_range;
        let values = (0..sigma).map(|_| BigInt::from(rng.gen_range(lo..=hi))).collect();
        WeightAssignment::new(values).expect("range excludes zero")
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub controllable: bool,
    pub witness: Option<WeightAssignment<BigInt>>,
    pub trials_run: usize,
    pub rank_achieved: usize,
}

impl OracleResult {
    pub fn verdict(&self) -> Verdict {
        Verdict {
            decision: Decision::from_bool(self.controllable),
            route: Route::Oracle,
            evidence: Evidence::Oracle(self.clone()),
        }
    }
}

/// `[B, AB, A²B, …, A^{n−1}B]`.
pub fn kalman_matrix<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>, DimensionError> {
    let n = a.rows();
    if a.cols() != n || b.rows() != n {
        return Err(DimensionError {
            left_rows: a.rows(),
            left_cols: a.cols(),
            right_rows: b.rows(),
            right_cols: b.cols(),
        });
    }
    let mut out = b.clone();
    let mut block = b.clone();
    for _ in 1..n {
        block = a.mul(&block)?;
        out = out.hcat(&block)?;
    }
    Ok(out)
}

/// Exact rank of the Kalman matrix.
pub fn controllability_rank<T: Exact>(a: &Matrix<T>, b: &Matrix<T>) -> Result<usize, DimensionError> {
    Ok(kalman_matrix(a, b)?.rank())
}

pub fn oracle_decide(topology: &CommunicationTopology, config: &OracleConfig) -> OracleResult {
    oracle_decide_param(&build_parameterization(topology), config)
}

/// Trials run in index order and stop at the first full-rank draw.
pub fn oracle_decide_param(param: &LinearParameterization, config: &OracleConfig) -> OracleResult {
    let n = param.n();
    let mut best = 0;
    for t in 1..=config.trials() {
        let w = config.trial_weights(param.sigma(), t);
        let (a, b) = assemble_matrices(param, &w).expect("weights sized from the parameterization");
        let rank = controllability_rank(&a, &b).expect("shapes come from one parameterization");
        best = best.max(rank);
        if rank == n {
            return OracleResult {
                controllable: true,
                witness: Some(w),
                trials_run: t,
                rank_achieved: rank,
            };
        }
    }
    OracleResult {
        controllable: false,
        witness: None,
        trials_run: config.trials(),
        rank_achieved: best,
    }
}

/// Largest `rank [A(w) B(w)]` over the configured trials (a lower bound on
/// the generic rank).
pub fn generic_rank(param: &LinearParameterization, config: &OracleConfig) -> usize {
    (1..=config.trials())
        .map(|t| {
            let w = config.trial_weights(param.sigma(), t);
            let (a, b) = assemble_matrices(param, &w).expect("weights sized from the parameterization");
            a.hcat(&b).expect("same row count").rank()
        })
        .max()
        .unwrap_or(0)
}
