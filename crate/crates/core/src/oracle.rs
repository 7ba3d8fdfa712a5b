//! Exhaustive ℓ0 search for tiny instances, used as ground truth in tests.

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::linalg::{check_len, norm2, Projection, SensingMatrix, SupportSet};

pub const MAX_ORACLE_COLUMNS: usize = 24;
pub const MAX_ORACLE_SPARSITY: usize = 4;

/// Smallest support (lexicographically first at that size) whose
/// least-squares residual is at most `tol · ‖y‖₂`. If no support of size up
/// to `k_max` qualifies, the minimum-residual support of size `k_max`.
/// Rank-deficient supports are skipped.
pub fn l0_solve(phi: &SensingMatrix, y: &[f64], k_max: usize, tol: f64) -> Result<(SupportSet, Vec<f64>)> {
    let n = phi.cols();
    if n > MAX_ORACLE_COLUMNS || k_max > MAX_ORACLE_SPARSITY {
        return Err(Error::InstanceTooLarge { n, k_max });
    }
    check_len(phi.rows(), y.len())?;
    let k_max = k_max.min(phi.rows());
    let threshold = tol * norm2(y);
    let mut fallback: Option<(f64, Projection<'_>)> = None;
    for size in 0..=k_max {
        for combo in (0..n).combinations(size) {
            let mut proj = Projection::new(phi, y)?;
            if combo.iter().any(|&j| proj.push(j).is_err()) {
                continue;
            }
            let rho = proj.residual_norm();
            if rho <= threshold {
                return Ok((proj.support().clone(), proj.coefficients()));
            }
            if size == k_max && fallback.as_ref().is_none_or(|(best, _)| rho < *best) {
                fallback = Some((rho, proj));
            }
        }
    }
    let (_, proj) = fallback.ok_or(Error::AllPathsDegenerate)?;
    Ok((proj.support().clone(), proj.coefficients()))
}
