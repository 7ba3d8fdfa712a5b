//! Scoring: exact reconstruction, SRER and empirical SMNR.

use serde::{Deserialize, Serialize};

use crate::instance::SparseSignal;
use crate::pursuit::RecoveryResult;

/// Relative error below which a reconstruction counts as exact.
pub const DEFAULT_EXACT_TOLERANCE: f64 = 1e-4;

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn energy(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum()
}

/// `‖x − x̂‖₂ ≤ tol · ‖x‖₂`.
pub fn exact_recovery(x_true: &SparseSignal, result: &RecoveryResult, tol: f64) -> bool {
    exact_match(&x_true.values, &result.x_hat, tol)
}

pub fn exact_match(x: &[f64], x_hat: &[f64], tol: f64) -> bool {
    x.len() == x_hat.len() && sq_dist(x, x_hat).sqrt() <= tol * energy(x).sqrt()
}

/// How a batch of SRER values is averaged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SrerMean {
    /// dB of the ratio of summed energies.
    #[default]
    Energy,
    /// Arithmetic mean of per-signal dB values.
    Db,
}

/// `10 log10(Σ‖x‖² / Σ‖x − x̂‖²)`, `+∞` when every reconstruction is perfect.
/// Returns `None` for an empty batch.
pub fn srer<'a, I>(batch: I) -> Option<f64>
where
    I: IntoIterator<Item = (&'a [f64], &'a [f64])>,
{
    let mut signal = 0.0;
    let mut error = 0.0;
    let mut any = false;
    for (x, x_hat) in batch {
        any = true;
        signal += energy(x);
        error += sq_dist(x, x_hat);
    }
    any.then(|| ratio_db(signal, error))
}

/// Mean of per-pair SRER values in dB; `+∞` if any pair is perfect.
pub fn srer_mean_db<'a, I>(batch: I) -> Option<f64>
where
    I: IntoIterator<Item = (&'a [f64], &'a [f64])>,
{
    let vals: Vec<f64> = batch.into_iter().map(|(x, xh)| ratio_db(energy(x), sq_dist(x, xh))).collect();
    (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
}

/// `10 log10(Σ‖x‖² / Σ‖w‖²)`, `+∞` for a noiseless batch.
pub fn empirical_smnr<'a, I>(batch: I) -> Option<f64>
where
    I: IntoIterator<Item = (&'a [f64], &'a [f64])>,
{
    let mut signal = 0.0;
    let mut noise = 0.0;
    let mut any = false;
    for (x, w) in batch {
        any = true;
        signal += energy(x);
        noise += energy(w);
    }
    any.then(|| ratio_db(signal, noise))
}

fn ratio_db(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (num / den).log10()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SupportSet;
    use proptest::prelude::*;

    fn result(x_hat: Vec<f64>) -> RecoveryResult {
        RecoveryResult {
            x_hat,
            support: SupportSet::new(),
            residual_norm: 0.0,
            iterations: 0,
            candidates_examined: 0,
        }
    }

    #[test]
    fn exact_recovery_cases() {
        let x = SparseSignal {
            values: vec![0.0, 2.0, -1.0],
            support: SupportSet::from_indices(vec![1, 2], 3).unwrap(),
            kind: crate::instance::SignalKind::GaussianNonzeros,
        };
        assert!(exact_recovery(&x, &result(x.values.clone()), DEFAULT_EXACT_TOLERANCE));
        assert!(!exact_recovery(&x, &result(vec![0.0; 3]), DEFAULT_EXACT_TOLERANCE));
        assert!(exact_recovery(&x, &result(vec![0.0, 2.0 + 1e-6, -1.0]), DEFAULT_EXACT_TOLERANCE));
        assert!(!exact_recovery(&x, &result(vec![0.01, 2.0, -1.0]), DEFAULT_EXACT_TOLERANCE));
    }

    #[test]
    fn srer_reference_values() {
        let x = [2.0, 0.0];
        let zero = [0.0, 0.0];
        assert_eq!(srer([(&x[..], &zero[..])]), Some(0.0));
        assert_eq!(srer([(&x[..], &x[..])]), Some(f64::INFINITY));
        let xh = [1.8, 0.0];
        assert!((srer([(&x[..], &xh[..])]).unwrap() - 20.0).abs() < 1e-12);
        assert_eq!(srer(std::iter::empty()), None);
        assert!((srer_mean_db([(&x[..], &xh[..])]).unwrap() - 20.0).abs() < 1e-12);
    }

    #[test]
    fn smnr_reference_values() {
        let x = [1.0, 1.0];
        let w = [0.0, 0.0];
        assert_eq!(empirical_smnr([(&x[..], &w[..])]), Some(f64::INFINITY));
        let w = [1.0, -1.0, 0.0];
        assert!(empirical_smnr([(&x[..], &w[..])]).unwrap().abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn srer_is_scale_invariant(
            pairs in prop::collection::vec((prop::collection::vec(-5.0f64..5.0, 4), prop::collection::vec(-5.0f64..5.0, 4)), 1..6),
            c in prop_oneof![-100.0f64..-0.01, 0.01f64..100.0],
        ) {
            let base = srer(pairs.iter().map(|(a, b)| (a.as_slice(), b.as_slice()))).unwrap();
            let scaled: Vec<(Vec<f64>, Vec<f64>)> = pairs
                .iter()
                .map(|(a, b)| (a.iter().map(|v| v * c).collect(), b.iter().map(|v| v * c).collect()))
                .collect();
            let s = srer(scaled.iter().map(|(a, b)| (a.as_slice(), b.as_slice()))).unwrap();
            if base.is_finite() {
                prop_assert!((base - s).abs() < 1e-10 * base.abs().max(1.0));
            }
        }

        #[test]
        fn self_match_is_exact(x in prop::collection::vec(-1e3f64..1e3, 1..20)) {
            prop_assume!(x.iter().any(|v| *v != 0.0));
            prop_assert!(exact_match(&x, &x, DEFAULT_EXACT_TOLERANCE));
        }
    }
}
