//! Seeded generation of benchmark instances.
//!
//! Every generator is a pure function of its parameters and a 64-bit seed.
//! Randomness comes from ChaCha20 (`rand_chacha`), so a recorded seed
//! reproduces an instance on any platform.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{SensingMatrix, SupportSet};

/// Name of the generator backing every seeded draw; recorded in benchmark metadata.
pub const RNG_NAME: &str = "ChaCha20 (rand_chacha 0.9)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalKind {
    /// Nonzeros drawn i.i.d. from N(0, 1).
    GaussianNonzeros,
    /// Nonzeros all equal to one.
    ZeroOne,
}

impl SignalKind {
    /// Theoretical per-nonzero power σ_s².
    pub fn nonzero_power(self) -> f64 {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignalModel {
    pub kind: SignalKind,
    pub n: usize,
    pub k: usize,
}

impl SignalModel {
    pub fn new(kind: SignalKind, n: usize, k: usize) -> Result<Self> {
        if n == 0 || k > n {
            return Err(Error::InvalidConfig(format!(
                "signal model needs 0 <= k <= n and n > 0, got k = {k}, n = {n}"
            )));
        }
        Ok(Self { kind, n, k })
    }
}

/// A planted `k`-sparse signal.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSignal {
    pub values: Vec<f64>,
    pub support: SupportSet,
    pub kind: SignalKind,
}

impl SparseSignal {
    pub fn sparsity(&self) -> usize {
        self.support.len()
    }

    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

/// Noise level derived from a target signal-to-measurement-noise ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub smnr_db: f64,
    pub sigma_s_sq: f64,
    pub sigma_w_sq: f64,
}

impl NoiseModel {
    /// Solves `SMNR = 10 log10(k σ_s² / (m σ_w²))` for σ_w².
    /// `smnr_db = +∞` yields σ_w² = 0.
    pub fn for_smnr(smnr_db: f64, k: usize, m: usize, sigma_s_sq: f64) -> Result<Self> {
        if smnr_db.is_nan() || smnr_db == f64::NEG_INFINITY || m == 0 || sigma_s_sq.is_nan() || sigma_s_sq <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "cannot calibrate noise for SMNR {smnr_db} dB, m = {m}, sigma_s^2 = {sigma_s_sq}"
            )));
        }
        if k == 0 {
            return Err(Error::ZeroSignal);
        }
        let sigma_w_sq = if smnr_db == f64::INFINITY {
            0.0
        } else {
            k as f64 * sigma_s_sq / (m as f64 * 10f64.powf(smnr_db / 10.0))
        };
        Ok(Self {
            smnr_db,
            sigma_s_sq,
            sigma_w_sq,
        })
    }
}

pub fn rng_from_seed(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for one trial of one sweep point: the master seed XOR a mixed
/// (point, trial) counter, so trials can run in any order.
pub fn trial_seed(master: u64, point: u64, trial: u64) -> u64 {
    master ^ mix64((point << 32) ^ trial)
}

/// Independent sub-stream of a trial seed (matrix, signal, noise, ...).
pub fn stream_seed(seed: u64, stream: u64) -> u64 {
    mix64(seed ^ mix64(stream.wrapping_add(0x5851_f42d_4c95_7f2d)))
}

/// `m × n` matrix with i.i.d. N(0, 1) entries, optionally column-normalized.
pub fn gen_sensing_matrix(m: usize, n: usize, normalize_columns: bool, seed: u64) -> Result<SensingMatrix> {
    if m >= n {
        return Err(Error::InvalidMatrix(format!("need m < n, got {m}x{n}")));
    }
    let mut rng = rng_from_seed(seed);
    let data: Vec<f64> = (0..m * n).map(|_| rng.sample(StandardNormal)).collect();
    let phi = SensingMatrix::from_col_major(m, n, data)?;
    if normalize_columns {
        phi.normalize_columns()
    } else {
        Ok(phi)
    }
}

/// Support drawn uniformly without replacement; nonzeros per `model.kind`.
pub fn gen_sparse_signal(model: SignalModel, seed: u64) -> Result<SparseSignal> {
    let model = SignalModel::new(model.kind, model.n, model.k)?;
    let mut rng = rng_from_seed(seed);
    let mut idx = sample(&mut rng, model.n, model.k).into_vec();
    idx.sort_unstable();
    let mut values = vec![0.0; model.n];
    for &j in &idx {
        values[j] = match model.kind {
            SignalKind::GaussianNonzeros => loop {
                let v: f64 = rng.sample(StandardNormal);
                if v != 0.0 {
                    break v;
                }
            },
            SignalKind::ZeroOne => 1.0,
        };
    }
    Ok(SparseSignal {
        values,
        support: SupportSet::from_indices(idx, model.n)?,
        kind: model.kind,
    })
}

/// Measurement noise with per-element variance calibrated to `smnr_db`.
pub fn gen_noise_for_smnr(x: &SparseSignal, m: usize, smnr_db: f64, seed: u64) -> Result<Vec<f64>> {
    if x.values.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroSignal);
    }
    let model = NoiseModel::for_smnr(smnr_db, x.sparsity(), m, x.kind.nonzero_power())?;
    if model.sigma_w_sq == 0.0 {
        return Ok(vec![0.0; m]);
    }
    let sigma = model.sigma_w_sq.sqrt();
    let mut rng = rng_from_seed(seed);
    Ok((0..m).map(|_| sigma * rng.sample::<f64, _>(StandardNormal)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_is_deterministic_and_normalizable() {
        let a = gen_sensing_matrix(16, 32, false, 9).unwrap();
        let b = gen_sensing_matrix(16, 32, false, 9).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, gen_sensing_matrix(16, 32, false, 10).unwrap());
        let c = gen_sensing_matrix(16, 32, true, 9).unwrap();
        for j in 0..32 {
            let n: f64 = c.column(j).iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() < 1e-12);
        }
        assert!(gen_sensing_matrix(4, 4, false, 0).is_err());
    }

    #[test]
    fn entry_moments() {
        // 128x256 draw: mean and variance within three standard errors.
        let phi = gen_sensing_matrix(128, 256, false, 2024).unwrap();
        let vals: Vec<f64> = (0..256).flat_map(|j| phi.column(j).to_vec()).collect();
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 3.0 / n.sqrt(), "mean {mean}");
        assert!((var - 1.0).abs() < 3.0 * (2.0 / n).sqrt(), "var {var}");
    }

    #[test]
    fn zero_one_and_empty_signals() {
        let x = gen_sparse_signal(SignalModel::new(SignalKind::ZeroOne, 50, 7).unwrap(), 1).unwrap();
        assert_eq!(x.sparsity(), 7);
        for (j, v) in x.values.iter().enumerate() {
            assert_eq!(*v, if x.support.contains(j) { 1.0 } else { 0.0 });
        }
        let z = gen_sparse_signal(SignalModel::new(SignalKind::GaussianNonzeros, 10, 0).unwrap(), 1).unwrap();
        assert!(z.values.iter().all(|&v| v == 0.0) && z.support.is_empty());
        assert!(SignalModel::new(SignalKind::ZeroOne, 3, 4).is_err());
    }

    #[test]
    fn gaussian_signal_support_is_exact() {
        let x = gen_sparse_signal(SignalModel::new(SignalKind::GaussianNonzeros, 64, 12).unwrap(), 77).unwrap();
        assert_eq!(x.sparsity(), 12);
        assert_eq!(x.values.iter().filter(|v| **v != 0.0).count(), 12);
    }

    #[test]
    fn noise_variance_by_hand() {
        let nm = NoiseModel::for_smnr(20.0, 20, 100, 1.0).unwrap();
        assert!((nm.sigma_w_sq - 2e-3).abs() < 1e-15);
        let back = 10.0 * (20.0 * nm.sigma_s_sq / (100.0 * nm.sigma_w_sq)).log10();
        assert!((back - 20.0).abs() < 1e-12);
    }

    #[test]
    fn noiseless_sentinel_and_zero_signal() {
        let x = gen_sparse_signal(SignalModel::new(SignalKind::ZeroOne, 20, 3).unwrap(), 4).unwrap();
        assert_eq!(gen_noise_for_smnr(&x, 8, f64::INFINITY, 1).unwrap(), vec![0.0; 8]);
        let zero = SparseSignal {
            values: vec![0.0; 20],
            support: SupportSet::new(),
            kind: SignalKind::ZeroOne,
        };
        assert_eq!(gen_noise_for_smnr(&zero, 8, 20.0, 1), Err(Error::ZeroSignal));
    }

    #[test]
    fn trial_seeds_are_distinct() {
        let mut seen = std::collections::HashSet::new();
        for p in 0..20 {
            for t in 0..200 {
                assert!(seen.insert(trial_seed(42, p, t)));
            }
        }
    }
}
