//! Experiment configuration: TOML text in, validated [`ExperimentSpec`] out.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gsra::GsraConfig;
use crate::metrics::{SrerMean, DEFAULT_EXACT_TOLERANCE};
use crate::pursuit::PursuitConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// Exact-recovery sweep over K, N(0, 1) nonzeros.
    GaussianSweep,
    /// Exact-recovery sweep over K, unit nonzeros.
    ZeroOneSweep,
    /// SRER over sampling rates with measurement noise.
    NoisySrer,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::GaussianSweep => "gaussian_sweep",
            Protocol::ZeroOneSweep => "zero_one_sweep",
            Protocol::NoisySrer => "noisy_srer",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Omp,
    Sp,
    Gomp,
    MmpDfs,
    MmpBfs,
    Gsra,
}

impl Algorithm {
    pub const DEFAULT_ROSTER: [Algorithm; 5] = [
        Algorithm::Omp,
        Algorithm::Gomp,
        Algorithm::MmpDfs,
        Algorithm::MmpBfs,
        Algorithm::Gsra,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Omp => "omp",
            Algorithm::Sp => "sp",
            Algorithm::Gomp => "gomp",
            Algorithm::MmpDfs => "mmp_dfs",
            Algorithm::MmpBfs => "mmp_bfs",
            Algorithm::Gsra => "gsra",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Small-instance oracle comparison settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleSpec {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub trials: usize,
    /// Minimum fraction of trials where GSRA must match the oracle.
    pub min_agreement: f64,
}

impl Default for OracleSpec {
    fn default() -> Self {
        Self {
            m: 10,
            n: 16,
            k: 2,
            trials: 200,
            min_agreement: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum RawRange {
    List(Vec<usize>),
    Span {
        start: usize,
        end: usize,
        #[serde(default = "one")]
        step: usize,
    },
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNoise {
    sampling_rates: Option<Vec<f64>>,
    smnr_db: Option<f64>,
    matrices: Option<usize>,
    signals_per_matrix: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    protocol: Protocol,
    m: Option<usize>,
    n: Option<usize>,
    k_range: Option<RawRange>,
    trials: Option<usize>,
    master_seed: Option<u64>,
    output_dir: Option<PathBuf>,
    algorithms: Option<Vec<Algorithm>>,
    normalize_columns: Option<bool>,
    exact_tolerance: Option<f64>,
    srer_mean: Option<SrerMean>,
    parallel: Option<bool>,
    full_scale: Option<bool>,
    pursuit: Option<toml::Table>,
    gsra: Option<toml::Table>,
    noise: Option<RawNoise>,
    oracle: Option<OracleSpec>,
}

/// Fully resolved description of one benchmark sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub protocol: Protocol,
    /// Measurements for the sparsity sweeps (unused by `noisy_srer`).
    pub m: usize,
    pub n: usize,
    pub k_range: Vec<usize>,
    /// Sampling rates `m / n` for `noisy_srer`.
    pub sampling_rates: Vec<f64>,
    /// Trials per sweep point; for `noisy_srer` this is matrices × signals.
    pub trials: usize,
    pub matrices: usize,
    pub signals_per_matrix: usize,
    pub smnr_db: f64,
    pub normalize_columns: bool,
    pub algorithms: Vec<Algorithm>,
    pub pursuit: PursuitConfig,
    pub gsra: GsraConfig,
    pub master_seed: u64,
    pub output_dir: PathBuf,
    pub exact_tolerance: f64,
    pub srer_mean: SrerMean,
    pub parallel: bool,
    pub oracle: OracleSpec,
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub trials: Option<usize>,
    pub master_seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub full_scale: bool,
    pub srer_mean: Option<SrerMean>,
}

pub const DESK_TRIALS: usize = 100;
pub const FULL_TRIALS: usize = 1000;
pub const DESK_MATRICES: usize = 20;
pub const FULL_MATRICES: usize = 100;
pub const SIGNALS_PER_MATRIX: usize = 10;

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Deserializes `base` with the keys of `section` written over it.
fn overlay<T>(base: &T, section: Option<toml::Table>, name: &str) -> Result<T>
where
    T: Serialize + serde::de::DeserializeOwned,
{
    let mut table = toml::Table::try_from(base).map_err(|e| cfg_err(e.to_string()))?;
    if let Some(user) = section {
        table.extend(user);
    }
    table
        .try_into()
        .map_err(|e: toml::de::Error| cfg_err(format!("section [{name}]: {}", e.to_string().trim_end())))
}

impl ExperimentSpec {
    /// `m` for the sweep point at `rate`.
    pub fn measurements_for_rate(&self, rate: f64) -> usize {
        (rate * self.n as f64).round() as usize
    }

    /// Measurement counts of every sweep point.
    pub fn point_dims(&self) -> Vec<usize> {
        match self.protocol {
            Protocol::NoisySrer => self.sampling_rates.iter().map(|&r| self.measurements_for_rate(r)).collect(),
            _ => vec![self.m],
        }
    }

    /// Parses and validates `text`, then applies `overrides`.
    pub fn from_toml(text: &str, overrides: &Overrides) -> Result<Self> {
        let raw: RawSpec = toml::from_str(text).map_err(|e| cfg_err(e.to_string().trim_end().to_string()))?;
        let full_scale = overrides.full_scale || raw.full_scale.unwrap_or(false);
        let noisy = raw.protocol == Protocol::NoisySrer;
        let noise = raw.noise.clone().unwrap_or_default();
        if !noisy && raw.noise.is_some() {
            return Err(cfg_err("section [noise] only applies to protocol noisy_srer"));
        }

        let (default_m, default_n) = if noisy { (0, 500) } else { (128, 256) };
        if noisy && raw.m.is_some() {
            return Err(cfg_err("field `m`: noisy_srer derives m from [noise].sampling_rates"));
        }
        let m = raw.m.unwrap_or(default_m);
        let n = raw.n.unwrap_or(default_n);

        let k_range = match raw.k_range {
            Some(RawRange::List(v)) => v,
            Some(RawRange::Span { start, end, step }) => {
                if step == 0 {
                    return Err(cfg_err("field `k_range.step` must be positive"));
                }
                (start..=end).step_by(step).collect()
            }
            None => match raw.protocol {
                Protocol::GaussianSweep => (1..=60).collect(),
                Protocol::ZeroOneSweep => (1..=50).collect(),
                Protocol::NoisySrer => vec![20],
            },
        };

        let sampling_rates = if noisy {
            noise
                .sampling_rates
                .unwrap_or_else(|| (15..=20).map(|p| p as f64 / 100.0).collect())
        } else {
            Vec::new()
        };
        let matrices = noise
            .matrices
            .unwrap_or(if full_scale { FULL_MATRICES } else { DESK_MATRICES });
        let signals_per_matrix = noise.signals_per_matrix.unwrap_or(SIGNALS_PER_MATRIX);
        let default_trials = if noisy {
            matrices * signals_per_matrix
        } else if full_scale {
            FULL_TRIALS
        } else {
            DESK_TRIALS
        };
        let mut trials = raw.trials.unwrap_or(default_trials);
        if noisy && raw.trials.is_some() && trials != matrices * signals_per_matrix {
            return Err(cfg_err(format!(
                "field `trials`: noisy_srer runs matrices x signals_per_matrix = {} trials",
                matrices * signals_per_matrix
            )));
        }

        let gsra_base = if noisy {
            GsraConfig {
                search_depth: 16,
                allow_deep_search: true,
                ..GsraConfig::default()
            }
        } else {
            GsraConfig::default()
        };
        let mut gsra: GsraConfig = overlay(&gsra_base, raw.gsra, "gsra")?;
        gsra.sparsity_k = k_range.iter().copied().max().unwrap_or(1);
        let pursuit: PursuitConfig = overlay(&PursuitConfig::default(), raw.pursuit, "pursuit")?;

        let mut spec = ExperimentSpec {
            protocol: raw.protocol,
            m,
            n,
            k_range,
            sampling_rates,
            trials,
            matrices,
            signals_per_matrix,
            smnr_db: noise.smnr_db.unwrap_or(20.0),
            normalize_columns: raw.normalize_columns.unwrap_or(noisy),
            algorithms: raw.algorithms.unwrap_or_else(|| Algorithm::DEFAULT_ROSTER.to_vec()),
            pursuit,
            gsra,
            master_seed: raw.master_seed.unwrap_or(20_161),
            output_dir: raw.output_dir.unwrap_or_else(|| PathBuf::from("results")),
            exact_tolerance: raw.exact_tolerance.unwrap_or(DEFAULT_EXACT_TOLERANCE),
            srer_mean: raw.srer_mean.unwrap_or_default(),
            parallel: raw.parallel.unwrap_or(true),
            oracle: raw.oracle.unwrap_or_default(),
        };

        if let Some(t) = overrides.trials {
            if noisy {
                if t % spec.signals_per_matrix != 0 {
                    return Err(cfg_err(format!(
                        "--trials {t} must be a multiple of signals_per_matrix = {}",
                        spec.signals_per_matrix
                    )));
                }
                spec.matrices = t / spec.signals_per_matrix;
            }
            trials = t;
            spec.trials = trials;
        }
        if let Some(seed) = overrides.master_seed {
            spec.master_seed = seed;
        }
        if let Some(dir) = &overrides.output_dir {
            spec.output_dir = dir.clone();
        }
        if let Some(mode) = overrides.srer_mean {
            spec.srer_mean = mode;
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(cfg_err("field `n` must be positive"));
        }
        if self.algorithms.is_empty() {
            return Err(cfg_err("field `algorithms` must name at least one algorithm"));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = self.algorithms.iter().find(|a| !seen.insert(**a)) {
            return Err(cfg_err(format!("field `algorithms`: `{dup}` listed twice")));
        }
        if self.k_range.is_empty() {
            return Err(cfg_err("field `k_range` is empty"));
        }
        if self.protocol == Protocol::NoisySrer {
            if self.k_range.len() != 1 {
                return Err(cfg_err("field `k_range`: noisy_srer uses a single sparsity level"));
            }
            if self.sampling_rates.is_empty() {
                return Err(cfg_err("field `noise.sampling_rates` is empty"));
            }
            for &r in &self.sampling_rates {
                let m = self.measurements_for_rate(r);
                if !(r > 0.0 && r < 1.0) || m == 0 || m >= self.n {
                    return Err(cfg_err(format!(
                        "field `noise.sampling_rates`: rate {r} gives m = {m}, need 0 < m < n = {}",
                        self.n
                    )));
                }
            }
            if self.smnr_db.is_nan() {
                return Err(cfg_err("field `noise.smnr_db` must be a number"));
            }
        } else if self.m == 0 || self.m >= self.n {
            return Err(cfg_err(format!("fields `m`, `n`: need 0 < m < n, got m = {}, n = {}", self.m, self.n)));
        }
        for m in self.point_dims() {
            if let Some(&k) = self.k_range.iter().find(|&&k| k == 0 || k > m) {
                return Err(cfg_err(format!("field `k_range`: K = {k} outside [1, m = {m}]")));
            }
        }
        let k_max = self.k_range.iter().copied().max().unwrap_or(0);
        let g = &self.gsra;
        if g.path_l == 0 || g.path_l > k_max {
            return Err(cfg_err(format!(
                "field `gsra.path_l`: path count L = {} must satisfy 1 <= L <= K (largest K in k_range is {k_max})",
                g.path_l
            )));
        }
        if g.search_depth == 0 || g.max_candidates == 0 {
            return Err(cfg_err("fields `gsra.search_depth` and `gsra.max_candidates` must be positive"));
        }
        if !(g.alpha > 0.0 && g.alpha < 1.0) {
            return Err(cfg_err(format!("field `gsra.alpha` = {} must lie in (0, 1)", g.alpha)));
        }
        if !(g.stop_tolerance >= 0.0 && g.stop_tolerance.is_finite()) {
            return Err(cfg_err("field `gsra.stop_tolerance` must be finite and >= 0"));
        }
        if g.max_driver_iterations == Some(0) {
            return Err(cfg_err("field `gsra.max_driver_iterations` must be positive"));
        }
        let p = &self.pursuit;
        if p.gomp_indices_per_iter == 0 || p.mmp_expansion_l == 0 || p.mmp_max_candidates == 0 {
            return Err(cfg_err(
                "fields `pursuit.gomp_indices_per_iter`, `pursuit.mmp_expansion_l`, `pursuit.mmp_max_candidates` must be positive",
            ));
        }
        if !(p.residual_tolerance >= 0.0 && p.residual_tolerance.is_finite()) {
            return Err(cfg_err("field `pursuit.residual_tolerance` must be finite and >= 0"));
        }
        if !(self.exact_tolerance > 0.0 && self.exact_tolerance.is_finite()) {
            return Err(cfg_err("field `exact_tolerance` must be positive"));
        }
        let o = &self.oracle;
        if o.k == 0 || o.k > crate::oracle::MAX_ORACLE_SPARSITY || o.n > crate::oracle::MAX_ORACLE_COLUMNS || o.m >= o.n || o.k > o.m {
            return Err(cfg_err(format!(
                "section [oracle]: need 1 <= k <= min(m, {}), m < n <= {}",
                crate::oracle::MAX_ORACLE_SPARSITY,
                crate::oracle::MAX_ORACLE_COLUMNS
            )));
        }
        Ok(())
    }

    /// Per-point baseline configuration.
    pub fn pursuit_for(&self, k: usize) -> PursuitConfig {
        PursuitConfig {
            sparsity_k: k,
            ..self.pursuit.clone()
        }
    }

    /// Per-point GSRA configuration, clamped to the point's `m` and `K`.
    pub fn gsra_for(&self, m: usize, k: usize) -> GsraConfig {
        self.gsra.fitted(m, k)
    }
}

/// Parses a config with no command-line overrides.
pub fn validate_spec(text: &str) -> Result<ExperimentSpec> {
    ExperimentSpec::from_toml(text, &Overrides::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let spec = validate_spec("protocol = \"gaussian_sweep\"\n").unwrap();
        assert_eq!((spec.m, spec.n, spec.trials), (128, 256, DESK_TRIALS));
        assert_eq!(spec.k_range, (1..=60).collect::<Vec<_>>());
        assert_eq!(spec.algorithms, Algorithm::DEFAULT_ROSTER.to_vec());
        assert_eq!((spec.gsra.path_l, spec.gsra.search_depth, spec.gsra.max_candidates), (2, 7, 30));
        assert_eq!(spec.pursuit.gomp_indices_per_iter, 3);
        assert!(!spec.normalize_columns);

        let noisy = validate_spec("protocol = \"noisy_srer\"\n").unwrap();
        assert_eq!(noisy.k_range, vec![20]);
        assert_eq!(noisy.n, 500);
        assert_eq!(noisy.trials, 200);
        assert_eq!(noisy.point_dims(), vec![75, 80, 85, 90, 95, 100]);
        assert_eq!(noisy.gsra.search_depth, 16);
        assert!(noisy.gsra.allow_deep_search && noisy.normalize_columns);
        let tuned = validate_spec("protocol = \"noisy_srer\"\n[gsra]\nmax_candidates = 20\n").unwrap();
        assert_eq!((tuned.gsra.search_depth, tuned.gsra.max_candidates), (16, 20));
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = validate_spec("protocol = \"gaussian_sweep\"\nbogus_key = 3\n").unwrap_err();
        assert!(err.to_string().contains("bogus_key"), "{err}");
        let err = validate_spec("protocol = \"gaussian_sweep\"\n[gsra]\ndepth = 3\n").unwrap_err();
        assert!(err.to_string().contains("depth"), "{err}");
    }

    #[test]
    fn path_count_above_sparsity_rejected() {
        let err = validate_spec("protocol = \"gaussian_sweep\"\nk_range = [1, 2]\n[gsra]\npath_l = 3\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("L <= K"), "{msg}");
    }

    #[test]
    fn ranges_and_overrides() {
        let text = "protocol = \"zero_one_sweep\"\nk_range = { start = 10, end = 30, step = 10 }\n";
        let spec = ExperimentSpec::from_toml(
            text,
            &Overrides {
                trials: Some(7),
                master_seed: Some(3),
                full_scale: true,
                ..Overrides::default()
            },
        )
        .unwrap();
        assert_eq!(spec.k_range, vec![10, 20, 30]);
        assert_eq!((spec.trials, spec.master_seed), (7, 3));
        let full = ExperimentSpec::from_toml(text, &Overrides { full_scale: true, ..Overrides::default() }).unwrap();
        assert_eq!(full.trials, FULL_TRIALS);
    }

    #[test]
    fn invalid_dimensions_rejected() {
        assert!(validate_spec("protocol = \"gaussian_sweep\"\nm = 300\n").is_err());
        assert!(validate_spec("protocol = \"gaussian_sweep\"\nk_range = [0]\n").is_err());
        assert!(validate_spec("protocol = \"gaussian_sweep\"\nk_range = [129]\n").is_err());
        assert!(validate_spec("protocol = \"noisy_srer\"\nk_range = [5, 6]\n").is_err());
        assert!(validate_spec("protocol = \"noisy_srer\"\n[noise]\nsampling_rates = [1.5]\n").is_err());
        assert!(validate_spec("protocol = \"gaussian_sweep\"\n[noise]\nsmnr_db = 3.0\n").is_err());
        assert!(validate_spec("protocol = \"gaussian_sweep\"\nalgorithms = [\"omp\", \"omp\"]\n").is_err());
        assert!(validate_spec("protocol = \"gaussian_sweep\"\nalgorithms = [\"lasso\"]\n").is_err());
    }

    #[test]
    fn parse_errors_carry_line() {
        let err = validate_spec("protocol = \"gaussian_sweep\"\nm = \n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }
}
