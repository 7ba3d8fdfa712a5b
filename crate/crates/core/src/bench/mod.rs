//! Monte-Carlo benchmark harness.
//!
//! Each trial draws a fresh instance from a seed derived from the master
//! seed, the sweep point and the trial index, then runs every algorithm of
//! the roster on that same instance. Only the solve call is timed.

pub mod output;
pub mod spec;

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gsra::{gsra_recover, GsraConfig};
use crate::instance::{
    gen_noise_for_smnr, gen_sensing_matrix, gen_sparse_signal, stream_seed, trial_seed, SignalKind, SignalModel,
    SparseSignal,
};
use crate::linalg::SensingMatrix;
use crate::metrics::{exact_match, SrerMean};
use crate::oracle::l0_solve;
use crate::pursuit::{gomp, mmp, omp, sp, PursuitConfig, RecoveryResult, SearchStrategy};

pub use output::{emit_plot_data, plot_series, write_outputs, PlotSeries, SUMMARY_HEADER, TRIAL_HEADER};
pub use spec::{validate_spec, Algorithm, ExperimentSpec, OracleSpec, Overrides, Protocol};

const MATRIX_STREAM: u64 = 0;
const SIGNAL_STREAM: u64 = 1;
const NOISE_STREAM: u64 = 2;

/// One generated problem: `y = Φx + w`.
#[derive(Debug, Clone)]
pub struct Instance {
    pub phi: SensingMatrix,
    pub x: SparseSignal,
    pub noise: Option<Vec<f64>>,
    pub y: Vec<f64>,
}

/// One sweep point of an experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub m: usize,
    pub k: usize,
    /// Sampling rate, noisy protocol only.
    pub phi: Option<f64>,
}

impl SweepPoint {
    fn seed_key(&self) -> u64 {
        match self.phi {
            Some(_) => self.m as u64,
            None => self.k as u64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub algorithm: Algorithm,
    pub protocol: Protocol,
    pub point: SweepPoint,
    pub n: usize,
    pub trial: usize,
    /// Seed the instance was generated from (see [`ExperimentSpec::instance`]).
    pub seed: u64,
    pub exact: bool,
    pub srer_db: Option<f64>,
    pub wall_time: Duration,
    pub candidates_examined: usize,
    pub signal_energy: f64,
    pub error_energy: f64,
    /// Solver error, if the trial failed.
    pub failure: Option<String>,
}

/// Aggregate over the trials of one (algorithm, sweep point).
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub algorithm: Algorithm,
    pub protocol: Protocol,
    pub point: SweepPoint,
    pub n: usize,
    pub trials: usize,
    pub failures: usize,
    pub exact_frequency: f64,
    pub srer_db: Option<f64>,
    pub mean_wall_ms: f64,
    pub median_wall_ms: f64,
    pub mean_candidates: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub spec: ExperimentSpec,
    pub records: Vec<TrialRecord>,
    pub summary: Vec<AggregateRow>,
}

impl ExperimentOutput {
    pub fn row(&self, algorithm: Algorithm, matches: impl Fn(&SweepPoint) -> bool) -> Option<&AggregateRow> {
        self.summary.iter().find(|r| r.algorithm == algorithm && matches(&r.point))
    }

    /// Row for sparsity `k` in a sweep protocol.
    pub fn at_k(&self, algorithm: Algorithm, k: usize) -> Option<&AggregateRow> {
        self.row(algorithm, |p| p.k == k)
    }

    /// Row for sampling rate `rate` in the noisy protocol.
    pub fn at_rate(&self, algorithm: Algorithm, rate: f64) -> Option<&AggregateRow> {
        self.row(algorithm, |p| p.phi.is_some_and(|r| (r - rate).abs() < 1e-9))
    }
}

/// Runs `algorithm` with the per-point configurations.
pub fn solve(
    algorithm: Algorithm,
    phi: &SensingMatrix,
    y: &[f64],
    pursuit: &PursuitConfig,
    gsra: &GsraConfig,
) -> Result<RecoveryResult> {
    match algorithm {
        Algorithm::Omp => omp(phi, y, pursuit),
        Algorithm::Sp => sp(phi, y, pursuit),
        Algorithm::Gomp => gomp(phi, y, pursuit),
        Algorithm::MmpDfs => mmp(phi, y, pursuit, SearchStrategy::DepthFirst),
        Algorithm::MmpBfs => mmp(phi, y, pursuit, SearchStrategy::BreadthFirst),
        Algorithm::Gsra => gsra_recover(phi, y, gsra),
    }
}

impl ExperimentSpec {
    pub fn points(&self) -> Vec<SweepPoint> {
        match self.protocol {
            Protocol::NoisySrer => {
                let k = self.k_range[0];
                self.sampling_rates
                    .iter()
                    .map(|&r| SweepPoint {
                        m: self.measurements_for_rate(r),
                        k,
                        phi: Some(r),
                    })
                    .collect()
            }
            _ => self
                .k_range
                .iter()
                .map(|&k| SweepPoint { m: self.m, k, phi: None })
                .collect(),
        }
    }

    /// Seed recorded for `trial` at `point`. In the noisy protocol the
    /// matrix is shared by `signals_per_matrix` consecutive trials, so the
    /// seed identifies the matrix and the trial index selects the signal.
    pub fn trial_seed(&self, point: &SweepPoint, trial: usize) -> u64 {
        let slot = match self.protocol {
            Protocol::NoisySrer => trial / self.signals_per_matrix,
            _ => trial,
        };
        trial_seed(self.master_seed, point.seed_key(), slot as u64)
    }

    /// Regenerates the instance of `trial` at `point`.
    pub fn instance(&self, point: &SweepPoint, trial: usize) -> Result<Instance> {
        let seed = self.trial_seed(point, trial);
        let phi = gen_sensing_matrix(point.m, self.n, self.normalize_columns, stream_seed(seed, MATRIX_STREAM))?;
        let kind = match self.protocol {
            Protocol::ZeroOneSweep => SignalKind::ZeroOne,
            _ => SignalKind::GaussianNonzeros,
        };
        let model = SignalModel::new(kind, self.n, point.k)?;
        let (signal_seed, noise_seed) = match self.protocol {
            Protocol::NoisySrer => {
                let t = (trial % self.signals_per_matrix) as u64;
                (stream_seed(seed, SIGNAL_STREAM + 2 * t + 1), stream_seed(seed, NOISE_STREAM + 2 * t + 1))
            }
            _ => (stream_seed(seed, SIGNAL_STREAM), stream_seed(seed, NOISE_STREAM)),
        };
        let x = gen_sparse_signal(model, signal_seed)?;
        let mut y = phi.mul_vec(&x.values)?;
        let noise = if self.protocol == Protocol::NoisySrer {
            let w = gen_noise_for_smnr(&x, point.m, self.smnr_db, noise_seed)?;
            y.iter_mut().zip(&w).for_each(|(yi, wi)| *yi += wi);
            Some(w)
        } else {
            None
        };
        Ok(Instance { phi, x, noise, y })
    }
}

fn run_trial(spec: &ExperimentSpec, point: &SweepPoint, trial: usize) -> Result<Vec<TrialRecord>> {
    let inst = spec.instance(point, trial)?;
    let pursuit = spec.pursuit_for(point.k);
    let gsra = spec.gsra_for(point.m, point.k);
    let signal_energy: f64 = inst.x.energy();
    let noisy = spec.protocol == Protocol::NoisySrer;
    let seed = spec.trial_seed(point, trial);
    Ok(spec
        .algorithms
        .iter()
        .map(|&algorithm| {
            let start = Instant::now();
            let outcome = solve(algorithm, &inst.phi, &inst.y, &pursuit, &gsra);
            let wall_time = start.elapsed();
            let (x_hat, candidates, failure) = match outcome {
                Ok(res) => (res.x_hat, res.candidates_examined, None),
                Err(e) => (vec![0.0; spec.n], 0, Some(e.to_string())),
            };
            let error_energy: f64 = inst.x.values.iter().zip(&x_hat).map(|(a, b)| (a - b) * (a - b)).sum();
            TrialRecord {
                algorithm,
                protocol: spec.protocol,
                point: *point,
                n: spec.n,
                trial,
                seed,
                exact: failure.is_none() && exact_match(&inst.x.values, &x_hat, spec.exact_tolerance),
                srer_db: noisy.then(|| db_ratio(signal_energy, error_energy)),
                wall_time,
                candidates_examined: candidates,
                signal_energy,
                error_energy,
                failure,
            }
        })
        .collect())
}

fn db_ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (num / den).log10()
    }
}

/// Runs every (algorithm, sweep point, trial) of `spec`. Records come back in
/// deterministic (algorithm, sweep point, trial) order regardless of
/// scheduling.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    spec.validate()?;
    let points = spec.points();
    let jobs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| (0..spec.trials).map(move |t| (p, t)))
        .collect();
    let run = |&(p, t): &(usize, usize)| run_trial(spec, &points[p], t);
    let per_trial: Vec<Vec<TrialRecord>> = if spec.parallel {
        jobs.par_iter().map(run).collect::<Result<_>>()?
    } else {
        jobs.iter().map(run).collect::<Result<_>>()?
    };

    let mut records = Vec::with_capacity(per_trial.len() * spec.algorithms.len());
    for (a, _) in spec.algorithms.iter().enumerate() {
        for trial_records in &per_trial {
            records.push(trial_records[a].clone());
        }
    }
    let summary = aggregate(spec, &points, &records);
    Ok(ExperimentOutput {
        spec: spec.clone(),
        records,
        summary,
    })
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

fn aggregate(spec: &ExperimentSpec, points: &[SweepPoint], records: &[TrialRecord]) -> Vec<AggregateRow> {
    if spec.trials == 0 {
        return Vec::new();
    }
    let mut rows = Vec::new();
    for &algorithm in &spec.algorithms {
        for point in points {
            let group: Vec<&TrialRecord> = records
                .iter()
                .filter(|r| r.algorithm == algorithm && r.point == *point)
                .collect();
            let count = group.len() as f64;
            let wall: Vec<f64> = group.iter().map(|r| r.wall_time.as_secs_f64() * 1e3).collect();
            let srer_db = (spec.protocol == Protocol::NoisySrer).then(|| match spec.srer_mean {
                SrerMean::Energy => db_ratio(
                    group.iter().map(|r| r.signal_energy).sum(),
                    group.iter().map(|r| r.error_energy).sum(),
                ),
                SrerMean::Db => group.iter().filter_map(|r| r.srer_db).sum::<f64>() / count,
            });
            rows.push(AggregateRow {
                algorithm,
                protocol: spec.protocol,
                point: *point,
                n: spec.n,
                trials: group.len(),
                failures: group.iter().filter(|r| r.failure.is_some()).count(),
                exact_frequency: group.iter().filter(|r| r.exact).count() as f64 / count,
                srer_db,
                mean_wall_ms: wall.iter().sum::<f64>() / count,
                median_wall_ms: median(wall),
                mean_candidates: group.iter().map(|r| r.candidates_examined as f64).sum::<f64>() / count,
            });
        }
    }
    rows
}

/// Agreement of GSRA and OMP with the exhaustive ℓ0 solution on small
/// noiseless instances.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub trials: usize,
    pub gsra_matches: usize,
    pub omp_matches: usize,
    pub min_agreement: f64,
}

impl OracleReport {
    pub fn gsra_rate(&self) -> f64 {
        self.gsra_matches as f64 / self.trials.max(1) as f64
    }

    pub fn omp_rate(&self) -> f64 {
        self.omp_matches as f64 / self.trials.max(1) as f64
    }

    pub fn passed(&self) -> bool {
        self.gsra_rate() >= self.min_agreement
    }
}

pub fn oracle_check(spec: &ExperimentSpec) -> Result<OracleReport> {
    let o = &spec.oracle;
    let outcomes: Vec<(bool, bool)> = (0..o.trials)
        .into_par_iter()
        .map(|t| {
            let seed = trial_seed(spec.master_seed, u64::MAX, t as u64);
            let phi = gen_sensing_matrix(o.m, o.n, false, stream_seed(seed, MATRIX_STREAM))?;
            let model = SignalModel::new(SignalKind::GaussianNonzeros, o.n, o.k)?;
            let x = gen_sparse_signal(model, stream_seed(seed, SIGNAL_STREAM))?;
            let y = phi.mul_vec(&x.values)?;
            let (truth, _) = l0_solve(&phi, &y, o.k, 1e-9)?;
            let g = gsra_recover(&phi, &y, &spec.gsra.fitted(o.m, o.k));
            let b = omp(&phi, &y, &spec.pursuit_for(o.k));
            let agrees = |r: Result<RecoveryResult>| r.is_ok_and(|r| r.support.same_set(&truth));
            Ok::<_, Error>((agrees(g), agrees(b)))
        })
        .collect::<Result<_>>()?;
    Ok(OracleReport {
        trials: o.trials,
        gsra_matches: outcomes.iter().filter(|o| o.0).count(),
        omp_matches: outcomes.iter().filter(|o| o.1).count(),
        min_agreement: o.min_agreement,
    })
}
