//! CSV, metadata and plot-data writers.
//!
//! Everything written here is a pure function of the spec and the trial
//! outcomes, except the wall-time columns.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{AggregateRow, ExperimentOutput, ExperimentSpec, Protocol, TrialRecord};
use crate::error::{Error, Result};
use crate::instance::RNG_NAME;

pub const TRIAL_HEADER: &str = "algorithm,protocol,m,n,k,phi,trial,seed,exact,srer_db,wall_ms,candidates";
pub const SUMMARY_HEADER: &str =
    "algorithm,protocol,m,n,k,phi,trials,failures,exact_freq,srer_db,mean_wall_ms,median_wall_ms,mean_candidates";

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

fn trial_line(r: &TrialRecord) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{:.4},{}",
        r.algorithm,
        r.protocol.name(),
        r.point.m,
        r.n,
        r.point.k,
        r.point.phi.map(|p| p.to_string()).unwrap_or_default(),
        r.trial,
        r.seed,
        u8::from(r.exact),
        opt(r.srer_db),
        r.wall_time.as_secs_f64() * 1e3,
        r.candidates_examined,
    )
}

fn summary_line(r: &AggregateRow) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{:.6},{},{:.4},{:.4},{:.3}",
        r.algorithm,
        r.protocol.name(),
        r.point.m,
        r.n,
        r.point.k,
        r.point.phi.map(|p| p.to_string()).unwrap_or_default(),
        r.trials,
        r.failures,
        r.exact_frequency,
        opt(r.srer_db),
        r.mean_wall_ms,
        r.median_wall_ms,
        r.mean_candidates,
    )
}

pub fn trials_csv(records: &[TrialRecord]) -> String {
    let mut out = String::from(TRIAL_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&trial_line(r));
        out.push('\n');
    }
    out
}

pub fn summary_csv(rows: &[AggregateRow]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&summary_line(r));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct Metadata<'a> {
    rng: &'a str,
    seed_derivation: &'a str,
    notes: Vec<&'a str>,
    spec: &'a ExperimentSpec,
}

pub fn metadata_toml(spec: &ExperimentSpec) -> Result<String> {
    let meta = Metadata {
        rng: RNG_NAME,
        seed_derivation: "trial = master ^ splitmix64((point << 32) ^ slot); streams 0/1/2 = matrix/signal/noise",
        notes: vec![
            "MMP-DFS and MMP-BFS share pursuit.mmp_max_candidates as their candidate budget",
            "GSRA depth, path count and candidate cap are clamped per sweep point to N < min(K, sqrt(m)), L <= K",
            "wall_ms covers the solve call only; instance generation is excluded",
        ],
        spec,
    };
    toml::to_string(&meta).map_err(|e| Error::Io(format!("metadata: {e}")))
}

/// One `(x, y)` series for a plot.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSeries {
    pub metric: &'static str,
    pub algorithm: String,
    pub points: Vec<(f64, f64)>,
}

impl PlotSeries {
    pub fn file_name(&self) -> String {
        format!("{}__{}.dat", self.metric, self.algorithm)
    }

    pub fn render(&self) -> String {
        let x_label = if self.metric == "srer" { "phi" } else { "k" };
        let mut out = format!("# {x_label} {}\n", self.metric);
        for (x, y) in &self.points {
            let _ = writeln!(out, "{x} {y:.6}");
        }
        out
    }

    /// Inverse of [`PlotSeries::render`] for the data rows.
    pub fn parse_points(text: &str) -> Result<Vec<(f64, f64)>> {
        text.lines()
            .enumerate()
            .filter(|(_, l)| !l.starts_with('#') && !l.trim().is_empty())
            .map(|(i, l)| {
                let bad = |message: &str| Error::Parse {
                    line: i + 1,
                    message: message.to_string(),
                };
                let mut it = l.split_whitespace();
                let x = it.next().ok_or_else(|| bad("missing x"))?.parse().map_err(|_| bad("bad x"))?;
                let y = it.next().ok_or_else(|| bad("missing y"))?.parse().map_err(|_| bad("bad y"))?;
                Ok((x, y))
            })
            .collect()
    }
}

/// Plot series for every algorithm of the roster: exact-recovery frequency
/// against K for the sweeps, SRER against sampling rate for the noisy run.
pub fn plot_series(spec: &ExperimentSpec, summary: &[AggregateRow]) -> Vec<PlotSeries> {
    let metric = match spec.protocol {
        Protocol::NoisySrer => "srer",
        _ => "exact_recovery",
    };
    spec.algorithms
        .iter()
        .map(|&alg| PlotSeries {
            metric,
            algorithm: alg.to_string(),
            points: summary
                .iter()
                .filter(|r| r.algorithm == alg)
                .map(|r| match r.point.phi {
                    Some(phi) => (phi, r.srer_db.unwrap_or(f64::NAN)),
                    None => (r.point.k as f64, r.exact_frequency),
                })
                .collect(),
        })
        .collect()
}

/// Writes `plots/<metric>__<algorithm>.dat` under `dir`.
pub fn emit_plot_data(dir: &Path, spec: &ExperimentSpec, summary: &[AggregateRow]) -> Result<Vec<PathBuf>> {
    let plots = dir.join("plots");
    fs::create_dir_all(&plots)?;
    plot_series(spec, summary)
        .into_iter()
        .map(|s| {
            let path = plots.join(s.file_name());
            fs::write(&path, s.render())?;
            Ok(path)
        })
        .collect()
}

/// Writes `trials.csv`, `summary.csv`, `metadata.toml` and the plot data.
pub fn write_outputs(dir: &Path, out: &ExperimentOutput) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (name, body) in [
        ("trials.csv", trials_csv(&out.records)),
        ("summary.csv", summary_csv(&out.summary)),
        ("metadata.toml", metadata_toml(&out.spec)?),
    ] {
        let path = dir.join(name);
        fs::write(&path, body)?;
        written.push(path);
    }
    written.extend(emit_plot_data(dir, &out.spec, &out.summary)?);
    Ok(written)
}
