//! Greedy sparse recovery with pre-selection, hope-tree search and
//! decreasing-subspace rectification.
//!
//! The driver starts from the intersection of the OMP and SP supports, then
//! repeatedly grows the support with the best path of a bounded hope-tree
//! until it holds at least `K` indices. A final SP-style expand/prune loop,
//! whose expansion width shrinks geometrically, repairs indices the tree
//! missed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_len, correlation_scores, norm2, top_l_indices, Projection, SensingMatrix, SupportSet};
use crate::pursuit::{
    extend_skipping_degenerate, largest_coefficients, omp, sp, PursuitConfig, RecoveryResult,
    DEFAULT_RESIDUAL_TOLERANCE,
};
use crate::tree::{candidate_count, grow_path, layer_orders};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GsraConfig {
    /// Target sparsity K.
    pub sparsity_k: usize,
    /// Children per hope-tree node (L ≤ K).
    pub path_l: usize,
    /// Hope-tree depth per driver iteration.
    pub search_depth: usize,
    /// Candidate paths examined per hope-tree.
    pub max_candidates: usize,
    /// Early exit once `‖r‖₂ ≤ stop_tolerance · ‖y‖₂`.
    pub stop_tolerance: f64,
    /// Shrink factor of the rectification width, in (0, 1).
    pub alpha: f64,
    /// Driver iteration cap; `None` means K.
    pub max_driver_iterations: Option<usize>,
    /// Permit depths up to K instead of the noiseless bound.
    pub allow_deep_search: bool,
}

impl Default for GsraConfig {
    fn default() -> Self {
        Self {
            sparsity_k: 1,
            path_l: 2,
            search_depth: 7,
            max_candidates: 30,
            stop_tolerance: DEFAULT_RESIDUAL_TOLERANCE,
            alpha: 0.5,
            max_driver_iterations: None,
            allow_deep_search: false,
        }
    }
}

/// Largest integer `N` with `N < min(k, √m)`, and at least 1.
pub fn depth_bound(m: usize, k: usize) -> usize {
    let bound = (k as f64).min((m as f64).sqrt());
    (bound.ceil() as usize).saturating_sub(1).max(1)
}

impl GsraConfig {
    pub fn new(sparsity_k: usize) -> Self {
        Self {
            sparsity_k,
            ..Self::default()
        }
    }

    pub fn driver_iterations(&self) -> usize {
        self.max_driver_iterations.unwrap_or(self.sparsity_k)
    }

    fn depth_limit(&self, m: usize) -> usize {
        if self.allow_deep_search {
            self.sparsity_k
        } else {
            depth_bound(m, self.sparsity_k)
        }
    }

    /// Copy of `self` for sparsity `k` on `m` measurements with `L`, `N` and
    /// `N_max` clamped into their valid ranges.
    pub fn fitted(&self, m: usize, k: usize) -> Self {
        let mut cfg = Self {
            sparsity_k: k,
            ..self.clone()
        };
        cfg.path_l = cfg.path_l.clamp(1, k.max(1));
        cfg.search_depth = cfg.search_depth.clamp(1, cfg.depth_limit(m).max(1));
        cfg.max_candidates = candidate_count(cfg.max_candidates.max(1), cfg.path_l, cfg.search_depth);
        cfg
    }

    pub fn validate(&self, phi: &SensingMatrix) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        let m = phi.rows();
        let k = self.sparsity_k;
        if k == 0 || k > m {
            return bad(format!("sparsity K = {k} must lie in [1, m = {m}]"));
        }
        if self.path_l == 0 || self.path_l > k {
            return bad(format!("path count L = {} must satisfy 1 <= L <= K = {k}", self.path_l));
        }
        let limit = self.depth_limit(m);
        if self.search_depth == 0 || self.search_depth > limit {
            return bad(format!(
                "search depth N = {} exceeds its limit {limit} (N < min(K, sqrt(m)){})",
                self.search_depth,
                if self.allow_deep_search { ", deep search allows N <= K" } else { "" }
            ));
        }
        if self.max_candidates == 0
            || self.max_candidates > candidate_count(usize::MAX, self.path_l, self.search_depth)
        {
            return bad(format!(
                "max_candidates = {} must lie in [1, L^N]",
                self.max_candidates
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha = {} must lie in (0, 1)", self.alpha));
        }
        if !(self.stop_tolerance >= 0.0 && self.stop_tolerance.is_finite()) {
            return bad(format!("stop_tolerance = {} must be finite and >= 0", self.stop_tolerance));
        }
        if self.driver_iterations() == 0 {
            return bad("max_driver_iterations must be at least 1".into());
        }
        Ok(())
    }

    fn pursuit_config(&self) -> PursuitConfig {
        PursuitConfig {
            residual_tolerance: self.stop_tolerance,
            ..PursuitConfig::new(self.sparsity_k)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preselection {
    pub support: SupportSet,
    /// Set when SP failed and the intersection degraded to the empty set.
    pub sp_failure: Option<Error>,
}

/// Intersection of the OMP and SP supports at sparsity K.
pub fn preselect(phi: &SensingMatrix, y: &[f64], cfg: &GsraConfig) -> Result<Preselection> {
    let pcfg = cfg.pursuit_config();
    let omp_support = omp(phi, y, &pcfg)?.support;
    match sp(phi, y, &pcfg) {
        Ok(res) => Ok(Preselection {
            support: omp_support.intersection(&res.support),
            sp_failure: None,
        }),
        Err(e @ Error::RankDeficient { .. }) => Ok(Preselection {
            support: SupportSet::new(),
            sp_failure: Some(e),
        }),
        Err(e) => Err(e),
    }
}

/// Best path found by one hope-tree search.
#[derive(Debug, Clone)]
pub struct HopeTreeOutcome<'a> {
    /// Root support extended by the best path.
    pub best: Projection<'a>,
    /// Indices the best path added below the root.
    pub added: Vec<usize>,
    pub residual_norm: f64,
    pub candidates_examined: usize,
    /// One-based candidate number of the best path.
    pub best_candidate: usize,
}

/// Enumerates up to `min(N_max, L^N)` candidate paths of depth N below
/// `root`, decoding each candidate's per-layer child choice with the modulo
/// layer-order rule, and keeps the one with the smallest final residual
/// (earliest candidate on ties). Stops as soon as a path reaches the
/// threshold. Degenerate paths are discarded.
pub fn create_hope_tree<'a>(root: &Projection<'a>, cfg: &GsraConfig) -> Result<HopeTreeOutcome<'a>> {
    let stop = cfg.stop_tolerance * norm2(root.measurement());
    let (l, depth) = (cfg.path_l, cfg.search_depth);
    let budget = candidate_count(cfg.max_candidates, l, depth);
    let mut best: Option<(usize, crate::tree::HopeTreePath<'a>)> = None;
    let mut examined = 0;
    for candidate in 1..=budget {
        examined += 1;
        let path = match grow_path(root, &layer_orders(candidate, l, depth), l, stop) {
            Ok(p) => p,
            Err(Error::RankDeficient { .. }) => continue,
            Err(e) => return Err(e),
        };
        let rho = path.residual_norm();
        if best.as_ref().is_none_or(|(_, b)| rho < b.residual_norm()) {
            best = Some((candidate, path));
        }
        if rho <= stop {
            break;
        }
    }
    let (best_candidate, path) = best.ok_or(Error::AllPathsDegenerate)?;
    Ok(HopeTreeOutcome {
        residual_norm: path.residual_norm(),
        added: path.added,
        best: path.projection,
        candidates_examined: examined,
        best_candidate,
    })
}

#[derive(Debug, Clone)]
pub struct Rectified<'a> {
    pub projection: Projection<'a>,
    /// Width `T` used by each expand/prune round.
    pub widths: Vec<usize>,
}

/// Decreasing-subspace rectification. Starting from `lambda` with width
/// `T = K`, each round adds the `T` strongest correlations of the current
/// residual, solves on the extended support, keeps the K largest-magnitude
/// coefficients, re-solves on them and sets `T ← ⌊αT⌋`, until `T = 0`.
pub fn rectify_support<'a>(
    phi: &'a SensingMatrix,
    y: &'a [f64],
    lambda: &SupportSet,
    cfg: &GsraConfig,
) -> Result<Rectified<'a>> {
    let k = cfg.sparsity_k;
    let m = phi.rows();
    let mut pool = Projection::new(phi, y)?;
    extend_skipping_degenerate(&mut pool, lambda.as_slice())?;
    let mut current = pool.clone();
    let mut widths = Vec::new();
    let mut t = k;
    while t >= 1 {
        widths.push(t);
        if pool.support().len() + t <= m {
            let scores = correlation_scores(phi, current.residual())?;
            let fresh = top_l_indices(&scores, t, pool.support())?;
            extend_skipping_degenerate(&mut pool, &fresh)?;
        }
        let kept = largest_coefficients(pool.support(), &pool.coefficients(), k);
        current = Projection::new(phi, y)?;
        extend_skipping_degenerate(&mut current, kept.as_slice())?;
        t = (cfg.alpha * t as f64).floor() as usize;
    }
    Ok(Rectified {
        projection: current,
        widths,
    })
}

/// Full recovery: pre-selection, hope-tree driver, rectification.
pub fn gsra_recover(phi: &SensingMatrix, y: &[f64], cfg: &GsraConfig) -> Result<RecoveryResult> {
    cfg.validate(phi)?;
    check_len(phi.rows(), y.len())?;
    let k = cfg.sparsity_k;
    let stop = cfg.stop_tolerance * norm2(y);
    if norm2(y) == 0.0 {
        return Ok(RecoveryResult::from_projection(&Projection::new(phi, y)?, 0, 0));
    }
    let pre = preselect(phi, y, cfg)?;
    let mut lambda = Projection::new(phi, y)?;
    extend_skipping_degenerate(&mut lambda, pre.support.as_slice())?;

    let mut iteration = 0;
    let mut examined = 0;
    while lambda.support().len() < k && iteration < cfg.driver_iterations() && lambda.residual_norm() > stop {
        iteration += 1;
        match create_hope_tree(&lambda, cfg) {
            Ok(outcome) if !outcome.added.is_empty() => {
                examined += outcome.candidates_examined;
                lambda = outcome.best;
            }
            Ok(_) | Err(Error::AllPathsDegenerate) => {
                restart_from_next_best(&mut lambda, iteration)?;
            }
            Err(e) => return Err(e),
        }
    }

    let rectified = rectify_support(phi, y, lambda.support(), cfg)?;
    Ok(RecoveryResult::from_projection(&rectified.projection, iteration, examined))
}

/// Appends the strongest admissible correlation index when a tree adds nothing.
fn restart_from_next_best(lambda: &mut Projection<'_>, iteration: usize) -> Result<()> {
    let phi = lambda.matrix();
    let available = phi.cols() - lambda.support().len();
    if lambda.support().len() < phi.rows() {
        let scores = correlation_scores(phi, lambda.residual())?;
        for j in top_l_indices(&scores, available, lambda.support())? {
            match lambda.push(j) {
                Ok(()) => return Ok(()),
                Err(Error::RankDeficient { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
    }
    Err(Error::DriverStalled { iteration })
}
