//! Reference greedy pursuits: OMP, SP, gOMP and MMP (depth- and breadth-first).

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{correlation_scores, norm2, top_l_indices, Projection, SensingMatrix, SupportSet};
use crate::tree::{candidate_count, grow_path, layer_orders};

/// Default early-exit tolerance, relative to `‖y‖₂`.
pub const DEFAULT_RESIDUAL_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PursuitConfig {
    pub sparsity_k: usize,
    /// Indices appended per gOMP iteration.
    pub gomp_indices_per_iter: usize,
    /// Children per MMP node.
    pub mmp_expansion_l: usize,
    /// Leaf budget for MMP.
    pub mmp_max_candidates: usize,
    /// Stop once `‖r‖₂ ≤ residual_tolerance · ‖y‖₂`.
    pub residual_tolerance: f64,
}

impl Default for PursuitConfig {
    fn default() -> Self {
        Self {
            sparsity_k: 1,
            gomp_indices_per_iter: 3,
            mmp_expansion_l: 2,
            mmp_max_candidates: 30,
            residual_tolerance: DEFAULT_RESIDUAL_TOLERANCE,
        }
    }
}

impl PursuitConfig {
    pub fn new(sparsity_k: usize) -> Self {
        Self {
            sparsity_k,
            ..Self::default()
        }
    }

    pub fn validate(&self, phi: &SensingMatrix) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.sparsity_k == 0 || self.sparsity_k > phi.rows() {
            return bad(format!(
                "sparsity {} must lie in [1, m = {}]",
                self.sparsity_k,
                phi.rows()
            ));
        }
        if self.gomp_indices_per_iter == 0 {
            return bad("gomp_indices_per_iter must be at least 1".into());
        }
        if self.mmp_expansion_l == 0 {
            return bad("mmp_expansion_l must be at least 1".into());
        }
        if self.mmp_max_candidates == 0 {
            return bad("mmp_max_candidates must be at least 1".into());
        }
        if !(self.residual_tolerance >= 0.0 && self.residual_tolerance.is_finite()) {
            return bad(format!("residual_tolerance {} must be finite and >= 0", self.residual_tolerance));
        }
        Ok(())
    }

    fn stop_threshold(&self, y: &[f64]) -> f64 {
        self.residual_tolerance * norm2(y)
    }
}

/// Output of every recovery algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub x_hat: Vec<f64>,
    pub support: SupportSet,
    pub residual_norm: f64,
    pub iterations: usize,
    pub candidates_examined: usize,
}

impl RecoveryResult {
    pub fn from_projection(p: &Projection<'_>, iterations: usize, candidates_examined: usize) -> Self {
        Self {
            x_hat: p.estimate(),
            support: p.support().clone(),
            residual_norm: p.residual_norm(),
            iterations,
            candidates_examined,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchStrategy {
    DepthFirst,
    BreadthFirst,
}

/// Orthogonal matching pursuit: one strongest-correlation index per iteration.
pub fn omp(phi: &SensingMatrix, y: &[f64], cfg: &PursuitConfig) -> Result<RecoveryResult> {
    cfg.validate(phi)?;
    let stop = cfg.stop_threshold(y);
    let mut proj = Projection::new(phi, y)?;
    let mut iterations = 0;
    while proj.support().len() < cfg.sparsity_k && proj.residual_norm() > stop {
        let scores = correlation_scores(phi, proj.residual())?;
        let j = top_l_indices(&scores, 1, proj.support())?[0];
        proj.push(j)?;
        iterations += 1;
    }
    Ok(RecoveryResult::from_projection(&proj, iterations, 1))
}

/// Generalized OMP: `gomp_indices_per_iter` indices per iteration, up to
/// `min(K · indices_per_iter, m)` in total.
pub fn gomp(phi: &SensingMatrix, y: &[f64], cfg: &PursuitConfig) -> Result<RecoveryResult> {
    cfg.validate(phi)?;
    let stop = cfg.stop_threshold(y);
    let per_iter = cfg.gomp_indices_per_iter;
    let capacity = cfg.sparsity_k.saturating_mul(per_iter).min(phi.rows());
    let mut proj = Projection::new(phi, y)?;
    let mut iterations = 0;
    while iterations < cfg.sparsity_k && proj.support().len() < capacity && proj.residual_norm() > stop {
        let scores = correlation_scores(phi, proj.residual())?;
        let width = per_iter.min(capacity - proj.support().len());
        for j in top_l_indices(&scores, width, proj.support())? {
            proj.push(j)?;
        }
        iterations += 1;
    }
    Ok(RecoveryResult::from_projection(&proj, iterations, 1))
}

/// The `k` support entries with largest `|coefficient|`, ties to the smaller column index.
pub(crate) fn largest_coefficients(support: &SupportSet, coeffs: &[f64], k: usize) -> SupportSet {
    let mut pairs: Vec<(usize, f64)> = support.iter().copied().zip(coeffs.iter().map(|c| c.abs())).collect();
    pairs.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    pairs.into_iter().take(k).map(|(j, _)| j).collect()
}

/// Extends `proj` with each of `indices`, skipping columns that would make the
/// submatrix rank deficient.
pub(crate) fn extend_skipping_degenerate(proj: &mut Projection<'_>, indices: &[usize]) -> Result<()> {
    for &j in indices {
        if proj.support().len() >= proj.matrix().rows() {
            break;
        }
        match proj.push(j) {
            Ok(()) | Err(Error::RankDeficient { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

/// Subspace pursuit: expand the K-support by K fresh indices, solve on the
/// union, prune back to K, re-solve; stop when the residual stops decreasing
/// or after K iterations.
pub fn sp(phi: &SensingMatrix, y: &[f64], cfg: &PursuitConfig) -> Result<RecoveryResult> {
    cfg.validate(phi)?;
    let k = cfg.sparsity_k;
    let stop = cfg.stop_threshold(y);
    let m = phi.rows();
    let mut best = Projection::new(phi, y)?;
    if best.residual_norm() <= stop {
        return Ok(RecoveryResult::from_projection(&best, 0, 1));
    }
    let scores = correlation_scores(phi, y)?;
    let init = top_l_indices(&scores, k, &SupportSet::new())?;
    extend_skipping_degenerate(&mut best, &init)?;
    let mut iterations = 0;
    while iterations < k && best.residual_norm() > stop {
        iterations += 1;
        let scores = correlation_scores(phi, best.residual())?;
        let width = k.min(m - best.support().len());
        let fresh = top_l_indices(&scores, width, best.support())?;
        let mut ext = best.clone();
        extend_skipping_degenerate(&mut ext, &fresh)?;
        let pruned = largest_coefficients(ext.support(), &ext.coefficients(), k);
        let mut next = Projection::new(phi, y)?;
        extend_skipping_degenerate(&mut next, pruned.as_slice())?;
        if next.residual_norm() >= best.residual_norm() {
            break;
        }
        best = next;
    }
    Ok(RecoveryResult::from_projection(&best, iterations, 1))
}

/// Multipath matching pursuit over a tree of depth K with `mmp_expansion_l`
/// children per node. Returns the minimum-residual leaf examined.
pub fn mmp(phi: &SensingMatrix, y: &[f64], cfg: &PursuitConfig, strategy: SearchStrategy) -> Result<RecoveryResult> {
    cfg.validate(phi)?;
    match strategy {
        SearchStrategy::DepthFirst => mmp_dfs(phi, y, cfg),
        SearchStrategy::BreadthFirst => mmp_bfs(phi, y, cfg),
    }
}

fn mmp_dfs(phi: &SensingMatrix, y: &[f64], cfg: &PursuitConfig) -> Result<RecoveryResult> {
    let stop = cfg.stop_threshold(y);
    let (l, depth) = (cfg.mmp_expansion_l, cfg.sparsity_k);
    let root = Projection::new(phi, y)?;
    let budget = candidate_count(cfg.mmp_max_candidates, l, depth);
    let mut best: Option<Projection<'_>> = None;
    let mut examined = 0;
    for candidate in 1..=budget {
        examined += 1;
        let path = match grow_path(&root, &layer_orders(candidate, l, depth), l, stop) {
            Ok(p) => p,
            Err(Error::RankDeficient { .. }) => continue,
            Err(e) => return Err(e),
        };
        let rho = path.residual_norm();
        if best.as_ref().is_none_or(|b| rho < b.residual_norm()) {
            best = Some(path.projection);
        }
        if rho <= stop {
            break;
        }
    }
    let best = best.ok_or(Error::AllPathsDegenerate)?;
    Ok(RecoveryResult::from_projection(&best, depth, examined))
}

fn mmp_bfs(phi: &SensingMatrix, y: &[f64], cfg: &PursuitConfig) -> Result<RecoveryResult> {
    let stop = cfg.stop_threshold(y);
    let (l, cap) = (cfg.mmp_expansion_l, cfg.mmp_max_candidates);
    let mut frontier = vec![Projection::new(phi, y)?];
    let mut levels = 0;
    for _ in 0..cfg.sparsity_k {
        if let Some(done) = frontier.iter().find(|p| p.residual_norm() <= stop) {
            return Ok(RecoveryResult::from_projection(done, levels, frontier.len()));
        }
        levels += 1;
        let mut seen = HashSet::new();
        let mut children = Vec::with_capacity(frontier.len() * l);
        for node in &frontier {
            if node.support().len() >= phi.rows() {
                continue;
            }
            let scores = correlation_scores(phi, node.residual())?;
            let width = l.min(phi.cols() - node.support().len());
            for j in top_l_indices(&scores, width, node.support())? {
                let mut key = node.support().sorted();
                key.push(j);
                key.sort_unstable();
                if !seen.insert(key) {
                    continue;
                }
                let mut child = node.clone();
                match child.push(j) {
                    Ok(()) => children.push(child),
                    Err(Error::RankDeficient { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
        }
        if children.is_empty() {
            break;
        }
        if children.len() > cap {
            let mut keyed: Vec<(f64, Vec<usize>, Projection<'_>)> =
                children.into_iter().map(|c| (c.residual_norm(), c.support().sorted(), c)).collect();
            keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
            keyed.truncate(cap);
            children = keyed.into_iter().map(|(_, _, c)| c).collect();
        }
        frontier = children;
    }
    let leaves = frontier.len();
    let best = frontier
        .into_iter()
        .min_by(|a, b| a.residual_norm().total_cmp(&b.residual_norm()))
        .ok_or(Error::AllPathsDegenerate)?;
    Ok(RecoveryResult::from_projection(&best, levels, leaves))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{gen_sensing_matrix, gen_sparse_signal, SignalKind, SignalModel};

    fn planted(m: usize, n: usize, k: usize, seed: u64) -> (SensingMatrix, Vec<f64>, SupportSet) {
        let phi = gen_sensing_matrix(m, n, false, seed).unwrap();
        let x = gen_sparse_signal(SignalModel::new(SignalKind::GaussianNonzeros, n, k).unwrap(), seed + 1).unwrap();
        let y = phi.mul_vec(&x.values).unwrap();
        (phi, y, x.support)
    }

    #[test]
    fn single_atom() {
        let phi = gen_sensing_matrix(16, 32, false, 3).unwrap();
        let y: Vec<f64> = phi.column(5).iter().map(|v| 3.0 * v).collect();
        for res in [
            omp(&phi, &y, &PursuitConfig::new(1)).unwrap(),
            gomp(&phi, &y, &PursuitConfig::new(1)).unwrap(),
            sp(&phi, &y, &PursuitConfig::new(1)).unwrap(),
        ] {
            assert!(res.support.contains(5));
            assert!(res.residual_norm < 1e-10);
            assert!((res.x_hat[5] - 3.0).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_measurement() {
        let phi = gen_sensing_matrix(8, 16, false, 1).unwrap();
        let y = vec![0.0; 8];
        let cfg = PursuitConfig::new(2);
        for res in [
            omp(&phi, &y, &cfg).unwrap(),
            sp(&phi, &y, &cfg).unwrap(),
            gomp(&phi, &y, &cfg).unwrap(),
            mmp(&phi, &y, &cfg, SearchStrategy::DepthFirst).unwrap(),
            mmp(&phi, &y, &cfg, SearchStrategy::BreadthFirst).unwrap(),
        ] {
            assert!(res.support.is_empty());
            assert!(res.x_hat.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn sp_exact_two_sparse() {
        let (phi, y, s) = planted(32, 64, 2, 40);
        let res = sp(&phi, &y, &PursuitConfig::new(2)).unwrap();
        assert!(res.support.same_set(&s));
        assert!(res.residual_norm < 1e-10);
    }

    #[test]
    fn sp_boundary_half_m_terminates() {
        let (phi, y, _) = planted(16, 40, 8, 12);
        let res = sp(&phi, &y, &PursuitConfig::new(8)).unwrap();
        assert!(res.iterations <= 8);
        assert!(res.support.len() <= 8);
    }

    #[test]
    fn gomp_with_one_index_is_omp() {
        for seed in 0..10 {
            let (phi, y, _) = planted(24, 48, 5, 100 + seed);
            let cfg = PursuitConfig {
                gomp_indices_per_iter: 1,
                ..PursuitConfig::new(5)
            };
            assert_eq!(gomp(&phi, &y, &cfg).unwrap(), omp(&phi, &y, &cfg).unwrap());
        }
    }

    #[test]
    fn gomp_four_sparse_three_per_iteration() {
        let (phi, y, s) = planted(32, 64, 4, 7);
        let res = gomp(&phi, &y, &PursuitConfig::new(4)).unwrap();
        assert!(s.iter().all(|&j| res.support.contains(j)));
        assert!(res.residual_norm < 1e-10 * norm2(&y));
        for (j, v) in res.x_hat.iter().enumerate() {
            if !s.contains(j) {
                assert!(v.abs() < 1e-9);
            }
        }
    }

    #[test]
    fn mmp_with_single_child_is_omp() {
        for seed in 0..10 {
            let (phi, y, _) = planted(24, 48, 6, 300 + seed);
            let cfg = PursuitConfig {
                mmp_expansion_l: 1,
                ..PursuitConfig::new(6)
            };
            let base = omp(&phi, &y, &cfg).unwrap();
            for strategy in [SearchStrategy::DepthFirst, SearchStrategy::BreadthFirst] {
                let res = mmp(&phi, &y, &cfg, strategy).unwrap();
                assert_eq!(res.support, base.support);
                assert_eq!(res.x_hat, base.x_hat);
            }
        }
    }

    #[test]
    fn mmp_respects_candidate_budget() {
        for seed in 0..5 {
            let (phi, y, _) = planted(20, 40, 8, 500 + seed);
            for cap in [1, 4, 9] {
                let cfg = PursuitConfig {
                    mmp_max_candidates: cap,
                    ..PursuitConfig::new(8)
                };
                for strategy in [SearchStrategy::DepthFirst, SearchStrategy::BreadthFirst] {
                    assert!(mmp(&phi, &y, &cfg, strategy).unwrap().candidates_examined <= cap);
                }
            }
        }
    }

    #[test]
    fn exhaustive_mmp_strategies_agree() {
        for seed in 0..8 {
            let (phi, y, _) = planted(10, 20, 3, 700 + seed);
            let noisy: Vec<f64> = y.iter().enumerate().map(|(i, v)| v + 0.05 * ((i * 7 + seed as usize) as f64).sin()).collect();
            let cfg = PursuitConfig {
                mmp_max_candidates: 1000,
                residual_tolerance: 0.0,
                ..PursuitConfig::new(3)
            };
            let dfs = mmp(&phi, &noisy, &cfg, SearchStrategy::DepthFirst).unwrap();
            let bfs = mmp(&phi, &noisy, &cfg, SearchStrategy::BreadthFirst).unwrap();
            assert!((dfs.residual_norm - bfs.residual_norm).abs() <= 1e-12 * norm2(&noisy));
        }
    }

    #[test]
    fn invalid_configs_rejected() {
        let phi = gen_sensing_matrix(8, 16, false, 1).unwrap();
        let y = vec![1.0; 8];
        assert!(omp(&phi, &y, &PursuitConfig::new(0)).is_err());
        assert!(omp(&phi, &y, &PursuitConfig::new(9)).is_err());
        let cfg = PursuitConfig {
            gomp_indices_per_iter: 0,
            ..PursuitConfig::new(2)
        };
        assert!(gomp(&phi, &y, &cfg).is_err());
        assert!(omp(&phi, &[1.0; 7], &PursuitConfig::new(2)).is_err());
    }
}
