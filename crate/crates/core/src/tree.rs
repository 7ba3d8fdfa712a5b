//! Candidate enumeration shared by the multipath searches.
//!
//! A candidate path is identified by an integer `ℓ ≥ 1`. Its child choice at
//! each layer is read off the base-`L` digits of `ℓ − 1` (least significant
//! digit first), so candidate 1 is the purely greedy path and consecutive
//! candidates differ first in the deepest-priority choices.

use crate::error::Result;
use crate::linalg::{correlation_scores, top_l_indices, Projection};

/// One-based child rank taken at each of `depth` layers by candidate `candidate` (≥ 1).
pub fn layer_orders(candidate: usize, l: usize, depth: usize) -> Vec<usize> {
    debug_assert!(candidate >= 1 && l >= 1);
    let mut temp = candidate - 1;
    let mut orders = Vec::with_capacity(depth);
    for _ in 0..depth {
        orders.push(temp % l + 1);
        temp /= l;
    }
    orders
}

/// `min(cap, l^depth)` without overflow.
pub fn candidate_count(cap: usize, l: usize, depth: usize) -> usize {
    let mut total = 1usize;
    for _ in 0..depth {
        total = total.saturating_mul(l);
        if total >= cap {
            return cap;
        }
    }
    total.min(cap)
}

/// A grown candidate path.
#[derive(Debug, Clone)]
pub struct HopeTreePath<'a> {
    pub projection: Projection<'a>,
    /// Indices appended below the root, in layer order.
    pub added: Vec<usize>,
    pub layer_orders: Vec<usize>,
    /// Residual norm after each executed layer.
    pub layer_norms: Vec<f64>,
}

impl HopeTreePath<'_> {
    pub fn residual_norm(&self) -> f64 {
        self.projection.residual_norm()
    }
}

/// Grows `root` one index per layer: at layer `k` the `orders[k]`-th strongest
/// correlation among columns not already on the path is appended and least
/// squares is re-solved. Growth stops early once the residual norm drops to
/// `stop` or the support fills the measurement dimension.
pub fn grow_path<'a>(root: &Projection<'a>, orders: &[usize], l: usize, stop: f64) -> Result<HopeTreePath<'a>> {
    let mut proj = root.clone();
    let phi = proj.matrix();
    let (m, n) = (phi.rows(), phi.cols());
    let mut added = Vec::with_capacity(orders.len());
    let mut layer_norms = Vec::with_capacity(orders.len());
    for &order in orders {
        if proj.residual_norm() <= stop || proj.support().len() >= m {
            break;
        }
        let available = n - proj.support().len();
        let width = l.min(available);
        let scores = correlation_scores(phi, proj.residual())?;
        let picks = top_l_indices(&scores, width, proj.support())?;
        let j = picks[(order - 1).min(width - 1)];
        proj.push(j)?;
        added.push(j);
        layer_norms.push(proj.residual_norm());
    }
    Ok(HopeTreePath {
        projection: proj,
        added,
        layer_orders: orders.to_vec(),
        layer_norms,
    })
}
