//! Dense kernels shared by every pursuit: least squares on a column subset,
//! residuals and correlation scoring.
//!
//! Least squares is realized through an orthogonal factorization of the
//! selected columns. [`Projection`] keeps that factorization incrementally so
//! that growing a support by one column costs `O(m·|s|)` instead of a fresh
//! factorization; normal equations are never formed.

use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Relative threshold on the orthogonal component of a new column below which
/// the column submatrix is treated as rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Dense `m × n` real sensing matrix with `m < n`, stored column-major so that
/// each column is a contiguous slice.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    column_norms: Option<Vec<f64>>,
}

impl SensingMatrix {
    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        Self::check_shape(rows, cols, entries.len())?;
        let mut data = vec![0.0; rows * cols];
        for i in 0..rows {
            for j in 0..cols {
                data[j * rows + i] = entries[i * cols + j];
            }
        }
        Self::from_col_major(rows, cols, data)
    }

    /// Builds a matrix from column-major entries.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        Self::check_shape(rows, cols, data.len())?;
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidMatrix(format!(
                "non-finite entry at row {}, column {}",
                pos % rows,
                pos / rows
            )));
        }
        Ok(Self {
            rows,
            cols,
            data,
            column_norms: None,
        })
    }

    fn check_shape(rows: usize, cols: usize, len: usize) -> Result<()> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidMatrix("dimensions must be positive".into()));
        }
        if rows >= cols {
            return Err(Error::InvalidMatrix(format!(
                "sensing matrix must be underdetermined, got {rows}x{cols}"
            )));
        }
        if len != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: len,
            });
        }
        Ok(())
    }

    /// Scales every column to unit ℓ2 norm and caches the resulting norms.
    pub fn normalize_columns(mut self) -> Result<Self> {
        let rows = self.rows;
        let mut norms = Vec::with_capacity(self.cols);
        for (j, col) in self.data.chunks_exact_mut(rows).enumerate() {
            let norm = norm2(col);
            if norm == 0.0 {
                return Err(Error::InvalidMatrix(format!("column {j} is zero")));
            }
            col.iter_mut().for_each(|v| *v /= norm);
            norms.push(norm2(col));
        }
        self.column_norms = Some(norms);
        Ok(self)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    /// Cached column norms, present after [`SensingMatrix::normalize_columns`].
    pub fn column_norms(&self) -> Option<&[f64]> {
        self.column_norms.as_deref()
    }

    /// `Φ x` for a full-length signal.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.cols, x.len())?;
        let mut out = vec![0.0; self.rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                axpy(xj, self.column(j), &mut out);
            }
        }
        Ok(out)
    }

    /// `Φ_s c` for coefficients on a support.
    pub fn mul_support(&self, s: &SupportSet, coeffs: &[f64]) -> Result<Vec<f64>> {
        check_len(s.len(), coeffs.len())?;
        self.check_support(s)?;
        let mut out = vec![0.0; self.rows];
        for (&j, &c) in s.iter().zip(coeffs) {
            axpy(c, self.column(j), &mut out);
        }
        Ok(out)
    }

    fn check_support(&self, s: &SupportSet) -> Result<()> {
        match s.iter().find(|&&j| j >= self.cols) {
            Some(&index) => Err(Error::IndexOutOfRange {
                index,
                cols: self.cols,
            }),
            None => Ok(()),
        }
    }
}

/// Ordered set of distinct column indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct SupportSet(Vec<usize>);

impl SupportSet {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    /// Validates that `indices` are distinct and below `cols`.
    pub fn from_indices(indices: Vec<usize>, cols: usize) -> Result<Self> {
        let mut seen = vec![false; cols];
        for &j in &indices {
            if j >= cols {
                return Err(Error::IndexOutOfRange { index: j, cols });
            }
            if std::mem::replace(&mut seen[j], true) {
                return Err(Error::DuplicateIndex(j));
            }
        }
        Ok(Self(indices))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.0.contains(&j)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, usize> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Appends `j`; returns `false` and leaves the set untouched if already present.
    pub fn insert(&mut self, j: usize) -> bool {
        if self.contains(j) {
            false
        } else {
            self.0.push(j);
            true
        }
    }

    /// Indices in ascending order.
    pub fn sorted(&self) -> Vec<usize> {
        let mut v = self.0.clone();
        v.sort_unstable();
        v
    }

    /// Elements of `self` that are also in `other`, in `self`'s order.
    pub fn intersection(&self, other: &SupportSet) -> SupportSet {
        SupportSet(self.0.iter().copied().filter(|&j| other.contains(j)).collect())
    }

    /// Same elements regardless of order.
    pub fn same_set(&self, other: &SupportSet) -> bool {
        self.len() == other.len() && self.sorted() == other.sorted()
    }
}

impl FromIterator<usize> for SupportSet {
    /// Collects indices, silently dropping repeats.
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = SupportSet::new();
        for j in iter {
            s.insert(j);
        }
        s
    }
}

impl<'a> IntoIterator for &'a SupportSet {
    type Item = &'a usize;
    type IntoIter = std::slice::Iter<'a, usize>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Incrementally maintained orthogonal projection of `y` onto the span of a
/// growing set of columns.
///
/// Columns are orthogonalized with two passes of classical Gram-Schmidt, which
/// keeps `Q` orthonormal to working precision for the support sizes used here.
#[derive(Debug, Clone)]
pub struct Projection<'a> {
    phi: &'a SensingMatrix,
    y: &'a [f64],
    support: SupportSet,
    /// Orthonormal basis, column-major `m × k`.
    q: Vec<f64>,
    /// Upper-triangular factor, column `k` stored as `r[k][0..=k]`.
    r: Vec<Vec<f64>>,
    qty: Vec<f64>,
    residual: Vec<f64>,
    max_diag: f64,
}

impl<'a> Projection<'a> {
    /// Projection onto the empty support: the residual is `y` itself.
    pub fn new(phi: &'a SensingMatrix, y: &'a [f64]) -> Result<Self> {
        check_len(phi.rows(), y.len())?;
        Ok(Self {
            phi,
            y,
            support: SupportSet::new(),
            q: Vec::new(),
            r: Vec::new(),
            qty: Vec::new(),
            residual: y.to_vec(),
            max_diag: 0.0,
        })
    }

    pub fn with_support(phi: &'a SensingMatrix, y: &'a [f64], s: &SupportSet) -> Result<Self> {
        if s.len() > phi.rows() {
            return Err(Error::SupportTooLarge {
                size: s.len(),
                rows: phi.rows(),
            });
        }
        let mut proj = Self::new(phi, y)?;
        for &j in s {
            proj.push(j)?;
        }
        Ok(proj)
    }

    /// Adds column `j` to the support. On error the projection is unchanged.
    pub fn push(&mut self, j: usize) -> Result<()> {
        let m = self.phi.rows();
        if j >= self.phi.cols() {
            return Err(Error::IndexOutOfRange {
                index: j,
                cols: self.phi.cols(),
            });
        }
        if self.support.contains(j) {
            return Err(Error::DuplicateIndex(j));
        }
        let k = self.support.len();
        if k >= m {
            return Err(Error::SupportTooLarge { size: k + 1, rows: m });
        }
        let col = self.phi.column(j);
        let col_norm = norm2(col);
        let mut v = col.to_vec();
        let mut coeffs = vec![0.0; k + 1];
        for _pass in 0..2 {
            for (i, qi) in self.q.chunks_exact(m).enumerate() {
                let h = dot(qi, &v);
                coeffs[i] += h;
                axpy(-h, qi, &mut v);
            }
        }
        let diag = norm2(&v);
        let scale = self.max_diag.max(col_norm);
        if diag.is_nan() || diag <= RANK_TOLERANCE * scale {
            return Err(Error::RankDeficient { column: j });
        }
        v.iter_mut().for_each(|x| *x /= diag);
        coeffs[k] = diag;
        self.max_diag = self.max_diag.max(diag);
        self.qty.push(dot(&v, self.y));
        let h = dot(&v, &self.residual);
        axpy(-h, &v, &mut self.residual);
        self.q.extend_from_slice(&v);
        self.r.push(coeffs);
        self.support.insert(j);
        Ok(())
    }

    pub fn matrix(&self) -> &'a SensingMatrix {
        self.phi
    }

    pub fn measurement(&self) -> &'a [f64] {
        self.y
    }

    pub fn support(&self) -> &SupportSet {
        &self.support
    }

    pub fn residual(&self) -> &[f64] {
        &self.residual
    }

    pub fn residual_norm(&self) -> f64 {
        norm2(&self.residual)
    }

    /// Least-squares coefficients on the current support, in support order.
    pub fn coefficients(&self) -> Vec<f64> {
        let k = self.support.len();
        let mut c = self.qty.clone();
        for i in (0..k).rev() {
            let mut acc = c[i];
            for (jj, cj) in c.iter().enumerate().take(k).skip(i + 1) {
                acc -= self.r[jj][i] * cj;
            }
            c[i] = acc / self.r[i][i];
        }
        c
    }

    /// Full-length estimate, zero off the support.
    pub fn estimate(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.phi.cols()];
        for (&j, c) in self.support.iter().zip(self.coefficients()) {
            x[j] = c;
        }
        x
    }
}

/// Coefficients `ĉ` minimizing `‖y − Φ_s ĉ‖₂`, ordered as `s`.
pub fn least_squares_on_support(phi: &SensingMatrix, y: &[f64], s: &SupportSet) -> Result<Vec<f64>> {
    Ok(Projection::with_support(phi, y, s)?.coefficients())
}

/// `y − Φ_s·coeffs`.
pub fn residual(phi: &SensingMatrix, y: &[f64], s: &SupportSet, coeffs: &[f64]) -> Result<Vec<f64>> {
    check_len(phi.rows(), y.len())?;
    let fit = phi.mul_support(s, coeffs)?;
    Ok(y.iter().zip(&fit).map(|(a, b)| a - b).collect())
}

/// `Φᵀ r`.
pub fn correlation_scores(phi: &SensingMatrix, r: &[f64]) -> Result<Vec<f64>> {
    check_len(phi.rows(), r.len())?;
    Ok((0..phi.cols()).map(|j| dot(phi.column(j), r)).collect())
}

/// Orders by decreasing magnitude, smaller index first on ties.
#[inline]
fn by_magnitude(a: &(usize, f64), b: &(usize, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then(a.0.cmp(&b.0))
}

/// The `l` indices outside `exclude` with largest `|score|`, ordered by
/// decreasing magnitude with ties going to the smaller index.
pub fn top_l_indices(scores: &[f64], l: usize, exclude: &SupportSet) -> Result<Vec<usize>> {
    let mut cand: Vec<(usize, f64)> = scores
        .iter()
        .enumerate()
        .filter(|(j, _)| !exclude.contains(*j))
        .map(|(j, s)| (j, s.abs()))
        .collect();
    if l > cand.len() {
        return Err(Error::NotEnoughCandidates {
            requested: l,
            available: cand.len(),
        });
    }
    if l == 0 {
        return Ok(Vec::new());
    }
    if l < cand.len() {
        cand.select_nth_unstable_by(l - 1, by_magnitude);
        cand.truncate(l);
    }
    cand.sort_unstable_by(by_magnitude);
    Ok(cand.into_iter().map(|(j, _)| j).collect())
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
