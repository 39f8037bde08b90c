//! Dense symmetric linear algebra.
//!
//! Precision matrices are factored as `K = U D Uᵀ` with `U` unit upper
//! triangular, eliminating from the last row/column upward. Column `k` of
//! `U` is row `k` of the marginal precision of the first `k + 1` variables
//! divided by its pivot, so sign tests on `U` are sign tests on successive
//! Schur complements.

use std::ops::Index;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::ordering::Ordering;

/// Absolute and relative thresholds for sign and pivot decisions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    abs: f64,
    rel: f64,
}

impl Tolerance {
    pub const DEFAULT_ABS: f64 = 1e-12;
    pub const DEFAULT_REL: f64 = 1e-9;

    pub fn new(abs: f64, rel: f64) -> Result<Self> {
        if !(abs >= 0.0 && rel >= 0.0) || !abs.is_finite() || !rel.is_finite() {
            return Err(Error::InvalidInput(format!(
                "tolerances must be finite and nonnegative (abs {abs}, rel {rel})"
            )));
        }
        if abs == 0.0 && rel == 0.0 {
            return Err(Error::InvalidInput(
                "abs and rel tolerance cannot both be zero".into(),
            ));
        }
        Ok(Self { abs, rel })
    }

    pub fn abs(&self) -> f64 {
        self.abs
    }

    pub fn rel(&self) -> f64 {
        self.rel
    }

    /// Largest value still treated as nonpositive for an entry whose natural
    /// scale is `scale` (e.g. `sqrt(a_ii * a_jj)` for an off-diagonal).
    pub fn threshold(&self, scale: f64) -> f64 {
        self.abs + self.rel * scale.abs()
    }

    pub fn is_nonpositive(&self, value: f64, scale: f64) -> bool {
        value <= self.threshold(scale)
    }

    /// `|value| <= threshold`: the entry sits on the sign boundary.
    pub fn is_negligible(&self, value: f64, scale: f64) -> bool {
        value.abs() <= self.threshold(scale)
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs: Self::DEFAULT_ABS,
            rel: Self::DEFAULT_REL,
        }
    }
}

/// Relative asymmetry accepted by [`SymMatrix::from_rows`] before the
/// entries are averaged into an exactly symmetric matrix.
const SYMMETRY_TOL: f64 = 1e-9;

/// Exactly symmetric dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    inner: DMatrix<f64>,
}

impl SymMatrix {
    /// Builds a matrix from rows, rejecting ragged, non-square, non-finite or
    /// visibly asymmetric input. Small asymmetries are averaged out.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::InvalidInput("matrix must have at least one row".into()));
        }
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput("matrix entries must be finite".into()));
            }
        }
        Self::from_dmatrix(DMatrix::from_fn(dim, dim, |i, j| rows[i][j]))
    }

    pub fn from_dmatrix(m: DMatrix<f64>) -> Result<Self> {
        let dim = m.nrows();
        if dim == 0 || m.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: m.ncols(),
            });
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                let (a, b) = (m[(i, j)], m[(j, i)]);
                if (a - b).abs() > SYMMETRY_TOL * (1.0 + a.abs().max(b.abs())) {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(Self::symmetrized(m))
    }

    /// Averages `m` with its transpose. Used for products that are symmetric
    /// in exact arithmetic.
    pub fn symmetrized(m: DMatrix<f64>) -> Self {
        let dim = m.nrows();
        let inner = DMatrix::from_fn(dim, dim, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]));
        Self { inner }
    }

    /// Fills the matrix from `f(i, j)` evaluated on `i <= j` only.
    pub fn from_upper_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut inner = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                inner[(i, j)] = v;
                inner[(j, i)] = v;
            }
        }
        Self { inner }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            inner: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner[(i, j)]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.inner[(i, i)]).collect()
    }

    pub fn as_dmatrix(&self) -> &DMatrix<f64> {
        &self.inner
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.inner[(i, j)]).collect())
            .collect()
    }

    /// `M_{A,A}` for the index list `idx` (kept in the given order).
    pub fn submatrix(&self, idx: &[usize]) -> SymMatrix {
        SymMatrix::from_upper_fn(idx.len(), |a, b| self.inner[(idx[a], idx[b])])
    }

    pub fn max_abs_diff(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.dim(), other.dim());
        (&self.inner - &other.inner).amax()
    }

    /// Scale used for sign tests on entry `(i, j)`.
    pub fn entry_scale(&self, i: usize, j: usize) -> f64 {
        (self.get(i, i) * self.get(j, j)).abs().sqrt()
    }
}

impl Index<(usize, usize)> for SymMatrix {
    type Output = f64;

    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.inner[idx]
    }
}

/// Upper triangular matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitUpperTriangular {
    inner: DMatrix<f64>,
}

impl UnitUpperTriangular {
    pub fn identity(dim: usize) -> Self {
        Self {
            inner: DMatrix::identity(dim, dim),
        }
    }

    /// Takes the strict upper part of `m`; everything else is overwritten.
    pub fn from_strict_upper(m: &DMatrix<f64>) -> Self {
        let dim = m.nrows();
        let inner = DMatrix::from_fn(dim, dim, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Less => m[(i, j)],
            std::cmp::Ordering::Equal => 1.0,
            std::cmp::Ordering::Greater => 0.0,
        });
        Self { inner }
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner[(i, j)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<f64> {
        &self.inner
    }

    /// Inverse by back substitution; again unit upper triangular.
    pub fn inverse(&self) -> UnitUpperTriangular {
        let m = self.dim();
        let mut inv = DMatrix::identity(m, m);
        for j in 0..m {
            for i in (0..j).rev() {
                let mut s = 0.0;
                for k in (i + 1)..=j {
                    s += self.inner[(i, k)] * inv[(k, j)];
                }
                inv[(i, j)] = -s;
            }
        }
        UnitUpperTriangular { inner: inv }
    }
}

/// Diagonal with strictly positive entries.
#[derive(Debug, Clone, PartialEq)]
pub struct PosDiagonal {
    values: Vec<f64>,
}

impl PosDiagonal {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("diagonal must be non-empty".into()));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidInput(format!(
                "diagonal entries must be positive, got {v}"
            )));
        }
        Ok(Self { values })
    }

    pub fn ones(dim: usize) -> Self {
        Self {
            values: vec![1.0; dim],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn reciprocal(&self) -> PosDiagonal {
        PosDiagonal {
            values: self.values.iter().map(|v| 1.0 / v).collect(),
        }
    }
}

fn pivot_floor(k: &SymMatrix, tol: &Tolerance) -> f64 {
    let max_diag = k.diagonal().into_iter().fold(0.0_f64, f64::max);
    tol.abs() * max_diag
}

/// Factors a positive definite `K` as `U diag(D) Uᵀ`.
pub fn udu_factor(k: &SymMatrix, tol: &Tolerance) -> Result<(UnitUpperTriangular, PosDiagonal)> {
    let m = k.dim();
    let floor = pivot_floor(k, tol);
    let mut work = k.as_dmatrix().clone();
    let mut u = DMatrix::identity(m, m);
    let mut d = vec![0.0; m];
    for col in (0..m).rev() {
        let pivot = work[(col, col)];
        if !(pivot.is_finite() && pivot > floor) {
            return Err(Error::NotPositiveDefinite { pivot: col, value: pivot });
        }
        d[col] = pivot;
        for i in 0..col {
            u[(i, col)] = work[(i, col)] / pivot;
        }
        for j in 0..col {
            let ujp = work[(j, col)] / pivot;
            for i in 0..=j {
                let v = work[(i, j)] - work[(i, col)] * ujp;
                work[(i, j)] = v;
                work[(j, i)] = v;
            }
        }
    }
    Ok((UnitUpperTriangular { inner: u }, PosDiagonal { values: d }))
}

/// `U diag(D) Uᵀ`.
pub fn udu_reconstruct(u: &UnitUpperTriangular, d: &PosDiagonal) -> SymMatrix {
    let m = u.dim();
    SymMatrix::from_upper_fn(m, |i, j| {
        (j..m).map(|l| u.get(i, l) * d.get(l) * u.get(j, l)).sum()
    })
}

/// Inverse of a positive definite matrix through its `UDUᵀ` factorization.
pub fn invert_spd(m: &SymMatrix, tol: &Tolerance) -> Result<SymMatrix> {
    let (u, d) = udu_factor(m, tol)?;
    let w = u.inverse();
    let n = m.dim();
    // M⁻¹ = U⁻ᵀ D⁻¹ U⁻¹, entry (i, j) = Σ_l W[l,i] W[l,j] / d_l over l ≤ min(i, j).
    Ok(SymMatrix::from_upper_fn(n, |i, j| {
        (0..=i)
            .map(|l| w.get(l, i) * w.get(l, j) / d.get(l))
            .sum()
    }))
}

/// `log det M` as the sum of log pivots.
pub fn log_det_spd(m: &SymMatrix, tol: &Tolerance) -> Result<f64> {
    let (_, d) = udu_factor(m, tol)?;
    Ok(d.values().iter().map(|v| v.ln()).sum())
}

/// Precision of the marginal obtained by dropping variable `drop`:
/// `K_{\k,\k} - K_{\k,k} K_{k,\k} / K_{k,k}`. Remaining indices keep their
/// relative order.
pub fn marginal_precision(k: &SymMatrix, drop: usize, tol: &Tolerance) -> Result<SymMatrix> {
    let m = k.dim();
    if drop >= m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: drop,
        });
    }
    if m == 1 {
        return Err(Error::InvalidInput("cannot marginalize a 1x1 matrix".into()));
    }
    let pivot = k.get(drop, drop);
    if !(pivot.is_finite() && pivot > pivot_floor(k, tol)) {
        return Err(Error::NotPositiveDefinite { pivot: drop, value: pivot });
    }
    let keep: Vec<usize> = (0..m).filter(|&i| i != drop).collect();
    Ok(SymMatrix::from_upper_fn(m - 1, |a, b| {
        let (i, j) = (keep[a], keep[b]);
        k.get(i, j) - k.get(i, drop) * k.get(drop, j) / pivot
    }))
}

/// `result[i][j] = M[σ(i)][σ(j)]`.
pub fn permute_sym(m: &SymMatrix, sigma: &Ordering) -> Result<SymMatrix> {
    if sigma.len() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            found: sigma.len(),
        });
    }
    Ok(m.submatrix(sigma.as_slice()))
}
