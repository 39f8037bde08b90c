//! Maximum likelihood in Cholesky factor models.
//!
//! The Gaussian log-likelihood separates over the rows of `(I - Λ)` once an
//! ordering is fixed, so each variable is fitted by its own least squares
//! problem on the variables that precede it. Columns are centered first.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::lstsq::solve_normal_equations;
use crate::matrix::PosDiagonal;
use crate::model::SemParams;
use crate::nnls::{default_kkt_tolerance, solve_nnls_gram};
use crate::ordering::Ordering;

/// Relative residual variance at or below which a row counts as an exact fit.
const EXACT_FIT_RATIO: f64 = 1e-12;

/// Admissible coefficient set for one equation. Supports hold variable
/// labels (0-based), all of which must precede the fitted variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RowConstraint {
    Free,
    Nonnegative,
    Support(Vec<usize>),
    NonnegativeSupport(Vec<usize>),
}

impl RowConstraint {
    fn is_nonnegative(&self) -> bool {
        matches!(self, RowConstraint::Nonnegative | RowConstraint::NonnegativeSupport(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MleFit {
    pub sem: SemParams,
    pub loglik: f64,
    /// `‖r_i‖` per variable label.
    pub residual_norms: Vec<f64>,
    pub exists: bool,
}

impl MleFit {
    /// `D̂_ii = n / ‖r_i‖²` per variable label.
    pub fn precision_diag(&self) -> Vec<f64> {
        self.sem.noise_var().reciprocal().values().to_vec()
    }
}

struct RowFit {
    regressors: Vec<usize>,
    beta: Vec<f64>,
    rss: f64,
}

/// Fits every equation of the factor model with the given ordering.
/// `constraints[p - 1]` applies to the variable at position `p` (the first
/// variable has no regressors).
pub fn fit(data: &Dataset, ordering: &Ordering, constraints: &[RowConstraint]) -> Result<MleFit> {
    let m = data.m();
    let n = data.n();
    if ordering.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: ordering.len(),
        });
    }
    if m == 0 {
        return Err(Error::InvalidInput("dataset has no columns".into()));
    }
    if constraints.len() + 1 != m {
        return Err(Error::DimensionMismatch {
            expected: m - 1,
            found: constraints.len(),
        });
    }
    let regressor_sets = regressor_sets(ordering, constraints)?;

    let centered = data.centered();
    let x = centered.as_dmatrix();
    let gram = x.tr_mul(x);
    let kkt = default_kkt_tolerance();

    let rows: Vec<Result<RowFit>> = (0..m)
        .into_par_iter()
        .map(|p| {
            let v = ordering.at(p);
            let regressors = regressor_sets[p].clone();
            let nonneg = p > 0 && constraints[p - 1].is_nonnegative();
            let g = DMatrix::from_fn(regressors.len(), regressors.len(), |a, b| gram[(regressors[a], regressors[b])]);
            let rhs = DVector::from_fn(regressors.len(), |a, _| gram[(regressors[a], v)]);
            let beta = if nonneg {
                solve_nnls_gram(&g, &rhs, &kkt)?
            } else {
                solve_normal_equations(&g, &rhs)
            };
            let mut resid = x.column(v).clone_owned();
            for (a, &j) in regressors.iter().enumerate() {
                resid.axpy(-beta[a], &x.column(j), 1.0);
            }
            Ok(RowFit {
                regressors,
                beta: beta.as_slice().to_vec(),
                rss: resid.norm_squared(),
            })
        })
        .collect();

    let means = data.column_means();
    let mut lambda = DMatrix::zeros(m, m);
    let mut noise = vec![0.0; m];
    let mut residual_norms = vec![0.0; m];
    let mut intercept = vec![0.0; m];
    let mut loglik = -(m as f64);
    for (p, row) in rows.into_iter().enumerate() {
        let row = row?;
        let v = ordering.at(p);
        let var_hat = row.rss / n as f64;
        if var_hat <= EXACT_FIT_RATIO * data.column_variance(v) || var_hat == 0.0 {
            return Err(Error::MleDoesNotExist { variable: v });
        }
        intercept[v] = means[v];
        for (&j, &b) in row.regressors.iter().zip(&row.beta) {
            lambda[(v, j)] = b;
            intercept[v] -= b * means[j];
        }
        noise[v] = var_hat;
        residual_norms[v] = row.rss.sqrt();
        loglik -= var_hat.ln();
    }
    let sem = SemParams::new(ordering.clone(), lambda, PosDiagonal::new(noise)?, Some(intercept))?;
    Ok(MleFit {
        sem,
        loglik,
        residual_norms,
        exists: true,
    })
}

/// Whether the MLE exists, i.e. no equation is fitted exactly.
pub fn mle_exists(data: &Dataset, ordering: &Ordering, constraints: &[RowConstraint]) -> bool {
    fit(data, ordering, constraints).is_ok()
}

/// `constraints` with the same kind at every row.
pub fn uniform_constraints(m: usize, kind: RowConstraint) -> Vec<RowConstraint> {
    vec![kind; m.saturating_sub(1)]
}

fn regressor_sets(ordering: &Ordering, constraints: &[RowConstraint]) -> Result<Vec<Vec<usize>>> {
    let m = ordering.len();
    let pos = ordering.positions();
    let mut sets = vec![Vec::new()];
    for p in 1..m {
        let v = ordering.at(p);
        let set = match &constraints[p - 1] {
            RowConstraint::Free | RowConstraint::Nonnegative => ordering.as_slice()[..p].to_vec(),
            RowConstraint::Support(s) | RowConstraint::NonnegativeSupport(s) => {
                let mut s = s.clone();
                s.sort_unstable();
                if s.windows(2).any(|w| w[0] == w[1]) {
                    return Err(Error::InvalidInput(format!("repeated variable in the support of x{}", v + 1)));
                }
                if let Some(&bad) = s.iter().find(|&&j| j >= m || pos[j] >= p) {
                    return Err(Error::InvalidInput(format!(
                        "x{} in the support of x{} does not precede it in the ordering",
                        bad + 1,
                        v + 1
                    )));
                }
                s
            }
        };
        sets.push(set);
    }
    Ok(sets)
}
