//! Gaussian model layer: covariance/precision pairs and linear structural
//! equation parameters.
//!
//! `SemParams::noise_var` always stores `Var(ε_i)`. The diagonal `D` of the
//! factorization `K = U D Uᵀ` is its reciprocal.

use nalgebra::DMatrix;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::matrix::{invert_spd, log_det_spd, permute_sym, udu_factor, PosDiagonal, SymMatrix, Tolerance};
use crate::ordering::Ordering;

/// Covariance `Σ` and precision `K = Σ⁻¹`, both positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariancePair {
    sigma: SymMatrix,
    precision: SymMatrix,
}

impl CovariancePair {
    pub fn from_sigma(sigma: SymMatrix, tol: &Tolerance) -> Result<Self> {
        let precision = invert_spd(&sigma, tol)?;
        Ok(Self { sigma, precision })
    }

    pub fn from_precision(precision: SymMatrix, tol: &Tolerance) -> Result<Self> {
        let sigma = invert_spd(&precision, tol)?;
        Ok(Self { sigma, precision })
    }

    pub fn sigma(&self) -> &SymMatrix {
        &self.sigma
    }

    pub fn precision(&self) -> &SymMatrix {
        &self.precision
    }

    pub fn dim(&self) -> usize {
        self.sigma.dim()
    }

    /// Relabels variables so that new variable `p` is old variable `σ(p)`.
    pub fn permuted(&self, sigma: &Ordering) -> Result<Self> {
        Ok(Self {
            sigma: permute_sym(&self.sigma, sigma)?,
            precision: permute_sym(&self.precision, sigma)?,
        })
    }

    /// Marginal model on `keep` (in the given order).
    pub fn marginal(&self, keep: &[usize], tol: &Tolerance) -> Result<Self> {
        Self::from_sigma(self.sigma.submatrix(keep), tol)
    }
}

/// Linear SEM `X = μ + ΛX + ε` expressed in a variable order under which
/// `Λ` is strictly lower triangular.
#[derive(Debug, Clone, PartialEq)]
pub struct SemParams {
    ordering: Ordering,
    lambda: DMatrix<f64>,
    noise_var: PosDiagonal,
    mean: Vec<f64>,
}

impl SemParams {
    /// `lambda[(i, j)]` is the coefficient of `X_j` in the equation of `X_i`;
    /// it must vanish unless `j` precedes `i` in `ordering`. A missing mean
    /// defaults to zero.
    pub fn new(
        ordering: Ordering,
        lambda: DMatrix<f64>,
        noise_var: PosDiagonal,
        mean: Option<Vec<f64>>,
    ) -> Result<Self> {
        let m = ordering.len();
        if lambda.nrows() != m || lambda.ncols() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: lambda.nrows().max(lambda.ncols()),
            });
        }
        if noise_var.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: noise_var.len(),
            });
        }
        let mean = mean.unwrap_or_else(|| vec![0.0; m]);
        if mean.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: mean.len(),
            });
        }
        if lambda.iter().chain(mean.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("SEM parameters must be finite".into()));
        }
        let pos = ordering.positions();
        for i in 0..m {
            for j in 0..m {
                if lambda[(i, j)] != 0.0 && pos[j] >= pos[i] {
                    return Err(Error::InvalidInput(format!(
                        "coefficient of x{} in the equation of x{} is nonzero but x{} does not precede x{} in the ordering",
                        j + 1,
                        i + 1,
                        j + 1,
                        i + 1
                    )));
                }
            }
        }
        Ok(Self {
            ordering,
            lambda,
            noise_var,
            mean,
        })
    }

    pub fn dim(&self) -> usize {
        self.ordering.len()
    }

    pub fn ordering(&self) -> &Ordering {
        &self.ordering
    }

    pub fn lambda(&self) -> &DMatrix<f64> {
        &self.lambda
    }

    pub fn noise_var(&self) -> &PosDiagonal {
        &self.noise_var
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Same model with a different (compatible) ordering.
    pub fn with_ordering(&self, ordering: Ordering) -> Result<Self> {
        Self::new(
            ordering,
            self.lambda.clone(),
            self.noise_var.clone(),
            Some(self.mean.clone()),
        )
    }

    /// `E[X]` obtained by propagating the intercepts through the equations.
    pub fn marginal_means(&self) -> Vec<f64> {
        let m = self.dim();
        let mut mu = vec![0.0; m];
        for &i in self.ordering.as_slice() {
            mu[i] = self.mean[i] + (0..m).map(|j| self.lambda[(i, j)] * mu[j]).sum::<f64>();
        }
        mu
    }

    /// Edges `j → i` with nonzero coefficients.
    pub fn support(&self) -> Vec<(usize, usize)> {
        let m = self.dim();
        let mut edges = Vec::new();
        for j in 0..m {
            for i in 0..m {
                if self.lambda[(i, j)] != 0.0 {
                    edges.push((j, i));
                }
            }
        }
        edges
    }
}

/// `K = (I - Λ)ᵀ diag(noise_var)⁻¹ (I - Λ)` together with `Σ = K⁻¹`.
pub fn sem_to_precision(p: &SemParams, tol: &Tolerance) -> Result<CovariancePair> {
    let m = p.dim();
    let b = DMatrix::<f64>::identity(m, m) - &p.lambda;
    let mut scaled = b.clone();
    for i in 0..m {
        let w = 1.0 / p.noise_var.get(i);
        scaled.row_mut(i).scale_mut(w);
    }
    let k = SymMatrix::symmetrized(b.tr_mul(&scaled));
    CovariancePair::from_precision(k, tol)
}

/// The unique SEM with the given ordering whose precision is `cp.precision()`.
pub fn precision_to_sem(cp: &CovariancePair, ordering: &Ordering, tol: &Tolerance) -> Result<SemParams> {
    let m = cp.dim();
    let kp = permute_sym(cp.precision(), ordering)?;
    let (u, d) = udu_factor(&kp, tol)?;
    let mut lambda = DMatrix::zeros(m, m);
    let mut noise = vec![0.0; m];
    for p in 0..m {
        let vp = ordering.at(p);
        noise[vp] = 1.0 / d.get(p);
        for q in 0..p {
            lambda[(vp, ordering.at(q))] = -u.get(q, p);
        }
    }
    SemParams::new(ordering.clone(), lambda, PosDiagonal::new(noise)?, None)
}

/// `log det K - (1/n) tr(XᵀX K)` on the data as given (no centering).
pub fn log_likelihood(k: &SymMatrix, data: &Dataset, tol: &Tolerance) -> Result<f64> {
    if data.m() != k.dim() {
        return Err(Error::DimensionMismatch {
            expected: k.dim(),
            found: data.m(),
        });
    }
    let log_det = log_det_spd(k, tol)?;
    let gram = data.gram();
    let m = k.dim();
    let mut trace = 0.0;
    for i in 0..m {
        for j in 0..m {
            trace += gram.get(i, j) * k.get(j, i);
        }
    }
    Ok(log_det - trace / data.n() as f64)
}
