//! Nonnegative least squares, Lawson–Hanson active-set method.
//!
//! The solver works on the normal equations `G = ZᵀZ`, `b = Zᵀy`, so its
//! cost per iteration does not depend on the number of rows.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lstsq::solve_normal_equations;
use crate::matrix::Tolerance;

/// KKT tolerance used by the maximum likelihood fits.
pub fn default_kkt_tolerance() -> Tolerance {
    Tolerance::new(1e-10, 1e-12).expect("valid constants")
}

/// `argmin ‖y - Zβ‖²` subject to `β ≥ 0`.
pub fn solve_nnls(z: &DMatrix<f64>, y: &DVector<f64>, tol: &Tolerance) -> Result<DVector<f64>> {
    if z.nrows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: z.nrows(),
            found: y.len(),
        });
    }
    if z.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("NNLS inputs must be finite".into()));
    }
    solve_nnls_gram(&z.tr_mul(z), &z.tr_mul(y), tol)
}

/// NNLS in normal-equation form: minimizes `½βᵀGβ - bᵀβ` over `β ≥ 0`.
pub fn solve_nnls_gram(gram: &DMatrix<f64>, rhs: &DVector<f64>, tol: &Tolerance) -> Result<DVector<f64>> {
    let k = rhs.len();
    if gram.nrows() != k || gram.ncols() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: gram.nrows(),
        });
    }
    let mut x = DVector::zeros(k);
    if k == 0 {
        return Ok(x);
    }
    let dual_tol = tol.threshold(rhs.amax());
    let mut passive = vec![false; k];
    // Indices whose entry was rejected by the last subproblem; they stay out
    // until the iterate moves, which stops the add/drop cycle of a column
    // whose unconstrained coefficient rounds to a nonpositive value.
    let mut blocked = vec![false; k];
    let max_iter = 30 * k + 100;

    for _ in 0..max_iter {
        let w = rhs - gram * &x;
        let entering = (0..k)
            .filter(|&j| !passive[j] && !blocked[j] && w[j] > dual_tol)
            .fold(None, |best: Option<usize>, j| match best {
                Some(b) if w[b] >= w[j] => Some(b),
                _ => Some(j),
            });
        let Some(t) = entering else {
            return Ok(x);
        };
        passive[t] = true;

        let mut first_pass = true;
        loop {
            let idx: Vec<usize> = (0..k).filter(|&j| passive[j]).collect();
            let s = subproblem(gram, rhs, &idx);
            if first_pass && s[idx.iter().position(|&j| j == t).unwrap()] <= 0.0 {
                passive[t] = false;
                blocked[t] = true;
                break;
            }
            first_pass = false;
            if s.iter().all(|&v| v > 0.0) {
                for (a, &j) in idx.iter().enumerate() {
                    x[j] = s[a];
                }
                blocked.iter_mut().for_each(|b| *b = false);
                break;
            }
            // Step towards s until the first passive coordinate hits zero.
            let mut alpha = 1.0;
            let mut hitting = None;
            for (a, &j) in idx.iter().enumerate() {
                if s[a] <= 0.0 {
                    let ratio = x[j] / (x[j] - s[a]);
                    if hitting.is_none() || ratio < alpha {
                        alpha = ratio;
                        hitting = Some(j);
                    }
                }
            }
            for (a, &j) in idx.iter().enumerate() {
                x[j] += alpha * (s[a] - x[j]);
            }
            if let Some(j) = hitting {
                x[j] = 0.0;
            }
            for &j in &idx {
                if x[j] <= 0.0 {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
            blocked.iter_mut().for_each(|b| *b = false);
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    Err(Error::MaxIterations { iterations: max_iter })
}

fn subproblem(gram: &DMatrix<f64>, rhs: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    let p = idx.len();
    let g = DMatrix::from_fn(p, p, |a, b| gram[(idx[a], idx[b])]);
    let b = DVector::from_fn(p, |a, _| rhs[idx[a]]);
    solve_normal_equations(&g, &b)
}
