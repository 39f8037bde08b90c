//! Least squares through normal equations, with a minimum-norm fallback
//! for rank-deficient designs.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Squared ratio of smallest to largest Cholesky pivot below which the Gram
/// matrix is treated as rank deficient.
const RANK_RATIO: f64 = 1e-12;

/// Solves `G β = b` for a Gram matrix `G = ZᵀZ` and `b = Zᵀy`. When `G` is
/// singular (or numerically so) the result is `pinv(G) b`, which equals the
/// minimum-norm least squares solution `pinv(Z) y`.
pub fn solve_normal_equations(gram: &DMatrix<f64>, rhs: &DVector<f64>) -> DVector<f64> {
    let k = gram.nrows();
    if k == 0 {
        return DVector::zeros(0);
    }
    if let Some(chol) = gram.clone().cholesky() {
        let l = chol.l_dirty();
        let (lo, hi) = (0..k).fold((f64::INFINITY, 0.0_f64), |(lo, hi), i| {
            let v = l[(i, i)].abs();
            (lo.min(v), hi.max(v))
        });
        if hi > 0.0 && (lo / hi).powi(2) > RANK_RATIO {
            return chol.solve(rhs);
        }
    }
    pseudo_inverse_solve(gram, rhs)
}

fn pseudo_inverse_solve(gram: &DMatrix<f64>, rhs: &DVector<f64>) -> DVector<f64> {
    let eig = SymmetricEigen::new(gram.clone());
    let max = eig.eigenvalues.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let cutoff = max * RANK_RATIO * gram.nrows() as f64;
    let mut out = DVector::zeros(gram.nrows());
    for (idx, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > cutoff {
            let v = eig.eigenvectors.column(idx);
            out += v * (v.dot(rhs) / lambda);
        }
    }
    out
}
