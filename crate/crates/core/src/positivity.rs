//! CIS, MTP₂ and positive-association checks for Gaussian models.
//!
//! A Gaussian vector is CIS under `σ` iff the unit upper triangular factor
//! of the `σ`-permuted precision has nonpositive off-diagonal entries. A
//! variable can be placed last in some CIS ordering of a CIS-orderable
//! vector iff its precision row is nonpositive off the diagonal, which
//! drives the branch-and-prune enumeration below.

use crate::error::{Error, Result};
use crate::matrix::{marginal_precision, permute_sym, udu_factor, SymMatrix, Tolerance};
use crate::model::CovariancePair;
use crate::ordering::Ordering;

/// Largest dimension accepted by the exhaustive enumerations.
pub const ENUMERATION_CAP: usize = 10;

/// Entry of the `σ`-permuted factor `U` that is positive or on the boundary.
/// `row` and `col` are variable labels (0-based); boundary entries carry
/// `value == 0.0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViolatingEntry {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositivityReport {
    pub is_cis_under_given_ordering: bool,
    pub is_mtp2: bool,
    pub is_positively_associated: bool,
    pub violating_entries: Vec<ViolatingEntry>,
}

/// Scale of `U[p][q]` (p < q) under variable rescaling.
fn factor_scale(d: &[f64], p: usize, q: usize) -> f64 {
    (d[p] / d[q]).sqrt()
}

pub fn is_cis(cp: &CovariancePair, sigma: &Ordering, tol: &Tolerance) -> Result<bool> {
    let kp = permute_sym(cp.precision(), sigma)?;
    let (u, d) = udu_factor(&kp, tol)?;
    let d = d.values();
    let m = kp.dim();
    Ok((0..m).all(|q| (0..q).all(|p| tol.is_nonpositive(u.get(p, q), factor_scale(d, p, q)))))
}

pub fn is_m_matrix(k: &SymMatrix, tol: &Tolerance) -> bool {
    if udu_factor(k, tol).is_err() {
        return false;
    }
    let m = k.dim();
    (0..m).all(|i| (0..m).all(|j| i == j || tol.is_nonpositive(k.get(i, j), k.entry_scale(i, j))))
}

/// Gaussian positive association: every covariance is nonnegative.
pub fn is_positively_associated(sigma: &SymMatrix, tol: &Tolerance) -> bool {
    let m = sigma.dim();
    (0..m).all(|i| (0..m).all(|j| tol.is_nonpositive(-sigma.get(i, j), sigma.entry_scale(i, j))))
}

pub fn positivity_report(cp: &CovariancePair, sigma: &Ordering, tol: &Tolerance) -> Result<PositivityReport> {
    let kp = permute_sym(cp.precision(), sigma)?;
    let (u, d) = udu_factor(&kp, tol)?;
    let d = d.values();
    let m = kp.dim();
    let mut violating_entries = Vec::new();
    let mut cis = true;
    for p in 0..m {
        for q in (p + 1)..m {
            let v = u.get(p, q);
            let scale = factor_scale(d, p, q);
            if !tol.is_nonpositive(v, scale) {
                cis = false;
                violating_entries.push(ViolatingEntry {
                    row: sigma.at(p),
                    col: sigma.at(q),
                    value: v,
                });
            } else if tol.is_negligible(v, scale) {
                violating_entries.push(ViolatingEntry {
                    row: sigma.at(p),
                    col: sigma.at(q),
                    value: 0.0,
                });
            }
        }
    }
    Ok(PositivityReport {
        is_cis_under_given_ordering: cis,
        is_mtp2: is_m_matrix(cp.precision(), tol),
        is_positively_associated: is_positively_associated(cp.sigma(), tol),
        violating_entries,
    })
}

/// Local indices `i` whose off-diagonal precision row is nonpositive.
pub(crate) fn last_candidates(k: &SymMatrix, tol: &Tolerance) -> Vec<usize> {
    let m = k.dim();
    (0..m)
        .filter(|&i| (0..m).all(|j| j == i || tol.is_nonpositive(k.get(i, j), k.entry_scale(i, j))))
        .collect()
}

/// Regression coefficients of variable `i` on all other variables of the
/// model with precision `k`: `-K_{i,\i} / K_{ii}`.
pub(crate) fn min_conditional_coefficient(k: &SymMatrix, i: usize) -> f64 {
    let kii = k.get(i, i);
    (0..k.dim())
        .filter(|&j| j != i)
        .map(|j| -k.get(i, j) / kii)
        .fold(f64::INFINITY, f64::min)
}

/// Every CIS ordering of `cp`, with the default dimension cap.
pub fn enumerate_cis_orderings(cp: &CovariancePair, tol: &Tolerance) -> Result<Vec<Ordering>> {
    enumerate_cis_orderings_capped(cp, tol, ENUMERATION_CAP)
}

/// Every CIS ordering of `cp`. Output order: the last position is chosen by
/// ascending label at each level; the final free pair `{a < b}` is emitted as
/// `(a, b)` then `(b, a)`.
pub fn enumerate_cis_orderings_capped(cp: &CovariancePair, tol: &Tolerance, cap: usize) -> Result<Vec<Ordering>> {
    let m = cp.dim();
    if m > cap {
        return Err(Error::DimensionTooLarge { dim: m, cap });
    }
    let mut out = Vec::new();
    let labels: Vec<usize> = (0..m).collect();
    let mut suffix = Vec::with_capacity(m);
    enumerate_rec(cp.precision(), &labels, &mut suffix, tol, &mut out)?;
    Ok(out)
}

fn enumerate_rec(
    k: &SymMatrix,
    labels: &[usize],
    suffix: &mut Vec<usize>,
    tol: &Tolerance,
    out: &mut Vec<Ordering>,
) -> Result<()> {
    let emit = |head: &[usize], suffix: &[usize], out: &mut Vec<Ordering>| {
        let perm: Vec<usize> = head.iter().copied().chain(suffix.iter().rev().copied()).collect();
        out.push(Ordering::new(perm).expect("enumeration builds permutations"));
    };
    match labels.len() {
        1 => emit(labels, suffix, out),
        2 => {
            if tol.is_nonpositive(k.get(0, 1), k.entry_scale(0, 1)) {
                emit(&[labels[0], labels[1]], suffix, out);
                emit(&[labels[1], labels[0]], suffix, out);
            }
        }
        _ => {
            for i in last_candidates(k, tol) {
                let reduced = marginal_precision(k, i, tol)?;
                let rest: Vec<usize> = labels.iter().enumerate().filter(|&(a, _)| a != i).map(|(_, &l)| l).collect();
                suffix.push(labels[i]);
                enumerate_rec(&reduced, &rest, suffix, tol, out)?;
                suffix.pop();
            }
        }
    }
    Ok(())
}
