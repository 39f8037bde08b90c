//! Recovering a CIS ordering from the population precision matrix or from
//! samples.
//!
//! Both procedures build the ordering from the back. A variable whose
//! regression on all remaining variables has nonnegative coefficients may
//! be placed last; it is then marginalized out and the search repeats on
//! the remaining variables.

use nalgebra::{DMatrix, DVector};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::lstsq::solve_normal_equations;
use crate::matrix::{invert_spd, marginal_precision, SymMatrix, Tolerance};
use crate::model::CovariancePair;
use crate::ordering::Ordering;
use crate::positivity::{last_candidates, min_conditional_coefficient};

/// How the sample threshold `ε_n` shrinks with the sample size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsilonSchedule {
    /// `ε_n = scale · n^(-exponent)`.
    PowerLaw { scale: f64, exponent: f64 },
    Constant(f64),
}

impl EpsilonSchedule {
    pub fn power_law(scale: f64) -> Result<Self> {
        let s = EpsilonSchedule::PowerLaw { scale, exponent: 0.25 };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            EpsilonSchedule::PowerLaw { scale, exponent } => {
                scale > 0.0 && scale.is_finite() && exponent.is_finite()
            }
            EpsilonSchedule::Constant(eps) => eps > 0.0 && eps.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("epsilon schedule must stay positive: {self:?}")))
        }
    }

    pub fn epsilon(&self, n: usize) -> f64 {
        match *self {
            EpsilonSchedule::PowerLaw { scale, exponent } => scale * (n as f64).powf(-exponent),
            EpsilonSchedule::Constant(eps) => eps,
        }
    }
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        EpsilonSchedule::PowerLaw {
            scale: 0.5,
            exponent: 0.25,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Smallest index that qualifies.
    #[default]
    FirstIndex,
    /// Qualifying index with the largest minimum regression coefficient.
    MaxMinCoefficient,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RecoveryConfig {
    pub tol: Tolerance,
    pub epsilon_schedule: EpsilonSchedule,
    pub tie_break: TieBreak,
}

/// Coefficients of the linear regression of `target` on `conditioning_set`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionCoefficients {
    pub target: usize,
    pub conditioning_set: Vec<usize>,
    pub beta: Vec<f64>,
}

impl RegressionCoefficients {
    pub fn min_coefficient(&self) -> f64 {
        self.beta.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// True when every coefficient is nonnegative.
    pub fn is_positive_regression(&self) -> bool {
        self.beta.iter().all(|&b| b >= 0.0)
    }
}

fn check_regression_indices(m: usize, target: usize, set: &[usize]) -> Result<()> {
    if set.is_empty() {
        return Err(Error::InvalidInput("conditioning set must be non-empty".into()));
    }
    if target >= m {
        return Err(Error::DimensionMismatch { expected: m, found: target });
    }
    let mut seen = vec![false; m];
    for &a in set {
        if a >= m {
            return Err(Error::DimensionMismatch { expected: m, found: a });
        }
        if a == target || seen[a] {
            return Err(Error::InvalidInput(format!(
                "conditioning set {set:?} must exclude the target and have distinct entries"
            )));
        }
        seen[a] = true;
    }
    Ok(())
}

/// `β = Σ_{i,A} Σ_{A,A}⁻¹`.
pub fn population_regression(
    cp: &CovariancePair,
    target: usize,
    set: &[usize],
    tol: &Tolerance,
) -> Result<RegressionCoefficients> {
    check_regression_indices(cp.dim(), target, set)?;
    let inv = invert_spd(&cp.sigma().submatrix(set), tol)?;
    let beta = (0..set.len())
        .map(|b| (0..set.len()).map(|a| cp.sigma().get(target, set[a]) * inv.get(a, b)).sum())
        .collect();
    Ok(RegressionCoefficients {
        target,
        conditioning_set: set.to_vec(),
        beta,
    })
}

/// Least squares coefficients of column `target` on the columns in `set`,
/// without intercept. Rank-deficient designs get the minimum-norm solution.
pub fn sample_regression(data: &Dataset, target: usize, set: &[usize]) -> Result<RegressionCoefficients> {
    check_regression_indices(data.m(), target, set)?;
    Ok(regression_from_gram(&data.gram(), target, set))
}

fn regression_from_gram(gram: &SymMatrix, target: usize, set: &[usize]) -> RegressionCoefficients {
    let k = set.len();
    let g = DMatrix::from_fn(k, k, |a, b| gram.get(set[a], set[b]));
    let rhs = DVector::from_fn(k, |a, _| gram.get(set[a], target));
    let beta = solve_normal_equations(&g, &rhs);
    RegressionCoefficients {
        target,
        conditioning_set: set.to_vec(),
        beta: beta.iter().copied().collect(),
    }
}

/// Builds a CIS ordering from the back using exact precision matrices.
/// Returns `None` when some step has no admissible variable, which
/// certifies that no CIS ordering exists.
pub fn find_cis_ordering_population(cp: &CovariancePair, cfg: &RecoveryConfig) -> Result<Option<Ordering>> {
    let tol = &cfg.tol;
    let m = cp.dim();
    let mut labels: Vec<usize> = (0..m).collect();
    let mut k = cp.precision().clone();
    let mut suffix = Vec::with_capacity(m);
    while labels.len() > 2 {
        let candidates = last_candidates(&k, tol);
        let Some(pick) = choose(&candidates, cfg.tie_break, |i| min_conditional_coefficient(&k, i)) else {
            return Ok(None);
        };
        suffix.push(labels.remove(pick));
        k = marginal_precision(&k, pick, tol)?;
    }
    if labels.len() == 2 && !tol.is_nonpositive(k.get(0, 1), k.entry_scale(0, 1)) {
        return Ok(None);
    }
    let perm: Vec<usize> = labels.into_iter().chain(suffix.into_iter().rev()).collect();
    Ok(Some(Ordering::new(perm)?))
}

fn choose(candidates: &[usize], tie_break: TieBreak, score: impl Fn(usize) -> f64) -> Option<usize> {
    match tie_break {
        TieBreak::FirstIndex => candidates.first().copied(),
        TieBreak::MaxMinCoefficient => candidates
            .iter()
            .copied()
            .map(|i| (i, score(i)))
            .fold(None, |best: Option<(usize, f64)>, (i, s)| match best {
                Some((_, bs)) if bs >= s => best,
                _ => Some((i, s)),
            })
            .map(|(i, _)| i),
    }
}

/// One placement made by the sample-based procedure.
#[derive(Debug, Clone, PartialEq)]
pub struct StepMargin {
    /// 1-based step counter.
    pub step: usize,
    /// Variable placed at position `m - step` (0-based).
    pub variable: usize,
    /// Smallest regression coefficient of the placed variable.
    pub min_coefficient: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoisyRecovery {
    pub ordering: Ordering,
    pub epsilon: f64,
    pub steps: Vec<StepMargin>,
}

/// Sample version of the backward search: at step `t ≤ m - 2` the first
/// active variable (per `cfg.tie_break`) whose centered OLS coefficients on
/// the other active variables all exceed `-ε_n` is placed at position
/// `m - t + 1`; the last two variables are placed in ascending order.
pub fn find_cis_ordering_noisy(data: &Dataset, cfg: &RecoveryConfig) -> Result<NoisyRecovery> {
    cfg.epsilon_schedule.validate()?;
    let (n, m) = (data.n(), data.m());
    if n < m {
        return Err(Error::InvalidInput(format!(
            "need at least as many samples as variables (n = {n}, m = {m})"
        )));
    }
    let epsilon = cfg.epsilon_schedule.epsilon(n);
    let gram = data.centered().gram();
    let mut active: Vec<usize> = (0..m).collect();
    let mut suffix = Vec::with_capacity(m);
    let mut steps = Vec::new();
    for step in 1..=m.saturating_sub(2) {
        let mut scores = Vec::with_capacity(active.len());
        for (a, &i) in active.iter().enumerate() {
            let rest: Vec<usize> = active.iter().copied().filter(|&j| j != i).collect();
            let margin = regression_from_gram(&gram, i, &rest).min_coefficient();
            scores.push((a, margin));
            if cfg.tie_break == TieBreak::FirstIndex && margin > -epsilon {
                break;
            }
        }
        let passing = scores.iter().copied().filter(|&(_, s)| s > -epsilon);
        let pick = match cfg.tie_break {
            TieBreak::FirstIndex => passing.into_iter().next(),
            TieBreak::MaxMinCoefficient => passing.fold(None, |best: Option<(usize, f64)>, cur| match best {
                Some(b) if b.1 >= cur.1 => Some(b),
                _ => Some(cur),
            }),
        };
        let Some((a, margin)) = pick else {
            let best_margin = scores.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
            return Err(Error::NoCandidate { step, best_margin });
        };
        let variable = active.remove(a);
        suffix.push(variable);
        steps.push(StepMargin {
            step,
            variable,
            min_coefficient: margin,
        });
    }
    let perm: Vec<usize> = active.into_iter().chain(suffix.into_iter().rev()).collect();
    Ok(NoisyRecovery {
        ordering: Ordering::new(perm)?,
        epsilon,
        steps,
    })
}
