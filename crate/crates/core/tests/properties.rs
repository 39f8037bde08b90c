mod common;

use cisdag_core::dag::{
    covered_edges, flip_closure, markov_equivalent, topological_orderings, FlipRule, Traversal,
};
use cisdag_core::data::Dataset;
use cisdag_core::matrix::{invert_spd, log_det_spd, marginal_precision, permute_sym, udu_factor, udu_reconstruct};
use cisdag_core::mle::{fit, RowConstraint};
use cisdag_core::model::{log_likelihood, precision_to_sem, sem_to_precision};
use cisdag_core::positivity::{enumerate_cis_orderings, is_cis};
use cisdag_core::recovery::{find_cis_ordering_noisy, find_cis_ordering_population, EpsilonSchedule, RecoveryConfig};
use cisdag_core::simulate::{random_cis_model, sample_sem, SimSpec};
use cisdag_core::{Ordering, SemParams};
use common::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn random_ordering(m: usize, seed: u64) -> Ordering {
    let mut perm: Vec<usize> = (0..m).collect();
    perm.shuffle(&mut rng(seed));
    Ordering::new(perm).unwrap()
}

/// Rows `±√m Lᵀ` whose centered second moment is exactly `Σ = L Lᵀ`.
fn exact_moment_data(sigma: &cisdag_core::SymMatrix) -> Dataset {
    let m = sigma.dim();
    let l = sigma.as_dmatrix().clone().cholesky().unwrap().unpack();
    let a = l.transpose() * (m as f64).sqrt();
    let mut x = DMatrix::zeros(2 * m, m);
    for r in 0..m {
        for c in 0..m {
            x[(r, c)] = a[(r, c)];
            x[(m + r, c)] = -a[(r, c)];
        }
    }
    Dataset::new(x).unwrap()
}

fn rss(data: &Dataset, v: usize, lambda_row: &[f64]) -> f64 {
    let c = data.centered();
    let x = c.as_dmatrix();
    let mut r = x.column(v).clone_owned();
    for (j, &b) in lambda_row.iter().enumerate() {
        if b != 0.0 {
            r.axpy(-b, &x.column(j), 1.0);
        }
    }
    r.norm_squared()
}

fn random_constraints(sem_order: &Ordering, seed: u64) -> Vec<RowConstraint> {
    let mut g = rng(seed);
    let m = sem_order.len();
    (1..m)
        .map(|p| {
            let pre = &sem_order.as_slice()[..p];
            let support: Vec<usize> = pre.iter().copied().filter(|_| g.random_bool(0.6)).collect();
            match g.random_range(0..4) {
                0 => RowConstraint::Free,
                1 => RowConstraint::Nonnegative,
                2 => RowConstraint::Support(support),
                _ => RowConstraint::NonnegativeSupport(support),
            }
        })
        .collect()
}

fn sample(sem: &SemParams, n: usize, seed: u64) -> Dataset {
    sample_sem(&SimSpec { sem: sem.clone(), n, seed }).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn udu_round_trip(m in 1usize..=10, seed in any::<u64>()) {
        let k = random_spd(m, &mut rng(seed));
        let (u, d) = udu_factor(&k, &tol()).unwrap();
        let back = udu_reconstruct(&u, &d);
        let scale = k.as_dmatrix().amax();
        prop_assert!(back.max_abs_diff(&k) <= 1e-10 * scale);
        for i in 0..m {
            prop_assert_eq!(u.get(i, i), 1.0);
            for j in 0..i {
                prop_assert_eq!(u.get(i, j), 0.0);
            }
        }
    }

    #[test]
    fn schur_downdate_matches_inverse_of_submatrix(m in 2usize..=10, seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let k = random_spd(m, &mut rng(seed));
        let drop = pick.index(m);
        let fast = marginal_precision(&k, drop, &tol()).unwrap();
        let keep: Vec<usize> = (0..m).filter(|&i| i != drop).collect();
        let sigma = invert_spd(&k, &tol()).unwrap();
        let slow = invert_spd(&sigma.submatrix(&keep), &tol()).unwrap();
        let scale = 1.0 + k.as_dmatrix().amax();
        prop_assert!(fast.max_abs_diff(&slow) <= 1e-8 * scale, "diff {}", fast.max_abs_diff(&slow));
    }

    #[test]
    fn inversion_is_an_involution(m in 1usize..=8, seed in any::<u64>()) {
        let s = random_spd(m, &mut rng(seed));
        let back = invert_spd(&invert_spd(&s, &tol()).unwrap(), &tol()).unwrap();
        prop_assert!(back.max_abs_diff(&s) <= 1e-9 * (1.0 + s.as_dmatrix().amax()));
        let det: f64 = s.as_dmatrix().determinant();
        prop_assert!((log_det_spd(&s, &tol()).unwrap() - det.ln()).abs() < 1e-9);
    }

    #[test]
    fn permutation_round_trip(m in 1usize..=8, seed in any::<u64>()) {
        let s = random_spd(m, &mut rng(seed));
        let sigma = random_ordering(m, seed ^ 1);
        let there = permute_sym(&s, &sigma).unwrap();
        prop_assert_eq!(permute_sym(&there, &sigma.inverse()).unwrap(), s);
    }

    #[test]
    fn sem_precision_round_trip(m in 1usize..=7, seed in any::<u64>()) {
        let p = random_signed_sem(m, &mut rng(seed));
        let cp = model(&p);
        let back = precision_to_sem(&cp, p.ordering(), &tol()).unwrap();
        prop_assert!((back.lambda() - p.lambda()).amax() < 1e-9);
        for i in 0..m {
            prop_assert!((back.noise_var().get(i) - p.noise_var().get(i)).abs() < 1e-9);
        }
    }

    #[test]
    fn precision_does_not_depend_on_topological_ordering(m in 1usize..=6, seed in any::<u64>()) {
        let p = random_signed_sem(m, &mut rng(seed));
        let g = cisdag_core::Dag::new(m, p.support()).unwrap();
        let base = model(&p);
        for tau in topological_orderings(&g).unwrap() {
            let other = sem_to_precision(&p.with_ordering(tau).unwrap(), &tol()).unwrap();
            prop_assert_eq!(other.precision(), base.precision());
        }
    }

    #[test]
    fn enumeration_matches_brute_force(m in 2usize..=6, seed in any::<u64>(), positive in any::<bool>()) {
        let mut g = rng(seed);
        let p = if positive {
            random_positive_sem(&random_dag(m, 0.5, &mut g), &mut g)
        } else {
            random_signed_sem(m, &mut g)
        };
        let cp = model(&p);
        let fast = sorted(enumerate_cis_orderings(&cp, &tol()).unwrap());
        prop_assert_eq!(&fast, &brute_force_cis(&cp));
        let found = find_cis_ordering_population(&cp, &RecoveryConfig::default()).unwrap();
        match found {
            Some(s) => prop_assert!(fast.contains(&s)),
            None => prop_assert!(fast.is_empty()),
        }
    }

    #[test]
    fn m_matrix_precision_is_cis_under_every_ordering(m in 2usize..=5, seed in any::<u64>()) {
        let k = random_m_matrix(m, &mut rng(seed));
        let cp = from_precision(k);
        prop_assert_eq!(enumerate_cis_orderings(&cp, &tol()).unwrap().len(), (1..=m).product::<usize>());
    }

    #[test]
    fn swapping_the_first_two_preserves_cis(m in 2usize..=6, seed in any::<u64>()) {
        let mut g = rng(seed);
        let cp = model(&random_signed_sem(m, &mut g));
        let set = enumerate_cis_orderings(&cp, &tol()).unwrap();
        for s in &set {
            prop_assert!(set.contains(&s.swap_first_two()));
        }
        for s in Ordering::all(m).iter().take(40) {
            prop_assert_eq!(is_cis(&cp, s, &tol()).unwrap(), is_cis(&cp, &s.swap_first_two(), &tol()).unwrap());
        }
    }

    #[test]
    fn prefixes_of_cis_orderings_are_cis(m in 2usize..=6, seed in any::<u64>()) {
        let mut g = rng(seed);
        let cp = model(&random_positive_sem(&random_dag(m, 0.6, &mut g), &mut g));
        for s in enumerate_cis_orderings(&cp, &tol()).unwrap().iter().take(10) {
            for k in 1..=m {
                let marg = cp.marginal(&s.as_slice()[..k], &tol()).unwrap();
                prop_assert!(is_cis(&marg, &Ordering::identity(k), &tol()).unwrap());
            }
        }
    }

    #[test]
    fn recovery_is_equivariant_under_relabeling(m in 2usize..=6, seed in any::<u64>()) {
        let mut g = rng(seed);
        let cp = model(&random_signed_sem(m, &mut g));
        let pi = random_ordering(m, seed.wrapping_add(99));
        let relabeled = cp.permuted(&pi).unwrap();
        let back = pi.inverse();
        let expected = sorted(enumerate_cis_orderings(&cp, &tol()).unwrap().iter().map(|s| s.relabeled(&back)).collect());
        let set = sorted(enumerate_cis_orderings(&relabeled, &tol()).unwrap());
        prop_assert_eq!(&set, &expected);
        let found = find_cis_ordering_population(&relabeled, &RecoveryConfig::default()).unwrap();
        prop_assert_eq!(found.is_some(), !set.is_empty());
        if let Some(s) = found {
            prop_assert!(set.contains(&s));
        }
    }

    #[test]
    fn exact_moment_data_recovers_a_cis_ordering(m in 2usize..=6, seed in any::<u64>()) {
        let p = random_cis_model(m, 0.6, (0.2, 1.5), seed).unwrap();
        let pi = random_ordering(m, seed ^ 7);
        let cp = model(&p).permuted(&pi).unwrap();
        let data = exact_moment_data(cp.sigma());
        let cfg = RecoveryConfig { epsilon_schedule: EpsilonSchedule::Constant(1e-8), ..Default::default() };
        let got = find_cis_ordering_noisy(&data, &cfg).unwrap();
        prop_assert!(is_cis(&cp, &got.ordering, &tol()).unwrap(), "{}", got.ordering);
    }

    #[test]
    fn mle_rows_are_separable(m in 2usize..=5, seed in any::<u64>()) {
        let mut g = rng(seed);
        let p = random_signed_sem(m, &mut g);
        let data = sample(&p, 60, seed);
        let sigma = random_ordering(m, seed ^ 3);
        let mut c1 = random_constraints(&sigma, seed ^ 5);
        let a = fit(&data, &sigma, &c1).unwrap();
        let cut = g.random_range(1..m);
        let c2 = random_constraints(&sigma, seed ^ 11);
        c1[cut - 1..].clone_from_slice(&c2[cut - 1..]);
        let b = fit(&data, &sigma, &c1).unwrap();
        for p in 0..cut {
            let v = sigma.at(p);
            prop_assert_eq!(a.sem.lambda().row(v), b.sem.lambda().row(v));
            prop_assert_eq!(a.residual_norms[v], b.residual_norms[v]);
        }
    }

    #[test]
    fn mle_rows_are_first_order_optimal(m in 2usize..=5, seed in any::<u64>()) {
        let mut g = rng(seed);
        let p = random_signed_sem(m, &mut g);
        let data = sample(&p, 80, seed);
        let sigma = random_ordering(m, seed ^ 3);
        let cons = random_constraints(&sigma, seed ^ 5);
        let f = fit(&data, &sigma, &cons).unwrap();
        for q in 1..m {
            let v = sigma.at(q);
            let row: Vec<f64> = f.sem.lambda().row(v).iter().copied().collect();
            let base = rss(&data, v, &row);
            let (allowed, nonneg): (Vec<usize>, bool) = match &cons[q - 1] {
                RowConstraint::Free => (sigma.as_slice()[..q].to_vec(), false),
                RowConstraint::Nonnegative => (sigma.as_slice()[..q].to_vec(), true),
                RowConstraint::Support(s) => (s.clone(), false),
                RowConstraint::NonnegativeSupport(s) => (s.clone(), true),
            };
            for j in 0..m {
                if !allowed.contains(&j) {
                    prop_assert_eq!(row[j], 0.0);
                    continue;
                }
                for step in [1e-4, -1e-4] {
                    let mut moved = row.clone();
                    moved[j] += step;
                    if nonneg && moved[j] < 0.0 {
                        continue;
                    }
                    prop_assert!(rss(&data, v, &moved) >= base - 1e-8);
                }
            }
        }
    }

    #[test]
    fn mle_likelihood_identity(m in 1usize..=5, seed in any::<u64>(), nonneg in any::<bool>()) {
        let mut g = rng(seed);
        let p = random_signed_sem(m, &mut g);
        let data = sample(&p, 50, seed);
        let sigma = random_ordering(m, seed ^ 3);
        let kind = if nonneg { RowConstraint::Nonnegative } else { RowConstraint::Free };
        let f = fit(&data, &sigma, &vec![kind; m - 1]).unwrap();
        let k_hat = sem_to_precision(&f.sem, &tol()).unwrap();
        let ll = log_likelihood(k_hat.precision(), &data.centered(), &tol()).unwrap();
        prop_assert!((ll - f.loglik).abs() < 1e-8, "{} vs {}", ll, f.loglik);
        for v in 0..m {
            let d = f.precision_diag()[v];
            prop_assert!((d * f.residual_norms[v].powi(2) / data.n() as f64 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn nonnegative_residuals_dominate_ols(m in 2usize..=5, seed in any::<u64>()) {
        let mut g = rng(seed);
        let p = random_signed_sem(m, &mut g);
        let data = sample(&p, 70, seed);
        let sigma = random_ordering(m, seed ^ 3);
        let free = fit(&data, &sigma, &vec![RowConstraint::Free; m - 1]).unwrap();
        let pos = fit(&data, &sigma, &vec![RowConstraint::Nonnegative; m - 1]).unwrap();
        for v in 0..m {
            let (a, b) = (free.residual_norms[v], pos.residual_norms[v]);
            prop_assert!(b >= a * (1.0 - 1e-12));
            let feasible = free.sem.lambda().row(v).iter().all(|&c| c >= 0.0);
            if feasible {
                prop_assert!((a - b).abs() <= 1e-10 * a);
            } else {
                prop_assert!(b > a * (1.0 + 1e-14));
            }
        }
    }

    #[test]
    fn covered_flips_stay_in_the_class(m in 2usize..=6, seed in any::<u64>()) {
        let g = random_dag(m, 0.5, &mut rng(seed));
        for (i, j) in covered_edges(&g) {
            let h = g.reversed(i, j).unwrap();
            prop_assert!(markov_equivalent(&g, &h).unwrap());
        }
    }

    #[test]
    fn closures_agree_and_nest(m in 2usize..=5, seed in any::<u64>()) {
        let g = random_dag(m, 0.5, &mut rng(seed));
        let mk = flip_closure(&g, FlipRule::Covered, Traversal::BreadthFirst).unwrap();
        let cis = flip_closure(&g, FlipRule::TriviallyCovered, Traversal::BreadthFirst).unwrap();
        prop_assert_eq!(&mk, &flip_closure(&g, FlipRule::Covered, Traversal::DepthFirst).unwrap());
        prop_assert_eq!(&cis, &flip_closure(&g, FlipRule::TriviallyCovered, Traversal::DepthFirst).unwrap());
        prop_assert!(cis.is_subset(&mk));
        for h in &mk {
            prop_assert!(markov_equivalent(&g, h).unwrap());
        }
    }

    #[test]
    fn positive_dag_models_are_cis_along_topological_orderings(m in 2usize..=6, seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_dag(m, 0.5, &mut r);
        let cp = model(&random_positive_sem(&g, &mut r));
        for tau in topological_orderings(&g).unwrap() {
            prop_assert!(is_cis(&cp, &tau, &tol()).unwrap());
        }
    }
}
