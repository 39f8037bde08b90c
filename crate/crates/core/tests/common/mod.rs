#![allow(dead_code)]

use cisdag_core::dag::Dag;
use cisdag_core::matrix::{PosDiagonal, SymMatrix, Tolerance};
use cisdag_core::model::{sem_to_precision, CovariancePair, SemParams};
use cisdag_core::ordering::Ordering;
use cisdag_core::positivity::is_cis;
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn tol() -> Tolerance {
    Tolerance::default()
}

pub fn sym(rows: &[&[f64]]) -> SymMatrix {
    SymMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

pub fn from_sigma(s: SymMatrix) -> CovariancePair {
    CovariancePair::from_sigma(s, &tol()).unwrap()
}

pub fn from_precision(k: SymMatrix) -> CovariancePair {
    CovariancePair::from_precision(k, &tol()).unwrap()
}

pub fn ord(s: &str) -> Ordering {
    s.parse().unwrap()
}

pub fn ords(list: &[&str]) -> Vec<Ordering> {
    let mut v: Vec<Ordering> = list.iter().map(|s| ord(s)).collect();
    v.sort();
    v
}

pub fn sorted(mut v: Vec<Ordering>) -> Vec<Ordering> {
    v.sort();
    v
}

/// Four-cycle covariance as printed (two decimals).
pub fn cycle4_sigma_printed() -> SymMatrix {
    sym(&[
        &[1.0, 0.75, 0.50, 0.14],
        &[0.75, 1.0, 0.81, 0.50],
        &[0.50, 0.81, 1.0, 0.75],
        &[0.14, 0.50, 0.75, 1.0],
    ])
}

/// Exact covariance whose two-decimal rounding is the printed one and whose
/// inverse has exact zeros at (1,3) and (2,4).
pub fn cycle4_sigma() -> SymMatrix {
    sym(&[
        &[1.0, 0.75, 0.5, 3.0 / 22.0],
        &[0.75, 1.0, 13.0 / 16.0, 0.5],
        &[0.5, 13.0 / 16.0, 1.0, 0.75],
        &[3.0 / 22.0, 0.5, 0.75, 1.0],
    ])
}

pub fn cycle4_k_printed() -> SymMatrix {
    sym(&[
        &[2.77, -2.51, 0.0, 0.88],
        &[-2.51, 5.49, -3.2, 0.0],
        &[0.0, -3.2, 5.49, -2.51],
        &[0.88, 0.0, -2.51, 2.77],
    ])
}

pub fn cycle4_marginal_134_printed() -> SymMatrix {
    sym(&[&[1.61, -1.47, 0.88], &[-1.47, 3.62, -2.51], &[0.88, -2.51, 2.77]])
}

pub fn cycle4_orderings() -> Vec<Ordering> {
    ords(&["1,4,3,2", "4,1,3,2", "1,4,2,3", "4,1,2,3"])
}

pub fn pa_sigma() -> SymMatrix {
    sym(&[
        &[5.0, 4.0, 7.0, 8.0],
        &[4.0, 9.0, 8.0, 7.0],
        &[7.0, 8.0, 11.0, 11.0],
        &[8.0, 7.0, 11.0, 14.0],
    ])
}

pub fn pa_precision() -> SymMatrix {
    sym(&[
        &[94.0, 25.0, -55.0, -23.0],
        &[25.0, 7.0, -15.0, -6.0],
        &[-55.0, -15.0, 33.0, 13.0],
        &[-23.0, -6.0, 13.0, 6.0],
    ])
}

/// Collider `1 → 3 ← 2` with unit coefficients and noise.
pub fn collider_precision() -> SymMatrix {
    sym(&[&[2.0, 1.0, -1.0], &[1.0, 2.0, -1.0], &[-1.0, -1.0, 1.0]])
}

/// CIS covariance whose {1,3,4} marginal is not CIS.
pub fn fraction_sigma() -> SymMatrix {
    sym(&[
        &[0.25, 0.25, 0.75, 29.0 / 16.0],
        &[0.25, 1.25, 1.75, 77.0 / 16.0],
        &[0.75, 1.75, 4.25, 167.0 / 16.0],
        &[29.0 / 16.0, 77.0 / 16.0, 167.0 / 16.0, 1737.0 / 64.0],
    ])
}

pub fn fraction_marginal_134() -> SymMatrix {
    sym(&[
        &[205.0 / 24.0, -23.0 / 12.0, 1.0 / 6.0],
        &[-23.0 / 12.0, 14.0 / 3.0, -5.0 / 3.0],
        &[1.0 / 6.0, -5.0 / 3.0, 2.0 / 3.0],
    ])
}

/// `U Uᵀ` for a unit upper triangular `U` given row by row.
pub fn uut(rows: &[&[f64]]) -> SymMatrix {
    let m = rows.len();
    let u = DMatrix::from_fn(m, m, |i, j| rows[i][j]);
    SymMatrix::symmetrized(&u * u.transpose())
}

pub fn nonconvex_k1() -> SymMatrix {
    uut(&[
        &[1.0, -1.0, -1.0, -4.0],
        &[0.0, 1.0, 0.0, 0.0],
        &[0.0, 0.0, 1.0, -3.0],
        &[0.0, 0.0, 0.0, 1.0],
    ])
}

pub fn nonconvex_k2() -> SymMatrix {
    sym(&[
        &[2.0, -1.0, 0.0, 0.0],
        &[-1.0, 2.0, -1.0, 0.0],
        &[0.0, -1.0, 2.0, -1.0],
        &[0.0, 0.0, -1.0, 1.0],
    ])
}

/// `U Uᵀ` for the four-variable model with exactly two CIS orderings.
pub fn two_ordering_precision() -> SymMatrix {
    uut(&[
        &[1.0, 0.0, -1.0, -2.0],
        &[0.0, 1.0, -1.0, -1.0],
        &[0.0, 0.0, 1.0, -1.0],
        &[0.0, 0.0, 0.0, 1.0],
    ])
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random SPD matrix `AAᵀ + δI` with standard-uniform-ish entries.
pub fn random_spd(m: usize, rng: &mut ChaCha8Rng) -> SymMatrix {
    let a = DMatrix::from_fn(m, m, |_, _| rng.random_range(-1.0..1.0));
    let mut s = &a * a.transpose();
    for i in 0..m {
        s[(i, i)] += 0.2 + rng.random_range(0.0..0.5);
    }
    SymMatrix::symmetrized(s)
}

/// Random strictly diagonally dominant M-matrix.
pub fn random_m_matrix(m: usize, rng: &mut ChaCha8Rng) -> SymMatrix {
    let mut k = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..i {
            let v = if rng.random_bool(0.6) { -rng.random_range(0.0..1.0) } else { 0.0 };
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    for i in 0..m {
        let off: f64 = (0..m).filter(|&j| j != i).map(|j| -k[(i, j)]).sum();
        k[(i, i)] = off + rng.random_range(0.1..1.0);
    }
    SymMatrix::symmetrized(k)
}

/// Random DAG with a hidden uniformly random topological ordering.
pub fn random_dag(m: usize, edge_prob: f64, rng: &mut ChaCha8Rng) -> Dag {
    let mut perm: Vec<usize> = (0..m).collect();
    perm.shuffle(rng);
    let mut edges = Vec::new();
    for q in 0..m {
        for p in 0..q {
            if rng.random_bool(edge_prob) {
                edges.push((perm[p], perm[q]));
            }
        }
    }
    Dag::new(m, edges).unwrap()
}

/// Positive-coefficient SEM on `g` with random noise variances.
pub fn random_positive_sem(g: &Dag, rng: &mut ChaCha8Rng) -> SemParams {
    let m = g.m();
    let mut lambda = DMatrix::zeros(m, m);
    for &(a, b) in g.edges() {
        lambda[(b, a)] = rng.random_range(0.05..2.0);
    }
    let noise = (0..m).map(|_| rng.random_range(0.2..2.0)).collect();
    SemParams::new(g.topological_order().unwrap(), lambda, PosDiagonal::new(noise).unwrap(), None).unwrap()
}

/// Random SEM with coefficients of both signs on a random DAG.
pub fn random_signed_sem(m: usize, rng: &mut ChaCha8Rng) -> SemParams {
    let g = random_dag(m, 0.6, rng);
    let mut lambda = DMatrix::zeros(m, m);
    for &(a, b) in g.edges() {
        lambda[(b, a)] = rng.random_range(-1.5..1.5);
    }
    let noise = (0..m).map(|_| rng.random_range(0.2..2.0)).collect();
    SemParams::new(g.topological_order().unwrap(), lambda, PosDiagonal::new(noise).unwrap(), None).unwrap()
}

pub fn model(p: &SemParams) -> CovariancePair {
    sem_to_precision(p, &tol()).unwrap()
}

/// `{σ : is_cis(cp, σ)}` by checking every permutation.
pub fn brute_force_cis(cp: &CovariancePair) -> Vec<Ordering> {
    Ordering::all(cp.dim())
        .into_iter()
        .filter(|s| is_cis(cp, s, &tol()).unwrap())
        .collect()
}

/// Every DAG on `m` nodes: each pair is absent, forward or backward.
pub fn all_dags(m: usize) -> Vec<Dag> {
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| ((i + 1)..m).map(move |j| (i, j))).collect();
    let total = 3usize.pow(pairs.len() as u32);
    let mut out = Vec::new();
    for code in 0..total {
        let mut c = code;
        let mut edges = Vec::new();
        for &(i, j) in &pairs {
            match c % 3 {
                1 => edges.push((i, j)),
                2 => edges.push((j, i)),
                _ => {}
            }
            c /= 3;
        }
        if let Ok(g) = Dag::new(m, edges) {
            out.push(g);
        }
    }
    out
}

pub fn assert_close(a: &SymMatrix, b: &SymMatrix, atol: f64) {
    let d = a.max_abs_diff(b);
    assert!(d <= atol, "max abs difference {d:e} exceeds {atol:e}\nleft: {:?}\nright: {:?}", a.to_rows(), b.to_rows());
}
