//! Seeded sampling from linear Gaussian SEMs.
//!
//! Rows are generated in blocks of [`BLOCK_ROWS`]; block `b` draws from its
//! own ChaCha8 stream seeded with `seed ^ splitmix64(b)`. Output is therefore
//! bit-identical for any number of worker threads.

use nalgebra::DMatrix;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::matrix::PosDiagonal;
use crate::model::SemParams;
use crate::ordering::Ordering;

pub const BLOCK_ROWS: usize = 512;

#[derive(Debug, Clone, PartialEq)]
pub struct SimSpec {
    pub sem: SemParams,
    pub n: usize,
    pub seed: u64,
}

/// SplitMix64 finalizer, used to decorrelate per-block seeds.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the independent stream with index `stream`.
pub fn split_seed(seed: u64, stream: u64) -> u64 {
    seed ^ splitmix64(stream)
}

/// Uniform on the open interval (0, 1) from the top 53 bits.
fn open_unit(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

pub fn sample_sem(spec: &SimSpec) -> Result<Dataset> {
    if spec.n == 0 {
        return Err(Error::InvalidInput("sample size must be at least 1".into()));
    }
    let sem = &spec.sem;
    let m = sem.dim();
    let order = sem.ordering().as_slice();
    let sd: Vec<f64> = sem.noise_var().values().iter().map(|v| v.sqrt()).collect();
    // Parents of each variable with their coefficients.
    let parents: Vec<Vec<(usize, f64)>> = (0..m)
        .map(|i| {
            (0..m)
                .filter(|&j| sem.lambda()[(i, j)] != 0.0)
                .map(|j| (j, sem.lambda()[(i, j)]))
                .collect()
        })
        .collect();
    let normal = Normal::standard();
    let blocks = spec.n.div_ceil(BLOCK_ROWS);

    let chunks: Vec<Vec<f64>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let rows = BLOCK_ROWS.min(spec.n - b * BLOCK_ROWS);
            let mut rng = ChaCha8Rng::seed_from_u64(split_seed(spec.seed, b as u64));
            let mut out = vec![0.0; rows * m];
            for r in 0..rows {
                let row = &mut out[r * m..(r + 1) * m];
                for &i in order {
                    let z = normal.inverse_cdf(open_unit(&mut rng));
                    let drift: f64 = parents[i].iter().map(|&(j, c)| c * row[j]).sum();
                    row[i] = sem.mean()[i] + drift + sd[i] * z;
                }
            }
            out
        })
        .collect();

    let flat: Vec<f64> = chunks.concat();
    Dataset::new(DMatrix::from_row_slice(spec.n, m, &flat))
}

/// Random SEM with identity ordering, independent edges `j → i` (`j < i`)
/// with probability `edge_prob`, coefficients uniform on `[lo, hi]` and unit
/// noise variances.
pub fn random_cis_model(m: usize, edge_prob: f64, coeff_range: (f64, f64), seed: u64) -> Result<SemParams> {
    let (lo, hi) = coeff_range;
    if !(0.0..=1.0).contains(&edge_prob) {
        return Err(Error::InvalidInput(format!("edge probability {edge_prob} is outside [0, 1]")));
    }
    if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
        return Err(Error::InvalidInput(format!("coefficient range [{lo}, {hi}] must satisfy 0 <= lo <= hi")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lambda = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..i {
            if open_unit(&mut rng) < edge_prob {
                lambda[(i, j)] = lo + (hi - lo) * open_unit(&mut rng);
            }
        }
    }
    SemParams::new(Ordering::identity(m), lambda, PosDiagonal::ones(m), None)
}
