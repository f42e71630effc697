use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::select_columns;
use crate::rng::rng_from_seed;

/// Largest support count enumerated exhaustively under [`RipMethod::Auto`].
pub const EXHAUSTIVE_LIMIT: u128 = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RipMethod {
    /// Exhaustive when the support count is at most [`EXHAUSTIVE_LIMIT`].
    Auto,
    Exhaustive,
    Sampled,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RipEstimate {
    pub s: usize,
    /// Exact `δ_S` for exhaustive runs, a lower bound for sampled runs.
    pub delta_lower: f64,
    /// Number of supports evaluated.
    pub trials: usize,
    pub method: RipMethod,
}

/// Scales every column by `1/√rows`, so that i.i.d. unit-variance entries
/// give columns of unit expected norm.
pub fn normalize_columns(g: &DMatrix<f64>) -> DMatrix<f64> {
    g / (g.nrows() as f64).sqrt()
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u128::MAX / (n as u128 + 1) {
            return u128::MAX;
        }
    }
    acc
}

fn distortion(g: &DMatrix<f64>, support: &[usize]) -> f64 {
    let sub = select_columns(g, support);
    let eig = SymmetricEigen::new(sub.transpose() * sub).eigenvalues;
    (eig.max() - 1.0).max(1.0 - eig.min())
}

/// Restricted isometry constant of `g` at sparsity `s`, measured on `g` as
/// given (normalize first with [`normalize_columns`] if needed).
///
/// Sampled runs evaluate `trials` random supports plus, for every column,
/// the support formed by that column and its `s − 1` most coherent partners.
pub fn estimate_rip(g: &DMatrix<f64>, s: usize, trials: usize, method: RipMethod, seed: u64) -> Result<RipEstimate> {
    let n = g.ncols();
    if s == 0 || s > n {
        return Err(Error::InvalidArgument(format!("sparsity {s} must be in 1..={n}")));
    }
    let count = binomial(n, s);
    let exhaustive = match method {
        RipMethod::Exhaustive => {
            if count > EXHAUSTIVE_LIMIT {
                return Err(Error::SizeLimit(format!("{count} supports exceed {EXHAUSTIVE_LIMIT}")));
            }
            true
        }
        RipMethod::Auto => count <= EXHAUSTIVE_LIMIT,
        RipMethod::Sampled => false,
    };
    if exhaustive {
        let mut support: Vec<usize> = (0..s).collect();
        let mut worst: f64 = 0.0;
        let mut evaluated = 0;
        loop {
            worst = worst.max(distortion(g, &support));
            evaluated += 1;
            // Advance to the next combination in lexicographic order.
            let Some(i) = (0..s).rev().find(|&i| support[i] < n - s + i) else {
                break;
            };
            support[i] += 1;
            for j in i + 1..s {
                support[j] = support[j - 1] + 1;
            }
        }
        return Ok(RipEstimate {
            s,
            delta_lower: worst,
            trials: evaluated,
            method: RipMethod::Exhaustive,
        });
    }

    let mut worst: f64 = 0.0;
    let mut evaluated = 0;
    if s > 1 {
        let gram = g.transpose() * g;
        for j in 0..n {
            let mut partners: Vec<usize> = (0..n).filter(|&i| i != j).collect();
            partners.sort_by(|&a, &b| gram[(j, b)].abs().total_cmp(&gram[(j, a)].abs()));
            let mut support = vec![j];
            support.extend_from_slice(&partners[..s - 1]);
            worst = worst.max(distortion(g, &support));
            evaluated += 1;
        }
    } else {
        for j in 0..n {
            worst = worst.max(distortion(g, &[j]));
            evaluated += 1;
        }
    }
    let mut rng = rng_from_seed(seed);
    for _ in 0..trials {
        let support = sample(&mut rng, n, s).into_vec();
        worst = worst.max(distortion(g, &support));
        evaluated += 1;
    }
    Ok(RipEstimate {
        s,
        delta_lower: worst,
        trials: evaluated,
        method: RipMethod::Sampled,
    })
}
