//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub fn l1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

pub fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn linf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Relative rank tolerance for the diagonal of R.
const RANK_TOL: f64 = 1e-10;

/// Orthonormal basis of `range(a)` (thin Q of a Householder QR). Errors
/// when the columns are numerically dependent.
pub fn orthonormal_basis(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (m, n) = a.shape();
    if n == 0 {
        return Ok(DMatrix::zeros(m, 0));
    }
    if m < n {
        return Err(Error::RankDeficient { rank: m, cols: n });
    }
    let qr = a.clone().qr();
    let r = qr.r();
    check_rank(&r, a)?;
    Ok(qr.q())
}

fn check_rank(r: &DMatrix<f64>, a: &DMatrix<f64>) -> Result<()> {
    let n = r.ncols();
    let scale = (0..n).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    let deficient = scale == 0.0 || (0..n).any(|i| r[(i, i)].abs() <= RANK_TOL * scale);
    if deficient {
        return Err(Error::RankDeficient {
            rank: numerical_rank(a),
            cols: n,
        });
    }
    Ok(())
}

pub fn numerical_rank(a: &DMatrix<f64>) -> usize {
    if a.is_empty() {
        return 0;
    }
    let sv = a.clone().svd(false, false).singular_values;
    let top = sv.iter().copied().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > RANK_TOL * top.max(f64::MIN_POSITIVE)).count()
}

/// `v - Q (Qᵀ v)` column-wise.
pub fn project_out(q: &DMatrix<f64>, v: &DMatrix<f64>) -> DMatrix<f64> {
    if q.ncols() == 0 {
        return v.clone();
    }
    v - q * (q.transpose() * v)
}

pub fn project_out_vec(q: &DMatrix<f64>, v: &DVector<f64>) -> DVector<f64> {
    if q.ncols() == 0 {
        return v.clone();
    }
    v - q * (q.transpose() * v)
}

/// Orthonormal basis of the orthogonal complement of `range(q)`, where `q`
/// already has orthonormal columns. Built by two-pass Gram–Schmidt over
/// the standard basis, which is deterministic.
pub fn orthonormal_complement(q: &DMatrix<f64>) -> DMatrix<f64> {
    let m = q.nrows();
    let target = m - q.ncols();
    let mut basis: Vec<DVector<f64>> = q.column_iter().map(|c| c.into_owned()).collect();
    let mut out = Vec::with_capacity(target);
    for i in 0..m {
        if out.len() == target {
            break;
        }
        let mut v = DVector::zeros(m);
        v[i] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let d = b.dot(&v);
                v.axpy(-d, b, 1.0);
            }
        }
        let norm = v.norm();
        if norm > 0.3 {
            v /= norm;
            basis.push(v.clone());
            out.push(v);
        }
    }
    if out.is_empty() {
        DMatrix::zeros(m, 0)
    } else {
        DMatrix::from_columns(&out)
    }
}

/// `cond(AᵀA) = (σ_max / σ_min)²`; infinite when rank deficient.
pub fn gram_condition(a: &DMatrix<f64>) -> f64 {
    if a.ncols() == 0 {
        return 1.0;
    }
    if a.nrows() < a.ncols() {
        return f64::INFINITY;
    }
    let sv = a.clone().svd(false, false).singular_values;
    let hi = sv.iter().copied().fold(0.0, f64::max);
    let lo = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        (hi / lo).powi(2)
    }
}

pub fn select_columns(a: &DMatrix<f64>, cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), cols.len(), |i, j| a[(i, cols[j])])
}

pub fn select_rows(a: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), a.ncols(), |i, j| a[(rows[i], j)])
}

/// Orthonormal basis of `range(a)` from the SVD; works for any rank.
pub fn range_basis(a: &DMatrix<f64>) -> DMatrix<f64> {
    let m = a.nrows();
    if a.is_empty() {
        return DMatrix::zeros(m, 0);
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors");
    let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| top > 0.0 && svd.singular_values[k] > RANK_TOL * top)
        .collect();
    select_columns(&u, &keep)
}

/// Minimum-norm least-squares solution `a⁺ b`.
pub fn pinv_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Vec<f64> {
    if a.ncols() == 0 {
        return Vec::new();
    }
    let svd = a.clone().svd(true, true);
    let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
    match svd.solve(b, RANK_TOL * top.max(f64::MIN_POSITIVE)) {
        Ok(v) => v.iter().copied().collect(),
        Err(_) => vec![0.0; a.ncols()],
    }
}
