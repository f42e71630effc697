use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::numerical_rank;

const RANK_TOL: f64 = 1e-10;

/// `argmin ‖A v − b‖₂` through a Householder QR of `A`.
pub fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<Vec<f64>> {
    let (m, n) = a.shape();
    if b.len() != m {
        return Err(Error::DimensionMismatch {
            what: "least-squares right-hand side",
            expected: m,
            found: b.len(),
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    if m < n {
        return Err(Error::RankDeficient { rank: numerical_rank(a), cols: n });
    }
    let qr = a.clone().qr();
    let r = qr.r();
    let scale = (0..n).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if scale == 0.0 || (0..n).any(|i| r[(i, i)].abs() <= RANK_TOL * scale) {
        return Err(Error::RankDeficient { rank: numerical_rank(a), cols: n });
    }
    let mut qtb = b.clone();
    qr.q_tr_mul(&mut qtb);
    let rhs = qtb.rows(0, n).into_owned();
    let v = r
        .solve_upper_triangular(&rhs)
        .ok_or_else(|| Error::Singular("triangular factor".into()))?;
    Ok(v.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn identity_returns_rhs() {
        let b = DVector::from_vec(vec![1.0, -2.0, 3.5]);
        let v = least_squares(&DMatrix::identity(3, 3), &b).unwrap();
        assert_eq!(v, vec![1.0, -2.0, 3.5]);
    }

    #[test]
    fn consistent_system_has_zero_residual() {
        let a = DMatrix::from_row_slice(4, 2, &[1.0, 2.0, 0.0, 1.0, 3.0, -1.0, 2.0, 2.0]);
        let x = DVector::from_vec(vec![0.25, -1.5]);
        let b = &a * &x;
        let v = DVector::from_vec(least_squares(&a, &b).unwrap());
        assert!((&a * v - b).amax() < 1e-13);
    }

    #[test]
    fn agrees_with_normal_equations() {
        let mut rng = rng_from_seed(5);
        let a = DMatrix::from_fn(50, 3, |_, _| StandardNormal.sample(&mut rng));
        let b = DVector::from_fn(50, |_, _| StandardNormal.sample(&mut rng));
        let v = DVector::from_vec(least_squares(&a, &b).unwrap());
        let normal = (a.transpose() * &a).cholesky().unwrap().solve(&(a.transpose() * &b));
        assert!((&v - normal).amax() < 1e-8);
        assert!((a.transpose() * (&a * &v - &b)).amax() < 1e-10);
    }

    #[test]
    fn rank_deficient_reports_rank() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0]);
        match least_squares(&a, &DVector::zeros(3)) {
            Err(Error::RankDeficient { rank, cols }) => assert_eq!((rank, cols), (1, 2)),
            other => panic!("unexpected {other:?}"),
        }
    }
}
