use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{l2, linf, orthonormal_basis, select_rows};
use crate::solvers::least_squares;

/// `n × p` lag matrix with `row t = (v_{t−1}, …, v_{t−p})`, zero-padded.
pub fn lag_matrix(v: &[f64], p: usize) -> DMatrix<f64> {
    DMatrix::from_fn(v.len(), p, |t, c| if t > c { v[t - 1 - c] } else { 0.0 })
}

/// The LASSO solution predicted when the sign pattern is recovered:
/// `û_I = (P_IᵀP_I)⁻¹(P_Iᵀe − λ·sgn(u*_I)) + u*_I`, `û_{Iᶜ} = 0`,
/// `â = −(YᵀY)⁻¹Yᵀ(y − û)`, with `P = I − Y(YᵀY)⁻¹Yᵀ` and
/// `e = y + Y a* − u*`.
pub fn theorem2_closed_form(
    y: &[f64],
    y_lag: &DMatrix<f64>,
    u_star: &[f64],
    e: &[f64],
    lambda: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = y.len();
    for (what, len) in [("regressor rows", y_lag.nrows()), ("u_star", u_star.len()), ("noise", e.len())] {
        if len != n {
            return Err(Error::DimensionMismatch {
                what,
                expected: n,
                found: len,
            });
        }
    }
    let q = orthonormal_basis(y_lag).map_err(|_| Error::Singular("YᵀY".into()))?;
    let support: Vec<usize> = (0..n).filter(|&i| u_star[i] != 0.0).collect();
    let mut u_hat = vec![0.0; n];
    if !support.is_empty() {
        // P_I = e_I-columns minus Q Q_Iᵀ.
        let q_i = select_rows(&q, &support);
        let mut p_i = -(&q * q_i.transpose());
        for (c, &i) in support.iter().enumerate() {
            p_i[(i, c)] += 1.0;
        }
        let e = DVector::from_column_slice(e);
        let signs = DVector::from_iterator(support.len(), support.iter().map(|&i| u_star[i].signum()));
        let rhs = p_i.transpose() * e - signs * lambda;
        let delta = (p_i.transpose() * &p_i)
            .cholesky()
            .ok_or_else(|| Error::Singular("P_IᵀP_I".into()))?
            .solve(&rhs);
        for (c, &i) in support.iter().enumerate() {
            u_hat[i] = delta[c] + u_star[i];
        }
    }
    let target = DVector::from_iterator(n, (0..n).map(|i| u_hat[i] - y[i]));
    let a_hat = least_squares(y_lag, &target)?;
    Ok((u_hat, a_hat))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Theorem2Report {
    pub n: usize,
    pub p: usize,
    pub sigma: f64,
    pub lambda: f64,
    pub x_norm: f64,
    pub x_max: f64,
    /// `λ_min(X₂ᵀX₂)`.
    pub lambda_min: f64,
    /// Implied constant `c = ‖x‖₂²/λ_min(X₂ᵀX₂)`.
    pub c: f64,
    /// `c > 1` and `‖x‖²/c ≥ 4npσ²/(√2−1)²`.
    pub condition1: bool,
    /// `‖X₁ᵀ sgn(u*_I)‖∞`.
    pub sign_correlation: f64,
    /// `‖X₁ᵀ sgn(u*_I)‖∞ ≤ ‖x‖₂ √ln n`.
    pub condition2: bool,
    /// `x_max ≥ 2σ√ln n`.
    pub condition3_noise: bool,
    /// `x_max²/‖x‖² ≤ min(1/(4c√(2pn)), (1/(24cp√ln n))²)`.
    pub condition3_peak: bool,
    pub peak_ratio: f64,
    pub peak_bound: f64,
    /// `6σ·p·a_max·√ln n`.
    pub lambda_floor: f64,
    pub lambda_ok: bool,
    pub u_min: f64,
    /// `u_min ≥ 2λ`.
    pub u_min_ok: bool,
    pub all_pass: bool,
}

/// Evaluates conditions (1)–(3) and the `λ` requirements for the blind
/// setting. Logarithms are natural.
pub fn check_theorem2_conditions(x: &[f64], u_star: &[f64], a_star: &[f64], sigma: f64, lambda: f64) -> Result<Theorem2Report> {
    let n = x.len();
    let p = a_star.len();
    if u_star.len() != n {
        return Err(Error::DimensionMismatch {
            what: "u_star",
            expected: n,
            found: u_star.len(),
        });
    }
    let lag = lag_matrix(x, p);
    let support: Vec<usize> = (0..n).filter(|&i| u_star[i] != 0.0).collect();
    let off: Vec<usize> = (0..n).filter(|&i| u_star[i] == 0.0).collect();
    let x1 = select_rows(&lag, &support);
    let x2 = select_rows(&lag, &off);
    let x_norm = l2(x);
    let x_norm_sq = x_norm * x_norm;
    let x_max = linf(x);
    let ln_n = (n as f64).ln();
    let nf = n as f64;
    let pf = p as f64;

    let lambda_min = if p == 0 {
        f64::INFINITY
    } else {
        SymmetricEigen::new(x2.transpose() * &x2).eigenvalues.min()
    };
    let c = if lambda_min > 0.0 { x_norm_sq / lambda_min } else { f64::INFINITY };
    let noise_floor = 4.0 * nf * pf * sigma * sigma / (2f64.sqrt() - 1.0).powi(2);
    let condition1 = c > 1.0 && c.is_finite() && x_norm_sq / c >= noise_floor;

    let signs = DVector::from_iterator(support.len(), support.iter().map(|&i| u_star[i].signum()));
    let sign_correlation = if support.is_empty() || p == 0 {
        0.0
    } else {
        (x1.transpose() * signs).amax()
    };
    let condition2 = sign_correlation <= x_norm * ln_n.sqrt();

    let condition3_noise = x_max >= 2.0 * sigma * ln_n.sqrt();
    let peak_ratio = if x_norm_sq > 0.0 { x_max * x_max / x_norm_sq } else { f64::INFINITY };
    let peak_bound = (1.0 / (4.0 * c * (2.0 * pf * nf).sqrt())).min((1.0 / (24.0 * c * pf * ln_n.sqrt())).powi(2));
    let condition3_peak = peak_ratio <= peak_bound;

    let a_max = linf(a_star);
    let lambda_floor = 6.0 * sigma * pf * a_max * ln_n.sqrt();
    let lambda_ok = lambda >= lambda_floor;
    let u_min = support.iter().map(|&i| u_star[i].abs()).fold(f64::INFINITY, f64::min);
    let u_min = if support.is_empty() { 0.0 } else { u_min };
    let u_min_ok = !support.is_empty() && u_min >= 2.0 * lambda;
    let all_pass = condition1 && condition2 && condition3_noise && condition3_peak && lambda_ok && u_min_ok;
    Ok(Theorem2Report {
        n,
        p,
        sigma,
        lambda,
        x_norm,
        x_max,
        lambda_min,
        c,
        condition1,
        sign_correlation,
        condition2,
        condition3_noise,
        condition3_peak,
        peak_ratio,
        peak_bound,
        lambda_floor,
        lambda_ok,
        u_min,
        u_min_ok,
        all_pass,
    })
}
