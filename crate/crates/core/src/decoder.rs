//! End-to-end decoders: compressed AR, blind deconvolution, ARMA with known
//! or unknown zeros, and non-causal AR.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{gram_condition, l2, linf, numerical_rank, orthonormal_basis, orthonormal_complement, pinv_solve};
use crate::sensing::{build_regressor, BoundarySamples, RegressorInputs, RegressorSystem, RegressorVariant, SensingOperator};
use crate::signal::{ar_forward, arma_forward, ma_matrix, noncausal_forward, ArModel, ArmaModel, Boundary, NoncausalArModel};
use crate::solvers::{
    least_squares, solve_l1_ball, solve_l1_equality, solve_lasso_problem, L1Problem, Mode, SolveReport, SolveStatus,
    SolverOptions,
};

/// Largest `cond(YᵀY)` accepted by the projected formulation.
pub const MAX_REGRESSOR_CONDITION: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecodeMode {
    /// Minimize over `(u, a)` jointly.
    Joint,
    /// Eliminate `a` by projecting onto the orthogonal complement of
    /// `range(Y)`, then recover `a` by least squares.
    Projected,
}

impl std::str::FromStr for DecodeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "joint" => Ok(DecodeMode::Joint),
            "projected" => Ok(DecodeMode::Projected),
            other => Err(Error::InvalidArgument(format!("unknown decode mode '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Success {
    Exact,
    Approx,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub u: Vec<f64>,
    pub a: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DecodeFlags {
    /// `â` has a pole on or outside the unit circle; `x̂` was still propagated.
    pub unstable_a: bool,
    /// `Y` is rank deficient (for example `y = 0`), so `â` is not identified;
    /// the minimum-norm value is reported.
    pub a_indeterminate: bool,
    /// The program is known to be biased (open-boundary LASSO path).
    pub biased: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub round: usize,
    pub stage: usize,
    pub epsilon: f64,
    pub b: Vec<f64>,
    pub residual_norm: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecodeResult {
    pub u_hat: Vec<f64>,
    pub a_hat: Vec<f64>,
    pub b_hat: Option<Vec<f64>>,
    pub x_hat: Vec<f64>,
    pub report: SolveReport,
    pub success: Option<Success>,
    pub flags: DecodeFlags,
    /// Per-round `b̂` of the iterative ARMA decoder.
    pub trajectory: Vec<TrajectoryPoint>,
    /// `‖Gsub B û − B' Gsub û‖∞` for the known-zeros decoder, where `B'`
    /// is the `(m−p)`-sized counterpart of `B`; nonzero only near boundaries.
    pub commutation_gap: Option<f64>,
}

impl DecodeResult {
    pub fn score_against(&mut self, truth: &GroundTruth) -> Success {
        let s = score(&self.u_hat, &self.a_hat, truth);
        self.success = Some(s);
        s
    }
}

/// Indices with `|v_i| > threshold`.
pub fn thresholded_support(v: &[f64], threshold: f64) -> Vec<usize> {
    (0..v.len()).filter(|&i| v[i].abs() > threshold).collect()
}

/// Exact: thresholded supports agree, `‖û−u*‖₂/‖u*‖₂ ≤ 1e−4` and
/// `‖â−a*‖∞ ≤ 1e−3`. Approx: supports agree only. The threshold is
/// `1e−6·max|u*|`. With `u* = 0`, `a` is not identifiable and only the
/// support is compared.
pub fn score(u_hat: &[f64], a_hat: &[f64], truth: &GroundTruth) -> Success {
    let beta_max = linf(&truth.u);
    let thr = 1e-6 * if beta_max > 0.0 { beta_max } else { 1.0 };
    let same_support = thresholded_support(u_hat, thr) == thresholded_support(&truth.u, thr);
    if !same_support {
        return Success::Failed;
    }
    if beta_max == 0.0 {
        return Success::Exact;
    }
    let diff: Vec<f64> = u_hat.iter().zip(&truth.u).map(|(a, b)| a - b).collect();
    let rel = l2(&diff) / l2(&truth.u);
    let a_ok = a_hat.len() == truth.a.len() && a_hat.iter().zip(&truth.a).all(|(x, y)| (x - y).abs() <= 1e-3);
    if rel <= 1e-4 && a_ok {
        Success::Exact
    } else {
        Success::Approx
    }
}

/// Forward propagation of the estimated model driven by `û`.
pub fn reconstruct_x(a_hat: &[f64], u_hat: &[f64], b_hat: Option<&[f64]>) -> Vec<f64> {
    let ar = ArModel::new(a_hat.to_vec());
    match b_hat {
        Some(b) if !b.is_empty() => arma_forward(&ArmaModel::new(ar, b.to_vec()), u_hat),
        _ => ar_forward(&ar, u_hat),
    }
}

fn stability_flag(a_hat: &[f64]) -> bool {
    !a_hat.is_empty() && !ArModel::new(a_hat.to_vec()).is_stable()
}

fn require_solved(report: &SolveReport) -> Result<()> {
    if report.status == SolveStatus::Infeasible {
        return Err(Error::Infeasible("no (u, a) satisfies the measurement equations".into()));
    }
    Ok(())
}

/// `â` from `Y a = Gsub û − rhs`; minimum-norm when `Y` is rank deficient.
fn recover_a(sys: &RegressorSystem, u_hat: &[f64]) -> Result<(Vec<f64>, bool)> {
    let target = &sys.g_sub * DVector::from_column_slice(u_hat) - &sys.rhs;
    fit_free(&sys.y_lag, &target)
}

fn fit_free(y_lag: &DMatrix<f64>, target: &DVector<f64>) -> Result<(Vec<f64>, bool)> {
    if y_lag.ncols() == 0 {
        return Ok((Vec::new(), false));
    }
    if numerical_rank(y_lag) < y_lag.ncols() {
        return Ok((pinv_solve(y_lag, target), true));
    }
    Ok((least_squares(y_lag, target)?, false))
}

/// `min ‖u‖₁` s.t. `Y a + y^{[m−p]} = Gsub u` for Toeplitz sensing.
pub fn decode_ar_compressed(
    y: &[f64],
    g: &SensingOperator,
    p: usize,
    mode: DecodeMode,
    opts: &SolverOptions,
) -> Result<DecodeResult> {
    let sys = build_regressor(y, p, RegressorVariant::Compressed, RegressorInputs { sensing: Some(g), ..Default::default() })?;
    decode_regressor_system(&sys, mode, opts)
}

/// Decodes any compressed-form regressor system (Toeplitz lags or dense
/// projection blocks).
pub fn decode_regressor_system(sys: &RegressorSystem, mode: DecodeMode, opts: &SolverOptions) -> Result<DecodeResult> {
    let report = match mode {
        DecodeMode::Joint => {
            let problem = L1Problem::new(sys.g_sub.clone(), Some(sys.y_lag.clone()), sys.rhs.clone(), Mode::Equality)?;
            solve_l1_equality(&problem, opts)?
        }
        DecodeMode::Projected => {
            let cond = gram_condition(&sys.y_lag);
            if cond > MAX_REGRESSOR_CONDITION {
                return Err(Error::IllConditioned { cond });
            }
            let q = orthonormal_basis(&sys.y_lag)?;
            let comp = orthonormal_complement(&q);
            let a_u = comp.transpose() * &sys.g_sub;
            let b = comp.transpose() * &sys.rhs;
            let problem = L1Problem::new(a_u, None, b, Mode::Equality)?;
            solve_l1_equality(&problem, opts)?
        }
    };
    require_solved(&report)?;
    let u_hat = report.u.clone();
    let (a_hat, indeterminate) = recover_a(sys, &u_hat)?;
    let x_hat = reconstruct_x(&a_hat, &u_hat, None);
    Ok(DecodeResult {
        flags: DecodeFlags {
            unstable_a: stability_flag(&a_hat),
            a_indeterminate: indeterminate,
            biased: false,
        },
        u_hat,
        a_hat,
        b_hat: None,
        x_hat,
        report,
        success: None,
        trajectory: Vec::new(),
        commutation_gap: None,
    })
}

/// `min ‖u‖₁` s.t. `‖Y a + y^{[m−p]} − Gsub u‖₂ ≤ ε` for noisy Toeplitz
/// measurements. `ε = 0` is the equality program.
pub fn decode_ar_noisy(y: &[f64], g: &SensingOperator, p: usize, epsilon: f64, opts: &SolverOptions) -> Result<DecodeResult> {
    let sys = build_regressor(y, p, RegressorVariant::Compressed, RegressorInputs { sensing: Some(g), ..Default::default() })?;
    let problem = L1Problem::new(sys.g_sub.clone(), Some(sys.y_lag.clone()), sys.rhs.clone(), Mode::Ball(epsilon))?;
    let report = solve_l1_ball(&problem, opts)?;
    require_solved(&report)?;
    let u_hat = report.u.clone();
    let a_hat = report.free.clone();
    let x_hat = reconstruct_x(&a_hat, &u_hat, None);
    Ok(DecodeResult {
        flags: DecodeFlags {
            unstable_a: stability_flag(&a_hat),
            a_indeterminate: numerical_rank(&sys.y_lag) < p,
            biased: false,
        },
        u_hat,
        a_hat,
        b_hat: None,
        x_hat,
        report,
        success: None,
        trajectory: Vec::new(),
        commutation_gap: None,
    })
}

/// `min ½‖y + Y a − u‖₂² + λ‖u‖₁` over `(u, a)` with direct observations.
pub fn decode_blind(y: &[f64], p: usize, lambda: f64, opts: &SolverOptions) -> Result<DecodeResult> {
    let sys = build_regressor(y, p, RegressorVariant::Blind, RegressorInputs::default())?;
    let n = y.len();
    let problem = L1Problem::new(DMatrix::identity(n, n), Some(sys.y_lag.clone()), sys.rhs.clone(), Mode::Penalized(lambda))?;
    let report = solve_lasso_problem(&problem, opts)?;
    let u_hat = report.u.clone();
    let (a_hat, indeterminate) = recover_a(&sys, &u_hat)?;
    let x_hat = reconstruct_x(&a_hat, &u_hat, None);
    Ok(DecodeResult {
        flags: DecodeFlags {
            unstable_a: stability_flag(&a_hat),
            a_indeterminate: indeterminate,
            biased: false,
        },
        u_hat,
        a_hat,
        b_hat: None,
        x_hat,
        report,
        success: None,
        trajectory: Vec::new(),
        commutation_gap: None,
    })
}

/// `min ‖u‖₁` s.t. `Y a + y^{[m−p]} = Gsub B u` with `B` built from the
/// known moving-average coefficients.
pub fn decode_arma_known_b(y: &[f64], g: &SensingOperator, p: usize, b: &[f64], opts: &SolverOptions) -> Result<DecodeResult> {
    let sys = build_regressor(
        y,
        p,
        RegressorVariant::Arma,
        RegressorInputs {
            sensing: Some(g),
            q: b.len(),
            ..Default::default()
        },
    )?;
    let gb = &sys.g_sub * ma_matrix(b, g.n());
    let problem = L1Problem::new(gb.clone(), Some(sys.y_lag.clone()), sys.rhs.clone(), Mode::Equality)?;
    let report = solve_l1_equality(&problem, opts)?;
    require_solved(&report)?;
    let u_hat = report.u.clone();
    let target = &gb * DVector::from_column_slice(&u_hat) - &sys.rhs;
    let (a_hat, indeterminate) = fit_free(&sys.y_lag, &target)?;
    let x_hat = reconstruct_x(&a_hat, &u_hat, Some(b));
    let gap = commutation_gap(&sys.g_sub, b, &u_hat);
    Ok(DecodeResult {
        flags: DecodeFlags {
            unstable_a: stability_flag(&a_hat),
            a_indeterminate: indeterminate,
            biased: false,
        },
        u_hat,
        a_hat,
        b_hat: Some(b.to_vec()),
        x_hat,
        report,
        success: None,
        trajectory: Vec::new(),
        commutation_gap: Some(gap),
    })
}

/// `‖Gsub B u − B' Gsub u‖∞` with `B'` the square MA matrix on `m−p` rows.
pub fn commutation_gap(g_sub: &DMatrix<f64>, b: &[f64], u: &[f64]) -> f64 {
    let u = DVector::from_column_slice(u);
    let left = g_sub * (ma_matrix(b, g_sub.ncols()) * &u);
    let right = ma_matrix(b, g_sub.nrows()) * (g_sub * &u);
    (left - right).amax()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    stages: Vec<(f64, usize)>,
}

impl EpsilonSchedule {
    pub fn new(stages: Vec<(f64, usize)>) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::InvalidArgument("epsilon schedule needs at least one stage".into()));
        }
        for &(eps, rounds) in &stages {
            if eps.is_nan() || eps <= 0.0 || rounds == 0 {
                return Err(Error::InvalidArgument(format!("invalid schedule stage ({eps}, {rounds})")));
            }
        }
        if stages.windows(2).any(|w| w[1].0 >= w[0].0) {
            return Err(Error::InvalidArgument("epsilons must strictly decrease across stages".into()));
        }
        Ok(EpsilonSchedule { stages })
    }

    pub fn stages(&self) -> &[(f64, usize)] {
        &self.stages
    }

    pub fn total_rounds(&self) -> usize {
        self.stages.iter().map(|s| s.1).sum()
    }
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        EpsilonSchedule {
            stages: vec![(3.0, 50), (0.3, 10)],
        }
    }
}

/// Alternates an ℓ1-ball solve for `(u, a)` at fixed `B` with a
/// least-squares update of `b` at fixed `(u, a)`, starting from `B = I`.
/// Every inner solve is cold-started.
pub fn decode_arma_iterative(
    y: &[f64],
    g: &SensingOperator,
    p: usize,
    q: usize,
    schedule: &EpsilonSchedule,
    opts: &SolverOptions,
) -> Result<DecodeResult> {
    if q == 0 {
        let mut r = decode_ar_compressed(y, g, p, DecodeMode::Joint, opts)?;
        r.b_hat = Some(Vec::new());
        r.trajectory.push(TrajectoryPoint {
            round: 1,
            stage: 0,
            epsilon: 0.0,
            b: Vec::new(),
            residual_norm: r.report.residual_norm,
        });
        return Ok(r);
    }
    let sys = build_regressor(
        y,
        p,
        RegressorVariant::Arma,
        RegressorInputs {
            sensing: Some(g),
            q,
            ..Default::default()
        },
    )?;
    let n = g.n();
    let mut b = vec![0.0; q];
    let mut trajectory = Vec::with_capacity(schedule.total_rounds());
    let mut last: Option<(SolveReport, Vec<f64>)> = None;
    let mut round = 0;
    for (stage, &(eps, rounds)) in schedule.stages().iter().enumerate() {
        for _ in 0..rounds {
            round += 1;
            let gb = &sys.g_sub * ma_matrix(&b, n);
            let problem = L1Problem::new(gb, Some(sys.y_lag.clone()), sys.rhs.clone(), Mode::Ball(eps))?;
            let report = solve_l1_ball(&problem, opts)?;
            let u = report.u.clone();
            let a = report.free.clone();
            b = update_ma(&sys, &u, &a, q)?;
            trajectory.push(TrajectoryPoint {
                round,
                stage,
                epsilon: eps,
                b: b.clone(),
                residual_norm: report.residual_norm,
            });
            last = Some((report, a));
        }
    }
    let (report, _) = last.expect("schedule has at least one round");
    let u_hat = report.u.clone();
    let gb = &sys.g_sub * ma_matrix(&b, n);
    let target = &gb * DVector::from_column_slice(&u_hat) - &sys.rhs;
    let (a_hat, indeterminate) = fit_free(&sys.y_lag, &target)?;
    let x_hat = reconstruct_x(&a_hat, &u_hat, Some(&b));
    Ok(DecodeResult {
        flags: DecodeFlags {
            unstable_a: stability_flag(&a_hat),
            a_indeterminate: indeterminate,
            biased: false,
        },
        u_hat,
        a_hat,
        b_hat: Some(b),
        x_hat,
        report,
        success: None,
        trajectory,
        commutation_gap: None,
    })
}

/// `min_b ‖Y a + y^{[m−p]} − Gsub u − Gsub U b‖₂` with `U[t, c] = u_{t−1−c}`.
fn update_ma(sys: &RegressorSystem, u: &[f64], a: &[f64], q: usize) -> Result<Vec<f64>> {
    let n = u.len();
    let lagged = DMatrix::from_fn(n, q, |t, c| if t > c { u[t - 1 - c] } else { 0.0 });
    let design = &sys.g_sub * lagged;
    let target = &sys.y_lag * DVector::from_column_slice(a) + &sys.rhs - &sys.g_sub * DVector::from_column_slice(u);
    match least_squares(&design, &target) {
        Ok(b) => Ok(b),
        // u = 0 (or too sparse to excite every lag): keep the minimum-norm update.
        Err(Error::RankDeficient { .. }) => Ok(pinv_solve(&design, &target)),
        Err(e) => Err(e),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoncausalProgram {
    /// Equality-constrained ℓ1 over `(u, a)`.
    Exact,
    /// LASSO with the given `λ`; used when the open-boundary correction is
    /// unavailable, at the price of a bias near the ends.
    Lasso(f64),
}

/// Decodes `x(t) + Σ a_i x(t−i) + Σ a_{−i} x(t+i) = u(t)` from circulant
/// measurements. `program = None` picks the exact program whenever it is
/// available and a LASSO path otherwise.
pub fn decode_noncausal(
    y: &[f64],
    g: &SensingOperator,
    p: usize,
    boundary: Boundary,
    samples: Option<&BoundarySamples>,
    program: Option<NoncausalProgram>,
    opts: &SolverOptions,
) -> Result<DecodeResult> {
    if p == 0 {
        let mut r = decode_ar_compressed(y, g, 0, DecodeMode::Joint, opts)?;
        r.x_hat = r.u_hat.clone();
        return Ok(r);
    }
    let (variant, exact_available) = match (boundary, samples) {
        (Boundary::Circulant, _) => (RegressorVariant::NoncausalCirculant, true),
        (Boundary::Open, Some(_)) => (RegressorVariant::NoncausalOpen, true),
        (Boundary::Open, None) => (RegressorVariant::NoncausalOpen, false),
    };
    let program = match program {
        Some(NoncausalProgram::Exact) if !exact_available => return Err(Error::MissingBoundary),
        Some(prog) => prog,
        None if exact_available => NoncausalProgram::Exact,
        None => NoncausalProgram::Lasso(0.0),
    };
    let sys = build_regressor(
        y,
        p,
        variant,
        RegressorInputs {
            sensing: Some(g),
            boundary: samples,
            ..Default::default()
        },
    )?;
    let report = match program {
        NoncausalProgram::Exact => {
            let problem = L1Problem::new(sys.g_sub.clone(), Some(sys.y_lag.clone()), sys.rhs.clone(), Mode::Equality)?;
            let r = solve_l1_equality(&problem, opts)?;
            require_solved(&r)?;
            r
        }
        NoncausalProgram::Lasso(lambda) => {
            let lambda = if lambda > 0.0 { lambda } else { default_noncausal_lambda(&sys) };
            let problem = L1Problem::new(sys.g_sub.clone(), Some(sys.y_lag.clone()), sys.rhs.clone(), Mode::Penalized(lambda))?;
            solve_lasso_problem(&problem, opts)?
        }
    };
    let u_hat = report.u.clone();
    let (a_hat, indeterminate) = recover_a(&sys, &u_hat)?;
    let model = NoncausalArModel::from_stacked(&a_hat, boundary)?;
    let x_hat = noncausal_forward(&model, &u_hat)?;
    Ok(DecodeResult {
        flags: DecodeFlags {
            unstable_a: false,
            a_indeterminate: indeterminate,
            biased: matches!(program, NoncausalProgram::Lasso(_)),
        },
        u_hat,
        a_hat,
        b_hat: None,
        x_hat,
        report,
        success: None,
        trajectory: Vec::new(),
        commutation_gap: None,
    })
}

/// `1e−2·‖(P Gsub)ᵀ P y‖∞`, small enough to keep strong spikes and large
/// enough to absorb the wrap-around mismatch of an open boundary.
fn default_noncausal_lambda(sys: &RegressorSystem) -> f64 {
    let q = crate::linalg::range_basis(&sys.y_lag);
    let d = crate::linalg::project_out(&q, &sys.g_sub);
    let t = crate::linalg::project_out_vec(&q, &sys.rhs);
    let top = (d.transpose() * t).amax();
    if top > 0.0 {
        1e-2 * top
    } else {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn score_rules() {
        let truth = GroundTruth {
            u: vec![0.0, 1.0, 0.0, -2.0],
            a: vec![-0.5],
        };
        assert_eq!(score(&[0.0, 1.0, 0.0, -2.0], &[-0.5], &truth), Success::Exact);
        assert_eq!(score(&[0.0, 1.1, 0.0, -2.0], &[-0.5], &truth), Success::Approx);
        assert_eq!(score(&[0.0, 1.0, 0.0, -2.0], &[-0.4], &truth), Success::Approx);
        assert_eq!(score(&[0.1, 1.0, 0.0, -2.0], &[-0.5], &truth), Success::Failed);
        let zero = GroundTruth {
            u: vec![0.0; 3],
            a: vec![0.3],
        };
        assert_eq!(score(&[0.0; 3], &[123.0], &zero), Success::Exact);
    }

    #[test]
    fn schedule_validation() {
        assert!(EpsilonSchedule::new(vec![(3.0, 50), (0.3, 10)]).is_ok());
        assert!(EpsilonSchedule::new(vec![(0.3, 10), (3.0, 50)]).is_err());
        assert!(EpsilonSchedule::new(vec![(3.0, 0)]).is_err());
        assert!(EpsilonSchedule::new(vec![]).is_err());
        assert_eq!(EpsilonSchedule::default().total_rounds(), 60);
    }

    #[test]
    fn reconstruct_matches_forward_ops() {
        let u = [1.0, 0.0, 0.0, 0.0];
        let x = reconstruct_x(&[-1.4, 0.45], &u, None);
        for (a, b) in x.iter().zip([1.0, 1.4, 1.51, 1.484]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(reconstruct_x(&[-0.5], &[0.0; 4], None), vec![0.0; 4]);
        let x = reconstruct_x(&[-0.5], &u, Some(&[1.0]));
        assert_eq!(x, vec![1.0, 1.5, 0.75, 0.375]);
    }
}
