//! Convex solvers shared by the decoders.
//!
//! Every problem has the form `A_u u = A_free f + b` where `u` is penalized
//! by its ℓ1 norm and `f` is unpenalized. The three modes differ in how the
//! constraint is enforced: exactly, within a residual ball, or through a
//! quadratic penalty (LASSO).

mod brute;
mod homotopy;
mod lasso;
mod least_squares;
mod l1;
pub mod simplex;

pub use brute::brute_force_l1;
pub use homotopy::solve_l1_ball;
pub use l1::solve_l1_equality;
pub use lasso::{lasso_kkt_residual, solve_lasso, solve_lasso_problem};
pub use least_squares::least_squares;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Equality,
    /// `‖A_u u − A_free f − b‖₂ ≤ ε`.
    Ball(f64),
    /// `½‖A_u u − A_free f − b‖₂² + λ‖u‖₁`.
    Penalized(f64),
}

#[derive(Clone, Debug)]
pub struct L1Problem {
    a_u: DMatrix<f64>,
    a_free: DMatrix<f64>,
    b: DVector<f64>,
    mode: Mode,
}

impl L1Problem {
    pub fn new(a_u: DMatrix<f64>, a_free: Option<DMatrix<f64>>, b: DVector<f64>, mode: Mode) -> Result<Self> {
        let rows = a_u.nrows();
        let a_free = a_free.unwrap_or_else(|| DMatrix::zeros(rows, 0));
        if a_free.nrows() != rows {
            return Err(Error::DimensionMismatch {
                what: "free block rows",
                expected: rows,
                found: a_free.nrows(),
            });
        }
        if b.len() != rows {
            return Err(Error::DimensionMismatch {
                what: "right-hand side",
                expected: rows,
                found: b.len(),
            });
        }
        match mode {
            Mode::Ball(eps) if eps.is_nan() || eps < 0.0 => {
                return Err(Error::InvalidArgument(format!("ball radius must be >= 0, got {eps}")));
            }
            Mode::Penalized(lambda) if lambda.is_nan() || lambda <= 0.0 => {
                return Err(Error::InvalidArgument(format!("lambda must be > 0, got {lambda}")));
            }
            _ => {}
        }
        let finite = a_u.iter().chain(a_free.iter()).chain(b.iter()).all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidArgument("problem data contains non-finite entries".into()));
        }
        Ok(L1Problem { a_u, a_free, b, mode })
    }

    pub fn a_u(&self) -> &DMatrix<f64> {
        &self.a_u
    }

    pub fn a_free(&self) -> &DMatrix<f64> {
        &self.a_free
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn with_mode(&self, mode: Mode) -> Result<Self> {
        L1Problem::new(self.a_u.clone(), Some(self.a_free.clone()), self.b.clone(), mode)
    }

    pub fn rows(&self) -> usize {
        self.b.len()
    }

    pub fn n_penalized(&self) -> usize {
        self.a_u.ncols()
    }

    pub fn n_free(&self) -> usize {
        self.a_free.ncols()
    }

    /// `A_u u − A_free f − b`.
    pub fn residual(&self, u: &[f64], free: &[f64]) -> DVector<f64> {
        let mut r = &self.a_u * DVector::from_column_slice(u) - &self.b;
        if self.n_free() > 0 {
            r -= &self.a_free * DVector::from_column_slice(free);
        }
        r
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    MaxIter,
    Infeasible,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveReport {
    pub u: Vec<f64>,
    pub free: Vec<f64>,
    pub objective: f64,
    pub residual_norm: f64,
    pub iterations: usize,
    pub status: SolveStatus,
    /// Worst violation of the optimality conditions that were checked
    /// after the solve (dual feasibility, gap, stationarity).
    pub kkt_residual: f64,
    /// Equality multipliers, when the method produces them.
    pub dual: Option<Vec<f64>>,
}

impl SolveReport {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub feasibility_tol: f64,
    pub gap_tol: f64,
    pub max_iterations: usize,
    /// Strict "< 1" dual bounds are tested as `<= 1 − margin_tol`.
    pub margin_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            feasibility_tol: 1e-8,
            gap_tol: 1e-7,
            max_iterations: 50_000,
            margin_tol: 1e-6,
        }
    }
}

/// `sgn(t)·max(|t| − λ, 0)`.
pub fn soft_threshold(t: f64, lambda: f64) -> f64 {
    if t > lambda {
        t - lambda
    } else if t < -lambda {
        t + lambda
    } else {
        0.0
    }
}

/// Penalized block with the free block projected out, plus the projected
/// right-hand side: `P A_u` and `P b` with `P = I − QQᵀ`, `Q` an orthonormal
/// basis of `range(A_free)`.
///
/// A rank-deficient free block is handled through an SVD basis of its
/// range; the free variables are then the minimum-norm choice.
pub(crate) struct Reduced {
    pub d: DMatrix<f64>,
    pub t: DVector<f64>,
    deficient: bool,
}

impl Reduced {
    pub fn new(problem: &L1Problem) -> Result<Self> {
        let (q, deficient) = match crate::linalg::orthonormal_basis(problem.a_free()) {
            Ok(q) => (q, false),
            Err(Error::RankDeficient { .. }) => (crate::linalg::range_basis(problem.a_free()), true),
            Err(e) => return Err(e),
        };
        let d = crate::linalg::project_out(&q, problem.a_u());
        let t = crate::linalg::project_out_vec(&q, problem.b());
        Ok(Reduced { d, t, deficient })
    }

    /// Free variables that best explain `A_u u − b` once `u` is fixed.
    pub fn recover_free(&self, problem: &L1Problem, u: &[f64]) -> Result<Vec<f64>> {
        if problem.n_free() == 0 {
            return Ok(Vec::new());
        }
        let target = problem.a_u() * DVector::from_column_slice(u) - problem.b();
        if self.deficient {
            Ok(crate::linalg::pinv_solve(problem.a_free(), &target))
        } else {
            least_squares(problem.a_free(), &target)
        }
    }
}
