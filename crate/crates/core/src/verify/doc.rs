use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{pinv_solve, select_columns};
use crate::solvers::simplex::{LinearProgram, LpStatus, Relation, SimplexOptions};
use crate::solvers::SolverOptions;

/// A dual vector `π` for `min ‖u‖₁ s.t. Y a + rhs = Gsub u` together with
/// how well it meets the dual optimality conditions at a given support.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DocCertificate {
    pub pi: Vec<f64>,
    /// Optimal value of `max_{j ∉ I} |(Gsubᵀπ)_j|` over all admissible `π`.
    pub t: f64,
    /// `max_{i ∈ I} |(Gsubᵀπ)_i − s_i|`.
    pub support_equalities_residual: f64,
    /// `max_{j ∉ I} |(Gsubᵀπ)_j|`.
    pub off_support_max: f64,
    /// `‖Yᵀπ‖∞`.
    pub null_residual: f64,
    pub feasible: bool,
}

/// Searches for `π` with `(Gsubᵀπ)_I = signs`, `Yᵀπ = 0` and the smallest
/// possible off-support magnitude `t`, by linear programming. The
/// conditions hold strictly when `t ≤ 1 − margin_tol`.
pub fn check_doc(
    g_sub: &DMatrix<f64>,
    y_lag: &DMatrix<f64>,
    support: &[usize],
    signs: &[f64],
    opts: &SolverOptions,
) -> Result<DocCertificate> {
    let (rows, n) = g_sub.shape();
    if support.is_empty() {
        return Err(Error::InvalidArgument("DOC needs a nonempty support".into()));
    }
    if signs.len() != support.len() {
        return Err(Error::DimensionMismatch {
            what: "sign pattern",
            expected: support.len(),
            found: signs.len(),
        });
    }
    if signs.iter().any(|s| s.abs() != 1.0) {
        return Err(Error::InvalidArgument("signs must be +1 or -1".into()));
    }
    if support.iter().any(|&i| i >= n) || support.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("support must be sorted, distinct and in range".into()));
    }
    if y_lag.nrows() != rows {
        return Err(Error::DimensionMismatch {
            what: "regressor rows",
            expected: rows,
            found: y_lag.nrows(),
        });
    }
    let p = y_lag.ncols();

    // Equality part alone: [Gsub_Iᵀ; Yᵀ] π = [s; 0].
    let g_i = select_columns(g_sub, support);
    let eq_mat = DMatrix::from_fn(support.len() + p, rows, |r, c| {
        if r < support.len() {
            g_i[(c, r)]
        } else {
            y_lag[(c, r - support.len())]
        }
    });
    let mut eq_rhs = DVector::zeros(support.len() + p);
    for (r, &s) in signs.iter().enumerate() {
        eq_rhs[r] = s;
    }
    let trial = DVector::from_vec(pinv_solve(&eq_mat, &eq_rhs));
    let eq_scale = 1.0 + eq_mat.amax() * trial.amax();
    if (&eq_mat * &trial - &eq_rhs).amax() > 1e-7 * eq_scale {
        return Err(Error::DocEqualitiesInfeasible);
    }

    // Variables: π (free, rows entries) then t >= 0.
    let mut cost = vec![0.0; rows + 1];
    cost[rows] = 1.0;
    let mut lp = LinearProgram::new(cost);
    for j in 0..rows {
        lp.set_free(j);
    }
    for r in 0..eq_mat.nrows() {
        let mut coeffs: Vec<f64> = eq_mat.row(r).iter().copied().collect();
        coeffs.push(0.0);
        lp.add(coeffs, Relation::Eq, eq_rhs[r]);
    }
    let in_support = {
        let mut mask = vec![false; n];
        for &i in support {
            mask[i] = true;
        }
        mask
    };
    for j in (0..n).filter(|&j| !in_support[j]) {
        let col = g_sub.column(j);
        let mut plus: Vec<f64> = col.iter().copied().collect();
        plus.push(-1.0);
        let mut minus: Vec<f64> = col.iter().map(|v| -v).collect();
        minus.push(-1.0);
        lp.add(plus, Relation::Le, 0.0);
        lp.add(minus, Relation::Le, 0.0);
    }
    let sol = lp.solve(&SimplexOptions {
        max_iterations: opts.max_iterations,
        ..SimplexOptions::default()
    });
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(Error::DocEqualitiesInfeasible),
        LpStatus::Unbounded | LpStatus::IterationLimit => {
            return Err(Error::Infeasible(format!("DOC linear program ended with {:?}", sol.status)));
        }
    }
    let pi = DVector::from_column_slice(&sol.x[..rows]);
    let corr = g_sub.transpose() * &pi;
    let support_equalities_residual = support
        .iter()
        .zip(signs)
        .map(|(&i, s)| (corr[i] - s).abs())
        .fold(0.0, f64::max);
    let off_support_max = (0..n).filter(|&j| !in_support[j]).map(|j| corr[j].abs()).fold(0.0, f64::max);
    let null_residual = if p > 0 { (y_lag.transpose() * &pi).amax() } else { 0.0 };
    let tol = opts.feasibility_tol * (1.0 + pi.amax() * g_sub.amax().max(y_lag.amax()));
    let feasible = support_equalities_residual <= tol
        && off_support_max <= 1.0 - opts.margin_tol
        && null_residual <= tol;
    Ok(DocCertificate {
        pi: pi.iter().copied().collect(),
        t: sol.x[rows],
        support_equalities_residual,
        off_support_max,
        null_residual,
        feasible,
    })
}
