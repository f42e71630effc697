use nalgebra::{DMatrix, DVector};

use super::{soft_threshold, L1Problem, Mode, Reduced, SolveReport, SolveStatus, SolverOptions};
use crate::error::{Error, Result};
use crate::linalg::{l1, l2, select_columns};

/// `min ½‖design·u − target‖₂² + λ‖u‖₁`.
pub fn solve_lasso(design: &DMatrix<f64>, target: &DVector<f64>, lambda: f64, opts: &SolverOptions) -> Result<SolveReport> {
    let problem = L1Problem::new(design.clone(), None, target.clone(), Mode::Penalized(lambda))?;
    solve_lasso_problem(&problem, opts)
}

/// LASSO with an unpenalized block: `min ½‖A_u u − A_free f − b‖₂² + λ‖u‖₁`.
///
/// The free block is projected out, cyclic coordinate descent finds the
/// active set, and the solution on that set is then computed exactly from
/// the stationarity equations and accepted once the optimality conditions
/// hold.
pub fn solve_lasso_problem(problem: &L1Problem, opts: &SolverOptions) -> Result<SolveReport> {
    let Mode::Penalized(lambda) = problem.mode() else {
        return Err(Error::InvalidArgument("solve_lasso needs penalized mode".into()));
    };
    let reduced = Reduced::new(problem)?;
    let (u, iterations) = coordinate_descent(&reduced.d, &reduced.t, lambda, opts);
    let free = reduced.recover_free(problem, &u)?;
    let kkt = lasso_kkt_residual(problem, &u, &free, lambda);
    let tol = opts.feasibility_tol * lambda.max(1.0);
    let status = if kkt <= tol { SolveStatus::Optimal } else { SolveStatus::MaxIter };
    let r = problem.residual(&u, &free);
    let residual_norm = l2(r.as_slice());
    Ok(SolveReport {
        objective: 0.5 * residual_norm * residual_norm + lambda * l1(&u),
        u,
        free,
        residual_norm,
        iterations,
        status,
        kkt_residual: kkt,
        dual: None,
    })
}

fn coordinate_descent(d: &DMatrix<f64>, t: &DVector<f64>, lambda: f64, opts: &SolverOptions) -> (Vec<f64>, usize) {
    let n = d.ncols();
    let mut u = vec![0.0; n];
    let corr = d.transpose() * t;
    if corr.amax() <= lambda {
        return (u, 0);
    }
    let col_sq: Vec<f64> = d.column_iter().map(|c| c.norm_squared()).collect();
    let scale = t.amax().max(1.0);
    let mut r = t.clone();
    let mut prev_support: Vec<usize> = Vec::new();
    let mut last_good: Option<Vec<f64>> = None;
    for sweep in 1..=opts.max_iterations {
        let mut max_change = 0.0f64;
        for j in 0..n {
            if col_sq[j] == 0.0 {
                continue;
            }
            let col = d.column(j);
            let g = col.dot(&r) + col_sq[j] * u[j];
            let new = soft_threshold(g, lambda) / col_sq[j];
            let delta = new - u[j];
            if delta != 0.0 {
                r.axpy(-delta, &col, 1.0);
                u[j] = new;
                max_change = max_change.max(delta.abs() * col_sq[j].sqrt());
            }
        }
        let support: Vec<usize> = (0..n).filter(|&j| u[j] != 0.0).collect();
        if support == prev_support {
            if let Some(exact) = polish(d, t, lambda, &support, &u, opts) {
                return (exact, sweep);
            }
        }
        prev_support = support;
        if max_change <= 1e-14 * scale {
            last_good = Some(u.clone());
            break;
        }
    }
    (last_good.unwrap_or(u), opts.max_iterations)
}

/// Solves the stationarity equations on `support` with the signs of `u`
/// and returns the result if it is a genuine LASSO solution.
fn polish(d: &DMatrix<f64>, t: &DVector<f64>, lambda: f64, support: &[usize], u: &[f64], opts: &SolverOptions) -> Option<Vec<f64>> {
    let n = d.ncols();
    let mut out = vec![0.0; n];
    if !support.is_empty() {
        let ds = select_columns(d, support);
        let signs = DVector::from_iterator(support.len(), support.iter().map(|&j| u[j].signum()));
        let rhs = ds.transpose() * t - &signs * lambda;
        let sol = (ds.transpose() * &ds).cholesky()?.solve(&rhs);
        for (k, &j) in support.iter().enumerate() {
            if sol[k].signum() != signs[k] || sol[k] == 0.0 {
                return None;
            }
            out[j] = sol[k];
        }
    }
    let r = t - d * DVector::from_column_slice(&out);
    let g = d.transpose() * r;
    let tol = opts.feasibility_tol * lambda.max(1.0);
    for j in 0..n {
        let viol = if out[j] != 0.0 {
            (g[j] - lambda * out[j].signum()).abs()
        } else {
            (g[j].abs() - lambda).max(0.0)
        };
        if viol > tol {
            return None;
        }
    }
    Some(out)
}

/// Worst violation of the LASSO stationarity conditions at `(u, free)`:
/// `A_uᵀρ = −λ sgn(u_i)` on the active set, `|A_uᵀρ| ≤ λ` elsewhere and
/// `A_freeᵀρ = 0`, where `ρ = A_u u − A_free f − b`.
pub fn lasso_kkt_residual(problem: &L1Problem, u: &[f64], free: &[f64], lambda: f64) -> f64 {
    let rho = problem.residual(u, free);
    let g = problem.a_u().transpose() * &rho;
    let mut worst = 0.0f64;
    for (j, &uj) in u.iter().enumerate() {
        let viol = if uj != 0.0 {
            (g[j] + lambda * uj.signum()).abs()
        } else {
            (g[j].abs() - lambda).max(0.0)
        };
        worst = worst.max(viol);
    }
    if problem.n_free() > 0 {
        let scale = 1.0 + problem.a_free().amax() * problem.b().amax();
        worst = worst.max((problem.a_free().transpose() * rho).amax() / scale);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn identity_design_soft_thresholds() {
        let t = DVector::from_vec(vec![3.0, -0.5, 1.0, -2.5, 0.0]);
        let r = solve_lasso(&DMatrix::identity(5, 5), &t, 1.0, &SolverOptions::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        let want = [2.0, 0.0, 0.0, -1.5, 0.0];
        for (a, b) in r.u.iter().zip(want) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn large_lambda_gives_zero() {
        let mut rng = rng_from_seed(11);
        let a = DMatrix::from_fn(10, 20, |_, _| StandardNormal.sample(&mut rng));
        let t = DVector::from_fn(10, |_, _| StandardNormal.sample(&mut rng));
        let lam = (a.transpose() * &t).amax();
        let r = solve_lasso(&a, &t, lam, &SolverOptions::default()).unwrap();
        assert!(r.u.iter().all(|&v| v == 0.0));
        assert_eq!(r.status, SolveStatus::Optimal);
    }

    #[test]
    fn free_block_stationarity() {
        let mut rng = rng_from_seed(12);
        let a = DMatrix::from_fn(40, 30, |_, _| StandardNormal.sample(&mut rng));
        let f = DMatrix::from_fn(40, 2, |_, _| StandardNormal.sample(&mut rng));
        let b = DVector::from_fn(40, |_, _| StandardNormal.sample(&mut rng));
        let p = L1Problem::new(a, Some(f), b, Mode::Penalized(0.7)).unwrap();
        let r = solve_lasso_problem(&p, &SolverOptions::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!(r.kkt_residual < 1e-9);
        assert!(r.u.iter().any(|&v| v != 0.0));
    }
}
