use nalgebra::{DMatrix, DVector};

use super::lasso::lasso_kkt_residual;
use super::{solve_l1_equality, L1Problem, Mode, Reduced, SolveReport, SolveStatus, SolverOptions};
use crate::error::{Error, Result};
use crate::linalg::{l1, l2, select_columns};

/// `min ‖u‖₁` subject to `‖A_u u − A_free f − b‖₂ ≤ ε`.
///
/// Follows the LASSO regularization path downward from `λ_max` and stops
/// where the residual norm reaches `ε`; the LASSO solution at that `λ` is
/// the constrained minimizer. Each breakpoint recomputes the active
/// coefficients from the stationarity equations so errors do not
/// accumulate along the path.
pub fn solve_l1_ball(problem: &L1Problem, opts: &SolverOptions) -> Result<SolveReport> {
    let Mode::Ball(eps) = problem.mode() else {
        return Err(Error::InvalidArgument("solve_l1_ball needs ball mode".into()));
    };
    if eps == 0.0 {
        return solve_l1_equality(&problem.with_mode(Mode::Equality)?, opts);
    }
    let reduced = Reduced::new(problem)?;
    let (d, t) = (&reduced.d, &reduced.t);
    let n = d.ncols();

    if l2(t.as_slice()) <= eps {
        let u = vec![0.0; n];
        return finish(problem, &reduced, u, 0, None, eps, opts);
    }
    let floor = least_squares_floor(d, t);
    if floor > eps {
        return Err(Error::EpsilonBelowFloor { epsilon: eps, floor });
    }

    let mut u = vec![0.0; n];
    let mut c = d.transpose() * t;
    let (mut lambda, first) = argmax_abs(&c, &[]);
    let mut active: Vec<usize> = vec![first];
    let mut signs: Vec<f64> = vec![c[first].signum()];
    let mut just_dropped: Option<usize> = None;

    for iter in 1..=opts.max_iterations {
        let da = select_columns(d, &active);
        let Some(chol) = (da.transpose() * &da).cholesky() else {
            // Active columns became dependent; the path cannot continue.
            return finish(problem, &reduced, u, iter, Some(lambda), eps, opts).map(mark_stalled);
        };
        let s = DVector::from_column_slice(&signs);
        let dir = chol.solve(&s);
        let w = &da * &dir;
        let a = d.transpose() * &w;
        let r = t - d * DVector::from_column_slice(&u);

        let rr = r.norm_squared();
        let rw = r.dot(&w);
        let ww = w.norm_squared();
        let gamma_eps = if ww > 0.0 {
            let disc = (rw * rw - ww * (rr - eps * eps)).max(0.0);
            (rw - disc.sqrt()) / ww
        } else {
            f64::INFINITY
        };

        let tiny = 1e-13 * lambda.max(1.0);
        let mut gamma_enter = f64::INFINITY;
        let mut enter = None;
        for j in 0..n {
            if active.contains(&j) || Some(j) == just_dropped {
                continue;
            }
            for (num, den) in [(lambda - c[j], 1.0 - a[j]), (lambda + c[j], 1.0 + a[j])] {
                if den > 0.0 {
                    let g = num / den;
                    if g > tiny && g < gamma_enter {
                        gamma_enter = g;
                        enter = Some(j);
                    }
                }
            }
        }
        let mut gamma_drop = f64::INFINITY;
        let mut drop = None;
        for (k, &j) in active.iter().enumerate() {
            if dir[k] != 0.0 {
                let g = -u[j] / dir[k];
                if g > tiny && g < gamma_drop {
                    gamma_drop = g;
                    drop = Some(k);
                }
            }
        }

        let gamma = gamma_eps.min(gamma_enter).min(gamma_drop).min(lambda);
        if gamma == gamma_eps || gamma >= lambda {
            let lam_end = if gamma == gamma_eps {
                ball_exit(&chol, &da, t, &w, eps).min(lambda)
            } else {
                0.0
            };
            let exact = active_solution(&chol, &da, t, &signs, lam_end);
            write_active(&mut u, &active, &exact);
            return finish(problem, &reduced, u, iter, Some(lam_end), eps, opts);
        }

        lambda -= gamma;
        just_dropped = None;
        if gamma == gamma_drop {
            let k = drop.expect("drop index");
            let j = active.remove(k);
            signs.remove(k);
            u[j] = 0.0;
            just_dropped = Some(j);
        }
        let da = select_columns(d, &active);
        let Some(chol) = (da.transpose() * &da).cholesky() else {
            return finish(problem, &reduced, u, iter, Some(lambda), eps, opts).map(mark_stalled);
        };
        for &j in &active {
            u[j] = 0.0;
        }
        let exact = active_solution(&chol, &da, t, &signs, lambda);
        write_active(&mut u, &active, &exact);
        c = d.transpose() * (t - d * DVector::from_column_slice(&u));
        if gamma == gamma_enter && just_dropped.is_none() {
            let j = enter.expect("enter index");
            active.push(j);
            signs.push(c[j].signum());
        }
    }
    let lam = Some(lambda);
    finish(problem, &reduced, u, opts.max_iterations, lam, eps, opts).map(mark_stalled)
}

fn mark_stalled(mut r: SolveReport) -> SolveReport {
    r.status = SolveStatus::MaxIter;
    r
}

fn active_solution(
    chol: &nalgebra::Cholesky<f64, nalgebra::Dyn>,
    da: &DMatrix<f64>,
    t: &DVector<f64>,
    signs: &[f64],
    lambda: f64,
) -> DVector<f64> {
    let s = DVector::from_column_slice(signs);
    chol.solve(&(da.transpose() * t - s * lambda))
}

/// The `λ` at which the residual of the active-set path reaches `eps`.
/// Along a fixed active set `r(λ) = r₀ + λ·w` with `r₀ ⟂ w`, which avoids
/// the cancellation in `λ − γ` when `eps` is tiny.
fn ball_exit(
    chol: &nalgebra::Cholesky<f64, nalgebra::Dyn>,
    da: &DMatrix<f64>,
    t: &DVector<f64>,
    w: &DVector<f64>,
    eps: f64,
) -> f64 {
    let r0 = t - da * chol.solve(&(da.transpose() * t));
    let ww = w.norm_squared();
    if ww == 0.0 {
        return 0.0;
    }
    ((eps * eps - r0.norm_squared()).max(0.0) / ww).sqrt()
}

fn write_active(u: &mut [f64], active: &[usize], values: &DVector<f64>) {
    for (k, &j) in active.iter().enumerate() {
        u[j] = values[k];
    }
}

fn argmax_abs(v: &DVector<f64>, skip: &[usize]) -> (f64, usize) {
    let mut best = (f64::NEG_INFINITY, 0);
    for (j, x) in v.iter().enumerate() {
        if !skip.contains(&j) && x.abs() > best.0 {
            best = (x.abs(), j);
        }
    }
    best
}

/// `min_u ‖D u − t‖₂`.
fn least_squares_floor(d: &DMatrix<f64>, t: &DVector<f64>) -> f64 {
    let svd = d.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors");
    let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let mut proj = t.clone();
    for (k, &sv) in svd.singular_values.iter().enumerate() {
        if sv > 1e-10 * top {
            let col = u.column(k);
            proj.axpy(-col.dot(t), &col, 1.0);
        }
    }
    proj.norm()
}

fn finish(
    problem: &L1Problem,
    reduced: &Reduced,
    u: Vec<f64>,
    iterations: usize,
    lambda: Option<f64>,
    eps: f64,
    opts: &SolverOptions,
) -> Result<SolveReport> {
    let free = reduced.recover_free(problem, &u)?;
    let residual_norm = l2(problem.residual(&u, &free).as_slice());
    let kkt = match lambda {
        Some(l) if l > 0.0 => lasso_kkt_residual(problem, &u, &free, l) / l.max(1.0),
        _ => 0.0,
    };
    let inside = residual_norm <= eps * (1.0 + 1e-9) + opts.feasibility_tol;
    let status = if inside && kkt <= opts.feasibility_tol * 10.0 {
        SolveStatus::Optimal
    } else {
        SolveStatus::MaxIter
    };
    Ok(SolveReport {
        objective: l1(&u),
        u,
        free,
        residual_norm,
        iterations,
        status,
        kkt_residual: kkt,
        dual: None,
    })
}
