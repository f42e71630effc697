use nalgebra::DVector;

use super::simplex::{LinearProgram, LpStatus, Relation, SimplexOptions};
use super::{L1Problem, Mode, SolveReport, SolveStatus, SolverOptions};
use crate::error::{Error, Result};
use crate::linalg::{l1, l2};

/// `min ‖u‖₁` subject to `A_u u = A_free f + b`, solved as a linear
/// program over `u = u⁺ − u⁻` with `f` free. The LP multipliers give the
/// certificate `‖A_uᵀπ‖∞ ≤ 1`, `A_freeᵀπ = 0`, `bᵀπ = ‖u‖₁`.
pub fn solve_l1_equality(problem: &L1Problem, opts: &SolverOptions) -> Result<SolveReport> {
    if problem.mode() != Mode::Equality {
        return Err(Error::InvalidArgument("solve_l1_equality needs equality mode".into()));
    }
    let rows = problem.rows();
    let n = problem.n_penalized();
    let nf = problem.n_free();
    let (a_u, a_free, b) = (problem.a_u(), problem.a_free(), problem.b());

    let mut cost = vec![1.0; 2 * n];
    cost.extend(std::iter::repeat_n(0.0, nf));
    let mut lp = LinearProgram::new(cost);
    for j in 0..nf {
        lp.set_free(2 * n + j);
    }
    for i in 0..rows {
        let mut coeffs = Vec::with_capacity(2 * n + nf);
        coeffs.extend((0..n).map(|j| a_u[(i, j)]));
        coeffs.extend((0..n).map(|j| -a_u[(i, j)]));
        coeffs.extend((0..nf).map(|j| -a_free[(i, j)]));
        lp.add(coeffs, Relation::Eq, b[i]);
    }
    let simplex = SimplexOptions {
        max_iterations: opts.max_iterations,
        feasibility_tol: opts.feasibility_tol,
        ..SimplexOptions::default()
    };
    let sol = lp.solve(&simplex);

    let u: Vec<f64> = (0..n).map(|j| sol.x[j] - sol.x[n + j]).collect();
    let free: Vec<f64> = sol.x[2 * n..].to_vec();
    let residual_norm = l2(problem.residual(&u, &free).as_slice());
    let objective = l1(&u);

    let status = match sol.status {
        LpStatus::Optimal => SolveStatus::Optimal,
        LpStatus::Infeasible => SolveStatus::Infeasible,
        LpStatus::IterationLimit | LpStatus::Unbounded => SolveStatus::MaxIter,
    };
    if status == SolveStatus::Infeasible {
        return Ok(SolveReport {
            u: vec![0.0; n],
            free: vec![0.0; nf],
            objective: f64::NAN,
            residual_norm: l2(b.as_slice()),
            iterations: sol.iterations,
            status,
            kkt_residual: f64::INFINITY,
            dual: None,
        });
    }

    let pi = DVector::from_column_slice(&sol.duals);
    let kkt = equality_kkt(problem, &u, &free, &pi);
    let certified = kkt.primal <= opts.feasibility_tol
        && kkt.dual <= opts.feasibility_tol
        && kkt.gap <= opts.gap_tol;
    let status = if status == SolveStatus::Optimal && !certified {
        SolveStatus::MaxIter
    } else {
        status
    };
    Ok(SolveReport {
        u,
        free,
        objective,
        residual_norm,
        iterations: sol.iterations,
        status,
        kkt_residual: kkt.worst(),
        dual: Some(sol.duals),
    })
}

/// Scaled violations of the equality-mode optimality conditions.
#[derive(Clone, Copy, Debug)]
pub struct EqualityKkt {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

impl EqualityKkt {
    pub fn worst(&self) -> f64 {
        self.primal.max(self.dual).max(self.gap)
    }
}

pub fn equality_kkt(problem: &L1Problem, u: &[f64], free: &[f64], pi: &DVector<f64>) -> EqualityKkt {
    let b = problem.b();
    let bscale = 1.0 + b.amax();
    let primal = problem.residual(u, free).amax() / bscale;
    let corr = problem.a_u().transpose() * pi;
    let mut dual = (corr.amax() - 1.0).max(0.0);
    if problem.n_free() > 0 {
        let fscale = 1.0 + pi.amax() * problem.a_free().amax();
        dual = dual.max((problem.a_free().transpose() * pi).amax() / fscale);
    }
    let obj = l1(u);
    let gap = (b.dot(pi) - obj).abs() / (1.0 + obj);
    EqualityKkt { primal, dual, gap }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn opts() -> SolverOptions {
        SolverOptions::default()
    }

    #[test]
    fn identity_pins_u() {
        let p = L1Problem::new(DMatrix::identity(3, 3), None, DVector::from_vec(vec![1.0, 0.0, -2.0]), Mode::Equality).unwrap();
        let r = solve_l1_equality(&p, &opts()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.objective - 3.0).abs() < 1e-12);
        assert_eq!(r.u, vec![1.0, 0.0, -2.0]);
    }

    #[test]
    fn free_block_absorbs_rhs() {
        let a_u = DMatrix::from_row_slice(3, 4, &[1.0, 0.5, -1.0, 2.0, 0.0, 1.0, 1.0, -1.0, 3.0, 0.0, 1.0, 1.0]);
        let a_free = DMatrix::from_row_slice(3, 1, &[1.0, 2.0, -1.0]);
        let b = DVector::from_vec(vec![-0.5, -1.0, 0.5]);
        let p = L1Problem::new(a_u, Some(a_free), b, Mode::Equality).unwrap();
        let r = solve_l1_equality(&p, &opts()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!(r.objective.abs() < 1e-12);
        assert!((r.free[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn inconsistent_constraints_are_infeasible() {
        let a_u = DMatrix::from_row_slice(2, 1, &[1.0, 1.0]);
        let p = L1Problem::new(a_u, None, DVector::from_vec(vec![1.0, 2.0]), Mode::Equality).unwrap();
        let r = solve_l1_equality(&p, &opts()).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible);
    }

    #[test]
    fn certificate_holds_on_underdetermined_instance() {
        let a_u = DMatrix::from_fn(6, 15, |i, j| ((i * 7 + j * 3) % 11) as f64 - 5.0 + 0.1 * (i as f64));
        let mut u0 = DVector::zeros(15);
        u0[4] = 1.5;
        let b = &a_u * &u0;
        let p = L1Problem::new(a_u.clone(), None, b, Mode::Equality).unwrap();
        let r = solve_l1_equality(&p, &opts()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        let pi = DVector::from_vec(r.dual.clone().unwrap());
        assert!((a_u.transpose() * pi).amax() <= 1.0 + 1e-8);
        assert!(r.objective <= 1.5 + 1e-9);
    }
}
