use nalgebra::{DMatrix, DVector};

use super::{least_squares, L1Problem, SolveReport, SolveStatus};
use crate::error::{Error, Result};
use crate::linalg::{l1, l2, pinv_solve};

pub const BRUTE_FORCE_MAX_N: usize = 20;
pub const BRUTE_FORCE_MAX_SUPPORT: usize = 3;

/// Global minimum of `‖u‖₁` subject to `A_u u = A_free f + b` over every
/// support of size at most `max_support`, each solved exactly by least
/// squares. The mode of `problem` is ignored.
///
/// Supports are visited in lexicographic order of their sorted index lists
/// (a prefix before its extensions) and the incumbent is replaced only on
/// a strict improvement, so among equal objectives the lexicographically
/// smallest support wins.
pub fn brute_force_l1(problem: &L1Problem, max_support: usize) -> Result<SolveReport> {
    let n = problem.n_penalized();
    if n > BRUTE_FORCE_MAX_N || max_support > BRUTE_FORCE_MAX_SUPPORT {
        return Err(Error::SizeLimit(format!(
            "n = {n}, max_support = {max_support} (limits {BRUTE_FORCE_MAX_N}, {BRUTE_FORCE_MAX_SUPPORT})"
        )));
    }
    let mut search = Search {
        problem,
        best: None,
        visited: 0,
    };
    let mut stack = Vec::with_capacity(max_support);
    search.visit(&stack);
    search.extend(&mut stack, 0, max_support);

    let visited = search.visited;
    match search.best {
        Some(c) => {
            let mut u = vec![0.0; n];
            for (k, &j) in c.support.iter().enumerate() {
                u[j] = c.values[k];
            }
            let residual_norm = l2(problem.residual(&u, &c.free).as_slice());
            Ok(SolveReport {
                objective: l1(&u),
                u,
                free: c.free,
                residual_norm,
                iterations: visited,
                status: SolveStatus::Optimal,
                kkt_residual: residual_norm,
                dual: None,
            })
        }
        None => Ok(SolveReport {
            u: vec![0.0; n],
            free: vec![0.0; problem.n_free()],
            objective: f64::NAN,
            residual_norm: l2(problem.b().as_slice()),
            iterations: visited,
            status: SolveStatus::Infeasible,
            kkt_residual: f64::INFINITY,
            dual: None,
        }),
    }
}

struct Candidate {
    support: Vec<usize>,
    values: Vec<f64>,
    free: Vec<f64>,
    objective: f64,
}

struct Search<'a> {
    problem: &'a L1Problem,
    best: Option<Candidate>,
    visited: usize,
}

impl Search<'_> {
    fn extend(&mut self, stack: &mut Vec<usize>, start: usize, max_support: usize) {
        if stack.len() == max_support {
            return;
        }
        for j in start..self.problem.n_penalized() {
            stack.push(j);
            self.visit(stack);
            self.extend(stack, j + 1, max_support);
            stack.pop();
        }
    }

    fn visit(&mut self, support: &[usize]) {
        self.visited += 1;
        let p = self.problem;
        let (rows, nf) = (p.rows(), p.n_free());
        let width = support.len() + nf;
        if width > rows {
            return;
        }
        let sys = DMatrix::from_fn(rows, width, |i, c| {
            if c < support.len() {
                p.a_u()[(i, support[c])]
            } else {
                -p.a_free()[(i, c - support.len())]
            }
        });
        let sol = match least_squares(&sys, p.b()) {
            Ok(sol) => sol,
            Err(_) if u_part_identified(&sys, support.len()) => pinv_solve(&sys, p.b()),
            Err(_) => return,
        };
        let v = DVector::from_column_slice(&sol);
        let resid = (&sys * &v - p.b()).amax();
        let scale = 1.0 + p.b().amax();
        if resid > 1e-9 * scale {
            return;
        }
        let values = sol[..support.len()].to_vec();
        let objective = l1(&values);
        let improves = match &self.best {
            None => true,
            Some(b) => objective < b.objective - 1e-10 * (1.0 + b.objective),
        };
        if improves {
            self.best = Some(Candidate {
                support: support.to_vec(),
                values,
                free: sol[support.len()..].to_vec(),
                objective,
            });
        }
    }
}

/// Whether the first `n_u` coordinates of every solution of
/// `sys v = b` coincide, so that only the free part is unidentified.
/// Otherwise the ℓ1 minimum over the solution set lies on a smaller
/// support, which the search visits separately.
fn u_part_identified(sys: &DMatrix<f64>, n_u: usize) -> bool {
    let svd = sys.clone().svd(false, true);
    let Some(v_t) = svd.v_t else {
        return false;
    };
    let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cols = sys.ncols();
    for k in 0..cols {
        let sigma = if k < svd.singular_values.len() { svd.singular_values[k] } else { 0.0 };
        if sigma > 1e-10 * top {
            continue;
        }
        if k >= v_t.nrows() || (0..n_u).any(|j| v_t[(k, j)].abs() > 1e-9) {
            return false;
        }
    }
    // A wide system also has null directions beyond the computed rows.
    v_t.nrows() >= cols
}
