//! Dense two-phase primal simplex.
//!
//! Desk-scale LPs only (a few hundred rows and columns). The tableau is
//! dense and row-major. Dantzig pricing is used until a run of degenerate
//! pivots, then Bland's rule until the next strict improvement. At the end
//! the basic solution and the duals are recomputed from an LU factorization
//! of the final basis, which removes the drift accumulated by pivoting.

use nalgebra::{DMatrix, DVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `min cᵀx` over linear constraints, with per-variable sign freedom.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    cost: Vec<f64>,
    free: Vec<bool>,
    rows: Vec<Constraint>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    /// One multiplier per constraint: `c - Aᵀy` is the reduced cost.
    pub duals: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct SimplexOptions {
    pub max_iterations: usize,
    pub pivot_tol: f64,
    pub optimality_tol: f64,
    pub feasibility_tol: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            max_iterations: 50_000,
            pivot_tol: 1e-9,
            optimality_tol: 1e-9,
            feasibility_tol: 1e-8,
        }
    }
}

impl LinearProgram {
    /// All variables nonnegative unless marked free with [`set_free`](Self::set_free).
    pub fn new(cost: Vec<f64>) -> Self {
        let n = cost.len();
        LinearProgram {
            cost,
            free: vec![false; n],
            rows: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn set_free(&mut self, j: usize) {
        self.free[j] = true;
    }

    pub fn add(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        assert_eq!(coeffs.len(), self.cost.len(), "constraint width");
        self.rows.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn solve(&self, opts: &SimplexOptions) -> LpSolution {
        Standard::from_program(self).solve(self, opts)
    }
}

/// `min cᵀz, A z = b, z >= 0, b >= 0` plus bookkeeping to map back.
struct Standard {
    rows: usize,
    a: Vec<f64>,
    width: usize,
    b: Vec<f64>,
    cost: Vec<f64>,
    /// (structural index, sign) for each standard column that is structural.
    origin: Vec<Option<(usize, f64)>>,
    first_artificial: usize,
    initial_basis: Vec<usize>,
    row_sign: Vec<f64>,
}

impl Standard {
    fn from_program(lp: &LinearProgram) -> Self {
        let mut origin = Vec::new();
        let mut col_of = Vec::with_capacity(lp.num_vars());
        for j in 0..lp.num_vars() {
            col_of.push(origin.len());
            origin.push(Some((j, 1.0)));
            if lp.free[j] {
                origin.push(Some((j, -1.0)));
            }
        }
        let structural = origin.len();
        let rows = lp.rows.len();
        let mut row_sign = vec![1.0; rows];
        let mut relations = Vec::with_capacity(rows);
        for (i, row) in lp.rows.iter().enumerate() {
            let mut rel = row.relation;
            if row.rhs < 0.0 {
                row_sign[i] = -1.0;
                rel = match rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
            relations.push(rel);
        }
        let slacks = relations.iter().filter(|r| **r != Relation::Eq).count();
        let artificials = relations.iter().filter(|r| **r != Relation::Le).count();
        let width = structural + slacks + artificials;
        let first_artificial = structural + slacks;

        let mut a = vec![0.0; rows * width];
        let mut b = vec![0.0; rows];
        let mut initial_basis = vec![0; rows];
        let (mut next_slack, mut next_art) = (structural, first_artificial);
        for (i, row) in lp.rows.iter().enumerate() {
            let s = row_sign[i];
            let line = &mut a[i * width..(i + 1) * width];
            for (j, &v) in row.coeffs.iter().enumerate() {
                let c = col_of[j];
                line[c] = s * v;
                if lp.free[j] {
                    line[c + 1] = -s * v;
                }
            }
            b[i] = s * row.rhs;
            match relations[i] {
                Relation::Le => {
                    line[next_slack] = 1.0;
                    initial_basis[i] = next_slack;
                    next_slack += 1;
                }
                Relation::Ge => {
                    line[next_slack] = -1.0;
                    next_slack += 1;
                    line[next_art] = 1.0;
                    initial_basis[i] = next_art;
                    next_art += 1;
                }
                Relation::Eq => {
                    line[next_art] = 1.0;
                    initial_basis[i] = next_art;
                    next_art += 1;
                }
            }
        }
        let mut cost = vec![0.0; width];
        for (c, o) in origin.iter().enumerate() {
            if let Some((j, _)) = o {
                cost[c] = lp.cost[*j];
            }
        }
        origin.resize(width, None);
        Standard {
            rows,
            a,
            width,
            b,
            cost,
            origin,
            first_artificial,
            initial_basis,
            row_sign,
        }
    }

    fn solve(&self, lp: &LinearProgram, opts: &SimplexOptions) -> LpSolution {
        let mut tab = Tableau::new(self);
        let mut iterations = 0;

        if self.first_artificial < self.width {
            let phase1: Vec<f64> = (0..self.width)
                .map(|j| if j >= self.first_artificial { 1.0 } else { 0.0 })
                .collect();
            tab.price(&phase1);
            let status = tab.run(self.width, opts, &mut iterations);
            if status == LpStatus::IterationLimit {
                return self.finish(lp, &tab, LpStatus::IterationLimit, iterations);
            }
            let infeas: f64 = (0..self.rows)
                .filter(|&i| tab.basis[i] >= self.first_artificial)
                .map(|i| tab.rhs(i))
                .sum();
            let scale = self.b.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            if infeas > opts.feasibility_tol * scale {
                return self.finish(lp, &tab, LpStatus::Infeasible, iterations);
            }
            tab.drive_out_artificials(self.first_artificial);
        }

        tab.price(&self.cost);
        let status = tab.run(self.first_artificial, opts, &mut iterations);
        self.finish(lp, &tab, status, iterations)
    }

    fn finish(&self, lp: &LinearProgram, tab: &Tableau, status: LpStatus, iterations: usize) -> LpSolution {
        let m = self.rows;
        let mut z = vec![0.0; self.width];
        let mut duals = vec![0.0; m];

        // Refine from the basis matrix.
        let bmat = DMatrix::from_fn(m, m, |i, k| self.a[i * self.width + tab.basis[k]]);
        let lu = bmat.clone().lu();
        let refined = lu.solve(&DVector::from_column_slice(&self.b));
        match refined {
            Some(xb) if xb.iter().all(|v| v.is_finite()) => {
                for (k, &col) in tab.basis.iter().enumerate() {
                    z[col] = xb[k].max(0.0);
                }
            }
            _ => {
                for (k, &col) in tab.basis.iter().enumerate() {
                    z[col] = tab.rhs(k).max(0.0);
                }
            }
        }
        if status == LpStatus::Optimal {
            let cb = DVector::from_fn(m, |k, _| self.cost[tab.basis[k]]);
            if let Some(pi) = bmat.transpose().lu().solve(&cb) {
                for i in 0..m {
                    duals[i] = pi[i] * self.row_sign[i];
                }
            }
        }

        let mut x = vec![0.0; lp.num_vars()];
        for (c, o) in self.origin.iter().enumerate() {
            if let Some((j, s)) = o {
                x[*j] += s * z[c];
            }
        }
        let objective = x.iter().zip(&lp.cost).map(|(a, b)| a * b).sum();
        LpSolution {
            status,
            x,
            duals,
            objective,
            iterations,
        }
    }
}

struct Tableau {
    rows: usize,
    width: usize,
    /// rows x (width + 1); the last column is the right-hand side.
    t: Vec<f64>,
    /// Reduced costs, length width + 1 (last entry is -objective).
    d: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn new(s: &Standard) -> Self {
        let stride = s.width + 1;
        let mut t = vec![0.0; s.rows * stride];
        for i in 0..s.rows {
            t[i * stride..i * stride + s.width].copy_from_slice(&s.a[i * s.width..(i + 1) * s.width]);
            t[i * stride + s.width] = s.b[i];
        }
        Tableau {
            rows: s.rows,
            width: s.width,
            t,
            d: vec![0.0; stride],
            basis: s.initial_basis.clone(),
        }
    }

    fn stride(&self) -> usize {
        self.width + 1
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.stride() + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.width)
    }

    fn price(&mut self, cost: &[f64]) {
        let stride = self.stride();
        self.d[..self.width].copy_from_slice(cost);
        self.d[self.width] = 0.0;
        for i in 0..self.rows {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.t[i * stride..(i + 1) * stride];
                for (d, v) in self.d.iter_mut().zip(row) {
                    *d -= cb * v;
                }
            }
        }
    }

    /// Iterates with entering candidates restricted to columns `< allowed`.
    fn run(&mut self, allowed: usize, opts: &SimplexOptions, iterations: &mut usize) -> LpStatus {
        let scale = self.d[..allowed].iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let opt_tol = opts.optimality_tol * scale;
        let mut degenerate_run = 0usize;
        let mut bland = false;
        loop {
            if *iterations >= opts.max_iterations {
                return LpStatus::IterationLimit;
            }
            let entering = if bland {
                (0..allowed).find(|&j| self.d[j] < -opt_tol)
            } else {
                let mut best = None;
                let mut best_val = -opt_tol;
                for j in 0..allowed {
                    if self.d[j] < best_val {
                        best_val = self.d[j];
                        best = Some(j);
                    }
                }
                best
            };
            let Some(col) = entering else {
                return LpStatus::Optimal;
            };

            let mut leave: Option<(usize, f64, f64)> = None;
            for i in 0..self.rows {
                let a = self.at(i, col);
                if a > opts.pivot_tol {
                    let ratio = self.rhs(i).max(0.0) / a;
                    let better = match leave {
                        None => true,
                        Some((li, lr, la)) => {
                            let tie = (ratio - lr).abs() <= 1e-12 * (1.0 + lr.abs());
                            if tie {
                                if bland {
                                    self.basis[i] < self.basis[li]
                                } else {
                                    a > la
                                }
                            } else {
                                ratio < lr
                            }
                        }
                    };
                    if better {
                        leave = Some((i, ratio, a));
                    }
                }
            }
            let Some((row, ratio, _)) = leave else {
                return LpStatus::Unbounded;
            };
            if ratio <= 1e-12 {
                degenerate_run += 1;
                if degenerate_run > 25 {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
                bland = false;
            }
            self.pivot(row, col);
            *iterations += 1;
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let stride = self.stride();
        let piv = self.t[row * stride + col];
        {
            let prow = &mut self.t[row * stride..(row + 1) * stride];
            for v in prow.iter_mut() {
                *v /= piv;
            }
            prow[col] = 1.0;
        }
        let prow: Vec<f64> = self.t[row * stride..(row + 1) * stride].to_vec();
        let nz: Vec<usize> = (0..stride).filter(|&j| prow[j] != 0.0).collect();
        for i in 0..self.rows {
            if i == row {
                continue;
            }
            let f = self.t[i * stride + col];
            if f != 0.0 {
                let line = &mut self.t[i * stride..(i + 1) * stride];
                for &j in &nz {
                    line[j] -= f * prow[j];
                }
                line[col] = 0.0;
            }
        }
        let f = self.d[col];
        if f != 0.0 {
            for &j in &nz {
                self.d[j] -= f * prow[j];
            }
            self.d[col] = 0.0;
        }
        self.basis[row] = col;
    }

    /// Pivots basic artificials (at zero level) out where possible; rows
    /// with no usable pivot are redundant and keep their artificial.
    fn drive_out_artificials(&mut self, first_artificial: usize) {
        for i in 0..self.rows {
            if self.basis[i] < first_artificial {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..first_artificial {
                if self.basis.contains(&j) {
                    continue;
                }
                let a = self.at(i, j).abs();
                if a > 1e-7 && best.is_none_or(|(_, b)| a > b) {
                    best = Some((j, a));
                }
            }
            if let Some((j, _)) = best {
                self.pivot(i, j);
            }
        }
    }
}
