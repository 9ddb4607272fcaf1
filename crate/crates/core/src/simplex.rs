//! Dense two-phase primal simplex with Bland's rule.
//!
//! The programs solved here are tiny (tens of variables), so a plain tableau
//! with anti-cycling pivoting is the right tool: deterministic, dependency
//! free, and accurate to near machine precision at this scale.

use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintOp {
    Eq,
    Ge,
    Le,
}

/// `minimize c.z` subject to row constraints and `z >= 0`.
#[derive(Debug, Clone)]
pub struct LinearProgram<R> {
    pub num_vars: usize,
    pub objective: Vec<R>,
    /// Each row is (coefficients, op, rhs).
    pub rows: Vec<(Vec<R>, ConstraintOp, R)>,
}

#[derive(Debug, Clone)]
pub struct LpSolution<R> {
    pub primal: Vec<R>,
    pub value: R,
    pub iterations: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LpError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("simplex iteration limit reached")]
    IterationLimit,
}

const PIVOT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-7;

fn pivot_tol<R: Real>() -> R {
    let floor = R::from_f64_lit(PIVOT_TOL);
    let eps = R::epsilon() * R::from_f64_lit(100.0);
    if eps > floor {
        eps
    } else {
        floor
    }
}

fn feas_tol<R: Real>() -> R {
    let floor = R::from_f64_lit(FEAS_TOL);
    let eps = R::epsilon() * R::from_f64_lit(1e4);
    if eps > floor {
        eps
    } else {
        floor
    }
}

struct Tableau<R> {
    /// `m x (total + 1)` rows; last column is the RHS.
    rows: Vec<Vec<R>>,
    /// Objective row of reduced costs; last entry is minus the value.
    obj: Vec<R>,
    basis: Vec<usize>,
    /// Columns that must never enter the basis (retired artificials).
    banned: Vec<bool>,
    iterations: usize,
}

impl<R: Real> Tableau<R> {
    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.rows[row][col];
        for v in self.rows[row].iter_mut() {
            *v = *v / piv;
        }
        let width = self.rows[row].len();
        for r in 0..self.rows.len() {
            if r == row {
                continue;
            }
            let factor = self.rows[r][col];
            if factor != R::zero() {
                for c in 0..width {
                    let delta = factor * self.rows[row][c];
                    self.rows[r][c] = self.rows[r][c] - delta;
                }
                self.rows[r][col] = R::zero();
            }
        }
        let factor = self.obj[col];
        if factor != R::zero() {
            for c in 0..width {
                let delta = factor * self.rows[row][c];
                self.obj[c] = self.obj[c] - delta;
            }
            self.obj[col] = R::zero();
        }
        self.basis[row] = col;
        self.iterations += 1;
    }

    /// Runs Bland's rule to optimality of the current objective row.
    fn optimize(&mut self, max_iters: usize) -> Result<(), LpError> {
        let tol = pivot_tol::<R>();
        let ncols = self.obj.len() - 1;
        loop {
            if self.iterations > max_iters {
                return Err(LpError::IterationLimit);
            }
            // Entering: lowest-index column with negative reduced cost.
            let entering = (0..ncols)
                .find(|&c| !self.banned[c] && self.obj[c] < -tol);
            let Some(col) = entering else {
                return Ok(());
            };
            // Leaving: minimum ratio, ties to the lowest basis index.
            let mut leave: Option<(usize, R)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][col];
                if a <= tol {
                    continue;
                }
                let ratio = *self.rows[r].last().unwrap() / a;
                match leave {
                    None => leave = Some((r, ratio)),
                    Some((br, brr)) => {
                        if ratio < brr - tol
                            || (ratio < brr + tol && self.basis[r] < self.basis[br])
                        {
                            leave = Some((r, ratio));
                        }
                    }
                }
            }
            let Some((row, _)) = leave else {
                return Err(LpError::Unbounded);
            };
            self.pivot(row, col);
        }
    }
}

/// Solves the program; `max_iters` guards against pathological cycling.
pub fn solve<R: Real>(lp: &LinearProgram<R>) -> Result<LpSolution<R>, LpError> {
    let n = lp.num_vars;
    let m = lp.rows.len();
    assert_eq!(lp.objective.len(), n);

    // Standard form: one slack/surplus per inequality, then one artificial
    // per row. Right-hand sides are made nonnegative first.
    let num_slack = lp
        .rows
        .iter()
        .filter(|(_, op, _)| *op != ConstraintOp::Eq)
        .count();
    let total = n + num_slack + m;
    let mut rows: Vec<Vec<R>> = Vec::with_capacity(m);
    let mut slack_idx = 0;
    for (i, (coeffs, op, rhs)) in lp.rows.iter().enumerate() {
        assert_eq!(coeffs.len(), n);
        let flip = *rhs < R::zero();
        let sgn = if flip { -R::one() } else { R::one() };
        let mut row = vec![R::zero(); total + 1];
        for (c, v) in coeffs.iter().enumerate() {
            row[c] = sgn * *v;
        }
        if *op != ConstraintOp::Eq {
            // Ge becomes surplus (-1), Le becomes slack (+1); flipping the
            // row flips the roles.
            let dir = match op {
                ConstraintOp::Ge => -R::one(),
                ConstraintOp::Le => R::one(),
                ConstraintOp::Eq => unreachable!(),
            };
            row[n + slack_idx] = sgn * dir;
            slack_idx += 1;
        }
        row[n + num_slack + i] = R::one();
        row[total] = sgn * *rhs;
        rows.push(row);
    }

    let basis: Vec<usize> = (0..m).map(|i| n + num_slack + i).collect();
    let mut banned = vec![false; total];

    // Phase 1: minimize the sum of artificials.
    let mut obj = vec![R::zero(); total + 1];
    for art in 0..m {
        for c in 0..=total {
            let v = rows[art][c];
            obj[c] = obj[c] - v;
        }
    }
    // Reduced cost of each artificial itself is zero in its own basis.
    for art in 0..m {
        obj[n + num_slack + art] = R::zero();
    }

    let mut t = Tableau {
        rows,
        obj,
        basis,
        banned: banned.clone(),
        iterations: 0,
    };
    let max_iters = 2000 + 200 * (m + total);
    t.optimize(max_iters)?;
    let phase1 = -*t.obj.last().unwrap();
    if phase1.abs() > feas_tol::<R>() {
        return Err(LpError::Infeasible);
    }

    // Drive surviving artificials out of the basis where possible.
    for r in 0..m {
        if t.basis[r] >= n + num_slack {
            if let Some(col) = (0..n + num_slack)
                .find(|&c| t.rows[r][c].abs() > pivot_tol::<R>())
            {
                t.pivot(r, col);
            }
        }
    }
    for art in 0..m {
        banned[n + num_slack + art] = true;
    }
    t.banned = banned;

    // Phase 2: the real objective.
    let mut obj = vec![R::zero(); total + 1];
    for (c, v) in lp.objective.iter().enumerate() {
        obj[c] = *v;
    }
    for r in 0..m {
        let b = t.basis[r];
        if b < n {
            let cost = lp.objective[b];
            if cost != R::zero() {
                for c in 0..=total {
                    let delta = cost * t.rows[r][c];
                    obj[c] = obj[c] - delta;
                }
            }
        }
    }
    t.obj = obj;
    t.optimize(max_iters)?;

    let mut primal = vec![R::zero(); n];
    for r in 0..m {
        if t.basis[r] < n {
            primal[t.basis[r]] = *t.rows[r].last().unwrap();
        }
    }
    let value = lp
        .objective
        .iter()
        .zip(primal.iter())
        .map(|(c, z)| *c * *z)
        .sum();
    Ok(LpSolution {
        primal,
        value,
        iterations: t.iterations,
    })
}
