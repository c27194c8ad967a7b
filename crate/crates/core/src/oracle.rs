//! Exact reference solutions for tiny instances.
//!
//! The Dantzig selector is the linear program
//!
//! ```text
//! minimize 1ᵀ(β⁺ + β⁻)
//! subject to −δ ≤ D⁻¹Xᵀ(X(β⁺ − β⁻) − y) ≤ δ,  β⁺, β⁻ ≥ 0
//! ```
//!
//! solved here by a dense two-phase tableau simplex with Bland's rule.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_len, Error, Result};
use crate::math::{norm1, norm_inf};
use crate::matrix::Matrix;
use crate::problem::ProblemInstance;

/// Largest `n` or `p` accepted by [`lp_reference_solve`].
pub const SIZE_LIMIT: usize = 24;

const PIVOT_EPS: f64 = 1e-11;
const COST_EPS: f64 = 1e-11;

/// `max(0, ‖D⁻¹Xᵀ(Xβ − y)‖∞ − δ)`
pub fn feasibility_violation(problem: &ProblemInstance, beta: &[f64]) -> Result<f64> {
    check_len("feasibility_violation input", problem.p(), beta.len())?;
    Ok((scaled_correlation_inf(problem, beta)? - problem.delta()).max(0.0))
}

/// `‖D⁻¹Xᵀ(Xβ − y)‖∞`
pub fn scaled_correlation_inf(problem: &ProblemInstance, beta: &[f64]) -> Result<f64> {
    let x = problem.x();
    let mut r = x.mul_vec(beta)?;
    for (ri, yi) in r.iter_mut().zip(problem.y()) {
        *ri -= yi;
    }
    let g = x.tr_mul_vec(&r)?;
    Ok(g.iter()
        .zip(problem.scaling())
        .fold(0.0, |m, (gj, dj)| m.max((gj / dj).abs())))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub beta: Vec<f64>,
    /// `‖β‖₁` at the optimum.
    pub objective: f64,
    /// Simplex pivots over both phases.
    pub pivots: usize,
}

/// Solves the Dantzig selector exactly for `n, p ≤ 24`.
pub fn lp_reference_solve(problem: &ProblemInstance) -> Result<LpSolution> {
    let (n, p) = (problem.n(), problem.p());
    if n > SIZE_LIMIT || p > SIZE_LIMIT {
        return Err(Error::SizeLimit {
            n,
            p,
            limit: SIZE_LIMIT,
        });
    }
    let x = problem.x();
    let d = problem.scaling();
    let delta = problem.delta();

    let mut b = x.tr_mul_vec(problem.y())?;
    for (bj, dj) in b.iter_mut().zip(d) {
        *bj /= dj;
    }
    if norm_inf(&b) <= delta {
        return Ok(LpSolution {
            beta: vec![0.0; p],
            objective: 0.0,
            pivots: 0,
        });
    }

    // M = D⁻¹XᵀX
    let gram = x.transpose().matmul(x)?;
    let m = Matrix::from_fn(p, p, |i, j| gram.get(i, j) / d[i]);

    // Rows:  [ M  −M] x ≤ δ + b
    //        [−M   M] x ≤ δ − b
    let mut rows = Vec::with_capacity(2 * p);
    let mut rhs = Vec::with_capacity(2 * p);
    for sign in [1.0, -1.0] {
        for i in 0..p {
            let mut row = Vec::with_capacity(2 * p);
            row.extend((0..p).map(|j| sign * m.get(i, j)));
            row.extend((0..p).map(|j| -sign * m.get(i, j)));
            rows.push(row);
            rhs.push(delta + sign * b[i]);
        }
    }
    let cost = vec![1.0; 2 * p];
    let (sol, pivots) = simplex_min(&rows, &rhs, &cost)?;
    let beta: Vec<f64> = (0..p).map(|j| sol[j] - sol[p + j]).collect();
    Ok(LpSolution {
        objective: norm1(&beta),
        beta,
        pivots,
    })
}

/// Dense tableau for `min cᵀx  s.t.  A x ≤ h, x ≥ 0`.
struct Tableau {
    /// Constraint rows; last entry is the right-hand side.
    t: Vec<Vec<f64>>,
    /// Reduced costs; last entry is minus the objective value.
    obj: Vec<f64>,
    basis: Vec<usize>,
    n_struct: usize,
    n_slack: usize,
    pivots: usize,
}

impl Tableau {
    fn width(&self) -> usize {
        self.obj.len() - 1
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width();
        let piv = self.t[r][c];
        for v in self.t[r].iter_mut() {
            *v /= piv;
        }
        self.t[r][c] = 1.0;
        let prow = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for k in 0..=w {
                    row[k] -= f * prow[k];
                }
                row[c] = 0.0;
            }
        }
        let f = self.obj[c];
        if f != 0.0 {
            for k in 0..=w {
                self.obj[k] -= f * prow[k];
            }
            self.obj[c] = 0.0;
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Bland's rule until optimal. Columns `>= allowed` never enter.
    fn run(&mut self, allowed: usize, budget: usize) -> Result<()> {
        let w = self.width();
        let mut used = 0;
        loop {
            let Some(c) = (0..allowed).find(|&j| self.obj[j] < -COST_EPS) else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.t.iter().enumerate() {
                let a = row[c];
                if a > PIVOT_EPS {
                    let ratio = row[w] / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            let tie = (ratio - br).abs() <= 1e-12 * (1.0 + br.abs());
                            if ratio < br && !tie || tie && self.basis[i] < self.basis[bi] {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            // Unbounded cannot happen for a nonnegative objective.
            let Some((r, _)) = leave else {
                return Err(Error::Infeasible);
            };
            self.pivot(r, c);
            used += 1;
            if used > budget {
                return Err(Error::PivotLimit(budget));
            }
        }
    }
}

/// Two-phase simplex. Returns the structural solution and the pivot count.
fn simplex_min(rows: &[Vec<f64>], rhs: &[f64], cost: &[f64]) -> Result<(Vec<f64>, usize)> {
    let m = rows.len();
    let n = cost.len();
    let artificial_rows: Vec<usize> = (0..m).filter(|&i| rhs[i] < 0.0).collect();
    let n_art = artificial_rows.len();
    let width = n + m + n_art;

    let mut t = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    for i in 0..m {
        let mut row = vec![0.0; width + 1];
        let sign = if rhs[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            row[j] = sign * rows[i][j];
        }
        row[n + i] = sign;
        row[width] = sign * rhs[i];
        if let Some(k) = artificial_rows.iter().position(|&r| r == i) {
            row[n + m + k] = 1.0;
            basis.push(n + m + k);
        } else {
            basis.push(n + i);
        }
        t.push(row);
    }
    let mut tab = Tableau {
        t,
        obj: vec![0.0; width + 1],
        basis,
        n_struct: n,
        n_slack: m,
        pivots: 0,
    };
    let budget = 10 * width;

    if n_art > 0 {
        // Phase I: minimize the sum of artificials.
        for k in 0..n_art {
            tab.obj[n + m + k] = 1.0;
        }
        for &i in &artificial_rows {
            for k in 0..=width {
                tab.obj[k] -= tab.t[i][k];
            }
        }
        tab.run(width, budget)?;
        if -tab.obj[width] > 1e-9 {
            return Err(Error::Infeasible);
        }
        // Drive zero-valued artificials out of the basis where possible.
        for r in 0..m {
            if tab.basis[r] >= n + m {
                if let Some(c) = (0..n + m).find(|&j| tab.t[r][j].abs() > 1e-9) {
                    tab.pivot(r, c);
                }
            }
        }
    }

    // Phase II.
    let allowed = tab.n_struct + tab.n_slack;
    tab.obj = vec![0.0; width + 1];
    tab.obj[..n].copy_from_slice(cost);
    for r in 0..m {
        let c = tab.basis[r];
        let f = tab.obj[c];
        if f != 0.0 {
            for k in 0..=width {
                tab.obj[k] -= f * tab.t[r][k];
            }
        }
    }
    tab.run(allowed, budget)?;

    let mut sol = vec![0.0; n];
    for (r, &c) in tab.basis.iter().enumerate() {
        if c < n {
            sol[c] = tab.t[r][width].max(0.0);
        }
    }
    Ok((sol, tab.pivots))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_observations_give_zero() {
        let prob = ProblemInstance::from_design(Matrix::identity(3), vec![0.0; 3], 0.1).unwrap();
        let sol = lp_reference_solve(&prob).unwrap();
        assert_eq!(sol.beta, vec![0.0; 3]);
        assert_eq!(sol.objective, 0.0);
    }

    #[test]
    fn identity_design_one_dimensional_kkt() {
        let prob = ProblemInstance::from_design(Matrix::identity(4), vec![1.0, 0.0, 0.0, 0.0], 0.5).unwrap();
        let sol = lp_reference_solve(&prob).unwrap();
        assert!((sol.beta[0] - 0.5).abs() <= 1e-12);
        assert!(sol.beta[1..].iter().all(|v| v.abs() <= 1e-12));
        assert!((sol.objective - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn large_delta_gives_zero() {
        let x = Matrix::from_rows(&[[1.0, 0.5], [0.0, 1.0], [1.0, -1.0]]).unwrap();
        let prob = ProblemInstance::from_design(x, vec![0.3, -0.2, 0.9], 10.0).unwrap();
        assert_eq!(lp_reference_solve(&prob).unwrap().beta, vec![0.0, 0.0]);
    }

    #[test]
    fn size_limit() {
        let prob = ProblemInstance::from_design(Matrix::identity(25), vec![1.0; 25], 0.1).unwrap();
        assert!(matches!(lp_reference_solve(&prob), Err(Error::SizeLimit { .. })));
    }

    #[test]
    fn violation_examples() {
        // ‖D⁻¹Xᵀy‖∞ = 3 with X = I.
        let prob = ProblemInstance::from_design(Matrix::identity(2), vec![3.0, -1.0], 1.0).unwrap();
        assert_eq!(feasibility_violation(&prob, &[0.0, 0.0]).unwrap(), 2.0);
        let wide = prob.with_delta(1e6).unwrap();
        assert_eq!(feasibility_violation(&wide, &[5.0, 5.0]).unwrap(), 0.0);
        assert!(feasibility_violation(&prob, &[0.0]).is_err());
    }

    #[test]
    fn exact_fit_with_zero_delta() {
        let x = Matrix::from_rows(&[[2.0, 1.0], [1.0, 3.0]]).unwrap();
        let prob = ProblemInstance::from_design(x, vec![3.0, 5.0], 0.0).unwrap();
        let sol = lp_reference_solve(&prob).unwrap();
        assert!((sol.beta[0] - 0.8).abs() <= 1e-10);
        assert!((sol.beta[1] - 1.4).abs() <= 1e-10);
    }
}
