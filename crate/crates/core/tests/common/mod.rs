#![allow(dead_code)]

use dantzig_core::bench::{gen_design, gen_observations, gen_sparse_beta};
use dantzig_core::rng::derive_seed;
use dantzig_core::{ChangeMeasure, Matrix, ProblemInstance, Scheme, SolverConfig};

/// Small instance with unit-norm Gaussian columns and a sparse signal.
pub fn small_instance(n: usize, p: usize, delta: f64, sigma: f64, seed: u64) -> ProblemInstance {
    let x = gen_design(n, p, derive_seed(&[seed, 1]));
    let (beta, _) = gen_sparse_beta(p, (p / 4).max(1), derive_seed(&[seed, 2])).unwrap();
    let y = gen_observations(&x, &beta, sigma, derive_seed(&[seed, 3])).unwrap();
    ProblemInstance::from_design(x, y, delta).unwrap()
}

/// Stage-I only, run to a tight relative change.
pub fn tight_config(alpha: f64, scheme: Scheme, epsilon: f64) -> SolverConfig {
    SolverConfig {
        epsilon,
        eta: usize::MAX,
        max_iters: 2_000_000,
        scheme,
        postprocess: false,
        change_measure: ChangeMeasure::PrimalDual,
        ..SolverConfig::new(alpha)
    }
}

/// Dense `D⁻¹XᵀX`.
pub fn dense_a(problem: &ProblemInstance) -> Matrix {
    let x = problem.x();
    let gram = x.transpose().matmul(x).unwrap();
    let d = problem.scaling();
    Matrix::from_fn(gram.nrows(), gram.ncols(), |i, j| gram.get(i, j) / d[i])
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(m: &Matrix) -> Vec<f64> {
    let n = m.nrows();
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| m.row(i).to_vec()).collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

/// Largest singular value via the eigenvalues of `MᵀM`.
pub fn dense_sigma_max(m: &Matrix) -> f64 {
    let mtm = m.transpose().matmul(m).unwrap();
    jacobi_eigenvalues(&mtm).into_iter().fold(0.0_f64, f64::max).sqrt()
}

pub fn norm1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

/// Solves a square system by Gaussian elimination with partial pivoting.
pub fn gauss_solve(m: &Matrix, rhs: &[f64]) -> Vec<f64> {
    let n = m.nrows();
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut r = m.row(i).to_vec();
            r.push(rhs[i]);
            r
        })
        .collect();
    for k in 0..n {
        let piv = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        a.swap(k, piv);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..=n {
                a[i][j] -= f * a[k][j];
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (a[k][n] - s) / a[k][k];
    }
    x
}
