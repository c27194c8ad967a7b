mod common;

use common::{dense_a, dense_sigma_max};
use dantzig_core::linop::{estimate_spectral_norm, POWER_MAX_ITERS, POWER_REL_TOL};
use dantzig_core::rng::{normal_vec, seeded};
use dantzig_core::{dot, DantzigOperator, Matrix, ProblemInstance};
use rand::Rng;

fn random_problem(n: usize, p: usize, seed: u64) -> ProblemInstance {
    let mut rng = seeded(seed);
    let x = Matrix::from_row_major(n, p, normal_vec(&mut rng, n * p)).unwrap();
    let y = normal_vec(&mut rng, n);
    ProblemInstance::from_design(x, y, 0.1).unwrap()
}

/// Random X with an arbitrary positive scaling, so that A is not symmetric.
fn skewed_problem(n: usize, p: usize, seed: u64) -> ProblemInstance {
    let mut rng = seeded(seed);
    let x = Matrix::from_row_major(n, p, normal_vec(&mut rng, n * p)).unwrap();
    let y = normal_vec(&mut rng, n);
    let d: Vec<f64> = (0..p).map(|_| rng.random_range(0.2..5.0)).collect();
    ProblemInstance::with_scaling(x, y, d, 0.1).unwrap()
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let den = b.iter().map(|x| x.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    num / den
}

#[test]
fn apply_a_matches_dense_product() {
    for (seed, (n, p)) in [(6, 9), (12, 8), (20, 12), (9, 30)].into_iter().enumerate() {
        for prob in [
            random_problem(n, p, seed as u64),
            skewed_problem(n, p, 100 + seed as u64),
        ] {
            let op = DantzigOperator::new(&prob).unwrap();
            let a = dense_a(&prob);
            let at = a.transpose();
            let mut rng = seeded(7 + seed as u64);
            for _ in 0..20 {
                let beta = normal_vec(&mut rng, p);
                assert!(rel_err(&op.apply_a(&beta).unwrap(), &a.mul_vec(&beta).unwrap()) <= 1e-12);
                let tau = normal_vec(&mut rng, p);
                assert!(rel_err(&op.apply_at(&tau).unwrap(), &at.mul_vec(&tau).unwrap()) <= 1e-12);
            }
        }
    }
}

#[test]
fn cached_b_matches_explicit_product() {
    let prob = skewed_problem(15, 10, 3);
    let op = DantzigOperator::new(&prob).unwrap();
    let xty = prob.x().transpose().mul_vec(prob.y()).unwrap();
    let b: Vec<f64> = xty.iter().zip(prob.scaling()).map(|(v, d)| v / d).collect();
    assert!(rel_err(op.b(), &b) <= 1e-12);
}

#[test]
fn adjointness_over_random_pairs() {
    for (seed, (n, p)) in [(6, 9), (12, 8), (30, 20), (10, 64)].into_iter().enumerate() {
        for prob in [
            random_problem(n, p, seed as u64),
            skewed_problem(n, p, 50 + seed as u64),
        ] {
            let op = DantzigOperator::new(&prob).unwrap();
            let mut rng = seeded(99 + seed as u64);
            for _ in 0..100 {
                let beta = normal_vec(&mut rng, p);
                let tau = normal_vec(&mut rng, p);
                let lhs = dot(&op.apply_a(&beta).unwrap(), &tau);
                let rhs = dot(&beta, &op.apply_at(&tau).unwrap());
                let rel = (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1e-300);
                assert!(rel <= 1e-10, "relative adjointness error {rel}");
            }
        }
    }
}

#[test]
fn unit_scaling_makes_a_symmetric() {
    let mut rng = seeded(11);
    let (n, p) = (14, 9);
    let x = Matrix::from_row_major(n, p, normal_vec(&mut rng, n * p)).unwrap();
    let prob = ProblemInstance::with_unit_scaling(x, vec![0.0; n], 0.0).unwrap();
    let op = DantzigOperator::new(&prob).unwrap();
    for _ in 0..20 {
        let v = normal_vec(&mut rng, p);
        assert!(rel_err(&op.apply_a(&v).unwrap(), &op.apply_at(&v).unwrap()) <= 1e-12);
    }
}

#[test]
fn norm_estimate_matches_dense_singular_value() {
    let shapes = [(12, 20), (12, 8), (40, 64), (64, 30), (5, 64)];
    for (seed, (n, p)) in shapes.into_iter().enumerate() {
        for prob in [
            random_problem(n, p, 200 + seed as u64),
            skewed_problem(n, p, 300 + seed as u64),
        ] {
            let op = DantzigOperator::new(&prob).unwrap();
            let sigma = dense_sigma_max(&dense_a(&prob));
            let rel = (op.norm_estimate() - sigma).abs() / sigma;
            assert!(rel <= 1e-6, "({n},{p}) estimate {} vs {sigma}", op.norm_estimate());
        }
    }
}

#[test]
fn norm_estimate_is_seed_deterministic() {
    let prob = random_problem(12, 20, 5);
    let op = DantzigOperator::new(&prob).unwrap();
    let a = estimate_spectral_norm(&op, POWER_MAX_ITERS, POWER_REL_TOL, 42).unwrap();
    let b = estimate_spectral_norm(&op, POWER_MAX_ITERS, POWER_REL_TOL, 42).unwrap();
    assert_eq!(a.to_bits(), b.to_bits());
}

#[test]
fn each_application_costs_two_matvecs() {
    let prob = random_problem(10, 7, 8);
    let op = DantzigOperator::with_norm(&prob, 1.0).unwrap();
    // Building b is one matvec.
    assert_eq!(op.matvec_count(), 1);
    let v = vec![1.0; 7];
    op.apply_a(&v).unwrap();
    assert_eq!(op.matvec_count(), 3);
    op.apply_at(&v).unwrap();
    assert_eq!(op.matvec_count(), 5);
}
