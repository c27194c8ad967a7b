//! Implicit application of `A = D⁻¹XᵀX`, its adjoint `Aᵀ = XᵀXD⁻¹`, the
//! vector `b = D⁻¹Xᵀy`, and a power-iteration estimate of `‖A‖₂`.
//!
//! `A` is never formed. Each application costs two rectangular matvecs and
//! one diagonal scale, i.e. `O(4np)` flops per forward/adjoint pair.

use alloc::vec;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicU64, Ordering};

use crate::error::{check_len, Error, Result};
use crate::math::{norm2, sqrt};
use crate::problem::ProblemInstance;
use crate::rng;

pub const POWER_MAX_ITERS: usize = 500;
pub const POWER_REL_TOL: f64 = 1e-8;
pub const POWER_SEED: u64 = 0;
/// Budget of the second attempt made by [`DantzigOperator::with_seed`] when
/// the first one stalls on a small spectral gap.
pub const POWER_RETRY_ITERS: usize = 20 * POWER_MAX_ITERS;
/// Inflation applied to the norm estimate before it enters the step rule.
pub const NORM_GUARD: f64 = 1.0 + 1e-4;

#[derive(Debug)]
pub struct DantzigOperator<'a> {
    problem: &'a ProblemInstance,
    inv_d: Vec<f64>,
    b: Vec<f64>,
    norm_estimate: f64,
    matvecs: AtomicU64,
}

impl<'a> DantzigOperator<'a> {
    /// Builds the operator and estimates `‖A‖₂` with the default power
    /// iteration settings and seed.
    pub fn new(problem: &'a ProblemInstance) -> Result<Self> {
        Self::with_seed(problem, POWER_SEED)
    }

    /// Runs the power iteration with the default budget and, if that does
    /// not converge, once more from the same start with
    /// [`POWER_RETRY_ITERS`].
    pub fn with_seed(problem: &'a ProblemInstance, seed: u64) -> Result<Self> {
        let mut op = Self::unnormed(problem);
        op.norm_estimate = match estimate_spectral_norm(&op, POWER_MAX_ITERS, POWER_REL_TOL, seed) {
            Err(Error::ConvergenceFailure { .. }) => {
                estimate_spectral_norm(&op, POWER_RETRY_ITERS, POWER_REL_TOL, seed)?
            }
            other => other?,
        };
        Ok(op)
    }

    /// Builds the operator with a caller-supplied norm estimate.
    pub fn with_norm(problem: &'a ProblemInstance, norm_estimate: f64) -> Result<Self> {
        if !(norm_estimate > 0.0) || !norm_estimate.is_finite() {
            return Err(Error::InvalidParameter {
                name: "norm_estimate",
                reason: "must be finite and positive",
            });
        }
        let mut op = Self::unnormed(problem);
        op.norm_estimate = norm_estimate;
        Ok(op)
    }

    fn unnormed(problem: &'a ProblemInstance) -> Self {
        let inv_d: Vec<f64> = problem.scaling().iter().map(|d| 1.0 / d).collect();
        let mut b = vec![0.0; problem.p()];
        problem.x().tr_mul_vec_into(problem.y(), &mut b);
        for (bj, s) in b.iter_mut().zip(&inv_d) {
            *bj *= s;
        }
        Self {
            problem,
            inv_d,
            b,
            norm_estimate: f64::NAN,
            matvecs: AtomicU64::new(1),
        }
    }

    pub fn problem(&self) -> &'a ProblemInstance {
        self.problem
    }

    /// `b = D⁻¹Xᵀy`
    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// Estimate of `‖A‖₂` as returned by power iteration.
    pub fn norm_estimate(&self) -> f64 {
        self.norm_estimate
    }

    /// Norm estimate inflated by [`NORM_GUARD`]; used in the step rule.
    pub fn guarded_norm(&self) -> f64 {
        self.norm_estimate * NORM_GUARD
    }

    pub fn n(&self) -> usize {
        self.problem.n()
    }

    pub fn p(&self) -> usize {
        self.problem.p()
    }

    /// Rectangular matvecs performed so far (including the one for `b`).
    pub fn matvec_count(&self) -> u64 {
        self.matvecs.load(Ordering::Relaxed)
    }

    /// `out = D⁻¹Xᵀ(Xβ)`; `work` must have length n.
    pub fn apply_a_into(&self, beta: &[f64], work: &mut [f64], out: &mut [f64]) {
        let x = self.problem.x();
        x.mul_vec_into(beta, work);
        x.tr_mul_vec_into(work, out);
        for (o, s) in out.iter_mut().zip(&self.inv_d) {
            *o *= s;
        }
        self.matvecs.fetch_add(2, Ordering::Relaxed);
    }

    /// `out = XᵀX(D⁻¹τ)`; `work` must have length n, `scaled` length p.
    pub fn apply_at_into(&self, tau: &[f64], scaled: &mut [f64], work: &mut [f64], out: &mut [f64]) {
        for ((s, t), w) in scaled.iter_mut().zip(tau).zip(&self.inv_d) {
            *s = t * w;
        }
        let x = self.problem.x();
        x.mul_vec_into(scaled, work);
        x.tr_mul_vec_into(work, out);
        self.matvecs.fetch_add(2, Ordering::Relaxed);
    }

    pub fn apply_a(&self, beta: &[f64]) -> Result<Vec<f64>> {
        check_len("apply_A input", self.p(), beta.len())?;
        let mut work = vec![0.0; self.n()];
        let mut out = vec![0.0; self.p()];
        self.apply_a_into(beta, &mut work, &mut out);
        Ok(out)
    }

    pub fn apply_at(&self, tau: &[f64]) -> Result<Vec<f64>> {
        check_len("apply_At input", self.p(), tau.len())?;
        let mut scaled = vec![0.0; self.p()];
        let mut work = vec![0.0; self.n()];
        let mut out = vec![0.0; self.p()];
        self.apply_at_into(tau, &mut scaled, &mut work, &mut out);
        Ok(out)
    }
}

/// Power iteration on `AᵀA` from a seeded Gaussian start.
///
/// Returns `√q` where `q = ‖Av‖₂²` is the Rayleigh quotient at the current
/// unit vector, once successive quotients agree to `rel_tol`. On failure the
/// error carries the largest quotient seen (quotients are lower bounds).
pub fn estimate_spectral_norm(op: &DantzigOperator<'_>, max_iters: usize, rel_tol: f64, seed: u64) -> Result<f64> {
    if max_iters == 0 {
        return Err(Error::InvalidParameter {
            name: "max_iters",
            reason: "must be at least 1",
        });
    }
    let (n, p) = (op.n(), op.p());
    let mut v = rng::normal_vec(&mut rng::seeded(seed), p);
    let mut av = vec![0.0; p];
    let mut scaled = vec![0.0; p];
    let mut work = vec![0.0; n];

    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);

    let mut prev = f64::NAN;
    let mut best = 0.0_f64;
    for _ in 0..max_iters {
        op.apply_a_into(&v, &mut work, &mut av);
        let q = av.iter().map(|x| x * x).sum::<f64>();
        best = best.max(q);
        if q == 0.0 {
            return Err(Error::ConvergenceFailure { estimate: 0.0 });
        }
        if (q - prev).abs() <= rel_tol * q {
            return Ok(sqrt(q));
        }
        prev = q;
        op.apply_at_into(&av, &mut scaled, &mut work, &mut v);
        let nv = norm2(&v);
        v.iter_mut().for_each(|x| *x /= nv);
    }
    Err(Error::ConvergenceFailure { estimate: sqrt(best) })
}
