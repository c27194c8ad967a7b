//! Two-stage proximity fixed-point solver.
//!
//! Stage-I iterates the coupled fixed-point equations
//!
//! ```text
//! β = prox_{‖·‖₁/α}(β − (λ/α)·Aᵀτ)
//! τ = prox_{δ‖·‖₁}(Aβ + τ − b)
//! ```
//!
//! with one of two extrapolated orderings ([`Scheme`]). Stage-II refits the
//! coordinates with `|β∞[j]| > tol` by least squares.

use alloc::vec;
use alloc::vec::Vec;

use crate::clock::{Clock, NullClock};
use crate::error::{check_len, Error, Result};
use crate::linop::DantzigOperator;
use crate::lstsq::lstsq_min_norm;
use crate::math::{dist2, dist_inf, norm2, norm_inf, sqrt};
use crate::oracle::feasibility_violation;
use crate::problem::{validate_config, ChangeMeasure, ProblemInstance, Scheme, SolveResult, SolverConfig, Termination};
use crate::prox::shrink;

/// One Stage-I iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    /// 1-based index of the iterate this record describes.
    pub iteration: usize,
    /// `‖βᵏ⁺¹ − βᵏ‖₂ / ‖βᵏ‖₂`, or the absolute change of the pair `(β, τ)`
    /// when `βᵏ = 0`.
    pub change: f64,
    /// Hash of the support of `βᵏ⁺¹`.
    pub support_hash: u64,
    pub support_len: usize,
    /// Number of consecutive nonempty iterates, ending at this one, that
    /// share this support.
    pub support_run: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterationTrace {
    records: Vec<TraceRecord>,
}

impl IterationTrace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a record, filling in `iteration` and `support_run`.
    pub fn push(&mut self, change: f64, support_hash: u64, support_len: usize) {
        let support_run = match self.records.last() {
            _ if support_len == 0 => 0,
            Some(last) if last.support_len == support_len && last.support_hash == support_hash => last.support_run + 1,
            _ => 1,
        };
        self.records.push(TraceRecord {
            iteration: self.records.len() + 1,
            change,
            support_hash,
            support_len,
            support_run,
        });
    }

    /// Appends a record computed from two successive iterates.
    pub fn push_iterates(&mut self, prev: &[f64], next: &[f64]) {
        let (hash, len) = support_fingerprint(next);
        self.push(relative_change(prev, next), hash, len);
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }
}

/// FNV-1a over the indices of the nonzero entries, with the count.
pub fn support_fingerprint(v: &[f64]) -> (u64, usize) {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut len = 0;
    for (j, x) in v.iter().enumerate() {
        if *x != 0.0 {
            len += 1;
            for byte in (j as u64).to_le_bytes() {
                h ^= u64::from(byte);
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
    }
    (h, len)
}

/// `‖next − prev‖₂ / ‖prev‖₂`, or `‖next − prev‖₂` when `prev = 0`.
pub fn relative_change(prev: &[f64], next: &[f64]) -> f64 {
    let diff = dist2(prev, next);
    let base = norm2(prev);
    if base == 0.0 {
        diff
    } else {
        diff / base
    }
}

/// Change recorded in the trace for one iteration.
///
/// With [`ChangeMeasure::Primal`] this is the relative change of β; when
/// `βᵏ = 0` the absolute change of the pair `(β, τ)` is used instead, so a
/// run whose β has not left zero yet keeps going while τ still moves. With
/// [`ChangeMeasure::PrimalDual`] it is the relative change of `(β, τ)`.
pub fn iterate_change(measure: ChangeMeasure, beta_prev: &[f64], beta: &[f64], tau_prev: &[f64], tau: &[f64]) -> f64 {
    let db = dist2(beta_prev, beta);
    let nb = norm2(beta_prev);
    let joint = || {
        let dt = dist2(tau_prev, tau);
        let nt = norm2(tau_prev);
        (sqrt(db * db + dt * dt), sqrt(nb * nb + nt * nt))
    };
    match measure {
        ChangeMeasure::Primal if nb > 0.0 => db / nb,
        ChangeMeasure::Primal => joint().0,
        ChangeMeasure::PrimalDual => {
            let (d, base) = joint();
            if base > 0.0 {
                d / base
            } else {
                d
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopDecision {
    Continue,
    Stop(Termination),
}

/// Applies both stopping rules to the latest trace record. The
/// relative-change rule is checked first.
pub fn check_stop(trace: &IterationTrace, cfg: &SolverConfig) -> StopDecision {
    let Some(last) = trace.last() else {
        return StopDecision::Continue;
    };
    if last.change < cfg.epsilon {
        StopDecision::Stop(Termination::RelChange)
    } else if last.support_run > cfg.eta {
        StopDecision::Stop(Termination::SupportStationary)
    } else {
        StopDecision::Continue
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stage1Output {
    pub beta: Vec<f64>,
    pub tau: Vec<f64>,
    pub trace: IterationTrace,
    pub termination: Termination,
}

/// Runs Stage-I from `τ⁰ = 0, β⁻¹ = β⁰ = 0`.
pub fn stage1(op: &DantzigOperator<'_>, cfg: &SolverConfig) -> Result<Stage1Output> {
    let norm = op.guarded_norm();
    validate_config(cfg, norm)?;
    let (n, p) = (op.n(), op.p());
    let step = cfg.effective_lambda(norm) / cfg.alpha;
    let shrink_beta = 1.0 / cfg.alpha;
    let delta = op.problem().delta();
    let b = op.b();

    let mut beta = vec![0.0; p];
    let mut beta_prev = vec![0.0; p];
    let mut tau = vec![0.0; p];
    let mut tau_prev = vec![0.0; p];
    let mut ext = vec![0.0; p];
    let mut tmp = vec![0.0; p];
    let mut scaled = vec![0.0; p];
    let mut work = vec![0.0; n];
    let mut trace = IterationTrace::new();
    let mut termination = Termination::MaxIters;

    for _ in 0..cfg.max_iters {
        match cfg.scheme {
            Scheme::TauFirst => {
                // τ ← prox_{δ‖·‖₁}(A(2βᵏ − βᵏ⁻¹) + τᵏ − b)
                for ((e, bk), bp) in ext.iter_mut().zip(&beta).zip(&beta_prev) {
                    *e = 2.0 * bk - bp;
                }
                op.apply_a_into(&ext, &mut work, &mut tmp);
                tau_prev.copy_from_slice(&tau);
                for ((t, a), bj) in tau.iter_mut().zip(&tmp).zip(b) {
                    *t = shrink(a + *t - bj, delta);
                }
                // β ← prox_{‖·‖₁/α}(βᵏ − (λ/α)Aᵀτᵏ⁺¹)
                op.apply_at_into(&tau, &mut scaled, &mut work, &mut tmp);
                beta_prev.copy_from_slice(&beta);
                for (bk, g) in beta.iter_mut().zip(&tmp) {
                    *bk = shrink(*bk - step * g, shrink_beta);
                }
            }
            Scheme::BetaFirst => {
                // β ← prox_{‖·‖₁/α}(βᵏ − (λ/α)Aᵀ(2τᵏ − τᵏ⁻¹))
                for ((e, tk), tp) in ext.iter_mut().zip(&tau).zip(&tau_prev) {
                    *e = 2.0 * tk - tp;
                }
                op.apply_at_into(&ext, &mut scaled, &mut work, &mut tmp);
                beta_prev.copy_from_slice(&beta);
                for (bk, g) in beta.iter_mut().zip(&tmp) {
                    *bk = shrink(*bk - step * g, shrink_beta);
                }
                // τ ← prox_{δ‖·‖₁}(Aβᵏ⁺¹ + τᵏ − b)
                op.apply_a_into(&beta, &mut work, &mut tmp);
                tau_prev.copy_from_slice(&tau);
                for ((t, a), bj) in tau.iter_mut().zip(&tmp).zip(b) {
                    *t = shrink(a + *t - bj, delta);
                }
            }
        }

        let (hash, len) = support_fingerprint(&beta);
        let change = iterate_change(cfg.change_measure, &beta_prev, &beta, &tau_prev, &tau);
        trace.push(change, hash, len);
        if let StopDecision::Stop(reason) = check_stop(&trace, cfg) {
            termination = reason;
            break;
        }
    }

    Ok(Stage1Output {
        beta,
        tau,
        trace,
        termination,
    })
}

/// `Λ = {j : |β∞[j]| > tol}` in increasing order.
pub fn estimate_support(beta_inf: &[f64], tol: f64) -> Result<Vec<usize>> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "tol",
            reason: "must be nonnegative",
        });
    }
    let support: Vec<usize> = beta_inf
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > tol)
        .map(|(j, _)| j)
        .collect();
    if support.is_empty() {
        Err(Error::EmptySupport)
    } else {
        Ok(support)
    }
}

/// Least-squares refit of `y` on the columns in `support`; every other
/// coordinate of the result is exactly zero.
pub fn refit_on_support(problem: &ProblemInstance, support: &[usize]) -> Result<Vec<f64>> {
    let sub = problem.x().select_columns(support)?;
    let coef = lstsq_min_norm(&sub, problem.y())?;
    let mut beta_hat = vec![0.0; problem.p()];
    for (&j, c) in support.iter().zip(coef) {
        beta_hat[j] = c;
    }
    Ok(beta_hat)
}

/// Stage-II: estimate the support of `β∞` and refit on it.
pub fn stage2(problem: &ProblemInstance, beta_inf: &[f64], tol: f64) -> Result<Vec<f64>> {
    check_len("stage-II input", problem.p(), beta_inf.len())?;
    let support = estimate_support(beta_inf, tol)?;
    refit_on_support(problem, &support)
}

/// Residuals of the two fixed-point equations, in the ∞-norm.
///
/// Returns `(‖β − prox(β − (λ/α)Aᵀτ)‖∞, ‖τ − prox(Aβ + τ − b)‖∞)`.
pub fn fixed_point_residuals(
    op: &DantzigOperator<'_>,
    cfg: &SolverConfig,
    beta: &[f64],
    tau: &[f64],
) -> Result<(f64, f64)> {
    let norm = op.guarded_norm();
    let step = cfg.effective_lambda(norm) / cfg.alpha;
    let atau = op.apply_at(tau)?;
    let beta_map: Vec<f64> = beta
        .iter()
        .zip(&atau)
        .map(|(bk, g)| shrink(bk - step * g, 1.0 / cfg.alpha))
        .collect();
    let abeta = op.apply_a(beta)?;
    let delta = op.problem().delta();
    let tau_map: Vec<f64> = tau
        .iter()
        .zip(&abeta)
        .zip(op.b())
        .map(|((t, a), bj)| shrink(a + t - bj, delta))
        .collect();
    Ok((dist_inf(beta, &beta_map), dist_inf(tau, &tau_map)))
}

/// Builds the operator with default settings and runs both stages.
pub fn solve(problem: &ProblemInstance, cfg: &SolverConfig) -> Result<SolveResult> {
    solve_timed(problem, cfg, &NullClock)
}

/// As [`solve`]; the reported time covers operator setup (including the
/// norm estimate) and both stages.
pub fn solve_timed(problem: &ProblemInstance, cfg: &SolverConfig, clock: &dyn Clock) -> Result<SolveResult> {
    let start = clock.now();
    let op = DantzigOperator::new(problem)?;
    let mut result = solve_with_operator(&op, cfg, clock)?;
    result.wall_seconds = (clock.now() - start).max(0.0);
    Ok(result)
}

/// Runs both stages on a prepared operator.
pub fn solve_with_operator(op: &DantzigOperator<'_>, cfg: &SolverConfig, clock: &dyn Clock) -> Result<SolveResult> {
    let start = clock.now();
    let problem = op.problem();
    let s1 = stage1(op, cfg)?;
    let iterations = s1.trace.len();

    let (beta_hat, support, empty_support) = if cfg.postprocess {
        match estimate_support(&s1.beta, cfg.tol) {
            Ok(support) => (refit_on_support(problem, &support)?, Some(support), false),
            Err(Error::EmptySupport) => (vec![0.0; problem.p()], Some(Vec::new()), true),
            Err(e) => return Err(e),
        }
    } else {
        (s1.beta.clone(), None, false)
    };
    let feas = feasibility_violation(problem, &beta_hat)?;
    let wall_seconds = (clock.now() - start).max(0.0);

    Ok(SolveResult {
        beta_raw: s1.beta,
        tau: s1.tau,
        beta_hat,
        support,
        empty_support,
        iterations,
        wall_seconds,
        termination: s1.termination,
        feasibility_violation: feas,
    })
}

/// Largest entry of a residual relative to `1 + ‖v‖∞`.
pub fn relative_residual(residual: f64, v: &[f64]) -> f64 {
    residual / (1.0 + norm_inf(v))
}
