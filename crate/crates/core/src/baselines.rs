//! Comparison solvers working on the `D = I` reformulation
//!
//! ```text
//! minimize ‖β‖₁  subject to  Xᵀ(Xβ − y) = τ,  ‖τ‖∞ ≤ δ
//! ```
//!
//! with augmented Lagrangian penalty `c` and multiplier `γ`.
//!
//! * [`adm_solve`]: alternating direction method. The τ-step is a clip; the
//!   β-step has no closed form and is solved inexactly by a nonmonotone
//!   proximal gradient loop with Barzilai–Borwein steps.
//! * [`ladm_solve`]: linearized variant. The β-step is a single
//!   soft-threshold, taken before the τ-step.
//!
//! All products with `XᵀX` are applied as two rectangular matvecs.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::clock::{Clock, NullClock};
use crate::error::{Error, Result};
use crate::fpsolver::{estimate_support, refit_on_support};
use crate::linop::DantzigOperator;
use crate::math::{dist2, norm1, norm2, norm_inf, sqrt};
use crate::matrix::Matrix;
use crate::oracle::feasibility_violation;
use crate::problem::{ChangeMeasure, ProblemInstance, SolveResult, Termination};
use crate::prox::shrink;

const BB_MIN: f64 = 1e-10;
const BB_MAX: f64 = 1e10;
const SUFFICIENT_DECREASE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct AdmConfig {
    /// Penalty parameter.
    pub c: f64,
    pub inner_max_iters: usize,
    /// Inner loop stops when `‖βⁱ⁺¹ − βⁱ‖∞ ≤ inner_tol·max(1, ‖βⁱ‖∞)`.
    pub inner_tol: f64,
    pub outer_max_iters: usize,
    /// Outer loop stops when the change given by [`outer_change`] drops
    /// below this.
    pub outer_tol: f64,
    pub change_measure: ChangeMeasure,
    /// Number of past objective values in the nonmonotone acceptance test.
    pub nonmonotone_memory: usize,
    /// Support threshold for a least-squares refit of the result, if any.
    pub postprocess_tol: Option<f64>,
}

impl Default for AdmConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            inner_max_iters: 1000,
            inner_tol: 1e-6,
            outer_max_iters: 5000,
            outer_tol: 1e-4,
            change_measure: ChangeMeasure::PrimalDual,
            nonmonotone_memory: 10,
            postprocess_tol: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LadmConfig {
    pub c: f64,
    /// Proximal parameter. `None` uses `2.001·‖XᵀX‖₂²`.
    pub ell: Option<f64>,
    pub max_iters: usize,
    /// Same outer rule as [`AdmConfig::outer_tol`].
    pub tol: f64,
    pub change_measure: ChangeMeasure,
    pub postprocess_tol: Option<f64>,
}

impl Default for LadmConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            ell: None,
            max_iters: 50_000,
            tol: 1e-4,
            change_measure: ChangeMeasure::PrimalDual,
            postprocess_tol: None,
        }
    }
}

fn require_positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: "must be finite and positive",
        })
    }
}

fn require_nonzero(name: &'static str, v: usize) -> Result<()> {
    if v > 0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: "must be at least 1",
        })
    }
}

impl AdmConfig {
    pub fn validate(&self) -> Result<()> {
        require_positive("c", self.c)?;
        require_positive("inner_tol", self.inner_tol)?;
        require_positive("outer_tol", self.outer_tol)?;
        require_nonzero("inner_max_iters", self.inner_max_iters)?;
        require_nonzero("outer_max_iters", self.outer_max_iters)?;
        require_nonzero("nonmonotone_memory", self.nonmonotone_memory)
    }
}

/// Outer-loop change between iterations `k` and `k+1`.
///
/// [`ChangeMeasure::Primal`] gives `‖βᵏ⁺¹ − βᵏ‖₂ / max(1, ‖βᵏ‖₂)`. That
/// reads 0 whenever β sits still for one step, which happens from the zero
/// start while the multiplier builds up. [`ChangeMeasure::PrimalDual`]
/// applies the same ratio to the stacked pair `(β, γ)`.
pub fn outer_change(measure: ChangeMeasure, beta_old: &[f64], beta: &[f64], gamma_old: &[f64], gamma: &[f64]) -> f64 {
    let db = dist2(beta, beta_old);
    let nb = norm2(beta_old);
    match measure {
        ChangeMeasure::Primal => db / nb.max(1.0),
        ChangeMeasure::PrimalDual => {
            let dg = dist2(gamma, gamma_old);
            let ng = norm2(gamma_old);
            sqrt(db * db + dg * dg) / sqrt(nb * nb + ng * ng).max(1.0)
        }
    }
}

/// Buffers for `K = XᵀX` products.
struct Gram<'a> {
    x: &'a Matrix,
    work: Vec<f64>,
}

impl<'a> Gram<'a> {
    fn new(x: &'a Matrix) -> Self {
        Self {
            x,
            work: vec![0.0; x.nrows()],
        }
    }

    /// `out = XᵀX v`
    fn apply(&mut self, v: &[f64], out: &mut [f64]) {
        self.x.mul_vec_into(v, &mut self.work);
        self.x.tr_mul_vec_into(&self.work, out);
    }

    /// `out = Xᵀ(Xv − y)`
    fn residual(&mut self, v: &[f64], y: &[f64], out: &mut [f64]) {
        self.x.mul_vec_into(v, &mut self.work);
        for (w, yi) in self.work.iter_mut().zip(y) {
            *w -= yi;
        }
        self.x.tr_mul_vec_into(&self.work, out);
    }
}

fn clip_into(src: &[f64], bound: f64, out: &mut [f64]) {
    for (o, s) in out.iter_mut().zip(src) {
        *o = s.max(-bound).min(bound);
    }
}

/// Iteration state of ADM. Exposed so callers can step it manually.
pub struct AdmState<'a> {
    problem: &'a ProblemInstance,
    cfg: AdmConfig,
    gram: Gram<'a>,
    xty: Vec<f64>,
    beta: Vec<f64>,
    tau: Vec<f64>,
    gamma: Vec<f64>,
    /// `Xᵀ(Xβ − y)` at the current β.
    resid: Vec<f64>,
    bb: f64,
    inner_iterations: usize,
    outer_iterations: usize,
}

impl<'a> AdmState<'a> {
    pub fn new(problem: &'a ProblemInstance, cfg: &AdmConfig) -> Result<Self> {
        if !problem.has_unit_scaling() {
            return Err(Error::RequiresUnitScaling);
        }
        cfg.validate()?;
        let p = problem.p();
        let xty = problem.x().tr_mul_vec(problem.y())?;
        let resid = xty.iter().map(|v| -v).collect();
        Ok(Self {
            problem,
            cfg: cfg.clone(),
            gram: Gram::new(problem.x()),
            xty,
            beta: vec![0.0; p],
            tau: vec![0.0; p],
            gamma: vec![0.0; p],
            resid,
            bb: 1.0,
            inner_iterations: 0,
            outer_iterations: 0,
        })
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    /// `Xᵀ(Xβ − y)` at the current β.
    pub fn residual(&self) -> &[f64] {
        &self.resid
    }

    pub fn inner_iterations(&self) -> usize {
        self.inner_iterations
    }

    pub fn outer_iterations(&self) -> usize {
        self.outer_iterations
    }

    /// One outer iteration. Returns the [`outer_change`] under the
    /// configured measure.
    pub fn step(&mut self) -> f64 {
        let c = self.cfg.c;
        let delta = self.problem.delta();
        let p = self.beta.len();

        // τ ← clip(Xᵀ(Xβᵏ − y) + γᵏ/c, δ)
        let shifted: Vec<f64> = self.resid.iter().zip(&self.gamma).map(|(r, g)| r + g / c).collect();
        clip_into(&shifted, delta, &mut self.tau);

        // β ← argmin ‖β‖₁ + (c/2)‖XᵀXβ − w‖², w = Xᵀy + τ − γ/c
        let w: Vec<f64> = self
            .xty
            .iter()
            .zip(&self.tau)
            .zip(&self.gamma)
            .map(|((a, t), g)| a + t - g / c)
            .collect();
        let beta_old = self.beta.clone();
        let gamma_old = self.gamma.clone();
        let mut kb: Vec<f64> = self.resid.iter().zip(&self.xty).map(|(r, a)| r + a).collect();
        self.inner_solve(&w, &mut kb);

        for j in 0..p {
            self.resid[j] = kb[j] - self.xty[j];
        }
        // γ ← γ + c(Xᵀ(Xβᵏ⁺¹ − y) − τᵏ⁺¹)
        for j in 0..p {
            self.gamma[j] += c * (self.resid[j] - self.tau[j]);
        }
        self.outer_iterations += 1;
        outer_change(self.cfg.change_measure, &beta_old, &self.beta, &gamma_old, &self.gamma)
    }

    /// Nonmonotone proximal gradient on `‖β‖₁ + (c/2)‖Kβ − w‖²`, warm
    /// started at the current β. `kb` holds `Kβ` on entry and on exit.
    fn inner_solve(&mut self, w: &[f64], kb: &mut Vec<f64>) {
        let c = self.cfg.c;
        let p = self.beta.len();
        let objective = |beta: &[f64], kb: &[f64]| -> f64 {
            let q: f64 = kb.iter().zip(w).map(|(a, b)| (a - b) * (a - b)).sum();
            norm1(beta) + 0.5 * c * q
        };
        let mut grad = vec![0.0; p];
        let mut diff: Vec<f64> = kb.iter().zip(w).map(|(a, b)| a - b).collect();
        self.gram.apply(&diff, &mut grad);
        grad.iter_mut().for_each(|g| *g *= c);

        let mut history: VecDeque<f64> = VecDeque::with_capacity(self.cfg.nonmonotone_memory);
        history.push_back(objective(&self.beta, kb));

        let mut cand = vec![0.0; p];
        let mut kcand = vec![0.0; p];
        let mut grad_new = vec![0.0; p];
        for _ in 0..self.cfg.inner_max_iters {
            let reference = history.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
            let mut alpha = self.bb;
            let mut f_cand;
            loop {
                for j in 0..p {
                    cand[j] = shrink(self.beta[j] - grad[j] / alpha, 1.0 / alpha);
                }
                self.gram.apply(&cand, &mut kcand);
                f_cand = objective(&cand, &kcand);
                let step_sq: f64 = cand.iter().zip(&self.beta).map(|(a, b)| (a - b) * (a - b)).sum();
                if f_cand <= reference - 0.5 * SUFFICIENT_DECREASE * alpha * step_sq || alpha >= BB_MAX {
                    break;
                }
                alpha = (2.0 * alpha).min(BB_MAX);
            }
            self.inner_iterations += 1;

            for j in 0..p {
                diff[j] = kcand[j] - w[j];
            }
            self.gram.apply(&diff, &mut grad_new);
            grad_new.iter_mut().for_each(|g| *g *= c);

            let mut sty = 0.0;
            let mut sts = 0.0;
            let mut step_inf = 0.0_f64;
            for j in 0..p {
                let s = cand[j] - self.beta[j];
                sty += s * (grad_new[j] - grad[j]);
                sts += s * s;
                step_inf = step_inf.max(s.abs());
            }
            let scale = norm_inf(&self.beta).max(1.0);

            core::mem::swap(&mut self.beta, &mut cand);
            core::mem::swap(kb, &mut kcand);
            core::mem::swap(&mut grad, &mut grad_new);
            if history.len() == self.cfg.nonmonotone_memory {
                history.pop_front();
            }
            history.push_back(f_cand);

            self.bb = if sts > 0.0 && sty > 0.0 {
                (sty / sts).clamp(BB_MIN, BB_MAX)
            } else {
                alpha
            };
            if step_inf <= self.cfg.inner_tol * scale {
                break;
            }
        }
    }
}

/// Iteration state of LADM.
pub struct LadmState<'a> {
    problem: &'a ProblemInstance,
    c: f64,
    ell: f64,
    measure: ChangeMeasure,
    gram: Gram<'a>,
    beta: Vec<f64>,
    tau: Vec<f64>,
    gamma: Vec<f64>,
    resid: Vec<f64>,
    iterations: usize,
}

impl<'a> LadmState<'a> {
    /// Validates the configuration, estimating `‖XᵀX‖₂` by power iteration.
    pub fn new(problem: &'a ProblemInstance, cfg: &LadmConfig) -> Result<Self> {
        if !problem.has_unit_scaling() {
            return Err(Error::RequiresUnitScaling);
        }
        require_positive("c", cfg.c)?;
        require_positive("tol", cfg.tol)?;
        require_nonzero("max_iters", cfg.max_iters)?;
        let gram_norm = DantzigOperator::new(problem)?.norm_estimate();
        let bound = 2.0 * gram_norm * gram_norm;
        let ell = cfg.ell.unwrap_or(2.001 * gram_norm * gram_norm);
        if !(ell > bound) {
            return Err(Error::EllTooSmall { ell, bound });
        }
        let xty = problem.x().tr_mul_vec(problem.y())?;
        let p = problem.p();
        Ok(Self {
            problem,
            c: cfg.c,
            ell,
            measure: cfg.change_measure,
            gram: Gram::new(problem.x()),
            beta: vec![0.0; p],
            tau: vec![0.0; p],
            gamma: vec![0.0; p],
            resid: xty.iter().map(|v| -v).collect(),
            iterations: 0,
        })
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn residual(&self) -> &[f64] {
        &self.resid
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// One iteration. Returns the [`outer_change`] under the configured
    /// measure.
    pub fn step(&mut self) -> f64 {
        let (c, ell) = (self.c, self.ell);
        let p = self.beta.len();
        // vᵏ = XᵀX(Xᵀ(Xβᵏ − y) − τᵏ + γᵏ/c)
        let u: Vec<f64> = (0..p)
            .map(|j| self.resid[j] - self.tau[j] + self.gamma[j] / c)
            .collect();
        let mut v = vec![0.0; p];
        self.gram.apply(&u, &mut v);

        let beta_old = self.beta.clone();
        let gamma_old = self.gamma.clone();
        for j in 0..p {
            self.beta[j] = shrink(self.beta[j] - (c / ell) * v[j], 1.0 / ell);
        }
        self.gram.residual(&self.beta, self.problem.y(), &mut self.resid);
        let shifted: Vec<f64> = (0..p).map(|j| self.resid[j] + self.gamma[j] / c).collect();
        clip_into(&shifted, self.problem.delta(), &mut self.tau);
        for j in 0..p {
            self.gamma[j] += c * (self.resid[j] - self.tau[j]);
        }
        self.iterations += 1;
        outer_change(self.measure, &beta_old, &self.beta, &gamma_old, &self.gamma)
    }
}

fn finish(
    problem: &ProblemInstance,
    beta: Vec<f64>,
    tau: Vec<f64>,
    iterations: usize,
    termination: Termination,
    postprocess_tol: Option<f64>,
) -> Result<SolveResult> {
    let (beta_hat, support, empty_support) = match postprocess_tol {
        Some(tol) => match estimate_support(&beta, tol) {
            Ok(s) => (refit_on_support(problem, &s)?, Some(s), false),
            Err(Error::EmptySupport) => (vec![0.0; problem.p()], Some(Vec::new()), true),
            Err(e) => return Err(e),
        },
        None => (beta.clone(), None, false),
    };
    let feasibility_violation = feasibility_violation(problem, &beta_hat)?;
    Ok(SolveResult {
        beta_raw: beta,
        tau,
        beta_hat,
        support,
        empty_support,
        iterations,
        wall_seconds: 0.0,
        termination,
        feasibility_violation,
    })
}

pub fn adm_solve(problem: &ProblemInstance, cfg: &AdmConfig) -> Result<SolveResult> {
    adm_solve_timed(problem, cfg, &NullClock)
}

/// ADM. The reported iteration count is the total number of inner
/// proximal-gradient iterations.
pub fn adm_solve_timed(problem: &ProblemInstance, cfg: &AdmConfig, clock: &dyn Clock) -> Result<SolveResult> {
    let start = clock.now();
    let mut state = AdmState::new(problem, cfg)?;
    let mut termination = Termination::MaxIters;
    for _ in 0..cfg.outer_max_iters {
        if state.step() < cfg.outer_tol {
            termination = Termination::RelChange;
            break;
        }
    }
    let iterations = state.inner_iterations;
    let mut res = finish(
        problem,
        state.beta,
        state.tau,
        iterations,
        termination,
        cfg.postprocess_tol,
    )?;
    res.wall_seconds = (clock.now() - start).max(0.0);
    Ok(res)
}

pub fn ladm_solve(problem: &ProblemInstance, cfg: &LadmConfig) -> Result<SolveResult> {
    ladm_solve_timed(problem, cfg, &NullClock)
}

pub fn ladm_solve_timed(problem: &ProblemInstance, cfg: &LadmConfig, clock: &dyn Clock) -> Result<SolveResult> {
    let start = clock.now();
    let mut state = LadmState::new(problem, cfg)?;
    let mut termination = Termination::MaxIters;
    for _ in 0..cfg.max_iters {
        if state.step() < cfg.tol {
            termination = Termination::RelChange;
            break;
        }
    }
    let iterations = state.iterations;
    let mut res = finish(
        problem,
        state.beta,
        state.tau,
        iterations,
        termination,
        cfg.postprocess_tol,
    )?;
    res.wall_seconds = (clock.now() - start).max(0.0);
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_problem(y: Vec<f64>, delta: f64) -> ProblemInstance {
        let x = Matrix::from_rows(&[[0.6, 0.0, 0.8], [0.8, 0.6, 0.0], [0.0, 0.8, 0.6]]).unwrap();
        ProblemInstance::from_design(x, y, delta).unwrap()
    }

    #[test]
    fn zero_data_gives_zero() {
        let prob = unit_problem(vec![0.0; 3], 0.1);
        let r = adm_solve(&prob, &AdmConfig::default()).unwrap();
        assert_eq!(r.beta_hat, vec![0.0; 3]);
        let r = ladm_solve(&prob, &LadmConfig::default()).unwrap();
        assert_eq!(r.beta_hat, vec![0.0; 3]);
        assert_eq!(r.iterations, 1);
    }

    #[test]
    fn non_unit_scaling_rejected() {
        let x = Matrix::from_rows(&[[2.0, 0.0], [0.0, 1.0]]).unwrap();
        let prob = ProblemInstance::from_design(x, vec![1.0, 1.0], 0.1).unwrap();
        assert_eq!(
            adm_solve(&prob, &AdmConfig::default()).unwrap_err(),
            Error::RequiresUnitScaling
        );
        assert_eq!(
            ladm_solve(&prob, &LadmConfig::default()).unwrap_err(),
            Error::RequiresUnitScaling
        );
    }

    #[test]
    fn small_ell_rejected() {
        let prob = unit_problem(vec![1.0, 0.0, 0.0], 0.1);
        let cfg = LadmConfig {
            ell: Some(1.0),
            ..LadmConfig::default()
        };
        assert!(matches!(ladm_solve(&prob, &cfg), Err(Error::EllTooSmall { .. })));
    }

    #[test]
    fn multiplier_update_and_tau_bound() {
        let prob = unit_problem(vec![1.0, -0.5, 0.25], 0.05);
        let cfg = AdmConfig {
            c: 0.7,
            ..AdmConfig::default()
        };
        let mut adm = AdmState::new(&prob, &cfg).unwrap();
        for _ in 0..20 {
            let before = adm.gamma().to_vec();
            adm.step();
            for j in 0..3 {
                let expect = 0.7 * (adm.residual()[j] - adm.tau()[j]);
                let got = adm.gamma()[j] - before[j];
                assert!((got - expect).abs() <= 1e-14 * (1.0 + before[j].abs()));
                assert!(adm.tau()[j].abs() <= 0.05);
            }
        }
        let mut ladm = LadmState::new(&prob, &LadmConfig::default()).unwrap();
        for _ in 0..20 {
            let before = ladm.gamma().to_vec();
            ladm.step();
            for j in 0..3 {
                let expect = ladm.residual()[j] - ladm.tau()[j];
                let got = ladm.gamma()[j] - before[j];
                assert!((got - expect).abs() <= 1e-14 * (1.0 + before[j].abs()));
                assert!(ladm.tau()[j].abs() <= 0.05);
            }
        }
    }

    #[test]
    fn residual_tracks_beta() {
        let prob = unit_problem(vec![1.0, -0.5, 0.25], 0.05);
        let mut adm = AdmState::new(&prob, &AdmConfig::default()).unwrap();
        for _ in 0..5 {
            adm.step();
        }
        let mut r = prob.x().mul_vec(adm.beta()).unwrap();
        for (ri, yi) in r.iter_mut().zip(prob.y()) {
            *ri -= yi;
        }
        let direct = prob.x().tr_mul_vec(&r).unwrap();
        assert!(crate::math::dist_inf(&direct, adm.residual()) <= 1e-12);
    }
}
