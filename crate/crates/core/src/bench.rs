//! Synthetic sparse-recovery benchmark.
//!
//! Each instance has a Gaussian design with unit-norm columns, an
//! `s`-sparse coefficient vector with entries `±(1 + |a|)`, `a ~ N(0,1)`,
//! and observations `y = Xβ + z`, `z ~ N(0, σ²)`. Sizes scale with `m`
//! as `(n, p, s) = m·(720, 2560, 80)` unless overridden.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::Rng;

use crate::baselines::{adm_solve_timed, ladm_solve_timed, AdmConfig, LadmConfig};
use crate::clock::Clock;
use crate::error::{check_len, Error, Result};
use crate::fpsolver::solve_with_operator;
use crate::linop::DantzigOperator;
use crate::math::{ceil, ln, sqrt};
use crate::matrix::Matrix;
use crate::problem::{ProblemInstance, SolveResult, SolverConfig, Termination};
use crate::rng::{derive_seed, seeded, standard_normal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Method {
    FpSolver,
    Adm,
    Ladm,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::FpSolver => "fp",
            Method::Adm => "adm",
            Method::Ladm => "ladm",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "fp" | "fpsolver" => Some(Method::FpSolver),
            "adm" => Some(Method::Adm),
            "ladm" => Some(Method::Ladm),
            _ => None,
        }
    }
}

/// Problem size per unit of `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scale {
    pub n_per_m: usize,
    pub p_per_m: usize,
    pub s_per_m: usize,
}

impl Default for Scale {
    fn default() -> Self {
        Self {
            n_per_m: 720,
            p_per_m: 2560,
            s_per_m: 80,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub m_values: Vec<usize>,
    pub sigma_values: Vec<f64>,
    pub replicates: usize,
    pub base_seed: u64,
    pub methods: Vec<Method>,
    pub scale: Scale,
    pub adm: AdmConfig,
    pub ladm: LadmConfig,
}

impl SweepConfig {
    pub fn new(
        m_values: Vec<usize>,
        sigma_values: Vec<f64>,
        replicates: usize,
        base_seed: u64,
        methods: Vec<Method>,
    ) -> Self {
        Self {
            m_values,
            sigma_values,
            replicates,
            base_seed,
            methods,
            scale: Scale::default(),
            adm: AdmConfig::default(),
            ladm: LadmConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason| Err(Error::InvalidParameter { name, reason });
        if self.replicates == 0 {
            return bad("replicates", "must be at least 1");
        }
        if self.methods.is_empty() {
            return bad("methods", "must not be empty");
        }
        if self.m_values.is_empty() || self.m_values.contains(&0) {
            return bad("m_values", "must be a nonempty list of positive integers");
        }
        if self.sigma_values.is_empty() || self.sigma_values.iter().any(|s| !(*s > 0.0)) {
            return bad("sigma_values", "must be a nonempty list of positive reals");
        }
        let s = self.scale;
        if s.n_per_m == 0 || s.p_per_m < 2 || s.s_per_m == 0 || s.s_per_m > s.p_per_m {
            return bad("scale", "need n ≥ 1, p ≥ 2 and 1 ≤ s ≤ p per unit of m");
        }
        Ok(())
    }
}

/// Outcome column of a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordStatus {
    Finished(Termination),
    Failed,
}

impl RecordStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RecordStatus::Finished(t) => t.as_str(),
            RecordStatus::Failed => "Failed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "RelChange" => RecordStatus::Finished(Termination::RelChange),
            "SupportStationary" => RecordStatus::Finished(Termination::SupportStationary),
            "MaxIters" => RecordStatus::Finished(Termination::MaxIters),
            "Failed" => RecordStatus::Failed,
            _ => return None,
        })
    }
}

/// One row of a sweep. Failed runs carry NaN accuracies and zero counts.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub method: Method,
    pub m: usize,
    pub sigma: f64,
    pub replicate: usize,
    pub rho_raw: f64,
    pub rho_post: f64,
    pub iterations: usize,
    pub wall_seconds: f64,
    pub feasibility_violation: f64,
    pub termination: RecordStatus,
    /// Error text for failed runs. Not part of the CSV format.
    pub error: Option<String>,
}

/// Gaussian `n×p` design with every column scaled to unit ℓ2 norm.
pub fn gen_design(n: usize, p: usize, seed: u64) -> Matrix {
    let mut rng = seeded(seed);
    let mut x = Matrix::from_fn(n, p, |_, _| standard_normal(&mut rng));
    let norms = x.column_norms();
    for i in 0..n {
        for (v, s) in x.row_mut(i).iter_mut().zip(&norms) {
            *v /= s;
        }
    }
    x
}

/// `s`-sparse vector with support drawn uniformly and entries
/// `εᵢ(1 + |aᵢ|)`. The returned support is sorted.
pub fn gen_sparse_beta(p: usize, s: usize, seed: u64) -> Result<(Vec<f64>, Vec<usize>)> {
    if s == 0 || s > p {
        return Err(Error::InvalidParameter {
            name: "s",
            reason: "need 1 ≤ s ≤ p",
        });
    }
    let mut rng = seeded(seed);
    let support = rand::seq::index::sample(&mut rng, p, s).into_vec();
    let mut beta = vec![0.0; p];
    for &j in &support {
        let a = standard_normal(&mut rng);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        beta[j] = sign * (1.0 + a.abs());
    }
    let mut sorted = support;
    sorted.sort_unstable();
    Ok((beta, sorted))
}

/// `y = Xβ + z` with `z ~ N(0, σ²)` i.i.d.
pub fn gen_observations(x: &Matrix, beta: &[f64], sigma: f64, seed: u64) -> Result<Vec<f64>> {
    check_len("coefficient vector", x.ncols(), beta.len())?;
    if !(sigma >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "sigma",
            reason: "must be nonnegative",
        });
    }
    let mut y = x.mul_vec(beta)?;
    if sigma > 0.0 {
        let mut rng = seeded(seed);
        for v in y.iter_mut() {
            *v += sigma * standard_normal(&mut rng);
        }
    }
    Ok(y)
}

/// `ρ = (‖β − β̂‖₂² / Σ min(βⱼ², σ²))^{1/2}`
pub fn accuracy_rho(beta_true: &[f64], beta_hat: &[f64], sigma: f64) -> Result<f64> {
    check_len("estimate", beta_true.len(), beta_hat.len())?;
    let s2 = sigma * sigma;
    let denom: f64 = beta_true.iter().map(|b| (b * b).min(s2)).sum();
    if !(denom > 0.0) {
        return Err(Error::DegenerateDenominator);
    }
    let err: f64 = beta_true.iter().zip(beta_hat).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(sqrt(err / denom))
}

/// Tube radius `σ√(2 ln p)`.
pub fn default_delta(sigma: f64, p: usize) -> f64 {
    sigma * sqrt(2.0 * ln(p as f64))
}

/// Solver settings of the synthetic experiment together with its `δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchParams {
    pub config: SolverConfig,
    pub delta: f64,
}

/// `tol = 2σ`, `α = 0.2·‖A‖²`, `δ = σ√(2 ln p)`, `ε = 1e-4`,
/// `η = max(⌈4 ln α · ln σ + 2α⌉, 5)` capped at `max_iters/10`, and
/// `λ = 0.999·α/‖A‖²`.
pub fn default_solver_params(sigma: f64, p: usize, norm_estimate: f64) -> Result<BenchParams> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter {
            name: "sigma",
            reason: "must be positive",
        });
    }
    if p < 2 {
        return Err(Error::InvalidParameter {
            name: "p",
            reason: "must be at least 2",
        });
    }
    if !(norm_estimate > 0.0) || !norm_estimate.is_finite() {
        return Err(Error::InvalidParameter {
            name: "norm_estimate",
            reason: "must be finite and positive",
        });
    }
    let norm_sq = norm_estimate * norm_estimate;
    let alpha = 0.2 * norm_sq;
    let max_iters = SolverConfig::DEFAULT_MAX_ITERS;
    let eta_raw = ceil(4.0 * ln(alpha) * ln(sigma) + 2.0 * alpha).max(5.0);
    let eta_cap = (max_iters / 10).max(1);
    let eta = if eta_raw >= eta_cap as f64 {
        eta_cap
    } else {
        eta_raw as usize
    };
    let config = SolverConfig {
        alpha,
        lambda: Some(SolverConfig::STEP_FACTOR * alpha / norm_sq),
        tol: 2.0 * sigma,
        epsilon: 1e-4,
        eta,
        max_iters,
        scheme: crate::problem::Scheme::TauFirst,
        postprocess: true,
        change_measure: crate::problem::ChangeMeasure::Primal,
    };
    Ok(BenchParams {
        config,
        delta: default_delta(sigma, p),
    })
}

/// One `(method, m, σ, replicate)` combination of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepCell {
    pub method: Method,
    pub m: usize,
    pub sigma: f64,
    pub sigma_index: usize,
    pub replicate: usize,
}

/// Every cell of the sweep, in emission order.
pub fn sweep_cells(cfg: &SweepConfig) -> Vec<SweepCell> {
    let mut methods = cfg.methods.clone();
    methods.sort();
    methods.dedup();
    let mut cells = Vec::new();
    for &method in &methods {
        for &m in &cfg.m_values {
            for (sigma_index, &sigma) in cfg.sigma_values.iter().enumerate() {
                for replicate in 0..cfg.replicates {
                    cells.push(SweepCell {
                        method,
                        m,
                        sigma,
                        sigma_index,
                        replicate,
                    });
                }
            }
        }
    }
    cells
}

/// Seed of the instance shared by all methods in one replicate.
pub fn instance_seed(base_seed: u64, m: usize, sigma_index: usize, replicate: usize) -> u64 {
    derive_seed(&[base_seed, m as u64, sigma_index as u64, replicate as u64])
}

/// A generated benchmark instance.
#[derive(Debug, Clone)]
pub struct Instance {
    pub problem: ProblemInstance,
    pub beta_true: Vec<f64>,
    pub support: Vec<usize>,
}

pub fn gen_instance(n: usize, p: usize, s: usize, sigma: f64, seed: u64) -> Result<Instance> {
    let x = gen_design(n, p, derive_seed(&[seed, 1]));
    let (beta_true, support) = gen_sparse_beta(p, s, derive_seed(&[seed, 2]))?;
    let y = gen_observations(&x, &beta_true, sigma, derive_seed(&[seed, 3]))?;
    let problem = ProblemInstance::from_design(x, y, default_delta(sigma, p))?;
    Ok(Instance {
        problem,
        beta_true,
        support,
    })
}

/// Generates the cell's instance and runs its method. Timing excludes data
/// generation and includes the norm estimate and the refit.
pub fn run_cell(cfg: &SweepConfig, cell: &SweepCell, clock: &dyn Clock) -> BenchRecord {
    let mut record = BenchRecord {
        method: cell.method,
        m: cell.m,
        sigma: cell.sigma,
        replicate: cell.replicate,
        rho_raw: f64::NAN,
        rho_post: f64::NAN,
        iterations: 0,
        wall_seconds: 0.0,
        feasibility_violation: f64::NAN,
        termination: RecordStatus::Failed,
        error: None,
    };
    match try_run_cell(cfg, cell, clock) {
        Ok((res, beta_true)) => {
            let rho = |b: &[f64]| accuracy_rho(&beta_true, b, cell.sigma).unwrap_or(f64::NAN);
            record.rho_raw = rho(&res.beta_raw);
            record.rho_post = rho(&res.beta_hat);
            record.iterations = res.iterations;
            record.wall_seconds = res.wall_seconds;
            record.feasibility_violation = res.feasibility_violation;
            record.termination = RecordStatus::Finished(res.termination);
        }
        Err(e) => record.error = Some(alloc::format!("{e}")),
    }
    record
}

fn try_run_cell(cfg: &SweepConfig, cell: &SweepCell, clock: &dyn Clock) -> Result<(SolveResult, Vec<f64>)> {
    let s = cfg.scale;
    let (n, p, k) = (s.n_per_m * cell.m, s.p_per_m * cell.m, s.s_per_m * cell.m);
    let seed = instance_seed(cfg.base_seed, cell.m, cell.sigma_index, cell.replicate);
    let inst = gen_instance(n, p, k, cell.sigma, seed)?;
    let post_tol = Some(2.0 * cell.sigma);

    let start = clock.now();
    let mut res = match cell.method {
        Method::FpSolver => {
            let op = DantzigOperator::new(&inst.problem)?;
            let params = default_solver_params(cell.sigma, p, op.norm_estimate())?;
            solve_with_operator(&op, &params.config, clock)?
        }
        Method::Adm => {
            let adm = AdmConfig {
                postprocess_tol: post_tol,
                ..cfg.adm.clone()
            };
            adm_solve_timed(&inst.problem, &adm, clock)?
        }
        Method::Ladm => {
            let ladm = LadmConfig {
                postprocess_tol: post_tol,
                ..cfg.ladm.clone()
            };
            ladm_solve_timed(&inst.problem, &ladm, clock)?
        }
    };
    res.wall_seconds = (clock.now() - start).max(0.0);
    Ok((res, inst.beta_true))
}

/// Sort order of emitted records: method, m, σ, replicate.
pub fn record_order(a: &BenchRecord, b: &BenchRecord) -> Ordering {
    a.method
        .cmp(&b.method)
        .then(a.m.cmp(&b.m))
        .then(a.sigma.total_cmp(&b.sigma))
        .then(a.replicate.cmp(&b.replicate))
}

/// Runs every cell sequentially.
pub fn run_sweep(cfg: &SweepConfig, clock: &dyn Clock) -> Result<Vec<BenchRecord>> {
    cfg.validate()?;
    let mut records: Vec<BenchRecord> = sweep_cells(cfg).iter().map(|cell| run_cell(cfg, cell, clock)).collect();
    records.sort_by(record_order);
    Ok(records)
}

/// Mean and sample standard deviation of one metric for one
/// `(method, m, σ)` group.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub method: Method,
    pub m: usize,
    pub sigma: f64,
    pub metric: &'static str,
    pub mean: f64,
    pub std: f64,
}

pub const AGGREGATE_METRICS: [&str; 4] = ["rho_raw", "rho_post", "iterations", "wall_seconds"];

fn metric(r: &BenchRecord, name: &str) -> f64 {
    match name {
        "rho_raw" => r.rho_raw,
        "rho_post" => r.rho_post,
        "iterations" => r.iterations as f64,
        _ => r.wall_seconds,
    }
}

/// Mean and sample standard deviation (divisor `k − 1`, zero for a single
/// value) of the finite entries.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let k = finite.len();
    if k == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = finite.iter().sum::<f64>() / k as f64;
    if k == 1 {
        return (mean, 0.0);
    }
    let var = finite.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1) as f64;
    (mean, sqrt(var))
}

/// Aggregates successful records per `(method, m, σ)`.
pub fn aggregate(records: &[BenchRecord]) -> Vec<AggregateRow> {
    let mut sorted: Vec<&BenchRecord> = records.iter().collect();
    sorted.sort_by(|a, b| record_order(a, b));
    let mut rows = Vec::new();
    let mut start = 0;
    while start < sorted.len() {
        let head = sorted[start];
        let end = sorted[start..]
            .iter()
            .position(|r| r.method != head.method || r.m != head.m || r.sigma != head.sigma)
            .map_or(sorted.len(), |k| start + k);
        let group: Vec<&BenchRecord> = sorted[start..end]
            .iter()
            .copied()
            .filter(|r| r.termination != RecordStatus::Failed)
            .collect();
        for name in AGGREGATE_METRICS {
            let vals: Vec<f64> = group.iter().map(|r| metric(r, name)).collect();
            let (mean, std) = mean_std(&vals);
            rows.push(AggregateRow {
                method: head.method,
                m: head.m,
                sigma: head.sigma,
                metric: name,
                mean,
                std,
            });
        }
        start = end;
    }
    rows
}
