use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_len, Error, Result};
use crate::matrix::Matrix;

/// A Dantzig selector instance: design `X` (n×p), observations `y`, the
/// column scaling diagonal `D` and the tube radius `δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    x: Matrix,
    y: Vec<f64>,
    d: Vec<f64>,
    delta: f64,
}

impl ProblemInstance {
    /// Builds an instance with `D[j] = ‖X[:, j]‖₂`.
    pub fn from_design(x: Matrix, y: Vec<f64>, delta: f64) -> Result<Self> {
        let d = x.column_norms();
        Self::with_scaling(x, y, d, delta)
    }

    /// Builds an instance with `D = I`.
    pub fn with_unit_scaling(x: Matrix, y: Vec<f64>, delta: f64) -> Result<Self> {
        let d = vec![1.0; x.ncols()];
        Self::with_scaling(x, y, d, delta)
    }

    /// Builds an instance with an explicit scaling diagonal.
    pub fn with_scaling(x: Matrix, y: Vec<f64>, d: Vec<f64>, delta: f64) -> Result<Self> {
        if x.nrows() == 0 || x.ncols() == 0 {
            return Err(Error::InvalidParameter {
                name: "X",
                reason: "design matrix must have at least one row and one column",
            });
        }
        check_len("observations", x.nrows(), y.len())?;
        check_len("scaling diagonal", x.ncols(), d.len())?;
        if !(delta >= 0.0) || !delta.is_finite() {
            return Err(Error::InvalidParameter {
                name: "delta",
                reason: "must be finite and nonnegative",
            });
        }
        if let Some(j) = d.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::ZeroColumn(j));
        }
        Ok(Self { x, y, d, delta })
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Diagonal of `D`.
    pub fn scaling(&self) -> &[f64] {
        &self.d
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    /// True when every entry of `D` equals one within 1e-12.
    pub fn has_unit_scaling(&self) -> bool {
        self.d.iter().all(|&v| (v - 1.0).abs() <= 1e-12)
    }

    /// Same design and scaling with a different radius.
    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        Self::with_scaling(self.x.clone(), self.y.clone(), self.d.clone(), delta)
    }
}

/// Update ordering of the Stage-I iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Scheme {
    /// β is updated first using the extrapolated dual `2τᵏ − τᵏ⁻¹`.
    BetaFirst,
    /// τ is updated first using the extrapolated primal `2βᵏ − βᵏ⁻¹`.
    TauFirst,
}

/// Quantity whose relative change drives the ε stopping rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChangeMeasure {
    /// `‖βᵏ⁺¹ − βᵏ‖₂ / ‖βᵏ‖₂`
    Primal,
    /// Same ratio for the stacked pair `(β, τ)`. Robust against stretches
    /// where β is momentarily still while τ keeps drifting.
    PrimalDual,
}

/// Knobs of the two-stage solver.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub alpha: f64,
    /// Dual step. `None` derives `0.999·α/‖A‖₂²` from the operator.
    pub lambda: Option<f64>,
    /// Support threshold of the least-squares refit.
    pub tol: f64,
    /// Relative-change tolerance.
    pub epsilon: f64,
    /// Support-stationarity window.
    pub eta: usize,
    pub max_iters: usize,
    pub scheme: Scheme,
    pub postprocess: bool,
    pub change_measure: ChangeMeasure,
}

impl SolverConfig {
    pub const DEFAULT_MAX_ITERS: usize = 50_000;
    /// Safety factor on the step condition.
    pub const STEP_FACTOR: f64 = 0.999;

    /// Configuration with the given `α`, derived `λ` and the usual
    /// tolerances (`ε = 1e-4`, `η = 5`).
    pub fn new(alpha: f64) -> Self {
        Self {
            alpha,
            lambda: None,
            tol: 0.0,
            epsilon: 1e-4,
            eta: 5,
            max_iters: Self::DEFAULT_MAX_ITERS,
            scheme: Scheme::TauFirst,
            postprocess: true,
            change_measure: ChangeMeasure::Primal,
        }
    }

    /// `λ` actually used for an operator of (guarded) norm `norm`.
    pub fn effective_lambda(&self, norm: f64) -> f64 {
        self.lambda.unwrap_or(Self::STEP_FACTOR * self.alpha / (norm * norm))
    }
}

/// Checks the knobs and the step condition `λ/α < 1/norm²`.
pub fn validate_config(cfg: &SolverConfig, norm_estimate: f64) -> Result<()> {
    fn positive(name: &'static str, v: f64) -> Result<()> {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter {
                name,
                reason: "must be finite and positive",
            })
        }
    }
    positive("norm_estimate", norm_estimate)?;
    positive("alpha", cfg.alpha)?;
    positive("epsilon", cfg.epsilon)?;
    if !(cfg.tol >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "tol",
            reason: "must be nonnegative",
        });
    }
    if cfg.eta == 0 {
        return Err(Error::InvalidParameter {
            name: "eta",
            reason: "must be at least 1",
        });
    }
    if cfg.max_iters == 0 {
        return Err(Error::InvalidParameter {
            name: "max_iters",
            reason: "must be at least 1",
        });
    }
    let lambda = cfg.effective_lambda(norm_estimate);
    positive("lambda", lambda)?;
    let ratio = lambda / cfg.alpha;
    let limit = 1.0 / (norm_estimate * norm_estimate);
    if ratio < limit {
        Ok(())
    } else {
        Err(Error::StepSizeTooLarge { ratio, limit })
    }
}

/// Why Stage-I stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Termination {
    RelChange,
    SupportStationary,
    MaxIters,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::RelChange => "RelChange",
            Termination::SupportStationary => "SupportStationary",
            Termination::MaxIters => "MaxIters",
        }
    }
}

/// Output of a solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    /// Last Stage-I iterate β∞.
    pub beta_raw: Vec<f64>,
    /// Last dual iterate τ∞.
    pub tau: Vec<f64>,
    /// Estimate after the optional least-squares refit.
    pub beta_hat: Vec<f64>,
    /// Λ used for the refit, when one was performed.
    pub support: Option<Vec<usize>>,
    /// Set when the refit found no coordinate above `tol` and returned zero.
    pub empty_support: bool,
    pub iterations: usize,
    pub wall_seconds: f64,
    pub termination: Termination,
    /// `max(0, ‖D⁻¹Xᵀ(Xβ̂ − y)‖∞ − δ)`
    pub feasibility_violation: f64,
}
