use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("column {0} of the design matrix is identically zero")]
    ZeroColumn(usize),
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: &'static str },
    #[error("step size too large: lambda/alpha = {ratio:e} must be < 1/||A||^2 = {limit:e}")]
    StepSizeTooLarge { ratio: f64, limit: f64 },
    #[error("power iteration did not converge; best estimate {estimate}")]
    ConvergenceFailure { estimate: f64 },
    #[error("estimated support is empty")]
    EmptySupport,
    #[error("solver requires unit column scaling (D = I)")]
    RequiresUnitScaling,
    #[error("proximal parameter ell = {ell:e} must exceed 2||X^T X||^2 = {bound:e}")]
    EllTooSmall { ell: f64, bound: f64 },
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("instance too large for the reference solver: n = {n}, p = {p} (limit {limit})")]
    SizeLimit { n: usize, p: usize, limit: usize },
    #[error("simplex exceeded its pivot budget of {0}")]
    PivotLimit(usize),
    #[error("accuracy ratio denominator is zero")]
    DegenerateDenominator,
    #[error("requested {requested} features but only {available} are available")]
    NTooLarge { requested: usize, available: usize },
}

pub(crate) fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { what, expected, found })
    }
}
