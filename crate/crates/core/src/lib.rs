//! Solvers for the Dantzig selector
//!
//! ```text
//! minimize ‖β‖₁  subject to  ‖D⁻¹Xᵀ(Xβ − y)‖∞ ≤ δ
//! ```
//!
//! where `D` holds the ℓ2 norms of the columns of `X`.
//!
//! The main solver ([`fpsolver`]) rewrites the problem with `A = D⁻¹XᵀX`,
//! `b = D⁻¹Xᵀy` and the cube `C = {v : ‖v − b‖∞ ≤ δ}`, then iterates a
//! coupled pair of proximity fixed-point equations (Stage-I) and refits the
//! detected support by least squares (Stage-II). Two comparison solvers
//! ([`baselines`]) and a dense simplex reference ([`oracle`]) are included,
//! together with the synthetic benchmark generators ([`bench`]) and the
//! screened classification pipeline ([`classify`]).
//!
//! The crate is `no_std` and only needs `alloc`. Anything that touches the
//! filesystem, the wall clock or threads lives in the companion `dantzig`
//! crate; timing is injected here through the [`Clock`] trait.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod baselines;
pub mod bench;
pub mod classify;
mod clock;
mod error;
pub mod fpsolver;
pub mod linop;
pub mod lstsq;
mod math;
mod matrix;
pub mod oracle;
mod problem;
pub mod prox;
pub mod rng;

pub use clock::{Clock, NullClock};
pub use error::{Error, Result};
pub use matrix::Matrix;
pub use problem::{validate_config, ChangeMeasure, ProblemInstance, Scheme, SolveResult, SolverConfig, Termination};

pub use linop::DantzigOperator;
pub use math::{dot, norm1, norm2, norm_inf};
