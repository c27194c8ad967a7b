//! Closed-form proximity operators for the ℓ1 norm and the ℓ∞ cube.
//!
//! `sign(0)` is taken as zero; the soft-threshold output at zero is zero
//! under any sign convention.

use alloc::vec::Vec;

use crate::error::{check_len, Result};

/// Scalar soft-threshold `sign(u)·max(|u| − t, 0)`.
#[inline]
pub fn shrink(u: f64, t: f64) -> f64 {
    if u > t {
        u - t
    } else if u < -t {
        u + t
    } else {
        0.0
    }
}

/// Proximity operator of `t‖·‖₁`.
pub fn soft_threshold(u: &[f64], t: f64) -> Vec<f64> {
    debug_assert!(t >= 0.0);
    u.iter().map(|&x| shrink(x, t)).collect()
}

pub fn soft_threshold_in_place(u: &mut [f64], t: f64) {
    u.iter_mut().for_each(|x| *x = shrink(*x, t));
}

/// Euclidean projection onto the cube `{β : ‖β − b‖∞ ≤ δ}`.
///
/// The result is feasible in floating point too: `|p − b| ≤ δ` holds for
/// the computed difference, at the cost of at most an ulp of accuracy on
/// the faces. Points already inside are returned unchanged, so the
/// projection is idempotent.
pub fn project_cube(v: &[f64], b: &[f64], delta: f64) -> Result<Vec<f64>> {
    check_len("cube center", v.len(), b.len())?;
    Ok(v.iter().zip(b).map(|(&vi, &bi)| cube_point(vi, bi, delta)).collect())
}

#[inline]
fn cube_point(v: f64, b: f64, delta: f64) -> f64 {
    if (v - b).abs() <= delta {
        return v;
    }
    let mut p = b + (v - b).max(-delta).min(delta);
    while p - b > delta {
        p = p.next_down();
    }
    while p - b < -delta {
        p = p.next_up();
    }
    p
}

/// `(I − P_C)(v)`, computed as `soft_threshold(v − b, δ)`.
pub fn residual_prox(v: &[f64], b: &[f64], delta: f64) -> Result<Vec<f64>> {
    check_len("cube center", v.len(), b.len())?;
    Ok(v.iter().zip(b).map(|(&vi, &bi)| shrink(vi - bi, delta)).collect())
}
