//! Minimum-norm linear least squares via Householder QR with column
//! pivoting, followed by a complete orthogonal decomposition when the
//! matrix is rank deficient.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_len, Result};
use crate::math::{dot, sqrt};
use crate::matrix::Matrix;

/// Pivots below this fraction of the leading pivot are treated as zero.
pub const RANK_RTOL: f64 = 1e-10;

/// A Householder reflector `I − β·v·vᵀ` acting on entries `offset..`.
struct Reflector {
    offset: usize,
    v: Vec<f64>,
    beta: f64,
}

impl Reflector {
    /// Reflector mapping `x` onto `−sign(x₀)·‖x‖·e₀`. Returns it with the
    /// resulting diagonal value, or `None` when `x` is zero.
    fn annihilate(x: &[f64], offset: usize) -> (Option<Self>, f64) {
        let norm = sqrt(dot(x, x));
        if norm == 0.0 {
            return (None, 0.0);
        }
        let alpha = if x[0] >= 0.0 { -norm } else { norm };
        let mut v = x.to_vec();
        v[0] -= alpha;
        let vtv = dot(&v, &v);
        if vtv == 0.0 {
            return (None, x[0]);
        }
        (
            Some(Self {
                offset,
                v,
                beta: 2.0 / vtv,
            }),
            alpha,
        )
    }

    fn apply(&self, target: &mut [f64]) {
        let t = &mut target[self.offset..];
        let s = self.beta * dot(&self.v, t);
        for (ti, vi) in t.iter_mut().zip(&self.v) {
            *ti -= s * vi;
        }
    }
}

/// Minimum-norm solution of `min ‖A x − y‖₂`.
pub fn lstsq_min_norm(a: &Matrix, y: &[f64]) -> Result<Vec<f64>> {
    check_len("least-squares right-hand side", a.nrows(), y.len())?;
    let (m, k) = (a.nrows(), a.ncols());
    if k == 0 {
        return Ok(Vec::new());
    }
    let mut cols: Vec<Vec<f64>> = (0..k).map(|j| a.column(j)).collect();
    let mut perm: Vec<usize> = (0..k).collect();
    let mut rhs = y.to_vec();

    let steps = m.min(k);
    let mut lead = 0.0_f64;
    let mut rank = 0;
    for j in 0..steps {
        let (pivot, pnorm) = (j..k)
            .map(|c| (c, dot(&cols[c][j..], &cols[c][j..])))
            .fold((j, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if j == 0 {
            lead = sqrt(pnorm);
        }
        if lead == 0.0 || sqrt(pnorm) <= RANK_RTOL * lead {
            break;
        }
        cols.swap(j, pivot);
        perm.swap(j, pivot);

        let (refl, diag) = Reflector::annihilate(&cols[j][j..], j);
        if let Some(h) = refl {
            for col in cols.iter_mut().skip(j + 1) {
                h.apply(col);
            }
            h.apply(&mut rhs);
        }
        cols[j][j] = diag;
        for v in cols[j][j + 1..].iter_mut() {
            *v = 0.0;
        }
        rank = j + 1;
    }

    let mut z = vec![0.0; k];
    if rank == k {
        // Back substitution on the square upper-triangular factor.
        for i in (0..k).rev() {
            let mut s = rhs[i];
            for (jj, col) in cols.iter().enumerate().skip(i + 1) {
                s -= col[i] * z[jj];
            }
            z[i] = s / cols[i][i];
        }
    } else if rank > 0 {
        // W = R[0..r, 0..k]. Factor Wᵀ = Z·T, so W = Tᵀ·Zᵀ and the
        // minimum-norm solution of W·z = c is z = Z·T⁻ᵀ·c.
        let r = rank;
        let mut wt: Vec<Vec<f64>> = (0..r).map(|i| cols.iter().map(|col| col[i]).collect()).collect();
        let mut refls = Vec::with_capacity(r);
        for j in 0..r {
            let (refl, diag) = Reflector::annihilate(&wt[j][j..], j);
            if let Some(h) = refl {
                for col in wt.iter_mut().skip(j + 1) {
                    h.apply(col);
                }
                refls.push(h);
            }
            wt[j][j] = diag;
        }
        // Forward substitution with Tᵀ (lower triangular); T[i][j] = wt[j][i].
        let mut w = vec![0.0; k];
        for i in 0..r {
            let mut s = rhs[i];
            for jj in 0..i {
                s -= wt[i][jj] * w[jj];
            }
            w[i] = s / wt[i][i];
        }
        for h in refls.iter().rev() {
            h.apply(&mut w);
        }
        z = w;
    }

    let mut x = vec![0.0; k];
    for (i, &pj) in perm.iter().enumerate() {
        x[pj] = z[i];
    }
    Ok(x)
}
