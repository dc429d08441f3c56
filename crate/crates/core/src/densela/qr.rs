use nalgebra::DMatrix;

use super::mat::DenseMat;
use crate::error::{Error, Result};

/// Relative pivot threshold below which a column counts as dependent.
const PIVOT_TOL: f64 = 1e-13;

/// Thin Householder QR normalized so that `R` has a positive diagonal.
///
/// The rank test compares each pivot against `1e-13·‖M‖_F`; the Frobenius
/// norm bounds the spectral norm from above, so this can only be stricter.
pub fn qr_thin(m: &DenseMat) -> Result<(DenseMat, DenseMat)> {
    let (rows, cols) = m.shape();
    if rows < cols {
        return Err(Error::ShapeMismatch(format!(
            "qr_thin needs m >= n, got {rows}x{cols}"
        )));
    }
    if cols == 0 {
        return Ok((DMatrix::zeros(rows, 0), DMatrix::zeros(0, 0)));
    }
    let scale = m.norm();
    let qr = m.clone().qr();
    let mut q = qr.q();
    let mut r = qr.r();
    for k in 0..cols {
        let d = r[(k, k)];
        if !(d.abs() > PIVOT_TOL * scale) {
            return Err(Error::RankDeficient {
                pivot: k,
                norm: d.abs(),
            });
        }
        if d < 0.0 {
            r.row_mut(k).neg_mut();
            q.column_mut(k).neg_mut();
        }
    }
    Ok((q, r))
}

/// Solves `R X = B` for upper-triangular `R`.
pub fn solve_upper(r: &DenseMat, b: &DenseMat) -> Result<DenseMat> {
    r.solve_upper_triangular(b).ok_or(Error::RankDeficient {
        pivot: 0,
        norm: 0.0,
    })
}

/// `R⁻¹Qᵀ` from the thin QR: a left inverse of a full-column-rank matrix.
pub fn left_inverse(m: &DenseMat) -> Result<DenseMat> {
    let (q, r) = qr_thin(m)?;
    solve_upper(&r, &q.transpose())
}

/// Orthonormal basis of the orthogonal complement of `range(B)`, n×(n−k),
/// taken from the trailing columns of the full Householder Q.
pub fn orth_complement(b: &DenseMat) -> Result<DenseMat> {
    let (n, k) = b.shape();
    if k > n {
        return Err(Error::ShapeMismatch(format!("complement of {n}x{k}")));
    }
    if k == 0 {
        return Ok(DMatrix::identity(n, n));
    }
    let qr = b.clone().qr();
    let mut qt = DMatrix::<f64>::identity(n, n);
    qr.q_tr_mul(&mut qt);
    Ok(qt.rows(k, n - k).transpose())
}
