//! Maximal-volume submatrix search and CUR skeletons.

use itertools::Itertools;

use crate::densela::{chebyshev_norm, cond, qr_thin, select_cols, select_rows, DenseMat};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_SWEEPS: usize = 50;
pub const DEFAULT_DOM_TOL: f64 = 0.01;

/// Largest condition number of the pivot block accepted by [`cur`].
pub const PIVOT_COND_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonPick {
    pub row_idx: Vec<usize>,
    pub col_idx: Vec<usize>,
    /// `|det A₁₁|`.
    pub volume: f64,
    /// Maximal volume over this volume. A lower bound (1) unless certified.
    pub nu: f64,
    pub nu_certified: bool,
    pub converged: bool,
    /// Volume after the seed and after every accepted swap.
    pub volume_trace: Vec<f64>,
}

impl SkeletonPick {
    pub fn block(&self, a: &DenseMat) -> DenseMat {
        select_cols(&select_rows(a, &self.row_idx), &self.col_idx)
    }

    /// Replaces `nu` by the exact ratio against an exhaustive search.
    pub fn certify(&mut self, a: &DenseMat) -> Result<()> {
        let best = exhaustive_max_volume(a, self.row_idx.len())?;
        self.nu = if self.volume > 0.0 {
            best.volume / self.volume
        } else {
            f64::INFINITY
        };
        self.nu_certified = true;
        Ok(())
    }
}

fn abs_det(m: &DenseMat) -> f64 {
    if m.is_empty() {
        return 1.0;
    }
    m.clone().lu().determinant().abs()
}

/// Rows and columns chosen by `rho` steps of complete-pivoting elimination.
fn complete_pivot_seed(a: &DenseMat, rho: usize) -> (Vec<usize>, Vec<usize>) {
    let mut work = a.clone();
    let mut rows = Vec::with_capacity(rho);
    let mut cols = Vec::with_capacity(rho);
    for _ in 0..rho {
        let mut best = (0, 0, -1.0);
        for j in 0..work.ncols() {
            if cols.contains(&j) {
                continue;
            }
            for i in 0..work.nrows() {
                if rows.contains(&i) {
                    continue;
                }
                let v = work[(i, j)].abs();
                if v > best.2 {
                    best = (i, j, v);
                }
            }
        }
        let (p, q, v) = best;
        rows.push(p);
        cols.push(q);
        if v > 0.0 {
            let pivot_row = work.row(p).into_owned();
            let pivot_col = work.column(q).into_owned() / work[(p, q)];
            work -= pivot_col * pivot_row;
        }
    }
    (rows, cols)
}

/// Largest-modulus entry of `m` as `(i, j, |m_ij|)`.
fn argmax_abs(m: &DenseMat) -> (usize, usize, f64) {
    let mut best = (0, 0, 0.0);
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)].abs();
            if v > best.2 {
                best = (i, j, v);
            }
        }
    }
    best
}

/// Greedy row swaps for fixed columns until `C·A₁₁⁻¹` is dominated by
/// `1 + dom_tol`. Returns the number of swaps.
fn row_phase(
    a: &DenseMat,
    rows: &mut [usize],
    cols: &[usize],
    dom_tol: f64,
    trace: &mut Vec<f64>,
    cap: usize,
) -> Result<usize> {
    let c = select_cols(a, cols);
    let mut swaps = 0;
    while swaps < cap {
        let a11 = select_rows(&c, rows);
        let inv = a11
            .try_inverse()
            .ok_or(Error::SingularPivotBlock(f64::INFINITY))?;
        let z = &c * inv;
        let (i, j, v) = argmax_abs(&z);
        if v <= 1.0 + dom_tol {
            break;
        }
        rows[j] = i;
        swaps += 1;
        trace.push(abs_det(&select_rows(&c, rows)));
    }
    Ok(swaps)
}

fn col_phase(
    a: &DenseMat,
    rows: &[usize],
    cols: &mut [usize],
    dom_tol: f64,
    trace: &mut Vec<f64>,
    cap: usize,
) -> Result<usize> {
    let r = select_rows(a, rows);
    let mut swaps = 0;
    while swaps < cap {
        let a11 = select_cols(&r, cols);
        let inv = a11
            .try_inverse()
            .ok_or(Error::SingularPivotBlock(f64::INFINITY))?;
        let z = inv * &r;
        let (i, j, v) = argmax_abs(&z);
        if v <= 1.0 + dom_tol {
            break;
        }
        cols[i] = j;
        swaps += 1;
        trace.push(abs_det(&select_cols(&r, cols)));
    }
    Ok(swaps)
}

/// Best replacement of two rows at once for fixed columns: the volume ratio
/// is the 2×2 minor of `Z = C·A₁₁⁻¹` on the incoming rows and vacated slots.
fn two_row_phase(
    a: &DenseMat,
    rows: &mut [usize],
    cols: &[usize],
    dom_tol: f64,
    trace: &mut Vec<f64>,
    cap: usize,
) -> Result<usize> {
    let c = select_cols(a, cols);
    let rho = rows.len();
    let mut swaps = 0;
    while swaps < cap && rho >= 2 {
        let inv = select_rows(&c, rows)
            .try_inverse()
            .ok_or(Error::SingularPivotBlock(f64::INFINITY))?;
        let z = &c * inv;
        let outside: Vec<usize> = (0..c.nrows()).filter(|i| !rows.contains(i)).collect();
        let mut best = (0, 0, 0, 0, 1.0 + dom_tol);
        for (p, &i) in outside.iter().enumerate() {
            for &j in &outside[p + 1..] {
                for sa in 0..rho {
                    for sb in sa + 1..rho {
                        let f = (z[(i, sa)] * z[(j, sb)] - z[(i, sb)] * z[(j, sa)]).abs();
                        if f > best.4 {
                            best = (i, j, sa, sb, f);
                        }
                    }
                }
            }
        }
        if best.4 <= 1.0 + dom_tol {
            break;
        }
        rows[best.2] = best.0;
        rows[best.3] = best.1;
        swaps += 1;
        trace.push(abs_det(&select_rows(&c, rows)));
    }
    Ok(swaps)
}

/// Simultaneous replacement of one row and one column, taken when it grows
/// the volume by more than `1 + dom_tol`. Uses the rank-2 determinant update
/// `det A₁₁'/det A₁₁ = (CA₁₁⁻¹)_{ia}(A₁₁⁻¹R)_{bj} + S_{ij}(A₁₁⁻¹)_{ba}` with
/// `S = A − CA₁₁⁻¹R`.
fn exchange_phase(
    a: &DenseMat,
    rows: &mut [usize],
    cols: &mut [usize],
    dom_tol: f64,
    trace: &mut Vec<f64>,
    cap: usize,
) -> Result<usize> {
    let (m, n) = a.shape();
    let rho = rows.len();
    let mut swaps = 0;
    while swaps < cap {
        let c = select_cols(a, cols);
        let r = select_rows(a, rows);
        let inv = select_rows(&c, rows)
            .try_inverse()
            .ok_or(Error::SingularPivotBlock(f64::INFINITY))?;
        let zr = &c * &inv;
        let zc = &inv * &r;
        let s = a - &zr * &r;
        let mut best = (0, 0, 0, 0, 1.0 + dom_tol);
        for j in (0..n).filter(|j| !cols.contains(j)) {
            for i in (0..m).filter(|i| !rows.contains(i)) {
                for sa in 0..rho {
                    for sb in 0..rho {
                        let f = (zr[(i, sa)] * zc[(sb, j)] + s[(i, j)] * inv[(sb, sa)]).abs();
                        if f > best.4 {
                            best = (i, sa, sb, j, f);
                        }
                    }
                }
            }
        }
        if best.4 <= 1.0 + dom_tol {
            break;
        }
        rows[best.1] = best.0;
        cols[best.2] = best.3;
        swaps += 1;
        trace.push(abs_det(&select_cols(&select_rows(a, rows), cols)));
    }
    Ok(swaps)
}

/// Alternating greedy maximal-volume search for a `rho×rho` submatrix,
/// seeded by complete-pivoting elimination. Each sweep runs a row phase and
/// a column phase; when both are idle, exchanges of two rows, two columns,
/// or one row with one column are tried. The search stops once a sweep makes no swap. When
/// `max_sweeps` runs out the best pick so far is returned with
/// `converged = false`.
pub fn maxvol(a: &DenseMat, rho: usize, max_sweeps: usize, dom_tol: f64) -> Result<SkeletonPick> {
    let (m, n) = a.shape();
    if rho == 0 || rho > m.min(n) {
        return Err(Error::InvalidArgument(format!(
            "rank {rho} for a {m}x{n} matrix"
        )));
    }
    let (mut rows, mut cols) = complete_pivot_seed(a, rho);
    let seed_volume = abs_det(&select_cols(&select_rows(a, &rows), &cols));
    if seed_volume == 0.0 {
        return Err(Error::SingularPivotBlock(f64::INFINITY));
    }
    let mut trace = vec![seed_volume];
    let cap = 4 * (m + n);
    let mut converged = false;
    for _ in 0..max_sweeps {
        let mut swaps = row_phase(a, &mut rows, &cols, dom_tol, &mut trace, cap)?
            + col_phase(a, &rows, &mut cols, dom_tol, &mut trace, cap)?;
        if swaps == 0 {
            swaps = two_row_phase(a, &mut rows, &cols, dom_tol, &mut trace, cap)?;
            let at = a.transpose();
            swaps += two_row_phase(&at, &mut cols, &rows, dom_tol, &mut trace, cap)?;
        }
        if swaps == 0 {
            swaps = exchange_phase(a, &mut rows, &mut cols, dom_tol, &mut trace, cap)?;
        }
        if swaps == 0 {
            converged = true;
            break;
        }
    }
    let volume = *trace.last().unwrap_or(&seed_volume);
    Ok(SkeletonPick {
        row_idx: rows,
        col_idx: cols,
        volume,
        nu: 1.0,
        nu_certified: false,
        converged,
        volume_trace: trace,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxVolume {
    pub volume: f64,
    pub row_idx: Vec<usize>,
    pub col_idx: Vec<usize>,
}

/// Maximal `|det|` over all `rho×rho` submatrices. Exponential; meant for
/// matrices of order at most about 8.
pub fn exhaustive_max_volume(a: &DenseMat, rho: usize) -> Result<MaxVolume> {
    let (m, n) = a.shape();
    if rho == 0 || rho > m.min(n) {
        return Err(Error::InvalidArgument(format!(
            "rank {rho} for a {m}x{n} matrix"
        )));
    }
    let col_sets: Vec<Vec<usize>> = (0..n).combinations(rho).collect();
    let mut best = MaxVolume {
        volume: -1.0,
        row_idx: vec![],
        col_idx: vec![],
    };
    for rows in (0..m).combinations(rho) {
        let sub = select_rows(a, &rows);
        for cols in &col_sets {
            let v = abs_det(&select_cols(&sub, cols));
            if v > best.volume {
                best = MaxVolume {
                    volume: v,
                    row_idx: rows.clone(),
                    col_idx: cols.clone(),
                };
            }
        }
    }
    Ok(best)
}

#[derive(Debug, Clone)]
pub struct CurResult {
    /// Selected columns, m×ρ.
    pub c: DenseMat,
    pub a11: DenseMat,
    /// Selected rows, ρ×n.
    pub r: DenseMat,
    /// `‖A − C·A₁₁⁻¹·R‖_C`.
    pub err_cheb: f64,
}

fn checked_inverse(a11: &DenseMat) -> Result<DenseMat> {
    let k = cond(a11)?;
    if !(k <= PIVOT_COND_LIMIT) {
        return Err(Error::SingularPivotBlock(k));
    }
    a11.clone()
        .try_inverse()
        .ok_or(Error::SingularPivotBlock(k))
}

/// Skeleton approximation `C·A₁₁⁻¹·R` through the picked rows and columns.
pub fn cur(a: &DenseMat, pick: &SkeletonPick) -> Result<CurResult> {
    let c = select_cols(a, &pick.col_idx);
    let r = select_rows(a, &pick.row_idx);
    let a11 = select_rows(&c, &pick.row_idx);
    let inv = checked_inverse(&a11)?;
    let err_cheb = chebyshev_norm(&(a - &c * inv * &r));
    Ok(CurResult {
        c,
        a11,
        r,
        err_cheb,
    })
}

/// Orthonormal basis of `range(C·A₁₁⁻¹)`, an approximation to the leading
/// left singular space of `A`.
pub fn leading_from_skeleton(a: &DenseMat, pick: &SkeletonPick) -> Result<DenseMat> {
    let c = select_cols(a, &pick.col_idx);
    let a11 = select_rows(&c, &pick.row_idx);
    let inv = checked_inverse(&a11)?;
    Ok(qr_thin(&(c * inv))?.0)
}

/// Right-hand side `(ρ+1)·σ_{ρ+1}·ν` of the skeleton quasi-optimality bound.
pub fn skeleton_bound(sigma_next: f64, rho: usize, nu: f64) -> f64 {
    (rho as f64 + 1.0) * sigma_next * nu
}
