//! Gaussian elimination without pivoting (GENP), supported by random
//! augmentation or additive preprocessing, with Sherman–Morrison–Woodbury
//! recovery, Newton inversion and iterative refinement.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::densela::{frobenius_norm, spectral_norm, DenseMat};
use crate::error::{Error, Result};
use crate::precond::normalize;
use crate::randmats::{gaussian, normalized_multiplier, KindTag};

pub const DEFAULT_PIVOT_TOL: f64 = 1e-12;

/// `A = LU` computed with no row or column exchanges.
#[derive(Debug, Clone)]
pub struct GenpFactorization {
    /// Unit lower triangular.
    pub l: DenseMat,
    pub u: DenseMat,
    pub pivot_min: f64,
    pub ok: bool,
}

impl GenpFactorization {
    pub fn solve(&self, b: &DenseMat) -> Result<DenseMat> {
        let y = self
            .l
            .solve_lower_triangular(b)
            .ok_or(Error::SmallPivot(0))?;
        self.u
            .solve_upper_triangular(&y)
            .ok_or(Error::SmallPivot(0))
    }

    pub fn solve_vec(&self, b: &DVector<f64>) -> Result<DVector<f64>> {
        let x = self.solve(&DMatrix::from_column_slice(b.len(), 1, b.as_slice()))?;
        Ok(x.column(0).into_owned())
    }
}

/// Eliminates the leading `steps` columns in place, returning the smallest
/// pivot modulus. Fails with the 1-based step whose pivot is at most
/// `threshold`.
fn eliminate(w: &mut DenseMat, steps: usize, threshold: f64) -> Result<f64> {
    let n = w.nrows();
    let mut pivot_min = f64::INFINITY;
    for k in 0..steps {
        let p = w[(k, k)];
        if !(p.abs() > threshold) {
            return Err(Error::SmallPivot(k + 1));
        }
        pivot_min = pivot_min.min(p.abs());
        for i in k + 1..n {
            let f = w[(i, k)] / p;
            w[(i, k)] = f;
            if f != 0.0 {
                for j in k + 1..w.ncols() {
                    w[(i, j)] -= f * w[(k, j)];
                }
            }
        }
    }
    Ok(pivot_min)
}

/// GENP with pivots required to exceed `pivot_tol·‖A‖_F`.
pub fn genp(a: &DenseMat, pivot_tol: f64) -> Result<GenpFactorization> {
    if !a.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "genp needs a square matrix, got {:?}",
            a.shape()
        )));
    }
    let n = a.nrows();
    let mut w = a.clone();
    let pivot_min = eliminate(&mut w, n, pivot_tol * frobenius_norm(a))?;
    let mut l = DMatrix::identity(n, n);
    let mut u = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            if i > j {
                l[(i, j)] = w[(i, j)];
            } else {
                u[(i, j)] = w[(i, j)];
            }
        }
    }
    Ok(GenpFactorization {
        l,
        u,
        pivot_min: if n == 0 { 0.0 } else { pivot_min },
        ok: true,
    })
}

/// Trailing block left after `h` GENP steps on `K`.
pub fn schur_after_h(k: &DenseMat, h: usize) -> Result<DenseMat> {
    if !k.is_square() || h > k.nrows() {
        return Err(Error::ShapeMismatch(format!(
            "{h} steps on {:?}",
            k.shape()
        )));
    }
    let mut w = k.clone();
    eliminate(&mut w, h, DEFAULT_PIVOT_TOL * frobenius_norm(k))?;
    let m = k.nrows() - h;
    Ok(w.view((h, h), (m, m)).into_owned())
}

/// `(C + UVᵀ)⁻¹B` from a solver for `C`.
pub fn smw_solve<F>(c_solve: F, u: &DenseMat, v: &DenseMat, b: &DenseMat) -> Result<DenseMat>
where
    F: Fn(&DenseMat) -> Result<DenseMat>,
{
    let cb = c_solve(b)?;
    if u.ncols() == 0 {
        return Ok(cb);
    }
    let cu = c_solve(u)?;
    smw_combine(&cb, &cu, v)
}

fn smw_combine(cb: &DenseMat, cu: &DenseMat, v: &DenseMat) -> Result<DenseMat> {
    let h = cu.ncols();
    let cap = DMatrix::identity(h, h) + v.tr_mul(cu);
    let lu = cap.lu();
    if !lu.is_invertible()
        || !lu
            .u()
            .diagonal()
            .iter()
            .all(|d| d.is_finite() && d.abs() > 1e-14)
    {
        return Err(Error::CapacitanceSingular);
    }
    let corr = lu.solve(&v.tr_mul(cb)).ok_or(Error::CapacitanceSingular)?;
    Ok(cb - cu * corr)
}

/// `(C + UVᵀ)⁻¹` from `C⁻¹`.
pub fn smw_inverse(c_inv: &DenseMat, u: &DenseMat, v: &DenseMat) -> Result<DenseMat> {
    smw_combine(c_inv, &(c_inv * u), v)
}

#[derive(Debug, Clone)]
pub struct NewtonResult {
    pub x: DenseMat,
    /// `‖I − XᵢA‖` for i = 0, 1, …
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

/// Newton–Schulz iteration `X ← 2X − XAX` from an `X0` with `‖I − X0A‖ < 1`.
pub fn newton_inverse(
    a: &DenseMat,
    x0: &DenseMat,
    max_iters: usize,
    tol: f64,
) -> Result<NewtonResult> {
    let n = a.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let theta = |x: &DenseMat| spectral_norm(&(&id - x * a));
    let mut x = x0.clone();
    let mut residuals = vec![theta(&x)?];
    if residuals[0] >= 1.0 {
        return Err(Error::NotContractive(residuals[0]));
    }
    let mut it = 0;
    while residuals[it] > tol {
        if it == max_iters {
            return Err(Error::NoConvergence { sweeps: max_iters });
        }
        x = &x * 2.0 - &x * a * &x;
        residuals.push(theta(&x)?);
        it += 1;
    }
    Ok(NewtonResult {
        x,
        residuals,
        iterations: it,
    })
}

#[derive(Debug, Clone)]
pub struct RefinementResult {
    pub x: DVector<f64>,
    /// `‖b − Axᵢ‖/‖b‖` for every iterate.
    pub residuals: Vec<f64>,
}

fn refine_core<F>(
    a: &DenseMat,
    solver: F,
    b: &DVector<f64>,
    max_iters: usize,
    tol: f64,
) -> Result<(RefinementResult, bool)>
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>>,
{
    let bn = b.norm();
    if bn == 0.0 {
        return Ok((
            RefinementResult {
                x: DVector::zeros(a.ncols()),
                residuals: vec![0.0],
            },
            false,
        ));
    }
    let mut x = solver(b)?;
    let mut r = b - a * &x;
    let mut residuals = vec![r.norm() / bn];
    let mut best = (x.clone(), residuals[0]);
    let mut slow = 0;
    for _ in 0..max_iters {
        if residuals.last().is_some_and(|&res| res <= tol) {
            break;
        }
        x += solver(&r)?;
        r = b - a * &x;
        let res = r.norm() / bn;
        let prev = *residuals.last().unwrap_or(&f64::INFINITY);
        residuals.push(res);
        if res < best.1 {
            best = (x.clone(), res);
        }
        slow = if res > 0.9 * prev { slow + 1 } else { 0 };
        if slow >= 3 {
            return Ok((
                RefinementResult {
                    x: best.0,
                    residuals,
                },
                true,
            ));
        }
    }
    Ok((
        RefinementResult {
            x: best.0,
            residuals,
        },
        false,
    ))
}

/// Iterative refinement `x ← x + S(b − Ax)` with an approximate solver `S`.
/// Stops at `tol`, after `max_iters`, or with [`Error::Stagnated`] after three
/// consecutive steps that cut the residual by less than 10%.
pub fn iterative_refinement<F>(
    a: &DenseMat,
    solver: F,
    b: &DVector<f64>,
    max_iters: usize,
    tol: f64,
) -> Result<RefinementResult>
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>>,
{
    match refine_core(a, solver, b, max_iters, tol)? {
        (_, true) => Err(Error::Stagnated),
        (res, false) => Ok(res),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenpRoute {
    /// GENP on `K = [[I_h, Vᵀ], [U, A]]`.
    Augment,
    /// GENP on `C = A − UVᵀ`.
    Additive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenpPolicy {
    pub route: GenpRoute,
    pub kind: KindTag,
    /// Multiplies `U` and `V`; 0 disables preprocessing.
    pub scale: f64,
    pub h0: usize,
    pub pivot_tol: f64,
    pub refine_iters: usize,
}

impl Default for GenpPolicy {
    fn default() -> Self {
        GenpPolicy {
            route: GenpRoute::Augment,
            kind: KindTag::Gaussian,
            scale: 1.0,
            h0: 1,
            pivot_tol: DEFAULT_PIVOT_TOL,
            refine_iters: 10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GenpReport {
    pub x: DVector<f64>,
    /// Preprocessor width that succeeded.
    pub h: usize,
    /// Widths tried, in order.
    pub tried: Vec<usize>,
    /// `‖Ax − b‖/‖b‖`.
    pub residual: f64,
    pub refinement_steps: usize,
}

type VecSolver = Box<dyn Fn(&DVector<f64>) -> Result<DVector<f64>>>;

fn supported_attempt<R: Rng + ?Sized>(
    a: &DenseMat,
    h: usize,
    policy: &GenpPolicy,
    rng: &mut R,
) -> Result<VecSolver> {
    let n = a.nrows();
    let u = normalized_multiplier(policy.kind, n, h, rng)? * policy.scale;
    let v = normalized_multiplier(policy.kind, n, h, rng)? * policy.scale;
    let (c_solve_u, fac, offset): (DenseMat, GenpFactorization, usize) = match policy.route {
        GenpRoute::Augment => {
            let mut k = DMatrix::identity(h + n, h + n);
            k.view_mut((0, h), (h, n)).copy_from(&v.transpose());
            k.view_mut((h, 0), (n, h)).copy_from(&u);
            k.view_mut((h, h), (n, n)).copy_from(a);
            let fac = genp(&k, policy.pivot_tol)?;
            let mut rhs = DMatrix::zeros(h + n, h);
            rhs.view_mut((h, 0), (n, h)).copy_from(&u);
            let cu = fac.solve(&rhs)?.rows(h, n).into_owned();
            (cu, fac, h)
        }
        GenpRoute::Additive => {
            let c = a - &u * v.transpose();
            let fac = genp(&c, policy.pivot_tol)?;
            let cu = fac.solve(&u)?;
            (cu, fac, 0)
        }
    };
    let cap = DMatrix::identity(h, h) + v.tr_mul(&c_solve_u);
    let cap_lu = cap.lu();
    if !cap_lu.is_invertible() {
        return Err(Error::CapacitanceSingular);
    }
    Ok(Box::new(move |b: &DVector<f64>| {
        let mut rhs = DVector::zeros(offset + n);
        rhs.rows_mut(offset, n).copy_from(b);
        let cb = fac.solve_vec(&rhs)?.rows(offset, n).into_owned();
        let corr = cap_lu
            .solve(&v.tr_mul(&cb))
            .ok_or(Error::CapacitanceSingular)?;
        Ok(cb - &c_solve_u * corr)
    }))
}

/// Solves `Ax = b` by GENP on a randomly augmented or additively
/// preprocessed matrix, doubling the preprocessor width on a small pivot
/// until GENP succeeds or the width exceeds n/2.
pub fn genp_supported_solve<R: Rng + ?Sized>(
    a: &DenseMat,
    b: &DVector<f64>,
    policy: &GenpPolicy,
    rng: &mut R,
) -> Result<GenpReport> {
    let n = a.nrows();
    if !a.is_square() || b.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "{:?} with rhs {}",
            a.shape(),
            b.len()
        )));
    }
    let mut h = policy.h0.max(1);
    let mut tried = Vec::new();
    while h <= n / 2 {
        tried.push(h);
        match supported_attempt(a, h, policy, rng) {
            Ok(solver) => {
                let (res, _) = refine_core(a, solver, b, policy.refine_iters, 4.0 * f64::EPSILON)?;
                let residual = *res
                    .residuals
                    .iter()
                    .min_by(|x, y| x.total_cmp(y))
                    .unwrap_or(&f64::INFINITY);
                return Ok(GenpReport {
                    x: res.x,
                    h,
                    tried,
                    residual,
                    refinement_steps: res.residuals.len() - 1,
                });
            }
            Err(Error::SmallPivot(_)) | Err(Error::CapacitanceSingular) => h *= 2,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Exhausted)
}

/// Normalized `n×n` Gaussian matrix whose leading `2k×2k` block is the
/// anti-identity, so its leading `j×j` blocks have nullity `min(j, 2k−j)`.
pub fn adversarial_genp_matrix<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    rng: &mut R,
) -> Result<DenseMat> {
    if 2 * k > n {
        return Err(Error::InvalidArgument(format!(
            "block of order {} in {n}x{n}",
            2 * k
        )));
    }
    let mut a = gaussian(n, n, rng);
    let mut blk = a.view_mut((0, 0), (2 * k, 2 * k));
    blk.fill(0.0);
    for i in 0..2 * k {
        blk[(i, 2 * k - 1 - i)] = 1.0;
    }
    Ok(normalize(&a)?.0)
}
