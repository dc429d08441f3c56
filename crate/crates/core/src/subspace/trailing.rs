use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::leading::{leading_sketch, orth_range};
use crate::densela::{
    cond, left_inverse, orth_complement, qr_thin, singular_values, solve_upper, spectral_norm,
    DenseMat,
};
use crate::error::{Error, Result};
use crate::precond::{additive, augment_north, augment_northwest, corner, normalize, Sign, WMode};
use crate::randmats::{gaussian, normalized_multiplier, signed_sparse_uvw, KindTag};

/// Default acceptance threshold for `‖AB‖ ≤ τ‖A‖`.
pub const DEFAULT_TAU: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrailingMethod {
    /// Left inverse of `[Vᵀ; A]` applied to `[I_s; 0]`.
    North,
    /// Trailing block of `K⁻¹[0; U]` for `K = [[W, Vᵀ], [U, A]]`.
    Northwest,
    /// `(A + UVᵀ)⁻¹U`.
    Additive,
    /// Orthogonal complement of a leading sketch.
    LeadingComplement,
}

impl TrailingMethod {
    pub fn name(self) -> &'static str {
        match self {
            TrailingMethod::North => "north",
            TrailingMethod::Northwest => "northwest",
            TrailingMethod::Additive => "additive",
            TrailingMethod::LeadingComplement => "complement",
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrailingResult {
    /// Orthonormal n×r basis.
    pub b: DenseMat,
    /// `‖AB‖ / ‖A‖`.
    pub residual: f64,
    pub method: TrailingMethod,
    /// Draws used, including a resample after a rejected first attempt.
    pub attempts: usize,
}

fn relative_residual(a: &DenseMat, b: &DenseMat) -> Result<f64> {
    let norm = spectral_norm(a)?;
    if norm == 0.0 || b.ncols() == 0 {
        return Ok(0.0);
    }
    Ok(spectral_norm(&(a * b))? / norm)
}

/// `(U, V, W)` for the chosen family; the signed-sparse family draws the
/// three blocks jointly and needs a square input.
fn uvw<R: Rng + ?Sized>(
    kind: KindTag,
    m: usize,
    n: usize,
    r: usize,
    rng: &mut R,
) -> Result<(DenseMat, DenseMat, DenseMat)> {
    if kind == KindTag::SignedSparse {
        if m != n {
            return Err(Error::Unsupported(
                "signed-sparse triples need a square input".into(),
            ));
        }
        return signed_sparse_uvw(n, r, rng);
    }
    let u = normalized_multiplier(kind, m, r, rng)?;
    let v = normalized_multiplier(kind, n, r, rng)?;
    let w = corner(WMode::Gaussian, r, r, rng)?;
    Ok((u, v, w))
}

fn north_basis<R: Rng + ?Sized>(
    a: &DenseMat,
    r: usize,
    kind: KindTag,
    rng: &mut R,
) -> Result<DenseMat> {
    let (m, n) = a.shape();
    if r + m < n {
        return Err(Error::InvalidArgument(format!(
            "north block of {r} rows cannot complete {m}x{n}"
        )));
    }
    let v = normalized_multiplier(kind, n, r, rng)?;
    let khat = augment_north(a, &v)?;
    let (q, rr) = qr_thin(&khat)?;
    // K̂^(I)·[I_s; 0] = R⁻¹·(leading s rows of Q)ᵀ
    let y = solve_upper(&rr, &q.rows(0, r).transpose())?;
    Ok(qr_thin(&y)?.0)
}

fn northwest_basis<R: Rng + ?Sized>(
    a: &DenseMat,
    r: usize,
    kind: KindTag,
    rng: &mut R,
) -> Result<DenseMat> {
    let (m, n) = a.shape();
    let (u, v, w) = uvw(kind, m, n, r, rng)?;
    let k = augment_northwest(a, &u, &v, &w)?;
    let mut rhs = DMatrix::zeros(r + m, r);
    rhs.rows_mut(r, m).copy_from(&u);
    let z = if k.is_square() {
        k.lu().solve(&rhs).ok_or(Error::RankDeficient {
            pivot: 0,
            norm: 0.0,
        })?
    } else {
        left_inverse(&k)? * rhs
    };
    Ok(qr_thin(&z.rows(r, n).into_owned())?.0)
}

fn additive_basis<R: Rng + ?Sized>(
    a: &DenseMat,
    r: usize,
    kind: KindTag,
    rng: &mut R,
) -> Result<DenseMat> {
    let (m, n) = a.shape();
    let (u, v, _) = if kind == KindTag::SignedSparse {
        uvw(kind, m, n, r, rng)?
    } else {
        let u = normalized_multiplier(kind, m, r, rng)?;
        let v = normalized_multiplier(kind, n, r, rng)?;
        (u, v, DMatrix::zeros(0, 0))
    };
    let c = additive(a, &u, &v, Sign::Plus)?;
    let y = if c.is_square() {
        c.lu().solve(&u).ok_or(Error::RankDeficient {
            pivot: 0,
            norm: 0.0,
        })?
    } else {
        left_inverse(&c)? * &u
    };
    Ok(qr_thin(&y)?.0)
}

/// How the complement of a leading basis is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComplementMethod {
    /// Trailing columns of a full Householder QR.
    FullQr,
    /// The north-augmentation solver applied to `Bᵀ`.
    RandomizedNorth,
}

/// Orthonormal basis of `range(B)^⊥`, n×(n−ρ).
pub fn nmb(b: &DenseMat) -> Result<DenseMat> {
    if b.ncols() > 0 {
        let k = cond(b)?;
        if k > 1e12 || singular_values(b)?.len() < b.ncols() {
            return Err(Error::RankDeficient {
                pivot: b.ncols(),
                norm: 1.0 / k,
            });
        }
    }
    orth_complement(b)
}

fn complement_basis<R: Rng + ?Sized>(
    a: &DenseMat,
    r: usize,
    kind: KindTag,
    how: ComplementMethod,
    rng: &mut R,
) -> Result<DenseMat> {
    let n = a.ncols();
    let rho = n - r;
    if rho == 0 {
        return Ok(DMatrix::identity(n, n));
    }
    let sketch = leading_sketch(a, rho, kind, 0, rng)?;
    match how {
        ComplementMethod::FullQr => nmb(&sketch.q),
        ComplementMethod::RandomizedNorth => {
            north_basis(&sketch.q.transpose(), r, KindTag::Gaussian, rng)
        }
    }
}

/// One draw of the chosen method, with its residual but no acceptance test.
pub fn trailing_attempt<R: Rng + ?Sized>(
    a: &DenseMat,
    r: usize,
    method: TrailingMethod,
    kind: KindTag,
    rng: &mut R,
) -> Result<TrailingResult> {
    let n = a.ncols();
    if r == 0 || r > n {
        return Err(Error::InvalidArgument(format!(
            "nullity {r} for {n} columns"
        )));
    }
    let b = match method {
        TrailingMethod::North => north_basis(a, r, kind, rng)?,
        TrailingMethod::Northwest => northwest_basis(a, r, kind, rng)?,
        TrailingMethod::Additive => additive_basis(a, r, kind, rng)?,
        TrailingMethod::LeadingComplement => {
            complement_basis(a, r, kind, ComplementMethod::FullQr, rng)?
        }
    };
    let residual = relative_residual(a, &b)?;
    Ok(TrailingResult {
        b,
        residual,
        method,
        attempts: 1,
    })
}

/// Runs `method`, accepting when `‖AB‖ ≤ τ‖A‖`. A rejected or singular
/// first draw is retried once with fresh randomness.
fn monitored<R: Rng + ?Sized>(
    a: &DenseMat,
    r: usize,
    method: TrailingMethod,
    kind: KindTag,
    tau: f64,
    rng: &mut R,
) -> Result<TrailingResult> {
    let mut last = f64::INFINITY;
    for attempt in 1..=2 {
        match trailing_attempt(a, r, method, kind, rng) {
            Ok(mut res) if res.residual <= tau => {
                res.attempts = attempt;
                return Ok(res);
            }
            Ok(res) => last = res.residual,
            Err(Error::RankDeficient { .. }) | Err(Error::RankCollapse { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Err(Error::Failure { residual: last })
}

/// Trailing basis from the north augmentation `K̂ = [Vᵀ; A]`.
pub fn trailing_via_north<R: Rng + ?Sized>(
    a: &DenseMat,
    r: usize,
    kind: KindTag,
    rng: &mut R,
    tau: f64,
) -> Result<TrailingResult> {
    monitored(a, r, TrailingMethod::North, kind, tau, rng)
}

/// Trailing basis from the northwest augmentation with `q = s = r`.
pub fn trailing_via_nw<R: Rng + ?Sized>(
    a: &DenseMat,
    r: usize,
    kind: KindTag,
    rng: &mut R,
    tau: f64,
) -> Result<TrailingResult> {
    monitored(a, r, TrailingMethod::Northwest, kind, tau, rng)
}

/// Trailing basis `Q((A + UVᵀ)⁻¹U)`.
pub fn trailing_via_additive<R: Rng + ?Sized>(
    a: &DenseMat,
    r: usize,
    kind: KindTag,
    rng: &mut R,
    tau: f64,
) -> Result<TrailingResult> {
    monitored(a, r, TrailingMethod::Additive, kind, tau, rng)
}

/// Complement of a width-`ρ` leading sketch.
pub fn trailing_via_leading<R: Rng + ?Sized>(
    a: &DenseMat,
    rho: usize,
    kind: KindTag,
    how: ComplementMethod,
    rng: &mut R,
) -> Result<TrailingResult> {
    let n = a.ncols();
    if rho >= n {
        return Err(Error::InvalidArgument(format!(
            "leading rank {rho} leaves no trailing space in {n} columns"
        )));
    }
    let b = complement_basis(a, n - rho, kind, how, rng)?;
    let residual = relative_residual(a, &b)?;
    Ok(TrailingResult {
        b,
        residual,
        method: TrailingMethod::LeadingComplement,
        attempts: 1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reduction {
    Identity,
    /// `AᵀA`.
    Gram,
    /// `GA` (m > n) or `GᵀA` (m ≤ n) for a Gaussian `G` of full rank.
    Premultiply,
    /// `(A | O)`, m > n.
    PadRight,
    /// `[A; O]`, m < n.
    PadBottom,
}

/// Square matrix sharing the null space of the original on its first
/// `orig_cols` coordinates.
#[derive(Debug, Clone)]
pub struct SquareProblem {
    pub square: DenseMat,
    pub reduction: Reduction,
    pub orig_cols: usize,
}

impl SquareProblem {
    /// Maps a null basis of the square problem back to the original columns.
    pub fn restrict(&self, basis: &DenseMat) -> Result<DenseMat> {
        match self.reduction {
            Reduction::PadRight => orth_range(&basis.rows(0, self.orig_cols).into_owned()),
            _ => Ok(basis.clone()),
        }
    }
}

pub fn rect_reduce<R: Rng + ?Sized>(
    a: &DenseMat,
    reduction: Reduction,
    rng: &mut R,
) -> Result<SquareProblem> {
    let (m, n) = a.shape();
    let square = match reduction {
        Reduction::Identity if m == n => a.clone(),
        Reduction::Identity => {
            return Err(Error::ShapeMismatch(
                "identity reduction needs a square input".into(),
            ))
        }
        Reduction::Gram => a.tr_mul(a),
        Reduction::Premultiply if m > n => gaussian(n, m, rng) * a,
        Reduction::Premultiply => gaussian(m, n, rng).tr_mul(a),
        Reduction::PadRight if m >= n => {
            let mut p = DMatrix::zeros(m, m);
            p.columns_mut(0, n).copy_from(a);
            p
        }
        Reduction::PadBottom if m <= n => {
            let mut p = DMatrix::zeros(n, n);
            p.rows_mut(0, m).copy_from(a);
            p
        }
        _ => {
            return Err(Error::ShapeMismatch(format!(
                "{reduction:?} does not apply to {m}x{n}"
            )))
        }
    };
    Ok(SquareProblem {
        square,
        reduction,
        orig_cols: n,
    })
}

/// Refines a trailing basis `Y` computed at a looser threshold: the trailing
/// space of `AY` below `eta_prime` is found with the north solver and mapped
/// back through `Y`.
pub fn recursive_refine<R: Rng + ?Sized>(
    a: &DenseMat,
    y_coarse: &DenseMat,
    eta_prime: f64,
    kind: KindTag,
    rng: &mut R,
) -> Result<TrailingResult> {
    let ay = a * y_coarse;
    let k = y_coarse.ncols();
    let sv = singular_values(&ay)?;
    let r = k - sv.iter().filter(|&&s| s >= eta_prime).count();
    if r == 0 {
        return Err(Error::NoGap);
    }
    let inner = if sv.first().copied().unwrap_or(0.0) > 0.0 {
        normalize(&ay)?.0
    } else {
        ay
    };
    let res = trailing_attempt(&inner, r, TrailingMethod::North, kind, rng)?;
    let b = qr_thin(&(y_coarse * res.b))?.0;
    let residual = relative_residual(a, &b)?;
    Ok(TrailingResult {
        b,
        residual,
        method: TrailingMethod::North,
        attempts: 1,
    })
}
