use rand::Rng;

use crate::densela::{qr_thin, singular_values, spectral_norm, svd_thin, DenseMat};
use crate::error::{Error, Result};
use crate::randmats::{real_multiplier, KindTag, PreprocessorKind, Srft};

#[derive(Debug, Clone)]
pub struct SketchResult {
    /// Raw sketch `B_hᵀH`. SRFT sketches store `[Re X | Im X]`.
    pub x: DenseMat,
    /// Orthonormal basis, n×ρ₊.
    pub q: DenseMat,
    /// `‖AQQᵀ − A‖ / ‖A‖`.
    pub rel_err: f64,
    pub multiplier: PreprocessorKind,
    pub power: usize,
}

/// `‖A − AQQᵀ‖ / ‖A‖`, zero for the zero matrix.
pub(crate) fn projection_error(a: &DenseMat, q: &DenseMat) -> Result<f64> {
    let norm = spectral_norm(a)?;
    if norm == 0.0 {
        return Ok(0.0);
    }
    let aq = a * q;
    Ok(spectral_norm(&(a - aq * q.transpose()))? / norm)
}

/// The `ρ` leading left singular vectors of `X`.
pub fn compress_to_rank(x: &DenseMat, rho: usize) -> Result<DenseMat> {
    if rho > x.ncols().min(x.nrows()) {
        return Err(Error::InvalidArgument(format!(
            "rank {rho} exceeds the {}x{} sketch",
            x.nrows(),
            x.ncols()
        )));
    }
    Ok(svd_thin(x)?.s_lead(rho))
}

/// Orthonormal basis of the numerical range of `X`: QR when `X` has full
/// column rank, otherwise the left singular vectors above `1e-13·σ₁`.
pub fn orth_range(x: &DenseMat) -> Result<DenseMat> {
    match qr_thin(x) {
        Ok((q, _)) => Ok(q),
        Err(Error::RankDeficient { .. }) | Err(Error::ShapeMismatch(_)) => {
            let d = svd_thin(x)?;
            let top = d.sigma.first().copied().unwrap_or(0.0);
            let k = d
                .sigma
                .iter()
                .filter(|&&s| s > 1e-13 * top && s > 0.0)
                .count();
            Ok(d.s_lead(k))
        }
        Err(e) => Err(e),
    }
}

/// Applies `(AᵀA)ʰ` to the columns of `x`.
/// `B_h = (AAᵀ)ʰA`, whose singular values are `σ_j(A)^{2h+1}`.
pub fn power_transform(a: &DenseMat, h: usize) -> DenseMat {
    let mut b = a.clone();
    for _ in 0..h {
        b = a * a.tr_mul(&b);
    }
    b
}

fn power_apply(a: &DenseMat, mut x: DenseMat, h: usize) -> DenseMat {
    for _ in 0..h {
        x = a.tr_mul(&(a * x));
    }
    x
}

/// Sketch of the leading right singular space of `A`: `X = Aᵀ(AAᵀ)ʰH` for an
/// m×ρ₊ multiplier `H`, then an orthonormal basis of `range(X)`.
pub fn leading_sketch<R: Rng + ?Sized>(
    a: &DenseMat,
    rho_plus: usize,
    kind: KindTag,
    h: usize,
    rng: &mut R,
) -> Result<SketchResult> {
    let (m, n) = a.shape();
    if rho_plus == 0 || rho_plus > n {
        return Err(Error::InvalidArgument(format!(
            "sketch width {rho_plus} for {n} columns"
        )));
    }
    let multiplier = PreprocessorKind::new(kind, m, rho_plus, 0)?;
    let (x, q) = if kind == KindTag::Srft {
        let srft = Srft::draw(m, rho_plus, rng)?;
        let xc = srft.left_apply(&a.transpose())?;
        let re = power_apply(a, xc.map(|z| z.re), h);
        let im = power_apply(a, xc.map(|z| z.im), h);
        let x = crate::densela::hstack(&[&re, &im])?;
        let q = compress_to_rank(&x, rho_plus)?;
        (x, q)
    } else {
        let hm = real_multiplier(kind, m, rho_plus, rng)?;
        let x = power_apply(a, a.tr_mul(&hm), h);
        let q = match qr_thin(&x) {
            Ok((q, _)) => q,
            Err(Error::RankDeficient { pivot, .. }) => {
                return Err(Error::RankCollapse {
                    got: pivot,
                    expected: rho_plus,
                })
            }
            Err(e) => return Err(e),
        };
        (x, q)
    };
    let rel_err = projection_error(a, &q)?;
    Ok(SketchResult {
        x,
        q,
        rel_err,
        multiplier,
        power: h,
    })
}

/// Sketch widths visited by [`numrank_search_traced`].
#[derive(Debug, Clone)]
pub struct NumRankTrace {
    pub rank: usize,
    pub probes: Vec<usize>,
}

/// Numerical rank by binary search over the sketch width.
pub fn numrank_search<R: Rng + ?Sized>(
    a: &DenseMat,
    tol: f64,
    kind: KindTag,
    rng: &mut R,
) -> Result<usize> {
    Ok(numrank_search_traced(a, tol, kind, rng)?.rank)
}

/// Smallest width `k` whose sketch passes `‖A − AQQᵀ‖ ≤ tol·‖A‖`. One
/// multiplier of full width is drawn and its leading `k` columns are used,
/// so the sketched ranges are nested and the error is monotone in `k`.
pub fn numrank_search_traced<R: Rng + ?Sized>(
    a: &DenseMat,
    tol: f64,
    kind: KindTag,
    rng: &mut R,
) -> Result<NumRankTrace> {
    let (m, n) = a.shape();
    let top = singular_values(a)?.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return Ok(NumRankTrace {
            rank: 0,
            probes: vec![],
        });
    }
    if kind == KindTag::Srft {
        return Err(Error::Unsupported(
            "rank search uses nested real multipliers".into(),
        ));
    }
    let width = m.min(n);
    let full = real_multiplier(kind, m, width, rng)?;
    let x_full = a.tr_mul(&full);
    let mut probes = vec![];
    let mut passes = |k: usize| -> Result<bool> {
        probes.push(k);
        let q = orth_range(&x_full.columns(0, k).into_owned())?;
        Ok(projection_error(a, &q)? <= tol)
    };
    if !passes(width)? {
        return Err(Error::NoGap);
    }
    let (mut lo, mut hi) = (0usize, width);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if passes(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(NumRankTrace { rank: hi, probes })
}

/// Approximate SVD from an orthonormal basis `Q_T` of a right singular space:
/// `Q_S = Q(AQ_T)`, then the SVD of the small matrix `Q_SᵀAQ_T`.
pub fn svd_from_right_basis(
    a: &DenseMat,
    q_t: &DenseMat,
) -> Result<(DenseMat, Vec<f64>, DenseMat)> {
    let aq = a * q_t;
    let q_s = match qr_thin(&aq) {
        Ok((q, _)) => q,
        Err(Error::RankDeficient { pivot, .. }) => {
            return Err(Error::RankCollapse {
                got: pivot,
                expected: q_t.ncols(),
            })
        }
        Err(e) => return Err(e),
    };
    let core = q_s.transpose() * aq;
    let d = svd_thin(&core)?;
    Ok((&q_s * d.s, d.sigma, q_t * d.t))
}
