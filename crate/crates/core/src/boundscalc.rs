//! Closed-form bounds and expectations for Gaussian, augmented and
//! additively preprocessed matrices, with Monte-Carlo checks against them.
//!
//! Bounds that involve random norms `ν_{m,n} = ‖G‖` and `ν⁺_{m,n} = ‖G⁺‖`
//! are evaluated with expectation surrogates: [`expect_gauss_norm`] for
//! `ν`, [`expect_gauss_pinv`] for rectangular `ν⁺`, and
//! [`square_pinv_surrogate`] for square `ν⁺`, which has no expectation.

use std::f64::consts::E;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::densela::{complex_singular_values, singular_values, spectral_norm, DenseMat};
use crate::error::{Error, Result};
use crate::randmats::{gaussian, random_orthonormal, RngStream, Srft};

/// Batches used to estimate the spread of a Monte-Carlo statistic.
pub const BATCHES: usize = 20;

/// Bounds on the SRFT section singular values.
pub const SRFT_SIGMA_MIN: f64 = 0.40;
pub const SRFT_SIGMA_MAX: f64 = 1.48;

/// Coefficient of the `c/ρ` envelope for SRFT section failures.
pub const SRFT_FAILURE_COEFF: f64 = 10.0;

/// `1 + √m + √n`, an upper bound on `E‖G‖` for `G` of size m×n.
pub fn expect_gauss_norm(m: usize, n: usize) -> f64 {
    1.0 + (m as f64).sqrt() + (n as f64).sqrt()
}

/// Upper bound `exp(−t²/2)` on `P(‖G‖ > t + √m + √n)`.
pub fn tail_gauss_norm(_m: usize, _n: usize, t: f64) -> f64 {
    (-t * t / 2.0).exp()
}

/// `e·√min(m,n)/|m−n|`, an upper bound on `E‖G⁺‖`.
pub fn expect_gauss_pinv(m: usize, n: usize) -> Result<f64> {
    if m == n {
        return Err(Error::NoExpectation);
    }
    Ok(E * (m.min(n) as f64).sqrt() / m.abs_diff(n) as f64)
}

/// `E‖G⁺‖²_F = m/|m−n−1|` for `m×n` Gaussian `G` with `n > 1`, `m − n > 1`.
pub fn expect_pinv_frobenius_sq(m: usize, n: usize) -> Result<f64> {
    if n <= 1 || m < n + 2 {
        return Err(Error::NoExpectation);
    }
    Ok(m as f64 / (m - n - 1) as f64)
}

/// Upper bound `x^{m−n+1}/Γ(m−n+2)` on `P(‖G⁺‖ ≥ m/x²)`, `m ≥ n ≥ 2`.
pub fn tail_pinv_rect(m: usize, n: usize, x: f64) -> Result<f64> {
    if n < 2 || m < n || x <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "rectangular tail needs m >= n >= 2 and x > 0, got {m}, {n}, {x}"
        )));
    }
    let d = (m - n) as f64;
    Ok(((d + 1.0) * x.ln() - ln_gamma(d + 2.0)).exp())
}

/// Upper bound `2.35·√n/x` on `P(‖G⁻¹‖ ≥ x)` for square `G`, and on
/// `P(‖(A + G)⁻¹‖ ≥ x)` for any fixed `A`.
pub fn tail_pinv_square(n: usize, x: f64) -> f64 {
    2.35 * (n as f64).sqrt() / x
}

/// Upper bound `(m/2)^{(m−2)/2}/(Γ(m/2)·x^m)` on `P(‖g⁺‖ ≥ x)` for a
/// Gaussian vector of length `m ≥ 2`.
pub fn tail_pinv_vector(m: usize, x: f64) -> Result<f64> {
    if m < 2 || x <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "vector tail needs m >= 2 and x > 0, got {m}, {x}"
        )));
    }
    let mf = m as f64;
    Ok(((mf - 2.0) / 2.0 * (mf / 2.0).ln() - ln_gamma(mf / 2.0) - mf * x.ln()).exp())
}

/// Stand-in for the square `‖G⁻¹‖`: the level `4.7·√n` at which the tail
/// bound [`tail_pinv_square`] equals 1/2.
pub fn square_pinv_surrogate(n: usize) -> f64 {
    4.7 * (n as f64).sqrt()
}

/// Surrogate for `‖G⁺‖`, `G` of size m×n.
pub fn pinv_surrogate(m: usize, n: usize) -> f64 {
    expect_gauss_pinv(m, n).unwrap_or_else(|_| square_pinv_surrogate(n))
}

/// Smallest admissible SRFT oversampling,
/// `4(√ρ + √(8 ln(ρn)))²·ln ρ`, rounded up.
pub fn srft_rho_plus_ln(rho: usize, n: usize) -> usize {
    let (r, n) = (rho as f64, n as f64);
    (4.0 * (r.sqrt() + (8.0 * (r * n).ln()).sqrt()).powi(2) * r.ln())
        .ceil()
        .max(r) as usize
}

/// The same oversampling bound with base-2 logarithms.
pub fn srft_rho_plus_log2(rho: usize, n: usize) -> usize {
    let (r, n) = (rho as f64, n as f64);
    (4.0 * (r.sqrt() + (8.0 * (r * n).log2()).sqrt()).powi(2) * r.log2())
        .ceil()
        .max(r) as usize
}

/// Expected-norm bound for `K⁺` after appending `q` Gaussian columns to a
/// normalized m×n matrix of numerical rank `ρ`:
/// `(2 + √ρ + √(l−ρ))/σ_ρ · max(1, e√(l−ρ)/(q+ρ−l))`, `l = min(m, n)`.
pub fn west_bound(m: usize, n: usize, q: usize, rho: usize, sigma_rho: f64) -> Result<f64> {
    let l = m.min(n);
    if rho > l || q + rho <= l {
        return Err(Error::NoExpectation);
    }
    let gap = (l - rho) as f64;
    let head = (2.0 + (rho as f64).sqrt() + gap.sqrt()) / sigma_rho;
    Ok(head * f64::max(1.0, E * gap.sqrt() / (q + rho - l) as f64))
}

/// `E‖K‖ < 2 + √m + √q` for the western augmentation.
pub fn west_norm_bound(m: usize, q: usize) -> f64 {
    2.0 + (m as f64).sqrt() + (q as f64).sqrt()
}

/// Northwestern augmentation with `q` columns and `s` rows: the western
/// bound through whichever of `q + ρ > m` or `s + ρ > n` applies, taking the
/// smaller when both do.
pub fn nw_bound(m: usize, n: usize, q: usize, s: usize, rho: usize, sigma_rho: f64) -> Result<f64> {
    let by_cols = if q + rho > m {
        west_bound(m, n, q, rho, sigma_rho).ok()
    } else {
        None
    };
    let by_rows = if s + rho > n {
        west_bound(n, m, s, rho, sigma_rho).ok()
    } else {
        None
    };
    match (by_cols, by_rows) {
        (Some(a), Some(b)) => Ok(a.min(b)),
        (Some(a), None) | (None, Some(a)) => Ok(a),
        (None, None) => Err(Error::NoExpectation),
    }
}

/// `n̄ = (1+ν_{ρ,r})(1+ν_{ρ,r}/σ_ρ)·max(1, ν⁺_{r,r}/σ_ρ)·max(1, ν⁺_{r,r})` with
/// surrogates.
pub fn weak_nw_nbar(rho: usize, r: usize, sigma_rho: f64) -> f64 {
    let nu = expect_gauss_norm(rho, r);
    let nu_p = square_pinv_surrogate(r);
    (1.0 + nu) * (1.0 + nu / sigma_rho) * f64::max(1.0, nu_p / sigma_rho) * f64::max(1.0, nu_p)
}

/// `‖K⁻¹‖ ≤ 1.5·n̄` for the weakly randomized NW augmentation (`W = I_r`).
/// The factor `(ν⁺_{r,r})²` makes this bound weak for larger `r`.
pub fn weak_nw_bound(rho: usize, r: usize, sigma_rho: f64) -> f64 {
    1.5 * weak_nw_nbar(rho, r, sigma_rho)
}

/// `‖C⁻¹‖ ≤ 1.5·(1+ν_{n,r})²·n̄` through the link to augmentation.
pub fn additive_via_augmentation_bound(n: usize, rho: usize, r: usize, sigma_rho: f64) -> f64 {
    1.5 * (1.0 + expect_gauss_norm(n, r)).powi(2) * weak_nw_nbar(rho, r, sigma_rho)
}

/// Direct bound `‖C⁻¹‖ ≤ 1.5(1+ν²_{n,r})·max(1, ν⁺_{n,r})·max(1, ν⁺_{r,r}/σ_ρ)`
/// for `C = A + UVᵀ`; it also bounds `‖C⁺‖` for m×n inputs with `m ≥ n`.
pub fn additive_direct_bound(n: usize, r: usize, sigma_rho: f64) -> f64 {
    let nu = expect_gauss_norm(n, r);
    1.5 * (1.0 + nu * nu)
        * f64::max(1.0, pinv_surrogate(n, r))
        * f64::max(1.0, square_pinv_surrogate(r) / sigma_rho)
}

/// Bound for additive preprocessing of rank `r` above the nullity
/// `r₋ = n − ρ`. For `r ≥ 2n − ρ` it is `ν⁺_{n,n}·ν⁺_n`; otherwise
/// `(1 + γ·ν²_{n,d}·‖C₋⁻¹‖)·‖C₋⁻¹‖` with `d = r − r₋` and
/// `γ = ν⁺_d·ν⁺_{d,d}·‖C‖`, where `C₋` uses the first `r₋` columns of `U, V`.
pub fn additive_oversampled_bound(
    n: usize,
    rho: usize,
    r: usize,
    c_norm: f64,
    c_minus_inv_norm: f64,
) -> Result<f64> {
    let r_minus = n
        .checked_sub(rho)
        .ok_or_else(|| Error::InvalidArgument(format!("rank {rho} above order {n}")))?;
    if r <= r_minus {
        return Err(Error::InvalidArgument(format!(
            "rank {r} does not exceed the nullity {r_minus}"
        )));
    }
    if r + rho >= 2 * n {
        let s = square_pinv_surrogate(n);
        return Ok(s * s);
    }
    let d = r - r_minus;
    let gamma = square_pinv_surrogate(d).powi(2) * c_norm;
    let nu = expect_gauss_norm(n, d);
    Ok((1.0 + gamma * nu * nu * c_minus_inv_norm) * c_minus_inv_norm)
}

/// Dual western augmentation `K = (U | A)` with fixed normalized m×q `U`
/// and factor-Gaussian `A` of rank `ρ`: `‖U⁺‖` when `q ≥ m`, otherwise
/// `‖U⁺‖·(1 + (1+√ρ+√q)(1+√n+√q))·max(1, (m−q)ρe²/((ρ+q−m)(n−ρ)))` for
/// `m − ρ < q < m`.
pub fn dual_west_bound(m: usize, n: usize, q: usize, rho: usize, u_pinv_norm: f64) -> Result<f64> {
    if q >= m {
        return Ok(u_pinv_norm);
    }
    if rho >= n || q + rho <= m {
        return Err(Error::NoExpectation);
    }
    let (mf, nf, qf, rf) = (m as f64, n as f64, q as f64, rho as f64);
    let head = 1.0 + (1.0 + rf.sqrt() + qf.sqrt()) * (1.0 + nf.sqrt() + qf.sqrt());
    let ratio = (mf - qf) * rf * E * E / ((rf + qf - mf) * (nf - rf));
    Ok(u_pinv_norm * head * ratio.max(1.0))
}

/// `E‖F⁺‖` surrogate `√((m−q)ρ)/(|q+ρ−m|·|s+ρ−n|)`.
fn dual_f_pinv(m: usize, n: usize, q: usize, s: usize, rho: usize) -> f64 {
    let (mf, nf, qf, sf, rf) = (m as f64, n as f64, q as f64, s as f64, rho as f64);
    ((mf - qf) * rf).sqrt() / ((qf + rf - mf).abs() * (sf + rf - nf).abs())
}

/// Dual northwestern augmentation `K = [[O, Vᵀ], [U, A]]` with fixed
/// normalized `U` (m×q), `V` (n×s) and factor-Gaussian `A`.
pub fn dual_nw_bound(
    m: usize,
    n: usize,
    q: usize,
    s: usize,
    rho: usize,
    u_pinv_norm: f64,
    v_pinv_norm: f64,
) -> Result<f64> {
    let (rf, mf, nf) = (rho as f64, m as f64, n as f64);
    if q >= m || s >= n {
        return Ok(u_pinv_norm
            * v_pinv_norm
            * (1.0 + (1.0 + rf.sqrt() + mf.sqrt()) * (1.0 + rf.sqrt() + nf.sqrt())));
    }
    let in_band = (q + rho >= m) || (s + rho >= n);
    if !in_band || q + rho == m || s + rho == n {
        return Err(Error::NoExpectation);
    }
    let l = (m - q).min(n - s) as f64;
    let f = dual_f_pinv(m, n, q, s, rho);
    let nq = 1.0 + rf.sqrt() + (q as f64).sqrt();
    let ns = 1.0 + rf.sqrt() + (s as f64).sqrt();
    let nl = 1.0 + l.sqrt() + rf.sqrt();
    let kbar = 1.0 + nl * f64::max(nq, ns * f) + nq * ns * (1.0 + nl * nl) * f;
    Ok(u_pinv_norm * f64::max(v_pinv_norm, f) * kbar)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Comparison {
    /// The empirical mean should not exceed the bound by more than 3σ̂.
    MeanBelow,
    /// The event frequency should not exceed the tail bound by more than 3σ̂.
    FrequencyBelow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub bound_name: String,
    pub comparison: Comparison,
    pub theoretical: f64,
    /// Sample mean, or event frequency for tail bounds.
    pub empirical_mean: f64,
    /// 95th percentile of the sampled quantity.
    pub empirical_p95: f64,
    /// Standard error of the statistic from batch means.
    pub sigma_hat: f64,
    pub trials: usize,
    pub violated: bool,
    /// A tail bound of at least 1 says nothing.
    pub vacuous: bool,
}

impl BoundReport {
    fn build(
        name: &str,
        comparison: Comparison,
        theoretical: f64,
        values: &[f64],
        events: Option<&[bool]>,
    ) -> Self {
        let trials = values.len();
        let stat: Vec<f64> = match events {
            Some(ev) => ev.iter().map(|&e| if e { 1.0 } else { 0.0 }).collect(),
            None => values.to_vec(),
        };
        let mean = stat.iter().sum::<f64>() / trials.max(1) as f64;
        let batches = BATCHES.min(trials.max(1));
        let size = trials / batches;
        let batch_means: Vec<f64> = (0..batches)
            .map(|b| {
                let chunk = &stat[b * size..if b + 1 == batches {
                    trials
                } else {
                    (b + 1) * size
                }];
                chunk.iter().sum::<f64>() / chunk.len().max(1) as f64
            })
            .collect();
        let bm = batch_means.iter().sum::<f64>() / batches as f64;
        let var = if batches > 1 {
            batch_means.iter().map(|x| (x - bm).powi(2)).sum::<f64>() / (batches - 1) as f64
        } else {
            0.0
        };
        let sigma_hat = (var / batches as f64).sqrt();
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.total_cmp(b));
        let p95 = sorted
            .get(((trials as f64 * 0.95).ceil() as usize).saturating_sub(1))
            .copied()
            .unwrap_or(f64::NAN);
        BoundReport {
            bound_name: name.to_string(),
            comparison,
            theoretical,
            empirical_mean: mean,
            empirical_p95: p95,
            sigma_hat,
            trials,
            violated: mean > theoretical + 3.0 * sigma_hat,
            vacuous: comparison == Comparison::FrequencyBelow && theoretical >= 1.0,
        }
    }
}

/// Draws `trials` samples in parallel, trial `i` from `stream.child(i)`.
pub fn sample<F>(trials: usize, stream: RngStream, f: F) -> Result<Vec<f64>>
where
    F: Fn(&mut ChaCha8Rng) -> Result<f64> + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|i| f(&mut stream.child(i as u64).rng()))
        .collect()
}

/// Compares the sample mean of `f` against an expectation bound.
pub fn mean_report<F>(
    name: &str,
    theoretical: f64,
    trials: usize,
    stream: RngStream,
    f: F,
) -> Result<BoundReport>
where
    F: Fn(&mut ChaCha8Rng) -> Result<f64> + Sync,
{
    let values = sample(trials, stream, f)?;
    Ok(BoundReport::build(
        name,
        Comparison::MeanBelow,
        theoretical,
        &values,
        None,
    ))
}

/// Compares the frequency of `value ≥ level` against a tail bound.
pub fn tail_report<F>(
    name: &str,
    theoretical: f64,
    level: f64,
    trials: usize,
    stream: RngStream,
    f: F,
) -> Result<BoundReport>
where
    F: Fn(&mut ChaCha8Rng) -> Result<f64> + Sync,
{
    let values = sample(trials, stream, f)?;
    let events: Vec<bool> = values.iter().map(|&v| v >= level).collect();
    Ok(BoundReport::build(
        name,
        Comparison::FrequencyBelow,
        theoretical,
        &values,
        Some(&events),
    ))
}

fn inv_norm(m: &DenseMat) -> Result<f64> {
    let sv = singular_values(m)?;
    let smin = sv.last().copied().unwrap_or(0.0);
    Ok(if smin > 0.0 {
        1.0 / smin
    } else {
        f64::INFINITY
    })
}

/// Mean `‖G‖` against `1 + √m + √n`.
pub fn gauss_norm_check(
    m: usize,
    n: usize,
    trials: usize,
    stream: RngStream,
) -> Result<BoundReport> {
    mean_report(
        "gauss_norm",
        expect_gauss_norm(m, n),
        trials,
        stream,
        |rng| spectral_norm(&gaussian(m, n, rng)),
    )
}

/// Mean `‖G⁺‖` against `e√l/|m−n|`.
pub fn gauss_pinv_check(
    m: usize,
    n: usize,
    trials: usize,
    stream: RngStream,
) -> Result<BoundReport> {
    mean_report(
        "gauss_pinv",
        expect_gauss_pinv(m, n)?,
        trials,
        stream,
        |rng| inv_norm(&gaussian(m, n, rng)),
    )
}

/// Frequency of `‖G⁻¹‖ ≥ x` for square `G` against `2.35√n/x`.
pub fn square_pinv_tail_check(
    n: usize,
    x: f64,
    trials: usize,
    stream: RngStream,
) -> Result<BoundReport> {
    tail_report(
        "square_pinv_tail",
        tail_pinv_square(n, x),
        x,
        trials,
        stream,
        |rng| inv_norm(&gaussian(n, n, rng)),
    )
}

/// Frequency of `‖(A + G)⁻¹‖ ≥ x` against `2.35√n/x` for a fixed square `A`.
pub fn perturbed_inverse_tail(
    a: &DenseMat,
    x: f64,
    trials: usize,
    stream: RngStream,
) -> Result<BoundReport> {
    let n = a.nrows();
    if !a.is_square() {
        return Err(Error::ShapeMismatch(
            "perturbed inverse needs a square matrix".into(),
        ));
    }
    tail_report(
        "perturbed_inverse_tail",
        tail_pinv_square(n, x),
        x,
        trials,
        stream,
        |rng| inv_norm(&(a + gaussian(n, n, rng))),
    )
}

/// How often `U·H` leaves `[0.40, 1.48]` for a random `ρ×n` `U` with
/// orthonormal rows and an `n×ρ₊` SRFT `H`. The bound is the `10/ρ`
/// failure envelope; the p95 field holds the 95th percentile of
/// `1/σ_ρ(UH)`.
pub fn srft_support_check(
    rho: usize,
    n: usize,
    rho_plus: usize,
    trials: usize,
    stream: RngStream,
) -> Result<BoundReport> {
    if rho == 0 || rho > rho_plus || rho_plus > n {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= rho <= rho_plus <= n, got {rho}, {rho_plus}, {n}"
        )));
    }
    let flags = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream.child(i as u64).rng();
            let u = random_orthonormal(n, rho, &mut rng).transpose();
            let h = Srft::draw(n, rho_plus, &mut rng)?;
            let sv = complex_singular_values(&h.left_apply(&u)?)?;
            let (smax, smin) = (sv[0], sv[rho - 1]);
            Ok((
                !(smin >= SRFT_SIGMA_MIN && smax <= SRFT_SIGMA_MAX),
                1.0 / smin,
            ))
        })
        .collect::<Result<Vec<(bool, f64)>>>()?;
    let events: Vec<bool> = flags.iter().map(|f| f.0).collect();
    let values: Vec<f64> = flags.iter().map(|f| f.1).collect();
    let envelope = SRFT_FAILURE_COEFF / rho as f64;
    Ok(BoundReport::build(
        "srft_support",
        Comparison::FrequencyBelow,
        envelope,
        &values,
        Some(&events),
    ))
}

/// `‖K⁺‖` for a fresh western augmentation `(U | A)` of a fixed matrix.
pub fn west_pinv_sample<R: Rng + ?Sized>(a: &DenseMat, q: usize, rng: &mut R) -> Result<f64> {
    let u = gaussian(a.nrows(), q, rng);
    let k = crate::densela::hstack(&[&u, a])?;
    inv_norm(&k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_norm_formula() {
        assert_eq!(expect_gauss_norm(1, 1), 3.0);
        assert_eq!(expect_gauss_norm(64, 64), 17.0);
        assert!((tail_gauss_norm(3, 3, 2.0) - (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn pinv_expectation_formula() {
        assert!((expect_gauss_pinv(20, 10).unwrap() - E * 10f64.sqrt() / 10.0).abs() < 1e-15);
        assert!((expect_gauss_pinv(20, 10).unwrap() - 0.8596).abs() < 1e-4);
        assert_eq!(expect_gauss_pinv(16, 16), Err(Error::NoExpectation));
        assert!((tail_pinv_square(16, 100.0) - 0.094).abs() < 1e-15);
        assert_eq!(expect_pinv_frobenius_sq(10, 5).unwrap(), 2.5);
    }

    #[test]
    fn vector_and_rect_tails() {
        // m = 2: (1)^0/(Γ(1)x²) = 1/x²
        assert!((tail_pinv_vector(2, 3.0).unwrap() - 1.0 / 9.0).abs() < 1e-14);
        // m = n: x/Γ(2) = x
        assert!((tail_pinv_rect(5, 5, 0.3).unwrap() - 0.3).abs() < 1e-14);
        assert!((tail_pinv_rect(7, 5, 0.5).unwrap() - 0.125 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn west_bound_cases() {
        assert!((west_bound(16, 16, 1, 16, 1.0).unwrap() - 6.0).abs() < 1e-15);
        assert_eq!(west_bound(64, 64, 2, 62, 0.1), Err(Error::NoExpectation));
        let a = west_bound(64, 64, 3, 62, 0.1).unwrap();
        let b = west_bound(64, 64, 4, 62, 0.1).unwrap();
        assert!(b < a);
        assert!(
            nw_bound(64, 64, 6, 1, 62, 0.1).unwrap() == west_bound(64, 64, 6, 62, 0.1).unwrap()
        );
    }

    #[test]
    fn additive_closed_forms() {
        let nbar = weak_nw_nbar(62, 2, 1.0);
        let nu = expect_gauss_norm(62, 2);
        let s = square_pinv_surrogate(2);
        assert!((nbar - (1.0 + nu) * (1.0 + nu) * s * s).abs() < 1e-9 * nbar);
        assert!(weak_nw_bound(62, 2, 1.0) > weak_nw_bound(62, 1, 1.0));
        let d = additive_direct_bound(64, 2, 1.0);
        assert!(d.is_finite() && d > 1.0);
        assert!(additive_oversampled_bound(64, 62, 2, 1.0, 1.0).is_err());
        let full = additive_oversampled_bound(64, 64, 64, 1.0, 1.0).unwrap();
        assert!((full - square_pinv_surrogate(64).powi(2)).abs() < 1e-9);
    }

    #[test]
    fn dual_bounds_cases() {
        assert_eq!(dual_west_bound(10, 20, 10, 3, 1.0).unwrap(), 1.0);
        assert_eq!(
            dual_west_bound(10, 20, 7, 3, 1.0),
            Err(Error::NoExpectation)
        );
        let a = dual_west_bound(10, 20, 8, 3, 1.0).unwrap();
        let b = dual_west_bound(10, 20, 9, 3, 1.0).unwrap();
        assert!(a.is_finite() && b.is_finite());
        assert!(dual_nw_bound(10, 10, 10, 2, 3, 1.0, 1.0).unwrap() > 1.0);
        assert!(dual_nw_bound(10, 10, 8, 8, 3, 1.0, 1.0)
            .unwrap()
            .is_finite());
    }

    #[test]
    fn srft_oversampling_evaluators() {
        assert!(srft_rho_plus_ln(8, 256) >= 8);
        assert!(srft_rho_plus_log2(8, 256) > srft_rho_plus_ln(8, 256));
        assert_eq!(srft_rho_plus_ln(1, 256), 1);
    }

    #[test]
    fn full_section_never_fails() {
        let r = srft_support_check(4, 32, 32, 40, RngStream::new(1, 0)).unwrap();
        assert_eq!(r.empirical_mean, 0.0);
    }

    #[test]
    fn report_flags_vacuous_tails() {
        let r = square_pinv_tail_check(16, 5.0, 40, RngStream::new(2, 0)).unwrap();
        assert!(r.vacuous);
        assert!(!r.violated);
    }

    #[test]
    fn perturbed_zero_matrix_is_plain_gaussian() {
        let z = DenseMat::zeros(8, 8);
        let a = perturbed_inverse_tail(&z, 50.0, 60, RngStream::new(3, 0)).unwrap();
        let b = square_pinv_tail_check(8, 50.0, 60, RngStream::new(3, 0)).unwrap();
        assert_eq!(a.empirical_mean, b.empirical_mean);
    }
}
