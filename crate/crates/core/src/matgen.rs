//! Benchmark inputs: SVD-specified matrices of prescribed numerical rank and
//! the eight preconditioning classes (1n, 1s, ..., 4s).
//!
//! Classes 2 to 4 are returned as `A/‖A‖ + βI`. Symmetric classes use
//! `β = 1e-16`; nonsymmetric ones search `β` on a log scale so that
//! `σ_min(A') ∈ [1e-18, 1e-16]·‖A'‖`, i.e. `κ(A') ∈ [1e16, 1e18]`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::densela::{
    cond, hstack, singular_values, spectral_norm, spectral_norm_estimate, DenseMat, SvdTriple,
};
use crate::error::{Error, Result};
use crate::randmats::{random_orthogonal, random_orthonormal};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeadRule {
    /// `σ_j = 1/j`.
    Reciprocal,
    /// `σ₁ = 1`, interior values uniform in `[0.1, 1)` and sorted, `σ_ρ = 0.1`.
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSpec {
    pub n: usize,
    pub rho: usize,
    pub head: HeadRule,
    pub tail_value: f64,
}

impl SpectrumSpec {
    pub fn reciprocal(n: usize, rho: usize, tail_value: f64) -> Self {
        Self {
            n,
            rho,
            head: HeadRule::Reciprocal,
            tail_value,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.rho == 0 || self.rho > self.n {
            return Err(Error::InvalidArgument(format!(
                "rank {} for size {}",
                self.rho, self.n
            )));
        }
        if !(self.tail_value > 0.0) {
            return Err(Error::InvalidArgument("tail value must be positive".into()));
        }
        Ok(())
    }

    /// The nonincreasing singular values.
    pub fn sigma<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut s = Vec::with_capacity(self.n);
        match self.head {
            HeadRule::Reciprocal => s.extend((1..=self.rho).map(|j| 1.0 / j as f64)),
            HeadRule::Sampled => {
                s.push(1.0);
                if self.rho >= 2 {
                    let mut mid: Vec<f64> = (0..self.rho - 2)
                        .map(|_| rng.random_range(0.1..1.0))
                        .collect();
                    mid.sort_by(|a, b| b.total_cmp(a));
                    s.extend(mid);
                    s.push(0.1);
                }
            }
        }
        s.resize(self.n, self.tail_value);
        s
    }
}

/// `A = S·diag(σ)·Tᵀ` with random orthogonal `S`, `T` (`T = S` when symmetric),
/// together with the exact factors.
pub fn svd_spec_matrix<R: Rng + ?Sized>(
    spec: &SpectrumSpec,
    symmetric: bool,
    rng: &mut R,
) -> Result<(DenseMat, SvdTriple)> {
    spec.validate()?;
    let sigma = spec.sigma(rng);
    let s = random_orthogonal(spec.n, rng);
    let t = if symmetric {
        s.clone()
    } else {
        random_orthogonal(spec.n, rng)
    };
    let truth = SvdTriple {
        s,
        sigma,
        t,
        compact: false,
    };
    Ok((truth.reconstruct(), truth))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassTag {
    T1n,
    T1s,
    T2n,
    T2s,
    T3n,
    T3s,
    T4n,
    T4s,
}

impl ClassTag {
    pub const ALL: [ClassTag; 8] = [
        ClassTag::T1n,
        ClassTag::T1s,
        ClassTag::T2n,
        ClassTag::T2s,
        ClassTag::T3n,
        ClassTag::T3s,
        ClassTag::T4n,
        ClassTag::T4s,
    ];

    pub fn symmetric(self) -> bool {
        matches!(
            self,
            ClassTag::T1s | ClassTag::T2s | ClassTag::T3s | ClassTag::T4s
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            ClassTag::T1n => "1n",
            ClassTag::T1s => "1s",
            ClassTag::T2n => "2n",
            ClassTag::T2s => "2s",
            ClassTag::T3n => "3n",
            ClassTag::T3s => "3s",
            ClassTag::T4n => "4n",
            ClassTag::T4s => "4s",
        }
    }
}

impl fmt::Display for ClassTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim_start_matches(['t', 'T']);
        ClassTag::ALL
            .into_iter()
            .find(|c| c.name() == key)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown class {s:?}")))
    }
}

/// One preconditioning test class at size `n` with numerical nullity `r`.
/// Classes 4n/4s always have nullity 1; `r` only sizes the preprocessors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestClass {
    pub tag: ClassTag,
    pub n: usize,
    pub r: usize,
}

/// Accepted condition-number window for generated class members.
pub const CLASS_KAPPA_RANGE: (f64, f64) = (1e15, 5e18);
/// Target window of the shift search.
pub const SHIFT_KAPPA_RANGE: (f64, f64) = (1e16, 1e18);
pub const SYMMETRIC_SHIFT: f64 = 1e-16;
const MAX_ATTEMPTS: usize = 50;
const MAX_BISECTIONS: usize = 60;

/// m×n Toeplitz matrix `a_{i,j} = diag(i − j)`.
pub fn toeplitz(m: usize, n: usize, diag: impl Fn(isize) -> f64) -> DenseMat {
    DMatrix::from_fn(m, n, |i, j| diag(i as isize - j as isize))
}

/// Gaussian Toeplitz matrix; one deviate per diagonal, offset `1 − n ..= m − 1`.
pub fn gaussian_toeplitz<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> DenseMat {
    let vals: Vec<f64> = (0..m + n - 1).map(|_| rng.sample(StandardNormal)).collect();
    toeplitz(m, n, |d| vals[(d + n as isize - 1) as usize])
}

fn det(m: &DenseMat) -> f64 {
    m.clone().lu().determinant()
}

/// Nonsymmetric Toeplitz matrix whose bottom-left corner is solved from the
/// affine equation `det A(x) = 0`. Returns the matrix and the slope of
/// `det A(x)`.
pub fn singular_toeplitz<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<(DenseMat, f64)> {
    if n < 2 {
        return Err(Error::InvalidArgument("Toeplitz class needs n >= 2".into()));
    }
    let scale = 1.0 / (n as f64).sqrt();
    let vals: Vec<f64> = (0..2 * n - 2)
        .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
        .collect();
    // offsets 1-n ..= n-2; the corner offset n-1 is the unknown
    let mut a = toeplitz(n, n, |d| {
        if d == n as isize - 1 {
            0.0
        } else {
            vals[(d + n as isize - 1) as usize]
        }
    });
    let d0 = det(&a);
    a[(n - 1, 0)] = scale;
    let slope = (det(&a) - d0) / scale;
    if slope == 0.0 || !slope.is_finite() {
        return Err(Error::NoRealRoot);
    }
    let mut x = -d0 / slope;
    a[(n - 1, 0)] = x;
    // one secant polish against rounding in the first pair of evaluations
    let dx = det(&a);
    x -= dx / slope;
    a[(n - 1, 0)] = x;
    Ok((a, slope))
}

/// Symmetric Toeplitz matrix whose corner pair `a_{1,n} = a_{n,1}` solves the
/// quadratic `det A(x) = 0`.
pub fn singular_symmetric_toeplitz<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DenseMat> {
    if n < 3 {
        return Err(Error::InvalidArgument(
            "symmetric Toeplitz class needs n >= 3".into(),
        ));
    }
    let scale = 1.0 / (n as f64).sqrt();
    let vals: Vec<f64> = (0..n - 1)
        .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let mut a = toeplitz(n, n, |d| {
        let k = d.unsigned_abs();
        if k == n - 1 {
            0.0
        } else {
            vals[k]
        }
    });
    let mut at = |x: f64| {
        a[(n - 1, 0)] = x;
        a[(0, n - 1)] = x;
        det(&a)
    };
    let (dm, d0, dp) = (at(-scale), at(0.0), at(scale));
    let qa = ((dp + dm) / 2.0 - d0) / (scale * scale);
    let qb = (dp - dm) / (2.0 * scale);
    let qc = d0;
    let disc = qb * qb - 4.0 * qa * qc;
    if !(disc >= 0.0) || qa == 0.0 {
        return Err(Error::NoRealRoot);
    }
    let big = -(qb + qb.signum() * disc.sqrt()) / 2.0;
    let roots = [big / qa, if big != 0.0 { qc / big } else { 0.0 }];
    let x = if roots[0].abs() <= roots[1].abs() {
        roots[0]
    } else {
        roots[1]
    };
    at(x);
    Ok(a)
}

fn is_symmetric(a: &DenseMat) -> bool {
    a.is_square() && (a - a.transpose()).norm() <= 1e-12 * a.norm()
}

/// `A/‖A‖ + βI` with the shift chosen per the module rules. Returns the
/// shifted matrix, `β`, and its condition number.
pub fn beta_shift(a: &DenseMat, target_kappa_range: (f64, f64)) -> Result<(DenseMat, f64)> {
    beta_shift_with_kappa(a, target_kappa_range).map(|(m, b, _)| (m, b))
}

pub fn beta_shift_with_kappa(a: &DenseMat, target: (f64, f64)) -> Result<(DenseMat, f64, f64)> {
    if !a.is_square() {
        return Err(Error::ShapeMismatch("shift needs a square matrix".into()));
    }
    let n = a.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let norm = spectral_norm(a)?;
    if norm == 0.0 {
        return Ok((id * SYMMETRIC_SHIFT, SYMMETRIC_SHIFT, 1.0));
    }
    let base = a / norm;
    if is_symmetric(a) {
        let out = &base + &id * SYMMETRIC_SHIFT;
        let k = cond(&out)?;
        return Ok((out, SYMMETRIC_SHIFT, k));
    }
    let (lo_k, hi_k) = (target.0.log10(), target.1.log10());
    let kappa_at = |lb: f64| -> Result<(DenseMat, f64)> {
        let m = &base + &id * 10f64.powf(lb);
        let k = cond(&m)?;
        Ok((m, k))
    };
    let miss = |k: f64| {
        let lk = k.log10();
        (lo_k - lk).max(lk - hi_k).max(0.0)
    };
    // log10 β bracket; κ falls as β grows
    let (mut lo, mut hi) = (-24.0f64, -8.0f64);
    let mut best: Option<(f64, f64, DenseMat)> = None;
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let (m, k) = kappa_at(mid)?;
        let better = best.as_ref().is_none_or(|(_, bk, _)| miss(k) < miss(*bk));
        if better {
            best = Some((mid, k, m));
        }
        if miss(k) == 0.0 {
            let (lb, k, m) = best.expect("just set");
            return Ok((m, 10f64.powf(lb), k));
        }
        if k.log10() > hi_k {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-3 {
            break;
        }
    }
    let (lb, k, _) = best.expect("at least one bisection step");
    Err(Error::BisectFail {
        best_beta: 10f64.powf(lb),
        kappa: k,
    })
}

fn class_core<R: Rng + ?Sized>(tc: &TestClass, rng: &mut R) -> Result<DenseMat> {
    let (n, r) = (tc.n, tc.r);
    let k = n - r;
    Ok(match tc.tag {
        ClassTag::T1n | ClassTag::T1s => {
            let spec = SpectrumSpec {
                n,
                rho: k,
                head: HeadRule::Sampled,
                tail_value: 1e-16,
            };
            svd_spec_matrix(&spec, tc.tag.symmetric(), rng)?.0
        }
        ClassTag::T2n => {
            let w = random_orthonormal(n, k, rng);
            let z = random_orthonormal(k, r, rng);
            let wz = &w * z;
            hstack(&[&w, &wz])?
        }
        ClassTag::T2s => {
            let w = random_orthonormal(n, k, rng);
            &w * w.transpose()
        }
        ClassTag::T3n => {
            let t = gaussian_toeplitz(n, k, rng);
            let s = gaussian_toeplitz(k, r, rng);
            let ts = &t * s;
            let a = hstack(&[&t, &ts])?;
            let c = 1.0 / spectral_norm_estimate(&a);
            a * c
        }
        ClassTag::T3s => {
            let t = gaussian_toeplitz(n, k, rng);
            let a = &t * t.transpose();
            let c = 1.0 / spectral_norm_estimate(&a);
            a * c
        }
        ClassTag::T4n => singular_toeplitz(n, rng)?.0,
        ClassTag::T4s => singular_symmetric_toeplitz(n, rng)?,
    })
}

/// A member of the class with its condition number and shift (zero for
/// classes 1n/1s, which are not shifted).
#[derive(Debug, Clone)]
pub struct ClassSample {
    pub a: DenseMat,
    pub beta: f64,
    pub kappa: f64,
    pub attempts: usize,
}

pub fn gen_class_sample<R: Rng + ?Sized>(tc: &TestClass, rng: &mut R) -> Result<ClassSample> {
    let (n, r) = (tc.n, tc.r);
    if r == 0 || 4 * r > n {
        return Err(Error::InvalidArgument(format!(
            "class needs 1 <= r and 4r <= n, got r={r}, n={n}"
        )));
    }
    let (lo, hi) = CLASS_KAPPA_RANGE;
    for attempt in 1..=MAX_ATTEMPTS {
        let core = match class_core(tc, rng) {
            Ok(m) => m,
            Err(Error::NoRealRoot) => continue,
            Err(e) => return Err(e),
        };
        let (a, beta, kappa) = match tc.tag {
            ClassTag::T1n | ClassTag::T1s => {
                let k = cond(&core)?;
                (core, 0.0, k)
            }
            _ => match beta_shift_with_kappa(&core, SHIFT_KAPPA_RANGE) {
                Ok(t) => t,
                // the rounding floor can keep κ below 1e16; keep the closest shift
                Err(Error::BisectFail { best_beta, kappa }) => {
                    let norm = spectral_norm(&core)?;
                    let a = &core / norm + DMatrix::<f64>::identity(n, n) * best_beta;
                    (a, best_beta, kappa)
                }
                Err(e) => return Err(e),
            },
        };
        if (lo..=hi).contains(&kappa) {
            return Ok(ClassSample {
                a,
                beta,
                kappa,
                attempts: attempt,
            });
        }
    }
    Err(Error::MaxRetries(MAX_ATTEMPTS))
}

pub fn gen_class<R: Rng + ?Sized>(tc: &TestClass, rng: &mut R) -> Result<DenseMat> {
    Ok(gen_class_sample(tc, rng)?.a)
}

/// Smallest singular value, a convenience for class diagnostics.
pub fn sigma_min(a: &DenseMat) -> Result<f64> {
    Ok(singular_values(a)?.last().copied().unwrap_or(0.0))
}
