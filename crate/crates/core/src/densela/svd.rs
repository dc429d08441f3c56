use nalgebra::{DMatrix, SVD};

use super::mat::{hstack, DenseMat};
use super::qr::orth_complement;
use crate::error::{Error, Result};

pub const PINV_DEFAULT_TOL: f64 = 1e-12;

/// Iteration cap per unit of `min(m, n)`.
const SWEEPS_PER_DIM: usize = 75;

/// `A = S·diag(sigma)·Tᵀ` with `sigma` nonincreasing.
///
/// Full triples carry square `S` and `T`; compact ones keep only the
/// `min(m, n)` leading columns.
#[derive(Debug, Clone)]
pub struct SvdTriple {
    pub s: DenseMat,
    pub sigma: Vec<f64>,
    pub t: DenseMat,
    pub compact: bool,
}

impl SvdTriple {
    pub fn reconstruct(&self) -> DenseMat {
        let k = self.sigma.len();
        let mut sd = self.s.columns(0, k).into_owned();
        for (j, &sj) in self.sigma.iter().enumerate() {
            sd.column_mut(j).scale_mut(sj);
        }
        sd * self.t.columns(0, k).transpose()
    }

    /// Leading `k` left singular vectors.
    pub fn s_lead(&self, k: usize) -> DenseMat {
        self.s.columns(0, k).into_owned()
    }

    /// Leading `k` right singular vectors.
    pub fn t_lead(&self, k: usize) -> DenseMat {
        self.t.columns(0, k).into_owned()
    }

    /// Right singular vectors past the first `k`.
    pub fn t_trail(&self, k: usize) -> DenseMat {
        self.t.columns(k, self.t.ncols() - k).into_owned()
    }

    pub fn s_trail(&self, k: usize) -> DenseMat {
        self.s.columns(k, self.s.ncols() - k).into_owned()
    }
}

fn raw_svd(m: &DenseMat, vectors: bool) -> Result<SVD<f64, nalgebra::Dyn, nalgebra::Dyn>> {
    let cap = SWEEPS_PER_DIM * m.nrows().min(m.ncols()).max(1);
    SVD::try_new(m.clone(), vectors, vectors, f64::EPSILON, cap)
        .ok_or(Error::NoConvergence { sweeps: cap })
}

pub fn svd_thin(m: &DenseMat) -> Result<SvdTriple> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Ok(SvdTriple {
            s: DMatrix::zeros(rows, 0),
            sigma: vec![],
            t: DMatrix::zeros(cols, 0),
            compact: true,
        });
    }
    let d = raw_svd(m, true)?;
    Ok(SvdTriple {
        s: d.u.expect("left vectors requested"),
        sigma: d.singular_values.iter().copied().collect(),
        t: d.v_t.expect("right vectors requested").transpose(),
        compact: true,
    })
}

/// Full SVD; rectangular inputs get their short factor completed by an
/// orthonormal complement.
pub fn svd(m: &DenseMat) -> Result<SvdTriple> {
    let (rows, cols) = m.shape();
    let thin = svd_thin(m)?;
    let complete = |f: DenseMat, n: usize| -> Result<DenseMat> {
        if f.ncols() == n {
            Ok(f)
        } else {
            let c = orth_complement(&f)?;
            hstack(&[&f, &c])
        }
    };
    Ok(SvdTriple {
        s: complete(thin.s, rows)?,
        sigma: thin.sigma,
        t: complete(thin.t, cols)?,
        compact: false,
    })
}

/// Singular values in nonincreasing order.
pub fn singular_values(m: &DenseMat) -> Result<Vec<f64>> {
    if m.is_empty() {
        return Ok(vec![]);
    }
    Ok(raw_svd(m, false)?.singular_values.iter().copied().collect())
}

pub fn spectral_norm(m: &DenseMat) -> Result<f64> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}

pub fn frobenius_norm(m: &DenseMat) -> f64 {
    m.norm()
}

pub fn chebyshev_norm(m: &DenseMat) -> f64 {
    m.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// Power-iteration estimate of `‖M‖` (a lower bound, typically within 1e-6).
pub fn spectral_norm_estimate(m: &DenseMat) -> f64 {
    let n = m.ncols();
    if n == 0 || m.nrows() == 0 {
        return 0.0;
    }
    let mut v = nalgebra::DVector::from_fn(n, |i, _| 1.0 + ((i * 7919) % 13) as f64 / 13.0);
    v /= v.norm();
    let mut est = 0.0;
    for _ in 0..200 {
        let w = m * &v;
        let z = m.tr_mul(&w);
        let zn = z.norm();
        if zn == 0.0 {
            return w.norm();
        }
        let next = zn.sqrt();
        v = z / zn;
        if (next - est).abs() <= 1e-9 * next {
            return next;
        }
        est = next;
    }
    est
}

/// Moore–Penrose pseudoinverse; singular values below `trunc_tol·σ₁` count
/// as zero. The zero matrix maps to the zero matrix of transposed shape.
pub fn pinv(m: &DenseMat, trunc_tol: f64) -> Result<DenseMat> {
    let (rows, cols) = m.shape();
    let d = svd_thin(m)?;
    let mut out = DMatrix::zeros(cols, rows);
    let Some(&top) = d.sigma.first() else {
        return Ok(out);
    };
    if top == 0.0 {
        return Ok(out);
    }
    for (j, &sj) in d.sigma.iter().enumerate() {
        if sj >= trunc_tol * top && sj > 0.0 {
            out += d.t.column(j) * d.s.column(j).transpose() / sj;
        }
    }
    Ok(out)
}

/// `σ₁/σ_ρ` over the nonzero singular values.
pub fn cond(m: &DenseMat) -> Result<f64> {
    let s = singular_values(m)?;
    let top = s.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let low = s.iter().rev().find(|&&x| x > 0.0).copied().unwrap_or(top);
    Ok(top / low)
}

/// Number of singular values at least `eta`.
pub fn numrank(m: &DenseMat, eta: f64) -> Result<usize> {
    Ok(singular_values(m)?.iter().filter(|&&s| s >= eta).count())
}

/// `B⁺T`.
pub fn least_squares(b: &DenseMat, t: &DenseMat) -> Result<DenseMat> {
    if b.nrows() != t.nrows() {
        return Err(Error::ShapeMismatch(
            "least_squares row counts differ".into(),
        ));
    }
    Ok(pinv(b, PINV_DEFAULT_TOL)? * t)
}

/// Inverse through LU with partial pivoting.
pub fn inverse(m: &DenseMat) -> Result<DenseMat> {
    if !m.is_square() {
        return Err(Error::ShapeMismatch(
            "inverse of a non-square matrix".into(),
        ));
    }
    m.clone().lu().try_inverse().ok_or(Error::RankDeficient {
        pivot: 0,
        norm: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densela::dense_from_row_major;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn diagonal() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3., 2., 1.]));
        let d = svd(&m).unwrap();
        assert_eq!(d.sigma, vec![3., 2., 1.]);
        assert!((d.s.abs() - DMatrix::identity(3, 3)).norm() < 1e-15);
        assert!((d.t.abs() - DMatrix::identity(3, 3)).norm() < 1e-15);
    }

    #[test]
    fn permuted_diagonal() {
        let m = dense_from_row_major(2, 2, &[0., 2., 1., 0.]).unwrap();
        let s = singular_values(&m).unwrap();
        assert!(close(s[0], 2.0, 1e-15) && close(s[1], 1.0, 1e-15));
    }

    #[test]
    fn full_rectangular_factors() {
        let m = dense_from_row_major(4, 2, &[1., 2., 3., 4., 5., 6., 7., 9.]).unwrap();
        let d = svd(&m).unwrap();
        assert_eq!(d.s.shape(), (4, 4));
        assert!((d.s.transpose() * &d.s - DMatrix::identity(4, 4)).norm() < 1e-13);
        assert!((d.reconstruct() - &m).norm() < 1e-12 * 4.0 * d.sigma[0]);
        let w = m.transpose();
        let d = svd(&w).unwrap();
        assert_eq!(d.t.shape(), (4, 4));
        assert!((d.reconstruct() - &w).norm() < 1e-12 * 4.0 * d.sigma[0]);
    }

    #[test]
    fn pinv_cases() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2., 0.]));
        let p = pinv(&m, 1e-12).unwrap();
        assert!(
            (p - DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.5, 0.]))).norm()
                < 1e-15
        );
        let z = pinv(&DMatrix::zeros(2, 3), 1e-12).unwrap();
        assert_eq!(z, DMatrix::zeros(3, 2));
        let c = 0.6f64;
        let q = dense_from_row_major(2, 2, &[c, -0.8, 0.8, c]).unwrap();
        assert!((pinv(&q, 1e-12).unwrap() - q.transpose()).norm() < 1e-14);
    }

    #[test]
    fn norms() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3., 1.]));
        assert!(close(spectral_norm(&m).unwrap(), 3.0, 1e-15));
        assert!(close(frobenius_norm(&m), 10f64.sqrt(), 1e-15));
        assert_eq!(chebyshev_norm(&m), 3.0);
        let ones = DMatrix::from_element(2, 2, 1.0);
        assert!(close(spectral_norm(&ones).unwrap(), 2.0, 1e-14));
        assert_eq!(chebyshev_norm(&ones), 1.0);
        assert!(close(spectral_norm_estimate(&ones), 2.0, 1e-8));
    }

    #[test]
    fn cond_cases() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1., 1e-16]));
        assert!(close(cond(&m).unwrap() / 1e16, 1.0, 1e-12));
        assert!(close(cond(&DMatrix::identity(5, 5)).unwrap(), 1.0, 1e-14));
        assert_eq!(cond(&DMatrix::zeros(2, 2)), Err(Error::ZeroMatrix));
    }

    #[test]
    fn numrank_cases() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1., 0.5, 1e-10]));
        assert_eq!(numrank(&m, 1e-5).unwrap(), 2);
        assert_eq!(numrank(&m, 1e-10).unwrap(), 3);
    }

    #[test]
    fn least_squares_identity() {
        let t = dense_from_row_major(2, 2, &[1., 2., 3., 4.]).unwrap();
        let y = least_squares(&DMatrix::identity(2, 2), &t).unwrap();
        assert!((y - t).norm() < 1e-14);
    }
}
