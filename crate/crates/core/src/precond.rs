//! Preprocessing maps: normalization, western/northern/northwestern
//! augmentation, additive preprocessing `A ± UVᵀ`, the factorization that
//! ties the identity-corner augmentation to the additive map, and
//! factor-Gaussian test inputs.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::densela::{block2x2, hstack, spectral_norm, vstack, DenseMat};
use crate::error::{Error, Result};
use crate::randmats::{gaussian, normalized_multiplier, KindTag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    West,
    North,
    Northwest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WMode {
    Gaussian,
    Identity,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentSpec {
    pub direction: Direction,
    pub q: usize,
    pub s: usize,
    pub w_mode: WMode,
}

impl AugmentSpec {
    pub fn validate(&self) -> Result<()> {
        match self.direction {
            Direction::West if self.s != 0 => Err(Error::InvalidArgument(
                "west augmentation uses q only".into(),
            )),
            Direction::North if self.q != 0 => Err(Error::InvalidArgument(
                "north augmentation uses s only".into(),
            )),
            _ if self.w_mode == WMode::Identity && self.q != self.s => {
                Err(Error::InvalidArgument("identity corner needs q = s".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coupling {
    Independent,
    /// `V = U`.
    Shared,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdditiveSpec {
    pub r: usize,
    pub sign: Sign,
    pub coupling: Coupling,
}

impl Default for AdditiveSpec {
    fn default() -> Self {
        Self {
            r: 1,
            sign: Sign::Plus,
            coupling: Coupling::Independent,
        }
    }
}

/// `(A/‖A‖, ‖A‖)`.
pub fn normalize(a: &DenseMat) -> Result<(DenseMat, f64)> {
    let s = spectral_norm(a)?;
    if s == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    Ok((a / s, s))
}

fn check_rows(a: &DenseMat, u: &DenseMat, what: &str) -> Result<()> {
    if a.nrows() != u.nrows() {
        return Err(Error::ShapeMismatch(format!(
            "{what}: {} rows against {} rows",
            u.nrows(),
            a.nrows()
        )));
    }
    Ok(())
}

/// `K = (U | A)`.
pub fn augment_west(a: &DenseMat, u: &DenseMat) -> Result<DenseMat> {
    check_rows(a, u, "west block")?;
    hstack(&[u, a])
}

/// `K̂ = [Vᵀ; A]`.
pub fn augment_north(a: &DenseMat, v: &DenseMat) -> Result<DenseMat> {
    if a.ncols() != v.nrows() {
        return Err(Error::ShapeMismatch(format!(
            "north block has {} rows, A has {} columns",
            v.nrows(),
            a.ncols()
        )));
    }
    vstack(&[&v.transpose(), a])
}

/// `K = [[W, Vᵀ], [U, A]]`.
pub fn augment_northwest(
    a: &DenseMat,
    u: &DenseMat,
    v: &DenseMat,
    w: &DenseMat,
) -> Result<DenseMat> {
    check_rows(a, u, "west block")?;
    if a.ncols() != v.nrows() || w.shape() != (v.ncols(), u.ncols()) {
        return Err(Error::ShapeMismatch(
            "northwest blocks do not conform".into(),
        ));
    }
    block2x2(w, &v.transpose(), u, a)
}

/// Corner block for `w_mode`; `Gaussian` is normalized like other multipliers.
pub fn corner<R: Rng + ?Sized>(mode: WMode, s: usize, q: usize, rng: &mut R) -> Result<DenseMat> {
    Ok(match mode {
        WMode::Zero => DMatrix::zeros(s, q),
        WMode::Identity => DMatrix::identity(s, q),
        WMode::Gaussian if s == 0 || q == 0 => DMatrix::zeros(s, q),
        WMode::Gaussian => normalized_multiplier(KindTag::Gaussian, s, q, rng)?,
    })
}

/// `A + UVᵀ` or `A − UVᵀ`.
pub fn additive(a: &DenseMat, u: &DenseMat, v: &DenseMat, sign: Sign) -> Result<DenseMat> {
    check_rows(a, u, "additive U")?;
    if a.ncols() != v.nrows() || u.ncols() != v.ncols() {
        return Err(Error::ShapeMismatch("additive V does not conform".into()));
    }
    let uv = u * v.transpose();
    Ok(match sign {
        Sign::Plus => a + uv,
        Sign::Minus => a - uv,
    })
}

/// Draws `(U, V)` for an additive map; `V = U` under shared coupling.
pub fn additive_pair<R: Rng + ?Sized>(
    tag: KindTag,
    m: usize,
    n: usize,
    spec: &AdditiveSpec,
    rng: &mut R,
) -> Result<(DenseMat, DenseMat)> {
    if spec.r == 0 {
        return Ok((DMatrix::zeros(m, 0), DMatrix::zeros(n, 0)));
    }
    let u = normalized_multiplier(tag, m, spec.r, rng)?;
    let v = match spec.coupling {
        Coupling::Shared if m == n => u.clone(),
        Coupling::Shared => {
            return Err(Error::InvalidArgument(
                "shared coupling needs a square input".into(),
            ))
        }
        Coupling::Independent => normalized_multiplier(tag, n, spec.r, rng)?,
    };
    Ok((u, v))
}

/// Factors linking `K = [[I_r, Vᵀ], [U, A]]` to `C = A − UVᵀ`.
#[derive(Debug, Clone)]
pub struct KFactorization {
    pub u_hat: DenseMat,
    pub v_hat: DenseMat,
    pub u_hat_inv: DenseMat,
    pub v_hat_inv: DenseMat,
    pub k: DenseMat,
    pub c: DenseMat,
    /// Max entry error of `K = Û·diag(C, I_r)·V̂`.
    pub forward_residual: f64,
    /// Max entry error of `diag(C, I_r) = Û⁻¹·K·V̂⁻¹`.
    pub inverse_residual: f64,
    /// Max entry error of `C = D·Û⁻¹·K·V̂⁻¹·Dᵀ` with `D = (I_n | O)`.
    pub extraction_residual: f64,
}

pub fn k_factorization(a: &DenseMat, u: &DenseMat, v: &DenseMat) -> Result<KFactorization> {
    let n = a.nrows();
    if !a.is_square() || u.nrows() != n || v.nrows() != n || u.ncols() != v.ncols() {
        return Err(Error::ShapeMismatch(
            "k_factorization needs square A and n×r U, V".into(),
        ));
    }
    let r = u.ncols();
    let z = |p: usize, q: usize| DMatrix::<f64>::zeros(p, q);
    let id = |p: usize| DMatrix::<f64>::identity(p, p);
    let c = additive(a, u, v, Sign::Minus)?;
    let k = block2x2(&id(r), &v.transpose(), u, a)?;
    let u_hat = block2x2(&z(r, n), &id(r), &id(n), u)?;
    let v_hat = block2x2(&z(n, r), &id(n), &id(r), &v.transpose())?;
    let u_hat_inv = block2x2(&(-u), &id(n), &id(r), &z(r, n))?;
    let v_hat_inv = block2x2(&(-v.transpose()), &id(r), &id(n), &z(n, r))?;
    let mid = block2x2(&c, &z(n, r), &z(r, n), &id(r))?;
    let max_abs = |m: DenseMat| m.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let forward_residual = max_abs(&u_hat * &mid * &v_hat - &k);
    let back = &u_hat_inv * &k * &v_hat_inv;
    let inverse_residual = max_abs(&back - &mid);
    let extraction_residual = max_abs(back.view((0, 0), (n, n)).into_owned() - &c);
    Ok(KFactorization {
        u_hat,
        v_hat,
        u_hat_inv,
        v_hat_inv,
        k,
        c,
        forward_residual,
        inverse_residual,
        extraction_residual,
    })
}

/// `Ã = ŪV̄ᵀ + E` with Gaussian factors and `‖E‖ = noise_norm`.
pub fn factor_gaussian<R: Rng + ?Sized>(
    m: usize,
    n: usize,
    rho: usize,
    noise_norm: f64,
    rng: &mut R,
) -> Result<(DenseMat, DenseMat, DenseMat)> {
    if rho > m.min(n) || noise_norm < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "factor rank {rho} for {m}x{n}, noise {noise_norm}"
        )));
    }
    let ub = gaussian(m, rho, rng);
    let vb = gaussian(n, rho, rng);
    let mut a = &ub * vb.transpose();
    if noise_norm > 0.0 {
        let e = gaussian(m, n, rng);
        a += &e * (noise_norm / spectral_norm(&e)?);
    }
    Ok((a, ub, vb))
}

/// Blocks that diagonalize `C = A + UVᵀ` for an exact-rank `A = S·Σ·Tᵀ`:
/// returns `(R_U, R_V, D)` with `C = S·R_U·D·R_Vᵀ·Tᵀ`, where `R_U = [[I, Ū], [O, U_r]]`
/// is built from `SᵀU` and `D = Σ + diag(O_ρ, I_r)`.
pub fn additive_diagonalization(
    s: &DenseMat,
    sigma: &[f64],
    t: &DenseMat,
    rho: usize,
    u: &DenseMat,
    v: &DenseMat,
) -> Result<(DenseMat, DenseMat, DenseMat)> {
    let n = s.nrows();
    let r = u.ncols();
    if rho + r != n {
        return Err(Error::InvalidArgument(format!(
            "need rho + r = n, got {rho} + {r} != {n}"
        )));
    }
    let build = |x: DenseMat| {
        let mut out = DMatrix::<f64>::identity(n, n);
        out.view_mut((0, rho), (n, r)).copy_from(&x);
        out
    };
    let ru = build(s.transpose() * u);
    let rv = build(t.transpose() * v);
    let mut d = DMatrix::zeros(n, n);
    for j in 0..n {
        d[(j, j)] = if j < rho { sigma[j] } else { 1.0 };
    }
    Ok((ru, rv, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densela::{dense_from_row_major, singular_values};
    use crate::randmats::RngStream;

    #[test]
    fn normalize_cases() {
        let (a, s) = normalize(&(DMatrix::identity(3, 3) * 2.0)).unwrap();
        assert!((s - 2.0).abs() < 1e-15);
        assert!((a - DMatrix::identity(3, 3)).norm() < 1e-15);
        assert_eq!(
            normalize(&DMatrix::zeros(2, 2)).unwrap_err(),
            Error::ZeroMatrix
        );
        let g = gaussian(5, 4, &mut RngStream::new(1, 0).rng());
        let (a, _) = normalize(&g).unwrap();
        assert!((spectral_norm(&a).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn west_and_north() {
        let a = gaussian(3, 3, &mut RngStream::new(2, 0).rng());
        assert_eq!(augment_west(&a, &DMatrix::zeros(3, 0)).unwrap(), a);
        assert_eq!(augment_north(&a, &DMatrix::zeros(3, 0)).unwrap(), a);
        let k = augment_west(&DMatrix::zeros(2, 2), &DMatrix::identity(2, 2)).unwrap();
        let s = singular_values(&k).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-15 && (s[1] - 1.0).abs() < 1e-15);
        assert!(augment_west(&a, &DMatrix::zeros(2, 1)).is_err());
    }

    #[test]
    fn identity_corner_spectrum() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 0.5]));
        let k = augment_northwest(
            &a,
            &DMatrix::zeros(2, 2),
            &DMatrix::zeros(2, 2),
            &DMatrix::identity(2, 2),
        )
        .unwrap();
        let s = singular_values(&k).unwrap();
        let want = [3.0, 1.0, 1.0, 0.5];
        assert!(s.iter().zip(want).all(|(x, y)| (x - y).abs() < 1e-14));
    }

    #[test]
    fn additive_cases() {
        let a = gaussian(3, 3, &mut RngStream::new(3, 0).rng());
        let c = additive(&a, &DMatrix::zeros(3, 0), &DMatrix::zeros(3, 0), Sign::Plus).unwrap();
        assert_eq!(c, a);
        let e1 = dense_from_row_major(2, 1, &[1.0, 0.0]).unwrap();
        let c = additive(&DMatrix::zeros(2, 2), &e1, &e1, Sign::Plus).unwrap();
        assert!((spectral_norm(&c).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn k_factorization_exact_on_integers() {
        let a = dense_from_row_major(2, 2, &[1., 2., 3., 4.]).unwrap();
        let u = dense_from_row_major(2, 1, &[1., -1.]).unwrap();
        let v = dense_from_row_major(2, 1, &[2., 5.]).unwrap();
        let f = k_factorization(&a, &u, &v).unwrap();
        assert_eq!(f.forward_residual, 0.0);
        assert_eq!(f.inverse_residual, 0.0);
        assert_eq!(f.extraction_residual, 0.0);
    }

    #[test]
    fn k_factorization_degenerate() {
        let a = gaussian(3, 3, &mut RngStream::new(4, 0).rng());
        let f = k_factorization(&a, &DMatrix::zeros(3, 0), &DMatrix::zeros(3, 0)).unwrap();
        assert_eq!(f.k, a);
        assert_eq!(f.c, a);
        assert_eq!(f.u_hat, DMatrix::identity(3, 3));
    }

    #[test]
    fn factor_gaussian_rank() {
        let mut rng = RngStream::new(5, 0).rng();
        let (a, _, _) = factor_gaussian(10, 8, 3, 0.0, &mut rng).unwrap();
        assert_eq!(crate::densela::numrank(&a, 1e-10).unwrap(), 3);
        let (a, _, _) = factor_gaussian(64, 64, 8, 1e-10, &mut rng).unwrap();
        assert_eq!(crate::densela::numrank(&a, 1e-6).unwrap(), 8);
    }
}
