//! Residual and diagnostic quantities for sketches and subspace bases.

use crate::densela::{
    least_squares, singular_values, spectral_norm, svd_thin, DenseMat, SvdTriple,
};
use crate::error::{Error, Result};

/// `‖B·B⁺T − T‖`: distance of `T` from the least-squares fit in `range(B)`.
pub fn subspace_residual(b: &DenseMat, truth_t: &DenseMat) -> Result<f64> {
    let y = least_squares(b, truth_t)?;
    spectral_norm(&(b * y - truth_t))
}

/// Both sides of `‖AQQᵀ − A‖/‖A‖ ≤ (2 + ‖Δ‖)‖Δ‖ + σ_{ρ+1}/σ₁`, where
/// `Δ = Q − T_ρV` and `V` is the Procrustes alignment.
#[derive(Debug, Clone, Copy)]
pub struct ErrorLink {
    pub lhs: f64,
    pub rhs: f64,
    pub delta: f64,
}

pub fn leading_error_link(
    a: &DenseMat,
    q: &DenseMat,
    truth: &SvdTriple,
    rho: usize,
) -> Result<ErrorLink> {
    if rho == 0 || rho > truth.sigma.len() || q.nrows() != truth.t.nrows() {
        return Err(Error::InvalidArgument(format!("alignment rank {rho}")));
    }
    let t_rho = truth.t_lead(rho);
    // V = polar factor of T_ρᵀQ (ρ×ρ₊)
    let d = svd_thin(&(t_rho.transpose() * q))?;
    let k = d.sigma.len();
    let v = d.s.columns(0, k) * d.t.columns(0, k).transpose();
    let delta = spectral_norm(&(q - &t_rho * v))?;
    let norm = truth.sigma[0];
    let aq = a * q;
    let lhs = spectral_norm(&(aq * q.transpose() - a))? / norm;
    let tail = truth.sigma.get(rho).copied().unwrap_or(0.0);
    Ok(ErrorLink {
        lhs,
        rhs: (2.0 + delta) * delta + tail / norm,
        delta,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct PhiDiagnostics {
    /// `√(n−ρ)·σ_{ρ+1}·‖H‖_F·‖(A_ρᵀH)⁺‖`.
    pub phi: f64,
    /// `√(n−ρ)·‖H‖_F·‖(S_ρᵀH)⁺‖·σ_{ρ+1}/σ_ρ`.
    pub phi_plus: f64,
    /// `‖(A_ρᵀH)⁺‖`.
    pub pinv_norm: f64,
    /// `‖(S_ρᵀH)⁺‖/σ_ρ`, an upper bound for `pinv_norm`.
    pub pinv_bound: f64,
}

impl PhiDiagnostics {
    pub fn bound_holds(&self) -> bool {
        self.pinv_norm <= self.pinv_bound * (1.0 + 1e-10)
    }
}

pub fn phi_diagnostics(h: &DenseMat, truth: &SvdTriple, rho: usize) -> Result<PhiDiagnostics> {
    let n = truth.t.nrows();
    if rho == 0 || rho > truth.sigma.len() || h.nrows() != truth.s.nrows() {
        return Err(Error::InvalidArgument(format!("diagnostic rank {rho}")));
    }
    let s_rho = truth.s_lead(rho);
    let t_rho = truth.t_lead(rho);
    let mut st = t_rho.clone();
    for j in 0..rho {
        st.column_mut(j).scale_mut(truth.sigma[j]);
    }
    // A_ρᵀH = T_ρ·Σ_ρ·S_ρᵀ·H
    let b = s_rho.transpose() * h;
    let small = |m: &DenseMat| -> Result<f64> {
        Ok(singular_values(m)?.get(rho - 1).copied().unwrap_or(0.0))
    };
    let sig_a = small(&(st * &b))?;
    let sig_b = small(&b)?;
    let pinv_norm = if sig_a > 0.0 {
        1.0 / sig_a
    } else {
        f64::INFINITY
    };
    let nu_plus = if sig_b > 0.0 {
        1.0 / sig_b
    } else {
        f64::INFINITY
    };
    let tail = truth.sigma.get(rho).copied().unwrap_or(0.0);
    let root = ((n - rho) as f64).sqrt();
    let nu_f = h.norm();
    let phi = if tail == 0.0 {
        0.0
    } else {
        root * tail * nu_f * pinv_norm
    };
    let phi_plus = if tail == 0.0 {
        0.0
    } else {
        root * nu_f * nu_plus * tail / truth.sigma[rho - 1]
    };
    Ok(PhiDiagnostics {
        phi,
        phi_plus,
        pinv_norm,
        pinv_bound: nu_plus / truth.sigma[rho - 1],
    })
}
