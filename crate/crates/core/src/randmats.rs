//! Seeded generators for the random multipliers: Gaussian, random orthogonal,
//! SRFT, circulant and subcirculant, and the signed-sparse U/V/W triples.
//!
//! Every generator draws from a caller-supplied RNG. [`RngStream`] turns a
//! `(seed, stream_id)` pair into a ChaCha8 stream, so trial `i` of an
//! experiment can use stream `i` and still reproduce bit for bit. Normal
//! deviates come from the ziggurat sampler in `rand_distr`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::densela::{qr_thin, spectral_norm, ComplexMat, DenseMat};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(self.stream_id);
        r
    }

    /// Independent sub-stream keyed by `tag`, same stream id.
    pub fn child(&self, tag: u64) -> Self {
        Self {
            seed: splitmix(self.seed ^ splitmix(tag.wrapping_add(1))),
            stream_id: self.stream_id,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindTag {
    Gaussian,
    Srft,
    Circulant,
    Subcirculant,
    #[serde(rename = "signed")]
    SignedSparse,
}

impl KindTag {
    pub fn name(self) -> &'static str {
        match self {
            KindTag::Gaussian => "gaussian",
            KindTag::Srft => "srft",
            KindTag::Circulant => "circulant",
            KindTag::Subcirculant => "subcirculant",
            KindTag::SignedSparse => "signed",
        }
    }
}

impl fmt::Display for KindTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KindTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" => Ok(KindTag::Gaussian),
            "srft" => Ok(KindTag::Srft),
            "circulant" => Ok(KindTag::Circulant),
            "subcirculant" => Ok(KindTag::Subcirculant),
            "signed" | "signedsparse" | "signed-sparse" => Ok(KindTag::SignedSparse),
            other => Err(Error::InvalidArgument(format!(
                "unknown multiplier kind {other:?}"
            ))),
        }
    }
}

/// Multiplier family plus the shape it was drawn at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreprocessorKind {
    pub tag: KindTag,
    pub rows: usize,
    pub cols: usize,
    pub oversample: usize,
}

impl PreprocessorKind {
    pub fn new(tag: KindTag, rows: usize, cols: usize, oversample: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(
                "multiplier dimensions must be positive".into(),
            ));
        }
        match tag {
            KindTag::Srft if cols > rows => {
                return Err(Error::InvalidArgument(format!(
                    "SRFT needs cols <= rows, got {rows}x{cols}"
                )))
            }
            KindTag::SignedSparse if 2 * cols > rows => {
                return Err(Error::PatternOverflow { n: rows, r: cols })
            }
            _ => {}
        }
        Ok(Self {
            tag,
            rows,
            cols,
            oversample,
        })
    }
}

/// m×n matrix of i.i.d. standard normals, filled in row-major order.
pub fn gaussian<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> DenseMat {
    let data: Vec<f64> = (0..m * n).map(|_| rng.sample(StandardNormal)).collect();
    DMatrix::from_row_slice(m, n, &data)
}

/// n×k matrix with orthonormal columns: the Q factor of a Gaussian matrix.
pub fn random_orthonormal<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> DenseMat {
    loop {
        if let Ok((q, _)) = qr_thin(&gaussian(n, k, rng)) {
            return q;
        }
    }
}

pub fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DenseMat {
    random_orthonormal(n, n, rng)
}

/// `√(n/ρ₊)·D·Ω·R` kept in factored form.
#[derive(Debug, Clone)]
pub struct Srft {
    pub n: usize,
    /// Unit-modulus diagonal of `D`.
    pub diag: Vec<Complex64>,
    /// DFT columns kept by `R`, ascending.
    pub cols: Vec<usize>,
}

impl Srft {
    pub fn draw<R: Rng + ?Sized>(n: usize, rho_plus: usize, rng: &mut R) -> Result<Self> {
        if rho_plus == 0 || rho_plus > n {
            return Err(Error::InvalidArgument(format!(
                "SRFT needs 1 <= rho_plus <= n, got {rho_plus}, {n}"
            )));
        }
        let diag = (0..n)
            .map(|_| Complex64::from_polar(1.0, 2.0 * PI * rng.random::<f64>()))
            .collect();
        let mut cols = sample(rng, n, rho_plus).into_vec();
        cols.sort_unstable();
        Ok(Self { n, diag, cols })
    }

    pub fn rho_plus(&self) -> usize {
        self.cols.len()
    }

    fn scale(&self) -> f64 {
        (self.n as f64 / self.rho_plus() as f64).sqrt()
    }

    /// Unitary DFT entry `ω^{ij}/√n`, `ω = exp(2πi/n)`.
    pub fn dft_entry(n: usize, i: usize, j: usize) -> Complex64 {
        let phase = 2.0 * PI * ((i * j) % n) as f64 / n as f64;
        Complex64::from_polar(1.0 / (n as f64).sqrt(), phase)
    }

    pub fn to_dense(&self) -> ComplexMat {
        let s = self.scale();
        DMatrix::from_fn(self.n, self.rho_plus(), |i, k| {
            self.diag[i] * Self::dft_entry(self.n, i, self.cols[k]) * s
        })
    }

    /// `M·H` for a real k×n matrix `M`, one inverse FFT per row.
    pub fn left_apply(&self, m: &DenseMat) -> Result<ComplexMat> {
        if m.ncols() != self.n {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} times SRFT of order {}",
                m.nrows(),
                m.ncols(),
                self.n
            )));
        }
        let fft = FftPlanner::new().plan_fft_inverse(self.n);
        let s = self.scale() / (self.n as f64).sqrt();
        let mut out = ComplexMat::zeros(m.nrows(), self.rho_plus());
        let mut buf = vec![Complex64::new(0.0, 0.0); self.n];
        for a in 0..m.nrows() {
            for (i, b) in buf.iter_mut().enumerate() {
                *b = self.diag[i] * m[(a, i)];
            }
            fft.process(&mut buf);
            for (k, &c) in self.cols.iter().enumerate() {
                out[(a, k)] = buf[c] * s;
            }
        }
        Ok(out)
    }
}

pub fn srft<R: Rng + ?Sized>(n: usize, rho_plus: usize, rng: &mut R) -> Result<ComplexMat> {
    Ok(Srft::draw(n, rho_plus, rng)?.to_dense())
}

/// Assembles `√(n/ρ₊)·Ω·Z·R` where `Z = Ω⁻¹·D·Ω` is the complex circulant with
/// spectrum `diag`.
pub fn srft_via_circulant(parts: &Srft) -> ComplexMat {
    let n = parts.n;
    let z: Vec<Complex64> = (0..n)
        .map(|l| {
            parts
                .diag
                .iter()
                .enumerate()
                .fold(Complex64::new(0.0, 0.0), |acc, (k, d)| {
                    acc + d * Complex64::from_polar(
                        1.0,
                        -2.0 * PI * ((k * l) % n) as f64 / n as f64,
                    )
                })
                / n as f64
        })
        .collect();
    let zr = DMatrix::from_fn(n, parts.rho_plus(), |i, k| z[(i + n - parts.cols[k]) % n]);
    let omega = DMatrix::from_fn(n, n, |i, j| Srft::dft_entry(n, i, j));
    omega * zr * Complex64::new(parts.scale(), 0.0)
}

/// SRFT drawn through its circulant factorization; consumes the RNG exactly
/// like [`srft`].
pub fn srft_from_circulant<R: Rng + ?Sized>(
    n: usize,
    rho_plus: usize,
    rng: &mut R,
) -> Result<ComplexMat> {
    Ok(srft_via_circulant(&Srft::draw(n, rho_plus, rng)?))
}

/// Real circulant `Z = (z_{(i−j) mod n})`.
#[derive(Debug, Clone)]
pub struct Circulant {
    pub col: Vec<f64>,
}

impl Circulant {
    pub fn gaussian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self {
            col: (0..n).map(|_| rng.sample(StandardNormal)).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.col.len()
    }

    pub fn to_dense(&self) -> DenseMat {
        self.block(self.n(), self.n())
    }

    /// Leading rows×cols block.
    pub fn block(&self, rows: usize, cols: usize) -> DenseMat {
        let n = self.n();
        DMatrix::from_fn(rows, cols, |i, j| self.col[(i + n - j) % n])
    }

    /// `Z·x` as a circular convolution through the FFT.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let mut a: Vec<Complex64> = self.col.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let mut b: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fwd.process(&mut a);
        fwd.process(&mut b);
        for (p, q) in a.iter_mut().zip(&b) {
            *p *= q;
        }
        inv.process(&mut a);
        a.iter().map(|c| c.re / n as f64).collect()
    }
}

pub fn random_circulant<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DenseMat {
    Circulant::gaussian(n, rng).to_dense()
}

/// Leftmost n×k block of a Gaussian circulant.
pub fn subcirculant<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> DenseMat {
    Circulant::gaussian(n, rng).block(n, k)
}

fn sign<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    if rng.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

/// Alternating `±I_r / O_{r,r}` pattern (transposed to n×r) with one sign per block;
/// columns past the last whole block stay zero.
fn block_pattern<R: Rng + ?Sized>(
    n: usize,
    r: usize,
    mut sign_of: impl FnMut(&mut R) -> f64,
    rng: &mut R,
) -> DenseMat {
    let mut p = DMatrix::zeros(n, r);
    let mut start = 0;
    let mut k = 0;
    while start + r <= n {
        if k % 2 == 0 {
            let s = sign_of(rng);
            for i in 0..r {
                p[(start + i, i)] = s;
            }
        }
        start += r;
        k += 1;
    }
    p
}

/// Signed-sparse `(U, V, W)`, each scaled to unit spectral norm.
pub fn signed_sparse_uvw<R: Rng + ?Sized>(
    n: usize,
    r: usize,
    rng: &mut R,
) -> Result<(DenseMat, DenseMat, DenseMat)> {
    if r == 0 || 2 * r > n {
        return Err(Error::PatternOverflow { n, r });
    }
    let ubar = block_pattern(n, r, |g: &mut R| sign(g), rng);
    let u = &ubar / spectral_norm(&ubar)?;
    let vbar = block_pattern(n, r, |_: &mut R| 2.0, rng) - &u;
    let v = &vbar / spectral_norm(&vbar)?;
    let wcol: Vec<f64> = (0..r).map(|_| sign(rng)).collect();
    let wbar = Circulant { col: wcol }.to_dense();
    let w = &wbar / spectral_norm(&wbar)?;
    Ok((u, v, w))
}

/// Signed-sparse U factor only.
pub fn signed_sparse<R: Rng + ?Sized>(n: usize, r: usize, rng: &mut R) -> Result<DenseMat> {
    if r == 0 || 2 * r > n {
        return Err(Error::PatternOverflow { n, r });
    }
    let ubar = block_pattern(n, r, |g: &mut R| sign(g), rng);
    Ok(&ubar / spectral_norm(&ubar)?)
}

/// Real multiplier of the given family and shape (unnormalized except for
/// the signed-sparse pattern). SRFT is complex and is refused here.
pub fn real_multiplier<R: Rng + ?Sized>(
    tag: KindTag,
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> Result<DenseMat> {
    match tag {
        KindTag::Gaussian => Ok(gaussian(rows, cols, rng)),
        KindTag::Circulant | KindTag::Subcirculant => {
            let c = Circulant::gaussian(rows.max(cols), rng);
            Ok(c.block(rows, cols))
        }
        KindTag::SignedSparse => signed_sparse(rows, cols, rng),
        KindTag::Srft => Err(Error::Unsupported("SRFT multipliers are complex".into())),
    }
}

/// [`real_multiplier`] scaled to unit spectral norm.
pub fn normalized_multiplier<R: Rng + ?Sized>(
    tag: KindTag,
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> Result<DenseMat> {
    let m = real_multiplier(tag, rows, cols, rng)?;
    if m.is_empty() {
        return Ok(m);
    }
    let s = spectral_norm(&m)?;
    if s == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    Ok(m / s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densela::{complex_singular_values, singular_values};

    #[test]
    fn streams_reproduce() {
        let s = RngStream::new(42, 3);
        let a = gaussian(1, 1, &mut s.rng());
        let b = gaussian(1, 1, &mut s.rng());
        assert_eq!(a, b);
        let c = gaussian(1, 1, &mut RngStream::new(42, 4).rng());
        assert_ne!(a, c);
        assert_ne!(s.child(0), s.child(1));
    }

    #[test]
    fn gaussian_moments() {
        let g = gaussian(200, 200, &mut RngStream::new(1, 0).rng());
        let n = g.len() as f64;
        let mean = g.sum() / n;
        let var = g.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() <= 0.05, "mean {mean}");
        assert!((0.9..=1.1).contains(&var), "var {var}");
    }

    #[test]
    fn orthogonal() {
        let mut rng = RngStream::new(5, 0).rng();
        let q1 = random_orthogonal(1, &mut rng);
        assert!((q1[(0, 0)].abs() - 1.0).abs() < 1e-15);
        let q = random_orthogonal(8, &mut rng);
        assert!((q.transpose() * &q - DMatrix::identity(8, 8)).norm() < 1e-12);
        let s = singular_values(&random_orthogonal(64, &mut rng)).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-12 && (s[63] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn srft_norms() {
        let mut rng = RngStream::new(9, 0).rng();
        let h = srft(16, 16, &mut rng).unwrap();
        let s = complex_singular_values(&h).unwrap();
        assert!(s.iter().all(|x| (x - 1.0).abs() < 1e-12));
        let h = srft(64, 16, &mut rng).unwrap();
        let s = complex_singular_values(&h).unwrap();
        assert!((s[0] - 2.0).abs() < 1e-12);
        assert!(srft(4, 5, &mut rng).is_err());
    }

    #[test]
    fn srft_columns_are_distinct_dft_columns() {
        let p = Srft::draw(32, 8, &mut RngStream::new(2, 0).rng()).unwrap();
        let h = p.to_dense();
        let mut c = p.cols.clone();
        c.dedup();
        assert_eq!(c.len(), 8);
        for (k, &col) in p.cols.iter().enumerate() {
            for i in 0..32 {
                let want = p.diag[i] * Srft::dft_entry(32, i, col) * 2.0;
                assert!((h[(i, k)] - want).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn srft_fft_apply_matches_dense() {
        let mut rng = RngStream::new(3, 0).rng();
        let p = Srft::draw(32, 8, &mut rng).unwrap();
        let m = gaussian(5, 32, &mut rng);
        let dense = m.map(|x| Complex64::new(x, 0.0)) * p.to_dense();
        let fast = p.left_apply(&m).unwrap();
        assert!((dense - fast).norm() < 1e-12);
    }

    #[test]
    fn circulant_route_matches_explicit_assembly() {
        let p = Srft::draw(16, 4, &mut RngStream::new(6, 0).rng()).unwrap();
        assert!((srft_via_circulant(&p) - p.to_dense()).norm() < 1e-12);
        let a = srft(16, 4, &mut RngStream::new(6, 1).rng()).unwrap();
        let b = srft_from_circulant(16, 4, &mut RngStream::new(6, 1).rng()).unwrap();
        assert!((a - b).norm() < 1e-12);
        let id = Srft {
            n: 8,
            diag: vec![Complex64::new(1.0, 0.0); 8],
            cols: (0..8).collect(),
        };
        let omega = DMatrix::from_fn(8, 8, |i, j| Srft::dft_entry(8, i, j));
        assert!((srft_via_circulant(&id) - omega).norm() < 1e-13);
    }

    #[test]
    fn circulant_structure() {
        let c = Circulant {
            col: vec![1.0, 2.0, 3.0],
        };
        let z = c.to_dense();
        let want = DMatrix::from_row_slice(3, 3, &[1., 3., 2., 2., 1., 3., 3., 2., 1.]);
        assert_eq!(z, want);
    }

    #[test]
    fn circulant_fft_matches_dense() {
        let mut rng = RngStream::new(4, 0).rng();
        let c = Circulant::gaussian(256, &mut rng);
        let x = gaussian(256, 1, &mut rng);
        let fast = c.matvec(x.as_slice());
        let dense = c.to_dense() * &x;
        let err = fast
            .iter()
            .zip(dense.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-11, "{err}");
    }

    #[test]
    fn signed_pattern() {
        let mut rng = RngStream::new(0, 0).rng();
        let (u, v, w) = signed_sparse_uvw(4, 1, &mut rng).unwrap();
        assert_eq!(u[(1, 0)], 0.0);
        assert_eq!(u[(3, 0)], 0.0);
        assert!((u[(0, 0)].abs() - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        for m in [&u, &v, &w] {
            assert!((spectral_norm(m).unwrap() - 1.0).abs() < 1e-12);
        }
        let u = signed_sparse(8, 2, &mut rng).unwrap();
        assert_eq!(u.iter().filter(|x| **x != 0.0).count(), 4);
        assert_eq!(
            signed_sparse_uvw(3, 2, &mut rng).unwrap_err(),
            Error::PatternOverflow { n: 3, r: 2 }
        );
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("signed".parse::<KindTag>().unwrap(), KindTag::SignedSparse);
        assert!("foo".parse::<KindTag>().is_err());
        assert!(PreprocessorKind::new(KindTag::Srft, 4, 8, 0).is_err());
    }
}
