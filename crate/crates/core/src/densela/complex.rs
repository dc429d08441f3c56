use nalgebra::DMatrix;
use num_complex::Complex64;

use super::mat::DenseMat;
use super::svd::singular_values;
use crate::error::Result;

/// Dense complex matrix; only SRFT sketches use it.
pub type ComplexMat = DMatrix<Complex64>;

/// `[[Re, −Im], [Im, Re]]`, whose spectrum is that of `M` with every value doubled.
pub fn real_embedding(m: &ComplexMat) -> DenseMat {
    let (r, c) = m.shape();
    DMatrix::from_fn(2 * r, 2 * c, |i, j| {
        let z = m[(i % r, j % c)];
        match (i < r, j < c) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Singular values of a complex matrix, read off its real embedding.
pub fn complex_singular_values(m: &ComplexMat) -> Result<Vec<f64>> {
    let s = singular_values(&real_embedding(m))?;
    Ok(s.into_iter().step_by(2).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_modulus_diagonal() {
        let mut m = ComplexMat::zeros(2, 2);
        m[(0, 0)] = Complex64::new(0.0, 1.0);
        m[(1, 1)] = Complex64::new(1.0, 0.0);
        let s = complex_singular_values(&m).unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.iter().all(|x| (x - 1.0).abs() < 1e-15));
    }

    #[test]
    fn modulus() {
        let m = ComplexMat::from_element(1, 1, Complex64::new(3.0, 4.0));
        let s = complex_singular_values(&m).unwrap();
        assert_eq!(s.len(), 1);
        assert!((s[0] - 5.0).abs() < 1e-14);
    }
}
