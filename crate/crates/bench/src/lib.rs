//! Seeded inputs shared by the criterion benches.

use nalgebra::DVector;
use randpre::matgen::{svd_spec_matrix, SpectrumSpec};
use randpre::randmats::{gaussian, RngStream};
use randpre::DenseMat;

/// n×n input with `σ_j = 1/j` up to `rho` and a 1e-10 tail.
pub fn svd_input(n: usize, rho: usize, seed: u64) -> DenseMat {
    let spec = SpectrumSpec::reciprocal(n, rho, 1e-10);
    svd_spec_matrix(&spec, false, &mut RngStream::new(seed, 0).rng())
        .expect("valid spectrum")
        .0
}

pub fn gaussian_matrix(m: usize, n: usize, seed: u64) -> DenseMat {
    gaussian(m, n, &mut RngStream::new(seed, 1).rng())
}

pub fn gaussian_vector(n: usize, seed: u64) -> DVector<f64> {
    DVector::from_column_slice(gaussian_matrix(n, 1, seed).as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inputs_are_seeded() {
        assert_eq!(svd_input(16, 12, 3), svd_input(16, 12, 3));
        assert_ne!(gaussian_matrix(4, 4, 1), gaussian_matrix(4, 4, 2));
    }
}
