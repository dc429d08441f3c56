//! Dense real and complex kernels: QR with a positive diagonal, SVD,
//! pseudoinverse, norms, condition numbers and numerical rank.
//!
//! Matrices are nalgebra dynamic matrices. Everything here is a pure
//! function of its arguments.

mod complex;
mod mat;
mod qr;
mod svd;

pub use complex::{complex_singular_values, real_embedding, ComplexMat};
pub use mat::{
    block2x2, cols_of, dense_from_row_major, diag_rect, hstack, is_finite, rows_of, select_cols,
    select_rows, vstack, DenseMat,
};
pub use qr::{left_inverse, orth_complement, qr_thin, solve_upper};
pub use svd::{
    chebyshev_norm, cond, frobenius_norm, inverse, least_squares, numrank, pinv, singular_values,
    spectral_norm, spectral_norm_estimate, svd, svd_thin, SvdTriple, PINV_DEFAULT_TOL,
};
