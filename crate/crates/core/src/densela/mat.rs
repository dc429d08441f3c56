use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Dense real matrix used for inputs, multipliers and factors.
pub type DenseMat = DMatrix<f64>;

/// Builds a matrix from row-major entries, rejecting NaN and infinities.
pub fn dense_from_row_major(rows: usize, cols: usize, entries: &[f64]) -> Result<DenseMat> {
    if entries.len() != rows * cols {
        return Err(Error::ShapeMismatch(format!(
            "{} entries for a {rows}x{cols} matrix",
            entries.len()
        )));
    }
    if entries.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("non-finite entry".into()));
    }
    Ok(DMatrix::from_row_slice(rows, cols, entries))
}

pub fn is_finite(m: &DenseMat) -> bool {
    m.iter().all(|x| x.is_finite())
}

/// m×n matrix with `d` on its main diagonal.
pub fn diag_rect(m: usize, n: usize, d: &[f64]) -> DenseMat {
    let mut out = DMatrix::zeros(m, n);
    for (i, &v) in d.iter().enumerate().take(m.min(n)) {
        out[(i, i)] = v;
    }
    out
}

pub fn hstack(parts: &[&DenseMat]) -> Result<DenseMat> {
    let rows = parts.first().map_or(0, |p| p.nrows());
    if parts.iter().any(|p| p.nrows() != rows) {
        return Err(Error::ShapeMismatch("hstack row counts differ".into()));
    }
    let cols = parts.iter().map(|p| p.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut c = 0;
    for p in parts {
        out.view_mut((0, c), (rows, p.ncols())).copy_from(*p);
        c += p.ncols();
    }
    Ok(out)
}

pub fn vstack(parts: &[&DenseMat]) -> Result<DenseMat> {
    let cols = parts.first().map_or(0, |p| p.ncols());
    if parts.iter().any(|p| p.ncols() != cols) {
        return Err(Error::ShapeMismatch("vstack column counts differ".into()));
    }
    let rows = parts.iter().map(|p| p.nrows()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut r = 0;
    for p in parts {
        out.view_mut((r, 0), (p.nrows(), cols)).copy_from(*p);
        r += p.nrows();
    }
    Ok(out)
}

/// `[[a, b], [c, d]]`.
pub fn block2x2(a: &DenseMat, b: &DenseMat, c: &DenseMat, d: &DenseMat) -> Result<DenseMat> {
    let top = hstack(&[a, b])?;
    let bottom = hstack(&[c, d])?;
    vstack(&[&top, &bottom])
}

/// Columns `start..start+count`.
pub fn cols_of(m: &DenseMat, start: usize, count: usize) -> DenseMat {
    m.columns(start, count).into_owned()
}

/// Rows `start..start+count`.
pub fn rows_of(m: &DenseMat, start: usize, count: usize) -> DenseMat {
    m.rows(start, count).into_owned()
}

pub fn select_cols(m: &DenseMat, idx: &[usize]) -> DenseMat {
    DMatrix::from_fn(m.nrows(), idx.len(), |i, j| m[(i, idx[j])])
}

pub fn select_rows(m: &DenseMat, idx: &[usize]) -> DenseMat {
    DMatrix::from_fn(idx.len(), m.ncols(), |i, j| m[(idx[i], j)])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_major_roundtrip() {
        let m = dense_from_row_major(2, 3, &[1., 2., 3., 4., 5., 6.]).unwrap();
        assert_eq!(m[(0, 2)], 3.0);
        assert_eq!(m[(1, 0)], 4.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(dense_from_row_major(2, 2, &[1., 2., 3.]).is_err());
        assert!(dense_from_row_major(1, 2, &[1., f64::NAN]).is_err());
    }

    #[test]
    fn stacking() {
        let a = DMatrix::<f64>::identity(2, 2);
        let z = DMatrix::<f64>::zeros(2, 1);
        let h = hstack(&[&a, &z]).unwrap();
        assert_eq!(h.shape(), (2, 3));
        let v = vstack(&[&a, &a]).unwrap();
        assert_eq!(v.shape(), (4, 2));
        assert!(hstack(&[&a, &DMatrix::zeros(3, 1)]).is_err());
        let b = block2x2(&a, &z, &z.transpose(), &DMatrix::identity(1, 1)).unwrap();
        assert_eq!(b, DMatrix::identity(3, 3));
    }
}
