//! Dense helpers on coordinates with respect to an orthonormal frame.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::Result;
use crate::subspace::Subspace;
use crate::vectors::ComplexVec;

/// Column `c` holds the coordinates of `vectors[c]` in `frame`.
pub(crate) fn coordinates(frame: &Subspace, vectors: &[ComplexVec]) -> Result<DMatrix<Complex64>> {
    let cols = crate::par::map(vectors, |v| frame.coordinates(v));
    let cols = cols.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(DMatrix::from_fn(frame.dim(), vectors.len(), |r, c| cols[c][r]))
}

/// Orthonormal basis (as columns) of `{c : m c = 0}` using singular values below `tol`.
pub(crate) fn null_space(m: &DMatrix<Complex64>, tol: f64) -> Vec<DVector<Complex64>> {
    let cols = m.ncols();
    if cols == 0 {
        return Vec::new();
    }
    let rows = m.nrows().max(cols);
    let mut padded = DMatrix::<Complex64>::zeros(rows, cols);
    padded.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    (0..cols)
        .filter(|&i| svd.singular_values[i] < tol)
        .map(|i| v_t.row(i).adjoint())
        .collect()
}

pub(crate) fn max_singular(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

pub(crate) fn hermitian_min_eig(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let h = (m + m.adjoint()).scale(0.5);
    h.symmetric_eigenvalues().min()
}

pub(crate) fn hermitian_max_eig(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let h = (m + m.adjoint()).scale(0.5);
    h.symmetric_eigenvalues().max()
}

/// `Σ_i c_i v_i`.
pub(crate) fn combine(vectors: &[ComplexVec], coeffs: &DVector<Complex64>) -> Result<ComplexVec> {
    let mut acc = vectors[0].zero_like();
    for (v, c) in vectors.iter().zip(coeffs.iter()) {
        acc = acc.axpy(*c, v)?;
    }
    Ok(acc)
}
