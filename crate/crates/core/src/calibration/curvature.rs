use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Upper-triangular `U` with positive diagonal and `A = UᵀU`.
pub fn upper_cholesky(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let ch = a
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite("Cholesky factorisation failed".into()))?;
    Ok(ch.l().transpose())
}

fn check_negative_definite(h: &DMatrix<f64>) -> Result<()> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch {
            expected: h.nrows(),
            got: h.ncols(),
        });
    }
    let sym = (h + h.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let max = eig.eigenvalues.max();
    if !(max < 0.0) {
        return Err(Error::NotNegativeDefinite { eigenvalue: max });
    }
    Ok(())
}

/// The matrix `W = M⁻¹N` with `−H_ll = NᵀN` and `−H_pl = MᵀM` (upper
/// Cholesky factors), so that `Wᵀ H_pl W = H_ll`.
pub fn curvature_matrix(hess_ll: &DMatrix<f64>, hess_pl: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if hess_ll.shape() != hess_pl.shape() {
        return Err(Error::DimensionMismatch {
            expected: hess_ll.nrows(),
            got: hess_pl.nrows(),
        });
    }
    check_negative_definite(hess_ll)?;
    check_negative_definite(hess_pl)?;
    let n = upper_cholesky(&-hess_ll)?;
    let m = upper_cholesky(&-hess_pl)?;
    m.solve_upper_triangular(&n)
        .ok_or_else(|| Error::NotPositiveDefinite("pseudolikelihood curvature factor is singular".into()))
}
