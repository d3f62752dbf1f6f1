use faer::MatRef;

use crate::error::{Error, Result};

/// Largest eigenvalue modulus of a square matrix, from a dense
/// nonsymmetric eigendecomposition.
pub fn spectral_radius(m: MatRef<'_, f64>) -> Result<f64> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!("matrix is {}x{}, not square", m.nrows(), m.ncols())));
    }
    if m.nrows() == 0 {
        return Ok(0.0);
    }
    if m.col_iter().any(|c| c.iter().any(|x| !x.is_finite())) {
        return Err(Error::Config("matrix has non-finite entries".into()));
    }
    let eigenvalues = m.eigenvalues().map_err(|_| Error::EigenNoConvergence)?;
    Ok(eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max))
}
