use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef, Par};

use super::DEAD_RESERVOIR_THRESHOLD;
use crate::error::{Error, Result};

/// Singular values at or below this are treated as zero when forming the
/// pseudoinverse of a `rows x cols` matrix with largest singular value `sigma_max`.
pub fn pseudoinverse_cutoff(rows: usize, cols: usize, sigma_max: f64) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON * sigma_max
}

/// Minimum-norm least-squares readout `D T^+` for an N x L trajectory and
/// an N_d x L target matrix.
///
/// Uses the thin SVD `T^T = U S V^T`, so `D T^+ = (D U) S^+ V^T`.
pub fn train_readout(trajectory: MatRef<'_, f64>, desired: MatRef<'_, f64>) -> Result<Mat<f64>> {
    let (n, l) = (trajectory.nrows(), trajectory.ncols());
    if desired.ncols() != l {
        return Err(Error::Dimension(format!(
            "trajectory has {l} columns, desired has {}",
            desired.ncols()
        )));
    }
    let max_abs = trajectory
        .col_iter()
        .flat_map(|c| c.iter().copied())
        .fold(0.0f64, |m, x| m.max(x.abs()));
    if max_abs.is_nan() || max_abs < DEAD_RESERVOIR_THRESHOLD {
        return Err(Error::DeadReservoir { max_abs });
    }

    let svd = trajectory.transpose().thin_svd().map_err(|_| Error::SvdNoConvergence)?;
    let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
    let sigma_max = s.iter().copied().fold(0.0, f64::max);
    let cutoff = pseudoinverse_cutoff(n, l, sigma_max);

    let mut du = Mat::zeros(desired.nrows(), u.ncols());
    matmul(du.as_mut(), Accum::Replace, desired, u, 1.0, Par::Seq);
    for (k, &sigma) in s.iter().enumerate() {
        let inv = if sigma > cutoff { 1.0 / sigma } else { 0.0 };
        for x in du.col_mut(k).iter_mut() {
            *x *= inv;
        }
    }
    let mut w_out = Mat::zeros(desired.nrows(), n);
    matmul(w_out.as_mut(), Accum::Replace, du.as_ref(), v.transpose(), 1.0, Par::Seq);
    Ok(w_out)
}
