//! FIR Wiener filter estimated from time-average second-order statistics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_TAPS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WienerFilter {
    pub taps: Vec<f64>,
    /// Input autocorrelation `r_u(0..K)` the taps were designed from.
    pub autocorr: Vec<f64>,
    /// Cross-correlation between the (delayed) target and the input.
    pub crosscorr: Vec<f64>,
    /// Filter output at time `n` estimates `d(n - delay)`.
    pub delay: usize,
}

/// Biased correlation estimates `r_u(k) = (1/M) sum u(n) u(n-k)` and
/// `r_du(k) = (1/M) sum d(n) u(n-k)` for `k = 0..max_lag`.
pub fn estimate_correlations(u: &[f64], d: &[f64], max_lag: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    estimate_correlations_delayed(u, d, max_lag, 0)
}

/// As [`estimate_correlations`], with the target delayed by `delay` samples:
/// `r_du(k) = (1/M) sum d(n - delay) u(n - k)`.
pub fn estimate_correlations_delayed(
    u: &[f64],
    d: &[f64],
    max_lag: usize,
    delay: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if u.len() != d.len() {
        return Err(Error::Dimension(format!("input has {} samples, target {}", u.len(), d.len())));
    }
    if max_lag == 0 {
        return Err(Error::Config("max_lag must be at least 1".into()));
    }
    let needed = 10 * max_lag.max(delay + 1);
    if u.len() < needed {
        return Err(Error::TooShort { needed, got: u.len() });
    }
    let autocorr = (0..max_lag).map(|k| lagged_product(u, u, k as isize)).collect();
    let crosscorr = (0..max_lag)
        .map(|k| lagged_product(d, u, k as isize - delay as isize))
        .collect();
    Ok((autocorr, crosscorr))
}

/// `(1/M) sum_n x(n) y(n - lag)` over the indices where both exist.
fn lagged_product(x: &[f64], y: &[f64], lag: isize) -> f64 {
    let m = x.len();
    let sum: f64 = if lag >= 0 {
        let lag = lag as usize;
        x[lag..].iter().zip(y).map(|(a, b)| a * b).sum()
    } else {
        let lead = (-lag) as usize;
        x.iter().zip(&y[lead..]).map(|(a, b)| a * b).sum()
    };
    sum / m as f64
}

/// Solves the Toeplitz normal equations `R h = p` by Levinson recursion.
pub fn design(autocorr: &[f64], crosscorr: &[f64]) -> Result<WienerFilter> {
    design_delayed(autocorr, crosscorr, 0)
}

pub fn design_delayed(autocorr: &[f64], crosscorr: &[f64], delay: usize) -> Result<WienerFilter> {
    let taps = levinson_solve(autocorr, crosscorr)?;
    Ok(WienerFilter {
        taps,
        autocorr: autocorr.to_vec(),
        crosscorr: crosscorr.to_vec(),
        delay,
    })
}

fn levinson_solve(r: &[f64], p: &[f64]) -> Result<Vec<f64>> {
    let k = r.len();
    if k == 0 || p.len() != k {
        return Err(Error::Dimension(format!(
            "autocorrelation has {} lags, cross-correlation {}",
            r.len(),
            p.len()
        )));
    }
    if r[0].is_nan() || r[0] <= 0.0 {
        return Err(Error::NotPositiveDefinite { order: 0 });
    }
    let floor = r[0] * 1e-14;

    // forward predictor a (a[0] = 1) with error power `err`
    let mut a = vec![0.0; k];
    a[0] = 1.0;
    let mut err = r[0];
    let mut h = vec![0.0; k];
    h[0] = p[0] / r[0];
    let mut scratch = vec![0.0; k];

    for m in 1..k {
        let lambda: f64 = (0..m).map(|i| a[i] * r[m - i]).sum();
        let reflection = -lambda / err;
        scratch[..=m].copy_from_slice(&a[..=m]);
        for i in 0..=m {
            a[i] = scratch[i] + reflection * scratch[m - i];
        }
        err *= 1.0 - reflection * reflection;
        if err.is_nan() || err <= floor {
            return Err(Error::NotPositiveDefinite { order: m });
        }
        let eps: f64 = (0..m).map(|i| h[i] * r[m - i]).sum();
        let mu = (p[m] - eps) / err;
        for i in 0..=m {
            h[i] += mu * a[m - i];
        }
    }
    Ok(h)
}

impl WienerFilter {
    /// Designs a `taps`-long filter from a record of input and target.
    pub fn fit(u: &[f64], d: &[f64], taps: usize, delay: usize) -> Result<Self> {
        let (autocorr, crosscorr) = estimate_correlations_delayed(u, d, taps, delay)?;
        design_delayed(&autocorr, &crosscorr, delay)
    }

    /// Causal convolution `y(n) = sum_k h(k) u(n - k)` with zero initial conditions.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        (0..u.len())
            .map(|n| {
                self.taps
                    .iter()
                    .take(n + 1)
                    .enumerate()
                    .map(|(k, h)| h * u[n - k])
                    .sum()
            })
            .collect()
    }

    /// Filter output re-indexed so that element `n` estimates `d(n)`. The last
    /// `delay` samples, which need future input, are zero.
    pub fn estimate(&self, u: &[f64]) -> Vec<f64> {
        let mut y = self.apply(u);
        if self.delay > 0 {
            let shift = self.delay.min(y.len());
            y.drain(..shift);
            y.resize(u.len(), 0.0);
        }
        y
    }
}
