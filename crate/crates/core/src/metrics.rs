//! Output SNR, processing gain and repetition statistics.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Output SNR as a linear ratio, `sum y^2 / sum (d - y)^2` over `window`.
///
/// The numerator is the power of the estimate `y`, not of the clean signal.
/// A zero error returns `f64::INFINITY`.
pub fn snr_out(y: &[f64], d: &[f64], window: Range<usize>) -> Result<f64> {
    let (y, d) = windowed(y, d, window)?;
    let signal: f64 = y.iter().map(|v| v * v).sum();
    Ok(ratio(signal, error_energy(y, d)))
}

/// Same as [`snr_out`] with the clean-signal power `sum d^2` as numerator.
pub fn snr_out_ref(y: &[f64], d: &[f64], window: Range<usize>) -> Result<f64> {
    let (y, d) = windowed(y, d, window)?;
    let signal: f64 = d.iter().map(|v| v * v).sum();
    Ok(ratio(signal, error_energy(y, d)))
}

fn windowed<'a>(y: &'a [f64], d: &'a [f64], window: Range<usize>) -> Result<(&'a [f64], &'a [f64])> {
    if window.end <= window.start {
        return Err(Error::Config(format!("empty evaluation window {window:?}")));
    }
    let got = y.len().min(d.len());
    if window.end > got {
        return Err(Error::TooShort {
            needed: window.end,
            got,
        });
    }
    Ok((&y[window.clone()], &d[window]))
}

fn error_energy(y: &[f64], d: &[f64]) -> f64 {
    y.iter().zip(d).map(|(a, b)| (b - a) * (b - a)).sum()
}

fn ratio(signal: f64, error: f64) -> f64 {
    if error == 0.0 {
        f64::INFINITY
    } else {
        signal / error
    }
}

pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Processing gain `10 log10(snr_out) - snr_in_db`.
pub fn gain_db(snr_out_linear: f64, snr_in_db: f64) -> Result<f64> {
    if snr_out_linear.is_nan() || snr_out_linear <= 0.0 {
        return Err(Error::NonPositiveRatio(snr_out_linear));
    }
    Ok(to_db(snr_out_linear) - snr_in_db)
}

/// Sample mean and sample standard deviation (n - 1 denominator). A single
/// value has standard deviation 0.
pub fn aggregate(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::Empty);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return Ok((mean, 0.0));
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    Ok((mean, var.sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Esn,
    Wiener,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Esn => "esn",
            Method::Wiener => "wiener",
        })
    }
}

/// One denoising run: a single method on a single repetition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepetitionResult {
    pub alpha: f64,
    pub snr_in_db: f64,
    pub method: Method,
    pub rep: usize,
    pub snr_out_db: f64,
    pub gain_db: f64,
    pub seed: u64,
    /// Output SNR with the clean-signal power as numerator.
    pub snr_out_ref_db: f64,
}

/// Processing-gain statistics for one method at one `(alpha, snr_in)` point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainReport {
    pub alpha: f64,
    pub snr_in_db: f64,
    pub method: Method,
    /// Mean output SNR over the repetitions.
    pub snr_out_db: f64,
    /// `snr_out_db - snr_in_db`.
    pub gain_db: f64,
    pub repetitions: usize,
    pub gain_mean_db: f64,
    pub gain_std_db: f64,
    pub eval_len: usize,
}

impl GainReport {
    /// Summarizes repetitions that all share `alpha`, `snr_in_db` and `method`.
    pub fn from_repetitions(results: &[RepetitionResult], eval_len: usize) -> Result<Self> {
        let first = results.first().ok_or(Error::Empty)?;
        if results
            .iter()
            .any(|r| r.method != first.method || r.alpha != first.alpha || r.snr_in_db != first.snr_in_db)
        {
            return Err(Error::Config("repetitions mix different cells".into()));
        }
        let gains: Vec<f64> = results.iter().map(|r| r.gain_db).collect();
        let outs: Vec<f64> = results.iter().map(|r| r.snr_out_db).collect();
        let (gain_mean_db, gain_std_db) = aggregate(&gains)?;
        let (snr_out_db, _) = aggregate(&outs)?;
        Ok(Self {
            alpha: first.alpha,
            snr_in_db: first.snr_in_db,
            method: first.method,
            snr_out_db,
            gain_db: snr_out_db - first.snr_in_db,
            repetitions: results.len(),
            gain_mean_db,
            gain_std_db,
            eval_len,
        })
    }
}
