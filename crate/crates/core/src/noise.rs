//! Additive white Gaussian noise at a prescribed input SNR.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Requested input SNR in dB. `f64::INFINITY` disables the noise.
    pub snr_in_db: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(snr_in_db: f64, seed: u64) -> Result<Self> {
        if snr_in_db.is_nan() || snr_in_db == f64::NEG_INFINITY {
            return Err(Error::Config(format!("input SNR must be finite or +inf, got {snr_in_db}")));
        }
        Ok(Self { snr_in_db, seed })
    }

    pub fn noiseless() -> Self {
        Self {
            snr_in_db: f64::INFINITY,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorruptedSignal {
    /// Noisy observation `d + w`.
    pub u: Vec<f64>,
    /// Clean signal.
    pub d: Vec<f64>,
    /// The noise realization.
    pub w: Vec<f64>,
    /// Variance the noise was drawn with.
    pub noise_variance: f64,
    /// SNR of this particular draw; `+inf` when no noise was added.
    pub realized_snr_db: f64,
}

pub fn mean_power(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::Empty);
    }
    Ok(x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64)
}

/// Noise variance giving `snr_db` against a signal of power `signal_power`.
pub fn noise_variance(signal_power: f64, snr_db: f64) -> f64 {
    signal_power / 10f64.powf(snr_db / 10.0)
}

/// Adds i.i.d. Gaussian noise scaled to the measured power of `d`.
///
/// The noise is drawn sequentially from one generator, so disjoint
/// segments of the record see disjoint positions of the stream.
pub fn corrupt(d: &[f64], spec: &NoiseSpec) -> Result<CorruptedSignal> {
    let spec = NoiseSpec::new(spec.snr_in_db, spec.seed)?;
    let power = mean_power(d)?;
    if spec.snr_in_db == f64::INFINITY {
        return Ok(CorruptedSignal {
            u: d.to_vec(),
            d: d.to_vec(),
            w: vec![0.0; d.len()],
            noise_variance: 0.0,
            realized_snr_db: f64::INFINITY,
        });
    }

    let variance = noise_variance(power, spec.snr_in_db);
    let sigma = variance.sqrt();
    let mut rng = seed::rng(spec.seed);
    let w: Vec<f64> = (0..d.len())
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            sigma * z
        })
        .collect();
    let u = d.iter().zip(&w).map(|(x, n)| x + n).collect();
    let realized_snr_db = 10.0 * (power / mean_power(&w)?).log10();

    Ok(CorruptedSignal {
        u,
        d: d.to_vec(),
        w,
        noise_variance: variance,
        realized_snr_db,
    })
}
