//! Skew tent map orbits and their power spectral density.

use std::f64::consts::PI;

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// Lower clamp target: the interior point nearest to -1 at distance 2^-52.
pub const LOWER_INTERIOR: f64 = -1.0 + f64::EPSILON;
/// Upper clamp target: the interior point nearest to 1 at distance 2^-52.
pub const UPPER_INTERIOR: f64 = 1.0 - f64::EPSILON;

/// Amplitude of the deterministic perturbation added to every iterate.
///
/// With `alpha = 0` both slopes are exactly 2, so in binary floating point
/// the map shifts one mantissa bit out per step and every orbit collapses
/// onto -1 within ~55 iterations. A perturbation at the rounding-error scale
/// keeps the numerical orbit chaotic for every `alpha`.
pub const ORBIT_DITHER: f64 = 1.0 / (1u64 << 50) as f64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapParams {
    pub alpha: f64,
    pub d0: f64,
}

impl MapParams {
    pub fn new(alpha: f64, d0: f64) -> Result<Self> {
        check_open_unit("alpha", alpha)?;
        check_open_unit("d0", d0)?;
        Ok(Self { alpha, d0 })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    pub params: MapParams,
    pub samples: Vec<f64>,
}

impl Orbit {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
}

impl AsRef<[f64]> for Orbit {
    fn as_ref(&self) -> &[f64] {
        &self.samples
    }
}

pub(crate) fn check_open_unit(name: &'static str, value: f64) -> Result<()> {
    if value > -1.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain { name, value })
    }
}

/// Precomputed branch coefficients of the map for a fixed `alpha`.
#[derive(Debug, Clone, Copy)]
struct TentCoefficients {
    alpha: f64,
    left_offset: f64,
    left_slope: f64,
    right_offset: f64,
    right_slope: f64,
}

impl TentCoefficients {
    fn new(alpha: f64) -> Self {
        Self {
            alpha,
            left_offset: (1.0 - alpha) / (1.0 + alpha),
            left_slope: 2.0 / (1.0 + alpha),
            right_offset: (1.0 + alpha) / (1.0 - alpha),
            right_slope: 2.0 / (1.0 - alpha),
        }
    }

    #[inline]
    fn apply(&self, d: f64) -> f64 {
        if d < self.alpha {
            self.left_offset + self.left_slope * d
        } else {
            self.right_offset - self.right_slope * d
        }
    }
}

/// One application of the skew tent map. The point `d == alpha` belongs to
/// the right (descending) branch.
pub fn map_step(d: f64, alpha: f64) -> Result<f64> {
    check_open_unit("alpha", alpha)?;
    check_open_unit("d", d)?;
    Ok(TentCoefficients::new(alpha).apply(d))
}

/// Pulls a value that left the open interval back to the nearest interior
/// point at distance 2^-52 from the boundary.
#[inline]
pub fn clamp_interior(d: f64) -> f64 {
    d.clamp(LOWER_INTERIOR, UPPER_INTERIOR)
}

/// Iterates the map from `params.d0` for `length` samples.
///
/// Every iterate is perturbed by at most [`ORBIT_DITHER`] using a
/// generator seeded from `(alpha, d0)`, then clamped to the open interval,
/// so the same parameters always give the bit-identical orbit.
pub fn generate_orbit(params: MapParams, length: usize) -> Result<Orbit> {
    let params = MapParams::new(params.alpha, params.d0)?;
    if length == 0 {
        return Err(Error::Config("orbit length must be at least 1".into()));
    }
    let coeffs = TentCoefficients::new(params.alpha);
    let dither_seed = seed::derive(&[params.alpha.to_bits(), params.d0.to_bits()]);

    let mut samples = Vec::with_capacity(length);
    let mut d = params.d0;
    for n in 0..length {
        samples.push(d);
        let jitter = unit_symmetric(seed::mix(dither_seed.wrapping_add(n as u64)));
        d = clamp_interior(coeffs.apply(d) + ORBIT_DITHER * jitter);
    }
    Ok(Orbit { params, samples })
}

/// Maps 64 random bits to [-1, 1).
fn unit_symmetric(bits: u64) -> f64 {
    ((bits >> 11) as f64) * (1.0 / (1u64 << 52) as f64) - 1.0
}

/// Closed-form PSD of skew tent map orbits at normalized frequency `omega`.
pub fn analytic_psd(alpha: f64, omega: f64) -> Result<f64> {
    check_open_unit("alpha", alpha)?;
    Ok((1.0 - alpha * alpha) / (3.0 * (1.0 + alpha * alpha - 2.0 * alpha * omega.cos())))
}

/// Averaged periodogram over non-overlapping rectangular segments.
///
/// The signal mean is removed first. Bins are returned sorted by
/// frequency on (-pi, pi]; their mean equals the sample variance of the
/// samples covered by whole segments.
pub fn estimate_psd(signal: &[f64], segment_length: usize) -> Result<Vec<(f64, f64)>> {
    if segment_length == 0 {
        return Err(Error::Config("segment length must be at least 1".into()));
    }
    let needed = 4 * segment_length;
    if signal.len() < needed {
        return Err(Error::TooShort {
            needed,
            got: signal.len(),
        });
    }
    let segments = signal.len() / segment_length;
    let covered = &signal[..segments * segment_length];
    let mean = covered.iter().sum::<f64>() / covered.len() as f64;

    let fft = FftPlanner::<f64>::new().plan_fft_forward(segment_length);
    let mut power = vec![0.0; segment_length];
    let mut buffer = vec![Complex::new(0.0, 0.0); segment_length];
    for chunk in covered.chunks_exact(segment_length) {
        for (slot, &x) in buffer.iter_mut().zip(chunk) {
            *slot = Complex::new(x - mean, 0.0);
        }
        fft.process(&mut buffer);
        for (acc, c) in power.iter_mut().zip(&buffer) {
            *acc += c.norm_sqr();
        }
    }
    let scale = 1.0 / (segments as f64 * segment_length as f64);

    let mut bins: Vec<(f64, f64)> = power
        .into_iter()
        .enumerate()
        .map(|(k, p)| {
            let mut omega = 2.0 * PI * k as f64 / segment_length as f64;
            if omega > PI {
                omega -= 2.0 * PI;
            }
            (omega, p * scale)
        })
        .collect();
    bins.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(bins)
}
