#![allow(dead_code)]

use esn_denoise::chaos::{analytic_psd, estimate_psd, generate_orbit, MapParams};
use esn_denoise::esn::{collect_trajectory, column, EsnConfig, TrainedEsn};
use esn_denoise::noise::{corrupt, NoiseSpec};
use esn_denoise::seed;
use esn_denoise::wiener::WienerFilter;
use faer::Mat;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn noisy_orbit(alpha: f64, len: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let orbit = generate_orbit(MapParams::new(alpha, 0.123).unwrap(), len).unwrap();
    let c = corrupt(&orbit.samples, &NoiseSpec::new(2.0, seed).unwrap()).unwrap();
    (c.u, c.d)
}

/// Worst relative deviation of the averaged periodogram from the closed-form
/// spectrum, after averaging `group` adjacent bins of each.
pub fn psd_worst_relative_error(alpha: f64, len: usize, segment: usize, group: usize) -> f64 {
    let orbit = generate_orbit(MapParams::new(alpha, 0.31).unwrap(), len).unwrap();
    let est = estimate_psd(&orbit.samples, segment).unwrap();
    est.chunks(group)
        .map(|chunk| {
            let measured: f64 = chunk.iter().map(|&(_, p)| p).sum();
            let expected: f64 = chunk.iter().map(|&(w, _)| analytic_psd(alpha, w).unwrap()).sum();
            ((measured - expected) / expected).abs()
        })
        .fold(0.0, f64::max)
}

/// Composite Simpson rule of the closed-form spectrum over [-pi, pi] / 2 pi.
pub fn psd_quadrature(alpha: f64, intervals: usize) -> f64 {
    use std::f64::consts::PI;
    let h = 2.0 * PI / intervals as f64;
    let sum: f64 = (0..=intervals)
        .map(|i| {
            let w = -PI + h * i as f64;
            let weight = if i == 0 || i == intervals {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            weight * analytic_psd(alpha, w).unwrap()
        })
        .sum();
    sum * h / 3.0 / (2.0 * PI)
}

pub struct ReadoutCheck {
    /// max_i |(T e^T)_i| / (||T||_F ||D||_F)
    pub orthogonality: f64,
    /// min over perturbations of ||A T - D|| - ||W T - D|| (must be >= -1e-9)
    pub worst_margin: f64,
}

fn frobenius_residual(w: &Mat<f64>, t: &Mat<f64>, d: &[f64]) -> f64 {
    let mut sum = 0.0;
    for col in 0..t.ncols() {
        let y: f64 = (0..t.nrows()).map(|i| w[(0, i)] * t[(i, col)]).sum();
        sum += (d[col] - y).powi(2);
    }
    sum.sqrt()
}

pub fn esn_readout_check(config: &EsnConfig, perturbations: usize, scale: f64) -> ReadoutCheck {
    let len = config.training_record_len();
    let (u, d) = noisy_orbit(0.9, len, 77);
    let net = TrainedEsn::train(config, column(&u), column(&d)).unwrap();
    let t = collect_trajectory(&net.weights, config, column(&u)).unwrap();
    let targets = &d[config.transient..len];

    let base = frobenius_residual(&net.w_out, &t, targets);
    let residual: Vec<f64> = (0..t.ncols())
        .map(|col| targets[col] - (0..t.nrows()).map(|i| net.w_out[(0, i)] * t[(i, col)]).sum::<f64>())
        .collect();
    let t_norm = t.norm_l2();
    let d_norm = targets.iter().map(|x| x * x).sum::<f64>().sqrt();
    let orthogonality = (0..t.nrows())
        .map(|i| (0..t.ncols()).map(|col| t[(i, col)] * residual[col]).sum::<f64>().abs())
        .fold(0.0, f64::max)
        / (t_norm * d_norm);

    let mut rng = seed::rng(2024);
    let mut worst_margin = f64::INFINITY;
    for _ in 0..perturbations {
        let a = Mat::from_fn(1, t.nrows(), |_, j| {
            let g: f64 = StandardNormal.sample(&mut rng);
            net.w_out[(0, j)] + scale * g
        });
        worst_margin = worst_margin.min(frobenius_residual(&a, &t, targets) - base);
    }
    ReadoutCheck {
        orthogonality,
        worst_margin,
    }
}

pub struct WienerCheck {
    /// max_k |(1/M) sum e(n) u(n-k)| / r_u(0)
    pub orthogonality: f64,
    /// min over perturbations of MSE(h + delta) - MSE(h)
    pub worst_margin: f64,
}

fn mse(taps: &[f64], u: &[f64], d: &[f64]) -> f64 {
    let f = WienerFilter {
        taps: taps.to_vec(),
        autocorr: vec![],
        crosscorr: vec![],
        delay: 0,
    };
    let y = f.apply(u);
    y.iter().zip(d).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / u.len() as f64
}

pub fn wiener_check(alpha: f64, m: usize, perturbations: usize) -> WienerCheck {
    let (u, d) = noisy_orbit(alpha, m, 5);
    let filter = WienerFilter::fit(&u, &d, 10, 0).unwrap();
    let y = filter.apply(&u);
    let e: Vec<f64> = d.iter().zip(&y).map(|(a, b)| a - b).collect();
    let r0 = u.iter().map(|x| x * x).sum::<f64>() / m as f64;
    let orthogonality = (0..filter.taps.len())
        .map(|k| (k..m).map(|n| e[n] * u[n - k]).sum::<f64>().abs() / m as f64)
        .fold(0.0, f64::max)
        / r0;

    let base = mse(&filter.taps, &u, &d);
    let mut rng = seed::rng(99);
    let mut worst_margin = f64::INFINITY;
    for _ in 0..perturbations {
        let dir: Vec<f64> = (0..filter.taps.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        let taps: Vec<f64> = filter.taps.iter().zip(&dir).map(|(h, x)| h + 0.01 * x / norm).collect();
        worst_margin = worst_margin.min(mse(&taps, &u, &d) - base);
    }
    WienerCheck {
        orthogonality,
        worst_margin,
    }
}
