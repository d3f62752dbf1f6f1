//! Processing gain versus map parameter: ESN and Wiener filter on identical
//! data, repeated with fresh orbits, noise and reservoirs.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chaos::{check_open_unit, generate_orbit, MapParams};
use crate::error::{Error, Result};
use crate::esn::{column, EsnConfig, TrainedEsn};
use crate::metrics::{gain_db, snr_out, snr_out_ref, to_db, GainReport, Method, RepetitionResult};
use crate::noise::{corrupt, NoiseSpec};
use crate::seed;
use crate::wiener::{WienerFilter, DEFAULT_TAPS};

pub const GAINS_FILE: &str = "gains.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const CHECKPOINT_DIR: &str = "cells";
pub const GNUPLOT_FILE: &str = "plot.gp";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub alpha_values: Vec<f64>,
    pub snr_in_db: f64,
    pub repetitions: usize,
    /// Reservoir settings; `seed` is replaced by a per-repetition seed.
    pub esn: EsnConfig,
    pub wiener_taps: usize,
    /// Samples after the training window used for scoring.
    pub eval_len: usize,
    pub master_seed: u64,
}

/// -0.95, -0.90, ..., 0.95 as exact quotients of 20.
pub fn default_alpha_grid() -> Vec<f64> {
    (-19..=19).map(|i| f64::from(i) / 20.0).collect()
}

impl Default for SweepConfig {
    fn default() -> Self {
        let esn = EsnConfig::default();
        Self {
            alpha_values: default_alpha_grid(),
            snr_in_db: 2.0,
            repetitions: 5,
            eval_len: 1_000_000 - esn.train_len,
            esn,
            wiener_taps: DEFAULT_TAPS,
            master_seed: 0,
        }
    }
}

impl SweepConfig {
    /// Desk-scale profile: N = 100, L = 5000, 10^5 evaluation samples.
    pub fn quick(mut self) -> Self {
        self.esn.n_reservoir = 100;
        self.esn.train_len = 5_000;
        self.eval_len = 100_000;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if self.alpha_values.is_empty() {
            return Err(Error::Config("alpha_values is empty".into()));
        }
        for &alpha in &self.alpha_values {
            check_open_unit("alpha", alpha)?;
        }
        if self.wiener_taps == 0 {
            return Err(Error::Config("wiener_taps must be at least 1".into()));
        }
        if self.eval_len == 0 {
            return Err(Error::Config("eval_len must be at least 1".into()));
        }
        if self.esn.n_inputs != 1 || self.esn.n_outputs != 1 {
            return Err(Error::Config("the sweep denoises scalar signals (n_inputs = n_outputs = 1)".into()));
        }
        NoiseSpec::new(self.snr_in_db, 0)?;
        self.esn.validate()
    }

    pub fn record_len(&self) -> usize {
        self.esn.training_record_len() + self.eval_len
    }
}

/// Seed of repetition `rep` at map parameter `alpha`. Depends on the value
/// of `alpha`, not its position in the list.
pub fn repetition_seed(master_seed: u64, alpha: f64, rep: usize) -> u64 {
    seed::derive(&[master_seed, alpha.to_bits(), rep as u64])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepetitionSeeds {
    pub repetition: u64,
    pub d0: f64,
    pub noise: u64,
    pub weights: u64,
}

impl RepetitionSeeds {
    pub fn new(master_seed: u64, alpha: f64, rep: usize) -> Self {
        let repetition = repetition_seed(master_seed, alpha, rep);
        Self {
            repetition,
            d0: seed::rng(seed::derive(&[repetition, 1])).random_range(-0.99..0.99),
            noise: seed::derive(&[repetition, 2]),
            weights: seed::derive(&[repetition, 3]),
        }
    }
}

fn stage<T>(alpha: f64, rep: usize, stage: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Cell {
        alpha,
        rep,
        stage,
        source: Box::new(e),
    })
}

/// Denoised evaluation-window signals from one repetition, for inspection.
#[derive(Debug, Clone)]
pub struct RepetitionSignals {
    pub u: Vec<f64>,
    pub d: Vec<f64>,
    pub esn: Vec<f64>,
    pub wiener: Vec<f64>,
}

/// One repetition at `alpha`: both methods on the same record and window.
pub fn run_repetition(alpha: f64, rep: usize, config: &SweepConfig) -> Result<[RepetitionResult; 2]> {
    run_repetition_with_signals(alpha, rep, config).map(|(r, _)| r)
}

pub fn run_repetition_with_signals(
    alpha: f64,
    rep: usize,
    config: &SweepConfig,
) -> Result<([RepetitionResult; 2], RepetitionSignals)> {
    let seeds = RepetitionSeeds::new(config.master_seed, alpha, rep);
    let params = stage(alpha, rep, "orbit", MapParams::new(alpha, seeds.d0))?;
    let orbit = stage(alpha, rep, "orbit", generate_orbit(params, config.record_len()))?;
    let noise = NoiseSpec {
        snr_in_db: config.snr_in_db,
        seed: seeds.noise,
    };
    let signal = stage(alpha, rep, "noise", corrupt(&orbit.samples, &noise))?;
    let (u, d) = (&signal.u, &signal.d);

    let train = config.esn.transient..config.esn.training_record_len();
    let eval_start = train.end;

    let esn_config = EsnConfig {
        seed: seeds.weights,
        ..config.esn
    };
    let mut net = stage(alpha, rep, "esn", TrainedEsn::train(&esn_config, column(u), column(d)))?;
    let esn_eval = stage(alpha, rep, "esn", net.run_scalar(&u[eval_start..]))?;

    let filter = stage(
        alpha,
        rep,
        "wiener",
        WienerFilter::fit(&u[train.clone()], &d[train], config.wiener_taps, 0),
    )?;
    let wiener_full = filter.estimate(u);
    let wiener_eval = wiener_full[eval_start..].to_vec();

    let d_eval = &d[eval_start..];
    let score = |method: Method, y: &[f64]| -> Result<RepetitionResult> {
        let linear = snr_out(y, d_eval, 0..y.len())?;
        let reference = snr_out_ref(y, d_eval, 0..y.len())?;
        Ok(RepetitionResult {
            alpha,
            snr_in_db: config.snr_in_db,
            method,
            rep,
            snr_out_db: to_db(linear),
            gain_db: gain_db(linear, config.snr_in_db)?,
            seed: seeds.repetition,
            snr_out_ref_db: to_db(reference),
        })
    };
    let esn_result = stage(alpha, rep, "metrics", score(Method::Esn, &esn_eval))?;
    let wiener_result = stage(alpha, rep, "metrics", score(Method::Wiener, &wiener_eval))?;

    let signals = RepetitionSignals {
        u: u[eval_start..].to_vec(),
        d: d_eval.to_vec(),
        esn: esn_eval,
        wiener: wiener_eval,
    };
    Ok(([esn_result, wiener_result], signals))
}

/// All repetitions at one `alpha`, ESN then Wiener for each repetition.
pub fn run_cell(alpha: f64, config: &SweepConfig) -> Result<Vec<RepetitionResult>> {
    config.validate()?;
    let per_rep: Vec<[RepetitionResult; 2]> = (0..config.repetitions)
        .into_par_iter()
        .map(|rep| run_repetition(alpha, rep, config))
        .collect::<Result<_>>()?;
    Ok(per_rep.into_iter().flatten().collect())
}

/// ESN and Wiener reports for one `alpha` from its repetition rows.
pub fn summarize(results: &[RepetitionResult], eval_len: usize) -> Result<Vec<GainReport>> {
    let mut reports = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    for r in results {
        if !alphas.contains(&r.alpha) {
            alphas.push(r.alpha);
        }
    }
    for alpha in alphas {
        for method in [Method::Esn, Method::Wiener] {
            let rows: Vec<RepetitionResult> = results
                .iter()
                .filter(|r| r.alpha == alpha && r.method == method)
                .copied()
                .collect();
            if !rows.is_empty() {
                reports.push(GainReport::from_repetitions(&rows, eval_len)?);
            }
        }
    }
    Ok(reports)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Checkpoint {
    fingerprint: u64,
    results: [RepetitionResult; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellTiming {
    pub alpha: f64,
    pub rep: usize,
    pub seeds: RepetitionSeeds,
    pub seconds: f64,
    pub resumed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub software: String,
    pub version: String,
    pub rng: String,
    pub config: SweepConfig,
    pub fingerprint: u64,
    pub workers: usize,
    pub total_seconds: f64,
    pub cells: Vec<CellTiming>,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub results: Vec<RepetitionResult>,
    pub reports: Vec<GainReport>,
    pub manifest: Manifest,
}

#[derive(Debug, Clone, Default)]
pub struct SweepOptions {
    /// Worker threads; 0 uses the current rayon pool.
    pub workers: usize,
    pub gnuplot: bool,
}

fn fingerprint(config: &SweepConfig) -> Result<u64> {
    let text = serde_json::to_string(config)?;
    let words: Vec<u64> = text.bytes().map(u64::from).collect();
    Ok(seed::derive(&words))
}

fn checkpoint_path(dir: &Path, alpha: f64, rep: usize) -> PathBuf {
    dir.join(format!("alpha_{:016x}_rep_{rep}.json", alpha.to_bits()))
}

fn load_checkpoint(path: &Path, fingerprint: u64) -> Option<[RepetitionResult; 2]> {
    let text = fs::read_to_string(path).ok()?;
    let cp: Checkpoint = serde_json::from_str(&text).ok()?;
    (cp.fingerprint == fingerprint).then_some(cp.results)
}

fn write_atomically(path: &Path, contents: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)?;
    fs::rename(tmp, path)?;
    Ok(())
}

fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

fn header_block(config: &SweepConfig) -> Result<String> {
    let mut text = String::new();
    text.push_str(&format!("# software: {} {}\n", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")));
    text.push_str(&format!("# rng: {}\n", seed::RNG_DESCRIPTION));
    text.push_str("# snr_out_db: 10 log10(sum y^2 / sum (d - y)^2); snr_out_ref_db uses sum d^2\n");
    let value = serde_json::to_value(config)?;
    if let serde_json::Value::Object(map) = value {
        for (key, v) in map {
            text.push_str(&format!("# {key}: {v}\n"));
        }
    }
    Ok(text)
}

pub fn gains_csv(config: &SweepConfig, results: &[RepetitionResult]) -> Result<String> {
    let mut text = header_block(config)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["alpha", "snr_in_db", "method", "rep", "snr_out_db", "gain_db", "seed", "snr_out_ref_db"])?;
    for r in results {
        w.write_record([
            fmt_f64(r.alpha),
            fmt_f64(r.snr_in_db),
            r.method.to_string(),
            r.rep.to_string(),
            fmt_f64(r.snr_out_db),
            fmt_f64(r.gain_db),
            r.seed.to_string(),
            fmt_f64(r.snr_out_ref_db),
        ])?;
    }
    let body = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    text.push_str(&String::from_utf8_lossy(&body));
    Ok(text)
}

pub fn summary_csv(config: &SweepConfig, reports: &[GainReport]) -> Result<String> {
    let mut text = header_block(config)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "alpha",
        "snr_in_db",
        "method",
        "repetitions",
        "gain_mean_db",
        "gain_std_db",
        "snr_out_db",
        "gain_db",
        "eval_len",
    ])?;
    for r in reports {
        w.write_record([
            fmt_f64(r.alpha),
            fmt_f64(r.snr_in_db),
            r.method.to_string(),
            r.repetitions.to_string(),
            fmt_f64(r.gain_mean_db),
            fmt_f64(r.gain_std_db),
            fmt_f64(r.snr_out_db),
            fmt_f64(r.gain_db),
            r.eval_len.to_string(),
        ])?;
    }
    let body = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    text.push_str(&String::from_utf8_lossy(&body));
    Ok(text)
}

fn gnuplot_script() -> String {
    format!(
        "# gain_mean_db with std error bars against alpha, one curve per method\n\
         set datafile separator ','\n\
         set xlabel 'alpha'\n\
         set ylabel 'processing gain [dB]'\n\
         set key top center\n\
         set grid\n\
         plot '< grep -v \"^#\" {SUMMARY_FILE} | grep \",esn,\"' using 1:5:6 with yerrorlines title 'ESN', \\\n\
         \x20    '< grep -v \"^#\" {SUMMARY_FILE} | grep \",wiener,\"' using 1:5:6 with yerrorlines title 'Wiener filter'\n"
    )
}

/// Runs every `(alpha, repetition)` cell and writes `gains.csv`,
/// `summary.csv` and `manifest.json` into `out_dir`.
///
/// Finished cells are checkpointed under `out_dir/cells`; re-running with
/// the same configuration reuses them.
pub fn run_sweep(config: &SweepConfig, out_dir: &Path, options: &SweepOptions) -> Result<SweepOutcome> {
    config.validate()?;
    let started = Instant::now();
    let fp = fingerprint(config)?;
    let cells_dir = out_dir.join(CHECKPOINT_DIR);
    fs::create_dir_all(&cells_dir)?;

    let jobs: Vec<(f64, usize)> = config
        .alpha_values
        .iter()
        .flat_map(|&a| (0..config.repetitions).map(move |rep| (a, rep)))
        .collect();

    let work = || -> Result<Vec<([RepetitionResult; 2], CellTiming)>> {
        jobs.par_iter()
            .map(|&(alpha, rep)| {
                let path = checkpoint_path(&cells_dir, alpha, rep);
                let seeds = RepetitionSeeds::new(config.master_seed, alpha, rep);
                if let Some(results) = load_checkpoint(&path, fp) {
                    let timing = CellTiming { alpha, rep, seeds, seconds: 0.0, resumed: true };
                    return Ok((results, timing));
                }
                let t0 = Instant::now();
                let results = run_repetition(alpha, rep, config)?;
                let cp = Checkpoint { fingerprint: fp, results };
                write_atomically(&path, serde_json::to_string(&cp)?.as_bytes())?;
                let timing = CellTiming {
                    alpha,
                    rep,
                    seeds,
                    seconds: t0.elapsed().as_secs_f64(),
                    resumed: false,
                };
                Ok((results, timing))
            })
            .collect()
    };
    let (done, workers) = if options.workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(options.workers)
            .build()
            .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
        (pool.install(work)?, options.workers)
    } else {
        (work()?, rayon::current_num_threads())
    };

    let mut results = Vec::with_capacity(done.len() * 2);
    let mut cells = Vec::with_capacity(done.len());
    for (pair, timing) in done {
        results.extend(pair);
        cells.push(timing);
    }
    let reports = summarize(&results, config.eval_len)?;

    fs::write(out_dir.join(GAINS_FILE), gains_csv(config, &results)?)?;
    fs::write(out_dir.join(SUMMARY_FILE), summary_csv(config, &reports)?)?;
    if options.gnuplot {
        fs::write(out_dir.join(GNUPLOT_FILE), gnuplot_script())?;
    }
    let manifest = Manifest {
        software: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        rng: seed::RNG_DESCRIPTION.to_string(),
        config: config.clone(),
        fingerprint: fp,
        workers,
        total_seconds: started.elapsed().as_secs_f64(),
        cells,
    };
    let mut file = fs::File::create(out_dir.join(MANIFEST_FILE))?;
    serde_json::to_writer_pretty(&mut file, &manifest)?;
    file.write_all(b"\n")?;

    Ok(SweepOutcome {
        results,
        reports,
        manifest,
    })
}
