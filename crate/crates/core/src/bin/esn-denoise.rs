use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use esn_denoise::chaos::{generate_orbit, MapParams};
use esn_denoise::esn::{column, load_model, save_model, EsnConfig, TrainedEsn};
use esn_denoise::experiment::{run_sweep, SweepConfig, SweepOptions};
use esn_denoise::io::{read_signal, write_signal};
use esn_denoise::noise::{corrupt, NoiseSpec};
use esn_denoise::tuning::{
    coordinate_descent, evaluate_cell, parse_order, trace_csv, Coordinate, Scenario, ScenarioSpec, TuneGrid, DEFAULT_MAX_CYCLES,
};
use esn_denoise::wiener::{WienerFilter, DEFAULT_TAPS};

#[derive(Parser)]
#[command(name = "esn-denoise", version, about = "Echo state network denoising of chaotic signals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a skew tent map orbit.
    Generate {
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        d0: f64,
        #[arg(long)]
        length: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Add white Gaussian noise at a given input SNR.
    Corrupt {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        snr_db: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also write the noise sequence.
        #[arg(long)]
        noise_out: Option<PathBuf>,
    },
    /// Train an ESN readout and save the model.
    Train {
        /// JSON reservoir configuration; defaults are used when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        desired: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a trained model over a noisy signal.
    Denoise {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a FIR Wiener filter on a record and filter it.
    Wiener {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        desired: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TAPS)]
        taps: usize,
        #[arg(long, default_value_t = 0)]
        delay: usize,
        #[arg(long)]
        out: PathBuf,
        /// Write the designed taps, one per line.
        #[arg(long)]
        dump_taps: Option<PathBuf>,
    },
    /// Coordinate-descent search over (a, lambda, p, q).
    Tune {
        #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
        snr_db: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Scan order, e.g. "lambda,p,q,a".
        #[arg(long, default_value = "a,lambda,p,q")]
        order: String,
        #[arg(long, default_value_t = DEFAULT_MAX_CYCLES)]
        max_cycles: usize,
        /// N = 100 and 5000 training samples instead of N = 500 and 25 000.
        #[arg(long)]
        quick: bool,
        /// Score cells on the full 10^6-sample record instead of 10^5
        /// evaluation samples.
        #[arg(long)]
        full_length: bool,
        /// Skip re-scoring the selected cell on the full-length record.
        #[arg(long)]
        no_revalidate: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Processing gain of ESN and Wiener filter over a grid of alpha.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        quick: bool,
        /// Worker threads; 0 uses all cores.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Also write a gnuplot script for the summary.
        #[arg(long)]
        gnuplot: bool,
    },
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Generate { alpha, d0, length, out } => {
            let orbit = generate_orbit(MapParams::new(alpha, d0)?, length)?;
            write_signal(&out, &orbit.samples)?;
        }
        Command::Corrupt { input, snr_db, seed, out, noise_out } => {
            let d = read_signal(&input)?;
            let signal = corrupt(&d, &NoiseSpec::new(snr_db, seed)?)?;
            write_signal(&out, &signal.u)?;
            if let Some(path) = noise_out {
                write_signal(&path, &signal.w)?;
            }
            eprintln!(
                "noise variance {:.6e}, realized SNR {:.4} dB",
                signal.noise_variance, signal.realized_snr_db
            );
        }
        Command::Train { config, input, desired, out } => {
            let config: EsnConfig = match config {
                Some(path) => read_json(&path)?,
                None => EsnConfig::default(),
            };
            let u = read_signal(&input)?;
            let d = read_signal(&desired)?;
            if u.len() != d.len() {
                bail!("input has {} samples, desired {}", u.len(), d.len());
            }
            let model = TrainedEsn::train(&config, column(&u), column(&d))?;
            save_model(&model, &out)?;
        }
        Command::Denoise { model, input, out } => {
            let mut model = load_model(&model)?;
            let u = read_signal(&input)?;
            let y = model.run_scalar(&u)?;
            write_signal(&out, &y)?;
        }
        Command::Wiener { input, desired, taps, delay, out, dump_taps } => {
            let u = read_signal(&input)?;
            let d = read_signal(&desired)?;
            let filter = WienerFilter::fit(&u, &d, taps, delay)?;
            write_signal(&out, &filter.estimate(&u))?;
            if let Some(path) = dump_taps {
                write_signal(&path, &filter.taps)?;
            }
        }
        Command::Tune { alpha, snr_db, seed, order, max_cycles, quick, full_length, no_revalidate, out } => {
            let order: [Coordinate; 4] = parse_order(&order)?;
            let base = if quick { ScenarioSpec::quick(seed) } else { ScenarioSpec::reference(seed) };
            let spec = ScenarioSpec { alpha, snr_in_db: snr_db, ..base };
            let spec = if full_length { spec.full_length() } else { spec };
            let scenario = Scenario::new(spec)?;
            let outcome = coordinate_descent(&TuneGrid::default(), &scenario, order, max_cycles)?;
            let revalidated = if full_length || no_revalidate {
                None
            } else {
                drop(scenario);
                let long = Scenario::new(spec.full_length())?;
                Some(evaluate_cell(&outcome.best, &long)?)
            };
            fs::write(&out, trace_csv(&outcome, revalidated)?)?;
            if let Some(gain) = revalidated {
                eprintln!("full-length gain of the selected cell: {gain:.3} dB");
            }
            let b = outcome.best;
            eprintln!(
                "a = {}, lambda = {}, p = {}, q = {}: gain {:.3} dB after {} cycles ({})",
                b.leakage,
                b.spectral_radius,
                b.bias_scale,
                b.input_scale,
                outcome.gain_db,
                outcome.trace.iterations,
                if outcome.trace.converged { "converged" } else { "cycle cap reached" }
            );
        }
        Command::Sweep { config, out, quick, workers, gnuplot } => {
            let mut config: SweepConfig = match config {
                Some(path) => read_json(&path)?,
                None => SweepConfig::default(),
            };
            if quick {
                config = config.quick();
            }
            fs::create_dir_all(&out)?;
            let outcome = run_sweep(&config, &out, &SweepOptions { workers, gnuplot })?;
            for r in &outcome.reports {
                println!(
                    "alpha {:+.2} {:>6}: gain {:.3} +/- {:.3} dB",
                    r.alpha, r.method, r.gain_mean_db, r.gain_std_db
                );
            }
        }
    }
    Ok(())
}
