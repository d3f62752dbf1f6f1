//! Cyclic coordinate descent over the reservoir hyperparameters
//! (leakage, spectral radius, bias scale, input scale).
//!
//! Each scan sweeps one coordinate over its full grid with the others held
//! at their incumbent values and keeps the value with the highest processing
//! gain. Scans cycle through the coordinates until a whole cycle leaves every
//! value unchanged.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chaos::{generate_orbit, MapParams};
use crate::error::{Error, Result};
use crate::esn::{column, EsnConfig, ReservoirDraw, TrainedEsn};
use crate::metrics::{gain_db, snr_out};
use crate::noise::{corrupt, NoiseSpec};
use crate::seed;

/// Gains closer than this (in dB) are treated as equal.
pub const TIE_TOLERANCE_DB: f64 = 1e-9;
pub const DEFAULT_MAX_CYCLES: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coordinate {
    Leakage,
    SpectralRadius,
    BiasScale,
    InputScale,
}

impl Coordinate {
    pub const DEFAULT_ORDER: [Coordinate; 4] = [
        Coordinate::Leakage,
        Coordinate::SpectralRadius,
        Coordinate::BiasScale,
        Coordinate::InputScale,
    ];
}

impl fmt::Display for Coordinate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Coordinate::Leakage => "a",
            Coordinate::SpectralRadius => "lambda",
            Coordinate::BiasScale => "p",
            Coordinate::InputScale => "q",
        })
    }
}

impl FromStr for Coordinate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "a" | "leakage" => Ok(Coordinate::Leakage),
            "lambda" | "spectral_radius" => Ok(Coordinate::SpectralRadius),
            "p" | "bias_scale" => Ok(Coordinate::BiasScale),
            "q" | "input_scale" => Ok(Coordinate::InputScale),
            other => Err(Error::Config(format!("unknown coordinate {other:?}"))),
        }
    }
}

/// Parses a comma-separated permutation such as `"lambda,a,q,p"`.
pub fn parse_order(text: &str) -> Result<[Coordinate; 4]> {
    let parsed: Vec<Coordinate> = text.split(',').map(str::parse).collect::<Result<_>>()?;
    let order: [Coordinate; 4] = parsed
        .try_into()
        .map_err(|_| Error::Config(format!("order {text:?} must name exactly four coordinates")))?;
    for c in Coordinate::DEFAULT_ORDER {
        if !order.contains(&c) {
            return Err(Error::Config(format!("order {text:?} is missing {c}")));
        }
    }
    Ok(order)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub leakage: f64,
    pub spectral_radius: f64,
    pub bias_scale: f64,
    pub input_scale: f64,
}

impl Cell {
    pub fn get(&self, c: Coordinate) -> f64 {
        match c {
            Coordinate::Leakage => self.leakage,
            Coordinate::SpectralRadius => self.spectral_radius,
            Coordinate::BiasScale => self.bias_scale,
            Coordinate::InputScale => self.input_scale,
        }
    }

    pub fn with(mut self, c: Coordinate, value: f64) -> Self {
        match c {
            Coordinate::Leakage => self.leakage = value,
            Coordinate::SpectralRadius => self.spectral_radius = value,
            Coordinate::BiasScale => self.bias_scale = value,
            Coordinate::InputScale => self.input_scale = value,
        }
        self
    }

    fn key(&self) -> [u64; 4] {
        [
            self.leakage.to_bits(),
            self.spectral_radius.to_bits(),
            self.bias_scale.to_bits(),
            self.input_scale.to_bits(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneGrid {
    pub leakage: Vec<f64>,
    pub spectral_radius: Vec<f64>,
    pub bias_scale: Vec<f64>,
    pub input_scale: Vec<f64>,
    /// Starting point. The leakage entry is only used when leakage is not
    /// the first coordinate scanned, and as the incumbent for tie-breaking
    /// in the first leakage scan.
    pub initial: Cell,
}

/// `steps` values `first, first + 1/denominator, ...` computed as exact
/// quotients so that e.g. 0.75 is the double nearest to 3/4.
fn quotient_grid(first: u32, last: u32, denominator: f64) -> Vec<f64> {
    (first..=last).map(|i| f64::from(i) / denominator).collect()
}

impl Default for TuneGrid {
    fn default() -> Self {
        Self {
            leakage: quotient_grid(0, 20, 20.0),
            spectral_radius: quotient_grid(1, 20, 20.0),
            bias_scale: quotient_grid(0, 20, 2.0),
            input_scale: quotient_grid(1, 20, 2.0),
            initial: Cell {
                leakage: 1.0,
                spectral_radius: 0.05,
                bias_scale: 0.0,
                input_scale: 0.5,
            },
        }
    }
}

impl TuneGrid {
    pub fn values(&self, c: Coordinate) -> &[f64] {
        match c {
            Coordinate::Leakage => &self.leakage,
            Coordinate::SpectralRadius => &self.spectral_radius,
            Coordinate::BiasScale => &self.bias_scale,
            Coordinate::InputScale => &self.input_scale,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for c in Coordinate::DEFAULT_ORDER {
            let values = self.values(c);
            if values.is_empty() {
                return Err(Error::Config(format!("grid for {c} is empty")));
            }
            if !values.contains(&self.initial.get(c)) {
                return Err(Error::Config(format!(
                    "initial {c} = {} is not on its grid",
                    self.initial.get(c)
                )));
            }
        }
        Ok(())
    }
}

/// Anything that scores a hyperparameter cell in dB (higher is better).
pub trait Objective: Sync {
    fn gain_db(&self, cell: &Cell) -> Result<f64>;
}

/// Fixed data and reservoir sizes for a tuning run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub alpha: f64,
    pub snr_in_db: f64,
    pub seed: u64,
    pub n_reservoir: usize,
    pub transient: usize,
    pub train_len: usize,
    pub eval_len: usize,
}

impl ScenarioSpec {
    /// alpha = 0.1, 2 dB input SNR, N = 500, 200 + 25 000 training samples and
    /// the reduced 10^5-sample evaluation window.
    pub fn reference(seed: u64) -> Self {
        Self {
            alpha: 0.1,
            snr_in_db: 2.0,
            seed,
            n_reservoir: 500,
            transient: 200,
            train_len: 25_000,
            eval_len: 100_000,
        }
    }

    /// Desk-scale variant: N = 100, 200 + 5000 training samples, 10^5
    /// evaluation samples.
    pub fn quick(seed: u64) -> Self {
        Self {
            n_reservoir: 100,
            train_len: 5_000,
            ..Self::reference(seed)
        }
    }

    /// Evaluation window extending to 10^6 samples after the transient.
    pub fn full_length(self) -> Self {
        Self {
            eval_len: 1_000_000 - self.train_len,
            ..self
        }
    }
}

/// A fixed training/evaluation record plus one reservoir draw reused for
/// every evaluated cell, so the objective is deterministic.
pub struct Scenario {
    pub spec: ScenarioSpec,
    pub d0: f64,
    u: Vec<f64>,
    d: Vec<f64>,
    draw: ReservoirDraw,
    weights_seed: u64,
}

impl Scenario {
    pub fn new(spec: ScenarioSpec) -> Result<Self> {
        let d0 = seed::rng(seed::derive(&[spec.seed, 1])).random_range(-0.99..0.99);
        let len = spec.transient + spec.train_len + spec.eval_len;
        let orbit = generate_orbit(MapParams::new(spec.alpha, d0)?, len)?;
        let noise = NoiseSpec::new(spec.snr_in_db, seed::derive(&[spec.seed, 2]))?;
        let signal = corrupt(&orbit.samples, &noise)?;
        let weights_seed = seed::derive(&[spec.seed, 3]);
        let draw = ReservoirDraw::sample(spec.n_reservoir, 1, weights_seed)?;
        Ok(Self {
            spec,
            d0,
            u: signal.u,
            d: signal.d,
            draw,
            weights_seed,
        })
    }

    fn config(&self, cell: &Cell) -> EsnConfig {
        EsnConfig {
            n_reservoir: self.spec.n_reservoir,
            n_inputs: 1,
            n_outputs: 1,
            leakage: cell.leakage,
            spectral_radius: cell.spectral_radius,
            bias_scale: cell.bias_scale,
            input_scale: cell.input_scale,
            transient: self.spec.transient,
            train_len: self.spec.train_len,
            seed: self.weights_seed,
        }
    }
}

/// Trains a fresh readout for `cell` on the scenario and returns the
/// processing gain on its evaluation window. Zero leakage and a dead
/// reservoir give `f64::NEG_INFINITY`.
pub fn evaluate_cell(cell: &Cell, scenario: &Scenario) -> Result<f64> {
    if cell.leakage == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let config = scenario.config(cell);
    let weights = scenario
        .draw
        .scaled(cell.bias_scale, cell.input_scale, cell.spectral_radius);
    let mut net = match TrainedEsn::train_with_weights(&config, weights, column(&scenario.u), column(&scenario.d)) {
        Ok(net) => net,
        Err(Error::DeadReservoir { .. }) => return Ok(f64::NEG_INFINITY),
        Err(e) => return Err(e),
    };
    let start = config.training_record_len();
    let y = net.run_scalar(&scenario.u[start..])?;
    let snr = snr_out(&y, &scenario.d[start..], 0..y.len())?;
    gain_db(snr, scenario.spec.snr_in_db)
}

impl Objective for Scenario {
    fn gain_db(&self, cell: &Cell) -> Result<f64> {
        evaluate_cell(cell, self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub cycle: usize,
    pub scan: usize,
    pub coordinate: Coordinate,
    pub cell: Cell,
    pub gain_db: f64,
}

/// State after one coordinate scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    /// 1-based full-cycle counter.
    pub cycle: usize,
    /// 1-based counter over all scans.
    pub scan: usize,
    pub coordinate: Coordinate,
    pub cell: Cell,
    pub gain_db: f64,
    pub changed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneTrace {
    pub order: [Coordinate; 4],
    pub scans: Vec<ScanRecord>,
    pub evaluations: Vec<Evaluation>,
    pub converged: bool,
    /// Completed full cycles.
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneOutcome {
    pub best: Cell,
    pub gain_db: f64,
    pub trace: TuneTrace,
}

fn gains_tie(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= TIE_TOLERANCE_DB
}

/// Picks the scan winner: highest gain; on a tie the incumbent value is kept
/// if it is among the best, otherwise the smallest tied value wins.
fn select(values: &[f64], gains: &[f64], incumbent: f64) -> usize {
    let best = gains.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<usize> = (0..values.len()).filter(|&i| gains_tie(gains[i], best)).collect();
    if let Some(&i) = tied.iter().find(|&&i| values[i] == incumbent) {
        return i;
    }
    tied.into_iter()
        .min_by(|&i, &j| values[i].total_cmp(&values[j]))
        .unwrap_or(0)
}

pub fn coordinate_descent(
    grid: &TuneGrid,
    objective: &dyn Objective,
    order: [Coordinate; 4],
    max_cycles: usize,
) -> Result<TuneOutcome> {
    grid.validate()?;
    let cache: Mutex<HashMap<[u64; 4], f64>> = Mutex::new(HashMap::new());
    let score = |cell: &Cell| -> Result<f64> {
        if let Some(&g) = cache.lock().expect("cache poisoned").get(&cell.key()) {
            return Ok(g);
        }
        let g = objective.gain_db(cell)?;
        let g = if g.is_nan() { f64::NEG_INFINITY } else { g };
        cache.lock().expect("cache poisoned").insert(cell.key(), g);
        Ok(g)
    };

    let mut current = grid.initial;
    let mut current_gain = f64::NEG_INFINITY;
    let mut trace = TuneTrace {
        order,
        scans: Vec::new(),
        evaluations: Vec::new(),
        converged: false,
        iterations: 0,
    };

    for cycle in 1..=max_cycles {
        let mut cycle_changed = false;
        for &coordinate in &order {
            let scan = trace.scans.len() + 1;
            let values = grid.values(coordinate);
            let gains: Vec<f64> = values
                .par_iter()
                .map(|&v| score(&current.with(coordinate, v)))
                .collect::<Result<_>>()?;
            for (&v, &g) in values.iter().zip(&gains) {
                trace.evaluations.push(Evaluation {
                    cycle,
                    scan,
                    coordinate,
                    cell: current.with(coordinate, v),
                    gain_db: g,
                });
            }
            let winner = select(values, &gains, current.get(coordinate));
            let changed = values[winner] != current.get(coordinate);
            cycle_changed |= changed;
            current = current.with(coordinate, values[winner]);
            current_gain = gains[winner];
            trace.scans.push(ScanRecord {
                cycle,
                scan,
                coordinate,
                cell: current,
                gain_db: current_gain,
                changed,
            });
        }
        trace.iterations = cycle;
        if !cycle_changed {
            trace.converged = true;
            break;
        }
    }

    Ok(TuneOutcome {
        best: current,
        gain_db: current_gain,
        trace,
    })
}

/// One row per evaluated cell in evaluation order, then a `summary` row
/// with the selected cell and, if given, a `revalidated` row with its gain
/// on a longer evaluation window.
pub fn trace_csv(outcome: &TuneOutcome, revalidated_gain_db: Option<f64>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["kind", "cycle", "scan", "coordinate", "leakage", "spectral_radius", "bias_scale", "input_scale", "gain_db"])?;
    let row = |kind: &str, cycle: usize, scan: usize, coordinate: String, cell: &Cell, gain: f64| {
        vec![
            kind.to_string(),
            cycle.to_string(),
            scan.to_string(),
            coordinate,
            cell.leakage.to_string(),
            cell.spectral_radius.to_string(),
            cell.bias_scale.to_string(),
            cell.input_scale.to_string(),
            gain.to_string(),
        ]
    };
    for e in &outcome.trace.evaluations {
        w.write_record(row("eval", e.cycle, e.scan, e.coordinate.to_string(), &e.cell, e.gain_db))?;
    }
    let status = if outcome.trace.converged { "converged" } else { "capped" };
    w.write_record(row(
        "summary",
        outcome.trace.iterations,
        outcome.trace.scans.len(),
        status.to_string(),
        &outcome.best,
        outcome.gain_db,
    ))?;
    if let Some(gain) = revalidated_gain_db {
        w.write_record(row("revalidated", outcome.trace.iterations, outcome.trace.scans.len(), status.to_string(), &outcome.best, gain))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8_lossy(&bytes).into_owned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    /// Separable concave quadratic with its maximum off the grid.
    struct Quadratic {
        center: [f64; 4],
        weight: [f64; 4],
        calls: AtomicUsize,
    }

    impl Quadratic {
        fn value(&self, cell: &Cell) -> f64 {
            let x = [cell.leakage, cell.spectral_radius, cell.bias_scale, cell.input_scale];
            -(0..4).map(|i| self.weight[i] * (x[i] - self.center[i]).powi(2)).sum::<f64>()
        }
    }

    impl Objective for Quadratic {
        fn gain_db(&self, cell: &Cell) -> Result<f64> {
            self.calls.fetch_add(1, Ordering::Relaxed);
            Ok(self.value(cell))
        }
    }

    fn stub() -> Quadratic {
        Quadratic {
            center: [0.63, 0.41, 3.3, 6.8],
            weight: [3.0, 5.0, 0.2, 0.1],
            calls: AtomicUsize::new(0),
        }
    }

    #[test]
    fn grids_match_tuning_procedure() {
        let g = TuneGrid::default();
        assert_eq!(g.leakage.len(), 21);
        assert_eq!((g.leakage[0], g.leakage[20]), (0.0, 1.0));
        assert_eq!(g.spectral_radius.len(), 20);
        assert_eq!((g.spectral_radius[0], g.spectral_radius[19]), (0.05, 1.0));
        assert_eq!(g.bias_scale.len(), 21);
        assert_eq!((g.bias_scale[0], g.bias_scale[20]), (0.0, 10.0));
        assert_eq!(g.input_scale.len(), 20);
        assert_eq!((g.input_scale[0], g.input_scale[19]), (0.5, 10.0));
        assert!(g.leakage.contains(&0.8));
        assert!(g.spectral_radius.contains(&0.75));
        assert!(g.bias_scale.contains(&1.5));
        assert!(g.input_scale.contains(&1.0));
        assert_eq!(g.initial.spectral_radius, 0.05);
        assert_eq!(g.initial.bias_scale, 0.0);
        assert_eq!(g.initial.input_scale, 0.5);
        assert!(g.validate().is_ok());
    }

    #[test]
    fn quadratic_stub_matches_brute_force() {
        let grid = TuneGrid::default();
        let objective = stub();
        let outcome = coordinate_descent(&grid, &objective, Coordinate::DEFAULT_ORDER, DEFAULT_MAX_CYCLES).unwrap();

        // brute-force oracle over the whole 4-D grid
        let mut best = (f64::NEG_INFINITY, grid.initial);
        for &a in &grid.leakage {
            for &l in &grid.spectral_radius {
                for &p in &grid.bias_scale {
                    for &q in &grid.input_scale {
                        let cell = Cell { leakage: a, spectral_radius: l, bias_scale: p, input_scale: q };
                        let g = objective.value(&cell);
                        if g > best.0 {
                            best = (g, cell);
                        }
                    }
                }
            }
        }
        assert_eq!(outcome.best, best.1);
        assert!(outcome.trace.converged);
        assert!(outcome.trace.iterations <= 3, "{}", outcome.trace.iterations);
        assert_eq!(outcome.gain_db, best.0);
    }

    #[test]
    fn trace_csv_has_one_row_per_evaluation() {
        let outcome = coordinate_descent(&TuneGrid::default(), &stub(), Coordinate::DEFAULT_ORDER, DEFAULT_MAX_CYCLES).unwrap();
        let text = trace_csv(&outcome, Some(1.5)).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1 + outcome.trace.evaluations.len() + 2);
        assert!(lines[0].starts_with("kind,cycle,scan,coordinate"));
        assert!(lines[lines.len() - 2].starts_with("summary,"));
        assert!(lines[lines.len() - 1].starts_with("revalidated,") && lines[lines.len() - 1].ends_with(",1.5"));
        assert_eq!(trace_csv(&outcome, None).unwrap().lines().count(), lines.len() - 1);
    }

    #[test]
    fn cached_cells_are_not_recomputed() {
        let objective = stub();
        let outcome =
            coordinate_descent(&TuneGrid::default(), &objective, Coordinate::DEFAULT_ORDER, DEFAULT_MAX_CYCLES).unwrap();
        let evaluated = outcome.trace.evaluations.len();
        let distinct = objective.calls.load(Ordering::Relaxed);
        assert!(distinct < evaluated);
        // every scan after the first re-visits its incumbent
        assert!(distinct <= evaluated - (outcome.trace.scans.len() - 1));
    }

    #[test]
    fn best_gain_never_decreases() {
        let outcome =
            coordinate_descent(&TuneGrid::default(), &stub(), [Coordinate::InputScale, Coordinate::Leakage, Coordinate::BiasScale, Coordinate::SpectralRadius], 50)
                .unwrap();
        for pair in outcome.trace.scans.windows(2) {
            assert!(pair[1].gain_db >= pair[0].gain_db);
        }
    }

    #[test]
    fn permuted_order_reaches_same_separable_optimum() {
        let a = coordinate_descent(&TuneGrid::default(), &stub(), Coordinate::DEFAULT_ORDER, 50).unwrap();
        let order = parse_order("q,p,lambda,a").unwrap();
        let b = coordinate_descent(&TuneGrid::default(), &stub(), order, 50).unwrap();
        assert_eq!(a.best, b.best);
    }

    #[test]
    fn iteration_cap_reports_not_converged() {
        let outcome = coordinate_descent(&TuneGrid::default(), &stub(), Coordinate::DEFAULT_ORDER, 1).unwrap();
        assert!(!outcome.trace.converged);
        assert_eq!(outcome.trace.iterations, 1);
        assert_eq!(outcome.trace.scans.len(), 4);
    }

    #[test]
    fn tie_breaking() {
        let values = [0.0, 0.5, 1.0, 1.5];
        // incumbent among the tied best stays
        assert_eq!(select(&values, &[1.0, 2.0, 2.0 + 1e-12, 0.0], 1.0), 2);
        // otherwise the smallest tied value
        assert_eq!(select(&values, &[1.0, 2.0, 2.0, 0.0], 0.0), 1);
        // all untrainable: incumbent kept
        let ninf = f64::NEG_INFINITY;
        assert_eq!(select(&values, &[ninf; 4], 1.5), 3);
        assert_eq!(select(&values, &[ninf; 4], 9.0), 0);
    }

    #[test]
    fn order_parsing() {
        assert_eq!(parse_order("a,lambda,p,q").unwrap(), Coordinate::DEFAULT_ORDER);
        assert!(parse_order("a,a,p,q").is_err());
        assert!(parse_order("a,lambda,p").is_err());
        assert!(parse_order("a,lambda,p,x").is_err());
    }

    #[test]
    fn grid_validation() {
        let mut g = TuneGrid::default();
        g.initial.bias_scale = 0.3;
        assert!(g.validate().is_err());
        let mut g = TuneGrid::default();
        g.input_scale.clear();
        assert!(g.validate().is_err());
    }

    fn tiny_scenario() -> Scenario {
        Scenario::new(ScenarioSpec {
            alpha: 0.1,
            snr_in_db: 2.0,
            seed: 5,
            n_reservoir: 20,
            transient: 50,
            train_len: 400,
            eval_len: 2000,
        })
        .unwrap()
    }

    #[test]
    fn zero_leakage_is_untrainable() {
        let s = tiny_scenario();
        let cell = Cell { leakage: 0.0, spectral_radius: 0.5, bias_scale: 1.0, input_scale: 1.0 };
        assert_eq!(evaluate_cell(&cell, &s).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn cell_evaluation_is_deterministic() {
        let s = tiny_scenario();
        let cell = Cell { leakage: 0.8, spectral_radius: 0.75, bias_scale: 1.5, input_scale: 1.0 };
        let g1 = evaluate_cell(&cell, &s).unwrap();
        let g2 = evaluate_cell(&cell, &tiny_scenario()).unwrap();
        assert_eq!(g1.to_bits(), g2.to_bits());
        assert!(g1.is_finite());
    }

    #[test]
    fn trace_gains_match_reevaluation() {
        let s = tiny_scenario();
        let grid = TuneGrid {
            leakage: vec![0.0, 0.5, 1.0],
            spectral_radius: vec![0.05, 0.5, 0.9],
            bias_scale: vec![0.0, 1.0],
            input_scale: vec![0.5, 1.0, 2.0],
            initial: Cell { leakage: 1.0, spectral_radius: 0.05, bias_scale: 0.0, input_scale: 0.5 },
        };
        let outcome = coordinate_descent(&grid, &s, Coordinate::DEFAULT_ORDER, 10).unwrap();
        for record in &outcome.trace.scans {
            let again = evaluate_cell(&record.cell, &s).unwrap();
            assert_eq!(again.to_bits(), record.gain_db.to_bits());
        }
        for pair in outcome.trace.scans.windows(2) {
            assert!(pair[1].gain_db >= pair[0].gain_db);
        }
    }
}
