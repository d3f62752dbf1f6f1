//! Leaky-integrator echo state network with a pseudoinverse-trained readout.
//!
//! Signals are passed as `MatRef`s with one row per time step and one column
//! per channel. The reservoir starts from the zero state, runs `transient`
//! updates that are discarded, then records `train_len` states as the columns
//! of the trajectory matrix. The state reached after consuming input `n` is
//! paired with desired sample `n` (denoising, not prediction).

mod model;
mod readout;
mod spectral;

pub use model::{load_model, save_model, MODEL_MAGIC, MODEL_VERSION};
pub use readout::{pseudoinverse_cutoff, train_readout};
pub use spectral::spectral_radius;

use faer::{Mat, MatRef};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// Largest |entry| below which a trajectory is treated as identically zero.
pub const DEAD_RESERVOIR_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EsnConfig {
    pub n_reservoir: usize,
    pub n_inputs: usize,
    pub n_outputs: usize,
    pub leakage: f64,
    pub spectral_radius: f64,
    pub bias_scale: f64,
    pub input_scale: f64,
    pub transient: usize,
    pub train_len: usize,
    pub seed: u64,
}

impl Default for EsnConfig {
    /// Scalar denoiser with the tuned hyperparameters (a, lambda, p, q) =
    /// (0.80, 0.75, 1.50, 1.00), N = 500, 200 transient and 25 000 training samples.
    fn default() -> Self {
        Self {
            n_reservoir: 500,
            n_inputs: 1,
            n_outputs: 1,
            leakage: 0.80,
            spectral_radius: 0.75,
            bias_scale: 1.50,
            input_scale: 1.00,
            transient: 200,
            train_len: 25_000,
            seed: 0,
        }
    }
}

impl EsnConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.n_reservoir == 0 {
            return fail("n_reservoir must be at least 1".into());
        }
        if self.n_inputs == 0 || self.n_outputs == 0 {
            return fail("n_inputs and n_outputs must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.leakage) {
            return fail(format!("leakage {} is outside [0, 1]", self.leakage));
        }
        if !(self.spectral_radius > 0.0 && self.spectral_radius.is_finite()) {
            return fail(format!("spectral_radius {} must be positive", self.spectral_radius));
        }
        if !(self.bias_scale >= 0.0 && self.bias_scale.is_finite()) {
            return fail(format!("bias_scale {} must be non-negative", self.bias_scale));
        }
        if !(self.input_scale >= 0.0 && self.input_scale.is_finite()) {
            return fail(format!("input_scale {} must be non-negative", self.input_scale));
        }
        if self.train_len < self.n_reservoir {
            return fail(format!(
                "train_len {} is smaller than n_reservoir {}",
                self.train_len, self.n_reservoir
            ));
        }
        Ok(())
    }

    /// Inputs consumed by transient plus training.
    pub fn training_record_len(&self) -> usize {
        self.transient + self.train_len
    }
}

/// Fixed input and internal matrices of a reservoir.
#[derive(Debug, Clone, PartialEq)]
pub struct EsnWeights {
    /// N x (N_u + 1); column 0 multiplies the constant bias input.
    pub w_in: Mat<f64>,
    /// N x N internal matrix.
    pub w: Mat<f64>,
}

impl EsnWeights {
    pub fn n_reservoir(&self) -> usize {
        self.w.nrows()
    }

    pub fn n_inputs(&self) -> usize {
        self.w_in.ncols() - 1
    }

    fn check(&self) -> Result<()> {
        let n = self.w.nrows();
        if self.w.ncols() != n || self.w_in.nrows() != n || self.w_in.ncols() < 2 {
            return Err(Error::Dimension(format!(
                "w is {}x{}, w_in is {}x{}",
                self.w.nrows(),
                self.w.ncols(),
                self.w_in.nrows(),
                self.w_in.ncols()
            )));
        }
        Ok(())
    }
}

/// Unscaled random draw of a reservoir: every input weight uniform on
/// [-1, 1] and the internal matrix normalized to unit spectral radius.
///
/// Scaling a draw by (p, q, lambda) gives the same distribution as sampling
/// directly from [-p, p], [-q, q] and rescaling to radius lambda, so one
/// draw can be reused across hyperparameter cells.
#[derive(Debug, Clone)]
pub struct ReservoirDraw {
    input_unit: Mat<f64>,
    internal_unit: Mat<f64>,
    aux_radius: f64,
}

impl ReservoirDraw {
    pub fn sample(n_reservoir: usize, n_inputs: usize, seed: u64) -> Result<Self> {
        let mut rng = seed::rng(seed);
        let input_unit = Mat::from_fn(n_reservoir, n_inputs + 1, |_, _| rng.random_range(-1.0..=1.0));
        let mut draw_aux = || Mat::from_fn(n_reservoir, n_reservoir, |_, _| rng.random_range(-1.0..=1.0));

        let mut aux = draw_aux();
        let mut rho = spectral_radius(aux.as_ref())?;
        if rho == 0.0 {
            aux = draw_aux();
            rho = spectral_radius(aux.as_ref())?;
            if rho == 0.0 {
                return Err(Error::ZeroSpectralRadius);
            }
        }
        let internal_unit = Mat::from_fn(n_reservoir, n_reservoir, |i, j| aux[(i, j)] / rho);
        Ok(Self {
            input_unit,
            internal_unit,
            aux_radius: rho,
        })
    }

    /// Spectral radius of the auxiliary matrix before normalization.
    pub fn aux_radius(&self) -> f64 {
        self.aux_radius
    }

    pub fn scaled(&self, bias_scale: f64, input_scale: f64, spectral_radius: f64) -> EsnWeights {
        let w_in = Mat::from_fn(self.input_unit.nrows(), self.input_unit.ncols(), |i, j| {
            let scale = if j == 0 { bias_scale } else { input_scale };
            scale * self.input_unit[(i, j)]
        });
        let w = Mat::from_fn(self.internal_unit.nrows(), self.internal_unit.ncols(), |i, j| {
            spectral_radius * self.internal_unit[(i, j)]
        });
        EsnWeights { w_in, w }
    }
}

/// Samples the input and internal matrices for `config`.
pub fn init_weights(config: &EsnConfig) -> Result<EsnWeights> {
    config.validate()?;
    let draw = ReservoirDraw::sample(config.n_reservoir, config.n_inputs, config.seed)?;
    Ok(draw.scaled(config.bias_scale, config.input_scale, config.spectral_radius))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EsnState {
    pub r: Vec<f64>,
    /// Time index of `r`. The zero state of a run with transient `l` sits at
    /// `-l`, so the first recorded training state is at index 1.
    pub clock: i64,
}

impl EsnState {
    pub fn zeros(n: usize, clock: i64) -> Self {
        Self {
            r: vec![0.0; n],
            clock,
        }
    }
}

/// One leaky-integrator update; returns the next state.
pub fn update_state(state: &EsnState, weights: &EsnWeights, u: &[f64], leakage: f64) -> Result<EsnState> {
    weights.check()?;
    if state.r.len() != weights.n_reservoir() || u.len() != weights.n_inputs() {
        return Err(Error::Dimension(format!(
            "state has {} entries and input {}, reservoir expects {} and {}",
            state.r.len(),
            u.len(),
            weights.n_reservoir(),
            weights.n_inputs()
        )));
    }
    let mut next = state.clone();
    Stepper::new(weights, leakage).step(&mut next.r, u);
    next.clock += 1;
    Ok(next)
}

/// Preallocated update kernel with the internal matrix stored row-major.
pub(crate) struct Stepper {
    n: usize,
    leakage: f64,
    rows: Vec<f64>,
    w_in: Mat<f64>,
    pre: Vec<f64>,
}

impl Stepper {
    pub(crate) fn new(weights: &EsnWeights, leakage: f64) -> Self {
        let n = weights.n_reservoir();
        let mut rows = Vec::with_capacity(n * n);
        for i in 0..n {
            rows.extend((0..n).map(|j| weights.w[(i, j)]));
        }
        Self {
            n,
            leakage,
            rows,
            w_in: weights.w_in.clone(),
            pre: vec![0.0; n],
        }
    }

    #[inline]
    pub(crate) fn step(&mut self, r: &mut [f64], u: &[f64]) {
        debug_assert_eq!(r.len(), self.n);
        for (i, pre) in self.pre.iter_mut().enumerate() {
            *pre = dot(&self.rows[i * self.n..(i + 1) * self.n], r);
        }
        let bias = self.w_in.col_as_slice(0);
        for (pre, b) in self.pre.iter_mut().zip(bias) {
            *pre += b;
        }
        for (j, &uj) in u.iter().enumerate() {
            for (pre, w) in self.pre.iter_mut().zip(self.w_in.col_as_slice(j + 1)) {
                *pre += w * uj;
            }
        }
        let a = self.leakage;
        for (ri, pre) in r.iter_mut().zip(&self.pre) {
            *ri = (1.0 - a) * *ri + a * pre.tanh();
        }
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 8];
    let mut ca = a.chunks_exact(8);
    let mut cb = b.chunks_exact(8);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    let mut tail = 0.0;
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        tail += x * y;
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

fn input_row(inputs: MatRef<'_, f64>, n: usize, buf: &mut [f64]) {
    for (j, slot) in buf.iter_mut().enumerate() {
        *slot = inputs[(n, j)];
    }
}

/// Wraps a scalar signal as a one-column matrix.
pub fn column(signal: &[f64]) -> MatRef<'_, f64> {
    MatRef::from_column_major_slice(signal, signal.len(), 1)
}

/// Runs the transient and training phases and returns the N x L trajectory
/// together with the state after the last training update.
pub fn collect_trajectory_with_state(
    weights: &EsnWeights,
    config: &EsnConfig,
    inputs: MatRef<'_, f64>,
) -> Result<(Mat<f64>, EsnState)> {
    weights.check()?;
    let needed = config.training_record_len();
    if inputs.nrows() < needed {
        return Err(Error::TooShort {
            needed,
            got: inputs.nrows(),
        });
    }
    if inputs.ncols() != weights.n_inputs() {
        return Err(Error::Dimension(format!(
            "input has {} channels, reservoir expects {}",
            inputs.ncols(),
            weights.n_inputs()
        )));
    }
    let n = weights.n_reservoir();
    let mut stepper = Stepper::new(weights, config.leakage);
    let mut state = EsnState::zeros(n, -(config.transient as i64));
    let mut u = vec![0.0; inputs.ncols()];
    let mut trajectory = Mat::zeros(n, config.train_len);

    for t in 0..config.transient {
        input_row(inputs, t, &mut u);
        stepper.step(&mut state.r, &u);
    }
    for col in 0..config.train_len {
        input_row(inputs, config.transient + col, &mut u);
        stepper.step(&mut state.r, &u);
        trajectory.col_as_slice_mut(col).copy_from_slice(&state.r);
    }
    state.clock += needed as i64;
    Ok((trajectory, state))
}

/// N x L matrix of training states `[r(1) ... r(L)]`.
pub fn collect_trajectory(weights: &EsnWeights, config: &EsnConfig, inputs: MatRef<'_, f64>) -> Result<Mat<f64>> {
    collect_trajectory_with_state(weights, config, inputs).map(|(t, _)| t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedEsn {
    pub config: EsnConfig,
    pub weights: EsnWeights,
    /// N_d x N readout.
    pub w_out: Mat<f64>,
    pub state: EsnState,
}

impl TrainedEsn {
    /// Samples weights from `config.seed`, drives the reservoir with the first
    /// `transient + train_len` rows of `inputs` and fits the readout to the
    /// matching rows of `desired`.
    pub fn train(config: &EsnConfig, inputs: MatRef<'_, f64>, desired: MatRef<'_, f64>) -> Result<Self> {
        let weights = init_weights(config)?;
        Self::train_with_weights(config, weights, inputs, desired)
    }

    pub fn train_with_weights(
        config: &EsnConfig,
        weights: EsnWeights,
        inputs: MatRef<'_, f64>,
        desired: MatRef<'_, f64>,
    ) -> Result<Self> {
        config.validate()?;
        if desired.ncols() != config.n_outputs {
            return Err(Error::Dimension(format!(
                "desired has {} channels, config expects {}",
                desired.ncols(),
                config.n_outputs
            )));
        }
        let needed = config.training_record_len();
        if desired.nrows() < needed {
            return Err(Error::TooShort {
                needed,
                got: desired.nrows(),
            });
        }
        let (trajectory, state) = collect_trajectory_with_state(&weights, config, inputs)?;
        let targets = desired
            .subrows(config.transient, config.train_len)
            .transpose()
            .to_owned();
        let w_out = train_readout(trajectory.as_ref(), targets.as_ref())?;
        Ok(Self {
            config: *config,
            weights,
            w_out,
            state,
        })
    }

    /// Drives the network from its current state and returns one output row
    /// per input row. The state is left after the last input.
    pub fn run(&mut self, inputs: MatRef<'_, f64>) -> Result<Mat<f64>> {
        if inputs.ncols() != self.weights.n_inputs() {
            return Err(Error::Dimension(format!(
                "input has {} channels, reservoir expects {}",
                inputs.ncols(),
                self.weights.n_inputs()
            )));
        }
        if self.w_out.ncols() != self.weights.n_reservoir() {
            return Err(Error::Dimension(format!(
                "readout has {} columns for {} reservoir nodes",
                self.w_out.ncols(),
                self.weights.n_reservoir()
            )));
        }
        let mut stepper = Stepper::new(&self.weights, self.config.leakage);
        let n_out = self.w_out.nrows();
        let readout_rows: Vec<Vec<f64>> = (0..n_out)
            .map(|k| (0..self.w_out.ncols()).map(|j| self.w_out[(k, j)]).collect())
            .collect();
        let mut u = vec![0.0; inputs.ncols()];
        let mut out = Mat::zeros(inputs.nrows(), n_out);
        for t in 0..inputs.nrows() {
            input_row(inputs, t, &mut u);
            stepper.step(&mut self.state.r, &u);
            for (k, row) in readout_rows.iter().enumerate() {
                out[(t, k)] = dot(row, &self.state.r);
            }
        }
        self.state.clock += inputs.nrows() as i64;
        Ok(out)
    }

    /// Scalar convenience wrapper around [`TrainedEsn::run`].
    pub fn run_scalar(&mut self, inputs: &[f64]) -> Result<Vec<f64>> {
        let out = self.run(column(inputs))?;
        Ok(out.col_as_slice(0).to_vec())
    }
}
