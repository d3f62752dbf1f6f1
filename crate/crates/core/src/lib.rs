//! Denoising of skew tent map chaotic signals with a leaky-integrator echo
//! state network, benchmarked against an FIR Wiener filter.
//!
//! The pipeline is: generate a clean orbit ([`chaos`]), corrupt it with
//! white Gaussian noise ([`noise`]), train the reservoir readout by
//! pseudoinverse ([`esn`]) and a Toeplitz Wiener filter ([`wiener`]) on the
//! same training window, then score both on a held-out window ([`metrics`]).
//! [`tuning`] selects the reservoir hyperparameters by cyclic coordinate
//! descent and [`experiment`] runs the processing-gain sweep over the map
//! parameter.

pub mod chaos;
pub mod error;
pub mod esn;
pub mod experiment;
pub mod io;
pub mod metrics;
pub mod noise;
pub mod seed;
pub mod tuning;
pub mod wiener;

pub use error::{Error, Result};
