//! Versioned JSON container for a trained network.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use faer::Mat;
use serde::{Deserialize, Serialize};

use super::{EsnConfig, EsnState, EsnWeights, TrainedEsn};
use crate::error::{Error, Result};

pub const MODEL_MAGIC: &str = "ESN-DENOISE-MODEL";
pub const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DenseMatrix {
    rows: usize,
    cols: usize,
    /// Row-major entries.
    data: Vec<f64>,
}

impl DenseMatrix {
    fn from_mat(m: &Mat<f64>) -> Self {
        let mut data = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            data.extend((0..m.ncols()).map(|j| m[(i, j)]));
        }
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }

    fn into_mat(self, name: &str) -> Result<Mat<f64>> {
        if self.data.len() != self.rows * self.cols {
            return Err(Error::Model(format!(
                "{name}: {} entries for a {}x{} matrix",
                self.data.len(),
                self.rows,
                self.cols
            )));
        }
        Ok(Mat::from_fn(self.rows, self.cols, |i, j| self.data[i * self.cols + j]))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    magic: String,
    version: u32,
    config: EsnConfig,
    seed: u64,
    w_in: DenseMatrix,
    w: DenseMatrix,
    w_out: DenseMatrix,
    state: EsnState,
}

pub fn save_model(model: &TrainedEsn, path: impl AsRef<Path>) -> Result<()> {
    let file = ModelFile {
        magic: MODEL_MAGIC.to_string(),
        version: MODEL_VERSION,
        config: model.config,
        seed: model.config.seed,
        w_in: DenseMatrix::from_mat(&model.weights.w_in),
        w: DenseMatrix::from_mat(&model.weights.w),
        w_out: DenseMatrix::from_mat(&model.w_out),
        state: model.state.clone(),
    };
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut out, &file)?;
    out.flush()?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<TrainedEsn> {
    let file: ModelFile = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    if file.magic != MODEL_MAGIC {
        return Err(Error::Model(format!("bad magic string {:?}", file.magic)));
    }
    if file.version != MODEL_VERSION {
        return Err(Error::Model(format!("unsupported version {}", file.version)));
    }
    let config = file.config;
    config.validate()?;
    let weights = EsnWeights {
        w_in: file.w_in.into_mat("w_in")?,
        w: file.w.into_mat("w")?,
    };
    let w_out = file.w_out.into_mat("w_out")?;
    let n = config.n_reservoir;
    let shapes_ok = weights.w.nrows() == n
        && weights.w.ncols() == n
        && weights.w_in.nrows() == n
        && weights.w_in.ncols() == config.n_inputs + 1
        && w_out.nrows() == config.n_outputs
        && w_out.ncols() == n
        && file.state.r.len() == n;
    if !shapes_ok {
        return Err(Error::Model("matrix shapes disagree with the stored config".into()));
    }
    Ok(TrainedEsn {
        config,
        weights,
        w_out,
        state: file.state,
    })
}
