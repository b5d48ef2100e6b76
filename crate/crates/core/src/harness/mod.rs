//! Test problems, noise, metrics and file formats for running experiments.

mod metrics;
mod noise;
mod pgm;
mod report;
mod signals;
mod tables;

pub use metrics::{metrics, Metrics};
pub use noise::{add_noise_bsnr, measured_bsnr, sample_variance};
pub use pgm::{read_pgm, write_pgm, GrayImage, PgmFormat};
pub use report::{Estimates, RunReport, SCHEMA_VERSION};
pub use signals::{make_image_2d, make_signal_1d, shepp_logan_ellipses, Ellipse, ImageKind, SignalKind};
pub use tables::{read_columns_csv, read_signal_csv, write_columns_csv, write_image_csv, write_signal_csv};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed file at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("csv: {0}")]
    Csv(String),
    #[error("json: {0}")]
    Json(String),
    #[error("{0}")]
    Invalid(String),
}

impl HarnessError {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.display().to_string(), source }
    }
}
