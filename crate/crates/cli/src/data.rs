//! Reading inputs and writing outputs.
//!
//! 1-D signals are single-column CSV. Images are written twice: a PGM for
//! viewing and a full-precision CSV table (one lattice row per record),
//! since 8-bit quantisation is coarser than the noise at typical BSNRs.

use anyhow::{Context, Result};
use std::path::{Path, PathBuf};
use tvbayes::harness::{
    read_columns_csv, read_pgm, write_image_csv, write_pgm, write_signal_csv, GrayImage, PgmFormat,
};
use tvbayes::{Kernel, LatticeSpec};

use crate::exit::Usage;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    Line,
    Image,
}

#[derive(Clone, Debug)]
pub struct Data {
    pub lattice: LatticeSpec,
    pub shape: Shape,
    /// Column-stacked values.
    pub values: Vec<f64>,
}

impl Data {
    pub fn new(lattice: LatticeSpec, shape: Shape, values: Vec<f64>) -> Self {
        Data { lattice, shape, values }
    }

    pub fn with_values(&self, values: Vec<f64>) -> Self {
        Data { lattice: self.lattice, shape: self.shape, values }
    }
}

pub fn load(path: &Path) -> Result<Data> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
    match ext.as_str() {
        "pgm" => {
            let img = read_pgm(path).with_context(|| format!("reading {}", path.display()))?;
            let lattice = img.lattice()?;
            Ok(Data::new(lattice, Shape::Image, img.to_stacked()?))
        }
        "csv" => {
            let cols = read_columns_csv(path).with_context(|| format!("reading {}", path.display()))?;
            let rows = cols.first().map(Vec::len).unwrap_or(0);
            if rows == 0 {
                return Err(Usage(format!("{} holds no samples", path.display())).into());
            }
            if cols.len() == 1 {
                let lattice = LatticeSpec::line(rows)?;
                Ok(Data::new(lattice, Shape::Line, cols.into_iter().next().unwrap_or_default()))
            } else {
                let lattice = LatticeSpec::new(rows, cols.len())?;
                Ok(Data::new(lattice, Shape::Image, cols.concat()))
            }
        }
        _ => Err(Usage(format!("{}: expected a .csv or .pgm file", path.display())).into()),
    }
}

/// `prefix` joined onto `out_dir` unless it is absolute; parent directories
/// are created.
pub fn resolve_prefix(out_dir: &Path, prefix: &str) -> Result<PathBuf> {
    let p = Path::new(prefix);
    let full = if p.is_absolute() { p.to_path_buf() } else { out_dir.join(p) };
    if let Some(parent) = full.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
    }
    Ok(full)
}

/// `prefix` with `_suffix` appended to its file name.
pub fn sibling(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(format!("_{suffix}"));
    prefix.with_file_name(name)
}

/// Writes `data` under `prefix_name.{csv,pgm}` and returns the paths.
pub fn save(prefix: &Path, name: &str, data: &Data, format: PgmFormat) -> Result<Vec<PathBuf>> {
    let csv = sibling(prefix, &format!("{name}.csv"));
    match data.shape {
        Shape::Line => {
            write_signal_csv(&csv, name, &data.values)?;
            Ok(vec![csv])
        }
        Shape::Image => {
            write_image_csv(&csv, data.lattice, &data.values)?;
            let pgm = sibling(prefix, &format!("{name}.pgm"));
            write_pgm(&pgm, &GrayImage::from_stacked(data.lattice, &data.values)?, format)?;
            Ok(vec![csv, pgm])
        }
    }
}

/// Gaussian blur kernel matching the data shape; size 1 is the identity.
pub fn kernel(shape: Shape, size: usize, sigma: Option<f64>) -> Result<Kernel> {
    if size == 1 {
        return Ok(Kernel::identity());
    }
    let k = match shape {
        Shape::Line => Kernel::gaussian_1d(size, sigma)?,
        Shape::Image => Kernel::gaussian(size, sigma)?,
    };
    Ok(k)
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
