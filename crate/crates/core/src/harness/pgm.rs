//! Netpbm greymap I/O. Pixels are stored row-major as in the file; use
//! [`GrayImage::to_stacked`] / [`GrayImage::from_stacked`] to move to and
//! from the column-wise stacked vectors used by the operators.

use super::HarnessError;
use crate::operators::LatticeSpec;
use std::io::Write;
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PgmFormat {
    /// `P2`, ASCII samples.
    Ascii,
    /// `P5`, binary samples.
    Binary,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    /// Row-major intensities; files map `0..=maxval` onto `[0, 1]`.
    pub pixels: Vec<f64>,
}

impl GrayImage {
    pub fn lattice(&self) -> Result<LatticeSpec, HarnessError> {
        LatticeSpec::new(self.height, self.width).map_err(|e| HarnessError::Invalid(e.to_string()))
    }

    pub fn to_stacked(&self) -> Result<Vec<f64>, HarnessError> {
        self.lattice()?.stack_row_major(&self.pixels).map_err(|e| HarnessError::Invalid(e.to_string()))
    }

    pub fn from_stacked(lattice: LatticeSpec, stacked: &[f64]) -> Result<Self, HarnessError> {
        let pixels = lattice.unstack_row_major(stacked).map_err(|e| HarnessError::Invalid(e.to_string()))?;
        Ok(GrayImage { width: lattice.cols(), height: lattice.rows(), pixels })
    }

    /// Values after the 8-bit round trip.
    pub fn quantized(&self) -> Vec<f64> {
        self.pixels.iter().map(|v| quantize(*v) as f64 / 255.0).collect()
    }
}

fn quantize(v: f64) -> u8 {
    if v.is_nan() {
        0
    } else {
        (v.clamp(0.0, 1.0) * 255.0).round() as u8
    }
}

/// Writes with `maxval = 255`, clamping to `[0, 1]` first.
pub fn write_pgm(path: &Path, image: &GrayImage, format: PgmFormat) -> Result<(), HarnessError> {
    if image.pixels.len() != image.width * image.height {
        return Err(HarnessError::Invalid(format!(
            "image has {} pixels, expected {}x{}",
            image.pixels.len(),
            image.width,
            image.height
        )));
    }
    let mut buf = Vec::with_capacity(image.pixels.len() * 4 + 32);
    let magic = if format == PgmFormat::Ascii { "P2" } else { "P5" };
    write!(buf, "{magic}\n{} {}\n255\n", image.width, image.height).expect("write to Vec");
    match format {
        PgmFormat::Binary => buf.extend(image.pixels.iter().map(|v| quantize(*v))),
        PgmFormat::Ascii => {
            for row in image.pixels.chunks(image.width.max(1)) {
                let line: Vec<String> = row.iter().map(|v| quantize(*v).to_string()).collect();
                writeln!(buf, "{}", line.join(" ")).expect("write to Vec");
            }
        }
    }
    std::fs::write(path, buf).map_err(|e| HarnessError::io(path, e))
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn err(&self, message: impl Into<String>) -> HarnessError {
        HarnessError::Parse { offset: self.pos, message: message.into() }
    }

    /// Skip whitespace and `#` comments.
    fn skip_space(&mut self) {
        while self.pos < self.data.len() {
            match self.data[self.pos] {
                b'#' => {
                    while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize, HarnessError> {
        self.skip_space();
        let start = self.pos;
        while self.pos < self.data.len() && self.data[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return if self.pos >= self.data.len() {
                Err(self.err(format!("unexpected end of file while reading {what}")))
            } else {
                Err(self.err(format!("expected {what}, found byte 0x{:02x}", self.data[self.pos])))
            };
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .expect("ascii digits")
            .parse()
            .map_err(|_| HarnessError::Parse { offset: start, message: format!("{what} out of range") })
    }
}

pub fn read_pgm(path: &Path) -> Result<GrayImage, HarnessError> {
    let data = std::fs::read(path).map_err(|e| HarnessError::io(path, e))?;
    parse_pgm(&data)
}

pub(crate) fn parse_pgm(data: &[u8]) -> Result<GrayImage, HarnessError> {
    let mut c = Cursor { data, pos: 0 };
    if data.len() < 2 || data[0] != b'P' || !(data[1] == b'2' || data[1] == b'5') {
        return Err(c.err("missing P2/P5 magic number"));
    }
    let binary = data[1] == b'5';
    c.pos = 2;
    let width = c.number("width")?;
    let height = c.number("height")?;
    let maxval_at = c.pos;
    let maxval = c.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(HarnessError::Parse { offset: maxval_at, message: format!("empty image {width}x{height}") });
    }
    if maxval == 0 || maxval > 65535 {
        return Err(HarnessError::Parse { offset: maxval_at, message: format!("maxval {maxval} not in 1..=65535") });
    }
    let count = width * height;
    let scale = maxval as f64;
    let mut pixels = Vec::with_capacity(count);
    if binary {
        if c.pos >= data.len() || !data[c.pos].is_ascii_whitespace() {
            return Err(c.err("expected a single whitespace byte before the raster"));
        }
        c.pos += 1;
        let bytes = if maxval < 256 { 1 } else { 2 };
        let need = count * bytes;
        let have = data.len() - c.pos;
        if have < need {
            return Err(HarnessError::Parse {
                offset: data.len(),
                message: format!("truncated raster: {need} bytes expected, {have} present"),
            });
        }
        for k in 0..count {
            let at = c.pos + k * bytes;
            let v = if bytes == 1 { data[at] as usize } else { (data[at] as usize) << 8 | data[at + 1] as usize };
            if v > maxval {
                return Err(HarnessError::Parse { offset: at, message: format!("sample {v} exceeds maxval {maxval}") });
            }
            pixels.push(v as f64 / scale);
        }
    } else {
        for _ in 0..count {
            let at = c.pos;
            let v = c.number("pixel value")?;
            if v > maxval {
                return Err(HarnessError::Parse { offset: at, message: format!("sample {v} exceeds maxval {maxval}") });
            }
            pixels.push(v as f64 / scale);
        }
    }
    Ok(GrayImage { width, height, pixels })
}
