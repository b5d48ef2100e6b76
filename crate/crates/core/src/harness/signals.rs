use super::HarnessError;
use crate::operators::LatticeSpec;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalKind {
    Blocky,
    BlockySmooth,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImageKind {
    Blocks42,
    SheppLogan,
}

impl ImageKind {
    pub fn default_size(self) -> usize {
        match self {
            ImageKind::Blocks42 => 42,
            ImageKind::SheppLogan => 200,
        }
    }
}

/// Piecewise-constant levels on `[0, 1)`: `(start, value)` pairs.
const BLOCKY: [(f64, f64); 6] = [(0.0, 0.1), (0.12, 0.7), (0.3, 0.3), (0.45, 1.0), (0.62, 0.0), (0.8, 0.5)];
const BLOCKY_LEFT: [(f64, f64); 3] = [(0.0, 0.0), (0.1, 0.8), (0.3, 0.3)];

fn level(table: &[(f64, f64)], t: f64) -> f64 {
    table.iter().rev().find(|(start, _)| t >= *start).map(|(_, v)| *v).unwrap_or(0.0)
}

/// Deterministic 1-D test signal sampled at `t_i = i / points`.
///
/// `Blocky` has six plateaus. `BlockySmooth` has three plateaus on
/// `[0, 0.5)` followed by a Gaussian bump `0.2 + 0.7 exp(−((t − 0.75)/0.09)²)`.
pub fn make_signal_1d(kind: SignalKind, points: usize) -> Result<Vec<f64>, HarnessError> {
    if points < 8 {
        return Err(HarnessError::Invalid(format!("signal needs at least 8 points, got {points}")));
    }
    Ok((0..points)
        .map(|i| {
            let t = i as f64 / points as f64;
            match kind {
                SignalKind::Blocky => level(&BLOCKY, t),
                SignalKind::BlockySmooth => {
                    if t < 0.5 {
                        level(&BLOCKY_LEFT, t)
                    } else {
                        0.2 + 0.7 * (-((t - 0.75) / 0.09).powi(2)).exp()
                    }
                }
            }
        })
        .collect())
}

/// Ellipse in the `[−1, 1]²` frame, `x` to the right and `y` up.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ellipse {
    pub value: f64,
    pub a: f64,
    pub b: f64,
    pub x0: f64,
    pub y0: f64,
    pub phi_deg: f64,
}

impl Ellipse {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (s, c) = self.phi_deg.to_radians().sin_cos();
        let (dx, dy) = (x - self.x0, y - self.y0);
        let u = dx * c + dy * s;
        let v = -dx * s + dy * c;
        (u / self.a).powi(2) + (v / self.b).powi(2) <= 1.0
    }
}

/// The ten-ellipse modified Shepp-Logan table (contrast-enhanced intensities).
pub fn shepp_logan_ellipses() -> [Ellipse; 10] {
    let e = |value, a, b, x0, y0, phi_deg| Ellipse { value, a, b, x0, y0, phi_deg };
    [
        e(1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
        e(-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0),
        e(-0.2, 0.11, 0.31, 0.22, 0.0, -18.0),
        e(-0.2, 0.16, 0.41, -0.22, 0.0, 18.0),
        e(0.1, 0.21, 0.25, 0.0, 0.35, 0.0),
        e(0.1, 0.046, 0.046, 0.0, 0.1, 0.0),
        e(0.1, 0.046, 0.046, 0.0, -0.1, 0.0),
        e(0.1, 0.046, 0.023, -0.08, -0.605, 0.0),
        e(0.1, 0.023, 0.023, 0.0, -0.605, 0.0),
        e(0.1, 0.023, 0.046, 0.06, -0.605, 0.0),
    ]
}

/// Stacked (column-wise) `size × size` test image with values in `[0, 1]`.
///
/// `Blocks42` is a piecewise-constant pattern of overlapping rectangles laid
/// out on a 42-unit grid and scaled to `size`. `SheppLogan` samples the
/// phantom at pixel centres.
pub fn make_image_2d(kind: ImageKind, size: usize) -> Result<Vec<f64>, HarnessError> {
    if size < 8 {
        return Err(HarnessError::Invalid(format!("image size must be at least 8, got {size}")));
    }
    let lattice = LatticeSpec::new(size, size).map_err(|e| HarnessError::Invalid(e.to_string()))?;
    let mut out = vec![0.0; lattice.len()];
    let s = size as f64;
    match kind {
        ImageKind::Blocks42 => {
            // (row0, row1, col0, col1, value) on the 42-grid; later entries overwrite.
            const RECTS: [(f64, f64, f64, f64, f64); 5] = [
                (5.0, 19.0, 5.0, 19.0, 0.5),
                (8.0, 14.0, 9.0, 15.0, 1.0),
                (24.0, 37.0, 6.0, 36.0, 0.8),
                (5.0, 21.0, 25.0, 37.0, 0.3),
                (28.0, 33.0, 20.0, 31.0, 0.1),
            ];
            for i in 0..size {
                for j in 0..size {
                    let (u, v) = ((i as f64 + 0.5) * 42.0 / s, (j as f64 + 0.5) * 42.0 / s);
                    let mut val = 0.0;
                    for &(r0, r1, c0, c1, value) in &RECTS {
                        if u >= r0 && u < r1 && v >= c0 && v < c1 {
                            val = value;
                        }
                    }
                    out[lattice.index(i, j)] = val;
                }
            }
        }
        ImageKind::SheppLogan => {
            let ellipses = shepp_logan_ellipses();
            for i in 0..size {
                for j in 0..size {
                    let x = (2.0 * j as f64 + 1.0) / s - 1.0;
                    let y = 1.0 - (2.0 * i as f64 + 1.0) / s;
                    let v: f64 = ellipses.iter().filter(|e| e.contains(x, y)).map(|e| e.value).sum();
                    out[lattice.index(i, j)] = v.clamp(0.0, 1.0);
                }
            }
        }
    }
    Ok(out)
}
