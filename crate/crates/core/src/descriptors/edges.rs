use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imageio::ChannelPlane;

/// Upper bound accepted for fixed Sobel thresholds. The true maximum 3x3
/// Sobel magnitude on 8-bit input is about 1140.39.
pub const MAX_SOBEL_MAGNITUDE: f64 = 1141.0;

const OTSU_BINS: usize = 256;

/// Binarization strategy used before Pre-PU labeling.
///
/// Parsed from and displayed as `sobel-otsu`, `roberts-otsu` or
/// `sobel-fixed:<t>`.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum EdgeDetector {
    #[default]
    SobelOtsu,
    RobertsOtsu,
    /// Sobel magnitude strictly above a raw-magnitude threshold.
    SobelFixed(f64),
}

impl PartialEq for EdgeDetector {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Self::SobelFixed(a), Self::SobelFixed(b)) => a.to_bits() == b.to_bits(),
            (a, b) => std::mem::discriminant(a) == std::mem::discriminant(b),
        }
    }
}

impl Eq for EdgeDetector {}

impl Hash for EdgeDetector {
    fn hash<H: Hasher>(&self, state: &mut H) {
        std::mem::discriminant(self).hash(state);
        if let Self::SobelFixed(t) = self {
            t.to_bits().hash(state);
        }
    }
}

impl fmt::Display for EdgeDetector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::SobelOtsu => f.write_str("sobel-otsu"),
            Self::RobertsOtsu => f.write_str("roberts-otsu"),
            Self::SobelFixed(t) => write!(f, "sobel-fixed:{t}"),
        }
    }
}

impl FromStr for EdgeDetector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let invalid = || Error::InvalidEdgeDetector(s.to_owned());
        match s {
            "sobel-otsu" => Ok(Self::SobelOtsu),
            "roberts-otsu" => Ok(Self::RobertsOtsu),
            _ => {
                let t: f64 = s
                    .strip_prefix("sobel-fixed:")
                    .ok_or_else(invalid)?
                    .parse()
                    .map_err(|_| invalid())?;
                if (0.0..=MAX_SOBEL_MAGNITUDE).contains(&t) {
                    Ok(Self::SobelFixed(t))
                } else {
                    Err(invalid())
                }
            }
        }
    }
}

impl TryFrom<String> for EdgeDetector {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<EdgeDetector> for String {
    fn from(d: EdgeDetector) -> String {
        d.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryEdgeMap {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl BinaryEdgeMap {
    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            bits,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[(y * self.width + x) as usize]
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kernel {
    Sobel,
    Roberts,
}

impl Kernel {
    /// Pixels `(x, y)` where the kernel lies fully inside the plane.
    fn valid(self, plane: &ChannelPlane, x: u32, y: u32) -> bool {
        let (w, h) = (plane.width(), plane.height());
        match self {
            Kernel::Sobel => x >= 1 && y >= 1 && x + 1 < w && y + 1 < h,
            Kernel::Roberts => x + 1 < w && y + 1 < h,
        }
    }

    fn magnitude(self, plane: &ChannelPlane, x: u32, y: u32) -> f64 {
        let p = |dx: i32, dy: i32| plane.get((x as i32 + dx) as u32, (y as i32 + dy) as u32) as i32;
        let (gx, gy) = match self {
            Kernel::Sobel => (
                (p(1, -1) + 2 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2 * p(-1, 0) + p(-1, 1)),
                (p(-1, 1) + 2 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2 * p(0, -1) + p(1, -1)),
            ),
            Kernel::Roberts => (p(0, 0) - p(1, 1), p(1, 0) - p(0, 1)),
        };
        ((gx * gx + gy * gy) as f64).sqrt()
    }
}

fn magnitudes(plane: &ChannelPlane, kernel: Kernel) -> Vec<Option<f64>> {
    let mut out = Vec::with_capacity(plane.values().len());
    for y in 0..plane.height() {
        for x in 0..plane.width() {
            out.push(
                kernel
                    .valid(plane, x, y)
                    .then(|| kernel.magnitude(plane, x, y)),
            );
        }
    }
    out
}

/// Gradient magnitude per pixel, 0 where the kernel overhangs the border.
pub fn gradient_magnitude(plane: &ChannelPlane, detector: EdgeDetector) -> Vec<f64> {
    let kernel = match detector {
        EdgeDetector::RobertsOtsu => Kernel::Roberts,
        _ => Kernel::Sobel,
    };
    magnitudes(plane, kernel)
        .into_iter()
        .map(|m| m.unwrap_or(0.0))
        .collect()
}

/// Otsu's threshold over values quantized to 256 bins on `[min, max]`.
/// Returns a predicate selecting the upper class, or `None` when all values
/// are equal.
fn otsu_split(values: &[f64]) -> Option<impl Fn(f64) -> bool> {
    let (min, max) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if max.is_nan() || max <= min {
        return None;
    }
    let bin = move |v: f64| (((v - min) / (max - min) * OTSU_BINS as f64) as usize).min(OTSU_BINS - 1);
    let mut hist = [0u64; OTSU_BINS];
    for &v in values {
        hist[bin(v)] += 1;
    }
    let total = values.len() as f64;
    let weighted_total: f64 = hist.iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum();
    let (mut w0, mut sum0) = (0.0, 0.0);
    let (mut best, mut best_between) = (0usize, -1.0);
    for (t, &count) in hist.iter().enumerate().take(OTSU_BINS - 1) {
        w0 += count as f64;
        sum0 += t as f64 * count as f64;
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let mean0 = sum0 / w0;
        let mean1 = (weighted_total - sum0) / w1;
        let between = w0 * w1 * (mean0 - mean1) * (mean0 - mean1);
        if between > best_between {
            best_between = between;
            best = t;
        }
    }
    Some(move |v: f64| bin(v) > best)
}

pub fn detect_edges(plane: &ChannelPlane, detector: EdgeDetector) -> Result<BinaryEdgeMap> {
    if plane.width() < 3 || plane.height() < 3 {
        return Err(Error::PlaneTooSmall {
            width: plane.width(),
            height: plane.height(),
            radius: 1,
        });
    }
    let kernel = match detector {
        EdgeDetector::RobertsOtsu => Kernel::Roberts,
        _ => Kernel::Sobel,
    };
    let mags = magnitudes(plane, kernel);
    let bits: Vec<bool> = match detector {
        EdgeDetector::SobelFixed(t) => mags.iter().map(|m| m.is_some_and(|m| m > t)).collect(),
        _ => {
            let valid: Vec<f64> = mags.iter().flatten().copied().collect();
            match otsu_split(&valid) {
                Some(is_edge) => mags.iter().map(|m| m.is_some_and(&is_edge)).collect(),
                None => vec![false; mags.len()],
            }
        }
    };
    Ok(BinaryEdgeMap {
        width: plane.width(),
        height: plane.height(),
        bits,
    })
}
