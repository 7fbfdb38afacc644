use std::f64::consts::PI;

use crate::error::Result;
use crate::imageio::ChannelPlane;

use super::NeighborhoodSpec;

/// Interpolated differences smaller than this are interpolation round-off
/// and are treated as exact ties.
const TIE_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tap {
    Pixel { dx: i32, dy: i32 },
    Bilinear { x0: i32, y0: i32, fx: f64, fy: f64 },
}

/// Precomputed ring geometry for one [`NeighborhoodSpec`].
///
/// Neighbor `k` (zero-based) sits at angle `2πk/P` counter-clockwise from
/// the positive x-axis, at offset `(R cos θ, -R sin θ)`. For `R = 1` the
/// ring is the 3x3 Moore neighborhood in the same angular order; larger
/// radii use the circle with bilinear interpolation. Binary maps are
/// sampled at the nearest pixel instead.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingPattern {
    spec: NeighborhoodSpec,
    taps: Vec<Tap>,
    nearest: Vec<(i32, i32)>,
}

fn snap(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() < TIE_EPSILON {
        r
    } else {
        v
    }
}

impl SamplingPattern {
    pub fn new(spec: NeighborhoodSpec) -> Self {
        let p = spec.neighbors();
        let radius = spec.radius() as f64;
        let offsets: Vec<(f64, f64)> = (0..p)
            .map(|k| {
                let theta = 2.0 * PI * k as f64 / p as f64;
                let (dx, dy) = (radius * theta.cos(), -radius * theta.sin());
                if spec.radius() == 1 {
                    let scale = dx.abs().max(dy.abs());
                    ((dx / scale).round(), (dy / scale).round())
                } else {
                    (snap(dx), snap(dy))
                }
            })
            .collect();
        let taps = offsets
            .iter()
            .map(|&(dx, dy)| {
                if dx.fract() == 0.0 && dy.fract() == 0.0 {
                    Tap::Pixel {
                        dx: dx as i32,
                        dy: dy as i32,
                    }
                } else {
                    let (x0, y0) = (dx.floor(), dy.floor());
                    Tap::Bilinear {
                        x0: x0 as i32,
                        y0: y0 as i32,
                        fx: dx - x0,
                        fy: dy - y0,
                    }
                }
            })
            .collect();
        let nearest = offsets
            .iter()
            .map(|&(dx, dy)| (dx.round() as i32, dy.round() as i32))
            .collect();
        Self {
            spec,
            taps,
            nearest,
        }
    }

    pub fn spec(&self) -> NeighborhoodSpec {
        self.spec
    }

    /// Integer offsets used when sampling binary maps.
    pub fn nearest_offsets(&self) -> &[(i32, i32)] {
        &self.nearest
    }

    /// Intensity of neighbor `k` around `(cx, cy)`. The center must be
    /// interior; this is not rechecked.
    ///
    /// Interpolation runs on differences to the center so that adding a
    /// constant to the plane changes every sample by exactly that constant.
    #[inline]
    pub(crate) fn neighbor(&self, plane: &ChannelPlane, cx: u32, cy: u32, k: usize) -> f64 {
        let center = plane.get(cx, cy) as i32;
        let at = |dx: i32, dy: i32| {
            (plane.get((cx as i32 + dx) as u32, (cy as i32 + dy) as u32) as i32 - center) as f64
        };
        let diff = match self.taps[k] {
            Tap::Pixel { dx, dy } => at(dx, dy),
            Tap::Bilinear { x0, y0, fx, fy } => {
                let top = at(x0, y0) + fx * (at(x0 + 1, y0) - at(x0, y0));
                let bottom = at(x0, y0 + 1) + fx * (at(x0 + 1, y0 + 1) - at(x0, y0 + 1));
                let v = top + fy * (bottom - top);
                if v.abs() < TIE_EPSILON {
                    0.0
                } else {
                    v
                }
            }
        };
        center as f64 + diff
    }

    /// Bit pattern at `(cx, cy)`: bit `k` is set when neighbor `k` is at
    /// least as bright as the center.
    #[inline]
    pub(crate) fn pattern_bits(&self, plane: &ChannelPlane, cx: u32, cy: u32) -> u32 {
        let center = plane.get(cx, cy) as f64;
        (0..self.taps.len()).fold(0u32, |bits, k| {
            bits | (((self.neighbor(plane, cx, cy, k) >= center) as u32) << k)
        })
    }
}

/// Center intensity and the `P` ring intensities around one pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodSample {
    pub center: f64,
    pub neighbors: Vec<f64>,
}

impl NeighborhoodSample {
    pub fn new(center: f64, neighbors: Vec<f64>) -> Self {
        Self { center, neighbors }
    }

    /// Bit `k` is `δ(I_{k+1} - I_c)`, set on ties.
    pub fn bits(&self) -> u32 {
        self.neighbors
            .iter()
            .enumerate()
            .fold(0, |bits, (k, &v)| bits | (((v >= self.center) as u32) << k))
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }
}

pub fn sample_neighbors(
    plane: &ChannelPlane,
    cx: u32,
    cy: u32,
    spec: NeighborhoodSpec,
) -> Result<NeighborhoodSample> {
    spec.check_center(plane.width(), plane.height(), cx, cy)?;
    let pattern = SamplingPattern::new(spec);
    let neighbors = (0..spec.neighbors())
        .map(|k| pattern.neighbor(plane, cx, cy, k))
        .collect();
    Ok(NeighborhoodSample::new(plane.get(cx, cy) as f64, neighbors))
}
