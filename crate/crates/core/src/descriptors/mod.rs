//! Per-plane texture operators.
//!
//! Two label histograms are computed for every channel plane:
//!
//! * ELBP: local binary patterns collapsed to rotation-invariant uniform
//!   labels `0..=P` (count of set bits) plus one catch-all label `P + 1`
//!   for non-uniform patterns.
//! * Pre-PU: labels on a binary edge map, `0` for non-edge centers and the
//!   number of edge neighbors otherwise, giving labels `0..=P`.
//!
//! Only interior pixels (those whose whole ring lies inside the plane)
//! contribute. There is no padding.

mod edges;
mod elbp;
mod prepu;
mod sampling;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use edges::{
    detect_edges, gradient_magnitude, BinaryEdgeMap, EdgeDetector, MAX_SOBEL_MAGNITUDE,
};
pub use elbp::{elbp_histogram, elbp_label, lbp_code, uniformity, ElbpConfig, ElbpHistogram};
pub use prepu::{prepu_histogram, prepu_label, PrePuHistogram};
pub use sampling::{sample_neighbors, NeighborhoodSample, SamplingPattern};

/// Radius of the sampling ring. The neighbor count is always `8 * radius`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct NeighborhoodSpec {
    radius: u32,
}

impl NeighborhoodSpec {
    pub const SUPPORTED_RADII: [u32; 3] = [1, 2, 3];

    pub fn new(radius: u32) -> Result<Self> {
        if Self::SUPPORTED_RADII.contains(&radius) {
            Ok(Self { radius })
        } else {
            Err(Error::InvalidRadius(radius))
        }
    }

    pub fn radius(self) -> u32 {
        self.radius
    }

    /// Neighbor count `P`.
    pub fn neighbors(self) -> usize {
        8 * self.radius as usize
    }

    /// Number of interior pixels of a `width x height` plane, or an error if
    /// there are none.
    pub(crate) fn interior(self, width: u32, height: u32) -> Result<(u32, u32)> {
        let r = self.radius;
        if width <= 2 * r || height <= 2 * r {
            return Err(Error::PlaneTooSmall {
                width,
                height,
                radius: r,
            });
        }
        Ok((width - 2 * r, height - 2 * r))
    }

    pub(crate) fn check_center(self, width: u32, height: u32, x: u32, y: u32) -> Result<()> {
        let r = self.radius;
        if x < r || y < r || x + r >= width || y + r >= height {
            return Err(Error::NearBorder { x, y, radius: r });
        }
        Ok(())
    }
}

impl TryFrom<u32> for NeighborhoodSpec {
    type Error = Error;

    fn try_from(radius: u32) -> Result<Self> {
        Self::new(radius)
    }
}

impl From<NeighborhoodSpec> for u32 {
    fn from(spec: NeighborhoodSpec) -> u32 {
        spec.radius
    }
}

/// Turns per-label counts into occurrence probabilities.
pub(crate) fn normalize(counts: &[u64]) -> Vec<f64> {
    let total: u64 = counts.iter().sum();
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}
