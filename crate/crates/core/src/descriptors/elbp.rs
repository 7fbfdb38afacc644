use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::imageio::ChannelPlane;

use super::sampling::{NeighborhoodSample, SamplingPattern};
use super::{normalize, NeighborhoodSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ElbpConfig {
    pub spec: NeighborhoodSpec,
    /// Patterns with at most this many circular transitions are uniform.
    pub uniformity_threshold: u32,
}

impl ElbpConfig {
    /// Uses the conventional threshold `P / 4`.
    pub fn new(spec: NeighborhoodSpec) -> Self {
        Self {
            spec,
            uniformity_threshold: (spec.neighbors() / 4) as u32,
        }
    }

    pub fn with_threshold(spec: NeighborhoodSpec, uniformity_threshold: u32) -> Self {
        Self {
            spec,
            uniformity_threshold,
        }
    }

    /// Label of a `P`-bit pattern.
    #[inline]
    pub fn label_of_bits(&self, bits: u32) -> usize {
        let p = self.spec.neighbors();
        if circular_transitions(bits, p) <= self.uniformity_threshold {
            bits.count_ones() as usize
        } else {
            p + 1
        }
    }
}

#[inline]
fn circular_transitions(bits: u32, p: usize) -> u32 {
    let mask = if p == 32 { u32::MAX } else { (1u32 << p) - 1 };
    let rotated = ((bits >> 1) | (bits << (p - 1))) & mask;
    (bits ^ rotated).count_ones()
}

/// Basic LBP code `Σ δ(I_k - I_c) 2^(k-1)`.
pub fn lbp_code(sample: &NeighborhoodSample) -> u32 {
    sample.bits()
}

/// Number of circular 0/1 transitions in the sample's bit pattern.
pub fn uniformity(sample: &NeighborhoodSample) -> u32 {
    circular_transitions(sample.bits(), sample.len())
}

/// Rotation-invariant uniform label in `0..=P+1`.
pub fn elbp_label(sample: &NeighborhoodSample, config: &ElbpConfig) -> usize {
    debug_assert_eq!(sample.len(), config.spec.neighbors());
    config.label_of_bits(sample.bits())
}

/// Occurrence probabilities of the `P + 2` ELBP labels.
#[derive(Debug, Clone, PartialEq)]
pub struct ElbpHistogram(Vec<f64>);

impl ElbpHistogram {
    pub fn bins(&self) -> &[f64] {
        &self.0
    }

    pub fn into_bins(self) -> Vec<f64> {
        self.0
    }
}

/// Accumulates labels over interior rows in parallel. Counts are integers so
/// the merge order never affects the result.
pub(crate) fn count_labels(
    rows: std::ops::Range<u32>,
    cols: std::ops::Range<u32>,
    n_labels: usize,
    label: impl Fn(u32, u32) -> usize + Sync,
) -> Vec<u64> {
    rows.into_par_iter()
        .fold(
            || vec![0u64; n_labels],
            |mut counts, y| {
                for x in cols.clone() {
                    counts[label(x, y)] += 1;
                }
                counts
            },
        )
        .reduce(
            || vec![0u64; n_labels],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(a, b)| *a += b);
                a
            },
        )
}

pub fn elbp_histogram(plane: &ChannelPlane, config: &ElbpConfig) -> Result<ElbpHistogram> {
    let spec = config.spec;
    spec.interior(plane.width(), plane.height())?;
    let pattern = SamplingPattern::new(spec);
    let r = spec.radius();
    let counts = count_labels(
        r..plane.height() - r,
        r..plane.width() - r,
        spec.neighbors() + 2,
        |x, y| config.label_of_bits(pattern.pattern_bits(plane, x, y)),
    );
    Ok(ElbpHistogram(normalize(&counts)))
}
