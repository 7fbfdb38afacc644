//! Early fusion of per-channel ELBP and Pre-PU histograms.

use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::descriptors::{
    detect_edges, elbp_histogram, prepu_histogram, EdgeDetector, ElbpConfig, NeighborhoodSpec,
};
use crate::error::{Error, Result};
use crate::imageio::{split_channels, RgbImage};

pub const CHANNELS: [&str; 3] = ["red", "green", "blue"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExtractionConfig {
    pub elbp: ElbpConfig,
    pub edge_detector: EdgeDetector,
}

impl ExtractionConfig {
    pub fn new(radius: u32) -> Result<Self> {
        Ok(Self {
            elbp: ElbpConfig::new(NeighborhoodSpec::new(radius)?),
            edge_detector: EdgeDetector::default(),
        })
    }

    pub fn spec(&self) -> NeighborhoodSpec {
        self.elbp.spec
    }

    pub fn feature_length(&self) -> usize {
        feature_length(self.spec().neighbors())
    }
}

/// `3 * ((P + 2) + (P + 1)) = 6P + 9`.
pub const fn feature_length(neighbors: usize) -> usize {
    6 * neighbors + 9
}

/// Which histogram a block holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    Elbp,
    PrePu,
}

/// Concatenated histograms in the order
/// `red.elbp, red.prepu, green.elbp, green.prepu, blue.elbp, blue.prepu`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    neighbors: usize,
    values: Vec<f64>,
}

impl FeatureVector {
    /// Wraps raw values, checking the length against `6P + 9`.
    pub fn from_values(neighbors: usize, values: Vec<f64>) -> Result<Self> {
        let expected = feature_length(neighbors);
        if values.len() != expected {
            return Err(Error::LayoutMismatch {
                left: values.len(),
                right: expected,
            });
        }
        Ok(Self { neighbors, values })
    }

    pub fn neighbors(&self) -> usize {
        self.neighbors
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn block_ranges(&self) -> [Range<usize>; 6] {
        block_ranges(self.neighbors)
    }

    pub fn blocks(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.block_ranges().into_iter().map(|r| &self.values[r])
    }

    /// Block of `kind` for channel `channel` (0 = red, 1 = green, 2 = blue).
    pub fn block(&self, channel: usize, kind: BlockKind) -> &[f64] {
        let i = 2 * channel + matches!(kind, BlockKind::PrePu) as usize;
        &self.values[self.block_ranges()[i].clone()]
    }
}

pub fn block_ranges(neighbors: usize) -> [Range<usize>; 6] {
    let (elbp, prepu) = (neighbors + 2, neighbors + 1);
    let channel = elbp + prepu;
    std::array::from_fn(|i| {
        let start = (i / 2) * channel + if i % 2 == 0 { 0 } else { elbp };
        let len = if i % 2 == 0 { elbp } else { prepu };
        start..start + len
    })
}

pub fn extract_features(image: &RgbImage, config: &ExtractionConfig) -> Result<FeatureVector> {
    let planes = split_channels(image);
    let spec = config.spec();
    let per_channel = planes
        .par_iter()
        .map(|plane| {
            let mut block = elbp_histogram(plane, &config.elbp)?.into_bins();
            let edges = detect_edges(plane, config.edge_detector)?;
            block.extend(prepu_histogram(&edges, spec)?.into_bins());
            Ok(block)
        })
        .collect::<Result<Vec<_>>>()?;
    FeatureVector::from_values(spec.neighbors(), per_channel.concat())
}
