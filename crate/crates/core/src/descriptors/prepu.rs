use crate::error::Result;

use super::edges::BinaryEdgeMap;
use super::elbp::count_labels;
use super::sampling::SamplingPattern;
use super::{normalize, NeighborhoodSpec};

#[inline]
fn label_at(map: &BinaryEdgeMap, offsets: &[(i32, i32)], cx: u32, cy: u32) -> usize {
    if !map.get(cx, cy) {
        return 0;
    }
    offsets
        .iter()
        .filter(|&&(dx, dy)| map.get((cx as i32 + dx) as u32, (cy as i32 + dy) as u32))
        .count()
}

/// Pre-PU label: 0 for a non-edge center, otherwise the number of edge
/// pixels on the ring.
pub fn prepu_label(map: &BinaryEdgeMap, cx: u32, cy: u32, spec: NeighborhoodSpec) -> Result<usize> {
    spec.check_center(map.width(), map.height(), cx, cy)?;
    let pattern = SamplingPattern::new(spec);
    Ok(label_at(map, pattern.nearest_offsets(), cx, cy))
}

/// Occurrence probabilities of the `P + 1` Pre-PU labels.
#[derive(Debug, Clone, PartialEq)]
pub struct PrePuHistogram(Vec<f64>);

impl PrePuHistogram {
    pub fn bins(&self) -> &[f64] {
        &self.0
    }

    pub fn into_bins(self) -> Vec<f64> {
        self.0
    }
}

pub fn prepu_histogram(map: &BinaryEdgeMap, spec: NeighborhoodSpec) -> Result<PrePuHistogram> {
    spec.interior(map.width(), map.height())?;
    let pattern = SamplingPattern::new(spec);
    let offsets = pattern.nearest_offsets();
    let r = spec.radius();
    let counts = count_labels(
        r..map.height() - r,
        r..map.width() - r,
        spec.neighbors() + 1,
        |x, y| label_at(map, offsets, x, y),
    );
    Ok(PrePuHistogram(normalize(&counts)))
}
