//! Feature database: build, persist, load and query.
//!
//! File layout (all integers little-endian):
//!
//! ```text
//! u32            header length in bytes
//! [u8]           UTF-8 JSON header
//! count records:
//!   u32          image id
//!   u16          class label
//!   u16          path length in bytes
//!   [u8]         UTF-8 relative path
//!   [f64]        feature_length IEEE-754 values
//! ```

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::descriptors::{EdgeDetector, ElbpConfig, NeighborhoodSpec};
use crate::error::{Error, Result};
use crate::fusion::{extract_features, feature_length, ExtractionConfig, FeatureVector};
use crate::imageio::{load_image, DatasetManifest, Labeling};
use crate::metrics::{rank, MetricId};

pub const FORMAT_VERSION: u32 = 1;

/// Tolerance for a stored histogram block to count as a distribution.
const BLOCK_SUM_TOLERANCE: f64 = 1e-9;

/// JSON header. Field order is part of the file format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexHeader {
    pub version: u32,
    pub radius: u32,
    pub neighbors: usize,
    pub uniformity_threshold: u32,
    pub edge_detector: EdgeDetector,
    pub labeling: Labeling,
    pub feature_length: usize,
    pub count: usize,
}

impl IndexHeader {
    pub fn new(config: &ExtractionConfig, labeling: Labeling, count: usize) -> Self {
        let spec = config.spec();
        Self {
            version: FORMAT_VERSION,
            radius: spec.radius(),
            neighbors: spec.neighbors(),
            uniformity_threshold: config.elbp.uniformity_threshold,
            edge_detector: config.edge_detector,
            labeling,
            feature_length: config.feature_length(),
            count,
        }
    }

    pub fn config(&self) -> Result<ExtractionConfig> {
        let spec = NeighborhoodSpec::new(self.radius)?;
        Ok(ExtractionConfig {
            elbp: ElbpConfig::with_threshold(spec, self.uniformity_threshold),
            edge_detector: self.edge_detector,
        })
    }

    fn validate(&self) -> Result<()> {
        let spec = NeighborhoodSpec::new(self.radius)
            .map_err(|e| Error::CorruptHeader(e.to_string()))?;
        if self.neighbors != spec.neighbors() {
            return Err(Error::CorruptFeatureLength(format!(
                "radius {} implies {} neighbors, header has {}",
                self.radius,
                spec.neighbors(),
                self.neighbors
            )));
        }
        if self.feature_length != feature_length(self.neighbors) {
            return Err(Error::CorruptFeatureLength(format!(
                "{} neighbors imply {} values per record, header has {}",
                self.neighbors,
                feature_length(self.neighbors),
                self.feature_length
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexRecord {
    pub image_id: u32,
    pub class_label: u16,
    pub relative_path: String,
    pub features: FeatureVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryHit {
    pub image_id: u32,
    pub class_label: u16,
    pub relative_path: String,
    pub distance: f64,
}

/// Ranked hits, nearest first.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QueryResult {
    pub hits: Vec<QueryHit>,
}

impl QueryResult {
    pub fn len(&self) -> usize {
        self.hits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hits.is_empty()
    }
}

/// An immutable, in-memory feature database.
#[derive(Debug, Clone, PartialEq)]
pub struct Index {
    header: IndexHeader,
    records: Vec<IndexRecord>,
}

/// Extracts features for every manifest entry, in manifest order. Any
/// failure aborts the build.
pub fn build_index(manifest: &DatasetManifest, config: &ExtractionConfig) -> Result<Index> {
    if manifest.is_empty() {
        return Err(Error::NoImages(manifest.root.clone()));
    }
    let records = manifest
        .entries
        .par_iter()
        .map(|entry| {
            let path = manifest.path_of(entry);
            let features = load_image(&path)
                .and_then(|img| extract_features(&img, config))
                .map_err(|e| Error::Extraction {
                    path: path.clone(),
                    source: Box::new(e),
                })?;
            Ok(IndexRecord {
                image_id: entry.image_id,
                class_label: entry.class_label,
                relative_path: entry.relative_path.clone(),
                features,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Index {
        header: IndexHeader::new(config, manifest.labeling, records.len()),
        records,
    })
}

impl Index {
    /// Assembles an index from already extracted records.
    pub fn from_records(
        config: &ExtractionConfig,
        labeling: Labeling,
        records: Vec<IndexRecord>,
    ) -> Result<Self> {
        let header = IndexHeader::new(config, labeling, records.len());
        let mut seen = std::collections::HashSet::new();
        for r in &records {
            if !seen.insert(r.image_id) {
                return Err(Error::DuplicateId {
                    id: r.image_id,
                    path: r.relative_path.clone().into(),
                });
            }
            if r.features.len() != header.feature_length {
                return Err(Error::LayoutMismatch {
                    left: r.features.len(),
                    right: header.feature_length,
                });
            }
        }
        Ok(Self { header, records })
    }

    pub fn header(&self) -> &IndexHeader {
        &self.header
    }

    pub fn records(&self) -> &[IndexRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn config(&self) -> Result<ExtractionConfig> {
        self.header.config()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let header = serde_json::to_vec(&self.header).expect("header serializes");
        let mut out = Vec::with_capacity(
            4 + header.len() + self.records.len() * (16 + 8 * self.header.feature_length),
        );
        out.extend_from_slice(&(header.len() as u32).to_le_bytes());
        out.extend_from_slice(&header);
        for r in &self.records {
            out.extend_from_slice(&r.image_id.to_le_bytes());
            out.extend_from_slice(&r.class_label.to_le_bytes());
            out.extend_from_slice(&(r.relative_path.len() as u16).to_le_bytes());
            out.extend_from_slice(r.relative_path.as_bytes());
            for v in r.features.values() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cur = Cursor { bytes, pos: 0 };
        let header_len = u32::from_le_bytes(cur.take("header length")?) as usize;
        let raw = cur.slice(header_len, "header")?;
        let value: serde_json::Value =
            serde_json::from_slice(raw).map_err(|e| Error::CorruptHeader(e.to_string()))?;
        match value.get("version").and_then(|v| v.as_u64()) {
            Some(v) if v == FORMAT_VERSION as u64 => {}
            Some(v) => return Err(Error::UnsupportedVersion(v)),
            None => return Err(Error::CorruptHeader("missing version".into())),
        }
        let header: IndexHeader =
            serde_json::from_value(value).map_err(|e| Error::CorruptHeader(e.to_string()))?;
        header.validate()?;

        let mut records = Vec::with_capacity(header.count.min(bytes.len() / 8));
        let mut seen = std::collections::HashSet::new();
        for i in 0..header.count {
            let what = format!("record {i} of {}", header.count);
            let image_id = u32::from_le_bytes(cur.take(&what)?);
            if !seen.insert(image_id) {
                return Err(Error::CorruptRecord(format!("{what}: duplicate image id {image_id}")));
            }
            let class_label = u16::from_le_bytes(cur.take(&what)?);
            let path_len = u16::from_le_bytes(cur.take(&what)?) as usize;
            let relative_path = std::str::from_utf8(cur.slice(path_len, &what)?)
                .map_err(|_| Error::CorruptRecord(format!("{what}: path is not UTF-8")))?
                .to_owned();
            let values = cur
                .slice(8 * header.feature_length, &what)?
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
                .collect();
            let features = FeatureVector::from_values(header.neighbors, values)
                .map_err(|e| Error::CorruptFeatureLength(e.to_string()))?;
            check_blocks(&features)
                .map_err(|msg| Error::CorruptRecord(format!("{what} ({relative_path}): {msg}")))?;
            records.push(IndexRecord {
                image_id,
                class_label,
                relative_path,
                features,
            });
        }
        if cur.pos != bytes.len() {
            return Err(Error::CorruptFeatureLength(format!(
                "{} unexpected bytes after {} records",
                bytes.len() - cur.pos,
                header.count
            )));
        }
        Ok(Self { header, records })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_bytes(&fs::read(path).map_err(|e| Error::io(path, e))?)
    }

    /// Ranks records against precomputed query features. Records for which
    /// `exclude` returns true are skipped.
    pub fn query_features(
        &self,
        features: &FeatureVector,
        metric: MetricId,
        n: usize,
        exclude: impl Fn(&IndexRecord) -> bool,
    ) -> Result<QueryResult> {
        if self.is_empty() {
            return Err(Error::EmptyIndex);
        }
        if features.neighbors() != self.header.neighbors {
            return Err(Error::IncompatibleConfig {
                index: format!("{} neighbors", self.header.neighbors),
                query: format!("{} neighbors", features.neighbors()),
            });
        }
        if n == 0 {
            return Err(Error::ZeroCount);
        }
        let candidates = self
            .records
            .iter()
            .filter(|r| !exclude(r))
            .map(|r| (r.image_id, &r.features));
        let ranked = match rank(features, candidates, metric, n) {
            Err(Error::NoCandidates) => Vec::new(),
            other => other?,
        };
        let by_id: HashMap<u32, &IndexRecord> =
            self.records.iter().map(|r| (r.image_id, r)).collect();
        let hits = ranked
            .into_iter()
            .map(|(id, distance)| {
                let r = by_id[&id];
                QueryHit {
                    image_id: r.image_id,
                    class_label: r.class_label,
                    relative_path: r.relative_path.clone(),
                    distance,
                }
            })
            .collect();
        Ok(QueryResult { hits })
    }

    /// Extracts features from `image_path` with the index's configuration
    /// and returns the `n` nearest records. Unless `include_self` is set, a
    /// record whose relative path is a suffix of `image_path` is skipped.
    pub fn query(
        &self,
        image_path: impl AsRef<Path>,
        metric: MetricId,
        n: usize,
        include_self: bool,
    ) -> Result<QueryResult> {
        let image_path = image_path.as_ref();
        let config = self.config()?;
        let features = load_image(image_path)
            .and_then(|img| extract_features(&img, &config))
            .map_err(|e| Error::Extraction {
                path: image_path.into(),
                source: Box::new(e),
            })?;
        self.query_features(&features, metric, n, |r| {
            !include_self && image_path.ends_with(&r.relative_path)
        })
    }
}

fn check_blocks(features: &FeatureVector) -> Result<(), String> {
    for (i, block) in features.blocks().enumerate() {
        if block.iter().any(|v| v.is_nan() || *v < 0.0) {
            return Err(format!("block {i} has a negative or NaN value"));
        }
        let sum: f64 = block.iter().sum();
        if (sum - 1.0).abs() > BLOCK_SUM_TOLERANCE {
            return Err(format!("block {i} sums to {sum}"));
        }
    }
    Ok(())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn slice(&mut self, len: usize, what: &str) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(len)
            .filter(|&end| end <= self.bytes.len())
            .ok_or_else(|| Error::Truncated(format!("file ends inside {what}")))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn take<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        Ok(self.slice(N, what)?.try_into().expect("exact length"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(id: u32, class: u16, p: usize) -> IndexRecord {
        let values = crate::fusion::block_ranges(p)
            .into_iter()
            .flat_map(|r| {
                let n = r.len();
                (0..n).map(move |j| if j == (id as usize) % n { 1.0 } else { 0.0 })
            })
            .collect();
        IndexRecord {
            image_id: id,
            class_label: class,
            relative_path: format!("{id}.jpg"),
            features: FeatureVector::from_values(p, values).unwrap(),
        }
    }

    fn sample_index() -> Index {
        let cfg = ExtractionConfig::new(1).unwrap();
        let records = (0..6).map(|i| record(i, (i / 3) as u16, 8)).collect();
        Index::from_records(&cfg, Labeling::Simplicity, records).unwrap()
    }

    #[test]
    fn header_json_layout() {
        let idx = sample_index();
        let json = serde_json::to_string(idx.header()).unwrap();
        assert_eq!(
            json,
            r#"{"version":1,"radius":1,"neighbors":8,"uniformity_threshold":2,"edge_detector":"sobel-otsu","labeling":"simplicity","feature_length":57,"count":6}"#
        );
    }

    #[test]
    fn bytes_round_trip() {
        let idx = sample_index();
        let bytes = idx.to_bytes();
        let header_len = u32::from_le_bytes(bytes[..4].try_into().unwrap()) as usize;
        assert_eq!(bytes.len(), 4 + header_len + 6 * (4 + 2 + 2 + 5 + 57 * 8));
        assert_eq!(Index::from_bytes(&bytes).unwrap(), idx);
    }

    fn with_header(header: &str, tail: &[u8]) -> Vec<u8> {
        let mut out = (header.len() as u32).to_le_bytes().to_vec();
        out.extend_from_slice(header.as_bytes());
        out.extend_from_slice(tail);
        out
    }

    #[test]
    fn header_errors() {
        let v2 = r#"{"version":2,"radius":1,"neighbors":8,"uniformity_threshold":2,"edge_detector":"sobel-otsu","labeling":"simplicity","feature_length":57,"count":0}"#;
        assert!(matches!(
            Index::from_bytes(&with_header(v2, &[])),
            Err(Error::UnsupportedVersion(2))
        ));
        let short = r#"{"version":1,"radius":1,"neighbors":8,"uniformity_threshold":2,"edge_detector":"sobel-otsu","labeling":"simplicity","feature_length":50,"count":0}"#;
        let err = Index::from_bytes(&with_header(short, &[])).unwrap_err();
        assert!(matches!(err, Error::CorruptFeatureLength(_)));
        assert!(err.to_string().starts_with("corrupt index: feature length"));
        assert!(matches!(
            Index::from_bytes(&with_header("{not json", &[])),
            Err(Error::CorruptHeader(_))
        ));
        assert!(matches!(Index::from_bytes(&[1, 0]), Err(Error::Truncated(_))));
    }

    #[test]
    fn record_errors() {
        let bytes = sample_index().to_bytes();
        assert!(matches!(
            Index::from_bytes(&bytes[..bytes.len() - 3]),
            Err(Error::Truncated(_))
        ));
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(matches!(
            Index::from_bytes(&extra),
            Err(Error::CorruptFeatureLength(_))
        ));
        let mut bad = bytes;
        let last = bad.len() - 8;
        bad[last..].copy_from_slice(&0.5f64.to_le_bytes());
        assert!(matches!(Index::from_bytes(&bad), Err(Error::CorruptRecord(_))));
    }

    #[test]
    fn query_features_excludes_and_ranks() {
        let idx = sample_index();
        let q = idx.records()[2].features.clone();
        let with_self = idx.query_features(&q, MetricId::Euclidean, 3, |_| false).unwrap();
        assert_eq!(with_self.hits[0].image_id, 2);
        assert_eq!(with_self.hits[0].distance, 0.0);
        let without = idx
            .query_features(&q, MetricId::Euclidean, 10, |r| r.image_id == 2)
            .unwrap();
        assert_eq!(without.len(), 5);
        assert!(without.hits.iter().all(|h| h.image_id != 2));
        assert!(without
            .hits
            .windows(2)
            .all(|w| (w[0].distance, w[0].image_id) <= (w[1].distance, w[1].image_id)));
    }

    #[test]
    fn query_errors() {
        let idx = sample_index();
        let other = record(0, 0, 16).features;
        assert!(matches!(
            idx.query_features(&other, MetricId::Euclidean, 1, |_| false),
            Err(Error::IncompatibleConfig { .. })
        ));
        let q = idx.records()[0].features.clone();
        assert!(idx.query_features(&q, MetricId::Euclidean, 0, |_| false).is_err());
        let cfg = ExtractionConfig::new(1).unwrap();
        let empty = Index::from_records(&cfg, Labeling::Simplicity, vec![]).unwrap();
        assert!(matches!(
            empty.query_features(&q, MetricId::Euclidean, 1, |_| false),
            Err(Error::EmptyIndex)
        ));
    }
}
