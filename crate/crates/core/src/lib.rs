//! Content-based image retrieval with fused color texture descriptors.
//!
//! Each RGB channel is described by two label histograms: rotation-invariant
//! uniform local binary patterns (ELBP, `P + 2` bins) and predefined pattern
//! units over a binary edge map (Pre-PU, `P + 1` bins). The six histograms
//! are concatenated into a `6P + 9` feature vector and compared block by
//! block.
//!
//! ```no_run
//! use texref_core::{build_index, scan_dataset, evaluate, ExtractionConfig, Labeling, MetricId};
//!
//! let manifest = scan_dataset("corel", Labeling::Simplicity)?;
//! let index = build_index(&manifest, &ExtractionConfig::new(1)?)?;
//! let report = evaluate(&index, MetricId::Euclidean, &[10, 20, 40], false)?;
//! println!("P@10 = {:.2}", report.precision_at(10).unwrap());
//! # Ok::<(), texref_core::Error>(())
//! ```

pub mod descriptors;
pub mod error;
pub mod eval;
pub mod fusion;
pub mod imageio;
pub mod index;
pub mod metrics;

pub use descriptors::{
    detect_edges, elbp_histogram, elbp_label, lbp_code, prepu_histogram, prepu_label,
    sample_neighbors, uniformity, BinaryEdgeMap, EdgeDetector, ElbpConfig, ElbpHistogram,
    NeighborhoodSample, NeighborhoodSpec, PrePuHistogram,
};
pub use error::{Error, Result};
pub use eval::{evaluate, score_query, sweep, write_csv, EvalReport, QueryOutcome, SweepOptions};
pub use fusion::{extract_features, feature_length, BlockKind, ExtractionConfig, FeatureVector};
pub use imageio::{
    load_image, merge_channels, scan_dataset, split_channels, ChannelPlane, DatasetManifest,
    Labeling, ManifestEntry, RgbImage,
};
pub use index::{build_index, Index, IndexHeader, IndexRecord, QueryHit, QueryResult};
pub use metrics::{distance, rank, MetricId};
