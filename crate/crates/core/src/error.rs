use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unsupported image format: {path}")]
    UnsupportedFormat { path: PathBuf },
    #[error("cannot decode {path}: {message}")]
    Decode { path: PathBuf, message: String },
    #[error("image too small: {path} is {width}x{height}, need at least 3x3")]
    ImageTooSmall {
        path: PathBuf,
        width: u32,
        height: u32,
    },

    #[error("no images found under {0}")]
    NoImages(PathBuf),
    #[error("non-numeric image file name under simplicity labeling: {0}")]
    NonNumericName(PathBuf),
    #[error("duplicate image id {id}: {path}")]
    DuplicateId { id: u32, path: PathBuf },
    #[error("class label {label} out of range: {path}")]
    ClassOutOfRange { label: u64, path: PathBuf },

    #[error("unsupported radius {0}, expected 1, 2 or 3")]
    InvalidRadius(u32),
    #[error("invalid edge detector `{0}`")]
    InvalidEdgeDetector(String),
    #[error("unknown metric `{0}`")]
    UnknownMetric(String),
    #[error("unknown labeling rule `{0}`")]
    UnknownLabeling(String),
    #[error("{width}x{height} plane has no interior pixels for radius {radius}")]
    PlaneTooSmall { width: u32, height: u32, radius: u32 },
    #[error("center ({x}, {y}) is closer than {radius} pixels to the border")]
    NearBorder { x: u32, y: u32, radius: u32 },

    #[error("feature layout mismatch: {left} vs {right} values")]
    LayoutMismatch { left: usize, right: usize },
    #[error("candidate list is empty")]
    NoCandidates,
    #[error("result list has {got} entries, more than the cutoff {n}")]
    TooManyResults { got: usize, n: usize },
    #[error("requested result count must be at least 1")]
    ZeroCount,

    #[error("failed to extract features from {path}: {source}")]
    Extraction {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },
    #[error("unsupported index version {0}")]
    UnsupportedVersion(u64),
    #[error("truncated index file: {0}")]
    Truncated(String),
    #[error("corrupt index: feature length ({0})")]
    CorruptFeatureLength(String),
    #[error("corrupt index record: {0}")]
    CorruptRecord(String),
    #[error("corrupt index header: {0}")]
    CorruptHeader(String),
    #[error("index is empty")]
    EmptyIndex,
    #[error("index was built with {index}, query requires {query}")]
    IncompatibleConfig { index: String, query: String },

    #[error("class {class} has no related images to retrieve (M = 0)")]
    NoRelatedImages { class: u16 },
    #[error("evaluation needs at least 2 classes, index has {0}")]
    TooFewClasses(usize),
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
