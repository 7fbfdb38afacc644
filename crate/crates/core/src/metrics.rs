//! Block-structured distances between feature vectors.
//!
//! Every metric is evaluated per histogram block and summed over the six
//! blocks. For Euclidean distance that is a sum of six square roots, which
//! is not the norm of the concatenated difference.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::FeatureVector;

/// Floor added inside the logarithm of the log-likelihood metric.
pub const LOG_EPSILON: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricId {
    Euclidean,
    Cosine,
    Cityblock,
    Canberra,
    Loglikelihood,
}

impl MetricId {
    pub const ALL: [MetricId; 5] = [
        MetricId::Euclidean,
        MetricId::Cosine,
        MetricId::Cityblock,
        MetricId::Canberra,
        MetricId::Loglikelihood,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MetricId::Euclidean => "euclidean",
            MetricId::Cosine => "cosine",
            MetricId::Cityblock => "cityblock",
            MetricId::Canberra => "canberra",
            MetricId::Loglikelihood => "loglikelihood",
        }
    }

    /// Distance between two matching blocks.
    pub fn block_distance(self, q: &[f64], d: &[f64]) -> f64 {
        debug_assert_eq!(q.len(), d.len());
        let pairs = q.iter().zip(d);
        match self {
            MetricId::Euclidean => pairs.map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt(),
            MetricId::Cityblock => pairs.map(|(a, b)| (a - b).abs()).sum(),
            MetricId::Canberra => pairs
                .map(|(a, b)| {
                    let denom = a.abs() + b.abs();
                    if denom == 0.0 {
                        0.0
                    } else {
                        (a - b).abs() / denom
                    }
                })
                .sum(),
            MetricId::Cosine => {
                let (mut dot, mut qq, mut dd) = (0.0, 0.0, 0.0);
                for (a, b) in pairs {
                    dot += a * b;
                    qq += a * a;
                    dd += b * b;
                }
                match (qq == 0.0, dd == 0.0) {
                    (true, true) => 0.0,
                    (true, false) | (false, true) => 1.0,
                    _ => 1.0 - dot / (qq.sqrt() * dd.sqrt()),
                }
            }
            MetricId::Loglikelihood => pairs.map(|(a, b)| -a * (b + LOG_EPSILON).ln()).sum(),
        }
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MetricId::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::UnknownMetric(s.to_owned()))
    }
}

pub fn distance(q: &FeatureVector, d: &FeatureVector, metric: MetricId) -> Result<f64> {
    if q.neighbors() != d.neighbors() || q.len() != d.len() {
        return Err(Error::LayoutMismatch {
            left: q.len(),
            right: d.len(),
        });
    }
    Ok(q.blocks()
        .zip(d.blocks())
        .map(|(a, b)| metric.block_distance(a, b))
        .sum())
}

/// Total order used for ranking: ascending distance, then ascending id.
pub fn ranking_order(a: &(u32, f64), b: &(u32, f64)) -> Ordering {
    a.1.total_cmp(&b.1).then(a.0.cmp(&b.0))
}

/// The `top_n` candidates closest to `query`.
pub fn rank<'a, I>(
    query: &FeatureVector,
    candidates: I,
    metric: MetricId,
    top_n: usize,
) -> Result<Vec<(u32, f64)>>
where
    I: IntoIterator<Item = (u32, &'a FeatureVector)>,
{
    if top_n == 0 {
        return Err(Error::ZeroCount);
    }
    let mut scored = candidates
        .into_iter()
        .map(|(id, v)| Ok((id, distance(query, v, metric)?)))
        .collect::<Result<Vec<_>>>()?;
    if scored.is_empty() {
        return Err(Error::NoCandidates);
    }
    if scored.len() > top_n {
        scored.select_nth_unstable_by(top_n - 1, ranking_order);
        scored.truncate(top_n);
    }
    scored.sort_by(ranking_order);
    Ok(scored)
}
