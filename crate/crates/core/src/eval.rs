//! Precision/recall benchmark: every indexed image is issued as a query.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;
use std::time::Instant;

use rayon::prelude::*;

use crate::descriptors::EdgeDetector;
use crate::error::{Error, Result};
use crate::fusion::ExtractionConfig;
use crate::imageio::DatasetManifest;
use crate::index::{build_index, Index, QueryHit, QueryResult};
use crate::metrics::{MetricId, ranking_order};

/// Precision and recall of one query at one cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryOutcome {
    pub query_id: u32,
    /// Cutoff `N`.
    pub retrieved: usize,
    /// `RR`: retrieved images sharing the query's class.
    pub related_retrieved: usize,
    /// `M`: same-class images available to retrieve.
    pub related_total: usize,
    /// Percent.
    pub precision: f64,
    /// Percent, computed as `precision * N / M`.
    pub recall: f64,
}

/// Scores a ranked result against the query's class.
pub fn score_query(
    query_id: u32,
    result: &QueryResult,
    query_class: u16,
    related_total: usize,
    n: usize,
) -> Result<QueryOutcome> {
    if n == 0 {
        return Err(Error::ZeroCount);
    }
    if related_total == 0 {
        return Err(Error::NoRelatedImages { class: query_class });
    }
    if result.len() > n {
        return Err(Error::TooManyResults {
            got: result.len(),
            n,
        });
    }
    let rr = result
        .hits
        .iter()
        .filter(|h| h.class_label == query_class)
        .count();
    let precision = 100.0 * rr as f64 / n as f64;
    Ok(QueryOutcome {
        query_id,
        retrieved: n,
        related_retrieved: rr,
        related_total,
        precision,
        recall: precision * n as f64 / related_total as f64,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassSummary {
    /// `None` for the all-classes row.
    pub class: Option<u16>,
    pub queries: usize,
    pub mean_precision: f64,
    pub mean_recall: f64,
}

impl ClassSummary {
    fn from_outcomes<'a>(class: Option<u16>, outcomes: impl Iterator<Item = &'a QueryOutcome>) -> Self {
        let (mut n, mut p, mut r) = (0usize, 0.0, 0.0);
        for o in outcomes {
            n += 1;
            p += o.precision;
            r += o.recall;
        }
        Self {
            class,
            queries: n,
            mean_precision: p / n as f64,
            mean_recall: r / n as f64,
        }
    }
}

/// Aggregates at one cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffSummary {
    pub n: usize,
    pub per_class: Vec<ClassSummary>,
    pub overall: ClassSummary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub config: ExtractionConfig,
    pub metric: MetricId,
    pub include_self: bool,
    pub cutoffs: Vec<CutoffSummary>,
    /// Every per-query outcome, query-major, cutoffs in request order.
    pub outcomes: Vec<QueryOutcome>,
    pub warnings: Vec<String>,
    pub extraction_seconds: Option<f64>,
    pub query_seconds: f64,
}

impl EvalReport {
    pub fn radius(&self) -> u32 {
        self.config.spec().radius()
    }

    pub fn cutoff(&self, n: usize) -> Option<&CutoffSummary> {
        self.cutoffs.iter().find(|c| c.n == n)
    }

    /// Overall mean precision at cutoff `n`, if it was evaluated.
    pub fn precision_at(&self, n: usize) -> Option<f64> {
        self.cutoff(n).map(|c| c.overall.mean_precision)
    }

    pub fn recall_at(&self, n: usize) -> Option<f64> {
        self.cutoff(n).map(|c| c.overall.mean_recall)
    }
}

/// Issues every indexed image as a query and scores it at each cutoff.
///
/// When `include_self` is off the query is removed from its own candidate
/// list and `M` is the class size minus one.
pub fn evaluate(
    index: &Index,
    metric: MetricId,
    n_values: &[usize],
    include_self: bool,
) -> Result<EvalReport> {
    if index.is_empty() {
        return Err(Error::EmptyIndex);
    }
    if n_values.is_empty() || n_values.contains(&0) {
        return Err(Error::ZeroCount);
    }
    let records = index.records();
    let mut class_sizes: BTreeMap<u16, usize> = BTreeMap::new();
    for r in records {
        *class_sizes.entry(r.class_label).or_insert(0) += 1;
    }
    if class_sizes.len() < 2 {
        return Err(Error::TooFewClasses(class_sizes.len()));
    }

    let max_n = *n_values.iter().max().expect("non-empty");
    let self_slot = usize::from(!include_self);
    let mut warnings = Vec::new();
    for (&class, &size) in &class_sizes {
        if size < max_n + self_slot {
            warnings.push(format!(
                "class {class} has {size} images, fewer than N = {max_n}{} related candidates",
                if include_self { "" } else { " plus the query" }
            ));
        }
    }
    if let Some((&class, _)) = class_sizes.iter().find(|(_, &size)| size <= self_slot) {
        return Err(Error::NoRelatedImages { class });
    }

    let started = Instant::now();
    let per_query: Vec<Vec<QueryOutcome>> = records
        .par_iter()
        .enumerate()
        .map(|(qi, query)| {
            let mut scored: Vec<(u32, f64, usize)> = records
                .iter()
                .enumerate()
                .filter(|&(ci, _)| include_self || ci != qi)
                .map(|(ci, c)| {
                    let d = query
                        .features
                        .blocks()
                        .zip(c.features.blocks())
                        .map(|(a, b)| metric.block_distance(a, b))
                        .sum::<f64>();
                    (c.image_id, d, ci)
                })
                .collect();
            scored.sort_by(|a, b| ranking_order(&(a.0, a.1), &(b.0, b.1)));
            let related_total = class_sizes[&query.class_label] - self_slot;
            n_values
                .iter()
                .map(|&n| {
                    let hits = scored
                        .iter()
                        .take(n)
                        .map(|&(_, distance, ci)| {
                            let r = &records[ci];
                            QueryHit {
                                image_id: r.image_id,
                                class_label: r.class_label,
                                relative_path: r.relative_path.clone(),
                                distance,
                            }
                        })
                        .collect();
                    score_query(
                        query.image_id,
                        &QueryResult { hits },
                        query.class_label,
                        related_total,
                        n,
                    )
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let query_seconds = started.elapsed().as_secs_f64();

    let cutoffs = n_values
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let at_n = || per_query.iter().map(move |o| &o[k]);
            let per_class = class_sizes
                .keys()
                .map(|&class| {
                    ClassSummary::from_outcomes(
                        Some(class),
                        at_n().zip(records).filter(|(_, r)| r.class_label == class).map(|(o, _)| o),
                    )
                })
                .collect();
            CutoffSummary {
                n,
                per_class,
                overall: ClassSummary::from_outcomes(None, at_n()),
            }
        })
        .collect();

    Ok(EvalReport {
        config: index.config()?,
        metric,
        include_self,
        cutoffs,
        outcomes: per_query.into_iter().flatten().collect(),
        warnings,
        extraction_seconds: None,
        query_seconds,
    })
}

#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub radii: Vec<u32>,
    pub metrics: Vec<MetricId>,
    pub n_values: Vec<usize>,
    pub edge_detector: EdgeDetector,
    pub include_self: bool,
}

/// Evaluates every (radius, metric) cell. Features depend only on the
/// radius, so one index is built per radius and shared by its metrics.
pub fn sweep(manifest: &DatasetManifest, options: &SweepOptions) -> Result<Vec<EvalReport>> {
    let mut reports = Vec::with_capacity(options.radii.len() * options.metrics.len());
    for &radius in &options.radii {
        let mut config = ExtractionConfig::new(radius)?;
        config.edge_detector = options.edge_detector;
        let started = Instant::now();
        let index = build_index(manifest, &config)?;
        let extraction_seconds = started.elapsed().as_secs_f64();
        for &metric in &options.metrics {
            let mut report = evaluate(&index, metric, &options.n_values, options.include_self)?;
            report.extraction_seconds = Some(extraction_seconds);
            reports.push(report);
        }
    }
    Ok(reports)
}

pub const CSV_HEADER: [&str; 6] = ["radius", "metric", "N", "class", "mean_precision", "mean_recall"];

/// Writes one row per (report, cutoff, class) plus a `class=ALL` row per
/// cutoff. Percentages use two decimals.
pub fn write_csv<W: io::Write>(reports: &[EvalReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for report in reports {
        let radius = report.radius().to_string();
        for cutoff in &report.cutoffs {
            let n = cutoff.n.to_string();
            for row in cutoff.per_class.iter().chain(std::iter::once(&cutoff.overall)) {
                let class = row.class.map_or_else(|| "ALL".to_owned(), |c| c.to_string());
                w.write_record([
                    radius.as_str(),
                    report.metric.as_str(),
                    &n,
                    &class,
                    &format!("{:.2}", row.mean_precision),
                    &format!("{:.2}", row.mean_recall),
                ])?;
            }
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Aligned overall precision/recall table, one line per (report, cutoff).
pub fn render_table(reports: &[EvalReport]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>6}  {:<13}  {:>4}  {:>9}  {:>9}",
        "radius", "metric", "N", "precision", "recall"
    );
    for report in reports {
        for c in &report.cutoffs {
            let _ = writeln!(
                s,
                "{:>6}  {:<13}  {:>4}  {:>9.2}  {:>9.2}",
                report.radius(),
                report.metric.as_str(),
                c.n,
                c.overall.mean_precision,
                c.overall.mean_recall
            );
        }
    }
    s
}
