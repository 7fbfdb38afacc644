use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use texref_core::descriptors::ElbpConfig;
use texref_core::eval::render_table;
use texref_core::{
    build_index, evaluate, scan_dataset, sweep, write_csv, EdgeDetector, Error, EvalReport,
    ExtractionConfig, Index, Labeling, MetricId, NeighborhoodSpec, SweepOptions,
};

/// Texture-based image retrieval: build indexes, query them, and run
/// precision/recall benchmarks.
#[derive(Debug, Parser)]
#[command(name = "texref", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Extract features for every image under a dataset root.
    Index(IndexArgs),
    /// Rank indexed images by distance to a query image.
    Query(QueryArgs),
    /// Use every indexed image as a query and report precision/recall.
    Evaluate(EvaluateArgs),
    /// Evaluate every (radius, metric) combination on a dataset.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
struct IndexArgs {
    #[arg(long)]
    root: PathBuf,
    #[arg(long, default_value = "simplicity")]
    labeling: Labeling,
    #[arg(long, default_value_t = 1, value_parser = parse_radius)]
    radius: u32,
    #[arg(long, default_value = "sobel-otsu")]
    edge: EdgeDetector,
    /// Uniformity threshold; defaults to P/4.
    #[arg(long)]
    uniformity_threshold: Option<u32>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct QueryArgs {
    #[arg(long)]
    index: PathBuf,
    #[arg(long)]
    image: PathBuf,
    #[arg(long, default_value = "euclidean")]
    metric: MetricId,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    #[arg(long)]
    include_self: bool,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    index: PathBuf,
    #[arg(long, default_value = "euclidean")]
    metric: MetricId,
    #[arg(long, value_delimiter = ',', default_value = "10,20,40", value_parser = parse_cutoff)]
    n: Vec<usize>,
    #[arg(long)]
    include_self: bool,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    root: PathBuf,
    #[arg(long, default_value = "simplicity")]
    labeling: Labeling,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3", value_parser = parse_radius)]
    radii: Vec<u32>,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "euclidean,cosine,cityblock,canberra,loglikelihood"
    )]
    metrics: Vec<MetricId>,
    #[arg(long, value_delimiter = ',', default_value = "10", value_parser = parse_cutoff)]
    n: Vec<usize>,
    #[arg(long, default_value = "sobel-otsu")]
    edge: EdgeDetector,
    #[arg(long)]
    include_self: bool,
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn parse_radius(s: &str) -> Result<u32, String> {
    let r: u32 = s.parse().map_err(|_| format!("`{s}` is not an integer"))?;
    NeighborhoodSpec::new(r).map(|_| r).map_err(|e| e.to_string())
}

fn parse_cutoff(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(format!("`{s}` is not a positive integer")),
    }
}

/// Failure with the exit status it maps to.
#[derive(Debug)]
struct Failure {
    status: u8,
    message: String,
}

const EXIT_FAILURE: u8 = 1;
const EXIT_IO: u8 = 3;
const EXIT_INCOMPATIBLE_INDEX: u8 = 4;

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let status = match &err {
            Error::Io { .. } | Error::NoImages(_) => EXIT_IO,
            Error::Extraction { source, .. } if matches!(**source, Error::Io { .. }) => EXIT_IO,
            Error::UnsupportedVersion(_)
            | Error::Truncated(_)
            | Error::CorruptFeatureLength(_)
            | Error::CorruptHeader(_)
            | Error::CorruptRecord(_)
            | Error::IncompatibleConfig { .. } => EXIT_INCOMPATIBLE_INDEX,
            _ => EXIT_FAILURE,
        };
        Failure {
            status,
            message: err.to_string(),
        }
    }
}

fn io_failure(path: &Path, err: io::Error) -> Failure {
    Error::Io {
        path: path.into(),
        source: err,
    }
    .into()
}

fn write_reports_csv(reports: &[EvalReport], path: &Path) -> Result<(), Failure> {
    let file = File::create(path).map_err(|e| io_failure(path, e))?;
    write_csv(reports, BufWriter::new(file)).map_err(|e| Failure {
        status: EXIT_IO,
        message: format!("cannot write {}: {e}", path.display()),
    })
}

fn print_warnings(reports: &[EvalReport]) {
    for warning in reports.iter().flat_map(|r| &r.warnings) {
        eprintln!("texref: warning: {warning}");
    }
}

fn mode_line(include_self: bool) -> &'static str {
    if include_self {
        "mode: query included in its own results (M = class size)"
    } else {
        "mode: query excluded from its own results (M = class size - 1)"
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let write_failed = |e: io::Error| Failure {
        status: EXIT_IO,
        message: format!("cannot write to standard output: {e}"),
    };
    match cli.command {
        Command::Index(args) => {
            let spec = NeighborhoodSpec::new(args.radius)?;
            let elbp = match args.uniformity_threshold {
                Some(t) => ElbpConfig::with_threshold(spec, t),
                None => ElbpConfig::new(spec),
            };
            let config = ExtractionConfig {
                elbp,
                edge_detector: args.edge,
            };
            // Fail on an unwritable destination before spending time on extraction.
            File::create(&args.out).map_err(|e| io_failure(&args.out, e))?;
            let built = scan_dataset(&args.root, args.labeling).and_then(|manifest| {
                let index = build_index(&manifest, &config)?;
                index.save(&args.out)?;
                Ok((manifest, index))
            });
            let (manifest, index) = built.inspect_err(|_| {
                let _ = std::fs::remove_file(&args.out);
            })?;
            writeln!(
                out,
                "indexed {} images ({} classes, {} features each) into {}",
                index.len(),
                manifest.class_counts().len(),
                index.header().feature_length,
                args.out.display()
            )
            .map_err(write_failed)?;
        }
        Command::Query(args) => {
            let index = Index::load(&args.index)?;
            let result = index.query(&args.image, args.metric, args.n as usize, args.include_self)?;
            for (rank, hit) in result.hits.iter().enumerate() {
                writeln!(
                    out,
                    "{}\t{}\t{}\t{:.6}\t{}",
                    rank + 1,
                    hit.image_id,
                    hit.class_label,
                    hit.distance,
                    hit.relative_path
                )
                .map_err(write_failed)?;
            }
        }
        Command::Evaluate(args) => {
            let index = Index::load(&args.index)?;
            let report = evaluate(&index, args.metric, &args.n, args.include_self)?;
            let reports = [report];
            print_warnings(&reports);
            if let Some(path) = &args.csv {
                write_reports_csv(&reports, path)?;
            }
            writeln!(out, "{}", mode_line(args.include_self)).map_err(write_failed)?;
            write!(out, "{}", render_table(&reports)).map_err(write_failed)?;
        }
        Command::Sweep(args) => {
            let manifest = scan_dataset(&args.root, args.labeling)?;
            let options = SweepOptions {
                radii: args.radii,
                metrics: args.metrics,
                n_values: args.n,
                edge_detector: args.edge,
                include_self: args.include_self,
            };
            let reports = sweep(&manifest, &options)?;
            print_warnings(&reports);
            if let Some(path) = &args.csv {
                write_reports_csv(&reports, path)?;
            }
            writeln!(out, "{}", mode_line(args.include_self)).map_err(write_failed)?;
            write!(out, "{}", render_table(&reports)).map_err(write_failed)?;
        }
    }
    Ok(())
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("TEXREF_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().map_err(|_| Failure {
        status: EXIT_FAILURE,
        message: format!("TEXREF_THREADS must be a non-negative integer, got `{raw}`"),
    })?;
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure {
                status: EXIT_FAILURE,
                message: format!("cannot configure thread pool: {e}"),
            })?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|()| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("texref: error: {}", failure.message);
            ExitCode::from(failure.status)
        }
    }
}
