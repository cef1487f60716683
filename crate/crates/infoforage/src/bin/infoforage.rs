//! Command-line frontend: measure corpora, analyse trends, compare
//! categories, correlate series, and run model simulations.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use infoforage::lexical::{Category, DEFAULT_SAMPLE_SIZE};
use infoforage::pipeline::{
    self, Aggregate, MeasureName, SimulationKind, TrendOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Jsonl,
    Svg,
}

#[derive(Parser)]
#[command(name = "infoforage", version, about = "Information-foraging models and lexical trend analysis")]
struct Cli {
    /// Output path (defaults depend on the subcommand)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// RNG seed for simulations (overrides any seed in a config file)
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for measure; overrides INFOFORAGE_THREADS (0 = one per core)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Primary output format; svg additionally emits a plot next to the data
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Clean, truncate, and measure every text in a manifest, writing JSONL records
    Measure {
        /// Manifest CSV with header: path,year,category,profile,source_id
        manifest: PathBuf,
        /// Tokens retained from the end of each cleaned text
        #[arg(long, default_value_t = DEFAULT_SAMPLE_SIZE)]
        sample_size: usize,
    },
    /// Per-category annual trend tests (KPSS + Mann-Kendall) with smoothed series
    Trend {
        /// Measures JSONL produced by `measure`
        measures: PathBuf,
        /// Which measure to analyse: word_entropy_bits | type_token_ratio | zipf_exponent
        #[arg(long, default_value = "word_entropy_bits")]
        measure: MeasureName,
        /// Comma-separated category filter (default: all present)
        #[arg(long)]
        categories: Option<String>,
        #[arg(long, default_value_t = 1900)]
        start_year: i32,
        /// Defaults to the latest year in the data
        #[arg(long)]
        end_year: Option<i32>,
        /// Annual aggregation: median | mean
        #[arg(long, default_value = "median")]
        aggregate: Aggregate,
    },
    /// One-way ANOVA across categories per measure, with KDE curves and quartiles
    Compare {
        /// Measures JSONL produced by `measure`
        measures: PathBuf,
        /// Comma-separated category filter (default: all present)
        #[arg(long)]
        categories: Option<String>,
    },
    /// Pearson correlation of two annual (year,value) CSV series joined on year
    Correlate {
        series_a: PathBuf,
        series_b: PathBuf,
    },
    /// Model simulations: diet_sweep (selectivity) or frontier (minimum viable size)
    ///
    /// Sweep CSV columns: prevalence,utility_rate,status,diet_rate,diet_min_profitability.
    /// Frontier CSV columns: merged_rate,mean_item_rate,u_min,feasible.
    Simulate {
        /// diet_sweep | frontier
        kind: SimulationKind,
        /// TOML config file (key = value); unknown keys are rejected
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn parse_categories(spec: &Option<String>) -> Result<Option<Vec<Category>>> {
    match spec {
        None => Ok(None),
        Some(list) => list
            .split(',')
            .map(|s| s.parse::<Category>().map_err(|e| anyhow::anyhow!("{e}")))
            .collect::<Result<Vec<_>>>()
            .map(Some),
    }
}

fn sibling_with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    path.with_file_name(format!("{stem}{suffix}"))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();

    match &cli.command {
        Command::Measure {
            manifest,
            sample_size,
        } => {
            let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("measures.jsonl"));
            let threads = pipeline::resolve_threads(cli.threads);
            let summary = pipeline::run_measure(manifest, &out, *sample_size, threads)?;
            eprintln!(
                "wrote {} records to {} ({} skipped)",
                summary.written,
                out.display(),
                summary.skipped.len()
            );
        }
        Command::Trend {
            measures,
            measure,
            categories,
            start_year,
            end_year,
            aggregate,
        } => {
            let records = pipeline::load_measures(measures)?;
            let opts = TrendOptions {
                measure: *measure,
                categories: parse_categories(categories)?,
                start_year: *start_year,
                end_year: *end_year,
                aggregate: *aggregate,
                ..TrendOptions::default()
            };
            let (report, smoothed) = pipeline::run_trend(&records, &opts)?;
            let report_path = cli
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from("trend_report.json"));
            let csv_path = sibling_with_suffix(&report_path, "_series.csv");
            write_json(&report_path, &report)?;
            pipeline::write_smoothed_csv(&csv_path, &smoothed, &report.combined)?;
            for row in &report.categories {
                eprintln!(
                    "{}: kpss p={:.4} mk p={:.4}",
                    row.category, row.kpss.p_value, row.mann_kendall.p_value
                );
            }
            eprintln!("report: {}, series: {}", report_path.display(), csv_path.display());
        }
        Command::Compare {
            measures,
            categories,
        } => {
            let records = pipeline::load_measures(measures)?;
            let filter = parse_categories(categories)?;
            let (report, curves) = pipeline::run_compare(&records, filter.as_deref())?;
            let report_path = cli
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from("compare_report.json"));
            let kde_path = sibling_with_suffix(&report_path, "_kde.csv");
            write_json(&report_path, &report)?;
            pipeline::write_kde_csv(&kde_path, &curves)?;
            if cli.format == OutputFormat::Svg {
                for measure in MeasureName::ALL {
                    let svg_path = sibling_with_suffix(&report_path, &format!("_{measure}.svg"));
                    pipeline::write_kde_svg(&svg_path, &curves, measure)?;
                }
            }
            eprintln!("report: {}, kde: {}", report_path.display(), kde_path.display());
        }
        Command::Correlate { series_a, series_b } => {
            let a = pipeline::read_year_series(series_a)?;
            let b = pipeline::read_year_series(series_b)?;
            let report = pipeline::run_correlate(&a, &b)?;
            match &cli.out {
                Some(path) => write_json(path, &report)?,
                None => println!("{}", serde_json::to_string_pretty(&report)?),
            }
            eprintln!(
                "pearson r={:.4} p={:.4} over {} years",
                report.pearson.statistic, report.pearson.p_value, report.n_years
            );
        }
        Command::Simulate { kind, config } => {
            let config_text = match config {
                Some(path) => fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?,
                None => String::new(),
            };
            match kind {
                SimulationKind::DietSweep => {
                    let mut sweep = pipeline::parse_sweep_config(&config_text)?;
                    let config_has_seed = config_text.contains("seed");
                    match cli.seed {
                        Some(seed) => sweep.seed = seed,
                        None if !config_has_seed => {
                            eprintln!("warning: no seed provided, defaulting to seed=0");
                        }
                        None => {}
                    }
                    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("sweep.csv"));
                    pipeline::write_sweep_csv(&out, &sweep)?;
                    if cli.format == OutputFormat::Svg {
                        pipeline::write_sweep_svg(&out.with_extension("svg"), &sweep)?;
                    }
                    eprintln!("sweep written to {}", out.display());
                }
                SimulationKind::Frontier => {
                    let frontier = pipeline::parse_frontier_config(&config_text)?;
                    let out = cli
                        .out
                        .clone()
                        .unwrap_or_else(|| PathBuf::from("frontier.csv"));
                    pipeline::write_frontier_csv(&out, &frontier)?;
                    if cli.format == OutputFormat::Svg {
                        pipeline::write_frontier_svg(&out.with_extension("svg"), &frontier)?;
                    }
                    eprintln!("frontier written to {}", out.display());
                }
            }
        }
    }
    Ok(())
}
