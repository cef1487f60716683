//! Manifest-driven ingestion, measure persistence, and the analysis
//! commands behind the `infoforage` CLI.
//!
//! Measures are stored as JSONL (one record per sample); figure data goes
//! to CSV. Every output embeds the tool version and a config hash so
//! records produced under different parameters are never mixed in one
//! analysis.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::lexical::{self, Category, CleanProfile, LexicalError};
use crate::sim::{self, DietSweepConfig, SimError};
use crate::svg::SvgPlot;
use crate::trend::{
    self, combine_categories, moving_average_ci, TimeseriesPoint, TrendError, TrendTestResult,
};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// A smoothed timeseries for one category.
pub type SmoothedSeries = (Category, Vec<TimeseriesPoint>);
/// One KDE curve: measure, category, and (x, density) points.
pub type KdeCurve = (MeasureName, Category, Vec<(f64, f64)>);
pub const MANIFEST_HEADER: [&str; 5] = ["path", "year", "category", "profile", "source_id"];
pub const THREADS_ENV_VAR: &str = "INFOFORAGE_THREADS";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed manifest: {0}")]
    Manifest(String),
    #[error("malformed measures file {path}: {reason}")]
    Measures { path: PathBuf, reason: String },
    #[error("records with differing config_hash cannot be mixed: {0} vs {1}")]
    MixedConfigHash(String, String),
    #[error("all {0} manifest rows failed")]
    AllRowsFailed(usize),
    #[error("category {category} has only {have} years of data in range, need {need}")]
    InsufficientYears {
        category: Category,
        have: usize,
        need: usize,
    },
    #[error("need at least 2 categories with 2+ samples each, found {0}")]
    TooFewGroups(usize),
    #[error("only {0} overlapping years, need at least 3")]
    TooFewOverlappingYears(usize),
    #[error("unknown config keys: {0}")]
    UnknownConfigKeys(String),
    #[error("invalid config value for {key}: {reason}")]
    ConfigValue { key: String, reason: String },
    #[error(transparent)]
    Lexical(#[from] LexicalError),
    #[error(transparent)]
    Trend(#[from] TrendError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// One row of the ingestion manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestRow {
    pub path: PathBuf,
    pub year: Option<i32>,
    pub category: Category,
    pub profile: CleanProfile,
    pub source_id: String,
}

/// Read and validate a manifest CSV with the exact header
/// `path,year,category,profile,source_id`.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRow>, PipelineError> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let expected: Vec<&str> = MANIFEST_HEADER.to_vec();
    let got: Vec<&str> = headers.iter().collect();
    if got != expected {
        return Err(PipelineError::Manifest(format!(
            "header must be '{}', got '{}'",
            expected.join(","),
            got.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != 5 {
            return Err(PipelineError::Manifest(format!(
                "row {} has {} fields, expected 5",
                line + 2,
                record.len()
            )));
        }
        let year = match record[1].trim() {
            "" => None,
            y => Some(y.parse::<i32>().map_err(|_| {
                PipelineError::Manifest(format!("row {}: bad year '{}'", line + 2, y))
            })?),
        };
        let category = record[2]
            .parse::<Category>()
            .map_err(|e| PipelineError::Manifest(format!("row {}: {}", line + 2, e)))?;
        let profile = record[3]
            .parse::<CleanProfile>()
            .map_err(|e| PipelineError::Manifest(format!("row {}: {}", line + 2, e)))?;
        rows.push(ManifestRow {
            path: PathBuf::from(&record[0]),
            year,
            category,
            profile,
            source_id: record[4].to_string(),
        });
    }
    Ok(rows)
}

/// One measured sample, as persisted to JSONL.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureRecord {
    pub source_id: String,
    pub year: Option<i32>,
    pub category: Category,
    pub n_tokens: usize,
    pub word_entropy_bits: f64,
    pub type_token_ratio: f64,
    pub zipf_exponent: f64,
    pub zipf_loglik: f64,
    pub tool_version: String,
    pub config_hash: String,
}

/// Stable digest of every parameter that affects cleaning and measures.
pub fn measure_config_hash(sample_size: usize) -> String {
    let descriptor = format!(
        "measure:v1;sample_size={sample_size};lowercase=true;drop_nonalnum=true;\
         zipf_bracket=1.0001..20;zipf_tol=1e-6;zipf_xmin=1"
    );
    hex_digest(&descriptor)
}

fn hex_digest(input: &str) -> String {
    let digest = Sha256::digest(input.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct MeasureSummary {
    pub written: usize,
    pub skipped: Vec<SkippedRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SkippedRow {
    pub source_id: String,
    pub path: PathBuf,
    pub reason: String,
}

/// Resolve the worker count: CLI flag beats `INFOFORAGE_THREADS`, which
/// beats the rayon default (0 = one per core).
pub fn resolve_threads(cli: Option<usize>) -> usize {
    cli.or_else(|| {
        std::env::var(THREADS_ENV_VAR)
            .ok()
            .and_then(|v| v.parse().ok())
    })
    .unwrap_or(0)
}

fn measure_row(row: &ManifestRow, sample_size: usize, hash: &str) -> Result<MeasureRecord, String> {
    let raw = fs::read_to_string(&row.path).map_err(|e| format!("unreadable: {e}"))?;
    let sample = lexical::clean_and_tokenize(&raw, row.profile)
        .map_err(|e| e.to_string())?
        .with_metadata(row.year, row.category, &row.source_id);
    let sample = match lexical::truncate_last(&sample, sample_size) {
        Ok(s) => s,
        Err(LexicalError::TooShort { .. }) => return Err("too_short".to_string()),
        Err(e) => return Err(e.to_string()),
    };
    let m = lexical::measures(&sample).map_err(|e| e.to_string())?;
    Ok(MeasureRecord {
        source_id: row.source_id.clone(),
        year: row.year,
        category: row.category,
        n_tokens: m.n_tokens,
        word_entropy_bits: m.word_entropy_bits,
        type_token_ratio: m.type_token_ratio,
        zipf_exponent: m.zipf_exponent,
        zipf_loglik: m.zipf_loglik,
        tool_version: TOOL_VERSION.to_string(),
        config_hash: hash.to_string(),
    })
}

/// Clean, truncate and measure every manifest row, writing one JSONL
/// record per sample in manifest order. Rows are processed in parallel;
/// per-row failures are logged and skipped, and only a fully failing run
/// is an error.
pub fn run_measure(
    manifest_path: &Path,
    out_path: &Path,
    sample_size: usize,
    threads: usize,
) -> Result<MeasureSummary, PipelineError> {
    let rows = read_manifest(manifest_path)?;
    let hash = measure_config_hash(sample_size);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool construction");
    let results: Vec<Result<MeasureRecord, String>> = pool.install(|| {
        rows.par_iter()
            .map(|row| measure_row(row, sample_size, &hash))
            .collect()
    });

    let mut out = fs::File::create(out_path).map_err(io_err(out_path))?;
    let mut written = 0;
    let mut skipped = Vec::new();
    for (row, result) in rows.iter().zip(results) {
        match result {
            Ok(record) => {
                serde_json::to_writer(&mut out, &record)?;
                out.write_all(b"\n").map_err(io_err(out_path))?;
                written += 1;
            }
            Err(reason) => {
                eprintln!("skip {} ({}): {}", row.source_id, row.path.display(), reason);
                skipped.push(SkippedRow {
                    source_id: row.source_id.clone(),
                    path: row.path.clone(),
                    reason,
                });
            }
        }
    }
    if written == 0 && !rows.is_empty() {
        return Err(PipelineError::AllRowsFailed(rows.len()));
    }
    Ok(MeasureSummary { written, skipped })
}

/// Load a measures JSONL file, rejecting mixed config hashes.
pub fn load_measures(path: &Path) -> Result<Vec<MeasureRecord>, PipelineError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: MeasureRecord =
            serde_json::from_str(line).map_err(|e| PipelineError::Measures {
                path: path.to_path_buf(),
                reason: format!("line {}: {}", i + 1, e),
            })?;
        if let Some(first) = records.first() {
            let first: &MeasureRecord = first;
            if first.config_hash != record.config_hash {
                return Err(PipelineError::MixedConfigHash(
                    first.config_hash.clone(),
                    record.config_hash.clone(),
                ));
            }
        }
        records.push(record);
    }
    if records.is_empty() {
        return Err(PipelineError::Measures {
            path: path.to_path_buf(),
            reason: "no records".to_string(),
        });
    }
    Ok(records)
}

/// Which lexical measure an analysis runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureName {
    WordEntropyBits,
    TypeTokenRatio,
    ZipfExponent,
}

impl MeasureName {
    pub const ALL: [MeasureName; 3] = [
        MeasureName::WordEntropyBits,
        MeasureName::TypeTokenRatio,
        MeasureName::ZipfExponent,
    ];

    pub fn extract(&self, record: &MeasureRecord) -> f64 {
        match self {
            MeasureName::WordEntropyBits => record.word_entropy_bits,
            MeasureName::TypeTokenRatio => record.type_token_ratio,
            MeasureName::ZipfExponent => record.zipf_exponent,
        }
    }
}

impl FromStr for MeasureName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "word_entropy_bits" | "word_entropy" | "entropy" => Ok(MeasureName::WordEntropyBits),
            "type_token_ratio" | "ttr" => Ok(MeasureName::TypeTokenRatio),
            "zipf_exponent" | "zipf" => Ok(MeasureName::ZipfExponent),
            other => Err(format!("unknown measure '{other}'")),
        }
    }
}

impl fmt::Display for MeasureName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            MeasureName::WordEntropyBits => "word_entropy_bits",
            MeasureName::TypeTokenRatio => "type_token_ratio",
            MeasureName::ZipfExponent => "zipf_exponent",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregate {
    Median,
    Mean,
}

impl FromStr for Aggregate {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "median" => Ok(Aggregate::Median),
            "mean" => Ok(Aggregate::Mean),
            other => Err(format!("unknown aggregate '{other}'")),
        }
    }
}

fn aggregate_values(values: &mut [f64], how: Aggregate) -> f64 {
    match how {
        Aggregate::Mean => values.iter().sum::<f64>() / values.len() as f64,
        Aggregate::Median => {
            values.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let n = values.len();
            if n % 2 == 1 {
                values[n / 2]
            } else {
                0.5 * (values[n / 2 - 1] + values[n / 2])
            }
        }
    }
}

pub struct TrendOptions {
    pub measure: MeasureName,
    pub categories: Option<Vec<Category>>,
    pub start_year: i32,
    pub end_year: Option<i32>,
    pub aggregate: Aggregate,
    pub min_years: usize,
}

impl Default for TrendOptions {
    fn default() -> Self {
        Self {
            measure: MeasureName::WordEntropyBits,
            categories: None,
            start_year: 1900,
            end_year: None,
            aggregate: Aggregate::Median,
            min_years: 10,
        }
    }
}

/// One table row of the trend report: the (KPSS p, MK p) cell pair for a
/// category.
#[derive(Debug, Clone, Serialize)]
pub struct CategoryTrend {
    pub category: Category,
    pub n_years: usize,
    pub kpss: TrendTestResult,
    pub mann_kendall: TrendTestResult,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrendReport {
    pub measure: MeasureName,
    pub start_year: i32,
    pub end_year: i32,
    pub aggregate: Aggregate,
    pub tool_version: String,
    pub config_hash: String,
    pub categories: Vec<CategoryTrend>,
    pub combined: Vec<TimeseriesPoint>,
}

/// Annual per-category aggregates, trend tests, and the smoothed series.
/// Returns the report plus per-category smoothed series for CSV emission.
pub fn run_trend(
    records: &[MeasureRecord],
    opts: &TrendOptions,
) -> Result<(TrendReport, Vec<SmoothedSeries>), PipelineError> {
    let config_hash = records[0].config_hash.clone();
    let end_year = opts.end_year.unwrap_or_else(|| {
        records
            .iter()
            .filter_map(|r| r.year)
            .max()
            .unwrap_or(opts.start_year)
    });

    // category -> year -> values
    let mut grouped: BTreeMap<Category, BTreeMap<i32, Vec<f64>>> = BTreeMap::new();
    for record in records {
        let Some(year) = record.year else { continue };
        if year < opts.start_year || year > end_year {
            continue;
        }
        if let Some(filter) = &opts.categories {
            if !filter.contains(&record.category) {
                continue;
            }
        }
        grouped
            .entry(record.category)
            .or_default()
            .entry(year)
            .or_default()
            .push(opts.measure.extract(record));
    }

    let mut categories = Vec::new();
    let mut smoothed_series = Vec::new();
    for (category, by_year) in &grouped {
        if by_year.len() < opts.min_years {
            return Err(PipelineError::InsufficientYears {
                category: *category,
                have: by_year.len(),
                need: opts.min_years,
            });
        }
        let annual: Vec<f64> = by_year
            .values()
            .map(|values| aggregate_values(&mut values.clone(), opts.aggregate))
            .collect();
        let kpss = trend::kpss_level(&annual)?;
        let mk = trend::mann_kendall(&annual)?;
        categories.push(CategoryTrend {
            category: *category,
            n_years: by_year.len(),
            kpss,
            mann_kendall: mk,
        });

        let raw_points: Vec<(i32, f64)> = by_year
            .iter()
            .flat_map(|(&year, values)| values.iter().map(move |&v| (year, v)))
            .collect();
        smoothed_series.push((*category, moving_average_ci(&raw_points, 5, 10)));
    }

    let combined = combine_categories(
        &smoothed_series
            .iter()
            .map(|(_, s)| s.clone())
            .collect::<Vec<_>>(),
    );

    let report = TrendReport {
        measure: opts.measure,
        start_year: opts.start_year,
        end_year,
        aggregate: opts.aggregate,
        tool_version: TOOL_VERSION.to_string(),
        config_hash,
        categories,
        combined,
    };
    Ok((report, smoothed_series))
}

/// Write the smoothed per-category series (plus the combined series) as
/// CSV.
pub fn write_smoothed_csv(
    path: &Path,
    series: &[SmoothedSeries],
    combined: &[TimeseriesPoint],
) -> Result<(), PipelineError> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["category", "year", "mean", "std_error", "ci_low", "ci_high", "n"])?;
    let mut write_series = |name: &str, points: &[TimeseriesPoint]| -> Result<(), PipelineError> {
        for p in points {
            writer.write_record([
                name,
                &p.year.to_string(),
                &format!("{:.12}", p.mean),
                &format!("{:.12}", p.std_error),
                &format!("{:.12}", p.mean - p.ci_half_width()),
                &format!("{:.12}", p.mean + p.ci_half_width()),
                &p.n.to_string(),
            ])?;
        }
        Ok(())
    };
    for (category, points) in series {
        write_series(&category.to_string(), points)?;
    }
    write_series("combined", combined)?;
    writer.flush().map_err(io_err(path))?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct CategoryDistribution {
    pub category: Category,
    pub n: usize,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MeasureComparison {
    pub measure: MeasureName,
    pub anova: TrendTestResult,
    pub distributions: Vec<CategoryDistribution>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub tool_version: String,
    pub config_hash: String,
    pub measures: Vec<MeasureComparison>,
}

/// ANOVA across categories for each measure, plus per-category KDE curves
/// and quartiles.
pub fn run_compare(
    records: &[MeasureRecord],
    categories: Option<&[Category]>,
) -> Result<(CompareReport, Vec<KdeCurve>), PipelineError> {
    let mut by_category: BTreeMap<Category, Vec<&MeasureRecord>> = BTreeMap::new();
    for record in records {
        if let Some(filter) = categories {
            if !filter.contains(&record.category) {
                continue;
            }
        }
        by_category.entry(record.category).or_default().push(record);
    }
    let eligible: Vec<(&Category, &Vec<&MeasureRecord>)> =
        by_category.iter().filter(|(_, v)| v.len() >= 2).collect();
    if eligible.len() < 2 {
        return Err(PipelineError::TooFewGroups(eligible.len()));
    }

    let mut measures = Vec::new();
    let mut curves = Vec::new();
    for measure in MeasureName::ALL {
        let groups: Vec<Vec<f64>> = eligible
            .iter()
            .map(|(_, records)| records.iter().map(|r| measure.extract(r)).collect())
            .collect();
        let anova = trend::anova_oneway(&groups)?;
        let mut distributions = Vec::new();
        for ((category, _), values) in eligible.iter().zip(&groups) {
            let (q1, median, q3) = trend::quartiles(values);
            distributions.push(CategoryDistribution {
                category: **category,
                n: values.len(),
                q1,
                median,
                q3,
            });
            if let Ok(curve) = trend::kde_scott(values) {
                curves.push((measure, **category, curve));
            }
        }
        measures.push(MeasureComparison {
            measure,
            anova,
            distributions,
        });
    }
    let report = CompareReport {
        tool_version: TOOL_VERSION.to_string(),
        config_hash: records[0].config_hash.clone(),
        measures,
    };
    Ok((report, curves))
}

pub fn write_kde_csv(
    path: &Path,
    curves: &[KdeCurve],
) -> Result<(), PipelineError> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["measure", "category", "x", "density"])?;
    for (measure, category, curve) in curves {
        for (x, density) in curve {
            writer.write_record([
                &measure.to_string(),
                &category.to_string(),
                &format!("{x:.12}"),
                &format!("{density:.12}"),
            ])?;
        }
    }
    writer.flush().map_err(io_err(path))?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrelateReport {
    pub n_years: usize,
    pub pearson: TrendTestResult,
    pub tool_version: String,
}

/// Read a (year,value) CSV; a `year,value` header row is optional.
pub fn read_year_series(path: &Path) -> Result<Vec<(i32, f64)>, PipelineError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)?;
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if i == 0 && record.get(0).map(|f| f.trim()) == Some("year") {
            continue;
        }
        if record.len() < 2 {
            return Err(PipelineError::Measures {
                path: path.to_path_buf(),
                reason: format!("line {}: expected year,value", i + 1),
            });
        }
        let year: i32 = record[0].trim().parse().map_err(|_| PipelineError::Measures {
            path: path.to_path_buf(),
            reason: format!("line {}: bad year '{}'", i + 1, &record[0]),
        })?;
        let value: f64 = record[1].trim().parse().map_err(|_| PipelineError::Measures {
            path: path.to_path_buf(),
            reason: format!("line {}: bad value '{}'", i + 1, &record[1]),
        })?;
        out.push((year, value));
    }
    Ok(out)
}

/// Inner-join two annual series on year and correlate.
pub fn run_correlate(
    series_a: &[(i32, f64)],
    series_b: &[(i32, f64)],
) -> Result<CorrelateReport, PipelineError> {
    let b_by_year: BTreeMap<i32, f64> = series_b.iter().copied().collect();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &(year, value) in series_a {
        if let Some(&other) = b_by_year.get(&year) {
            xs.push(value);
            ys.push(other);
        }
    }
    if xs.len() < 3 {
        return Err(PipelineError::TooFewOverlappingYears(xs.len()));
    }
    let pearson = trend::pearson(&xs, &ys)?;
    Ok(CorrelateReport {
        n_years: xs.len(),
        pearson,
        tool_version: TOOL_VERSION.to_string(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimulationKind {
    DietSweep,
    Frontier,
}

impl FromStr for SimulationKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "diet_sweep" | "sweep" => Ok(SimulationKind::DietSweep),
            "frontier" => Ok(SimulationKind::Frontier),
            other => Err(format!("unknown simulation kind '{other}'")),
        }
    }
}

/// Frontier grid parameters with the default grid from the figure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierConfig {
    pub merged_rate_grid: Vec<f64>,
    pub mean_item_rate_grid: Vec<f64>,
    pub env_rate: f64,
}

impl Default for FrontierConfig {
    fn default() -> Self {
        Self {
            merged_rate_grid: (0..40).map(|i| 0.25 * (i + 1) as f64).collect(),
            mean_item_rate_grid: vec![3.0, 5.0, 10.0, 50.0],
            env_rate: 2.0,
        }
    }
}

const SWEEP_KEYS: [&str; 8] = [
    "prevalence_grid",
    "items_per_unit_prevalence",
    "rate_low",
    "rate_high",
    "removal_prob",
    "handling_time",
    "base_encounter_rate",
    "seed",
];
const FRONTIER_KEYS: [&str; 3] = ["merged_rate_grid", "mean_item_rate_grid", "env_rate"];

fn check_keys(table: &toml::value::Table, known: &[&str]) -> Result<(), PipelineError> {
    let unknown: Vec<String> = table
        .keys()
        .filter(|k| !known.contains(&k.as_str()))
        .cloned()
        .collect();
    if unknown.is_empty() {
        Ok(())
    } else {
        Err(PipelineError::UnknownConfigKeys(unknown.join(", ")))
    }
}

fn toml_f64(value: &toml::Value, key: &str) -> Result<f64, PipelineError> {
    value
        .as_float()
        .or_else(|| value.as_integer().map(|i| i as f64))
        .ok_or_else(|| PipelineError::ConfigValue {
            key: key.to_string(),
            reason: "expected a number".to_string(),
        })
}

fn toml_grid(value: &toml::Value, key: &str) -> Result<Vec<f64>, PipelineError> {
    value
        .as_array()
        .ok_or_else(|| PipelineError::ConfigValue {
            key: key.to_string(),
            reason: "expected an array of numbers".to_string(),
        })?
        .iter()
        .map(|v| toml_f64(v, key))
        .collect()
}

/// Parse a diet-sweep config from TOML key=value text over the defaults.
pub fn parse_sweep_config(text: &str) -> Result<DietSweepConfig, PipelineError> {
    let table: toml::value::Table =
        toml::from_str(text).map_err(|e| PipelineError::ConfigValue {
            key: "<config>".to_string(),
            reason: e.to_string(),
        })?;
    check_keys(&table, &SWEEP_KEYS)?;
    let mut config = DietSweepConfig::default();
    for (key, value) in &table {
        match key.as_str() {
            "prevalence_grid" => config.prevalence_grid = toml_grid(value, key)?,
            "items_per_unit_prevalence" => {
                config.items_per_unit_prevalence = toml_f64(value, key)?
            }
            "rate_low" => config.rate_low = toml_f64(value, key)?,
            "rate_high" => config.rate_high = toml_f64(value, key)?,
            "removal_prob" => config.removal_prob = toml_f64(value, key)?,
            "handling_time" => config.handling_time = toml_f64(value, key)?,
            "base_encounter_rate" => config.base_encounter_rate = toml_f64(value, key)?,
            "seed" => {
                config.seed =
                    value
                        .as_integer()
                        .map(|i| i as u64)
                        .ok_or_else(|| PipelineError::ConfigValue {
                            key: key.clone(),
                            reason: "expected an integer".to_string(),
                        })?
            }
            _ => unreachable!("keys checked above"),
        }
    }
    Ok(config)
}

/// Parse a frontier config from TOML key=value text over the defaults.
pub fn parse_frontier_config(text: &str) -> Result<FrontierConfig, PipelineError> {
    let table: toml::value::Table =
        toml::from_str(text).map_err(|e| PipelineError::ConfigValue {
            key: "<config>".to_string(),
            reason: e.to_string(),
        })?;
    check_keys(&table, &FRONTIER_KEYS)?;
    let mut config = FrontierConfig::default();
    for (key, value) in &table {
        match key.as_str() {
            "merged_rate_grid" => config.merged_rate_grid = toml_grid(value, key)?,
            "mean_item_rate_grid" => config.mean_item_rate_grid = toml_grid(value, key)?,
            "env_rate" => config.env_rate = toml_f64(value, key)?,
            _ => unreachable!("keys checked above"),
        }
    }
    Ok(config)
}

fn sweep_config_hash(config: &DietSweepConfig) -> String {
    hex_digest(&serde_json::to_string(config).expect("config serializes"))
}

fn frontier_config_hash(config: &FrontierConfig) -> String {
    hex_digest(&serde_json::to_string(config).expect("config serializes"))
}

/// Run the diet sweep and write long-format CSV (one row per item), with
/// seed, RNG name, and config hash in header comments.
pub fn write_sweep_csv(path: &Path, config: &DietSweepConfig) -> Result<(), PipelineError> {
    let points = sim::diet_sweep(config)?;
    let mut out = String::new();
    out.push_str(&format!("# tool_version={TOOL_VERSION}\n"));
    out.push_str(&format!("# rng={}\n", sim::RNG_NAME));
    out.push_str(&format!("# seed={}\n", config.seed));
    out.push_str(&format!("# config_hash={}\n", sweep_config_hash(config)));
    out.push_str("prevalence,utility_rate,status,diet_rate,diet_min_profitability\n");
    for point in &points {
        for &r in &point.consumed {
            out.push_str(&format!(
                "{},{:.12},consumed,{:.12},{:.12}\n",
                point.prevalence, r, point.diet_rate, point.diet_min_profitability
            ));
        }
        for &r in &point.survived_ignored {
            out.push_str(&format!(
                "{},{:.12},ignored,{:.12},{:.12}\n",
                point.prevalence, r, point.diet_rate, point.diet_min_profitability
            ));
        }
    }
    fs::write(path, out).map_err(io_err(path))?;
    Ok(())
}

/// Evaluate the viability frontier and write one CSV row per grid cell.
pub fn write_frontier_csv(path: &Path, config: &FrontierConfig) -> Result<(), PipelineError> {
    let cells = sim::viability_frontier(
        &config.merged_rate_grid,
        &config.mean_item_rate_grid,
        config.env_rate,
    )?;
    let mut out = String::new();
    out.push_str(&format!("# tool_version={TOOL_VERSION}\n"));
    out.push_str(&format!("# env_rate={}\n", config.env_rate));
    out.push_str(&format!("# config_hash={}\n", frontier_config_hash(config)));
    out.push_str("merged_rate,mean_item_rate,u_min,feasible\n");
    for cell in &cells {
        match cell.u_min.feasible() {
            Some(u) => out.push_str(&format!(
                "{},{},{:.12},true\n",
                cell.merged_rate, cell.mean_item_rate, u
            )),
            None => out.push_str(&format!(
                "{},{},,false\n",
                cell.merged_rate, cell.mean_item_rate
            )),
        }
    }
    fs::write(path, out).map_err(io_err(path))?;
    Ok(())
}

/// Scatter plot of the sweep (consumed vs ignored item rates).
pub fn write_sweep_svg(path: &Path, config: &DietSweepConfig) -> Result<(), PipelineError> {
    let points = sim::diet_sweep(config)?;
    let consumed: Vec<(f64, f64)> = points
        .iter()
        .flat_map(|p| p.consumed.iter().map(move |&r| (p.prevalence, r)))
        .collect();
    let ignored: Vec<(f64, f64)> = points
        .iter()
        .flat_map(|p| p.survived_ignored.iter().map(move |&r| (p.prevalence, r)))
        .collect();
    let xs: Vec<f64> = consumed.iter().chain(&ignored).map(|p| p.0).collect();
    let ys: Vec<f64> = consumed.iter().chain(&ignored).map(|p| p.1).collect();
    let mut plot = SvgPlot::new("diet sweep: item utility rate vs prevalence", &xs, &ys);
    plot.scatter(&ignored, "grey");
    plot.scatter(&consumed, "steelblue");
    fs::write(path, plot.render()).map_err(io_err(path))?;
    Ok(())
}

/// Line plot of u_min against merged rate, one line per mean item rate.
pub fn write_frontier_svg(path: &Path, config: &FrontierConfig) -> Result<(), PipelineError> {
    let cells = sim::viability_frontier(
        &config.merged_rate_grid,
        &config.mean_item_rate_grid,
        config.env_rate,
    )?;
    let feasible: Vec<(f64, f64)> = cells
        .iter()
        .filter_map(|c| c.u_min.feasible().map(|u| (c.merged_rate, u)))
        .collect();
    let xs: Vec<f64> = feasible.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = feasible.iter().map(|p| p.1).collect();
    let mut plot = SvgPlot::new("minimum viable item size vs prevalence", &xs, &ys);
    for &rbar in &config.mean_item_rate_grid {
        let line: Vec<(f64, f64)> = cells
            .iter()
            .filter(|c| c.mean_item_rate == rbar)
            .filter_map(|c| c.u_min.feasible().map(|u| (c.merged_rate, u)))
            .collect();
        plot.line(&line, "steelblue");
    }
    fs::write(path, plot.render()).map_err(io_err(path))?;
    Ok(())
}

/// KDE curves per category for one measure.
pub fn write_kde_svg(
    path: &Path,
    curves: &[KdeCurve],
    measure: MeasureName,
) -> Result<(), PipelineError> {
    let relevant: Vec<&KdeCurve> = curves.iter().filter(|(m, _, _)| *m == measure).collect();
    let xs: Vec<f64> = relevant
        .iter()
        .flat_map(|(_, _, c)| c.iter().map(|p| p.0))
        .collect();
    let ys: Vec<f64> = relevant
        .iter()
        .flat_map(|(_, _, c)| c.iter().map(|p| p.1))
        .collect();
    let title = format!("{measure} density by category");
    let mut plot = SvgPlot::new(&title, &xs, &ys);
    let palette = ["steelblue", "firebrick", "seagreen", "goldenrod", "purple", "grey"];
    for (i, (_, _, curve)) in relevant.iter().enumerate() {
        plot.line(curve, palette[i % palette.len()]);
    }
    fs::write(path, plot.render()).map_err(io_err(path))?;
    Ok(())
}
