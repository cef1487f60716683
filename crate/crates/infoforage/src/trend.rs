//! Timeseries smoothing and the trend-test battery: KPSS, Mann-Kendall,
//! Pearson correlation, one-way ANOVA, plus a Scott-rule KDE for
//! distribution figures.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor, Normal, StudentsT};
use thiserror::Error;

pub const CI_MULTIPLIER: f64 = 1.96;

/// KPSS level-stationarity critical values and the p-values they bound.
/// Interpolation is clamped to [0.01, 0.1] as in the standard tables.
const KPSS_CRIT: [(f64, f64); 4] = [(0.347, 0.10), (0.463, 0.05), (0.574, 0.025), (0.739, 0.01)];
pub const KPSS_P_FLOOR: f64 = 0.01;
pub const KPSS_P_CEILING: f64 = 0.10;

#[derive(Debug, Error, PartialEq)]
pub enum TrendError {
    #[error("series too short: {have} points, need {need}")]
    TooShort { have: usize, need: usize },
    #[error("series has zero variance")]
    ZeroVariance,
    #[error("input lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {need} groups with {min_size}+ values each")]
    DegenerateGroups { need: usize, min_size: usize },
    #[error("need at least 2 distinct values")]
    AllEqual,
}

/// One year of a smoothed (or combined) timeseries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeseriesPoint {
    pub year: i32,
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

impl TimeseriesPoint {
    pub fn ci_half_width(&self) -> f64 {
        CI_MULTIPLIER * self.std_error
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    Kpss,
    MannKendall,
    Pearson,
    Anova,
}

/// Statistic, p-value and 5%-level decision of one test, with
/// test-specific intermediates in `detail`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendTestResult {
    pub test: TestKind,
    pub statistic: f64,
    pub p_value: f64,
    pub reject_at_5pct: bool,
    pub detail: BTreeMap<String, f64>,
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

/// ±`window`-year moving average with standard errors. Years whose window
/// holds fewer than `min_points` values are omitted.
pub fn moving_average_ci(
    points: &[(i32, f64)],
    window: i32,
    min_points: usize,
) -> Vec<TimeseriesPoint> {
    if points.is_empty() {
        return Vec::new();
    }
    let lo = points.iter().map(|p| p.0).min().unwrap();
    let hi = points.iter().map(|p| p.0).max().unwrap();
    let mut out = Vec::new();
    for year in lo..=hi {
        let in_window: Vec<f64> = points
            .iter()
            .filter(|(y, _)| (y - year).abs() <= window)
            .map(|&(_, v)| v)
            .collect();
        if in_window.len() < min_points {
            continue;
        }
        let n = in_window.len();
        out.push(TimeseriesPoint {
            year,
            mean: mean(&in_window),
            std_error: sample_std(&in_window) / (n as f64).sqrt(),
            n,
        });
    }
    out
}

/// Average per-category series into one: per year, the mean of available
/// category means with delta-method standard error √(Σ SEᵢ²)/n.
pub fn combine_categories(per_category: &[Vec<TimeseriesPoint>]) -> Vec<TimeseriesPoint> {
    let mut by_year: BTreeMap<i32, Vec<&TimeseriesPoint>> = BTreeMap::new();
    for series in per_category {
        for point in series {
            by_year.entry(point.year).or_default().push(point);
        }
    }
    by_year
        .into_iter()
        .map(|(year, points)| {
            let n = points.len();
            let m = points.iter().map(|p| p.mean).sum::<f64>() / n as f64;
            let se = points
                .iter()
                .map(|p| p.std_error * p.std_error)
                .sum::<f64>()
                .sqrt()
                / n as f64;
            TimeseriesPoint {
                year,
                mean: m,
                std_error: se,
                n,
            }
        })
        .collect()
}

/// Mann-Kendall trend test with tie-corrected variance and continuity
/// correction, two-sided p from the normal approximation.
pub fn mann_kendall(series: &[f64]) -> Result<TrendTestResult, TrendError> {
    let n = series.len();
    if n < 4 {
        return Err(TrendError::TooShort { have: n, need: 4 });
    }
    let mut s: i64 = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = series[j] - series[i];
            s += if d > 0.0 {
                1
            } else if d < 0.0 {
                -1
            } else {
                0
            };
        }
    }

    // tie groups
    let mut sorted = series.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut tie_term = 0.0;
    let mut run = 1usize;
    for i in 1..=n {
        if i < n && sorted[i] == sorted[i - 1] {
            run += 1;
        } else {
            if run > 1 {
                let t = run as f64;
                tie_term += t * (t - 1.0) * (2.0 * t + 5.0);
            }
            run = 1;
        }
    }
    let nf = n as f64;
    let var = (nf * (nf - 1.0) * (2.0 * nf + 5.0) - tie_term) / 18.0;

    let (z, p) = if var <= 0.0 {
        (0.0, 1.0)
    } else {
        let z = if s > 0 {
            (s as f64 - 1.0) / var.sqrt()
        } else if s < 0 {
            (s as f64 + 1.0) / var.sqrt()
        } else {
            0.0
        };
        let normal = Normal::new(0.0, 1.0).unwrap();
        (z, 2.0 * (1.0 - normal.cdf(z.abs())))
    };
    let p = p.clamp(0.0, 1.0);

    let mut detail = BTreeMap::new();
    detail.insert("s".to_string(), s as f64);
    detail.insert("var_s".to_string(), var);
    detail.insert("z".to_string(), z);
    Ok(TrendTestResult {
        test: TestKind::MannKendall,
        statistic: z,
        p_value: p,
        reject_at_5pct: p < 0.05,
        detail,
    })
}

/// KPSS level-stationarity test with Newey-West long-run variance
/// (Bartlett kernel, legacy lag rule l = ⌊12·(n/100)^(1/4)⌋). P-values
/// interpolate the standard critical-value table and clamp to
/// [0.01, 0.1].
pub fn kpss_level(series: &[f64]) -> Result<TrendTestResult, TrendError> {
    let n = series.len();
    if n < 10 {
        return Err(TrendError::TooShort { have: n, need: 10 });
    }
    let m = mean(series);
    let residuals: Vec<f64> = series.iter().map(|v| v - m).collect();
    if residuals.iter().all(|&e| e == 0.0) {
        return Err(TrendError::ZeroVariance);
    }

    let mut partial_sums = Vec::with_capacity(n);
    let mut acc = 0.0;
    for &e in &residuals {
        acc += e;
        partial_sums.push(acc);
    }

    let lags = (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize;
    let nf = n as f64;
    let mut lrv = residuals.iter().map(|e| e * e).sum::<f64>() / nf;
    for j in 1..=lags.min(n - 1) {
        let mut gamma = 0.0;
        for t in j..n {
            gamma += residuals[t] * residuals[t - j];
        }
        gamma /= nf;
        let weight = 1.0 - j as f64 / (lags as f64 + 1.0);
        lrv += 2.0 * weight * gamma;
    }

    let eta = partial_sums.iter().map(|s| s * s).sum::<f64>() / (nf * nf * lrv);
    let p = kpss_p_value(eta);

    let mut detail = BTreeMap::new();
    detail.insert("lags".to_string(), lags as f64);
    detail.insert("long_run_variance".to_string(), lrv);
    Ok(TrendTestResult {
        test: TestKind::Kpss,
        statistic: eta,
        p_value: p,
        reject_at_5pct: p < 0.05,
        detail,
    })
}

fn kpss_p_value(stat: f64) -> f64 {
    if stat <= KPSS_CRIT[0].0 {
        return KPSS_P_CEILING;
    }
    if stat >= KPSS_CRIT[3].0 {
        return KPSS_P_FLOOR;
    }
    for pair in KPSS_CRIT.windows(2) {
        let (c0, p0) = pair[0];
        let (c1, p1) = pair[1];
        if stat <= c1 {
            return p0 + (p1 - p0) * (stat - c0) / (c1 - c0);
        }
    }
    KPSS_P_FLOOR
}

/// Pearson correlation with a two-sided t-test on n−2 degrees of freedom.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<TrendTestResult, TrendError> {
    if x.len() != y.len() {
        return Err(TrendError::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 3 {
        return Err(TrendError::TooShort { have: n, need: 3 });
    }
    let mx = mean(x);
    let my = mean(y);
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
        sxy += (a - mx) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(TrendError::ZeroVariance);
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);

    let dof = (n - 2) as f64;
    let p = if r.abs() >= 1.0 {
        0.0
    } else {
        let t = r * (dof / (1.0 - r * r)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, dof).unwrap();
        2.0 * (1.0 - dist.cdf(t.abs()))
    };

    let mut detail = BTreeMap::new();
    detail.insert("n".to_string(), n as f64);
    detail.insert("dof".to_string(), dof);
    Ok(TrendTestResult {
        test: TestKind::Pearson,
        statistic: r,
        p_value: p.clamp(0.0, 1.0),
        reject_at_5pct: p < 0.05,
        detail,
    })
}

/// One-way ANOVA: F = between-group MS / within-group MS, p from
/// F(k−1, N−k).
pub fn anova_oneway(groups: &[Vec<f64>]) -> Result<TrendTestResult, TrendError> {
    if groups.len() < 2 || groups.iter().any(|g| g.len() < 2) {
        return Err(TrendError::DegenerateGroups {
            need: 2,
            min_size: 2,
        });
    }
    let k = groups.len();
    let total_n: usize = groups.iter().map(|g| g.len()).sum();
    let grand: f64 = groups.iter().flatten().sum::<f64>() / total_n as f64;

    let mut ss_between = 0.0;
    let mut ss_within = 0.0;
    for group in groups {
        let gm = mean(group);
        ss_between += group.len() as f64 * (gm - grand) * (gm - grand);
        ss_within += group.iter().map(|v| (v - gm) * (v - gm)).sum::<f64>();
    }
    let df_between = (k - 1) as f64;
    let df_within = (total_n - k) as f64;
    let ms_between = ss_between / df_between;
    let ms_within = ss_within / df_within;

    let (f_stat, p) = if ms_within == 0.0 {
        if ms_between == 0.0 {
            (0.0, 1.0)
        } else {
            (f64::INFINITY, 0.0)
        }
    } else {
        let f = ms_between / ms_within;
        let dist = FisherSnedecor::new(df_between, df_within).unwrap();
        (f, 1.0 - dist.cdf(f))
    };

    let mut detail = BTreeMap::new();
    detail.insert("df_between".to_string(), df_between);
    detail.insert("df_within".to_string(), df_within);
    detail.insert("ss_between".to_string(), ss_between);
    detail.insert("ss_within".to_string(), ss_within);
    Ok(TrendTestResult {
        test: TestKind::Anova,
        statistic: f_stat,
        p_value: p.clamp(0.0, 1.0),
        reject_at_5pct: p < 0.05,
        detail,
    })
}

/// Gaussian KDE with Scott's bandwidth σ̂·n^(−1/5), evaluated on 256
/// points trimmed to the data range.
pub fn kde_scott(values: &[f64]) -> Result<Vec<(f64, f64)>, TrendError> {
    let n = values.len();
    if n < 2 {
        return Err(TrendError::TooShort { have: n, need: 2 });
    }
    let sigma = sample_std(values);
    if sigma == 0.0 {
        return Err(TrendError::AllEqual);
    }
    let h = sigma * (n as f64).powf(-0.2);
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let points = 256usize;
    let norm = 1.0 / (n as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    let mut curve = Vec::with_capacity(points);
    for i in 0..points {
        let x = lo + (hi - lo) * i as f64 / (points - 1) as f64;
        let density: f64 = values
            .iter()
            .map(|&v| {
                let z = (x - v) / h;
                (-0.5 * z * z).exp()
            })
            .sum::<f64>()
            * norm;
        curve.push((x, density));
    }
    Ok(curve)
}

/// Quartiles (q1, median, q3) by linear interpolation.
pub fn quartiles(values: &[f64]) -> (f64, f64, f64) {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let pick = |q: f64| {
        let pos = q * (sorted.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        if lo == hi {
            sorted[lo]
        } else {
            sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
        }
    };
    (pick(0.25), pick(0.5), pick(0.75))
}
