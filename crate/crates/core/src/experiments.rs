//! Replicated estimation experiments: Table-1 style error tables, empirical
//! convergence rates, and their CSV/JSON reports.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eraser::{run, run_ball_eraser, EraseMode, EraserConfig, EraserError, ErasedRegion, DEFAULT_MAX_ATTEMPTS};
use crate::geom::Frame;
use crate::metrics::{
    boundary_hausdorff_grid, hausdorff_grid, measure_diff_mc, set_to_sample_distance_grid, GridSpec, MetricError,
};
use crate::shapes::{sample_uniform, table_one_rho0, Shape, ShapeError};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

pub const CSV_HEADER: &str = "shape,estimator,n,rho,h,r,N,runs,mean_error,sd_error,mean_runtime_ms,early_stops";

pub const RAW_CSV_HEADER: &str = "cell,run,seed,n,N,error,runtime_ms,early_stop";

/// Erasures per run in the benchmark table.
pub const TABLE_ONE_ERASURES: usize = 200;

pub const TABLE_ONE_SIZES: [usize; 6] = [200, 400, 600, 800, 1000, 1200];

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Eraser(#[from] EraserError),
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("invalid experiment setup: {0}")]
    Setup(String),
    #[error("report JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// Mixes a master seed with cell and run indices (splitmix64 finalizer on
/// each step, so distinct index pairs never collide by construction).
pub fn derive_seed(master: u64, cell: u64, run: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(mix(mix(master) ^ cell) ^ run)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "estimator", rename_all = "snake_case", deny_unknown_fields)]
pub enum Estimator {
    Cone { rho: f64, h: f64, mode: EraseMode },
    Ball { r: f64 },
}

impl Estimator {
    pub fn cone(rho: f64, h: f64) -> Self {
        Estimator::Cone { rho, h, mode: EraseMode::Extended }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Estimator::Cone { .. } => "cone",
            Estimator::Ball { .. } => "ball",
        }
    }

    pub fn estimate(&self, sample: &crate::eraser::Sample, frame: Frame, erasures: usize, seed: u64) -> Result<ErasedRegion, EraserError> {
        match *self {
            Estimator::Cone { rho, h, mode } => run(sample, frame, &EraserConfig::new(rho, h, erasures, seed).with_mode(mode)),
            Estimator::Ball { r } => run_ball_eraser(sample, frame, r, erasures, DEFAULT_MAX_ATTEMPTS, seed),
        }
    }
}

/// How the number of erasures scales with the sample size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", content = "value", rename_all = "snake_case")]
pub enum ErasurePolicy {
    Fixed(usize),
    /// `N = max(1, round(factor * n))`.
    Proportional(f64),
}

impl ErasurePolicy {
    pub fn erasures(&self, n: usize) -> usize {
        match *self {
            ErasurePolicy::Fixed(k) => k,
            ErasurePolicy::Proportional(f) => ((f * n as f64).round() as usize).max(1),
        }
    }
}

/// Erasures per sample point in the rate experiments. Rates describe the
/// hull itself, so N must outgrow the sample enough for the stochastic
/// approximation error to stay below the sampling error.
pub const RATE_PROPORTION: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "metric", rename_all = "snake_case", deny_unknown_fields)]
pub enum Metric {
    /// Monte Carlo measure of the symmetric difference.
    Measure { budget: usize },
    /// Grid Hausdorff distance between estimator and set.
    Hausdorff { resolution: usize },
    /// Grid Hausdorff distance between the boundaries.
    Boundary { resolution: usize },
    /// Boundary distance divided by the grid distance from the set to the
    /// sample.
    BoundaryRatio { resolution: usize },
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::Measure { .. } => "measure",
            Metric::Hausdorff { .. } => "hausdorff",
            Metric::Boundary { .. } => "boundary",
            Metric::BoundaryRatio { .. } => "boundary_ratio",
        }
    }

    fn evaluate<R: RngCore>(
        &self,
        region: &ErasedRegion,
        shape: &Shape,
        sample: &crate::eraser::Sample,
        frame: Frame,
        rng: &mut R,
    ) -> Result<f64, MetricError> {
        Ok(match *self {
            Metric::Measure { budget } => measure_diff_mc(region, shape, &frame, budget, rng)?.value,
            Metric::Hausdorff { resolution } => hausdorff_grid(region, shape, &GridSpec::new(frame, resolution)?)?.value,
            Metric::Boundary { resolution } => {
                boundary_hausdorff_grid(region, shape, &GridSpec::new(frame, resolution)?)?.value
            }
            Metric::BoundaryRatio { resolution } => {
                let grid = GridSpec::new(frame, resolution)?;
                let boundary = boundary_hausdorff_grid(region, shape, &grid)?.value;
                let spread = set_to_sample_distance_grid(shape, sample.points(), &grid)?.value;
                boundary / spread
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellSpec {
    pub estimator: Estimator,
    pub n: usize,
    pub erasures: usize,
    pub runs: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunRecord {
    pub cell: usize,
    pub run: usize,
    pub seed: u64,
    pub n: usize,
    pub erasures: usize,
    pub error: f64,
    pub runtime_ms: f64,
    pub early_stop: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellSummary {
    pub shape: String,
    pub estimator: String,
    pub n: usize,
    pub rho: Option<f64>,
    pub h: Option<f64>,
    pub r: Option<f64>,
    #[serde(rename = "N")]
    pub erasures: usize,
    pub runs: usize,
    pub mean_error: f64,
    pub sd_error: f64,
    pub mean_runtime_ms: f64,
    pub early_stops: usize,
}

impl CellSummary {
    /// Standard error of the mean error.
    pub fn standard_error(&self) -> f64 {
        self.sd_error / (self.runs as f64).sqrt()
    }
}

/// Mean and sample standard deviation (zero for a single value).
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

/// Runs one cell: `runs` independent samples of `shape`, each estimated and
/// scored. Replications run in parallel; results do not depend on the
/// thread count.
pub fn run_cell(
    shape: &Shape,
    frame: Frame,
    spec: &CellSpec,
    metric: Metric,
    master_seed: u64,
    cell_index: usize,
) -> Result<(CellSummary, Vec<RunRecord>), ExperimentError> {
    let mut scored = run_cell_metrics(shape, frame, spec, &[metric], master_seed, cell_index)?;
    Ok(scored.remove(0))
}

/// Like [`run_cell`], scoring every estimate under each metric in turn. The
/// sample and estimate of a replication are shared by all metrics; each
/// metric gets its own random stream.
pub fn run_cell_metrics(
    shape: &Shape,
    frame: Frame,
    spec: &CellSpec,
    metrics: &[Metric],
    master_seed: u64,
    cell_index: usize,
) -> Result<Vec<(CellSummary, Vec<RunRecord>)>, ExperimentError> {
    if spec.runs == 0 {
        return Err(ExperimentError::Setup("runs must be at least 1".into()));
    }
    if metrics.is_empty() {
        return Err(ExperimentError::Setup("at least one metric is required".into()));
    }
    let per_run = (0..spec.runs)
        .into_par_iter()
        .map(|run_index| {
            let seed = derive_seed(master_seed, cell_index as u64, run_index as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sample = sample_uniform(shape, spec.n, &mut rng)?;
            let eraser_seed = rng.next_u64();
            let start = Instant::now();
            let region = spec.estimator.estimate(&sample, frame, spec.erasures, eraser_seed)?;
            let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
            metrics
                .iter()
                .enumerate()
                .map(|(m, metric)| {
                    let mut metric_rng = rng.clone();
                    metric_rng.set_stream(m as u64);
                    let error = metric.evaluate(&region, shape, &sample, frame, &mut metric_rng)?;
                    Ok(RunRecord {
                        cell: cell_index,
                        run: run_index,
                        seed,
                        n: spec.n,
                        erasures: spec.erasures,
                        error,
                        runtime_ms,
                        early_stop: region.early_stop(),
                    })
                })
                .collect::<Result<Vec<_>, ExperimentError>>()
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    Ok((0..metrics.len())
        .map(|m| {
            let records: Vec<RunRecord> = per_run.iter().map(|r| r[m]).collect();
            (summarize(shape.label(), spec, &records), records)
        })
        .collect())
}

pub fn summarize(shape: &str, spec: &CellSpec, records: &[RunRecord]) -> CellSummary {
    let errors: Vec<f64> = records.iter().map(|r| r.error).collect();
    let (mean_error, sd_error) = mean_sd(&errors);
    let runtimes: Vec<f64> = records.iter().map(|r| r.runtime_ms).collect();
    let (rho, h, r) = match spec.estimator {
        Estimator::Cone { rho, h, .. } => (Some(rho), Some(h), None),
        Estimator::Ball { r } => (None, None, Some(r)),
    };
    CellSummary {
        shape: shape.to_string(),
        estimator: spec.estimator.name().to_string(),
        n: spec.n,
        rho,
        h,
        r,
        erasures: spec.erasures,
        runs: records.len(),
        mean_error,
        sd_error,
        mean_runtime_ms: mean_sd(&runtimes).0,
        early_stops: records.iter().filter(|r| r.early_stop).count(),
    }
}

/// The four estimator columns of the benchmark table, in order.
pub fn table_one_estimators() -> [Estimator; 4] {
    [
        Estimator::cone(table_one_rho0(), 1.0 / 3.0),
        Estimator::Ball { r: 0.25 },
        Estimator::cone(PI / 5.0, 0.5),
        Estimator::Ball { r: 1.0 / 6.0 },
    ]
}

pub fn table_one_cells(sizes: &[usize], runs: usize, erasures: usize) -> Vec<CellSpec> {
    sizes
        .iter()
        .flat_map(|&n| table_one_estimators().map(|estimator| CellSpec { estimator, n, erasures, runs }))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub version: String,
    pub seed: u64,
    pub metric: Metric,
    pub cells: Vec<CellSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<RateFit>,
}

impl ExperimentReport {
    pub fn new(seed: u64, metric: Metric) -> Self {
        ExperimentReport {
            schema_version: REPORT_SCHEMA_VERSION,
            version: version_text(),
            seed,
            metric,
            cells: Vec::new(),
            fit: None,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                c.shape,
                c.estimator,
                c.n,
                opt(c.rho),
                opt(c.h),
                opt(c.r),
                c.erasures,
                c.runs,
                c.mean_error,
                c.sd_error,
                c.mean_runtime_ms,
                c.early_stops
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        let report: ExperimentReport = serde_json::from_str(text)?;
        if report.schema_version != REPORT_SCHEMA_VERSION {
            return Err(ExperimentError::Setup(format!("unsupported report schema version {}", report.schema_version)));
        }
        Ok(report)
    }
}

pub fn version_text() -> String {
    format!("conehull-v{}", env!("CARGO_PKG_VERSION"))
}

/// Per-run values, one line per replication.
pub fn raw_csv(records: &[RunRecord]) -> String {
    let mut out = String::from(RAW_CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(out, "{},{},{},{},{},{},{},{}", r.cell, r.run, r.seed, r.n, r.erasures, r.error, r.runtime_ms, r.early_stop);
    }
    out
}

/// Ordinary least squares fit of log mean error against a log regressor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateFit {
    pub sample_sizes: Vec<usize>,
    pub mean_errors: Vec<f64>,
    /// `log n`, or `log(log n / n)` for Hausdorff rates.
    pub regressor: Regressor,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regressor {
    LogN,
    LogLogNOverN,
}

impl Regressor {
    pub fn apply(self, n: usize) -> f64 {
        let n = n as f64;
        match self {
            Regressor::LogN => n.ln(),
            Regressor::LogLogNOverN => (n.ln() / n).ln(),
        }
    }
}

pub fn fit_rate(sample_sizes: &[usize], mean_errors: &[f64], regressor: Regressor) -> Result<RateFit, ExperimentError> {
    if sample_sizes.len() != mean_errors.len() || sample_sizes.len() < 3 {
        return Err(ExperimentError::Setup("rate fit needs at least 3 paired points".into()));
    }
    if sample_sizes.iter().any(|&n| n < 2) || mean_errors.iter().any(|&e| !e.is_finite() || e <= 0.0) {
        return Err(ExperimentError::Setup("rate fit needs n >= 2 and positive finite errors".into()));
    }
    let xs: Vec<f64> = sample_sizes.iter().map(|&n| regressor.apply(n)).collect();
    let ys: Vec<f64> = mean_errors.iter().map(|e| e.ln()).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(ExperimentError::Setup("rate fit needs distinct sample sizes".into()));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(RateFit {
        sample_sizes: sample_sizes.to_vec(),
        mean_errors: mean_errors.to_vec(),
        regressor,
        slope,
        intercept: my - slope * mx,
        r2,
    })
}

/// Output of a replicated multi-cell experiment.
#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub report: ExperimentReport,
    pub records: Vec<RunRecord>,
}

/// Runs each cell in order and collects the report.
pub fn run_cells(
    shape: &Shape,
    frame: Frame,
    cells: &[CellSpec],
    metric: Metric,
    seed: u64,
) -> Result<ExperimentOutput, ExperimentError> {
    let mut report = ExperimentReport::new(seed, metric);
    let mut records = Vec::new();
    for (index, spec) in cells.iter().enumerate() {
        let (summary, mut cell_records) = run_cell(shape, frame, spec, metric, seed, index)?;
        report.cells.push(summary);
        records.append(&mut cell_records);
    }
    Ok(ExperimentOutput { report, records })
}

/// Replicated errors across sample sizes followed by a log-log fit.
#[allow(clippy::too_many_arguments)]
pub fn run_rates(
    shape: &Shape,
    frame: Frame,
    estimator: Estimator,
    sizes: &[usize],
    runs: usize,
    policy: ErasurePolicy,
    metric: Metric,
    seed: u64,
) -> Result<ExperimentOutput, ExperimentError> {
    let cells: Vec<CellSpec> = sizes
        .iter()
        .map(|&n| CellSpec { estimator, n, erasures: policy.erasures(n), runs })
        .collect();
    let mut out = run_cells(shape, frame, &cells, metric, seed)?;
    let means: Vec<f64> = out.report.cells.iter().map(|c| c.mean_error).collect();
    let regressor = match metric {
        Metric::Hausdorff { .. } => Regressor::LogLogNOverN,
        _ => Regressor::LogN,
    };
    out.report.fit = Some(fit_rate(sizes, &means, regressor)?);
    Ok(out)
}
