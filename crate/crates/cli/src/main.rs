//! `conehull` command-line harness.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 early stop (outputs are
//! still written), 3 failed oracle check.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use conehull::eraser::{run, run_ball_eraser, EraseMode, EraserConfig, ErasedRegion, Sample, DEFAULT_MAX_ATTEMPTS};
use conehull::experiments::{
    run_cells, run_rates, table_one_cells, ErasurePolicy, Estimator, ExperimentOutput, Metric, TABLE_ONE_ERASURES,
    TABLE_ONE_SIZES,
};
use conehull::oracle::{build_unavoidable_family, check_unavoidability, separation_oracle};
use conehull::shapes::{load_points, sample_uniform, shape_by_name, table_one_set, SHAPE_NAMES};
use conehull::svg::write_svg;
use conehull::{Frame, Point};

#[derive(Parser, Debug)]
#[command(name = "conehull", version, about = "Estimate planar sets from point samples by stochastic cone erasing")]
struct Cli {
    /// Master random seed.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads for replicated runs (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output path prefix.
    #[arg(long, global = true, default_value = "conehull")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one estimation and write the region JSON and an SVG scene.
    Estimate(EstimateArgs),
    /// Benchmark error table for four estimators on the four-notch set.
    Table1(TableOneArgs),
    /// Replicated errors over sample sizes with a log-log rate fit.
    Rates(RatesArgs),
    /// Cross-check the eraser against the separation oracle and test
    /// unavoidable cone families.
    OracleCheck(OracleArgs),
    /// Render a saved region and a point file to SVG.
    Render(RenderArgs),
}

#[derive(Args, Debug)]
struct EstimateArgs {
    /// Point CSV with header `x,y`.
    #[arg(long, conflicts_with_all = ["shape", "n"], required_unless_present = "shape")]
    input: Option<PathBuf>,
    /// Map the input's bounding box onto the unit square.
    #[arg(long, requires = "input")]
    rescale: bool,
    /// Built-in shape to sample from.
    #[arg(long, requires = "n", value_parser = clap::builder::PossibleValuesParser::new(SHAPE_NAMES))]
    shape: Option<String>,
    /// Sample size for --shape.
    #[arg(long)]
    n: Option<usize>,
    /// Cone opening in radians (`pi/4` style literals accepted).
    #[arg(long, value_parser = parse_opening, required_unless_present = "r")]
    rho: Option<f64>,
    /// Cone height; `inf` uses the frame diagonal.
    #[arg(long, value_parser = parse_height, required_unless_present = "r")]
    h: Option<f64>,
    /// Ball radius; switches to the ball eraser.
    #[arg(long, value_parser = parse_positive, conflicts_with_all = ["rho", "h", "mode", "axis_min"])]
    r: Option<f64>,
    /// Successful erasures.
    #[arg(long = "N", default_value_t = 200)]
    erasures: usize,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Lower bound of candidate axis angles.
    #[arg(long, value_parser = parse_angle, requires = "axis_max")]
    axis_min: Option<f64>,
    /// Upper bound of candidate axis angles.
    #[arg(long, value_parser = parse_angle, requires = "axis_min")]
    axis_max: Option<f64>,
    /// Consecutive failed draws before stopping early.
    #[arg(long, default_value_t = DEFAULT_MAX_ATTEMPTS)]
    max_attempts: u64,
    /// Sampling frame `xmin,xmax,ymin,ymax`.
    #[arg(long, value_parser = parse_frame)]
    frame: Option<Frame>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ModeArg {
    Paper,
    Extended,
}

impl From<ModeArg> for EraseMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Paper => EraseMode::PaperLiteral,
            ModeArg::Extended => EraseMode::Extended,
        }
    }
}

#[derive(Args, Debug)]
struct TableOneArgs {
    #[arg(long, default_value_t = 100)]
    runs: usize,
    #[arg(long, value_delimiter = ',', default_values_t = TABLE_ONE_SIZES)]
    n_list: Vec<usize>,
    /// Monte Carlo points per error evaluation.
    #[arg(long, default_value_t = 4000)]
    mc: usize,
    #[arg(long = "N", default_value_t = TABLE_ONE_ERASURES)]
    erasures: usize,
    #[arg(long, value_parser = parse_frame, default_value = "0,1,0,1")]
    frame: Frame,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum MetricArg {
    Measure,
    Hausdorff,
    Boundary,
}

#[derive(Args, Debug)]
struct RatesArgs {
    #[arg(long, value_enum, default_value = "measure")]
    metric: MetricArg,
    #[arg(long, default_value = "table1", value_parser = clap::builder::PossibleValuesParser::new(SHAPE_NAMES))]
    shape: String,
    #[arg(long, value_parser = parse_opening, default_value = "pi/5")]
    rho: f64,
    #[arg(long, value_parser = parse_height, default_value = "0.5")]
    h: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [200, 400, 800, 1600, 3200])]
    n_list: Vec<usize>,
    #[arg(long, default_value_t = 50)]
    runs: usize,
    /// `fixed:K` or `proportional:F` (N = F * n).
    #[arg(long = "N", value_parser = parse_policy, default_value = "proportional:3")]
    policy: ErasurePolicy,
    #[arg(long, default_value_t = 4000)]
    mc: usize,
    /// Grid resolution for Hausdorff metrics.
    #[arg(long, default_value_t = 512)]
    resolution: usize,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(long, value_parser = parse_opening, default_value = "pi/5")]
    rho: f64,
    #[arg(long, value_parser = parse_positive, default_value = "0.5")]
    h: f64,
    /// Random cones for the unavoidability check; also caps the number of
    /// erased test points.
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    /// Sample size of the eraser run being certified.
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long = "N", default_value_t = 200)]
    erasures: usize,
}

#[derive(Args, Debug)]
struct RenderArgs {
    /// Region JSON written by `estimate`.
    #[arg(long)]
    region: PathBuf,
    /// Point CSV with header `x,y`.
    #[arg(long)]
    input: PathBuf,
}

fn parse_angle(s: &str) -> Result<f64, String> {
    let t: String = s.trim().to_ascii_lowercase().chars().filter(|c| !c.is_whitespace()).collect();
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a, Some(b)),
        None => (t.as_str(), None),
    };
    let numerator = if let Some(k) = num.strip_suffix("pi") {
        let k = k.strip_suffix('*').unwrap_or(k);
        let factor = match k {
            "" | "+" => 1.0,
            "-" => -1.0,
            k => k.parse::<f64>().map_err(|_| format!("cannot parse angle `{s}`"))?,
        };
        factor * PI
    } else {
        num.parse::<f64>().map_err(|_| format!("cannot parse angle `{s}`"))?
    };
    let value = match den {
        Some(d) => {
            let d: f64 = d.parse().map_err(|_| format!("cannot parse angle `{s}`"))?;
            if d == 0.0 {
                return Err(format!("zero denominator in `{s}`"));
            }
            numerator / d
        }
        None => numerator,
    };
    if !value.is_finite() {
        return Err(format!("angle `{s}` is not finite"));
    }
    Ok(value)
}

fn parse_opening(s: &str) -> Result<f64, String> {
    let rho = parse_angle(s)?;
    if !(rho > 0.0 && rho <= PI) {
        return Err(format!("opening must lie in (0, pi], got {rho}"));
    }
    Ok(rho)
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("cannot parse number `{s}`"))?;
    if !(v.is_finite() && v > 0.0) {
        return Err(format!("expected a positive number, got {s}"));
    }
    Ok(v)
}

fn parse_height(s: &str) -> Result<f64, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" => Ok(f64::INFINITY),
        _ => parse_positive(s),
    }
}

fn parse_frame(s: &str) -> Result<Frame, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("cannot parse frame `{s}`")))
        .collect::<Result<_, _>>()?;
    let [xmin, xmax, ymin, ymax] = parts[..] else {
        return Err(format!("frame needs four values xmin,xmax,ymin,ymax, got `{s}`"));
    };
    Frame::new(xmin, xmax, ymin, ymax).map_err(|e| e.to_string())
}

fn parse_policy(s: &str) -> Result<ErasurePolicy, String> {
    let (kind, value) = s.split_once(':').ok_or_else(|| format!("expected fixed:K or proportional:F, got `{s}`"))?;
    match kind {
        "fixed" => value
            .parse::<usize>()
            .ok()
            .filter(|&k| k > 0)
            .map(ErasurePolicy::Fixed)
            .ok_or_else(|| format!("fixed erasure count must be a positive integer, got `{value}`")),
        "proportional" => {
            let f = parse_positive(value)?;
            Ok(ErasurePolicy::Proportional(f))
        }
        _ => Err(format!("unknown erasure policy `{kind}`")),
    }
}

/// Outcome of a command that ran to completion.
enum Outcome {
    Ok,
    EarlyStop,
    CheckFailed,
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn estimate(cli: &Cli, args: &EstimateArgs) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let (sample, default_frame) = match (&args.input, &args.shape) {
        (Some(path), _) => {
            let sample = load_points(path, args.rescale)?;
            let frame = if args.rescale { Some(Frame::unit_square()) } else { Frame::bounding(sample.points()) };
            (sample, frame)
        }
        (None, Some(name)) => {
            let shape = shape_by_name(name, &mut rng)?;
            let n = args.n.context("--shape needs --n")?;
            (sample_uniform(&shape, n, &mut rng)?, Some(shape.bounding_box()))
        }
        (None, None) => bail!("either --input or --shape is required"),
    };
    let frame = args
        .frame
        .or(default_frame)
        .context("the sample's bounding box is degenerate; pass --frame")?;
    let region = match args.r {
        Some(r) => run_ball_eraser(&sample, frame, r, args.erasures, args.max_attempts, cli.seed)?,
        None => {
            let (rho, h) = (args.rho.context("--rho is required")?, args.h.context("--h is required")?);
            let mut config = EraserConfig::new(rho, h, args.erasures, cli.seed);
            config.max_attempts_per_erasure = args.max_attempts;
            if let Some(mode) = args.mode {
                config = config.with_mode(mode.into());
            }
            if let (Some(lo), Some(hi)) = (args.axis_min, args.axis_max) {
                config = config.with_axis_constraint(lo, hi);
            }
            run(&sample, frame, &config)?
        }
    };
    let json_path = with_suffix(&cli.out, ".region.json");
    write_file(&json_path, &region.to_json())?;
    let svg_path = with_suffix(&cli.out, ".svg");
    write_svg(&region, &sample, &svg_path).with_context(|| format!("writing {}", svg_path.display()))?;
    println!(
        "erasures {} of {}, attempts {}; wrote {} and {}",
        region.erasures(),
        args.erasures,
        region.attempts(),
        json_path.display(),
        svg_path.display()
    );
    if region.early_stop() {
        eprintln!("early stop: {} consecutive failed draws", args.max_attempts);
        return Ok(Outcome::EarlyStop);
    }
    Ok(Outcome::Ok)
}

fn write_outputs(prefix: &Path, out: &ExperimentOutput) -> Result<()> {
    write_file(&with_suffix(prefix, ".csv"), &out.report.to_csv())?;
    write_file(&with_suffix(prefix, ".json"), &out.report.to_json())?;
    write_file(&with_suffix(prefix, ".runs.csv"), &conehull::experiments::raw_csv(&out.records))?;
    Ok(())
}

fn print_cells(out: &ExperimentOutput) {
    println!("{:>6} {:>10} {:>8} {:>8} {:>8} {:>6} {:>10} {:>10} {:>6}", "n", "estimator", "rho", "h", "r", "N", "mean", "sd", "early");
    let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
    for c in &out.report.cells {
        println!(
            "{:>6} {:>10} {:>8} {:>8} {:>8} {:>6} {:>10.4} {:>10.4} {:>6}",
            c.n,
            c.estimator,
            opt(c.rho),
            opt(c.h),
            opt(c.r),
            c.erasures,
            c.mean_error,
            c.sd_error,
            c.early_stops
        );
    }
}

fn table_one(cli: &Cli, args: &TableOneArgs) -> Result<Outcome> {
    let cells = table_one_cells(&args.n_list, args.runs, args.erasures);
    let out = run_cells(&table_one_set(), args.frame, &cells, Metric::Measure { budget: args.mc }, cli.seed)?;
    write_outputs(&cli.out, &out)?;
    print_cells(&out);
    Ok(if out.report.cells.iter().any(|c| c.early_stops > 0) { Outcome::EarlyStop } else { Outcome::Ok })
}

fn rates(cli: &Cli, args: &RatesArgs) -> Result<Outcome> {
    let (lo, hi) = (args.n_list.iter().min().copied(), args.n_list.iter().max().copied());
    match (lo, hi) {
        (Some(lo), Some(hi)) if args.n_list.len() >= 3 && lo > 0 && hi >= 10 * lo => {}
        _ => bail!("--n-list needs at least 3 sizes spanning a decade"),
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let shape = shape_by_name(&args.shape, &mut rng)?;
    let metric = match args.metric {
        MetricArg::Measure => Metric::Measure { budget: args.mc },
        MetricArg::Hausdorff => Metric::Hausdorff { resolution: args.resolution },
        MetricArg::Boundary => Metric::Boundary { resolution: args.resolution },
    };
    let out = run_rates(
        &shape,
        shape.bounding_box(),
        Estimator::cone(args.rho, args.h),
        &args.n_list,
        args.runs,
        args.policy,
        metric,
        cli.seed,
    )?;
    write_outputs(&cli.out, &out)?;
    print_cells(&out);
    if let Some(fit) = &out.report.fit {
        println!("slope {:.4}  intercept {:.4}  r2 {:.4}", fit.slope, fit.intercept, fit.r2);
    }
    Ok(Outcome::Ok)
}

fn oracle_check(cli: &Cli, args: &OracleArgs) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let shape = table_one_set();
    let sample = sample_uniform(&shape, args.n, &mut rng)?;
    let frame = Frame::unit_square();
    let region = run(&sample, frame, &EraserConfig::new(args.rho, args.h, args.erasures, rng.random()))?;
    let wanted = args.trials.clamp(1, 1000);
    let mut queries = Vec::with_capacity(wanted);
    // Erased area is positive once any sector exists; guard anyway.
    let mut draws = 0u64;
    while queries.len() < wanted && draws < 10_000_000 {
        draws += 1;
        let q = Point::new(rng.random_range(frame.xmin..frame.xmax), rng.random_range(frame.ymin..frame.ymax));
        if !region.contains(q) {
            queries.push(q);
        }
    }
    let certified = queries
        .par_iter()
        .map(|&q| separation_oracle(&sample, q, args.rho, args.h, args.h / 50.0, 720).map(|c| c.is_found()))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .filter(|&found| found)
        .count();
    let coverage = if queries.is_empty() { 0.0 } else { certified as f64 / queries.len() as f64 };
    let coverage_ok = !queries.is_empty() && certified == queries.len();
    println!(
        "certificate coverage {certified}/{} = {coverage:.4} {}",
        queries.len(),
        if coverage_ok { "PASS" } else { "FAIL" }
    );
    let unavoidable_ok = match build_unavoidable_family(Point::new(0.0, 0.0), args.rho, args.h) {
        Ok(family) => {
            let fraction = check_unavoidability(&family, args.trials.max(1), &mut rng)?;
            let ok = (fraction - 1.0).abs() <= 1e-4;
            println!(
                "unavoidability fraction {fraction:.6} over {} trials, {} members {}",
                args.trials.max(1),
                family.len(),
                if ok { "PASS" } else { "FAIL" }
            );
            ok
        }
        Err(e) => {
            println!("unavoidability: {e} FAIL");
            false
        }
    };
    Ok(if coverage_ok && unavoidable_ok { Outcome::Ok } else { Outcome::CheckFailed })
}

fn render(cli: &Cli, args: &RenderArgs) -> Result<Outcome> {
    let text = std::fs::read_to_string(&args.region).with_context(|| format!("reading {}", args.region.display()))?;
    let region = ErasedRegion::from_json(&text)?;
    let sample: Sample = load_points(&args.input, false)?;
    let svg_path = with_suffix(&cli.out, ".svg");
    write_svg(&region, &sample, &svg_path).with_context(|| format!("writing {}", svg_path.display()))?;
    println!("wrote {}", svg_path.display());
    Ok(Outcome::Ok)
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().context("configuring threads")?;
    }
    match &cli.command {
        Command::Estimate(a) => estimate(cli, a),
        Command::Table1(a) => table_one(cli, a),
        Command::Rates(a) => rates(cli, a),
        Command::OracleCheck(a) => oracle_check(cli, a),
        Command::Render(a) => render(cli, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(&cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::EarlyStop) => ExitCode::from(2),
        Ok(Outcome::CheckFailed) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
