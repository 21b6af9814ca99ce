//! Acceptance suite. Prints one PASS/FAIL line per criterion followed by
//! the measured values, and exits nonzero when any criterion fails.
//!
//! Run with `cargo test --release -p conehull --test acceptance`.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use conehull::eraser::{erase_step, EstimatorEcho};
use conehull::experiments::{
    fit_rate, median, run_cell_metrics, table_one_cells, CellSpec, CellSummary, Estimator, ErasurePolicy, Metric,
    Regressor, RATE_PROPORTION, TABLE_ONE_ERASURES, TABLE_ONE_SIZES,
};
use conehull::metrics::{hausdorff_point_sets, measure_diff_mc};
use conehull::oracle::{build_unavoidable_family, check_unavoidability, separation_oracle};
use conehull::shapes::{sample_uniform, shape_by_name, table_one_set, Shape, SHAPE_NAMES};
use conehull::{run, EraseMode, ErasedRegion, EraserConfig, Frame, Point, Sector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_601;

struct Outcome {
    label: &'static str,
    pass: bool,
    details: Vec<String>,
}

impl Outcome {
    fn new(label: &'static str) -> Self {
        Outcome { label, pass: true, details: Vec::new() }
    }

    fn check(&mut self, ok: bool, line: String) {
        self.pass &= ok;
        self.details.push(format!("{} {line}", if ok { "ok  " } else { "FAIL" }));
    }

    fn note(&mut self, line: String) {
        self.details.push(format!("     {line}"));
    }

    fn print(&self) {
        println!("[{}] {}", if self.pass { "PASS" } else { "FAIL" }, self.label);
        for d in &self.details {
            println!("       {d}");
        }
    }
}

fn find(cells: &[CellSummary], n: usize, column: usize) -> &CellSummary {
    &cells[TABLE_ONE_SIZES.iter().position(|&m| m == n).unwrap() * 4 + column]
}

fn describe(c: &CellSummary) -> String {
    match (c.rho, c.h, c.r) {
        (Some(rho), Some(h), _) => format!("cone rho={rho:.4} h={h:.4}"),
        (_, _, Some(r)) => format!("ball r={r:.4}"),
        _ => c.estimator.clone(),
    }
}

fn table_one() -> Vec<CellSummary> {
    let shape = table_one_set();
    let cells = table_one_cells(&TABLE_ONE_SIZES, 100, TABLE_ONE_ERASURES);
    let metric = Metric::Measure { budget: 100_000 };
    cells
        .iter()
        .enumerate()
        .map(|(i, spec)| run_cell_metrics(&shape, Frame::unit_square(), spec, &[metric], SEED, i).unwrap().remove(0).0)
        .collect()
}

fn criterion_one(cells: &[CellSummary], table_secs: f64) -> Outcome {
    let mut out = Outcome::new("1 table reproduction");
    let windows = [(1200, 2, 0.050, 0.090), (200, 2, 0.177, 0.217), (200, 0, 0.184, 0.224), (1200, 3, 0.102, 0.142)];
    for (n, column, lo, hi) in windows {
        let c = find(cells, n, column);
        let ok = (lo..=hi).contains(&c.mean_error);
        out.check(ok, format!("n={n} {}: mean {:.4} (sd {:.4}) in [{lo}, {hi}]", describe(c), c.mean_error, c.sd_error));
    }
    for c in cells {
        out.note(format!("n={:<5} {:<26} mean {:.4} sd {:.4}", c.n, describe(c), c.mean_error, c.sd_error));
    }

    let shape = table_one_set();
    let spec = CellSpec { estimator: Estimator::cone(PI / 5.0, 0.5), n: 500, erasures: 300, runs: 20 };
    let metric = Metric::Measure { budget: 1000 };
    let (summary, _) = run_cell_metrics(&shape, Frame::unit_square(), &spec, &[metric], SEED, 99).unwrap().remove(0);
    let per_run = summary.mean_runtime_ms / 1e3;
    out.check(per_run <= 2.0, format!("mean runtime at n=500 N=300: {per_run:.4} s per run (limit 2 s)"));
    out.check(table_secs <= 600.0, format!("table runtime {table_secs:.1} s (limit 600 s)"));
    out
}

fn criterion_two(cells: &[CellSummary]) -> Outcome {
    let mut out = Outcome::new("2 crossover between ball and cone erasers");
    for (cone_col, ball_col) in [(0, 1), (2, 3)] {
        for &n in &TABLE_ONE_SIZES {
            if n == 400 {
                continue;
            }
            let cone = find(cells, n, cone_col);
            let ball = find(cells, n, ball_col);
            let pooled = (cone.standard_error().powi(2) + ball.standard_error().powi(2)).sqrt();
            let (gap, want) = if n == 200 {
                (cone.mean_error - ball.mean_error, "ball < cone")
            } else {
                (ball.mean_error - cone.mean_error, "cone < ball")
            };
            out.check(
                gap >= 2.0 * pooled,
                format!(
                    "n={n} {} vs {}: {want} by {:.2} pooled SE (cone {:.4}, ball {:.4})",
                    describe(cone),
                    describe(ball),
                    gap / pooled,
                    cone.mean_error,
                    ball.mean_error
                ),
            );
        }
    }
    out
}

fn rate_criteria() -> (Outcome, Outcome, Outcome) {
    let shape = table_one_set();
    let sizes = [200, 400, 800, 1600, 3200];
    let policy = ErasurePolicy::Proportional(RATE_PROPORTION);
    let metrics = [Metric::Measure { budget: 20_000 }, Metric::Hausdorff { resolution: 512 }, Metric::BoundaryRatio {
        resolution: 512,
    }];
    let mut measure = Vec::new();
    let mut hausdorff = Vec::new();
    let mut ratios = Vec::new();
    for (i, &n) in sizes.iter().enumerate() {
        let spec = CellSpec { estimator: Estimator::cone(PI / 5.0, 0.5), n, erasures: policy.erasures(n), runs: 50 };
        let scored = run_cell_metrics(&shape, Frame::unit_square(), &spec, &metrics, SEED, 100 + i).unwrap();
        measure.push(scored[0].0.mean_error);
        hausdorff.push(scored[1].0.mean_error);
        let first30: Vec<f64> = scored[2].1.iter().take(30).map(|r| r.error).collect();
        ratios.push(median(&first30));
    }

    let mut c3 = Outcome::new("3 measure rate slope");
    let fit = fit_rate(&sizes, &measure, Regressor::LogN).unwrap();
    c3.check((-0.70..=-0.35).contains(&fit.slope), format!("slope {:.4} in [-0.70, -0.35] (r2 {:.3})", fit.slope, fit.r2));
    let mut c4 = Outcome::new("4 Hausdorff rate slope");
    let fit_h = fit_rate(&sizes, &hausdorff, Regressor::LogLogNOverN).unwrap();
    c4.check((0.35..=0.70).contains(&fit_h.slope), format!("slope {:.4} in [0.35, 0.70] (r2 {:.3})", fit_h.slope, fit_h.r2));
    for (k, &n) in sizes.iter().enumerate() {
        let line = format!("n={n:<5} N={:<6} measure {:.5} hausdorff {:.5}", policy.erasures(n), measure[k], hausdorff[k]);
        c3.note(line.clone());
        c4.note(line);
    }

    let mut c5 = Outcome::new("5 boundary constant");
    let bound = 3.0 + 2.0 / (PI / 10.0).sin();
    for (k, &n) in sizes.iter().enumerate().filter(|(_, &n)| n >= 800) {
        c5.check(ratios[k] <= bound, format!("n={n}: median ratio {:.3} <= {bound:.3}", ratios[k]));
    }
    (c3, c4, c5)
}

fn point_in_sector<R: Rng>(s: &Sector, rng: &mut R) -> Point {
    let t = s.start_angle() + s.span() * rng.random_range(0.001..0.999);
    let d = s.radius() * rng.random_range(0.001f64..0.999).sqrt();
    let v = s.vertex();
    Point::new(v.x + d * t.cos(), v.y + d * t.sin())
}

fn empty_region(frame: Frame, mode: EraseMode) -> ErasedRegion {
    let echo = EstimatorEcho::Cone {
        rho: PI / 5.0,
        h: 0.5,
        target_erasures: 1000,
        max_attempts_per_erasure: 100_000,
        erase_mode: mode,
        axis_constraint: None,
    };
    ErasedRegion::new(frame, echo, SEED)
}

fn criterion_six() -> Outcome {
    let mut out = Outcome::new("6 soundness suite");
    let mut steps = 0usize;
    let mut in_sector = 0usize;
    let mut regrown = 0usize;
    let mut not_nested = 0usize;
    for (s, name) in SHAPE_NAMES.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED + s as u64);
        let shape = shape_by_name(name, &mut rng).unwrap();
        let sample = sample_uniform(&shape, 500, &mut rng).unwrap();
        let frame = shape.bounding_box();
        let probes: Vec<Point> = (0..2000)
            .map(|_| Point::new(rng.random_range(frame.xmin..frame.xmax), rng.random_range(frame.ymin..frame.ymax)))
            .collect();
        let mut paper = empty_region(frame, EraseMode::PaperLiteral);
        let mut extended = empty_region(frame, EraseMode::Extended);
        let paper_cfg = EraserConfig::new(PI / 5.0, 0.5, 1000, 0).with_mode(EraseMode::PaperLiteral);
        let ext_cfg = EraserConfig::new(PI / 5.0, 0.5, 1000, 0);
        // Both regions consume identical candidate streams.
        let mut rng_p = ChaCha8Rng::seed_from_u64(SEED ^ s as u64);
        let mut rng_e = rng_p.clone();
        let mut probe_rng = ChaCha8Rng::seed_from_u64(7 + s as u64);
        let mut erased_before = vec![[false, false]; probes.len()];
        while paper.erasures().min(extended.erasures()) < 1000 {
            let ok_p = erase_step(&mut paper, &sample, &paper_cfg, &mut rng_p);
            let ok_e = erase_step(&mut extended, &sample, &ext_cfg, &mut rng_e);
            for (ok, region) in [(ok_p, &paper), (ok_e, &extended)] {
                if ok {
                    steps += 1;
                    let new = region.sectors().last().unwrap();
                    in_sector += sample.points().iter().filter(|&&p| new.contains(p)).count();
                }
            }
            // A paper-literal erasure without its extended twin breaks nesting.
            not_nested += usize::from(ok_p && !ok_e);
            if ok_p && ok_e {
                let (p_sec, e_sec) = (paper.sectors().last().unwrap(), extended.sectors().last().unwrap());
                not_nested += (0..50).filter(|_| !e_sec.contains(point_in_sector(p_sec, &mut probe_rng))).count();
            }
            if ok_p && paper.erasures().is_multiple_of(100) {
                for (k, &q) in probes.iter().enumerate() {
                    let now = [!paper.contains(q), !extended.contains(q)];
                    regrown += (0..2).filter(|&m| erased_before[k][m] && !now[m]).count();
                    erased_before[k] = now;
                }
            }
        }
        out.note(format!("{name}: {} paper and {} extended sectors", paper.erasures(), extended.erasures()));
    }
    out.check(steps >= 10_000, format!("{steps} successful erase steps"));
    out.check(in_sector == 0, format!("{in_sector} sample points inside erased sectors"));
    out.check(regrown == 0, format!("{regrown} erased probes returned to the estimator"));
    out.check(not_nested == 0, format!("{not_nested} paper-literal probes outside the extended erasure"));
    out
}

fn criterion_seven() -> Outcome {
    let mut out = Outcome::new("7 oracle agreement");
    let start = Instant::now();
    let (rho, h) = (PI / 5.0, 0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let sample = sample_uniform(&table_one_set(), 500, &mut rng).unwrap();
    let region = run(&sample, Frame::unit_square(), &EraserConfig::new(rho, h, 200, SEED)).unwrap();
    let mut queries = Vec::new();
    while queries.len() < 1000 {
        let q = Point::new(rng.random(), rng.random());
        if !region.contains(q) {
            queries.push(q);
        }
    }
    let certified = queries
        .iter()
        .filter(|&&q| separation_oracle(&sample, q, rho, h, h / 50.0, 720).unwrap().is_found())
        .count();
    out.check(certified == 1000, format!("{certified}/1000 erased points certified"));

    let rhos = [(PI / 5.0, "pi/5"), (PI / 4.0, "pi/4"), (PI / 3.0, "pi/3"), (PI / 2.0, "pi/2"), (PI, "pi")];
    for (rho, label) in rhos {
        for h in [0.25, 0.5, 1.0] {
            let line = match build_unavoidable_family(Point::new(0.5, 0.5), rho, h) {
                Ok(family) => {
                    let fraction = check_unavoidability(&family, 10_000, &mut rng).unwrap();
                    (fraction == 1.0, format!("rho={label} h={h}: fraction {fraction} over {} members", family.len()))
                }
                Err(e) => (false, format!("rho={label} h={h}: {e}")),
            };
            out.check(line.0, line.1);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    out.check(secs <= 300.0, format!("runtime {secs:.1} s (limit 300 s)"));
    out
}

fn random_points<R: Rng>(rng: &mut R) -> Vec<Point> {
    let count = rng.random_range(1..30);
    (0..count).map(|_| Point::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
}

fn criterion_eight() -> Outcome {
    let mut out = Outcome::new("8 metric oracles");
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let est = measure_diff_mc(&table_one_set(), &Shape::unit_square(), &Frame::unit_square(), 1_000_000, &mut rng).unwrap();
    let se = est.standard_error().unwrap();
    let z = (est.value - 2.0 / 3.0) / se;
    out.check(z.abs() <= 3.0, format!("measure {:.5} vs 2/3, SE {se:.2e}, |z| {:.2} <= 3", est.value, z.abs()));

    let tol = 1e-12;
    let mut failures = 0usize;
    for _ in 0..10_000 {
        let (a, b, c) = (random_points(&mut rng), random_points(&mut rng), random_points(&mut rng));
        let d = |x: &[Point], y: &[Point]| hausdorff_point_sets(x, y).unwrap();
        let (ab, ba, bc, ac) = (d(&a, &b), d(&b, &a), d(&b, &c), d(&a, &c));
        let ok = d(&a, &a).abs() <= tol && ab >= 0.0 && (ab - ba).abs() <= tol && ac <= ab + bc + tol;
        failures += usize::from(!ok);
    }
    out.check(failures == 0, format!("{failures} of 10000 triples violate identity, symmetry or triangle"));
    out
}

fn main() -> ExitCode {
    let start = Instant::now();
    let t1 = Instant::now();
    let cells = table_one();
    let table_secs = t1.elapsed().as_secs_f64();
    let (c3, c4, c5) = rate_criteria();
    let outcomes = [
        criterion_one(&cells, table_secs),
        criterion_two(&cells),
        c3,
        c4,
        c5,
        criterion_six(),
        criterion_seven(),
        criterion_eight(),
    ];
    println!();
    for o in &outcomes {
        o.print();
    }
    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!("\nacceptance: {passed}/{} criteria passed in {:.1} s", outcomes.len(), start.elapsed().as_secs_f64());
    if passed == outcomes.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
