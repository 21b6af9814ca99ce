//! Stochastic cone eraser and its ball-eraser comparator.
//!
//! Starting from a rectangular frame, each step draws a random cone; if the
//! cone misses the sample, it is swept clockwise and counterclockwise (up to
//! a quarter turn each way) as long as it stays empty, and the swept sector
//! is removed from the frame. What remains after `N` removals estimates the
//! cone-convex hull by complement of the sample.

use std::f64::consts::{FRAC_PI_2, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{check_opening, half_opening_cos, Frame, GeomError, Membership, Point, Sector, UnitVector};

pub const DEFAULT_MAX_ATTEMPTS: u64 = 100_000;

#[derive(Debug, Error)]
pub enum EraserError {
    #[error("invalid eraser configuration: {0}")]
    Config(String),
    #[error("sample is empty")]
    EmptySample,
    #[error("sample point {index} ({x}, {y}) lies outside the frame")]
    OutsideFrame { index: usize, x: f64, y: f64 },
    #[error("seed cone already contains sample point {index}")]
    SeedConeOccupied { index: usize },
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("malformed region document: {0}")]
    Document(String),
}

/// The observed points, in draw order.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    points: Vec<Point>,
}

impl Sample {
    pub fn new(points: Vec<Point>) -> Result<Self, EraserError> {
        if points.is_empty() {
            return Err(EraserError::EmptySample);
        }
        for p in &points {
            Point::try_new(p.x, p.y)?;
        }
        Ok(Sample { points })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EraseMode {
    /// Sector bounded by the two extreme rotated axes.
    PaperLiteral,
    /// Full union of the swept empty cones: the literal sector plus a
    /// half-opening flank on each side.
    #[default]
    Extended,
}

/// Closed interval of admissible axis angles (counterclockwise radians).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisConstraint {
    pub min: f64,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EraserConfig {
    pub rho: f64,
    /// Cone height; `f64::INFINITY` requests unbounded cones, clipped to the
    /// frame diagonal.
    pub h: f64,
    pub target_erasures: usize,
    pub max_attempts_per_erasure: u64,
    pub mode: EraseMode,
    pub axis_constraint: Option<AxisConstraint>,
    pub seed: u64,
}

impl EraserConfig {
    pub fn new(rho: f64, h: f64, target_erasures: usize, seed: u64) -> Self {
        EraserConfig {
            rho,
            h,
            target_erasures,
            max_attempts_per_erasure: DEFAULT_MAX_ATTEMPTS,
            mode: EraseMode::Extended,
            axis_constraint: None,
            seed,
        }
    }

    pub fn with_mode(mut self, mode: EraseMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_axis_constraint(mut self, min: f64, max: f64) -> Self {
        self.axis_constraint = Some(AxisConstraint { min, max });
        self
    }

    pub fn validate(&self) -> Result<(), EraserError> {
        check_opening(self.rho).map_err(|e| EraserError::Config(e.to_string()))?;
        if self.h.is_nan() || self.h <= 0.0 {
            return Err(EraserError::Config(format!("height {} must be positive", self.h)));
        }
        if self.target_erasures == 0 {
            return Err(EraserError::Config("target erasures N must be at least 1".into()));
        }
        if self.max_attempts_per_erasure == 0 {
            return Err(EraserError::Config("max attempts per erasure must be at least 1".into()));
        }
        if let Some(c) = self.axis_constraint {
            if !(c.min.is_finite() && c.max.is_finite() && c.min <= c.max && c.max - c.min <= TAU) {
                return Err(EraserError::Config(format!(
                    "axis constraint [{}, {}] is not a valid angular interval",
                    c.min, c.max
                )));
            }
        }
        Ok(())
    }
}

/// Largest empty rotations of a seed cone: `theta_cw` in [0, pi/2],
/// `theta_ccw` in [-pi/2, 0].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepResult {
    pub theta_cw: f64,
    pub theta_ccw: f64,
}

/// Draws a cone vertex uniformly on `frame` and an axis uniformly on the
/// circle (or on `constraint`).
pub fn draw_candidate<R: Rng + ?Sized>(
    frame: &Frame,
    constraint: Option<AxisConstraint>,
    rng: &mut R,
) -> (Point, UnitVector) {
    let vertex = uniform_point(frame, rng);
    let angle = match constraint {
        Some(c) => c.min + (c.max - c.min) * rng.random::<f64>(),
        None => TAU * rng.random::<f64>(),
    };
    (vertex, UnitVector::from_angle(angle))
}

pub(crate) fn uniform_point<R: Rng + ?Sized>(frame: &Frame, rng: &mut R) -> Point {
    let x = frame.xmin + frame.width() * rng.random::<f64>();
    let y = frame.ymin + frame.height() * rng.random::<f64>();
    Point::new(x, y)
}

/// Relative angle of `p` seen from `vertex`, measured counterclockwise from
/// `axis`, for points strictly inside the radius. `None` otherwise.
#[inline]
fn relative_angle(vertex: Point, axis: UnitVector, h2: f64, p: Point) -> Option<f64> {
    let dx = p.x - vertex.x;
    let dy = p.y - vertex.y;
    let d2 = dx * dx + dy * dy;
    if d2 <= 0.0 || d2 >= h2 {
        return None;
    }
    let along = axis.ux() * dx + axis.uy() * dy;
    let across = axis.ux() * dy - axis.uy() * dx;
    Some(across.atan2(along))
}

#[inline]
fn seed_cone_hits(vertex: Point, axis: UnitVector, cos_half: f64, h2: f64, p: Point) -> bool {
    let dx = p.x - vertex.x;
    let dy = p.y - vertex.y;
    let d2 = dx * dx + dy * dy;
    d2 > 0.0 && d2 < h2 && axis.ux() * dx + axis.uy() * dy > cos_half * d2.sqrt()
}

/// First sample point inside the open cone, if any.
pub fn first_hit(points: &[Point], vertex: Point, axis: UnitVector, rho: f64, h: f64) -> Option<usize> {
    let cos_half = half_opening_cos(rho);
    let h2 = h * h;
    points.iter().position(|&p| seed_cone_hits(vertex, axis, cos_half, h2, p))
}

/// Closed-form sweep: the largest clockwise and counterclockwise rotations of
/// the seed cone such that every intermediate rotated cone misses the sample.
/// Each side is capped at a quarter turn.
pub fn max_sweep(sample: &Sample, vertex: Point, axis: UnitVector, rho: f64, h: f64) -> Result<SweepResult, EraserError> {
    sweep_points(sample.points(), vertex, axis, rho, h)
}

pub(crate) fn sweep_points(points: &[Point], vertex: Point, axis: UnitVector, rho: f64, h: f64) -> Result<SweepResult, EraserError> {
    let half = rho / 2.0;
    let cos_half = half_opening_cos(rho);
    let h2 = h * h;
    let mut theta_cw = FRAC_PI_2;
    let mut theta_ccw = -FRAC_PI_2;
    for (index, &p) in points.iter().enumerate() {
        let Some(phi) = relative_angle(vertex, axis, h2, p) else {
            continue;
        };
        if seed_cone_hits(vertex, axis, cos_half, h2, p) {
            return Err(EraserError::SeedConeOccupied { index });
        }
        // A point that the cone test places outside but whose angle rounds
        // inside the half-opening sits on an edge: it blocks that side at once.
        if phi <= 0.0 {
            theta_cw = theta_cw.min((-phi - half).max(0.0));
        }
        if phi >= 0.0 {
            theta_ccw = theta_ccw.max((half - phi).min(0.0));
        }
    }
    Ok(SweepResult { theta_cw, theta_ccw })
}

/// Estimator parameters echoed into the region document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "estimator", rename_all = "snake_case", deny_unknown_fields)]
pub enum EstimatorEcho {
    Cone {
        rho: f64,
        h: f64,
        target_erasures: usize,
        max_attempts_per_erasure: u64,
        erase_mode: EraseMode,
        axis_constraint: Option<AxisConstraint>,
    },
    Ball {
        r: f64,
        target_erasures: usize,
        max_attempts_per_erasure: u64,
    },
}

/// Uniform grid over the frame; each cell lists the sectors whose bounding
/// box meets it.
#[derive(Clone, Debug)]
struct SectorIndex {
    frame: Frame,
    cols: usize,
    rows: usize,
    cells: Vec<Vec<u32>>,
}

impl SectorIndex {
    const RESOLUTION: usize = 32;

    fn new(frame: Frame) -> Self {
        let cols = Self::RESOLUTION;
        let rows = Self::RESOLUTION;
        SectorIndex { frame, cols, rows, cells: vec![Vec::new(); cols * rows] }
    }

    fn col_of(&self, x: f64) -> usize {
        let t = (x - self.frame.xmin) / self.frame.width() * self.cols as f64;
        (t.max(0.0) as usize).min(self.cols - 1)
    }

    fn row_of(&self, y: f64) -> usize {
        let t = (y - self.frame.ymin) / self.frame.height() * self.rows as f64;
        (t.max(0.0) as usize).min(self.rows - 1)
    }

    fn insert(&mut self, id: u32, sector: &Sector) {
        let (xmin, xmax, ymin, ymax) = sector.bounding_box();
        let f = self.frame;
        if xmax < f.xmin || xmin > f.xmax || ymax < f.ymin || ymin > f.ymax {
            return;
        }
        let (c0, c1) = (self.col_of(xmin), self.col_of(xmax));
        let (r0, r1) = (self.row_of(ymin), self.row_of(ymax));
        for r in r0..=r1 {
            for c in c0..=c1 {
                self.cells[r * self.cols + c].push(id);
            }
        }
    }

    fn candidates(&self, p: Point) -> &[u32] {
        &self.cells[self.row_of(p.y) * self.cols + self.col_of(p.x)]
    }
}

/// The frame minus an append-only list of erased sectors.
#[derive(Clone, Debug)]
pub struct ErasedRegion {
    frame: Frame,
    sectors: Vec<Sector>,
    attempts: u64,
    early_stop: bool,
    estimator: EstimatorEcho,
    seed: u64,
    index: SectorIndex,
}

impl ErasedRegion {
    pub fn new(frame: Frame, estimator: EstimatorEcho, seed: u64) -> Self {
        ErasedRegion {
            frame,
            sectors: Vec::new(),
            attempts: 0,
            early_stop: false,
            estimator,
            seed,
            index: SectorIndex::new(frame),
        }
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn sectors(&self) -> &[Sector] {
        &self.sectors
    }

    pub fn attempts(&self) -> u64 {
        self.attempts
    }

    pub fn erasures(&self) -> usize {
        self.sectors.len()
    }

    /// True when the run gave up before reaching its target erasure count.
    pub fn early_stop(&self) -> bool {
        self.early_stop
    }

    pub fn estimator(&self) -> &EstimatorEcho {
        &self.estimator
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn push(&mut self, sector: Sector) {
        let id = self.sectors.len() as u32;
        self.index.insert(id, &sector);
        self.sectors.push(sector);
    }

    /// Membership in the estimator: inside the closed frame and in no
    /// erased sector.
    pub fn contains(&self, p: Point) -> bool {
        if !self.frame.contains(p) {
            return false;
        }
        !self
            .index
            .candidates(p)
            .iter()
            .any(|&id| self.sectors[id as usize].contains(p))
    }

    /// Indices of sample points removed by some sector; empty for a sound
    /// region.
    pub fn violations(&self, sample: &Sample) -> Vec<usize> {
        sample
            .points()
            .iter()
            .enumerate()
            .filter(|(_, &p)| !self.contains(p))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn to_document(&self) -> RegionDocument {
        RegionDocument {
            schema_version: REGION_SCHEMA_VERSION,
            frame: self.frame,
            sectors: self
                .sectors
                .iter()
                .map(|s| SectorRecord {
                    vertex: [s.vertex().x, s.vertex().y],
                    start_angle: s.start_angle(),
                    span: s.span(),
                    radius: s.radius(),
                })
                .collect(),
            attempts: self.attempts,
            erasures: self.sectors.len(),
            early_stop: self.early_stop,
            config: self.estimator.clone(),
            seed: self.seed,
        }
    }

    pub fn from_document(doc: RegionDocument) -> Result<Self, EraserError> {
        if doc.schema_version != REGION_SCHEMA_VERSION {
            return Err(EraserError::Document(format!("unsupported schema version {}", doc.schema_version)));
        }
        if doc.erasures != doc.sectors.len() {
            return Err(EraserError::Document(format!(
                "erasure count {} does not match {} sectors",
                doc.erasures,
                doc.sectors.len()
            )));
        }
        let frame = Frame::new(doc.frame.xmin, doc.frame.xmax, doc.frame.ymin, doc.frame.ymax)?;
        let mut region = ErasedRegion::new(frame, doc.config, doc.seed);
        region.attempts = doc.attempts;
        region.early_stop = doc.early_stop;
        for s in doc.sectors {
            region.push(Sector::new(Point::new(s.vertex[0], s.vertex[1]), s.start_angle, s.span, s.radius)?);
        }
        Ok(region)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("region document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, EraserError> {
        let doc: RegionDocument = serde_json::from_str(text).map_err(|e| EraserError::Document(e.to_string()))?;
        ErasedRegion::from_document(doc)
    }
}

impl Membership for ErasedRegion {
    fn contains(&self, p: Point) -> bool {
        ErasedRegion::contains(self, p)
    }
}

pub const REGION_SCHEMA_VERSION: u32 = 1;

/// JSON form of an [`ErasedRegion`]. Field order is fixed by declaration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionDocument {
    pub schema_version: u32,
    pub frame: Frame,
    pub sectors: Vec<SectorRecord>,
    pub attempts: u64,
    pub erasures: usize,
    pub early_stop: bool,
    pub config: EstimatorEcho,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectorRecord {
    pub vertex: [f64; 2],
    #[serde(rename = "startAngle")]
    pub start_angle: f64,
    pub span: f64,
    pub radius: f64,
}

/// Shrinks `sector` symmetrically by a few ulps-worth of angle until it
/// holds none of `points`. Only sample points lying on an edge ray can
/// trigger this. Returns `None` if the sector collapses.
fn exclude_points(sector: Sector, points: &[Point]) -> Option<Sector> {
    let mut current = sector;
    let mut shrink = 1e-12;
    loop {
        if !points.iter().any(|&p| current.contains(p)) {
            return Some(current);
        }
        let span = sector.span() - 2.0 * shrink;
        if span < 0.0 {
            return None;
        }
        current = Sector::new(sector.vertex(), sector.start_angle() + shrink, span, sector.radius()).ok()?;
        shrink *= 4.0;
    }
}

/// Resolved cone height for `frame`.
fn effective_height(h: f64, frame: &Frame) -> f64 {
    if h.is_finite() {
        h
    } else {
        frame.diagonal()
    }
}

/// One draw of the cone eraser. Returns `true` and appends a sector when the
/// drawn cone misses the sample; otherwise only the attempt counter moves.
pub fn erase_step<R: Rng + ?Sized>(region: &mut ErasedRegion, sample: &Sample, config: &EraserConfig, rng: &mut R) -> bool {
    region.attempts += 1;
    let frame = region.frame;
    let h = effective_height(config.h, &frame);
    let (vertex, axis) = draw_candidate(&frame, config.axis_constraint, rng);
    let points = sample.points();
    if first_hit(points, vertex, axis, config.rho, h).is_some() {
        return false;
    }
    let sweep = sweep_points(points, vertex, axis, config.rho, h).expect("seed cone checked empty");
    let axis_angle = axis.angle();
    let (start, span) = match config.mode {
        EraseMode::PaperLiteral => (axis_angle - sweep.theta_cw, sweep.theta_cw - sweep.theta_ccw),
        EraseMode::Extended => (
            axis_angle - sweep.theta_cw - config.rho / 2.0,
            sweep.theta_cw - sweep.theta_ccw + config.rho,
        ),
    };
    let Ok(sector) = Sector::new(vertex, start, span.min(TAU), h) else {
        return false;
    };
    let Some(sector) = exclude_points(sector, points) else {
        return false;
    };
    region.push(sector);
    true
}

/// One draw of the ball eraser: a disk of radius `r` centred uniformly on the
/// frame dilated by `r`, erased when it holds no sample point.
pub fn ball_erase_step<R: Rng + ?Sized>(region: &mut ErasedRegion, sample: &Sample, r: f64, rng: &mut R) -> bool {
    region.attempts += 1;
    let centers = region.frame.dilate(r);
    let center = uniform_point(&centers, rng);
    let r2 = r * r;
    if sample.points().iter().any(|&p| center.dist2(p) < r2) {
        return false;
    }
    match Sector::disk(center, r) {
        Ok(disk) => {
            region.push(disk);
            true
        }
        Err(_) => false,
    }
}

fn check_sample(sample: &Sample, frame: &Frame) -> Result<(), EraserError> {
    if let Some((index, p)) = sample.points().iter().enumerate().find(|(_, p)| !frame.contains(**p)) {
        return Err(EraserError::OutsideFrame { index, x: p.x, y: p.y });
    }
    Ok(())
}

fn drive<F>(region: &mut ErasedRegion, target: usize, max_attempts: u64, mut step: F)
where
    F: FnMut(&mut ErasedRegion) -> bool,
{
    let mut failures = 0u64;
    while region.erasures() < target {
        if step(region) {
            failures = 0;
        } else {
            failures += 1;
            if failures >= max_attempts {
                region.early_stop = true;
                break;
            }
        }
    }
}

/// Runs the cone eraser until `target_erasures` sectors are erased or
/// `max_attempts_per_erasure` consecutive draws fail (flagged as an early
/// stop on the returned region).
pub fn run(sample: &Sample, frame: Frame, config: &EraserConfig) -> Result<ErasedRegion, EraserError> {
    config.validate()?;
    check_sample(sample, &frame)?;
    let echo = EstimatorEcho::Cone {
        rho: config.rho,
        h: effective_height(config.h, &frame),
        target_erasures: config.target_erasures,
        max_attempts_per_erasure: config.max_attempts_per_erasure,
        erase_mode: config.mode,
        axis_constraint: config.axis_constraint,
    };
    let mut region = ErasedRegion::new(frame, echo, config.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    drive(&mut region, config.target_erasures, config.max_attempts_per_erasure, |r| {
        erase_step(r, sample, config, &mut rng)
    });
    Ok(region)
}

/// Ball-eraser comparator approximating the r-convex hull of the sample.
pub fn run_ball_eraser(
    sample: &Sample,
    frame: Frame,
    r: f64,
    target_erasures: usize,
    max_attempts: u64,
    seed: u64,
) -> Result<ErasedRegion, EraserError> {
    if !(r.is_finite() && r > 0.0) {
        return Err(EraserError::Config(format!("ball radius {r} must be positive")));
    }
    if target_erasures == 0 {
        return Err(EraserError::Config("target erasures N must be at least 1".into()));
    }
    if max_attempts == 0 {
        return Err(EraserError::Config("max attempts per erasure must be at least 1".into()));
    }
    check_sample(sample, &frame)?;
    let echo = EstimatorEcho::Ball { r, target_erasures, max_attempts_per_erasure: max_attempts };
    let mut region = ErasedRegion::new(frame, echo, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    drive(&mut region, target_erasures, max_attempts, |reg| ball_erase_step(reg, sample, r, &mut rng));
    Ok(region)
}
