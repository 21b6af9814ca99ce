//! Ground-truth sets with exact membership, uniform samplers and point-file
//! ingestion.

use std::f64::consts::PI;
use std::fmt;
use std::fs::File;
use std::io::Read;
use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::eraser::{uniform_point, EraserError, Sample};
use crate::geom::{Frame, Membership, Point};

pub const DEFAULT_REJECTION_BUDGET: u64 = 1_000_000_000;
pub const DEFAULT_HYPOGRAPH_FLOOR: f64 = 0.05;

#[derive(Debug, Error)]
pub enum ShapeError {
    #[error("sample size must be at least 1")]
    EmptyRequest,
    #[error("rejection budget of {budget} proposals exhausted while sampling shape '{shape}'")]
    BudgetExceeded { shape: String, budget: u64 },
    #[error("brownian path needs at least 2 steps, got {0}")]
    Steps(usize),
    #[error("unknown shape '{0}'")]
    UnknownShape(String),
    #[error("{path}: line {line}: {message}")]
    Parse { path: String, line: u64, message: String },
    #[error("{0}: no points found")]
    EmptyFile(String),
    #[error("{path}: cannot rescale, points span a degenerate box")]
    Degenerate { path: String },
    #[error("cannot read {path}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Sample(#[from] EraserError),
}

/// Piecewise-linear positive function on `[0, 1]` over an equally spaced grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PathFunction {
    values: Vec<f64>,
}

impl PathFunction {
    pub fn new(values: Vec<f64>) -> Option<Self> {
        if values.len() < 2 || values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return None;
        }
        Some(PathFunction { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn steps(&self) -> usize {
        self.values.len() - 1
    }

    /// Abscissa of grid point `i`.
    pub fn abscissa(&self, i: usize) -> f64 {
        i as f64 / self.steps() as f64
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.steps();
        let t = (x.clamp(0.0, 1.0) * n as f64).min(n as f64);
        let i = (t.floor() as usize).min(n - 1);
        let frac = t - i as f64;
        self.values[i] + frac * (self.values[i + 1] - self.values[i])
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::MIN, f64::max)
    }

    /// Exact integral of the interpolant.
    pub fn integral(&self) -> f64 {
        let h = 1.0 / self.steps() as f64;
        self.values.windows(2).map(|w| 0.5 * (w[0] + w[1]) * h).sum()
    }
}

#[derive(Clone)]
enum ShapeKind {
    Rectangle,
    TriangleNotch { notch: [Point; 3] },
    Star { triangles: Vec<[Point; 3]> },
    TableOne { holes: [[Point; 3]; 4] },
    Hypograph(PathFunction),
    Custom(Arc<dyn Fn(Point) -> bool + Send + Sync>),
}

/// A compact planar set: membership predicate, bounding box and, when known
/// in closed form, its area.
#[derive(Clone)]
pub struct Shape {
    label: String,
    bbox: Frame,
    known_area: Option<f64>,
    kind: ShapeKind,
}

impl fmt::Debug for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Shape")
            .field("label", &self.label)
            .field("bbox", &self.bbox)
            .field("known_area", &self.known_area)
            .finish()
    }
}

/// Sign of the cross product `(b - a) x (p - a)`.
#[inline]
fn orient(a: Point, b: Point, p: Point) -> f64 {
    (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x)
}

/// Strict interior test, for either vertex orientation.
pub fn in_open_triangle(p: Point, t: &[Point; 3]) -> bool {
    let d1 = orient(t[0], t[1], p);
    let d2 = orient(t[1], t[2], p);
    let d3 = orient(t[2], t[0], p);
    (d1 > 0.0 && d2 > 0.0 && d3 > 0.0) || (d1 < 0.0 && d2 < 0.0 && d3 < 0.0)
}

pub fn in_closed_triangle(p: Point, t: &[Point; 3]) -> bool {
    let d1 = orient(t[0], t[1], p);
    let d2 = orient(t[1], t[2], p);
    let d3 = orient(t[2], t[0], p);
    (d1 >= 0.0 && d2 >= 0.0 && d3 >= 0.0) || (d1 <= 0.0 && d2 <= 0.0 && d3 <= 0.0)
}

pub fn triangle_area(t: &[Point; 3]) -> f64 {
    0.5 * orient(t[0], t[1], t[2]).abs()
}

impl Shape {
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn bounding_box(&self) -> Frame {
        self.bbox
    }

    pub fn known_area(&self) -> Option<f64> {
        self.known_area
    }

    /// Underlying path for hypograph shapes.
    pub fn path(&self) -> Option<&PathFunction> {
        match &self.kind {
            ShapeKind::Hypograph(f) => Some(f),
            _ => None,
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        if !self.bbox.contains(p) {
            return false;
        }
        match &self.kind {
            ShapeKind::Rectangle => true,
            ShapeKind::TriangleNotch { notch } => !in_open_triangle(p, notch),
            ShapeKind::Star { triangles } => triangles.iter().any(|t| in_closed_triangle(p, t)),
            ShapeKind::TableOne { holes } => !holes.iter().any(|t| in_open_triangle(p, t)),
            ShapeKind::Hypograph(f) => p.y >= 0.0 && p.y <= f.eval(p.x),
            ShapeKind::Custom(f) => f(p),
        }
    }

    /// Shape from an arbitrary predicate; points outside `bbox` are
    /// rejected before `membership` is consulted.
    pub fn from_predicate<F>(label: &str, bbox: Frame, known_area: Option<f64>, membership: F) -> Shape
    where
        F: Fn(Point) -> bool + Send + Sync + 'static,
    {
        Shape { label: label.to_string(), bbox, known_area, kind: ShapeKind::Custom(Arc::new(membership)) }
    }

    pub fn rectangle(frame: Frame) -> Shape {
        Shape { label: "rectangle".into(), bbox: frame, known_area: Some(frame.area()), kind: ShapeKind::Rectangle }
    }

    pub fn unit_square() -> Shape {
        Shape { label: "unit-square".into(), ..Shape::rectangle(Frame::unit_square()) }
    }
}

impl Membership for Shape {
    fn contains(&self, p: Point) -> bool {
        Shape::contains(self, p)
    }
}

/// Half-height `t` of the notched rectangle, `tan(3pi/8) / 2`.
pub fn notch_depth() -> f64 {
    0.5 * (3.0 * PI / 8.0).tan()
}

/// `[0,1] x [0, t + 1/2]` minus the open isosceles triangle with apex
/// `(1/2, 1/2)` cut down from the top edge. The notch angle at the apex is
/// pi/4, so the set is pi/4-cone-convex.
pub fn triangle_notch_set() -> Shape {
    let t = notch_depth();
    let top = t + 0.5;
    let notch = [Point::new(0.0, top), Point::new(1.0, top), Point::new(0.5, 0.5)];
    Shape {
        label: "triangle-notch".into(),
        bbox: Frame { xmin: 0.0, xmax: 1.0, ymin: 0.0, ymax: top },
        known_area: Some(top - t / 2.0),
        kind: ShapeKind::TriangleNotch { notch },
    }
}

/// Eight congruent triangles arranged around the origin with 8-fold
/// rotational symmetry; the base triangle has vertices `(1, 0)`,
/// `(1 + s, s)`, `(1 + s, -s)` with `s = (sqrt 2 - 1) / 2`.
pub fn eight_triangle_star() -> Shape {
    let s = star_offset();
    let base = [Point::new(1.0, 0.0), Point::new(1.0 + s, s), Point::new(1.0 + s, -s)];
    let triangles: Vec<[Point; 3]> = (0..8)
        .map(|k| {
            let (sn, cs) = (k as f64 * PI / 4.0).sin_cos();
            base.map(|p| Point::new(cs * p.x - sn * p.y, sn * p.x + cs * p.y))
        })
        .collect();
    let reach = (1.0 + s).hypot(s);
    Shape {
        label: "star".into(),
        bbox: Frame { xmin: -reach, xmax: reach, ymin: -reach, ymax: reach },
        known_area: Some(8.0 * s * s),
        kind: ShapeKind::Star { triangles },
    }
}

pub fn star_offset() -> f64 {
    (2f64.sqrt() - 1.0) / 2.0
}

/// Opening angle for which the four-notch set is cone-convex.
pub fn table_one_rho0() -> f64 {
    2.0 * (1.0f64 / 3.0).atan()
}

/// Triangles removed from the unit square to form the four-notch set.
pub fn table_one_holes() -> [[Point; 3]; 4] {
    let c = Point::new(0.5, 0.5);
    [
        [Point::new(0.0, 1.0), c, Point::new(1.0, 1.0)],
        [Point::new(0.0, 0.0), c, Point::new(1.0, 0.0)],
        [Point::new(0.0, 1.0 / 3.0), c, Point::new(0.0, 2.0 / 3.0)],
        [Point::new(1.0, 1.0 / 3.0), c, Point::new(1.0, 2.0 / 3.0)],
    ]
}

/// Unit square minus four open triangles meeting at the centre; area 1/3.
pub fn table_one_set() -> Shape {
    Shape {
        label: "table1".into(),
        bbox: Frame::unit_square(),
        known_area: Some(1.0 / 3.0),
        kind: ShapeKind::TableOne { holes: table_one_holes() },
    }
}

/// Hypograph `{(x, y): 0 <= y <= f(x)}` of a simulated Brownian path on
/// `[0, 1]`, shifted so its minimum equals `floor`.
pub fn brownian_hypograph<R: Rng + ?Sized>(steps: usize, floor: f64, rng: &mut R) -> Result<Shape, ShapeError> {
    if steps < 2 {
        return Err(ShapeError::Steps(steps));
    }
    let normal = Normal::new(0.0, (1.0 / steps as f64).sqrt()).expect("positive variance");
    let mut values = Vec::with_capacity(steps + 1);
    let mut w = 0.0;
    values.push(w);
    for _ in 0..steps {
        w += normal.sample(rng);
        values.push(w);
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    for v in &mut values {
        *v = *v - min + floor;
    }
    let path = PathFunction::new(values).expect("shifted path is positive");
    Ok(Shape {
        label: "brownian".into(),
        bbox: Frame { xmin: 0.0, xmax: 1.0, ymin: 0.0, ymax: path.max() },
        known_area: Some(path.integral()),
        kind: ShapeKind::Hypograph(path),
    })
}

/// Uniform sample of `n` points by rejection from the bounding box, plus
/// the number of proposals consumed.
pub fn sample_uniform_counted<R: Rng + ?Sized>(
    shape: &Shape,
    n: usize,
    budget: u64,
    rng: &mut R,
) -> Result<(Sample, u64), ShapeError> {
    if n == 0 {
        return Err(ShapeError::EmptyRequest);
    }
    let mut points = Vec::with_capacity(n);
    let mut proposals = 0u64;
    while points.len() < n {
        if proposals >= budget {
            return Err(ShapeError::BudgetExceeded { shape: shape.label.clone(), budget });
        }
        proposals += 1;
        let p = uniform_point(&shape.bbox, rng);
        if shape.contains(p) {
            points.push(p);
        }
    }
    Ok((Sample::new(points)?, proposals))
}

pub fn sample_uniform<R: Rng + ?Sized>(shape: &Shape, n: usize, rng: &mut R) -> Result<Sample, ShapeError> {
    sample_uniform_counted(shape, n, DEFAULT_REJECTION_BUDGET, rng).map(|(s, _)| s)
}

/// Builds a named shape. `brownian` consumes randomness from `rng`.
pub fn shape_by_name<R: Rng + ?Sized>(name: &str, rng: &mut R) -> Result<Shape, ShapeError> {
    match name {
        "triangle-notch" | "notch" => Ok(triangle_notch_set()),
        "star" => Ok(eight_triangle_star()),
        "table1" | "s1" => Ok(table_one_set()),
        "unit-square" | "square" => Ok(Shape::unit_square()),
        "brownian" => brownian_hypograph(500, DEFAULT_HYPOGRAPH_FLOOR, rng),
        other => Err(ShapeError::UnknownShape(other.to_string())),
    }
}

pub const SHAPE_NAMES: [&str; 5] = ["triangle-notch", "star", "table1", "unit-square", "brownian"];

/// Reads a point CSV (header `x,y`, `#` comments). With `rescale`, the
/// points' bounding box is mapped affinely onto the unit square.
pub fn load_points(path: &Path, rescale: bool) -> Result<Sample, ShapeError> {
    let name = path.display().to_string();
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|source| ShapeError::Io { path: name.clone(), source })?;
    parse_points(&text, &name, rescale)
}

pub fn parse_points(text: &str, name: &str, rescale: bool) -> Result<Sample, ShapeError> {
    let err = |line: u64, message: String| ShapeError::Parse { path: name.to_string(), line, message };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| err(1, e.to_string()))?.clone();
    if header.is_empty() {
        return Err(ShapeError::EmptyFile(name.to_string()));
    }
    if header.len() != 2 || &header[0] != "x" || &header[1] != "y" {
        let line = header.position().map_or(1, |p| p.line());
        return Err(err(line, format!("expected header 'x,y', found '{}'", header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut points = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 2 {
            return Err(err(line, format!("expected 2 fields, found {}", record.len())));
        }
        let parse = |s: &str| -> Result<f64, ShapeError> {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(line, format!("'{s}' is not a finite number")))
        };
        points.push(Point::new(parse(&record[0])?, parse(&record[1])?));
    }
    if points.is_empty() {
        return Err(ShapeError::EmptyFile(name.to_string()));
    }
    if rescale {
        let bb = Frame::bounding(&points).ok_or_else(|| ShapeError::Degenerate { path: name.to_string() })?;
        for p in &mut points {
            p.x = ((p.x - bb.xmin) / bb.width()).clamp(0.0, 1.0);
            p.y = ((p.y - bb.ymin) / bb.height()).clamp(0.0, 1.0);
        }
    }
    Ok(Sample::new(points)?)
}
