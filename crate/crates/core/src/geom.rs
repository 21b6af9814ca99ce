//! Planar primitives: points, unit directions, finite cones and circular
//! sectors, plus the parameter conversions used by the rate analysis.
//!
//! Angles are counterclockwise-positive everywhere except in [`rotate`],
//! whose positive argument turns clockwise. All regions are open in the
//! radial direction and exclude their vertex; sectors are closed in angle.

use std::f64::consts::{FRAC_PI_3, PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for unit-norm checks.
pub const UNIT_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("non-finite coordinate ({0}, {1})")]
    NonFinite(f64, f64),
    #[error("opening angle {0} outside (0, pi]")]
    Opening(f64),
    #[error("height {0} must be positive and finite")]
    Height(f64),
    #[error("radius {0} must be positive and finite")]
    Radius(f64),
    #[error("sector span {0} outside [0, 2pi]")]
    Span(f64),
    #[error("zero-length direction")]
    ZeroDirection,
    #[error("degenerate frame [{0}, {1}] x [{2}, {3}]")]
    Frame(f64, f64, f64, f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn try_new(x: f64, y: f64) -> Result<Self, GeomError> {
        if x.is_finite() && y.is_finite() {
            Ok(Point { x, y })
        } else {
            Err(GeomError::NonFinite(x, y))
        }
    }

    #[inline]
    pub fn dist2(self, other: Point) -> f64 {
        let dx = other.x - self.x;
        let dy = other.y - self.y;
        dx * dx + dy * dy
    }

    #[inline]
    pub fn dist(self, other: Point) -> f64 {
        self.dist2(other).sqrt()
    }

    #[inline]
    pub fn offset(self, dir: UnitVector, len: f64) -> Point {
        Point::new(self.x + len * dir.ux, self.y + len * dir.uy)
    }
}

/// A direction in the plane, normalized on construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitVector {
    ux: f64,
    uy: f64,
}

impl UnitVector {
    pub const EAST: UnitVector = UnitVector { ux: 1.0, uy: 0.0 };

    /// Normalizes `(x, y)`.
    pub fn new(x: f64, y: f64) -> Result<Self, GeomError> {
        if !x.is_finite() || !y.is_finite() {
            return Err(GeomError::NonFinite(x, y));
        }
        let n = x.hypot(y);
        if n == 0.0 {
            return Err(GeomError::ZeroDirection);
        }
        Ok(UnitVector { ux: x / n, uy: y / n })
    }

    /// Direction at counterclockwise angle `theta` from the positive x axis.
    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        UnitVector { ux: c, uy: s }
    }

    /// Direction from `from` towards `to`, if the points differ.
    pub fn between(from: Point, to: Point) -> Option<Self> {
        UnitVector::new(to.x - from.x, to.y - from.y).ok()
    }

    #[inline]
    pub fn ux(self) -> f64 {
        self.ux
    }

    #[inline]
    pub fn uy(self) -> f64 {
        self.uy
    }

    /// Counterclockwise angle from the positive x axis, in (-pi, pi].
    pub fn angle(self) -> f64 {
        signed_angle(UnitVector::EAST, self)
    }

    #[inline]
    pub fn dot(self, other: UnitVector) -> f64 {
        self.ux * other.ux + self.uy * other.uy
    }

    #[inline]
    pub fn cross(self, other: UnitVector) -> f64 {
        self.ux * other.uy - self.uy * other.ux
    }

    pub fn norm(self) -> f64 {
        self.ux.hypot(self.uy)
    }
}

/// Rotates `u` clockwise by `theta`; negative `theta` turns counterclockwise.
/// A direction at angle `a` maps to angle `a - theta`.
pub fn rotate(u: UnitVector, theta: f64) -> UnitVector {
    let (s, c) = theta.sin_cos();
    UnitVector {
        ux: u.ux * c + u.uy * s,
        uy: -u.ux * s + u.uy * c,
    }
}

/// Counterclockwise angle from `reference` to `target`, in (-pi, pi].
pub fn signed_angle(reference: UnitVector, target: UnitVector) -> f64 {
    let a = reference.cross(target).atan2(reference.dot(target));
    if a == -PI {
        PI
    } else {
        a
    }
}

/// Angle reduced into [0, 2pi).
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// A planar set given by its membership predicate.
pub trait Membership: Sync {
    fn contains(&self, p: Point) -> bool;
}

impl<F> Membership for F
where
    F: Fn(Point) -> bool + Sync,
{
    fn contains(&self, p: Point) -> bool {
        self(p)
    }
}

/// Axis-aligned rectangle `[xmin, xmax] x [ymin, ymax]`, closed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Frame {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Result<Self, GeomError> {
        let ok = [xmin, xmax, ymin, ymax].iter().all(|v| v.is_finite()) && xmin < xmax && ymin < ymax;
        if ok {
            Ok(Frame { xmin, xmax, ymin, ymax })
        } else {
            Err(GeomError::Frame(xmin, xmax, ymin, ymax))
        }
    }

    pub const fn unit_square() -> Self {
        Frame { xmin: 0.0, xmax: 1.0, ymin: 0.0, ymax: 1.0 }
    }

    #[inline]
    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.xmin && p.x <= self.xmax && p.y >= self.ymin && p.y <= self.ymax
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn dilate(&self, by: f64) -> Frame {
        Frame {
            xmin: self.xmin - by,
            xmax: self.xmax + by,
            ymin: self.ymin - by,
            ymax: self.ymax + by,
        }
    }

    /// Smallest frame containing all points, or `None` for an empty or
    /// degenerate set.
    pub fn bounding(points: &[Point]) -> Option<Frame> {
        let first = points.first()?;
        let mut f = Frame { xmin: first.x, xmax: first.x, ymin: first.y, ymax: first.y };
        for p in &points[1..] {
            f.xmin = f.xmin.min(p.x);
            f.xmax = f.xmax.max(p.x);
            f.ymin = f.ymin.min(p.y);
            f.ymax = f.ymax.max(p.y);
        }
        Frame::new(f.xmin, f.xmax, f.ymin, f.ymax).ok()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Height {
    Finite(f64),
    /// Lighthouse-style cone; callers substitute the frame diagonal where a
    /// finite extent is needed.
    Unbounded,
}

impl Height {
    pub fn resolve(self, fallback: f64) -> f64 {
        match self {
            Height::Finite(h) => h,
            Height::Unbounded => fallback,
        }
    }
}

/// Open cone `B(vertex, height) ∩ C_opening(vertex)` around `axis`,
/// vertex excluded.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FiniteCone {
    vertex: Point,
    axis: UnitVector,
    opening: f64,
    height: Height,
    cos_half: f64,
}

impl FiniteCone {
    pub fn new(vertex: Point, axis: UnitVector, opening: f64, height: Height) -> Result<Self, GeomError> {
        check_opening(opening)?;
        if let Height::Finite(h) = height {
            check_height(h)?;
        }
        Ok(FiniteCone {
            vertex,
            axis,
            opening,
            height,
            cos_half: half_opening_cos(opening),
        })
    }

    pub fn vertex(&self) -> Point {
        self.vertex
    }

    pub fn axis(&self) -> UnitVector {
        self.axis
    }

    pub fn opening(&self) -> f64 {
        self.opening
    }

    pub fn height(&self) -> Height {
        self.height
    }

    #[inline]
    pub fn contains(&self, p: Point) -> bool {
        let dx = p.x - self.vertex.x;
        let dy = p.y - self.vertex.y;
        let d2 = dx * dx + dy * dy;
        if d2 <= 0.0 {
            return false;
        }
        if let Height::Finite(h) = self.height {
            if d2 >= h * h {
                return false;
            }
        }
        self.axis.ux * dx + self.axis.uy * dy > self.cos_half * d2.sqrt()
    }
}

/// `cos(opening / 2)`, pinned to zero for half-plane cones.
#[inline]
pub(crate) fn half_opening_cos(opening: f64) -> f64 {
    if opening >= PI {
        0.0
    } else {
        (opening / 2.0).cos()
    }
}

pub(crate) fn check_opening(rho: f64) -> Result<(), GeomError> {
    if rho.is_finite() && rho > 0.0 && rho <= PI {
        Ok(())
    } else {
        Err(GeomError::Opening(rho))
    }
}

pub(crate) fn check_height(h: f64) -> Result<(), GeomError> {
    if h.is_finite() && h > 0.0 {
        Ok(())
    } else {
        Err(GeomError::Height(h))
    }
}

/// Circular pie slice: directions from `start_angle` counterclockwise
/// through `span`, radius `radius`. Open in radius, closed in angle,
/// vertex excluded. A span of 2pi makes a punctured disk.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sector {
    vertex: Point,
    start_angle: f64,
    span: f64,
    radius: f64,
    start: UnitVector,
    end: UnitVector,
}

impl Sector {
    pub fn new(vertex: Point, start_angle: f64, span: f64, radius: f64) -> Result<Self, GeomError> {
        Point::try_new(vertex.x, vertex.y)?;
        if !(span.is_finite() && (0.0..=TAU).contains(&span)) {
            return Err(GeomError::Span(span));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(GeomError::Radius(radius));
        }
        let start_angle = normalize_angle(start_angle);
        Ok(Sector {
            vertex,
            start_angle,
            span,
            radius,
            start: UnitVector::from_angle(start_angle),
            end: UnitVector::from_angle(start_angle + span),
        })
    }

    /// Full punctured disk `B(center, radius) \ {center}`.
    pub fn disk(center: Point, radius: f64) -> Result<Self, GeomError> {
        Sector::new(center, 0.0, TAU, radius)
    }

    pub fn vertex(&self) -> Point {
        self.vertex
    }

    pub fn start_angle(&self) -> f64 {
        self.start_angle
    }

    pub fn span(&self) -> f64 {
        self.span
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn start_dir(&self) -> UnitVector {
        self.start
    }

    pub fn end_dir(&self) -> UnitVector {
        self.end
    }

    pub fn area(&self) -> f64 {
        0.5 * self.span * self.radius * self.radius
    }

    /// Membership by half-plane tests against the stored edge directions.
    #[inline]
    pub fn contains(&self, p: Point) -> bool {
        let dx = p.x - self.vertex.x;
        let dy = p.y - self.vertex.y;
        let d2 = dx * dx + dy * dy;
        if d2 <= 0.0 || d2 >= self.radius * self.radius {
            return false;
        }
        self.contains_offset(dx, dy)
    }

    #[inline]
    fn contains_offset(&self, dx: f64, dy: f64) -> bool {
        if self.span >= TAU {
            return true;
        }
        let c_start = self.start.ux * dy - self.start.uy * dx;
        let c_end = dx * self.end.uy - dy * self.end.ux;
        if self.span == 0.0 {
            return c_start == 0.0 && self.start.ux * dx + self.start.uy * dy > 0.0;
        }
        if self.span <= PI {
            c_start >= 0.0 && c_end >= 0.0
        } else {
            c_start >= 0.0 || c_end >= 0.0
        }
    }

    /// Membership by explicit angle evaluation; agrees with [`contains`]
    /// away from the edge rays.
    ///
    /// [`contains`]: Sector::contains
    pub fn contains_by_angle(&self, p: Point) -> bool {
        let d2 = self.vertex.dist2(p);
        if d2 <= 0.0 || d2 >= self.radius * self.radius {
            return false;
        }
        let Some(dir) = UnitVector::between(self.vertex, p) else {
            return false;
        };
        let mut a = signed_angle(self.start, dir);
        if a < 0.0 {
            a += TAU;
        }
        a <= self.span
    }

    /// Tight axis-aligned box `(xmin, xmax, ymin, ymax)`.
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        let v = self.vertex;
        let r = self.radius;
        let (ex0, ey0) = (v.x + r * self.start.ux, v.y + r * self.start.uy);
        let (ex1, ey1) = (v.x + r * self.end.ux, v.y + r * self.end.uy);
        let mut xmin = v.x.min(ex0).min(ex1);
        let mut xmax = v.x.max(ex0).max(ex1);
        let mut ymin = v.y.min(ey0).min(ey1);
        let mut ymax = v.y.max(ey0).max(ey1);
        for (dx, dy) in [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)] {
            if self.contains_offset(dx, dy) {
                xmin = xmin.min(v.x + r * dx);
                xmax = xmax.max(v.x + r * dx);
                ymin = ymin.min(v.y + r * dy);
                ymax = ymax.max(v.y + r * dy);
            }
        }
        (xmin, xmax, ymin, ymax)
    }
}

/// Quantities derived from a cone parameter pair `(rho, h)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DerivedParams {
    /// Opening of the smaller cones guaranteed by parameter monotonicity.
    pub rho_prime: f64,
    pub h_prime: f64,
    /// Opening used by the unavoidable-family construction; equals `rho_prime`.
    pub gamma: f64,
    pub h_one: f64,
    /// Boundary-rate constant `3 + 2 / sin(rho / 2)`.
    pub k_const: f64,
}

pub fn derived_params(rho: f64, h: f64) -> Result<DerivedParams, GeomError> {
    check_opening(rho)?;
    check_height(h)?;
    let gamma = if rho <= FRAC_PI_3 { rho } else { (PI - rho) / 2.0 };
    let half_sin = (rho / 2.0).sin();
    let h_one = h / 2.0 * half_sin;
    Ok(DerivedParams {
        rho_prime: gamma,
        h_prime: h_one,
        gamma,
        h_one,
        k_const: 3.0 + 2.0 / half_sin,
    })
}
