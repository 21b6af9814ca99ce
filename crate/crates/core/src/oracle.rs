//! Brute-force certificates for hull membership and empirical checks of
//! unavoidable cone families.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::eraser::Sample;
use crate::geom::{derived_params, normalize_angle, FiniteCone, GeomError, Height, Point, UnitVector};

/// Quasi-random points tested per family member in containment checks.
pub const CONTAINMENT_POINTS: usize = 1000;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("vertex grid step must be positive and finite, got {0}")]
    Step(f64),
    #[error("axis count must be at least 8, got {0}")]
    AxisCount(usize),
    #[error("trials must be at least 1")]
    Trials,
    #[error("opening {rho} gives a zero-width covering angle; no finite family exists")]
    Degenerate { rho: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum SeparationCertificate {
    /// A cone containing the query and no sample point.
    Found(FiniteCone),
    /// Nothing found at this granularity. Proves nothing.
    NoneFound { step: f64, axis_count: usize },
}

impl SeparationCertificate {
    pub fn is_found(&self) -> bool {
        matches!(self, SeparationCertificate::Found(_))
    }
}

/// True when some sorted angle in `[0, 2pi)` falls in the arc starting at
/// `start` with length `width`.
fn any_in_arc(sorted: &[f64], start: f64, width: f64) -> bool {
    let lo = normalize_angle(start);
    let hi = lo + width;
    let hits = |a: f64, b: f64| {
        let i = sorted.partition_point(|&t| t < a);
        i < sorted.len() && sorted[i] <= b
    };
    if hi < TAU {
        hits(lo, hi)
    } else {
        hits(lo, TAU) || hits(0.0, hi - TAU)
    }
}

/// Searches for a cone of opening `rho` and height `h` that contains `query`
/// and misses every sample point.
///
/// Vertices lie on the lattice `query + step * (i, j)` within distance `h`,
/// visited by increasing distance; axes are `2 pi j / axis_count`.
pub fn separation_oracle(
    sample: &Sample,
    query: Point,
    rho: f64,
    h: f64,
    step: f64,
    axis_count: usize,
) -> Result<SeparationCertificate, OracleError> {
    crate::geom::check_opening(rho)?;
    crate::geom::check_height(h)?;
    if !(step.is_finite() && step > 0.0) {
        return Err(OracleError::Step(step));
    }
    if axis_count < 8 {
        return Err(OracleError::AxisCount(axis_count));
    }
    let reach = (h / step).floor() as i64;
    let mut offsets: Vec<(i64, i64)> = Vec::new();
    for i in -reach..=reach {
        for j in -reach..=reach {
            if (i, j) != (0, 0) && Point::new(0.0, 0.0).dist(Point::new(i as f64 * step, j as f64 * step)) < h {
                offsets.push((i, j));
            }
        }
    }
    offsets.sort_by_key(|&(i, j)| (i * i + j * j, i, j));

    let points = sample.points();
    let h2 = h * h;
    // Slack so the angular prefilter never rejects a cone the exact test
    // would accept.
    let slack = 1e-9;
    let mut near = Vec::new();
    let mut angles = Vec::new();
    for (i, j) in offsets {
        let vertex = Point::new(query.x + i as f64 * step, query.y + j as f64 * step);
        near.clear();
        angles.clear();
        for &p in points {
            let d2 = vertex.dist2(p);
            if d2 < h2 && d2 > 0.0 {
                near.push(p);
                angles.push(normalize_angle((p.y - vertex.y).atan2(p.x - vertex.x)));
            }
        }
        angles.sort_by(f64::total_cmp);
        let to_query = normalize_angle((query.y - vertex.y).atan2(query.x - vertex.x));
        for a in 0..axis_count {
            let axis_angle = TAU * a as f64 / axis_count as f64;
            let off = normalize_angle(to_query - axis_angle);
            if off.min(TAU - off) > rho / 2.0 + slack {
                continue;
            }
            if any_in_arc(&angles, axis_angle - rho / 2.0 + slack, rho - 2.0 * slack) {
                continue;
            }
            let cone = FiniteCone::new(vertex, UnitVector::from_angle(axis_angle), rho, Height::Finite(h))?;
            if cone.contains(query) && !near.iter().any(|&p| cone.contains(p)) {
                return Ok(SeparationCertificate::Found(cone));
            }
        }
    }
    Ok(SeparationCertificate::NoneFound { step, axis_count })
}

/// Equally spaced cones at a common vertex covering a small disk.
#[derive(Clone, Debug, PartialEq)]
pub struct UnavoidableFamily {
    center: Point,
    rho: f64,
    h: f64,
    gamma: f64,
    h_one: f64,
    members: Vec<FiniteCone>,
}

impl UnavoidableFamily {
    pub fn center(&self) -> Point {
        self.center
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn h_one(&self) -> f64 {
        self.h_one
    }

    pub fn members(&self) -> &[FiniteCone] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Membership in the union of the closed members.
    pub fn covers(&self, p: Point) -> bool {
        let d = p.dist(self.center);
        if d > self.h_one {
            return false;
        }
        if d == 0.0 {
            return true;
        }
        let dir = (p.y - self.center.y).atan2(p.x - self.center.x);
        self.members.iter().any(|m| {
            let off = normalize_angle(dir - m.axis().angle());
            off.min(TAU - off) <= self.gamma / 4.0
        })
    }
}

/// Builds `ceil(4 pi / gamma)` cones of opening `gamma / 2` and height `h1`
/// with vertex `x` and axes at `2 pi j / k`.
pub fn build_unavoidable_family(x: Point, rho: f64, h: f64) -> Result<UnavoidableFamily, OracleError> {
    let params = derived_params(rho, h)?;
    let gamma = params.gamma;
    if gamma <= 0.0 {
        return Err(OracleError::Degenerate { rho });
    }
    let k = (4.0 * PI / gamma).ceil() as usize;
    let members = (0..k)
        .map(|j| FiniteCone::new(x, UnitVector::from_angle(TAU * j as f64 / k as f64), gamma / 2.0, Height::Finite(params.h_one)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(UnavoidableFamily { center: x, rho, h, gamma, h_one: params.h_one, members })
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base) as f64 * inv;
        i /= base;
        inv /= base as f64;
    }
    out
}

/// First `count` points of the two-dimensional Halton sequence (bases 2, 3),
/// starting at index 1 so every coordinate lies strictly inside `(0, 1)`.
pub fn halton_2d(count: usize) -> Vec<(f64, f64)> {
    (1..=count as u64).map(|i| (radical_inverse(i, 2), radical_inverse(i, 3))).collect()
}

/// Quasi-random interior points of a cone.
pub fn cone_test_points(cone: &FiniteCone, unit: &[(f64, f64)]) -> Vec<Point> {
    let h = cone.height().resolve(f64::NAN);
    let half = cone.opening() / 2.0;
    let base = cone.axis().angle();
    unit.iter()
        .map(|&(u, v)| {
            let r = h * u.sqrt();
            let a = base + (2.0 * v - 1.0) * half;
            cone.vertex().offset(UnitVector::from_angle(a), r)
        })
        .collect()
}

/// Draws a cone of opening `rho` and height `h` containing `x`, with `x`
/// uniformly placed in it.
pub fn random_cone_containing<R: Rng + ?Sized>(x: Point, rho: f64, h: f64, rng: &mut R) -> Result<FiniteCone, OracleError> {
    loop {
        let axis = rng.random::<f64>() * TAU;
        let r = h * rng.random::<f64>().sqrt();
        let off = (2.0 * rng.random::<f64>() - 1.0) * rho / 2.0;
        let dir = axis + off;
        let vertex = x.offset(UnitVector::from_angle(dir), -r);
        let cone = FiniteCone::new(vertex, UnitVector::from_angle(axis), rho, Height::Finite(h))?;
        // Rounding can push x onto the boundary; redraw.
        if cone.contains(x) {
            return Ok(cone);
        }
    }
}

/// Index of the first member whose test points all lie in `cone`.
pub fn contained_member(family: &UnavoidableFamily, cone: &FiniteCone, unit: &[(f64, f64)]) -> Option<usize> {
    family
        .members
        .iter()
        .position(|m| cone_test_points(m, unit).iter().all(|&p| cone.contains(p)))
}

/// Fraction of random cones containing the family's centre that contain
/// some family member.
pub fn check_unavoidability<R: Rng + ?Sized>(
    family: &UnavoidableFamily,
    trials: usize,
    rng: &mut R,
) -> Result<f64, OracleError> {
    if trials == 0 {
        return Err(OracleError::Trials);
    }
    let cones = (0..trials)
        .map(|_| random_cone_containing(family.center, family.rho, family.h, rng))
        .collect::<Result<Vec<_>, _>>()?;
    let unit = halton_2d(CONTAINMENT_POINTS);
    let hits = cones.par_iter().filter(|c| contained_member(family, c, &unit).is_some()).count();
    Ok(hits as f64 / trials as f64)
}
