//! Distances between finite point sets and between membership-defined sets.
//!
//! Set-level Hausdorff distances are computed between the centres of grid
//! cells classified inside each set, using an exact Euclidean distance
//! transform of the cell lattice. The error against the continuous sets is
//! bounded by one cell diagonal.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eraser::uniform_point;
use crate::geom::{Frame, Membership, Point};

/// Monte Carlo budget used for the measure error unless overridden.
pub const DEFAULT_MC_BUDGET: usize = 4000;

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("{0} point set is empty")]
    EmptyPointSet(&'static str),
    #[error("set {0} has no cell on the grid")]
    EmptyOnGrid(&'static str),
    #[error("set {0} has no boundary cell on the grid")]
    EmptyBoundary(&'static str),
    #[error("grid resolution must be at least 2, got {0}")]
    Resolution(usize),
    #[error("Monte Carlo budget must be at least 100, got {0}")]
    Budget(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub frame: Frame,
    pub resolution: usize,
}

impl GridSpec {
    pub fn new(frame: Frame, resolution: usize) -> Result<Self, MetricError> {
        if resolution < 2 {
            return Err(MetricError::Resolution(resolution));
        }
        Ok(GridSpec { frame, resolution })
    }

    pub fn cell_width(&self) -> f64 {
        self.frame.width() / self.resolution as f64
    }

    pub fn cell_height(&self) -> f64 {
        self.frame.height() / self.resolution as f64
    }

    pub fn cell_diagonal(&self) -> f64 {
        self.cell_width().hypot(self.cell_height())
    }

    pub fn center(&self, col: usize, row: usize) -> Point {
        Point::new(
            self.frame.xmin + (col as f64 + 0.5) * self.cell_width(),
            self.frame.ymin + (row as f64 + 0.5) * self.cell_height(),
        )
    }

    pub fn cells(&self) -> usize {
        self.resolution * self.resolution
    }
}

/// How far a reported value may sit from the quantity it estimates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Uncertainty {
    /// Monte Carlo standard error.
    StandardError(f64),
    /// Deterministic discretization bound (one cell diagonal).
    GridBound(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricEstimate {
    pub value: f64,
    pub uncertainty: Uncertainty,
    /// Points or cells used.
    pub budget: usize,
}

impl MetricEstimate {
    pub fn standard_error(&self) -> Option<f64> {
        match self.uncertainty {
            Uncertainty::StandardError(se) => Some(se),
            Uncertainty::GridBound(_) => None,
        }
    }
}

fn directed(from: &[Point], to: &[Point]) -> f64 {
    from.iter()
        .map(|a| to.iter().map(|b| a.dist2(*b)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
        .sqrt()
}

/// Exact Hausdorff distance between two finite point sets.
pub fn hausdorff_point_sets(a: &[Point], b: &[Point]) -> Result<f64, MetricError> {
    if a.is_empty() {
        return Err(MetricError::EmptyPointSet("first"));
    }
    if b.is_empty() {
        return Err(MetricError::EmptyPointSet("second"));
    }
    Ok(directed(a, b).max(directed(b, a)))
}

/// Exact distance from `p` to the nearest point of `set`.
pub fn dist_to_point_set(p: Point, set: &[Point]) -> Result<f64, MetricError> {
    if set.is_empty() {
        return Err(MetricError::EmptyPointSet("target"));
    }
    Ok(set.iter().map(|q| p.dist2(*q)).fold(f64::INFINITY, f64::min).sqrt())
}

/// Bucket grid over a point set for nearest-neighbour distance queries.
#[derive(Clone, Debug)]
pub struct PointIndex {
    points: Vec<Point>,
    origin: Point,
    cell: f64,
    cols: usize,
    rows: usize,
    starts: Vec<usize>,
    order: Vec<u32>,
}

impl PointIndex {
    pub fn new(points: &[Point]) -> Result<Self, MetricError> {
        if points.is_empty() {
            return Err(MetricError::EmptyPointSet("indexed"));
        }
        let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for p in points {
            xmin = xmin.min(p.x);
            xmax = xmax.max(p.x);
            ymin = ymin.min(p.y);
            ymax = ymax.max(p.y);
        }
        let span = (xmax - xmin).max(ymax - ymin).max(1e-12);
        // About two points per bucket.
        let per_axis = ((points.len() as f64 / 2.0).sqrt().ceil() as usize).clamp(1, 1024);
        let cell = span / per_axis as f64 * (1.0 + 1e-9);
        let cols = (((xmax - xmin) / cell) as usize + 1).max(1);
        let rows = (((ymax - ymin) / cell) as usize + 1).max(1);
        let origin = Point::new(xmin, ymin);
        let bucket = |p: &Point| {
            let c = (((p.x - origin.x) / cell) as usize).min(cols - 1);
            let r = (((p.y - origin.y) / cell) as usize).min(rows - 1);
            r * cols + c
        };
        let mut counts = vec![0usize; cols * rows + 1];
        for p in points {
            counts[bucket(p) + 1] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let mut fill = counts.clone();
        let mut order = vec![0u32; points.len()];
        for (i, p) in points.iter().enumerate() {
            let b = bucket(p);
            order[fill[b]] = i as u32;
            fill[b] += 1;
        }
        Ok(PointIndex { points: points.to_vec(), origin, cell, cols, rows, starts: counts, order })
    }

    /// Distance from `p` to the nearest indexed point.
    pub fn nearest_distance(&self, p: Point) -> f64 {
        let fc = ((p.x - self.origin.x) / self.cell).floor();
        let fr = ((p.y - self.origin.y) / self.cell).floor();
        let c0 = fc.clamp(0.0, (self.cols - 1) as f64) as i64;
        let r0 = fr.clamp(0.0, (self.rows - 1) as f64) as i64;
        // Distance from p to the clamped home cell, used to bound each ring.
        let outside = {
            let dx = (self.origin.x - p.x).max(p.x - (self.origin.x + self.cols as f64 * self.cell)).max(0.0);
            let dy = (self.origin.y - p.y).max(p.y - (self.origin.y + self.rows as f64 * self.cell)).max(0.0);
            dx.hypot(dy)
        };
        let mut best = f64::INFINITY;
        let max_ring = self.cols.max(self.rows) as i64;
        for ring in 0..=max_ring {
            // Any point in ring k or beyond is at least (k - 1) cells away
            // from p's (clamped) home cell.
            let lower = outside.max((ring as f64 - 1.0).max(0.0) * self.cell);
            if lower * lower > best {
                break;
            }
            for r in (r0 - ring)..=(r0 + ring) {
                if r < 0 || r >= self.rows as i64 {
                    continue;
                }
                let edge_row = r == r0 - ring || r == r0 + ring;
                let step = if edge_row || ring == 0 { 1 } else { (2 * ring) as usize };
                let mut c = c0 - ring;
                while c <= c0 + ring {
                    if c >= 0 && c < self.cols as i64 {
                        let b = r as usize * self.cols + c as usize;
                        for &i in &self.order[self.starts[b]..self.starts[b + 1]] {
                            best = best.min(p.dist2(self.points[i as usize]));
                        }
                    }
                    c += step as i64;
                }
            }
        }
        best.sqrt()
    }
}

/// Cell-centre classification, row-major (row 0 at `ymin`).
pub fn classify<M: Membership + ?Sized>(set: &M, grid: &GridSpec) -> Vec<bool> {
    let n = grid.resolution;
    let mut mask = vec![false; n * n];
    mask.par_chunks_mut(n).enumerate().for_each(|(row, cells)| {
        for (col, cell) in cells.iter_mut().enumerate() {
            *cell = set.contains(grid.center(col, row));
        }
    });
    mask
}

/// One-dimensional squared distance transform (lower envelope of parabolas)
/// with sample spacing `spacing`.
fn dt_1d(f: &[f64], spacing: f64, out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let s2 = spacing * spacing;
    let mut k = 0usize;
    let Some(q0) = f.iter().position(|v| v.is_finite()) else {
        out.iter_mut().for_each(|o| *o = f64::INFINITY);
        return;
    };
    v[0] = q0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in q0 + 1..n {
        if !f[q].is_finite() {
            continue;
        }
        loop {
            let p = v[k];
            let qf = q as f64;
            let pf = p as f64;
            let s = ((f[q] + s2 * qf * qf) - (f[p] + s2 * pf * pf)) / (2.0 * s2 * (qf - pf));
            if s <= z[k] {
                if k == 0 {
                    v[0] = q;
                    z[1] = f64::INFINITY;
                    break;
                }
                k -= 1;
                continue;
            }
            k += 1;
            v[k] = q;
            z[k] = s;
            z[k + 1] = f64::INFINITY;
            break;
        }
    }
    k = 0;
    for (q, slot) in out.iter_mut().enumerate().take(n) {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *slot = s2 * d * d + f[v[k]];
    }
}

/// Squared Euclidean distance from every cell centre to the nearest marked
/// cell centre.
pub fn distance_transform_sq(mask: &[bool], grid: &GridSpec) -> Vec<f64> {
    let n = grid.resolution;
    let (dx, dy) = (grid.cell_width(), grid.cell_height());
    let mut rows_pass = vec![0.0; n * n];
    rows_pass.par_chunks_mut(n).enumerate().for_each(|(row, out)| {
        let f: Vec<f64> = mask[row * n..(row + 1) * n]
            .iter()
            .map(|&m| if m { 0.0 } else { f64::INFINITY })
            .collect();
        let mut v = vec![0usize; n];
        let mut z = vec![0.0; n + 1];
        dt_1d(&f, dx, out, &mut v, &mut z);
    });
    let columns: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|col| {
            let f: Vec<f64> = (0..n).map(|row| rows_pass[row * n + col]).collect();
            let mut out = vec![0.0; n];
            let mut v = vec![0usize; n];
            let mut z = vec![0.0; n + 1];
            dt_1d(&f, dy, &mut out, &mut v, &mut z);
            out
        })
        .collect();
    let mut result = vec![0.0; n * n];
    for (col, values) in columns.iter().enumerate() {
        for (row, &d) in values.iter().enumerate() {
            result[row * n + col] = d;
        }
    }
    result
}

fn directed_masks(from: &[bool], to_dt: &[f64]) -> f64 {
    from.iter()
        .zip(to_dt)
        .filter(|(m, _)| **m)
        .map(|(_, d)| *d)
        .fold(0.0, f64::max)
        .sqrt()
}

/// Hausdorff distance between two sets of marked cells.
pub fn hausdorff_masks(a: &[bool], b: &[bool], grid: &GridSpec) -> f64 {
    let da = distance_transform_sq(a, grid);
    let db = distance_transform_sq(b, grid);
    directed_masks(a, &db).max(directed_masks(b, &da))
}

/// Grid estimate of the Hausdorff distance between two membership-defined
/// sets.
pub fn hausdorff_grid<A, B>(a: &A, b: &B, grid: &GridSpec) -> Result<MetricEstimate, MetricError>
where
    A: Membership + ?Sized,
    B: Membership + ?Sized,
{
    let ma = classify(a, grid);
    let mb = classify(b, grid);
    if !ma.contains(&true) {
        return Err(MetricError::EmptyOnGrid("A"));
    }
    if !mb.contains(&true) {
        return Err(MetricError::EmptyOnGrid("B"));
    }
    Ok(MetricEstimate {
        value: hausdorff_masks(&ma, &mb, grid),
        uncertainty: Uncertainty::GridBound(grid.cell_diagonal()),
        budget: grid.cells(),
    })
}

/// Inside cells with at least one 4-neighbour outside the set (cells on the
/// grid border count the off-grid side as outside).
pub fn boundary_cells(mask: &[bool], n: usize) -> Vec<bool> {
    let mut out = vec![false; n * n];
    for row in 0..n {
        for col in 0..n {
            let i = row * n + col;
            if !mask[i] {
                continue;
            }
            let outside = |r: i64, c: i64| r < 0 || c < 0 || r >= n as i64 || c >= n as i64 || !mask[r as usize * n + c as usize];
            let (r, c) = (row as i64, col as i64);
            out[i] = outside(r - 1, c) || outside(r + 1, c) || outside(r, c - 1) || outside(r, c + 1);
        }
    }
    out
}

/// Grid estimate of the Hausdorff distance between the boundaries of two
/// sets.
pub fn boundary_hausdorff_grid<A, B>(a: &A, b: &B, grid: &GridSpec) -> Result<MetricEstimate, MetricError>
where
    A: Membership + ?Sized,
    B: Membership + ?Sized,
{
    let n = grid.resolution;
    let ba = boundary_cells(&classify(a, grid), n);
    let bb = boundary_cells(&classify(b, grid), n);
    if !ba.contains(&true) {
        return Err(MetricError::EmptyBoundary("A"));
    }
    if !bb.contains(&true) {
        return Err(MetricError::EmptyBoundary("B"));
    }
    Ok(MetricEstimate {
        value: hausdorff_masks(&ba, &bb, grid),
        uncertainty: Uncertainty::GridBound(grid.cell_diagonal()),
        budget: grid.cells(),
    })
}

/// Largest distance from a grid cell of `set` to the nearest sample point:
/// the grid estimate of `d_H(sample, set)` for a sample drawn inside `set`.
pub fn set_to_sample_distance_grid<M: Membership + ?Sized>(
    set: &M,
    sample: &[Point],
    grid: &GridSpec,
) -> Result<MetricEstimate, MetricError> {
    let index = PointIndex::new(sample)?;
    let n = grid.resolution;
    let mask = classify(set, grid);
    if !mask.contains(&true) {
        return Err(MetricError::EmptyOnGrid("set"));
    }
    let value = (0..n)
        .into_par_iter()
        .map(|row| {
            (0..n)
                .filter(|&col| mask[row * n + col])
                .map(|col| index.nearest_distance(grid.center(col, row)))
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Ok(MetricEstimate { value, uncertainty: Uncertainty::GridBound(grid.cell_diagonal()), budget: grid.cells() })
}

/// Monte Carlo estimate of the measure of the symmetric difference of `a`
/// and `b` within `frame`.
pub fn measure_diff_mc<A, B, R>(a: &A, b: &B, frame: &Frame, n_mc: usize, rng: &mut R) -> Result<MetricEstimate, MetricError>
where
    A: Membership + ?Sized,
    B: Membership + ?Sized,
    R: Rng + ?Sized,
{
    if n_mc < 100 {
        return Err(MetricError::Budget(n_mc));
    }
    let mut disagree = 0usize;
    for _ in 0..n_mc {
        let p = uniform_point(frame, rng);
        if a.contains(p) != b.contains(p) {
            disagree += 1;
        }
    }
    let frac = disagree as f64 / n_mc as f64;
    let area = frame.area();
    Ok(MetricEstimate {
        value: area * frac,
        uncertainty: Uncertainty::StandardError(area * (frac * (1.0 - frac) / n_mc as f64).sqrt()),
        budget: n_mc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::table_one_set;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pts(v: &[(f64, f64)]) -> Vec<Point> {
        v.iter().map(|&(x, y)| Point::new(x, y)).collect()
    }

    fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<Point> {
        (0..n).map(|_| Point::new(rng.random_range(-1.0..2.0), rng.random_range(-1.0..2.0))).collect()
    }

    #[test]
    fn point_set_examples() {
        let a = pts(&[(0.0, 0.0), (1.0, 0.0)]);
        assert_eq!(hausdorff_point_sets(&a, &a).unwrap(), 0.0);
        assert_eq!(hausdorff_point_sets(&pts(&[(0.0, 0.0)]), &pts(&[(3.0, 4.0)])).unwrap(), 5.0);
        assert_eq!(hausdorff_point_sets(&a, &pts(&[(0.0, 0.0)])).unwrap(), 1.0);
        assert_eq!(hausdorff_point_sets(&[], &a), Err(MetricError::EmptyPointSet("first")));
        assert_eq!(hausdorff_point_sets(&a, &[]), Err(MetricError::EmptyPointSet("second")));
    }

    #[test]
    fn dist_examples() {
        let a = pts(&[(3.0, 4.0), (6.0, 8.0)]);
        assert_eq!(dist_to_point_set(Point::new(3.0, 4.0), &a).unwrap(), 0.0);
        assert_eq!(dist_to_point_set(Point::new(0.0, 0.0), &a).unwrap(), 5.0);
        assert!(dist_to_point_set(Point::new(0.0, 0.0), &[]).is_err());
    }

    #[test]
    fn index_matches_exhaustive_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let set = random_points(&mut rng, 10_000);
        let index = PointIndex::new(&set).unwrap();
        for _ in 0..2000 {
            let q = Point::new(rng.random_range(-3.0..4.0), rng.random_range(-3.0..4.0));
            assert_eq!(index.nearest_distance(q), dist_to_point_set(q, &set).unwrap());
        }
        let clustered: Vec<Point> = (0..50).map(|i| Point::new(0.5 + 1e-3 * i as f64, 0.5)).chain([Point::new(9.0, 9.0)]).collect();
        let index = PointIndex::new(&clustered).unwrap();
        for q in [Point::new(8.0, 8.5), Point::new(0.0, 0.0), Point::new(5.0, 5.0)] {
            assert_eq!(index.nearest_distance(q), dist_to_point_set(q, &clustered).unwrap());
        }
    }

    /// Brute-force squared distance transform.
    fn brute_dt(mask: &[bool], grid: &GridSpec) -> Vec<f64> {
        let n = grid.resolution;
        let marked: Vec<Point> = (0..n * n).filter(|&i| mask[i]).map(|i| grid.center(i % n, i / n)).collect();
        (0..n * n)
            .map(|i| {
                let c = grid.center(i % n, i / n);
                marked.iter().map(|m| c.dist2(*m)).fold(f64::INFINITY, f64::min)
            })
            .collect()
    }

    #[test]
    fn distance_transform_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let grid = GridSpec::new(Frame::new(0.0, 2.0, 0.0, 1.0).unwrap(), 23).unwrap();
        for density in [0.01, 0.1, 0.5] {
            let mask: Vec<bool> = (0..grid.cells()).map(|_| rng.random::<f64>() < density).collect();
            let fast = distance_transform_sq(&mask, &grid);
            let slow = brute_dt(&mask, &grid);
            for (f, s) in fast.iter().zip(&slow) {
                assert!((f - s).abs() <= 1e-12 * s.max(1.0), "{f} vs {s}");
            }
        }
    }

    fn square(x0: f64, x1: f64, y0: f64, y1: f64) -> impl Fn(Point) -> bool + Sync {
        move |p: Point| p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1
    }

    fn disk(r: f64) -> impl Fn(Point) -> bool + Sync {
        move |p: Point| p.x * p.x + p.y * p.y <= r * r
    }

    #[test]
    fn grid_hausdorff_examples() {
        let grid = GridSpec::new(Frame::new(-0.25, 1.75, -0.5, 1.5).unwrap(), 512).unwrap();
        let a = square(0.0, 1.0, 0.0, 1.0);
        let e = hausdorff_grid(&a, &a, &grid).unwrap();
        assert_eq!(e.value, 0.0);
        assert_eq!(e.uncertainty, Uncertainty::GridBound(grid.cell_diagonal()));
        let shifted = square(0.5, 1.5, 0.0, 1.0);
        let e = hausdorff_grid(&a, &shifted, &grid).unwrap();
        assert!((e.value - 0.5).abs() <= grid.cell_diagonal(), "{}", e.value);

        let grid = GridSpec::new(Frame::new(-0.5, 0.5, -0.5, 0.5).unwrap(), 512).unwrap();
        let e = hausdorff_grid(&disk(0.4), &disk(0.3), &grid).unwrap();
        assert!((e.value - 0.1).abs() <= grid.cell_diagonal(), "{}", e.value);

        let nothing = |_: Point| false;
        assert_eq!(hausdorff_grid(&a, &nothing, &grid), Err(MetricError::EmptyOnGrid("B")));
        assert_eq!(hausdorff_grid(&nothing, &a, &grid), Err(MetricError::EmptyOnGrid("A")));
    }

    #[test]
    fn grid_hausdorff_refinement() {
        let frame = Frame::new(-0.25, 1.75, -0.5, 1.5).unwrap();
        let a = square(0.0, 1.0, 0.0, 1.0);
        let b = square(0.5, 1.5, 0.0, 1.0);
        let coarse_grid = GridSpec::new(frame, 256).unwrap();
        let fine_grid = GridSpec::new(frame, 512).unwrap();
        let coarse = hausdorff_grid(&a, &b, &coarse_grid).unwrap();
        let fine = hausdorff_grid(&a, &b, &fine_grid).unwrap();
        assert!(fine_grid.cell_diagonal() <= coarse_grid.cell_diagonal());
        assert!((coarse.value - fine.value).abs() <= coarse_grid.cell_diagonal());
    }

    #[test]
    fn boundary_examples() {
        let grid = GridSpec::new(Frame::new(-0.2, 1.4, -0.3, 1.3).unwrap(), 512).unwrap();
        let a = square(0.0, 1.0, 0.0, 1.0);
        assert_eq!(boundary_hausdorff_grid(&a, &a, &grid).unwrap().value, 0.0);
        let wide = square(0.0, 1.2, 0.0, 1.0);
        let e = boundary_hausdorff_grid(&a, &wide, &grid).unwrap();
        assert!((e.value - 0.2).abs() <= grid.cell_diagonal(), "{}", e.value);

        let grid = GridSpec::new(Frame::new(-0.5, 0.5, -0.5, 0.5).unwrap(), 512).unwrap();
        let r = 0.45;
        let holed = move |p: Point| {
            let d2 = p.x * p.x + p.y * p.y;
            d2 <= r * r && d2 >= 0.04
        };
        let e = boundary_hausdorff_grid(&disk(r), &holed, &grid).unwrap();
        assert!((e.value - (r - 0.2)).abs() <= grid.cell_diagonal(), "{}", e.value);
        let nothing = |_: Point| false;
        assert_eq!(boundary_hausdorff_grid(&a, &nothing, &grid), Err(MetricError::EmptyBoundary("B")));
    }

    #[test]
    fn measure_examples() {
        let frame = Frame::unit_square();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sq = square(0.0, 1.0, 0.0, 1.0);
        let e = measure_diff_mc(&sq, &sq, &frame, 4000, &mut rng).unwrap();
        assert_eq!(e.value, 0.0);
        let none = |_: Point| false;
        let e = measure_diff_mc(&sq, &none, &frame, 4000, &mut rng).unwrap();
        assert_eq!(e.value, 1.0);
        assert_eq!(e.standard_error(), Some(0.0));
        assert_eq!(measure_diff_mc(&sq, &none, &frame, 99, &mut rng), Err(MetricError::Budget(99)));

        let s1 = table_one_set();
        let e = measure_diff_mc(&s1, &sq, &frame, 1_000_000, &mut rng).unwrap();
        let se = e.standard_error().unwrap();
        assert!((e.value - 2.0 / 3.0).abs() <= 3.0 * se, "{} +- {}", e.value, se);
    }

    #[test]
    fn measure_is_symmetric_for_a_fixed_stream() {
        let frame = Frame::unit_square();
        let s1 = table_one_set();
        let d = disk(0.7);
        let a = measure_diff_mc(&s1, &d, &frame, 10_000, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let b = measure_diff_mc(&d, &s1, &frame, 10_000, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn grid_agrees_with_point_sets_as_small_disks() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let grid = GridSpec::new(Frame::unit_square(), 256).unwrap();
        let radius = 0.02;
        let a: Vec<Point> = (0..15).map(|_| Point::new(rng.random_range(0.1..0.9), rng.random_range(0.1..0.9))).collect();
        let b: Vec<Point> = (0..15).map(|_| Point::new(rng.random_range(0.1..0.9), rng.random_range(0.1..0.9))).collect();
        let as_set = |set: Vec<Point>| move |p: Point| set.iter().any(|q| p.dist(*q) < radius);
        let exact = hausdorff_point_sets(&a, &b).unwrap();
        let gridded = hausdorff_grid(&as_set(a), &as_set(b), &grid).unwrap().value;
        assert!((exact - gridded).abs() <= grid.cell_diagonal() + radius, "{exact} vs {gridded}");
    }

    #[test]
    fn sample_to_set_distance() {
        let grid = GridSpec::new(Frame::unit_square(), 64).unwrap();
        let sq = square(0.0, 1.0, 0.0, 1.0);
        let sample = pts(&[(0.0, 0.0)]);
        let e = set_to_sample_distance_grid(&sq, &sample, &grid).unwrap();
        let far = grid.center(63, 63);
        assert_eq!(e.value, far.dist(Point::new(0.0, 0.0)));
    }

    #[test]
    fn triangle_inequality_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..10_000 {
            let sizes: Vec<usize> = (0..3).map(|_| rng.random_range(1..6)).collect();
            let a = random_points(&mut rng, sizes[0]);
            let b = random_points(&mut rng, sizes[1]);
            let c = random_points(&mut rng, sizes[2]);
            let ab = hausdorff_point_sets(&a, &b).unwrap();
            let bc = hausdorff_point_sets(&b, &c).unwrap();
            let ac = hausdorff_point_sets(&a, &c).unwrap();
            assert!(ac <= ab + bc + 1e-12);
            assert_eq!(ab, hausdorff_point_sets(&b, &a).unwrap());
        }
    }

    proptest! {
        #[test]
        fn hausdorff_symmetric(a in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..20),
                               b in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..20)) {
            let a = pts(&a);
            let b = pts(&b);
            prop_assert_eq!(hausdorff_point_sets(&a, &b).unwrap(), hausdorff_point_sets(&b, &a).unwrap());
            prop_assert_eq!(hausdorff_point_sets(&a, &a).unwrap(), 0.0);
        }
    }
}
