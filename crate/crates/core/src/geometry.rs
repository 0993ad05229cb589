//! Covering and packing numbers, neighborhood volumes, Minkowski-content
//! estimates and the corner masses `mu(E_x)`.

use rayon::prelude::*;
use thiserror::Error;

use crate::measures::AtomicMeasure;
use crate::numeric::pairwise_sum;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("point {0} has a non-finite coordinate")]
    NonFinite(usize),
    #[error("coordinate count {len} is not a multiple of dimension {dim}")]
    Ragged { len: usize, dim: usize },
    #[error("dimension {0} is not supported here (only 1 and 2)")]
    UnsupportedDimension(usize),
    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(f64),
    #[error("grid resolution {grid_res} is too coarse for epsilon {epsilon} (need <= epsilon/4)")]
    ResolutionTooCoarse { grid_res: f64, epsilon: f64 },
    #[error("epsilon {epsilon} is below the cloud resolution {resolution}")]
    EpsilonBelowResolution { epsilon: f64, resolution: f64 },
    #[error("epsilons must be strictly decreasing")]
    EpsilonsNotDecreasing,
    #[error("exponent {alpha} is outside [0, {n}]")]
    InvalidAlpha { alpha: f64, n: usize },
    #[error("measure must have real nonnegative weights")]
    NotPositive,
    #[error("query point has dimension {got}, measure has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, GeometryError>;

/// Finite point set standing in for a bounded subset of `R^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    points: Vec<f64>,
}

impl PointCloud {
    pub fn new(dim: usize, points: Vec<f64>) -> Result<Self> {
        if dim == 0 || !points.len().is_multiple_of(dim) {
            return Err(GeometryError::Ragged { len: points.len(), dim });
        }
        if points.is_empty() {
            return Err(GeometryError::EmptyCloud);
        }
        if let Some(i) = points.iter().position(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite(i / dim));
        }
        Ok(Self { dim, points })
    }

    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        if points.is_empty() {
            return Err(GeometryError::EmptyCloud);
        }
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(GeometryError::Ragged { len: p.len(), dim });
        }
        Self::new(dim, points.concat())
    }

    /// Atom locations of a measure.
    pub fn from_measure(measure: &AtomicMeasure) -> Result<Self> {
        Self::new(measure.dim(), measure.locations().to_vec())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { dim: self.dim, points: self.points.iter().map(|v| v * factor).collect() }
    }

    /// Smallest positive distance between two points; zero for a single point
    /// or a cloud of coincident points.
    pub fn resolution(&self) -> f64 {
        let n = self.len();
        if n < 2 {
            return 0.0;
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| self.point(a)[0].total_cmp(&self.point(b)[0]));
        let mut best = f64::INFINITY;
        for (pos, &i) in order.iter().enumerate() {
            let pi = self.point(i);
            for &j in &order[pos + 1..] {
                let pj = self.point(j);
                if pj[0] - pi[0] >= best {
                    break;
                }
                let d = dist(pi, pj);
                if d > 0.0 && d < best {
                    best = d;
                }
            }
        }
        if best.is_finite() {
            best
        } else {
            0.0
        }
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(GeometryError::NonPositiveEpsilon(epsilon))
    }
}

/// Total length of the union of open intervals `(c - r, c + r)`.
fn union_length(centers: &[f64], half_widths: &[f64]) -> f64 {
    let mut intervals: Vec<(f64, f64)> = centers
        .iter()
        .zip(half_widths)
        .map(|(c, r)| (c - r, c + r))
        .collect();
    intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut pieces = Vec::new();
    let mut iter = intervals.into_iter();
    let Some((mut lo, mut hi)) = iter.next() else {
        return 0.0;
    };
    for (a, b) in iter {
        if a <= hi {
            hi = hi.max(b);
        } else {
            pieces.push(hi - lo);
            lo = a;
            hi = b;
        }
    }
    pieces.push(hi - lo);
    pieces.iter().sum()
}

/// Lebesgue measure of `A(eps) = {x : dist(x, A) < eps}`.
///
/// Exact in both supported dimensions: interval merging on the line, and in
/// the plane the boundary of the disc union integrated arc by arc (Green's
/// theorem). `grid_res` is validated against the resolution rule but the
/// result does not depend on it.
pub fn neighborhood_volume(cloud: &PointCloud, epsilon: f64, grid_res: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    if !(grid_res > 0.0 && grid_res <= epsilon / 4.0) {
        return Err(GeometryError::ResolutionTooCoarse { grid_res, epsilon });
    }
    match cloud.dim {
        1 => {
            let mut xs = cloud.points.clone();
            xs.sort_by(f64::total_cmp);
            Ok(union_length(&xs, &vec![epsilon; xs.len()]))
        }
        2 => Ok(disc_union_area(cloud, epsilon)),
        n => Err(GeometryError::UnsupportedDimension(n)),
    }
}

/// Merged sub-intervals of `[-pi, pi]` covered by the given arcs.
fn covered_arcs(mut arcs: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    arcs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(arcs.len());
    for (a, b) in arcs {
        match merged.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => merged.push((a, b)),
        }
    }
    merged
}

fn disc_union_area(cloud: &PointCloud, r: f64) -> f64 {
    use std::collections::HashMap;
    use std::f64::consts::PI;

    let mut pts: Vec<(f64, f64)> = cloud.points.chunks_exact(2).map(|p| (p[0], p[1])).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup();
    // centring keeps the arc terms r * |c| small relative to r^2
    let count = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / count;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / count;
    let pts: Vec<(f64, f64)> = pts.iter().map(|p| (p.0 - mx, p.1 - my)).collect();

    let cell = 2.0 * r;
    let key = |p: (f64, f64)| ((p.0 / cell).floor() as i64, (p.1 / cell).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, p) in pts.iter().enumerate() {
        grid.entry(key(*p)).or_default().push(i);
    }

    let terms: Vec<f64> = (0..pts.len())
        .into_par_iter()
        .map(|i| {
            let (cx, cy) = pts[i];
            let (gx, gy) = key(pts[i]);
            let mut arcs = Vec::new();
            for dx in -1..=1 {
                for dy in -1..=1 {
                    let Some(bucket) = grid.get(&(gx + dx, gy + dy)) else { continue };
                    for &j in bucket {
                        let (ox, oy) = (pts[j].0 - cx, pts[j].1 - cy);
                        let d = ox.hypot(oy);
                        if j == i || d >= cell {
                            continue;
                        }
                        let mid = oy.atan2(ox);
                        let half = (d / cell).acos();
                        let (a, b) = (mid - half, mid + half);
                        if a < -PI {
                            arcs.push((a + 2.0 * PI, PI));
                            arcs.push((-PI, b));
                        } else if b > PI {
                            arcs.push((a, PI));
                            arcs.push((-PI, b - 2.0 * PI));
                        } else {
                            arcs.push((a, b));
                        }
                    }
                }
            }
            // integrate (x dy - y dx) / 2 over the uncovered arcs
            let arc = |a: f64, b: f64| 0.5 * (r * r * (b - a) + r * (cx * (b.sin() - a.sin()) - cy * (b.cos() - a.cos())));
            let mut total = 0.0;
            let mut from = -PI;
            for (a, b) in covered_arcs(arcs) {
                if a > from {
                    total += arc(from, a);
                }
                from = from.max(b);
            }
            if from < PI {
                total += arc(from, PI);
            }
            total
        })
        .collect();
    pairwise_sum(&terms)
}

/// Farthest-point traversal started at point 0, in visit order. The next point
/// is the one farthest from all chosen points; the walk stops as soon as
/// `keep` rejects that distance.
fn farthest_point_traversal(cloud: &PointCloud, keep: impl Fn(f64) -> bool) -> Vec<usize> {
    let n = cloud.len();
    let mut nearest = vec![f64::INFINITY; n];
    let mut chosen = vec![0usize];
    let mut last = 0usize;
    loop {
        let pl = cloud.point(last).to_vec();
        let mut best = (0usize, -1.0_f64);
        for (i, d) in nearest.iter_mut().enumerate() {
            let di = dist(cloud.point(i), &pl);
            if di < *d {
                *d = di;
            }
            if *d > best.1 {
                best = (i, *d);
            }
        }
        if !keep(best.1) {
            break;
        }
        chosen.push(best.0);
        last = best.0;
    }
    chosen
}

/// Centers of closed `epsilon`-balls covering the cloud.
///
/// Farthest-point traversal in any dimension; on the line the left-to-right
/// sweep (optimal for closed intervals) is used when it needs fewer balls.
pub fn covering(cloud: &PointCloud, epsilon: f64) -> Result<Vec<Vec<f64>>> {
    check_epsilon(epsilon)?;
    let greedy: Vec<Vec<f64>> = farthest_point_traversal(cloud, |d| d > epsilon)
        .into_iter()
        .map(|i| cloud.point(i).to_vec())
        .collect();
    if cloud.dim == 1 {
        let mut xs = cloud.points.clone();
        xs.sort_by(f64::total_cmp);
        let mut centers = Vec::new();
        let mut reach = f64::NEG_INFINITY;
        for x in xs {
            if x > reach {
                centers.push(vec![x + epsilon]);
                reach = x + 2.0 * epsilon;
            }
        }
        if centers.len() < greedy.len() {
            return Ok(centers);
        }
    }
    Ok(greedy)
}

/// Greedy covering number: an upper bound on `N(A, epsilon)`.
pub fn covering_number(cloud: &PointCloud, epsilon: f64) -> Result<usize> {
    covering(cloud, epsilon).map(|c| c.len())
}

/// Indices of a maximal family of points pairwise at least `2 epsilon` apart,
/// so the open `epsilon`-balls around them are disjoint.
pub fn packing(cloud: &PointCloud, epsilon: f64) -> Result<Vec<usize>> {
    check_epsilon(epsilon)?;
    Ok(farthest_point_traversal(cloud, |d| d >= 2.0 * epsilon))
}

/// Greedy packing number: a lower bound on `P(A, epsilon)`.
pub fn packing_number(cloud: &PointCloud, epsilon: f64) -> Result<usize> {
    packing(cloud, epsilon).map(|p| p.len())
}

/// Volume of the unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(n - 2) * 2.0 * std::f64::consts::PI / n as f64,
    }
}

/// Finite-scale Minkowski-content samples and their tail band.
#[derive(Debug, Clone, PartialEq)]
pub struct ContentEstimate {
    pub epsilons: Vec<f64>,
    /// `(2 eps)^(alpha - n) |A(eps)|` per epsilon.
    pub values: Vec<f64>,
    pub upper_est: f64,
    pub lower_est: f64,
}

/// Grid resolution used for content estimates, relative to epsilon.
pub const CONTENT_GRID_FRACTION: f64 = 1.0 / 16.0;

/// `(2 eps)^(alpha - n) |A(eps)|` over a decreasing epsilon list; the upper and
/// lower estimates are the max and min over the last quarter of the list.
pub fn minkowski_content(cloud: &PointCloud, alpha: f64, epsilons: &[f64]) -> Result<ContentEstimate> {
    let n = cloud.dim;
    if !(alpha >= 0.0 && alpha <= n as f64) {
        return Err(GeometryError::InvalidAlpha { alpha, n });
    }
    if epsilons.is_empty() {
        return Err(GeometryError::EpsilonsNotDecreasing);
    }
    if epsilons.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(GeometryError::EpsilonsNotDecreasing);
    }
    for &e in epsilons {
        check_epsilon(e)?;
    }
    let resolution = cloud.resolution();
    if let Some(&e) = epsilons.iter().find(|&&e| e <= resolution) {
        return Err(GeometryError::EpsilonBelowResolution { epsilon: e, resolution });
    }
    let values = epsilons
        .par_iter()
        .map(|&e| {
            let vol = neighborhood_volume(cloud, e, e * CONTENT_GRID_FRACTION)?;
            Ok((2.0 * e).powf(alpha - n as f64) * vol)
        })
        .collect::<Result<Vec<f64>>>()?;
    let tail = values.len().div_ceil(4).max(1);
    let window = &values[values.len() - tail..];
    let upper_est = window.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lower_est = window.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ContentEstimate { epsilons: epsilons.to_vec(), values, upper_est, lower_est })
}

fn real_masses(measure: &AtomicMeasure) -> Result<Vec<f64>> {
    if !measure.is_positive() {
        return Err(GeometryError::NotPositive);
    }
    Ok(measure.weights().iter().map(|w| w.re).collect())
}

/// `mu(E_x)`: total weight of atoms `a` with `a_j <= x_j` for every `j`.
pub fn truncation_mass(measure: &AtomicMeasure, x: &[f64]) -> Result<f64> {
    if x.len() != measure.dim() {
        return Err(GeometryError::DimensionMismatch { expected: measure.dim(), got: x.len() });
    }
    let masses = real_masses(measure)?;
    Ok((0..measure.len())
        .filter(|&i| measure.location(i).iter().zip(x).all(|(a, b)| a <= b))
        .map(|i| masses[i])
        .sum())
}

/// `mu(E_a)` at every atom `a` of the measure, in atom order.
pub fn truncation_masses_at_atoms(measure: &AtomicMeasure) -> Result<Vec<f64>> {
    let masses = real_masses(measure)?;
    let n = measure.len();
    match measure.dim() {
        1 => {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| measure.location(a)[0].total_cmp(&measure.location(b)[0]));
            let mut out = vec![0.0; n];
            let mut acc = 0.0;
            let mut start = 0;
            while start < n {
                let x = measure.location(order[start])[0];
                let mut end = start;
                while end < n && measure.location(order[end])[0] == x {
                    acc += masses[order[end]];
                    end += 1;
                }
                for &i in &order[start..end] {
                    out[i] = acc;
                }
                start = end;
            }
            Ok(out)
        }
        2 => Ok(dominance_sums_2d(measure, &masses)),
        _ => Ok((0..n)
            .into_par_iter()
            .map(|i| {
                let xi = measure.location(i);
                (0..n)
                    .filter(|&j| measure.location(j).iter().zip(xi).all(|(a, b)| a <= b))
                    .map(|j| masses[j])
                    .sum()
            })
            .collect()),
    }
}

/// Sweep in x with a Fenwick tree over y ranks.
fn dominance_sums_2d(measure: &AtomicMeasure, masses: &[f64]) -> Vec<f64> {
    let n = measure.len();
    let mut ys: Vec<f64> = (0..n).map(|i| measure.location(i)[1]).collect();
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    let rank = |y: f64| ys.partition_point(|&v| v < y);
    let mut tree = vec![0.0; ys.len() + 1];
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| measure.location(a)[0].total_cmp(&measure.location(b)[0]));
    let mut out = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let x = measure.location(order[start])[0];
        let mut end = start;
        while end < n && measure.location(order[end])[0] == x {
            end += 1;
        }
        for &i in &order[start..end] {
            let mut k = rank(measure.location(i)[1]) + 1;
            while k < tree.len() {
                tree[k] += masses[i];
                k += k & k.wrapping_neg();
            }
        }
        for &i in &order[start..end] {
            let mut k = rank(measure.location(i)[1]) + 1;
            let mut s = 0.0;
            while k > 0 {
                s += tree[k];
                k -= k & k.wrapping_neg();
            }
            out[i] = s;
        }
        start = end;
    }
    out
}

/// Ratio of estimated upper Minkowski content to mass for one grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellRatio {
    pub cell: Vec<usize>,
    pub mass: f64,
    pub upper_content: f64,
    pub ratio: f64,
}

/// Spot-check of "upper content of S is at most C mu(S)" over the cells of a
/// uniform `2^level` grid on the measure's bounding box. Cells are half-open
/// except on the upper face of the box.
pub fn cell_content_ratios(
    measure: &AtomicMeasure,
    alpha: f64,
    level: u32,
    epsilons: &[f64],
) -> Result<Vec<CellRatio>> {
    let masses = real_masses(measure)?;
    let n = measure.dim();
    if n > 2 {
        return Err(GeometryError::UnsupportedDimension(n));
    }
    let bbox = measure.bounding_box().ok_or(GeometryError::EmptyCloud)?;
    let per_axis = 1usize << level;
    let cell_of = |x: &[f64]| -> Vec<usize> {
        (0..n)
            .map(|k| {
                let width = bbox.hi()[k] - bbox.lo()[k];
                if width <= 0.0 {
                    return 0;
                }
                let t = (x[k] - bbox.lo()[k]) / width * per_axis as f64;
                (t.floor() as usize).min(per_axis - 1)
            })
            .collect()
    };
    let mut cells: std::collections::BTreeMap<Vec<usize>, (Vec<f64>, f64)> = Default::default();
    for i in 0..measure.len() {
        let entry = cells.entry(cell_of(measure.location(i))).or_default();
        entry.0.extend_from_slice(measure.location(i));
        entry.1 += masses[i];
    }
    cells
        .into_iter()
        .filter(|(_, (_, mass))| *mass > 0.0)
        .map(|(cell, (points, mass))| {
            let cloud = PointCloud::new(n, points)?;
            let est = minkowski_content(&cloud, alpha, epsilons)?;
            Ok(CellRatio { cell, mass, upper_content: est.upper_est, ratio: est.upper_est / mass })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{IfsMeasure, DEFAULT_ATOM_BUDGET};

    fn line(points: &[f64]) -> PointCloud {
        PointCloud::new(1, points.to_vec()).unwrap()
    }

    #[test]
    fn single_point_volume() {
        let v = neighborhood_volume(&line(&[0.3]), 0.1, 0.025).unwrap();
        assert!((v - 0.2).abs() < 1e-15);
    }

    #[test]
    fn disjoint_points_volume() {
        let v = neighborhood_volume(&line(&[0.0, 1.0]), 0.1, 0.025).unwrap();
        assert!((v - 0.4).abs() < 1e-15);
    }

    #[test]
    fn overlapping_intervals_merge() {
        let v = neighborhood_volume(&line(&[0.0, 0.1]), 0.1, 0.025).unwrap();
        assert!((v - 0.3).abs() < 1e-15);
    }

    #[test]
    fn cantor_cylinder_volume_is_exact() {
        for d in [3u32, 6, 9] {
            let mu = IfsMeasure::cantor().cylinder_approx(d, DEFAULT_ATOM_BUDGET).unwrap();
            let cloud = PointCloud::from_measure(&mu).unwrap();
            let eps = 3f64.powi(-(d as i32)) / 2.0;
            let v = neighborhood_volume(&cloud, eps, eps / 4.0).unwrap();
            let exact = 2f64.powi(d as i32) * 2.0 * eps;
            assert!((v - exact).abs() <= 1e-12 * exact, "depth {d}: {v} vs {exact}");
        }
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let err = neighborhood_volume(&line(&[0.0]), 0.1, 0.05).unwrap_err();
        assert!(matches!(err, GeometryError::ResolutionTooCoarse { .. }));
        let cloud = PointCloud::new(3, vec![0.0; 3]).unwrap();
        assert_eq!(
            neighborhood_volume(&cloud, 0.1, 0.01),
            Err(GeometryError::UnsupportedDimension(3))
        );
    }

    #[test]
    fn disc_and_lens_areas_are_exact() {
        let eps = 0.5;
        let one = PointCloud::new(2, vec![0.2, -0.4]).unwrap();
        let v = neighborhood_volume(&one, eps, eps / 4.0).unwrap();
        assert!((v - std::f64::consts::PI * eps * eps).abs() < 1e-15);
        // two discs at distance d overlap in a lens of area 2 r^2 acos(d/2r) - (d/2) sqrt(4r^2 - d^2)
        let d: f64 = 0.3;
        let two = PointCloud::new(2, vec![0.0, 0.0, d * 0.6, d * 0.8, 0.0, 0.0]).unwrap();
        let lens = 2.0 * eps * eps * (d / (2.0 * eps)).acos() - 0.5 * d * (4.0 * eps * eps - d * d).sqrt();
        let exact = 2.0 * std::f64::consts::PI * eps * eps - lens;
        assert!((neighborhood_volume(&two, eps, eps / 4.0).unwrap() - exact).abs() < 1e-14);
    }

    #[test]
    fn segment_tube_area() {
        let spacing = 1.0 / 2000.0;
        let pts: Vec<f64> = (0..=2000).flat_map(|i| [i as f64 * spacing, 0.0]).collect();
        let cloud = PointCloud::new(2, pts).unwrap();
        let eps = 0.05;
        let v = neighborhood_volume(&cloud, eps, eps / 32.0).unwrap();
        let tube = 2.0 * eps + std::f64::consts::PI * eps * eps;
        // the disc union misses scallops of sagitta spacing^2 / (8 eps) on both long sides
        let scallops = 2.0 * spacing * spacing / (8.0 * eps);
        assert!(v <= tube && tube - v <= scallops, "{v} {tube}");
    }

    #[test]
    fn single_point_counts() {
        for eps in [1e-3, 0.1, 10.0] {
            let c = line(&[0.5]);
            assert_eq!(covering_number(&c, eps).unwrap(), 1);
            assert_eq!(packing_number(&c, eps).unwrap(), 1);
        }
    }

    #[test]
    fn equispaced_unit_interval_needs_two_quarter_balls() {
        let pts: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        let cloud = line(&pts);
        let centers = covering(&cloud, 0.25).unwrap();
        assert_eq!(centers.len(), 2);
        // brute-force witness check
        for &x in &pts {
            assert!(centers.iter().any(|c| (c[0] - x).abs() <= 0.25 + 1e-12));
        }
    }

    #[test]
    fn packing_is_disjoint_and_maximal() {
        let pts: Vec<f64> = (0..50).map(|i| ((i * 37) % 50) as f64 * 0.013).collect();
        let cloud = line(&pts);
        let eps = 0.03;
        let pack = packing(&cloud, eps).unwrap();
        for (a, &i) in pack.iter().enumerate() {
            for &j in &pack[a + 1..] {
                assert!((pts[i] - pts[j]).abs() >= 2.0 * eps);
            }
        }
        for &x in &pts {
            assert!(pack.iter().any(|&i| (pts[i] - x).abs() < 2.0 * eps));
        }
    }

    #[test]
    fn unit_ball_volumes() {
        assert_eq!(unit_ball_volume(1), 2.0);
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-14);
    }

    #[test]
    fn single_point_content_at_zero_exponent() {
        let eps: Vec<f64> = (0..8).map(|j| 0.1 / 2f64.powi(j)).collect();
        let est = minkowski_content(&line(&[0.0]), 0.0, &eps).unwrap();
        for v in &est.values {
            assert!((v - 1.0).abs() < 1e-14);
        }
        assert!((est.upper_est - 1.0).abs() < 1e-14 && (est.lower_est - 1.0).abs() < 1e-14);
    }

    #[test]
    fn segment_content_in_the_plane() {
        let pts: Vec<f64> = (0..=4000).flat_map(|i| [i as f64 / 4000.0, 0.0]).collect();
        let cloud = PointCloud::new(2, pts).unwrap();
        let eps: Vec<f64> = (0..8).map(|j| 0.02 / 1.5f64.powi(j)).collect();
        let est = minkowski_content(&cloud, 1.0, &eps).unwrap();
        assert!((est.upper_est - 1.0).abs() < 0.05, "{}", est.upper_est);
        assert!(est.upper_est >= est.lower_est);
    }

    #[test]
    fn cantor_content_stays_bounded() {
        let mu = IfsMeasure::cantor().cylinder_approx(12, DEFAULT_ATOM_BUDGET).unwrap();
        let cloud = PointCloud::from_measure(&mu).unwrap();
        let alpha = 2f64.ln() / 3f64.ln();
        let eps: Vec<f64> = (0..=24).map(|j| 3f64.powf(-4.0 - j as f64 / 4.0)).collect();
        let est = minkowski_content(&cloud, alpha, &eps).unwrap();
        let max = est.values.iter().copied().fold(f64::MIN, f64::max);
        let min = est.values.iter().copied().fold(f64::MAX, f64::min);
        assert!(min > 0.0 && max / min <= 4.0, "{max} / {min}");
    }

    #[test]
    fn content_guards_resolution_and_order() {
        let cloud = line(&[0.0, 0.01, 0.02]);
        assert!(matches!(
            minkowski_content(&cloud, 0.5, &[0.1, 0.005]),
            Err(GeometryError::EpsilonBelowResolution { .. })
        ));
        assert_eq!(
            minkowski_content(&cloud, 0.5, &[0.1, 0.2]),
            Err(GeometryError::EpsilonsNotDecreasing)
        );
    }

    #[test]
    fn truncation_mass_examples() {
        let mu = IfsMeasure::cantor().cylinder_approx(2, DEFAULT_ATOM_BUDGET).unwrap();
        assert_eq!(truncation_mass(&mu, &[2.0]).unwrap(), 1.0);
        assert_eq!(truncation_mass(&mu, &[-0.1]).unwrap(), 0.0);
        assert_eq!(truncation_mass(&mu, &[1.0 / 3.0]).unwrap(), 0.5);
        let at = truncation_masses_at_atoms(&mu).unwrap();
        assert_eq!(at, vec![0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn truncation_requires_positive_weights() {
        let mu = AtomicMeasure::on_line(&[0.0, 1.0], &[1.0, -1.0]).unwrap();
        assert_eq!(truncation_mass(&mu, &[0.5]), Err(GeometryError::NotPositive));
    }

    #[test]
    fn batched_truncation_matches_pointwise_in_the_plane() {
        let locs: Vec<f64> = (0..200)
            .flat_map(|i| [((i * 7919) % 97) as f64 / 97.0, ((i * 104_729) % 89) as f64 / 89.0])
            .collect();
        let weights = (0..200).map(|i| num_complex::Complex64::new(1.0 + (i % 5) as f64, 0.0)).collect();
        let mu = AtomicMeasure::new(2, locs, weights).unwrap();
        let fast = truncation_masses_at_atoms(&mu).unwrap();
        for (i, v) in fast.iter().enumerate() {
            let slow = truncation_mass(&mu, mu.location(i)).unwrap();
            assert!((v - slow).abs() < 1e-12);
        }
    }

    #[test]
    fn cell_ratios_cover_all_mass() {
        let mu = IfsMeasure::cantor().cylinder_approx(8, DEFAULT_ATOM_BUDGET).unwrap();
        let alpha = 2f64.ln() / 3f64.ln();
        let eps: Vec<f64> = (0..5).map(|j| 3f64.powi(-3 - j)).collect();
        let cells = cell_content_ratios(&mu, alpha, 2, &eps).unwrap();
        let mass: f64 = cells.iter().map(|c| c.mass).sum();
        assert!((mass - 1.0).abs() < 1e-12);
        assert!(cells.iter().all(|c| c.ratio.is_finite() && c.ratio > 0.0));
    }
}
