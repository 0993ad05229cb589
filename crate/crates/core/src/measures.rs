//! Self-similar measures generated by iterated function systems, and finite
//! atomic measures used to discretize them.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Default cap on the number of atoms a cylinder discretization may produce.
pub const DEFAULT_ATOM_BUDGET: usize = 1 << 24;

const ORTHOGONALITY_TOL: f64 = 1e-12;
const WEIGHT_SUM_TOL: f64 = 1e-12;
const MORAN_TOL: f64 = 1e-10;
const CHAOS_BURN_IN: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error("contraction ratio {0} is outside (0, 1)")]
    InvalidRatio(f64),
    #[error("rotation is not orthogonal (max |R^T R - I| = {0:e})")]
    NotOrthogonal(f64),
    #[error("expected {expected} components, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("an iterated function system needs at least two maps, got {0}")]
    TooFewMaps(usize),
    #[error("weight count {got} does not match map count {expected}")]
    WeightCount { expected: usize, got: usize },
    #[error("weights must be positive and sum to 1 (sum = {0})")]
    BadWeights(f64),
    #[error("similarity dimension {alpha} exceeds the ambient dimension {n}")]
    DimensionTooLarge { alpha: f64, n: usize },
    #[error("Moran residual {0:e} exceeds tolerance")]
    MoranResidual(f64),
    #[error("bounding box is not mapped into itself by map {0}")]
    BoxNotInvariant(usize),
    #[error("bounding box has lo > hi on axis {0}")]
    InvalidBox(usize),
    #[error("atom budget exceeded: depth {depth} needs {needed} atoms, cap is {cap}")]
    BudgetExceeded { depth: u32, needed: u128, cap: usize },
    #[error("atom {0} has a non-finite coordinate")]
    NonFiniteLocation(usize),
    #[error("atom {0} has a non-finite weight")]
    NonFiniteWeight(usize),
    #[error("density value {value} at atom {index} is not finite and nonnegative")]
    BadDensity { index: usize, value: f64 },
}

pub type Result<T> = std::result::Result<T, MeasureError>;

/// A contracting similarity `x -> ratio * R x + translation`.
#[derive(Debug, Clone, PartialEq)]
pub struct Similitude {
    ratio: f64,
    /// Row-major `n x n` orthogonal matrix.
    rotation: Vec<f64>,
    translation: Vec<f64>,
}

impl Similitude {
    pub fn new(ratio: f64, rotation: Vec<f64>, translation: Vec<f64>) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(MeasureError::InvalidRatio(ratio));
        }
        let n = translation.len();
        if n == 0 {
            return Err(MeasureError::ZeroDimension);
        }
        if rotation.len() != n * n {
            return Err(MeasureError::DimensionMismatch { expected: n * n, got: rotation.len() });
        }
        if let Some(i) = translation.iter().position(|v| !v.is_finite()) {
            return Err(MeasureError::NonFiniteLocation(i));
        }
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = (0..n).map(|k| rotation[k * n + i] * rotation[k * n + j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        if !(worst <= ORTHOGONALITY_TOL) {
            return Err(MeasureError::NotOrthogonal(worst));
        }
        Ok(Self { ratio, rotation, translation })
    }

    /// One-dimensional map `x -> ratio * x + shift`.
    pub fn line(ratio: f64, shift: f64) -> Result<Self> {
        Self::new(ratio, vec![1.0], vec![shift])
    }

    /// One-dimensional map `x -> -ratio * x + shift`.
    pub fn line_flipped(ratio: f64, shift: f64) -> Result<Self> {
        Self::new(ratio, vec![-1.0], vec![shift])
    }

    /// Planar map with counter-clockwise rotation by `angle` radians, optionally
    /// preceded by the reflection `(x, y) -> (x, -y)`.
    pub fn planar(ratio: f64, angle: f64, reflect: bool, shift: [f64; 2]) -> Result<Self> {
        let (s, c) = angle.sin_cos();
        let rotation = if reflect { vec![c, s, s, -c] } else { vec![c, -s, s, c] };
        Self::new(ratio, rotation, shift.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn rotation(&self) -> &[f64] {
        &self.rotation
    }

    pub fn translation(&self) -> &[f64] {
        &self.translation
    }

    /// `out = ratio * R x + translation`.
    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            let row = &self.rotation[i * n..(i + 1) * n];
            let rx: f64 = row.iter().zip(x).map(|(r, v)| r * v).sum();
            out[i] = self.ratio * rx + self.translation[i];
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.apply_into(x, &mut out);
        out
    }

    /// `out = ratio * R^T xi`: the frequency a measure pushed through this map sees.
    pub fn pull_frequency_into(&self, xi: &[f64], out: &mut [f64]) {
        let n = self.dim();
        for (j, o) in out.iter_mut().enumerate().take(n) {
            let col: f64 = (0..n).map(|i| self.rotation[i * n + j] * xi[i]).sum();
            *o = self.ratio * col;
        }
    }

    /// Unique fixed point, solving `(I - ratio R) x = translation`.
    pub fn fixed_point(&self) -> Vec<f64> {
        let n = self.dim();
        let mut a: Vec<f64> = (0..n * n)
            .map(|idx| {
                let (i, j) = (idx / n, idx % n);
                let id = if i == j { 1.0 } else { 0.0 };
                id - self.ratio * self.rotation[idx]
            })
            .collect();
        let mut b = self.translation.clone();
        // I - sR is invertible since |sR| < 1; partial pivoting for accuracy.
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&r, &s| a[r * n + col].abs().total_cmp(&a[s * n + col].abs()))
                .unwrap_or(col);
            if pivot != col {
                for k in 0..n {
                    a.swap(col * n + k, pivot * n + k);
                }
                b.swap(col, pivot);
            }
            let d = a[col * n + col];
            for row in col + 1..n {
                let f = a[row * n + col] / d;
                if f != 0.0 {
                    for k in col..n {
                        a[row * n + k] -= f * a[col * n + k];
                    }
                    b[row] -= f * b[col];
                }
            }
        }
        let mut x = vec![0.0; n];
        for row in (0..n).rev() {
            let tail: f64 = (row + 1..n).map(|k| a[row * n + k] * x[k]).sum();
            x[row] = (b[row] - tail) / a[row * n + row];
        }
        x
    }
}

/// Solves the Moran equation `sum_j ratio_j^alpha = 1` by bisection.
pub fn similarity_dimension(maps: &[Similitude]) -> Result<f64> {
    if maps.len() < 2 {
        return Err(MeasureError::TooFewMaps(maps.len()));
    }
    let ratios: Vec<f64> = maps.iter().map(Similitude::ratio).collect();
    moran_root(&ratios)
}

pub(crate) fn moran_root(ratios: &[f64]) -> Result<f64> {
    if let Some(&bad) = ratios.iter().find(|&&s| !(s > 0.0 && s < 1.0)) {
        return Err(MeasureError::InvalidRatio(bad));
    }
    if ratios.len() < 2 {
        return Err(MeasureError::TooFewMaps(ratios.len()));
    }
    let moran = |a: f64| ratios.iter().map(|s| s.powf(a)).sum::<f64>() - 1.0;
    let mut lo = 0.0;
    let mut hi = 1.0;
    while moran(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    // moran is strictly decreasing; stop once the bracket stops shrinking.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if moran(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let alpha = if moran(lo).abs() <= moran(hi).abs() { lo } else { hi };
    Ok(alpha)
}

/// Axis-aligned box `[lo_1, hi_1] x ... x [lo_n, hi_n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundingBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl BoundingBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(MeasureError::DimensionMismatch { expected: lo.len(), got: hi.len() });
        }
        if lo.is_empty() {
            return Err(MeasureError::ZeroDimension);
        }
        for i in 0..lo.len() {
            if !(lo[i].is_finite() && hi[i].is_finite()) {
                return Err(MeasureError::NonFiniteLocation(i));
            }
            if lo[i] > hi[i] {
                return Err(MeasureError::InvalidBox(i));
            }
        }
        Ok(Self { lo, hi })
    }

    /// Smallest box containing every point of a flat `dim`-strided coordinate list.
    pub fn enclosing(dim: usize, coords: &[f64]) -> Option<Self> {
        if dim == 0 || coords.is_empty() {
            return None;
        }
        let mut lo = coords[..dim].to_vec();
        let mut hi = lo.clone();
        for p in coords.chunks_exact(dim) {
            for k in 0..dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        Some(Self { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    pub fn diameter(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt()
    }

    pub fn contains(&self, x: &[f64], slack: f64) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (a, b))| *v >= a - slack && *v <= b + slack)
    }

    /// All `2^n` corners.
    pub fn corners(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..1usize << n)
            .map(|mask| {
                (0..n)
                    .map(|k| if mask >> k & 1 == 1 { self.hi[k] } else { self.lo[k] })
                    .collect()
            })
            .collect()
    }

    fn slack(&self) -> f64 {
        let scale = self
            .lo
            .iter()
            .chain(&self.hi)
            .fold(1.0_f64, |m, v| m.max(v.abs()));
        1e-12 * scale
    }

    /// Whether `map` sends the box into itself; affine images of boxes are
    /// bounded by the images of the corners.
    pub fn is_invariant_under(&self, map: &Similitude) -> bool {
        let slack = self.slack();
        self.corners().iter().all(|c| self.contains(&map.apply(c), slack))
    }
}

/// A self-similar probability measure.
#[derive(Debug, Clone)]
pub struct IfsMeasure {
    maps: Vec<Similitude>,
    weights: Vec<f64>,
    dimension_alpha: f64,
    bounding_box: BoundingBox,
    osc_asserted: bool,
}

impl IfsMeasure {
    /// Builds the measure. Omitted weights default to `1/m`; an omitted box is
    /// computed as the limit of hulls of images of an invariant cube.
    pub fn new(
        maps: Vec<Similitude>,
        weights: Option<Vec<f64>>,
        bounding_box: Option<BoundingBox>,
        osc_asserted: bool,
    ) -> Result<Self> {
        if maps.len() < 2 {
            return Err(MeasureError::TooFewMaps(maps.len()));
        }
        let n = maps[0].dim();
        if let Some(bad) = maps.iter().find(|m| m.dim() != n) {
            return Err(MeasureError::DimensionMismatch { expected: n, got: bad.dim() });
        }
        let m = maps.len();
        let weights = weights.unwrap_or_else(|| vec![1.0 / m as f64; m]);
        if weights.len() != m {
            return Err(MeasureError::WeightCount { expected: m, got: weights.len() });
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|w| !(*w > 0.0)) || !((total - 1.0).abs() <= WEIGHT_SUM_TOL) {
            return Err(MeasureError::BadWeights(total));
        }
        let dimension_alpha = similarity_dimension(&maps)?;
        let residual = moran_residual(&maps, dimension_alpha);
        if residual > MORAN_TOL {
            return Err(MeasureError::MoranResidual(residual));
        }
        if dimension_alpha > n as f64 + 1e-9 {
            return Err(MeasureError::DimensionTooLarge { alpha: dimension_alpha, n });
        }
        let bounding_box = match bounding_box {
            Some(b) => {
                if b.dim() != n {
                    return Err(MeasureError::DimensionMismatch { expected: n, got: b.dim() });
                }
                b
            }
            None => invariant_box(&maps),
        };
        if let Some(j) = maps.iter().position(|s| !bounding_box.is_invariant_under(s)) {
            return Err(MeasureError::BoxNotInvariant(j));
        }
        Ok(Self { maps, weights, dimension_alpha, bounding_box, osc_asserted })
    }

    /// Middle-thirds Cantor measure: `x/3` and `x/3 + 2/3` with equal weights on `[0, 1]`.
    pub fn cantor() -> Self {
        let maps = vec![
            Similitude::line(1.0 / 3.0, 0.0).expect("valid ratio"),
            Similitude::line(1.0 / 3.0, 2.0 / 3.0).expect("valid ratio"),
        ];
        let bbox = BoundingBox::new(vec![0.0], vec![1.0]).expect("valid box");
        Self::new(maps, None, Some(bbox), true).expect("Cantor IFS is well formed")
    }

    pub fn dim(&self) -> usize {
        self.maps[0].dim()
    }

    pub fn maps(&self) -> &[Similitude] {
        &self.maps
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Similarity dimension (root of the Moran equation).
    pub fn dimension(&self) -> f64 {
        self.dimension_alpha
    }

    pub fn bounding_box(&self) -> &BoundingBox {
        &self.bounding_box
    }

    pub fn osc_asserted(&self) -> bool {
        self.osc_asserted
    }

    pub fn moran_residual(&self) -> f64 {
        moran_residual(&self.maps, self.dimension_alpha)
    }

    /// Fixed point of the first map; the base point of every cylinder atom.
    pub fn base_point(&self) -> Vec<f64> {
        self.maps[0].fixed_point()
    }

    /// One atom per word of length `depth`, located at the word's image of the
    /// base point and weighted by the product of the word's weights.
    /// Words are enumerated lexicographically.
    pub fn cylinder_approx(&self, depth: u32, cap: usize) -> Result<AtomicMeasure> {
        let m = self.maps.len() as u128;
        let needed = m.checked_pow(depth).unwrap_or(u128::MAX);
        if needed > cap as u128 {
            return Err(MeasureError::BudgetExceeded { depth, needed, cap });
        }
        let n = self.dim();
        let mut locations = self.base_point();
        let mut weights = vec![1.0_f64];
        for _ in 0..depth {
            let count = weights.len();
            let mut next_loc = Vec::with_capacity(locations.len() * self.maps.len());
            let mut next_w = Vec::with_capacity(count * self.maps.len());
            let mut buf = vec![0.0; n];
            for (map, p) in self.maps.iter().zip(&self.weights) {
                for (x, w) in locations.chunks_exact(n).zip(&weights) {
                    map.apply_into(x, &mut buf);
                    next_loc.extend_from_slice(&buf);
                    next_w.push(p * w);
                }
            }
            locations = next_loc;
            weights = next_w;
        }
        let weights = weights.into_iter().map(|w| Complex64::new(w, 0.0)).collect();
        AtomicMeasure::new(n, locations, weights)
    }

    /// Chaos-game samples of the invariant measure, deterministic in `seed`.
    /// The orbit starts at the base point and discards a fixed burn-in.
    pub fn chaos_game_sample(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cumulative = Vec::with_capacity(self.weights.len());
        let mut acc = 0.0;
        for w in &self.weights {
            acc += w;
            cumulative.push(acc);
        }
        let pick = |rng: &mut ChaCha8Rng| {
            let u: f64 = rng.random::<f64>() * acc;
            cumulative.iter().position(|&c| u < c).unwrap_or(cumulative.len() - 1)
        };
        let mut x = self.base_point();
        let mut buf = x.clone();
        for _ in 0..CHAOS_BURN_IN {
            self.maps[pick(&mut rng)].apply_into(&x, &mut buf);
            std::mem::swap(&mut x, &mut buf);
        }
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            self.maps[pick(&mut rng)].apply_into(&x, &mut buf);
            std::mem::swap(&mut x, &mut buf);
            out.push(x.clone());
        }
        out
    }
}

fn moran_residual(maps: &[Similitude], alpha: f64) -> f64 {
    (maps.iter().map(|s| s.ratio().powf(alpha)).sum::<f64>() - 1.0).abs()
}

/// Iterates `B -> hull(U_j S_j(B))` from a cube containing the attractor, then
/// pads the limit so the corner test passes despite rounding.
fn invariant_box(maps: &[Similitude]) -> BoundingBox {
    let n = maps[0].dim();
    let radius = maps
        .iter()
        .map(|s| {
            let b = s.translation().iter().map(|v| v * v).sum::<f64>().sqrt();
            b / (1.0 - s.ratio())
        })
        .fold(0.0_f64, f64::max)
        .max(1e-300);
    let mut bbox = BoundingBox { lo: vec![-radius; n], hi: vec![radius; n] };
    for _ in 0..2000 {
        let images: Vec<f64> = maps
            .iter()
            .flat_map(|s| bbox.corners().into_iter().flat_map(move |c| s.apply(&c)))
            .collect();
        let next = BoundingBox::enclosing(n, &images).expect("nonempty");
        let moved = next
            .lo
            .iter()
            .zip(&bbox.lo)
            .chain(next.hi.iter().zip(&bbox.hi))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        bbox = next;
        if moved <= 1e-15 * radius {
            break;
        }
    }
    let pad = 1e-9 * bbox.diameter().max(radius * 1e-6).max(1e-300);
    let lo = bbox.lo.iter().map(|v| v - pad).collect();
    let hi = bbox.hi.iter().map(|v| v + pad).collect();
    BoundingBox { lo, hi }
}

/// Finite sum of weighted point masses `sum_k c_k delta(x - a_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicMeasure {
    dim: usize,
    /// Flat, `dim`-strided atom coordinates.
    locations: Vec<f64>,
    weights: Vec<Complex64>,
    total_mass: Complex64,
}

impl AtomicMeasure {
    pub fn new(dim: usize, locations: Vec<f64>, weights: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(MeasureError::ZeroDimension);
        }
        if locations.len() != dim * weights.len() {
            return Err(MeasureError::DimensionMismatch {
                expected: dim * weights.len(),
                got: locations.len(),
            });
        }
        if let Some(i) = locations.iter().position(|v| !v.is_finite()) {
            return Err(MeasureError::NonFiniteLocation(i / dim));
        }
        if let Some(i) = weights.iter().position(|w| !(w.re.is_finite() && w.im.is_finite())) {
            return Err(MeasureError::NonFiniteWeight(i));
        }
        let total_mass = weights.iter().sum();
        Ok(Self { dim, locations, weights, total_mass })
    }

    /// Real-weighted measure on the line.
    pub fn on_line(points: &[f64], weights: &[f64]) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(MeasureError::DimensionMismatch {
                expected: points.len(),
                got: weights.len(),
            });
        }
        Self::new(1, points.to_vec(), weights.iter().map(|&w| Complex64::new(w, 0.0)).collect())
    }

    /// A single atom of weight `weight` at `location`.
    pub fn dirac(location: &[f64], weight: Complex64) -> Result<Self> {
        Self::new(location.len(), location.to_vec(), vec![weight])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn location(&self, i: usize) -> &[f64] {
        &self.locations[i * self.dim..(i + 1) * self.dim]
    }

    pub fn locations(&self) -> &[f64] {
        &self.locations
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn total_mass(&self) -> Complex64 {
        self.total_mass
    }

    pub fn has_real_weights(&self) -> bool {
        self.weights.iter().all(|w| w.im == 0.0)
    }

    pub fn is_positive(&self) -> bool {
        self.weights.iter().all(|w| w.im == 0.0 && w.re >= 0.0)
    }

    pub fn bounding_box(&self) -> Option<BoundingBox> {
        BoundingBox::enclosing(self.dim, &self.locations)
    }

    /// Upper bound on the diameter of the support (the bounding-box diagonal).
    pub fn diameter(&self) -> f64 {
        self.bounding_box().map_or(0.0, |b| b.diameter())
    }

    /// Same atoms with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: Complex64) -> Self {
        let weights = self.weights.iter().map(|w| w * factor).collect();
        Self::new(self.dim, self.locations.clone(), weights).expect("scaling keeps atoms finite")
    }
}

/// An atomic measure carrying a nonnegative density sample per atom: `f dmu`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedMeasure {
    base: AtomicMeasure,
    density: Vec<f64>,
}

impl WeightedMeasure {
    pub fn new(base: AtomicMeasure, density: Vec<f64>) -> Result<Self> {
        if density.len() != base.len() {
            return Err(MeasureError::DimensionMismatch { expected: base.len(), got: density.len() });
        }
        if let Some((index, &value)) =
            density.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(MeasureError::BadDensity { index, value });
        }
        Ok(Self { base, density })
    }

    /// Density identically one.
    pub fn uniform(base: AtomicMeasure) -> Self {
        let density = vec![1.0; base.len()];
        Self { base, density }
    }

    pub fn base(&self) -> &AtomicMeasure {
        &self.base
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    /// The atomic measure `f dmu` with weights `f_i c_i`.
    pub fn product_measure(&self) -> AtomicMeasure {
        let weights = self.base.weights.iter().zip(&self.density).map(|(c, f)| c * f).collect();
        AtomicMeasure::new(self.base.dim, self.base.locations.clone(), weights)
            .expect("density is finite")
    }
}
