//! Fourier transforms of atomic and self-similar measures, with the
//! convention `mu^(xi) = int exp(-i <x, xi>) dmu(x)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::measures::{AtomicMeasure, IfsMeasure, WeightedMeasure};
use crate::numeric::{even_intervals, pairwise_sum, simpson};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FourierError {
    #[error("frequency has dimension {got}, measure has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("frequency is not finite")]
    NonFiniteFrequency,
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("max_depth must be at least 1")]
    InvalidDepth,
    #[error("recursion reached max_depth {0} before the truncation criterion held")]
    DepthExceeded(u32),
    #[error("recursion frontier grew to {0} distinct frequencies")]
    FrontierTooLarge(usize),
    #[error("epsilon must lie in (0, 1], got {0}")]
    InvalidEpsilon(f64),
    #[error("quadrature needs {needed} samples, cap is {cap}")]
    QuadratureBudget { needed: u128, cap: usize },
    #[error("dimension {0} is not supported here (only 1 and 2)")]
    UnsupportedDimension(usize),
}

pub type Result<T> = std::result::Result<T, FourierError>;

/// Anything whose Fourier transform can be sampled pointwise.
pub trait Spectrum: Sync {
    fn dim(&self) -> usize;

    fn transform(&self, xi: &[f64]) -> Result<Complex64>;

    /// Upper bound on the diameter of the support; `|mu^|^2` oscillates at
    /// frequencies up to this value.
    fn support_diameter(&self) -> f64;

    /// Whether the measure is real, so that `mu^(-xi) = conj(mu^(xi))`.
    fn is_real(&self) -> bool;
}

fn check_frequency(dim: usize, xi: &[f64]) -> Result<()> {
    if xi.len() != dim {
        return Err(FourierError::DimensionMismatch { expected: dim, got: xi.len() });
    }
    if xi.iter().any(|v| !v.is_finite()) {
        return Err(FourierError::NonFiniteFrequency);
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `exp(-i phase)`.
fn cis_neg(phase: f64) -> Complex64 {
    let (s, c) = phase.sin_cos();
    Complex64::new(c, -s)
}

fn atomic_sum(measure: &AtomicMeasure, density: Option<&[f64]>, xi: &[f64]) -> Complex64 {
    let n = measure.dim();
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, (loc, w)) in measure.locations().chunks_exact(n).zip(measure.weights()).enumerate() {
        let phase = if n == 1 { loc[0] * xi[0] } else { dot(loc, xi) };
        let term = w * cis_neg(phase);
        acc += match density {
            Some(f) => term * f[i],
            None => term,
        };
    }
    acc
}

/// `sum_k c_k exp(-i <a_k, xi>)`.
pub fn ft_atomic(measure: &AtomicMeasure, xi: &[f64]) -> Result<Complex64> {
    check_frequency(measure.dim(), xi)?;
    Ok(atomic_sum(measure, None, xi))
}

/// `sum_k f_k c_k exp(-i <a_k, xi>)`.
pub fn ft_weighted(measure: &WeightedMeasure, xi: &[f64]) -> Result<Complex64> {
    check_frequency(measure.base().dim(), xi)?;
    Ok(atomic_sum(measure.base(), Some(measure.density()), xi))
}

impl Spectrum for AtomicMeasure {
    fn dim(&self) -> usize {
        AtomicMeasure::dim(self)
    }

    fn transform(&self, xi: &[f64]) -> Result<Complex64> {
        ft_atomic(self, xi)
    }

    fn support_diameter(&self) -> f64 {
        self.diameter()
    }

    fn is_real(&self) -> bool {
        self.has_real_weights()
    }
}

impl Spectrum for WeightedMeasure {
    fn dim(&self) -> usize {
        self.base().dim()
    }

    fn transform(&self, xi: &[f64]) -> Result<Complex64> {
        ft_weighted(self, xi)
    }

    fn support_diameter(&self) -> f64 {
        self.base().diameter()
    }

    fn is_real(&self) -> bool {
        self.base().has_real_weights()
    }
}

/// Frequency plus truncation controls for the self-similar recursion.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformRequest {
    pub xi: Vec<f64>,
    pub tol: f64,
    pub max_depth: u32,
}

impl TransformRequest {
    pub fn new(xi: Vec<f64>, tol: f64, max_depth: u32) -> Self {
        Self { xi, tol, max_depth }
    }
}

/// Above this many live frequencies the tree recursion gives up.
pub const FRONTIER_CAP: usize = 1 << 20;

/// `mu^(xi) = sum_j p_j exp(-i <b_j, xi>) mu^(s_j R_j^T xi)`, unrolled until
/// `|eta| * diam(box) <= tol` on every branch. A truncated branch returns
/// `exp(-i <c, eta>)` with `c` the box center, which is within
/// `|eta| * diam / 2` of the true value, so the total error is below `tol / 2`.
///
/// When all maps share ratio and rotation the branches never separate and
/// the recursion is a single infinite product.
pub fn ft_self_similar(measure: &IfsMeasure, req: &TransformRequest) -> Result<Complex64> {
    check_request(measure, req)?;
    if shares_linear_part(measure) {
        product_form(measure, req)
    } else {
        ft_self_similar_tree(measure, req)
    }
}

fn check_request(measure: &IfsMeasure, req: &TransformRequest) -> Result<()> {
    check_frequency(measure.dim(), &req.xi)?;
    if !(req.tol > 0.0 && req.tol.is_finite()) {
        return Err(FourierError::InvalidTolerance(req.tol));
    }
    if req.max_depth == 0 {
        return Err(FourierError::InvalidDepth);
    }
    Ok(())
}

fn shares_linear_part(measure: &IfsMeasure) -> bool {
    let first = &measure.maps()[0];
    measure.maps().iter().all(|m| {
        m.ratio().to_bits() == first.ratio().to_bits()
            && m.rotation().iter().zip(first.rotation()).all(|(a, b)| a.to_bits() == b.to_bits())
    })
}

fn product_form(measure: &IfsMeasure, req: &TransformRequest) -> Result<Complex64> {
    let bbox = measure.bounding_box();
    let diam = bbox.diameter();
    let center = bbox.center();
    let map = &measure.maps()[0];
    let mut eta = req.xi.clone();
    let mut next = eta.clone();
    let mut acc = Complex64::new(1.0, 0.0);
    for level in 0..=req.max_depth {
        if norm(&eta) * diam <= req.tol {
            return Ok(acc * cis_neg(dot(&center, &eta)));
        }
        if level == req.max_depth {
            break;
        }
        let factor: Complex64 = measure
            .maps()
            .iter()
            .zip(measure.weights())
            .map(|(s, p)| cis_neg(dot(s.translation(), &eta)) * p)
            .sum();
        acc *= factor;
        map.pull_frequency_into(&eta, &mut next);
        std::mem::swap(&mut eta, &mut next);
    }
    Err(FourierError::DepthExceeded(req.max_depth))
}

/// Merge key: coordinates rounded to 44 mantissa bits, so branches whose
/// frequencies differ only by rounding in the composed ratios collapse.
fn merge_key(eta: &[f64]) -> Vec<u64> {
    const DROP: u32 = 8;
    eta.iter()
        .map(|v| {
            let bits = (v + 0.0).to_bits();
            bits.wrapping_add(1 << (DROP - 1)) >> DROP
        })
        .collect()
}

/// Breadth-first recursion with branches merged on (nearly) equal frequency.
/// Always valid; [`ft_self_similar`] prefers the product form when it applies.
pub fn ft_self_similar_tree(measure: &IfsMeasure, req: &TransformRequest) -> Result<Complex64> {
    check_request(measure, req)?;
    let bbox = measure.bounding_box();
    let diam = bbox.diameter();
    let center = bbox.center();
    let n = measure.dim();
    let mut frontier: Vec<(Vec<f64>, Complex64)> = vec![(req.xi.clone(), Complex64::new(1.0, 0.0))];
    let mut leaves_re = Vec::new();
    let mut leaves_im = Vec::new();
    for level in 0..=req.max_depth {
        let mut next: BTreeMap<Vec<u64>, (Vec<f64>, Complex64)> = BTreeMap::new();
        for (eta, coeff) in frontier {
            if norm(&eta) * diam <= req.tol {
                let v = coeff * cis_neg(dot(&center, &eta));
                leaves_re.push(v.re);
                leaves_im.push(v.im);
                continue;
            }
            if level == req.max_depth {
                return Err(FourierError::DepthExceeded(req.max_depth));
            }
            for (map, p) in measure.maps().iter().zip(measure.weights()) {
                let mut child = vec![0.0; n];
                map.pull_frequency_into(&eta, &mut child);
                let c = coeff * cis_neg(dot(map.translation(), &eta)) * p;
                next.entry(merge_key(&child))
                    .and_modify(|e| e.1 += c)
                    .or_insert((child, c));
            }
        }
        if next.len() > FRONTIER_CAP {
            return Err(FourierError::FrontierTooLarge(next.len()));
        }
        frontier = next.into_values().collect();
        if frontier.is_empty() {
            break;
        }
    }
    Ok(Complex64::new(pairwise_sum(&leaves_re), pairwise_sum(&leaves_im)))
}

/// A self-similar measure viewed through its transform at fixed accuracy.
#[derive(Debug, Clone)]
pub struct SelfSimilarSpectrum<'a> {
    pub measure: &'a IfsMeasure,
    pub tol: f64,
    pub max_depth: u32,
}

impl<'a> SelfSimilarSpectrum<'a> {
    pub fn new(measure: &'a IfsMeasure, tol: f64, max_depth: u32) -> Self {
        Self { measure, tol, max_depth }
    }
}

impl Spectrum for SelfSimilarSpectrum<'_> {
    fn dim(&self) -> usize {
        self.measure.dim()
    }

    fn transform(&self, xi: &[f64]) -> Result<Complex64> {
        ft_self_similar(self.measure, &TransformRequest::new(xi.to_vec(), self.tol, self.max_depth))
    }

    fn support_diameter(&self) -> f64 {
        self.measure.bounding_box().diameter()
    }

    fn is_real(&self) -> bool {
        true
    }
}

/// Default truncation level for `|chi^(eps xi)|` in [`mollified_l2`].
pub const DEFAULT_MOLLIFIER_CUT: f64 = 1e-9;
/// Default sample cap for [`mollified_l2`].
pub const DEFAULT_QUADRATURE_CAP: usize = 1 << 24;

const BUMP_NODES: usize = 4096;
const TABLE_STEP: f64 = 1.0 / 32.0;
const TABLE_MAX: f64 = 512.0;
const SAMPLES_PER_OSCILLATION: f64 = 16.0;

/// The even bump `chi(x) = exp(-1/(1-x^2)) / Z` on `(-1, 1)`, and a table of
/// its cosine transform with derivatives for cubic Hermite interpolation.
/// The planar mollifier is `2 chi(sqrt2 x) chi(sqrt2 y)`, supported in the unit disc.
#[derive(Debug)]
pub struct Mollifier {
    /// `(x_i, h * chi(x_i))` for trapezoid nodes in `(0, 1)`; `x = 0` stored once.
    nodes: Vec<(f64, f64)>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    l2_sq: f64,
}

fn bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - x * x)).exp()
    }
}

impl Mollifier {
    /// Process-wide instance; the table is built on first use.
    pub fn shared() -> &'static Mollifier {
        static CELL: OnceLock<Mollifier> = OnceLock::new();
        CELL.get_or_init(Mollifier::build)
    }

    fn build() -> Self {
        let h = 2.0 / BUMP_NODES as f64;
        let half = BUMP_NODES / 2;
        // trapezoid on [-1, 1]; endpoint values vanish to all orders
        let z = h * (bump(0.0) + 2.0 * (1..half).map(|i| bump(i as f64 * h)).sum::<f64>());
        let mut nodes = vec![(0.0, h * bump(0.0) / z)];
        nodes.extend((1..half).map(|i| {
            let x = i as f64 * h;
            (x, 2.0 * h * bump(x) / z)
        }));
        let l2_sq = h
            * ((bump(0.0) / z).powi(2)
                + 2.0 * (1..half).map(|i| (bump(i as f64 * h) / z).powi(2)).sum::<f64>());
        let count = (TABLE_MAX / TABLE_STEP) as usize + 1;
        let pairs: Vec<(f64, f64)> = (0..count)
            .into_par_iter()
            .map(|k| {
                let w = k as f64 * TABLE_STEP;
                let mut v = 0.0;
                let mut d = 0.0;
                for &(x, m) in &nodes {
                    let (s, c) = (w * x).sin_cos();
                    v += m * c;
                    d -= m * x * s;
                }
                (v, d)
            })
            .collect();
        let (values, slopes) = pairs.into_iter().unzip();
        Self { nodes, values, slopes, l2_sq }
    }

    /// `chi^(w) = int chi(x) cos(w x) dx` by direct quadrature (no table).
    pub fn transform_direct(&self, w: f64) -> f64 {
        self.nodes.iter().map(|&(x, m)| m * (w * x).cos()).sum()
    }

    /// Tabulated `chi^(w)`; zero beyond the table.
    pub fn transform_1d(&self, w: f64) -> f64 {
        let w = w.abs();
        let t = w / TABLE_STEP;
        let k = t.floor() as usize;
        if k + 1 >= self.values.len() {
            return 0.0;
        }
        let u = t - k as f64;
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let (m0, m1) = (self.slopes[k] * TABLE_STEP, self.slopes[k + 1] * TABLE_STEP);
        let u2 = u * u;
        let u3 = u2 * u;
        (2.0 * u3 - 3.0 * u2 + 1.0) * y0
            + (u3 - 2.0 * u2 + u) * m0
            + (-2.0 * u3 + 3.0 * u2) * y1
            + (u3 - u2) * m1
    }

    /// Transform of the `n`-dimensional mollifier.
    pub fn transform(&self, xi: &[f64]) -> f64 {
        match xi.len() {
            1 => self.transform_1d(xi[0]),
            _ => xi.iter().map(|v| self.transform_1d(v / std::f64::consts::SQRT_2)).product(),
        }
    }

    /// `||chi||_2^2` in dimension `n` (1 or 2), from physical-space quadrature.
    pub fn l2_norm_sq(&self, n: usize) -> f64 {
        match n {
            1 => self.l2_sq,
            _ => 2.0 * self.l2_sq * self.l2_sq,
        }
    }

    /// Smallest `W` with `|chi^(w)| < cut` for every tabulated `w >= W`.
    pub fn cutoff(&self, cut: f64) -> f64 {
        let last = self.values.iter().rposition(|v| v.abs() >= cut).map_or(0, |k| k + 1);
        (last as f64 * TABLE_STEP).min(TABLE_MAX)
    }
}

/// `||u * chi_eps||_2^2 = (2 pi)^(-n) int |u^(xi)|^2 |chi^(eps xi)|^2 dxi`, by
/// Simpson over the box where the one-dimensional mollifier factor is at
/// least `cut`.
pub fn mollified_l2(measure: &AtomicMeasure, epsilon: f64, cut: f64, sample_cap: usize) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(FourierError::InvalidEpsilon(epsilon));
    }
    let moll = Mollifier::shared();
    let n = measure.dim();
    let axis_scale = match n {
        1 => 1.0,
        2 => std::f64::consts::SQRT_2,
        d => return Err(FourierError::UnsupportedDimension(d)),
    };
    let half_width = axis_scale * moll.cutoff(cut).max(TABLE_STEP) / epsilon;
    let freq = measure.diameter() + 2.0 * epsilon / axis_scale;
    let step = 2.0 * PI / (SAMPLES_PER_OSCILLATION * freq);
    let intervals = even_intervals(2.0 * half_width, step, 64);
    let needed = (intervals as u128 + 1).pow(n as u32);
    if needed > sample_cap as u128 {
        return Err(FourierError::QuadratureBudget { needed, cap: sample_cap });
    }
    let h = 2.0 * half_width / intervals as f64;
    let node = |i: usize| -half_width + i as f64 * h;
    let integrand = |xi: &[f64]| {
        let m = moll.transform(&xi.iter().map(|v| v * epsilon).collect::<Vec<_>>());
        atomic_sum(measure, None, xi).norm_sqr() * m * m
    };
    let integral = if n == 1 {
        let samples: Vec<f64> =
            (0..=intervals).into_par_iter().map(|i| integrand(&[node(i)])).collect();
        simpson(&samples, h)
    } else {
        let rows: Vec<f64> = (0..=intervals)
            .into_par_iter()
            .map(|i| {
                let y = node(i);
                let samples: Vec<f64> = (0..=intervals).map(|j| integrand(&[node(j), y])).collect();
                simpson(&samples, h)
            })
            .collect();
        simpson(&rows, h)
    };
    Ok(integral / (2.0 * PI).powi(n as i32))
}
