//! Normalized Fourier functionals over growing balls and their finite-L bands.
//!
//! All radial integrals share one engine: `sigma_p(r) r^(n-1)` is sampled on a
//! uniform grid fine enough to resolve the oscillation of `|u^|^p` (set by the
//! support diameter), integrated with composite Simpson, and each endpoint
//! that does not land on the grid gets one extra three-point panel.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::fourier::{FourierError, Spectrum};
use crate::measures::AtomicMeasure;
use crate::numeric::{even_intervals, pairwise_sum, sample_indexed, simpson_panels};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AsymptoticsError {
    #[error(transparent)]
    Fourier(#[from] FourierError),
    #[error("dimension {0} is not supported here (only 1 and 2)")]
    UnsupportedDimension(usize),
    #[error("radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("grid must be nonempty, positive and strictly increasing")]
    InvalidGrid,
    #[error("grid value {0} is outside the admissible range")]
    GridOutOfRange(f64),
    #[error("exponent p = {0} must be at least 1")]
    InvalidPower(f64),
    #[error("radial_samples must be at least 64, got {0}")]
    TooFewSamples(usize),
    #[error("series value {value} at L = {l} is negative or not finite")]
    BadValue { l: f64, value: f64 },
}

pub type Result<T> = std::result::Result<T, AsymptoticsError>;

/// Radial and angular resolution of the ball integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    /// Minimum number of Simpson intervals below the smallest radius.
    pub radial_samples: usize,
    /// Samples per period of the fastest oscillation `2 pi / diam`.
    pub samples_per_oscillation: f64,
    /// Minimum number of angles on the circle (planar measures).
    pub angular_order: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self { radial_samples: 128, samples_per_oscillation: 16.0, angular_order: 64 }
    }
}

impl QuadratureSettings {
    fn validate(&self) -> Result<()> {
        if self.radial_samples < 64 {
            return Err(AsymptoticsError::TooFewSamples(self.radial_samples));
        }
        Ok(())
    }
}

/// Values of a normalized functional over an increasing grid of radii.
///
/// `liminf_est` and `limsup_est` are the min and max over the last half of the
/// grid: finite-L band proxies, not limits.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticSeries {
    pub exponent_k: f64,
    pub p: f64,
    pub l_values: Vec<f64>,
    pub values: Vec<f64>,
    pub liminf_est: f64,
    pub limsup_est: f64,
}

fn tail_len(len: usize) -> usize {
    len.div_ceil(2)
}

fn band(values: &[f64]) -> (f64, f64) {
    let tail = &values[values.len() - tail_len(values.len())..];
    let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty()
        || grid.iter().any(|l| !(l.is_finite() && *l > 0.0))
        || grid.windows(2).any(|w| !(w[1] > w[0]))
    {
        return Err(AsymptoticsError::InvalidGrid);
    }
    Ok(())
}

impl AsymptoticSeries {
    pub fn new(exponent_k: f64, p: f64, l_values: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_grid(&l_values)?;
        if l_values.len() != values.len() {
            return Err(AsymptoticsError::InvalidGrid);
        }
        if let Some((l, v)) = l_values.iter().zip(&values).find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(AsymptoticsError::BadValue { l: *l, value: *v });
        }
        let (liminf_est, limsup_est) = band(&values);
        Ok(Self { exponent_k, p, l_values, values, liminf_est, limsup_est })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `limsup_est / liminf_est`; infinite when the tail touches zero.
    pub fn band_ratio(&self) -> f64 {
        if self.liminf_est > 0.0 {
            self.limsup_est / self.liminf_est
        } else {
            f64::INFINITY
        }
    }

    /// Band of every prefix: row `i` holds the tail min/max of `values[..=i]`.
    pub fn running_tail(&self) -> Vec<(f64, f64)> {
        (1..=self.values.len()).map(|end| band(&self.values[..end])).collect()
    }

    /// Same integrals under normalization `L^(-k_new)`.
    pub fn rescaled(&self, k_new: f64) -> Self {
        let values = self
            .l_values
            .iter()
            .zip(&self.values)
            .map(|(l, v)| v * l.powf(self.exponent_k - k_new))
            .collect();
        Self::new(k_new, self.p, self.l_values.clone(), values).expect("rescaling keeps the series valid")
    }

    /// CSV with columns `L,value,running_min_tail,running_max_tail`, preceded
    /// by `# `-prefixed header lines.
    pub fn to_csv(&self, header: &[String]) -> String {
        let mut out = String::new();
        for line in header {
            let _ = writeln!(out, "# {line}");
        }
        let _ = writeln!(out, "# exponent_k = {:e}, p = {}", self.exponent_k, self.p);
        out.push_str("L,value,running_min_tail,running_max_tail\n");
        for ((l, v), (lo, hi)) in self.l_values.iter().zip(&self.values).zip(self.running_tail()) {
            let _ = writeln!(out, "{l:.17e},{v:.17e},{lo:.17e},{hi:.17e}");
        }
        out
    }
}

fn check_power(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(AsymptoticsError::InvalidPower(p))
    }
}

fn check_dim<S: Spectrum + ?Sized>(u: &S) -> Result<usize> {
    match u.dim() {
        n @ (1 | 2) => Ok(n),
        n => Err(AsymptoticsError::UnsupportedDimension(n)),
    }
}

/// `sigma_p(r) = int_{S^(n-1)} |u^(r w)|^p dw`: the two-point sum on `S^0`, or
/// the trapezoid rule with `quad_order` equispaced angles on the circle.
pub fn spherical_average<S: Spectrum + ?Sized>(u: &S, r: f64, p: f64, quad_order: usize) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(AsymptoticsError::InvalidRadius(r));
    }
    check_power(p)?;
    match check_dim(u)? {
        1 => Ok(u.transform(&[r])?.norm().powf(p) + u.transform(&[-r])?.norm().powf(p)),
        _ => {
            let q = quad_order.max(1);
            let terms = (0..q)
                .map(|j| {
                    let (s, c) = (2.0 * PI * j as f64 / q as f64).sin_cos();
                    Ok(u.transform(&[r * c, r * s])?.norm().powf(p))
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(2.0 * PI / q as f64 * pairwise_sum(&terms))
        }
    }
}

struct RadialIntegrand<'a, S: Spectrum + ?Sized> {
    u: &'a S,
    n: usize,
    p: f64,
    real: bool,
    settings: QuadratureSettings,
    diameter: f64,
}

impl<'a, S: Spectrum + ?Sized> RadialIntegrand<'a, S> {
    fn new(u: &'a S, p: f64, settings: QuadratureSettings) -> Result<Self> {
        settings.validate()?;
        check_power(p)?;
        let n = check_dim(u)?;
        Ok(Self { u, n, p, real: u.is_real(), settings, diameter: u.support_diameter() })
    }

    /// `sigma_p(r) r^(n-1)`, using conjugate symmetry when the measure is real.
    fn eval(&self, r: f64) -> std::result::Result<f64, FourierError> {
        if self.n == 1 {
            let plus = self.u.transform(&[r])?.norm().powf(self.p);
            let minus = if self.real { plus } else { self.u.transform(&[-r])?.norm().powf(self.p) };
            return Ok(plus + minus);
        }
        let wanted = (self.settings.samples_per_oscillation * r * self.diameter).ceil() as usize;
        let mut q = wanted.max(self.settings.angular_order).max(4);
        q += q % 2;
        let count = if self.real { q / 2 } else { q };
        let mut terms = Vec::with_capacity(count);
        for j in 0..count {
            let (s, c) = (2.0 * PI * j as f64 / q as f64).sin_cos();
            terms.push(self.u.transform(&[r * c, r * s])?.norm().powf(self.p));
        }
        let factor = if self.real { 2.0 } else { 1.0 };
        Ok(factor * 2.0 * PI / q as f64 * pairwise_sum(&terms) * r)
    }

    /// Grid spacing: resolve `2 pi / diam` and put at least `radial_samples`
    /// intervals below `smallest`.
    fn max_step(&self, smallest: f64) -> f64 {
        let by_count = smallest / self.settings.radial_samples as f64;
        if self.diameter > 0.0 {
            by_count.min(2.0 * PI / (self.settings.samples_per_oscillation * self.diameter))
        } else {
            by_count
        }
    }

    /// Uniform samples on `[0, r_max]`; returns `(h, samples)`.
    fn profile(&self, r_max: f64, smallest: f64) -> Result<(f64, Vec<f64>)> {
        let intervals = even_intervals(r_max, self.max_step(smallest), 2);
        let h = r_max / intervals as f64;
        let samples = sample_indexed(intervals + 1, |i| self.eval(i as f64 * h))?;
        Ok((h, samples))
    }

    /// `int_0^end weight(r) g(r) dr` from profile samples plus one closing panel.
    fn integrate_to(
        &self,
        h: f64,
        weighted: &[f64],
        end: f64,
        weight: impl Fn(f64) -> f64,
    ) -> Result<f64> {
        let panels_avail = (weighted.len() - 1) / 2;
        let panels = ((end / (2.0 * h)).floor() as usize).min(panels_avail);
        let body = pairwise_sum(&simpson_panels(&weighted[..2 * panels + 1], h));
        let start = 2.0 * panels as f64 * h;
        let width = end - start;
        if width <= 0.0 {
            return Ok(body);
        }
        let mid = start + 0.5 * width;
        let a = weighted[2 * panels];
        let b = weight(mid) * self.eval(mid)?;
        let c = weight(end) * self.eval(end)?;
        Ok(body + width / 6.0 * (a + 4.0 * b + c))
    }
}

/// `L^(-k) int_{|xi| <= L} |u^|^p` for every `L` in the grid.
pub fn ball_average_series<S: Spectrum + ?Sized>(
    u: &S,
    l_grid: &[f64],
    p: f64,
    k: f64,
    settings: QuadratureSettings,
) -> Result<AsymptoticSeries> {
    check_grid(l_grid)?;
    let integrand = RadialIntegrand::new(u, p, settings)?;
    let l_max = l_grid[l_grid.len() - 1];
    let (h, samples) = integrand.profile(l_max, l_grid[0])?;
    let values = l_grid
        .par_iter()
        .map(|&l| Ok(integrand.integrate_to(h, &samples, l, |_| 1.0)? * l.powf(-k)))
        .collect::<Result<Vec<f64>>>()?;
    AsymptoticSeries::new(k, p, l_grid.to_vec(), values)
}

/// `L^(-k) int_0^L sigma_p(r) r^(n-1) dr`.
pub fn ball_average<S: Spectrum + ?Sized>(
    u: &S,
    l: f64,
    p: f64,
    k: f64,
    settings: QuadratureSettings,
) -> Result<f64> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(AsymptoticsError::InvalidRadius(l));
    }
    Ok(ball_average_series(u, &[l], p, k, settings)?.values[0])
}

/// Radius, in units of `L`, where the Gaussian weight is truncated.
pub const GAUSSIAN_CUTOFF: f64 = 6.0;

/// `L^(-k) int exp(-|xi|^2 / 2L^2) |u^|^p dxi`, truncated at `|xi| = 6L`.
pub fn gaussian_average_series<S: Spectrum + ?Sized>(
    u: &S,
    l_grid: &[f64],
    p: f64,
    k: f64,
    settings: QuadratureSettings,
) -> Result<AsymptoticSeries> {
    check_grid(l_grid)?;
    let integrand = RadialIntegrand::new(u, p, settings)?;
    let r_max = GAUSSIAN_CUTOFF * l_grid[l_grid.len() - 1];
    let (h, samples) = integrand.profile(r_max, l_grid[0])?;
    let values = l_grid
        .par_iter()
        .map(|&l| {
            let weight = |r: f64| (-r * r / (2.0 * l * l)).exp();
            let end = GAUSSIAN_CUTOFF * l;
            let last = ((end / h).floor() as usize + 2).min(samples.len());
            let weighted: Vec<f64> =
                samples[..last].iter().enumerate().map(|(i, g)| weight(i as f64 * h) * g).collect();
            Ok(integrand.integrate_to(h, &weighted, end, weight)? * l.powf(-k))
        })
        .collect::<Result<Vec<f64>>>()?;
    AsymptoticSeries::new(k, p, l_grid.to_vec(), values)
}

pub fn gaussian_average<S: Spectrum + ?Sized>(
    u: &S,
    l: f64,
    p: f64,
    k: f64,
    settings: QuadratureSettings,
) -> Result<f64> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(AsymptoticsError::InvalidRadius(l));
    }
    Ok(gaussian_average_series(u, &[l], p, k, settings)?.values[0])
}

/// Grid lower bound for `sup_{L >= 1} (L^(-(n - alpha)) int_{B_L} |u^|^p)^(1/p)`.
pub fn lau_b_norm<S: Spectrum + ?Sized>(
    u: &S,
    alpha: f64,
    p: f64,
    l_grid: &[f64],
    settings: QuadratureSettings,
) -> Result<f64> {
    if let Some(&l) = l_grid.iter().find(|&&l| l < 1.0) {
        return Err(AsymptoticsError::GridOutOfRange(l));
    }
    let n = check_dim(u)? as f64;
    let series = ball_average_series(u, l_grid, p, n - alpha, settings)?;
    Ok(series.values.iter().map(|v| v.powf(1.0 / p)).fold(0.0, f64::max))
}

/// Grid lower bound for `sup_{0 < delta <= 1} (delta^(-(n + alpha (p-1))) int |mu(Q_delta(x))|^p dx)^(1/p)`
/// with `Q_delta(x) = prod (x_j - delta, x_j + delta]`.
///
/// The `x`-integral is exact: an event sweep over the breakpoints `a +- delta`
/// on the line, and that sweep inside every slab between x-breakpoints in the plane.
pub fn lau_m_norm(mu: &AtomicMeasure, alpha: f64, p: f64, delta_grid: &[f64]) -> Result<f64> {
    check_power(p)?;
    let n = mu.dim();
    if n > 2 {
        return Err(AsymptoticsError::UnsupportedDimension(n));
    }
    if delta_grid.is_empty() {
        return Err(AsymptoticsError::InvalidGrid);
    }
    if let Some(&d) = delta_grid.iter().find(|&&d| !(d > 0.0 && d <= 1.0)) {
        return Err(AsymptoticsError::GridOutOfRange(d));
    }
    let exponent = n as f64 + alpha * (p - 1.0);
    let norms = delta_grid
        .iter()
        .map(|&delta| {
            let integral = if n == 1 { cube_mass_integral_1d(mu, delta, p) } else { cube_mass_integral_2d(mu, delta, p) };
            (delta.powf(-exponent) * integral).powf(1.0 / p)
        })
        .collect::<Vec<f64>>();
    Ok(norms.into_iter().fold(0.0, f64::max))
}

/// `int |sum_{a_k in (x - delta, x + delta]} c_k|^p dx` for atoms on a line,
/// given `(coordinate, weight)` pairs.
fn sweep_line(atoms: &[(f64, Complex64)], delta: f64, p: f64) -> f64 {
    // x sees atom a exactly when a - delta <= x < a + delta
    let mut events: Vec<(f64, Complex64)> = Vec::with_capacity(2 * atoms.len());
    for &(a, c) in atoms {
        events.push((a - delta, c));
        events.push((a + delta, -c));
    }
    events.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut running = Complex64::new(0.0, 0.0);
    let mut pieces = Vec::with_capacity(events.len());
    for w in 0..events.len() {
        running += events[w].1;
        if let Some(next) = events.get(w + 1) {
            let len = next.0 - events[w].0;
            if len > 0.0 {
                pieces.push(running.norm().powf(p) * len);
            }
        }
    }
    pairwise_sum(&pieces)
}

fn cube_mass_integral_1d(mu: &AtomicMeasure, delta: f64, p: f64) -> f64 {
    let atoms: Vec<(f64, Complex64)> =
        (0..mu.len()).map(|i| (mu.location(i)[0], mu.weights()[i])).collect();
    sweep_line(&atoms, delta, p)
}

fn cube_mass_integral_2d(mu: &AtomicMeasure, delta: f64, p: f64) -> f64 {
    let mut xs: Vec<f64> = (0..mu.len())
        .flat_map(|i| {
            let x = mu.location(i)[0];
            [x - delta, x + delta]
        })
        .collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let slabs: Vec<f64> = xs
        .par_windows(2)
        .map(|w| {
            let (x0, x1) = (w[0], w[1]);
            let mid = 0.5 * (x0 + x1);
            let active: Vec<(f64, Complex64)> = (0..mu.len())
                .filter(|&i| {
                    let a = mu.location(i)[0];
                    a - delta <= mid && mid < a + delta
                })
                .map(|i| (mu.location(i)[1], mu.weights()[i]))
                .collect();
            if active.is_empty() {
                0.0
            } else {
                (x1 - x0) * sweep_line(&active, delta, p)
            }
        })
        .collect();
    pairwise_sum(&slabs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::SelfSimilarSpectrum;
    use crate::measures::{IfsMeasure, DEFAULT_ATOM_BUDGET};

    fn unit_atom() -> AtomicMeasure {
        AtomicMeasure::on_line(&[0.0], &[1.0]).unwrap()
    }

    fn dyadic(from: i32, to: i32) -> Vec<f64> {
        (from..=to).map(|j| 2f64.powi(j)).collect()
    }

    #[test]
    fn spherical_average_of_unit_atom() {
        for r in [0.1, 1.0, 77.0] {
            assert!((spherical_average(&unit_atom(), r, 2.0, 1).unwrap() - 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn spherical_average_of_real_measure_doubles_one_side() {
        let mu = AtomicMeasure::on_line(&[0.1, 0.45, 0.9], &[0.2, 0.5, 0.3]).unwrap();
        for r in [0.5, 3.0, 40.0] {
            let one = mu.transform(&[r]).unwrap().norm_sqr();
            assert!((spherical_average(&mu, r, 2.0, 1).unwrap() - 2.0 * one).abs() < 1e-14);
        }
    }

    #[test]
    fn planar_spherical_average_converges_in_angles() {
        // twelve atoms on a circle, a rotation-invariant pattern up to 30 degrees
        let locs: Vec<f64> = (0..12)
            .flat_map(|j| {
                let t = 2.0 * PI * j as f64 / 12.0;
                [0.5 * t.cos(), 0.5 * t.sin()]
            })
            .collect();
        let weights = vec![Complex64::new(1.0 / 12.0, 0.0); 12];
        let mu = AtomicMeasure::new(2, locs, weights).unwrap();
        let a = spherical_average(&mu, 10.0, 2.0, 256).unwrap();
        let b = spherical_average(&mu, 10.0, 2.0, 512).unwrap();
        assert!((a - b).abs() < 1e-6);
        assert!(matches!(
            spherical_average(&AtomicMeasure::new(3, vec![0.0; 3], vec![Complex64::new(1.0, 0.0)]).unwrap(), 1.0, 2.0, 8),
            Err(AsymptoticsError::UnsupportedDimension(3))
        ));
    }

    #[test]
    fn ball_average_of_unit_atom() {
        for l in [1.0, 10.0, 1234.5] {
            let v = ball_average(&unit_atom(), l, 2.0, 1.0, QuadratureSettings::default()).unwrap();
            assert!((v - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ball_average_parseval_limit() {
        // oracle: 2 sum |c|^2 for distinct frequencies, approached like 1/L
        let mu = AtomicMeasure::on_line(&[0.0, 0.3, 1.0], &[0.5, 0.25, 0.25]).unwrap();
        let target = 2.0 * (0.25 + 0.0625 + 0.0625);
        let v = ball_average(&mu, 1e4, 2.0, 1.0, QuadratureSettings::default()).unwrap();
        assert!((v - target).abs() < 2e-3 * target, "{v}");
    }

    #[test]
    fn nondecreasing_without_normalization() {
        let mu = IfsMeasure::cantor().cylinder_approx(5, DEFAULT_ATOM_BUDGET).unwrap();
        let s = ball_average_series(&mu, &dyadic(0, 9), 2.0, 0.0, QuadratureSettings::default()).unwrap();
        assert!(s.values.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn standalone_matches_series_entries() {
        let mu = IfsMeasure::cantor().cylinder_approx(6, DEFAULT_ATOM_BUDGET).unwrap();
        let grid = dyadic(4, 8);
        let settings = QuadratureSettings::default();
        let s = ball_average_series(&mu, &grid, 2.0, 0.4, settings).unwrap();
        for (l, v) in grid.iter().zip(&s.values) {
            let single = ball_average(&mu, *l, 2.0, 0.4, settings).unwrap();
            assert!((single - v).abs() < 1e-6 * v);
        }
    }

    #[test]
    fn rescaling_is_exact() {
        let mu = IfsMeasure::cantor().cylinder_approx(5, DEFAULT_ATOM_BUDGET).unwrap();
        let settings = QuadratureSettings::default();
        let a = ball_average_series(&mu, &dyadic(2, 8), 2.0, 0.0, settings).unwrap();
        let b = ball_average_series(&mu, &dyadic(2, 8), 2.0, 0.7, settings).unwrap();
        let r = a.rescaled(0.7);
        for (x, y) in r.values.iter().zip(&b.values) {
            assert!((x - y).abs() <= 1e-14 * y);
        }
    }

    #[test]
    fn quadrature_convergence_under_refinement() {
        let cantor = IfsMeasure::cantor();
        let u = SelfSimilarSpectrum::new(&cantor, 1e-12, 80);
        let coarse = QuadratureSettings::default();
        let fine = QuadratureSettings {
            radial_samples: 2 * coarse.radial_samples,
            samples_per_oscillation: 2.0 * coarse.samples_per_oscillation,
            ..coarse
        };
        let grid = dyadic(4, 10);
        let k = 1.0 - 2f64.ln() / 3f64.ln();
        let a = ball_average_series(&u, &grid, 2.0, k, coarse).unwrap();
        let b = ball_average_series(&u, &grid, 2.0, k, fine).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() < 1e-4 * y, "{x} vs {y}");
        }
    }

    #[test]
    fn gaussian_average_of_unit_atom() {
        let v = gaussian_average(&unit_atom(), 50.0, 2.0, 1.0, QuadratureSettings::default()).unwrap();
        assert!((v - (2.0 * PI).sqrt()).abs() < 1e-4);
    }

    #[test]
    fn gaussian_average_is_bounded_by_the_truncation_ball() {
        let mu = IfsMeasure::cantor().cylinder_approx(6, DEFAULT_ATOM_BUDGET).unwrap();
        let settings = QuadratureSettings::default();
        let k = 0.37;
        for l in [4.0, 32.0, 200.0] {
            let g = gaussian_average(&mu, l, 2.0, k, settings).unwrap();
            let b = ball_average(&mu, GAUSSIAN_CUTOFF * l, 2.0, k, settings).unwrap();
            assert!(g <= GAUSSIAN_CUTOFF.powf(k) * b + 1e-6 * g);
        }
    }

    #[test]
    fn holder_consistency_of_bands() {
        let mu = IfsMeasure::cantor().cylinder_approx(8, DEFAULT_ATOM_BUDGET).unwrap();
        let alpha = 2f64.ln() / 3f64.ln();
        let settings = QuadratureSettings::default();
        let grid = dyadic(3, 10);
        let two = ball_average_series(&mu, &grid, 2.0, 1.0 - alpha, settings).unwrap();
        assert!(two.limsup_est.is_finite() && two.liminf_est > 0.0);
        for p in [1.0, 1.5] {
            let s = ball_average_series(&mu, &grid, p, 1.0 - alpha * p / 2.0, settings).unwrap();
            assert!(s.limsup_est.is_finite() && s.liminf_est > 0.0);
        }
    }

    #[test]
    fn lau_b_norm_of_unit_atom() {
        let v = lau_b_norm(&unit_atom(), 0.0, 2.0, &dyadic(0, 6), QuadratureSettings::default()).unwrap();
        assert!((v - 2f64.sqrt()).abs() < 1e-12);
        assert!(matches!(
            lau_b_norm(&unit_atom(), 0.0, 2.0, &[0.5, 1.0], QuadratureSettings::default()),
            Err(AsymptoticsError::GridOutOfRange(_))
        ));
    }

    #[test]
    fn lau_b_norm_grows_with_the_grid() {
        let mu = IfsMeasure::cantor().cylinder_approx(6, DEFAULT_ATOM_BUDGET).unwrap();
        let s = QuadratureSettings::default();
        let alpha = 0.6;
        let small = lau_b_norm(&mu, alpha, 2.0, &dyadic(0, 4), s).unwrap();
        let large = lau_b_norm(&mu, alpha, 2.0, &dyadic(0, 8), s).unwrap();
        assert!(large >= small);
    }

    #[test]
    fn lau_m_norm_of_unit_atom() {
        let v = lau_m_norm(&unit_atom(), 0.0, 1.0, &[0.01, 0.1, 0.5, 1.0]).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn lau_m_norm_of_discretized_lebesgue() {
        let n = 1000;
        let pts: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let mu = AtomicMeasure::on_line(&pts, &vec![1.0 / n as f64; n]).unwrap();
        let v = lau_m_norm(&mu, 1.0, 1.0, &[0.05, 0.1, 0.2]).unwrap();
        assert!((v - 2.0).abs() < 1e-9);
        // p = 2: interior cubes carry mass 2 delta, so the norm is near sqrt(4) = 2
        let v2 = lau_m_norm(&mu, 1.0, 2.0, &[0.01]).unwrap();
        assert!((v2 - 2.0).abs() < 0.05, "{v2}");
    }

    #[test]
    fn lau_m_norm_is_homogeneous() {
        let mu = IfsMeasure::cantor().cylinder_approx(6, DEFAULT_ATOM_BUDGET).unwrap();
        let deltas = [0.01, 0.05, 0.3];
        let base = lau_m_norm(&mu, 0.63, 1.7, &deltas).unwrap();
        let scaled = lau_m_norm(&mu.scaled(Complex64::new(3.5, 0.0)), 0.63, 1.7, &deltas).unwrap();
        assert!((scaled / base - 3.5).abs() < 1e-12);
    }

    #[test]
    fn planar_lau_m_norm_of_unit_atom() {
        // |Q_delta| = 4 delta^2 in the plane
        let mu = AtomicMeasure::dirac(&[0.3, 0.1], Complex64::new(1.0, 0.0)).unwrap();
        let v = lau_m_norm(&mu, 0.0, 1.0, &[0.1, 0.7]).unwrap();
        assert!((v - 4.0).abs() < 1e-12);
    }

    #[test]
    fn series_validation() {
        assert_eq!(
            AsymptoticSeries::new(1.0, 2.0, vec![2.0, 1.0], vec![1.0, 1.0]),
            Err(AsymptoticsError::InvalidGrid)
        );
        assert!(AsymptoticSeries::new(1.0, 2.0, vec![1.0], vec![-1.0]).is_err());
        let s = AsymptoticSeries::new(1.0, 2.0, vec![1.0, 2.0, 4.0, 8.0, 16.0], vec![9.0, 1.0, 3.0, 2.0, 4.0]).unwrap();
        assert_eq!((s.liminf_est, s.limsup_est), (2.0, 4.0));
        assert_eq!(s.running_tail()[0], (9.0, 9.0));
        assert_eq!(s.running_tail()[4], (2.0, 4.0));
        let csv = s.to_csv(&["theorem lp-lower-bound".to_string()]);
        assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 6);
    }
}
