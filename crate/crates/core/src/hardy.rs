//! Hardy-type functionals, Besicovitch means and per-inequality verdicts.
//!
//! A verdict divides a left-hand side by the lower band edge of a normalized
//! Fourier series. Since only finitely many radii are seen, "stable" means the
//! band over the last half of the grid is narrow, nothing more.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

use crate::asymptotics::{ball_average_series, AsymptoticSeries, AsymptoticsError, QuadratureSettings};
use crate::geometry::{cell_content_ratios, truncation_masses_at_atoms, GeometryError};
use crate::measures::{AtomicMeasure, WeightedMeasure};
use crate::numeric::pairwise_sum;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HardyError {
    #[error("inconsistent setup: {0}")]
    InvalidSetup(String),
    #[error(transparent)]
    Asymptotics(#[from] AsymptoticsError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

pub type Result<T> = std::result::Result<T, HardyError>;

/// Frequencies closer than this are one almost-periodic coefficient.
pub const FREQUENCY_MERGE_TOL: f64 = 1e-12;

/// Minimum samples per shortest beat period in Besicovitch quadrature.
pub const BESICOVITCH_SAMPLES_PER_BEAT: f64 = 8.0;

pub const DEFAULT_BAND_FACTOR: f64 = 8.0;

/// The inequalities the lab can test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TheoremId {
    /// `sum |c*_k|^p / k^(2-p) <= C lim L^-1 int_{-L}^{L} |u|^p`, `u = sum c_k e^(i a_k x)`.
    DiscreteHardy,
    /// `int |f|^p / mu(E_x)^(2-p) dmu <= C liminf L^-(n-alpha) int_{B_L} |(f dmu)^|^p`.
    FractalHardy,
    /// `int |f|^2 dmu <= C liminf L^-(n-alpha) int_{B_L} |(f dmu)^|^p` for sets with bounded content.
    ContentLowerBound,
    /// `int |f|^2 dmu <= C liminf (L^-(n - alpha p/2) int_{B_L} |(f dmu)^|^p)^(2/p)`.
    LpLowerBound,
    /// `(int |u_0|^2 dmu)^(p/2) <= C L^-(n - alpha p/2) int_{B_L} |u^|^p` in the band.
    L2Density,
}

impl TheoremId {
    pub const ALL: [TheoremId; 5] = [
        TheoremId::DiscreteHardy,
        TheoremId::FractalHardy,
        TheoremId::ContentLowerBound,
        TheoremId::LpLowerBound,
        TheoremId::L2Density,
    ];

    pub fn label(self) -> &'static str {
        match self {
            TheoremId::DiscreteHardy => "discrete-hardy",
            TheoremId::FractalHardy => "fractal-hardy",
            TheoremId::ContentLowerBound => "content-lower-bound",
            TheoremId::LpLowerBound => "lp-lower-bound",
            TheoremId::L2Density => "l2-density",
        }
    }

    /// Hardy forms take `p in [1,2]`; the lower bounds take `p in [2, 2n/alpha)`.
    pub fn is_hardy(self) -> bool {
        matches!(self, TheoremId::DiscreteHardy | TheoremId::FractalHardy)
    }

    /// Normalization exponent `k` of the right-hand series.
    pub fn exponent(self, n: usize, alpha: f64, p: f64) -> f64 {
        let n = n as f64;
        match self {
            TheoremId::DiscreteHardy => n,
            TheoremId::FractalHardy | TheoremId::ContentLowerBound => n - alpha,
            TheoremId::LpLowerBound | TheoremId::L2Density => n - alpha * p / 2.0,
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for TheoremId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        TheoremId::ALL.into_iter().find(|t| t.label() == s).ok_or_else(|| {
            let known: Vec<&str> = TheoremId::ALL.iter().map(|t| t.label()).collect();
            format!("unknown theorem '{s}' (expected one of {})", known.join(", "))
        })
    }
}

/// `|c_k|` sorted descending.
pub fn nonincreasing_rearrangement(c: &[Complex64]) -> Vec<f64> {
    let mut moduli: Vec<f64> = c.iter().map(|z| z.norm()).collect();
    moduli.sort_by(|a, b| b.total_cmp(a));
    moduli
}

/// `sum_k (c*_k)^p / k^(2-p)` over the nonincreasing rearrangement.
///
/// Panics unless `1 <= p <= 2`.
pub fn hardy_sum(c: &[Complex64], p: f64) -> f64 {
    assert!((1.0..=2.0).contains(&p), "hardy_sum needs p in [1,2], got {p}");
    let terms: Vec<f64> = nonincreasing_rearrangement(c)
        .into_iter()
        .enumerate()
        .map(|(k, c)| c.powf(p) / ((k + 1) as f64).powf(2.0 - p))
        .collect();
    pairwise_sum(&terms)
}

/// Sorts atoms on the line and merges those within [`FREQUENCY_MERGE_TOL`] of
/// their left neighbour, summing coefficients. Returns the merge count too.
pub fn merge_frequencies(u: &AtomicMeasure) -> Result<(AtomicMeasure, usize)> {
    if u.dim() != 1 {
        return Err(HardyError::InvalidSetup(format!(
            "almost-periodic sums live on the line, got dimension {}",
            u.dim()
        )));
    }
    let mut order: Vec<usize> = (0..u.len()).collect();
    order.sort_by(|&a, &b| u.locations()[a].total_cmp(&u.locations()[b]));
    let mut locs: Vec<f64> = Vec::with_capacity(u.len());
    let mut weights: Vec<Complex64> = Vec::with_capacity(u.len());
    let mut merged = 0;
    for i in order {
        let a = u.locations()[i];
        match locs.last() {
            Some(&prev) if a - prev <= FREQUENCY_MERGE_TOL => {
                *weights.last_mut().expect("paired with locs") += u.weights()[i];
                merged += 1;
            }
            _ => {
                locs.push(a);
                weights.push(u.weights()[i]);
            }
        }
    }
    let out = AtomicMeasure::new(1, locs, weights).map_err(|e| HardyError::InvalidSetup(e.to_string()))?;
    Ok((out, merged))
}

/// `L^-1 int_{-L}^{L} |sum c_k e^(i a_k x)|^p dx` over the grid, with the atoms
/// of `u` read as frequencies `a_k` and weights `c_k`.
pub fn besicovitch_norm(
    u: &AtomicMeasure,
    p: f64,
    l_grid: &[f64],
    settings: QuadratureSettings,
) -> Result<AsymptoticSeries> {
    let (merged, count) = merge_frequencies(u)?;
    if count > 0 {
        log::warn!("merged {count} coinciding frequencies before Besicovitch quadrature");
    }
    let settings = QuadratureSettings {
        samples_per_oscillation: settings.samples_per_oscillation.max(BESICOVITCH_SAMPLES_PER_BEAT),
        ..settings
    };
    // the line integral of |u(x)|^p is the ball integral of the transform of sum c_k delta_{a_k}
    Ok(ball_average_series(&merged, l_grid, p, 1.0, settings)?)
}

/// `sum_i f_i^p w_i / m_i^(2-p)` given density, weights and truncation masses.
pub fn fractal_hardy_sum(density: &[f64], weights: &[f64], masses: &[f64], p: f64) -> f64 {
    let terms: Vec<f64> = density
        .iter()
        .zip(weights)
        .zip(masses)
        .map(|((f, w), m)| f.powf(p) * w / m.powf(2.0 - p))
        .collect();
    pairwise_sum(&terms)
}

fn positive_weights(measure: &WeightedMeasure) -> Result<Vec<f64>> {
    if !measure.base().is_positive() {
        return Err(HardyError::InvalidSetup("measure weights must be real and nonnegative".into()));
    }
    Ok(measure.base().weights().iter().map(|w| w.re).collect())
}

/// `int |f|^p / mu(E_x)^(2-p) dmu` with `E_x` the lower-left corner set of `x`.
pub fn fractal_hardy_lhs(measure: &WeightedMeasure, p: f64) -> Result<f64> {
    let weights = positive_weights(measure)?;
    let masses = truncation_masses_at_atoms(measure.base())?;
    Ok(fractal_hardy_sum(measure.density(), &weights, &masses, p))
}

/// `int |f|^2 dmu`.
pub fn density_l2_sq(measure: &WeightedMeasure) -> Result<f64> {
    let weights = positive_weights(measure)?;
    let terms: Vec<f64> = measure.density().iter().zip(&weights).map(|(f, w)| f * f * w).collect();
    Ok(pairwise_sum(&terms))
}

/// One inequality test: the measure, its dimension and the right-hand grid.
#[derive(Debug, Clone, PartialEq)]
pub struct HardySetup {
    pub theorem: TheoremId,
    /// `f dmu`; for the discrete inequality, atoms are the frequencies `a_k`
    /// and `f_k w_k` the coefficients `c_k`.
    pub measure: WeightedMeasure,
    pub alpha: f64,
    pub p: f64,
    pub l_grid: Vec<f64>,
    pub quadrature: QuadratureSettings,
    pub band_factor: f64,
}

impl HardySetup {
    pub fn new(theorem: TheoremId, measure: WeightedMeasure, alpha: f64, p: f64, l_grid: Vec<f64>) -> Result<Self> {
        let setup = Self {
            theorem,
            measure,
            alpha,
            p,
            l_grid,
            quadrature: QuadratureSettings::default(),
            band_factor: DEFAULT_BAND_FACTOR,
        };
        setup.validate()?;
        Ok(setup)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HardyError::InvalidSetup(msg));
        let n = self.measure.base().dim();
        let label = self.theorem.label();
        if self.theorem.is_hardy() {
            if !(1.0..=2.0).contains(&self.p) {
                return bad(format!("p = {} violates p in [1,2] required by {label}", self.p));
            }
        } else {
            let top = 2.0 * n as f64 / self.alpha;
            if !(self.p >= 2.0 && self.p < top) {
                return bad(format!("p = {} violates p in [2, 2n/alpha) = [2, {top}) required by {label}", self.p));
            }
        }
        if self.theorem == TheoremId::DiscreteHardy {
            if n != 1 {
                return bad(format!("{label} needs frequencies on the line, got dimension {n}"));
            }
        } else {
            if !(self.alpha > 0.0 && self.alpha < n as f64) {
                return bad(format!("alpha = {} violates alpha in (0, n) = (0, {n}) required by {label}", self.alpha));
            }
            if !self.measure.base().is_positive() {
                return bad(format!("{label} needs a positive measure"));
            }
            if n > 2 {
                return bad(format!("{label} is computed in dimensions 1 and 2 only, got {n}"));
            }
        }
        if self.l_grid.is_empty() || self.l_grid.windows(2).any(|w| !(w[1] > w[0])) || !(self.l_grid[0] > 0.0) {
            return bad("L grid must be nonempty, positive and strictly increasing".into());
        }
        if !(self.band_factor >= 1.0) {
            return bad(format!("band factor {} must be at least 1", self.band_factor));
        }
        Ok(())
    }
}

/// Outcome of one inequality test.
#[derive(Debug, Clone, PartialEq)]
pub struct VerdictReport {
    pub theorem: TheoremId,
    pub p: f64,
    pub alpha: f64,
    pub lhs: f64,
    pub rhs_series: AsymptoticSeries,
    /// `lhs / liminf_est`, or `lhs / liminf_est^(2/p)` for the Lp lower bound.
    pub empirical_c: f64,
    pub stable: bool,
    pub band_factor: f64,
    pub notes: Vec<String>,
}

impl VerdictReport {
    pub const CSV_HEADER: &'static str =
        "theorem,p,alpha,exponent_k,lhs,liminf_est,limsup_est,band_ratio,empirical_c,stable";

    pub fn csv_row(&self) -> String {
        let s = &self.rhs_series;
        format!(
            "{},{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{}",
            self.theorem,
            self.p,
            self.alpha,
            s.exponent_k,
            self.lhs,
            s.liminf_est,
            s.limsup_est,
            s.band_ratio(),
            self.empirical_c,
            self.stable
        )
    }

    pub fn text(&self) -> String {
        let s = &self.rhs_series;
        let mut out = String::new();
        let _ = writeln!(out, "inequality    {}", self.theorem);
        let _ = writeln!(out, "p             {}", self.p);
        let _ = writeln!(out, "alpha         {:.12}", self.alpha);
        let _ = writeln!(out, "exponent k    {:.12}", s.exponent_k);
        let _ = writeln!(out, "lhs           {:.12e}", self.lhs);
        let _ = writeln!(out, "rhs band      [{:.12e}, {:.12e}] over L in [{}, {}]", s.liminf_est, s.limsup_est, s.l_values[0], s.l_values[s.len() - 1]);
        let _ = writeln!(out, "band ratio    {:.6} (allowed {})", s.band_ratio(), self.band_factor);
        let _ = writeln!(out, "empirical C   {:.12e}", self.empirical_c);
        let _ = writeln!(out, "stable        {}", self.stable);
        for note in &self.notes {
            let _ = writeln!(out, "note: {note}");
        }
        out
    }
}

/// Computes both sides of the selected inequality and the empirical constant.
pub fn verify_inequality(setup: &HardySetup) -> Result<VerdictReport> {
    setup.validate()?;
    let measure = &setup.measure;
    let n = measure.base().dim();
    let p = setup.p;
    let k = setup.theorem.exponent(n, setup.alpha, p);
    let mut notes = Vec::new();

    let (lhs, rhs_series) = match setup.theorem {
        TheoremId::DiscreteHardy => {
            let u = measure.product_measure();
            let lhs = hardy_sum(u.weights(), p);
            (lhs, besicovitch_norm(&u, p, &setup.l_grid, setup.quadrature)?)
        }
        theorem => {
            let lhs = match theorem {
                TheoremId::FractalHardy => fractal_hardy_lhs(measure, p)?,
                TheoremId::L2Density => density_l2_sq(measure)?.powf(p / 2.0),
                _ => density_l2_sq(measure)?,
            };
            (lhs, ball_average_series(measure, &setup.l_grid, p, k, setup.quadrature)?)
        }
    };

    let denominator = match setup.theorem {
        TheoremId::LpLowerBound => {
            notes.push("empirical C divides by liminf_est^(2/p)".into());
            rhs_series.liminf_est.powf(2.0 / p)
        }
        TheoremId::L2Density => {
            notes.push("lhs is (int |f|^2 dmu)^(p/2); compared against the lower band edge".into());
            rhs_series.liminf_est
        }
        _ => rhs_series.liminf_est,
    };
    let empirical_c = if denominator > 0.0 { lhs / denominator } else { f64::INFINITY };
    let stable = empirical_c.is_finite() && rhs_series.band_ratio() <= setup.band_factor;
    notes.push(format!(
        "liminf/limsup are min/max over the last {} of {} grid radii, a finite-L proxy",
        rhs_series.len().div_ceil(2),
        rhs_series.len()
    ));
    notes.push("no reference value of C is known; empirical C is an observation".into());
    Ok(VerdictReport {
        theorem: setup.theorem,
        p,
        alpha: setup.alpha,
        lhs,
        rhs_series,
        empirical_c,
        stable,
        band_factor: setup.band_factor,
        notes,
    })
}

/// Spot-check of the bounded-content hypothesis on the cells of a `2^level`
/// grid, summarized as one note line.
pub fn hypothesis_note(measure: &AtomicMeasure, alpha: f64, level: u32, epsilons: &[f64]) -> String {
    match cell_content_ratios(measure, alpha, level, epsilons) {
        Ok(cells) if !cells.is_empty() => {
            let lo = cells.iter().map(|c| c.ratio).fold(f64::INFINITY, f64::min);
            let hi = cells.iter().map(|c| c.ratio).fold(0.0, f64::max);
            format!(
                "content/mass over {} level-{level} grid cells in [{lo:.4e}, {hi:.4e}] (grid cells only, not all subsets)",
                cells.len()
            )
        }
        Ok(_) => "hypothesis spot-check found no charged cells".into(),
        Err(e) => format!("hypothesis spot-check skipped: {e}"),
    }
}
