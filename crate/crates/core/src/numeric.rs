//! Order-stable summation and composite quadrature helpers.
//!
//! Every reduction in the crate goes through [`pairwise_sum`] over a vector
//! whose element order is fixed by index, never by thread scheduling. Parallel
//! work is a `par_iter().map().collect()` followed by a sequential reduction,
//! which keeps results bit-identical for any thread count.

use rayon::prelude::*;

const PAIRWISE_BLOCK: usize = 16;

/// Pairwise (cascade) summation with a fixed split point.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= PAIRWISE_BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Evaluates `f(i)` for `i in 0..count` in parallel, preserving index order.
pub fn sample_indexed<E, F>(count: usize, f: F) -> Result<Vec<f64>, E>
where
    E: Send,
    F: Fn(usize) -> Result<f64, E> + Sync + Send,
{
    (0..count).into_par_iter().map(f).collect()
}

/// Composite Simpson rule over `2m + 1` equispaced samples with spacing `h`.
///
/// Panics if `samples.len()` is even or smaller than 3.
pub fn simpson(samples: &[f64], h: f64) -> f64 {
    assert!(
        samples.len() >= 3 && samples.len() % 2 == 1,
        "simpson needs an odd sample count >= 3, got {}",
        samples.len()
    );
    let last = samples.len() - 1;
    let weighted: Vec<f64> = samples
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let w = if i == 0 || i == last {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * v
        })
        .collect();
    pairwise_sum(&weighted) * h / 3.0
}

/// Per-panel Simpson contributions: entry `j` integrates `[2j h, (2j+2) h]`.
pub fn simpson_panels(samples: &[f64], h: f64) -> Vec<f64> {
    samples
        .windows(3)
        .step_by(2)
        .map(|w| (w[0] + 4.0 * w[1] + w[2]) * h / 3.0)
        .collect()
}

/// Smallest even number of intervals of width at most `max_step` covering `length`.
pub fn even_intervals(length: f64, max_step: f64, minimum: usize) -> usize {
    let raw = (length / max_step).ceil();
    let n = if raw.is_finite() && raw > 0.0 { raw as usize } else { 0 };
    let n = n.max(minimum).max(2);
    n + n % 2
}

/// `count` values `start * ratio^j`.
pub fn geometric_grid(start: f64, ratio: f64, count: usize) -> Vec<f64> {
    (0..count).map(|j| start * ratio.powi(j as i32)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_small_input() {
        let v: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(pairwise_sum(&v), 55.0);
    }

    #[test]
    fn pairwise_is_accurate_on_long_input() {
        let v = vec![0.1; 1_000_000];
        assert!((pairwise_sum(&v) - 100_000.0).abs() < 1e-8);
    }

    #[test]
    fn simpson_is_exact_for_cubics() {
        let h = 0.25;
        let samples: Vec<f64> = (0..=8)
            .map(|i| {
                let x = i as f64 * h;
                x * x * x - 2.0 * x
            })
            .collect();
        // integral over [0, 2] of x^3 - 2x = 4 - 4 = 0
        assert!(simpson(&samples, h).abs() < 1e-14);
        let panels = simpson_panels(&samples, h);
        assert_eq!(panels.len(), 4);
        assert!((pairwise_sum(&panels) - simpson(&samples, h)).abs() < 1e-14);
    }

    #[test]
    fn even_intervals_rounds_up() {
        assert_eq!(even_intervals(1.0, 0.3, 2), 4);
        assert_eq!(even_intervals(1.0, 0.5, 2), 2);
        assert_eq!(even_intervals(1.0, 0.5, 64), 64);
        assert_eq!(even_intervals(1.0, 0.5, 65), 66);
    }
}
