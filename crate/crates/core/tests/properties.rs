use num_complex::Complex64;
use proptest::prelude::*;

use fraclab::asymptotics::{ball_average_series, QuadratureSettings};
use fraclab::fourier::{ft_atomic, ft_self_similar, ft_self_similar_tree, TransformRequest};
use fraclab::geometry::{
    covering_number, neighborhood_volume, packing_number, truncation_mass, unit_ball_volume, PointCloud,
};
use fraclab::measures::{similarity_dimension, AtomicMeasure, IfsMeasure, Similitude, DEFAULT_ATOM_BUDGET};

/// A line IFS with ratios summing below one, so its dimension is at most 1.
fn line_ifs() -> impl Strategy<Value = IfsMeasure> {
    (2usize..=4)
        .prop_flat_map(|m| {
            (
                prop::collection::vec(0.2f64..1.0, m),
                prop::collection::vec(-3.0f64..3.0, m),
                prop::collection::vec(0.1f64..1.0, m),
                prop::collection::vec(any::<bool>(), m),
            )
        })
        .prop_map(|(raw, shifts, w, flips)| {
            let total: f64 = raw.iter().sum::<f64>() * 1.05;
            let weight_sum: f64 = w.iter().sum();
            let maps = raw
                .iter()
                .zip(&shifts)
                .zip(&flips)
                .map(|((r, b), f)| {
                    if *f {
                        Similitude::line_flipped(r / total, *b).unwrap()
                    } else {
                        Similitude::line(r / total, *b).unwrap()
                    }
                })
                .collect();
            let weights = w.iter().map(|v| v / weight_sum).collect();
            IfsMeasure::new(maps, Some(weights), None, false).unwrap()
        })
}

fn cloud(n: usize) -> impl Strategy<Value = PointCloud> {
    prop::collection::vec(-1.0f64..1.0, n..=40 * n)
        .prop_map(move |mut v| {
            v.truncate(v.len() / n * n);
            PointCloud::new(n, v).unwrap()
        })
}

fn positive_atoms(n: usize) -> impl Strategy<Value = AtomicMeasure> {
    prop::collection::vec((prop::collection::vec(-1.0f64..1.0, n), 0.01f64..1.0), 1..30).prop_map(move |atoms| {
        let locs = atoms.iter().flat_map(|(x, _)| x.clone()).collect();
        let weights = atoms.iter().map(|(_, w)| Complex64::new(*w, 0.0)).collect();
        AtomicMeasure::new(n, locs, weights).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cylinders_are_self_similar(ifs in line_ifs(), depth in 0u32..5) {
        let coarse = ifs.cylinder_approx(depth, DEFAULT_ATOM_BUDGET).unwrap();
        let fine = ifs.cylinder_approx(depth + 1, DEFAULT_ATOM_BUDGET).unwrap();
        let block = coarse.len();
        for (j, (map, p)) in ifs.maps().iter().zip(ifs.weights()).enumerate() {
            for i in 0..block {
                prop_assert_eq!(map.apply(coarse.location(i)), fine.location(j * block + i).to_vec());
                prop_assert_eq!(coarse.weights()[i] * p, fine.weights()[j * block + i]);
            }
        }
    }

    #[test]
    fn dimension_ignores_translations(ifs in line_ifs(), lambda in -50.0f64..50.0) {
        let moved: Vec<Similitude> = ifs
            .maps()
            .iter()
            .map(|m| Similitude::new(m.ratio(), m.rotation().to_vec(), vec![lambda * m.translation()[0]]).unwrap())
            .collect();
        prop_assert_eq!(similarity_dimension(&moved).unwrap(), ifs.dimension());
        prop_assert!(ifs.moran_residual() <= 1e-10);
    }

    #[test]
    fn truncation_mass_is_monotone(mu in positive_atoms(2), x in -1.2f64..1.2, y in -1.2f64..1.2, dx in 0.0f64..1.0, dy in 0.0f64..1.0) {
        let base = truncation_mass(&mu, &[x, y]).unwrap();
        prop_assert!(truncation_mass(&mu, &[x + dx, y]).unwrap() >= base);
        prop_assert!(truncation_mass(&mu, &[x, y + dy]).unwrap() >= base);
    }

    #[test]
    fn volume_is_monotone_in_epsilon(c in cloud(2), eps in 0.01f64..0.3, grow in 1.0f64..2.0) {
        let small = neighborhood_volume(&c, eps, eps / 16.0).unwrap();
        let large = neighborhood_volume(&c, eps * grow, eps / 16.0).unwrap();
        prop_assert!(large >= small);
    }

    #[test]
    fn line_volume_scales_exactly(c in cloud(1), eps in 0.001f64..0.5, lambda in 0.1f64..10.0) {
        let v = neighborhood_volume(&c, eps, eps / 4.0).unwrap();
        let scaled = neighborhood_volume(&c.scaled(lambda), lambda * eps, lambda * eps / 4.0).unwrap();
        prop_assert!((scaled - lambda * v).abs() <= 1e-12 * scaled);
    }

    #[test]
    fn planar_volume_scales(c in cloud(2), eps in 0.02f64..0.3, lambda in 0.2f64..5.0) {
        let v = neighborhood_volume(&c, eps, eps / 16.0).unwrap();
        let scaled = neighborhood_volume(&c.scaled(lambda), lambda * eps, lambda * eps / 16.0).unwrap();
        prop_assert!((scaled - lambda * lambda * v).abs() <= 1e-12 * scaled);
    }

    #[test]
    fn covering_packing_sandwich(c in cloud(2), eps in 0.01f64..0.5) {
        let n_e = covering_number(&c, eps).unwrap();
        let p_e = packing_number(&c, eps).unwrap();
        prop_assert!(covering_number(&c, 2.0 * eps).unwrap() <= p_e);
        prop_assert!(p_e <= covering_number(&c, eps / 2.0).unwrap());
        let volume = neighborhood_volume(&c, eps, eps / 64.0).unwrap();
        let omega = unit_ball_volume(2);
        // equality when all points are 2 eps apart, so allow rounding only
        let slack = 1.0 + 1e-12;
        prop_assert!(omega * p_e as f64 * eps * eps <= volume * slack);
        prop_assert!(volume <= omega * n_e as f64 * 4.0 * eps * eps * slack);
    }

    #[test]
    fn conjugate_symmetry_is_exact(mu in positive_atoms(2), a in -100.0f64..100.0, b in -100.0f64..100.0) {
        let plus = ft_atomic(&mu, &[a, b]).unwrap();
        let minus = ft_atomic(&mu, &[-a, -b]).unwrap();
        prop_assert_eq!(minus, plus.conj());
    }

    #[test]
    fn positive_transforms_peak_at_zero(mu in positive_atoms(1), xi in -1e4f64..1e4) {
        let zero = ft_atomic(&mu, &[0.0]).unwrap().re;
        prop_assert!(ft_atomic(&mu, &[xi]).unwrap().norm() <= zero * (1.0 + 1e-12));
    }

    #[test]
    fn self_similar_matches_cylinder_sums(ifs in line_ifs(), depth in 1u32..7, xi in -200.0f64..200.0) {
        let tol = 1e-12;
        let exact = ft_self_similar(&ifs, &TransformRequest::new(vec![xi], tol, 400)).unwrap();
        let approx = ft_atomic(&ifs.cylinder_approx(depth, DEFAULT_ATOM_BUDGET).unwrap(), &[xi]).unwrap();
        let s_max = ifs.maps().iter().map(|m| m.ratio()).fold(0.0, f64::max);
        let bound = tol + ifs.bounding_box().diameter() * s_max.powi(depth as i32) * xi.abs();
        prop_assert!((exact - approx).norm() <= bound + 1e-12, "{} > {}", (exact - approx).norm(), bound);
    }

    #[test]
    fn product_and_tree_agree_on_equal_ratios(m in 2usize..5, xi in -1e3f64..1e3) {
        let ratio = 0.9 / m as f64;
        let maps = (0..m).map(|j| Similitude::line(ratio, j as f64 / m as f64).unwrap()).collect();
        let ifs = IfsMeasure::new(maps, None, None, true).unwrap();
        let req = TransformRequest::new(vec![xi], 1e-13, 200);
        let a = ft_self_similar(&ifs, &req).unwrap();
        let b = ft_self_similar_tree(&ifs, &req).unwrap();
        prop_assert!((a - b).norm() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn unnormalized_ball_integral_is_monotone(mu in positive_atoms(1)) {
        let grid: Vec<f64> = (0..8).map(|j| 2f64.powi(j)).collect();
        let s = ball_average_series(&mu, &grid, 1.5, 0.0, QuadratureSettings::default()).unwrap();
        prop_assert!(s.values.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn exponent_change_is_an_exact_rescaling(mu in positive_atoms(1), k in 0.0f64..1.0, dk in -0.5f64..0.5) {
        let grid: Vec<f64> = (2..7).map(|j| 2f64.powi(j)).collect();
        let settings = QuadratureSettings::default();
        let a = ball_average_series(&mu, &grid, 2.0, k, settings).unwrap();
        let b = ball_average_series(&mu, &grid, 2.0, k + dk, settings).unwrap();
        for ((l, x), y) in grid.iter().zip(&a.values).zip(&b.values) {
            prop_assert!((x * l.powf(-dk) - y).abs() <= 1e-13 * y.max(1e-300));
        }
    }
}
