use std::f64::consts::PI;
use std::sync::Arc;

use flexhull::aggregate::{area_metric, distance_metric};
use flexhull::oracle::{area_ratio_mc, max_gap_sampled, sample_homothet};
use flexhull::prototype::{polygon_area, regular_prototype, Homothet};
use flexhull::Point;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// An inner homothet inside the outer one: `β̲ = β̄ + (ᾱ − α̲)u` with `u` in
/// the prototype.
fn nested(
    n: usize,
    rot: f64,
    alpha: f64,
    ratio: f64,
    beta: Point,
    seed: u64,
) -> (Homothet, Homothet) {
    let pr = Arc::new(regular_prototype(n, rot).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = sample_homothet(
        &Homothet::new(Arc::clone(&pr), 1.0, Point::ORIGIN),
        1,
        &mut rng,
    )[0];
    let inner_alpha = alpha * ratio;
    let outer = Homothet::new(Arc::clone(&pr), alpha, beta);
    let inner = Homothet::new(pr, inner_alpha, beta + u * (alpha - inner_alpha));
    (outer, inner)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nested_inner_is_inside(n in 3usize..10, rot in 0.0f64..PI, alpha in 0.1f64..10.0,
                              ratio in 0.05f64..1.0, bp in -20.0f64..20.0, bq in -20.0f64..20.0,
                              seed in any::<u64>()) {
        let (outer, inner) = nested(n, rot, alpha, ratio, Point::new(bp, bq), seed);
        for v in inner.vertices() {
            prop_assert!(outer.contains(v, 1e-9 * (1.0 + v.norm())));
        }
    }

    #[test]
    fn distance_bounds_the_sampled_gap(n in 3usize..10, rot in 0.0f64..PI, alpha in 0.1f64..10.0,
                                       ratio in 0.05f64..1.0, bp in -20.0f64..20.0,
                                       bq in -20.0f64..20.0, seed in any::<u64>()) {
        let (outer, inner) = nested(n, rot, alpha, ratio, Point::new(bp, bq), seed);
        let pd = distance_metric(&outer, &inner).unwrap();
        let gap = max_gap_sampled(&outer, &inner, 200, seed);
        prop_assert!(gap <= pd + 1e-9 * (1.0 + pd), "gap {} above bound {}", gap, pd);
    }

    #[test]
    fn distance_is_exact_for_squares(rot in 0.0f64..PI, alpha in 0.1f64..10.0, ratio in 0.05f64..1.0,
                                     bp in -20.0f64..20.0, bq in -20.0f64..20.0, seed in any::<u64>()) {
        let (outer, inner) = nested(4, rot, alpha, ratio, Point::new(bp, bq), seed);
        let pd = distance_metric(&outer, &inner).unwrap();
        let gap = max_gap_sampled(&outer, &inner, 0, seed);
        prop_assert!((pd - gap).abs() <= 1e-9 * (1.0 + pd));
    }

    #[test]
    fn area_metric_is_polygon_area_ratio(n in 3usize..12, rot in 0.0f64..PI, alpha in 0.1f64..10.0,
                                         ratio in 0.05f64..1.0, seed in any::<u64>()) {
        let (outer, inner) = nested(n, rot, alpha, ratio, Point::ORIGIN, seed);
        let pa = area_metric(&outer, &inner).unwrap();
        let want = polygon_area(&inner.vertices()) / polygon_area(&outer.vertices());
        prop_assert!((pa - want).abs() <= 1e-9);
        prop_assert!(pa > 0.0 && pa <= 1.0);
    }
}

#[test]
fn area_metric_matches_monte_carlo() {
    for (k, n) in [3, 4, 5, 6, 8].into_iter().enumerate() {
        let (outer, inner) = nested(n, 0.2 * k as f64, 2.0, 0.7, Point::new(1.0, -1.0), k as u64);
        let pa = area_metric(&outer, &inner).unwrap();
        let mc = area_ratio_mc(&outer, &inner, 100_000, 99 + k as u64);
        assert!((pa - mc).abs() / pa < 0.02, "{n}-gon: {pa} vs {mc}");
    }
}

#[test]
fn metrics_reject_inverted_pairs() {
    let (outer, inner) = nested(4, 0.0, 1.0, 0.5, Point::ORIGIN, 1);
    assert!(area_metric(&inner, &outer).is_err());
    assert!(distance_metric(&inner, &outer).is_err());
}
