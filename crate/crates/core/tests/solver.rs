use equipart::geometry::{random_convex_polygon, ConvexPolygon, Point2};
use equipart::iterated::{PartitionType, SiteTree};
use equipart::measure::DensityField;
use equipart::power::SiteConfiguration;
use equipart::solver::{objective, perturb_tree, repair_collisions, solve_nrr, NrrOptions, REPAIR_SEPARATION};
use equipart::wreath::{act_on_tree, enumerate_group};
use proptest::prelude::*;

fn uniform() -> DensityField {
    DensityField::uniform(1.0).unwrap()
}

fn ty(s: &str) -> PartitionType {
    s.parse().unwrap()
}

fn tree_22() -> SiteTree {
    let flat: Vec<Point2> = [(0.2, 0.3), (0.3, 0.8), (0.7, 0.1), (0.9, 0.6), (0.35, 0.45), (0.6, 0.55)]
        .iter()
        .map(|&(x, y)| Point2::new(x, y))
        .collect();
    SiteTree::from_flat(&ty("2,2"), &flat).unwrap()
}

#[test]
fn reports_are_deterministic() {
    let body = random_convex_polygon(5, 6, 1.0).unwrap();
    let opts = NrrOptions { seed: 3, restarts: 2, ..NrrOptions::default() };
    let a = solve_nrr(&body, &uniform(), &ty("2"), &opts).unwrap();
    let b = solve_nrr(&body, &uniform(), &ty("2"), &opts).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn reports_do_not_depend_on_jobs() {
    let body = ConvexPolygon::unit_square();
    let base = NrrOptions { seed: 11, restarts: 6, tol: 1e-4, budget: 400, ..NrrOptions::default() };
    let one = solve_nrr(&body, &uniform(), &ty("2,2"), &base).unwrap();
    let four = solve_nrr(&body, &uniform(), &ty("2,2"), &NrrOptions { jobs: 4, ..base }).unwrap();
    assert_eq!(serde_json::to_string(&one).unwrap(), serde_json::to_string(&four).unwrap());
}

#[test]
fn objective_invariant_under_wreath_action() {
    let body = ConvexPolygon::unit_square();
    let tree = tree_22();
    let f0 = objective(&body, &uniform(), &tree);
    assert!(f0.is_finite() && f0 > 0.0);
    for g in enumerate_group(&ty("2,2"), 100).unwrap() {
        let f = objective(&body, &uniform(), &act_on_tree(&g, &tree).unwrap());
        assert!((f - f0).abs() <= 1e-9 * f0.max(1e-12), "{f} vs {f0}");
    }
}

#[test]
fn report_fields_consistent() {
    let body = random_convex_polygon(4, 6, 1.0).unwrap();
    let r = solve_nrr(
        &body,
        &uniform(),
        &ty("3"),
        &NrrOptions { seed: 1, restarts: 4, tol: 1e-5, ..NrrOptions::default() },
    )
    .unwrap();
    assert_eq!(r.leaf_perimeters.len(), 3);
    assert_eq!(r.leaf_areas.len(), 3);
    let spread = r.leaf_perimeters.iter().cloned().fold(f64::MIN, f64::max)
        - r.leaf_perimeters.iter().cloned().fold(f64::MAX, f64::min);
    assert!((spread - r.perimeter_spread).abs() < 1e-15);
    assert_eq!(r.success, r.perimeter_spread <= 1e-5);
    for a in &r.leaf_areas {
        assert!((a - body.area() / 3.0).abs() < 1e-9);
    }
    assert!(r.restarts_used >= 1 && r.restarts_used <= 4);
    assert_eq!(r.best_tree.partition_type().unwrap(), ty("3"));
    let back: equipart::SolveReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
    assert_eq!(back.leaf_perimeters, r.leaf_perimeters);
}

#[test]
fn invalid_options_rejected() {
    let body = ConvexPolygon::unit_square();
    for opts in [
        NrrOptions { restarts: 0, ..NrrOptions::default() },
        NrrOptions { jobs: 0, ..NrrOptions::default() },
        NrrOptions { tol: -1.0, ..NrrOptions::default() },
    ] {
        assert!(solve_nrr(&body, &uniform(), &ty("2"), &opts).is_err(), "{opts:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn repair_separates_points(seed in any::<u64>(), n in 2usize..8) {
        let mut pts: Vec<Point2> = (0..n).map(|i| Point2::new(0.5 + (i % 2) as f64 * 1e-12, 0.5 + (seed % 7) as f64 * 1e-13)).collect();
        repair_collisions(&mut pts);
        prop_assert!(SiteConfiguration::new(pts.clone()).is_ok());
        for i in 0..n {
            for j in (i + 1)..n {
                prop_assert!(pts[i].dist(pts[j]) >= REPAIR_SEPARATION);
            }
        }
    }

    #[test]
    fn perturbation_is_bounded(seed in any::<u64>(), mag in 1e-6f64..1e-2) {
        let tree = tree_22();
        let moved = perturb_tree(&tree, seed, mag).unwrap();
        for (a, b) in tree.flatten().iter().zip(moved.flatten()) {
            prop_assert!(a.dist(b) <= mag * (1.0 + 1e-12));
        }
        prop_assert_eq!(perturb_tree(&tree, seed, mag).unwrap(), moved);
    }
}
