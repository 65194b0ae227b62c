use dgd_core::analysis::factored_gap;
use dgd_core::domains::meal_target_distribution;
use proptest::prelude::*;

#[test]
fn meal_gap_matches_closed_form() {
    let r = factored_gap(&meal_target_distribution()).unwrap();
    // Optimum puts Pr(vodka) = Pr(pickles) = 1 - √0.9.
    let expected = 0.1 - (1.0 - 0.9f64.sqrt()).powi(2);
    assert!(r.distance > 0.05);
    assert!((r.distance - expected).abs() < 1e-6, "{r:?}");
    let mass: f64 = r.product.iter().flatten().sum();
    assert!((mass - 1.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn products_have_no_gap(p in 0.0f64..=1.0, q in 0.0f64..=1.0) {
        let target = [[p * q, p * (1.0 - q)], [(1.0 - p) * q, (1.0 - p) * (1.0 - q)]];
        let r = factored_gap(&target).unwrap();
        prop_assert!(r.distance < 1e-6, "{:?}", r);
    }
}
