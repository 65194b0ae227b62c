use dgd_core::analysis::{exact_gradient_all, exact_value, verify_nash, Deviation, DeviationScope, NashClass};
use dgd_core::domains::{
    build_coordination_game, build_local_optimum_game, coordination_profile, local_optimum_profile,
};

const GAMMA: f64 = 0.99;

fn classify(p1: f64, p2: f64, q: f64) -> NashClass {
    let game = build_coordination_game();
    verify_nash(&game, &coordination_profile(p1, p2, q), GAMMA)
        .unwrap()
        .classification
}

#[test]
fn optimal_corners_are_strict() {
    assert_eq!(classify(1.0, 1.0, 1.0), NashClass::StrictNash);
    assert_eq!(classify(1.0, 0.0, 0.0), NashClass::StrictNash);
}

#[test]
fn safe_branch_band() {
    for q in [0.3, 0.5, 0.7] {
        assert!(classify(0.0, 0.5, q).is_nash(), "q={q}");
    }
    for q in [0.25, 0.75] {
        assert_eq!(classify(0.0, 0.5, q), NashClass::WeakNash, "q={q}");
    }
    for q in [0.1, 0.9] {
        assert_eq!(classify(0.0, 0.5, q), NashClass::NotNash, "q={q}");
    }
}

#[test]
fn witness_for_q_point_nine() {
    let game = build_coordination_game();
    let report = verify_nash(&game, &coordination_profile(0.0, 0.5, 0.9), GAMMA).unwrap();
    assert_eq!(report.scope, DeviationScope::Complete);
    match report.witness.unwrap() {
        Deviation::Deterministic {
            agent, actions, value, ..
        } => {
            assert_eq!(agent, 0);
            assert_eq!(actions[0], 0, "deviator takes the coordination branch");
            assert_eq!(actions[1], 0, "and matches the likelier action");
            // 10 (2q - 1) = 8 paid one step later.
            assert!((value - GAMMA * 8.0).abs() < 1e-9, "{value}");
        }
        other => panic!("unexpected witness {other:?}"),
    }
    assert!((report.value - GAMMA * 5.0).abs() < 1e-9);
}

#[test]
fn strict_profiles_are_stationary() {
    let game = build_coordination_game();
    for (p1, p2, q) in [(1.0, 1.0, 1.0), (1.0, 0.0, 0.0), (0.0, 0.5, 0.5)] {
        let profile = coordination_profile(p1, p2, q);
        let report = verify_nash(&game, &profile, GAMMA).unwrap();
        if report.classification == NashClass::StrictNash {
            let grad = exact_gradient_all(&game, &profile, GAMMA).unwrap();
            let norm = grad.iter().flatten().fold(0.0f64, |m, g| m.max(g.abs()));
            assert!(norm < 1e-4, "{norm}");
        }
    }
}

#[test]
fn saturated_corner_is_flagged() {
    let game = build_coordination_game();
    let report = verify_nash(&game, &coordination_profile(1.0, 1.0, 1.0), GAMMA).unwrap();
    assert!(report.saturated);
    assert!((report.value - 9.9).abs() < 1e-12);
    assert!(report.witness.is_none());
}

#[test]
fn local_optimum_is_not_nash() {
    let game = build_local_optimum_game();
    let profile = local_optimum_profile();
    let grad = exact_gradient_all(&game, &profile, GAMMA).unwrap();
    let norm = grad.iter().flatten().fold(0.0f64, |m, g| m.max(g.abs()));
    assert!(norm < 1e-6, "not stationary: {grad:?}");

    let report = verify_nash(&game, &profile, GAMMA).unwrap();
    assert_eq!(report.classification, NashClass::NotNash);
    let witness = report.witness.expect("improving deviation");
    assert_eq!(witness.agent(), 0);
    assert!(witness.improvement() > 1.0);
    let base = exact_value(&game, &profile, GAMMA).unwrap();
    assert!((base - GAMMA * GAMMA * 1.92).abs() < 1e-9);
}

#[test]
fn report_serializes() {
    let game = build_coordination_game();
    let report = verify_nash(&game, &coordination_profile(0.0, 0.5, 0.1), GAMMA).unwrap();
    let text = serde_json::to_string(&report).unwrap();
    assert!(text.contains("\"classification\":\"not-nash\""));
}
