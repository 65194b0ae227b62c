use dgd_core::analysis::{
    enumerate_estimator_expectation, exact_gradient, exact_value, history_count_bound, truncated_gradient,
    truncated_value, ParamRef, HISTORY_LIMIT,
};
use dgd_core::domains::{build_coordination_game, coordination_profile, S4};
use dgd_core::game::random::{random_game, ObservationKind, RandomGameParams};
use dgd_core::game::{discounted_return, run_episode, AgentSpec, GameModel};
use dgd_core::policy::{AgentPolicy, BoltzmannPolicy, FiniteStateController};
use dgd_core::rng::{SeedStreams, SimRng};
use dgd_core::Error;

fn random_profile(game: &GameModel, fsc: bool, rng: &mut SimRng) -> Vec<AgentPolicy> {
    game.agents()
        .iter()
        .map(|a| {
            let (o, n) = (a.shape.observation_count, a.shape.action_count);
            if fsc {
                FiniteStateController::random(2, o, n, 1.0, 1.0, rng).into()
            } else {
                BoltzmannPolicy::random(o, n, 1.0, 1.0, rng).into()
            }
        })
        .collect()
}

fn all_weights(policies: &[AgentPolicy]) -> Vec<ParamRef> {
    policies
        .iter()
        .enumerate()
        .flat_map(|(agent, p)| (0..p.param_count()).map(move |index| ParamRef { agent, index }))
        .collect()
}

#[test]
fn coordination_values() {
    let game = build_coordination_game();
    let v = exact_value(&game, &coordination_profile(1.0, 1.0, 1.0), 0.99).unwrap();
    assert!((v - 9.9).abs() < 1e-12, "{v}");
    for (p, q) in [(0.2, 0.9), (0.5, 0.5), (1.0, 0.0)] {
        let v = exact_value(&game, &coordination_profile(0.0, p, q), 0.99).unwrap();
        assert!((v - 4.95).abs() < 1e-12, "{v}");
    }
    let silent = game.scaled_rewards(0.0);
    assert_eq!(
        exact_value(&silent, &coordination_profile(0.3, 0.3, 0.3), 0.99).unwrap(),
        0.0
    );
}

#[test]
fn exact_value_matches_monte_carlo() {
    let mut rng = SeedStreams::new(21).stream(0);
    let gamma = 0.9;
    let n = 100_000;
    for g in 0..20 {
        let kind = [
            ObservationKind::Full,
            ObservationKind::Aliased { count: 2 },
            ObservationKind::Noisy { count: 2 },
        ][g % 3];
        let params = RandomGameParams {
            observations: kind,
            ..Default::default()
        };
        let game = random_game(&params, &mut rng);
        let profile = random_profile(&game, g % 2 == 1, &mut rng);
        let exact = exact_value(&game, &profile, gamma).unwrap();
        let mut episodes = SeedStreams::new(1000 + g as u64).episode_rng(profile.len());
        let (mut sum, mut sq) = (0.0, 0.0);
        for _ in 0..n {
            let h = run_episode(&game, &profile, 400, &mut episodes).unwrap();
            let r = discounted_return(&h, gamma);
            sum += r;
            sq += r * r;
        }
        let mean = sum / n as f64;
        let se = ((sq / n as f64 - mean * mean) / n as f64).sqrt();
        assert!(
            (mean - exact).abs() < 3.0 * se + 1e-12,
            "game {g}: mc {mean} exact {exact} se {se}"
        );
    }
}

#[test]
fn truncated_value_converges() {
    let game = build_coordination_game();
    let profile = coordination_profile(0.6, 0.3, 0.8);
    let exact = exact_value(&game, &profile, 0.99).unwrap();
    assert_eq!(truncated_value(&game, &profile, 0.99, 1).unwrap(), 0.0);
    assert!((truncated_value(&game, &profile, 0.99, 2).unwrap() - exact).abs() < 1e-12);
}

#[test]
fn unreachable_weight_has_zero_gradient() {
    let game = build_coordination_game();
    let profile = coordination_profile(0.6, 0.3, 0.8);
    // Agent 1's row for the terminal state s4 never influences anything.
    let g = exact_gradient(
        &game,
        &profile,
        0.99,
        ParamRef {
            agent: 1,
            index: S4 * 2,
        },
    )
    .unwrap();
    assert!(g.abs() < 1e-10, "{g}");
}

#[test]
fn bandit_expectation_is_analytic() {
    let rewards = [1.0, -0.5, 2.0];
    let mut b = GameModel::builder(2, vec![AgentSpec::with_observation_map(3, 1, &[0, 0])]).terminal(1);
    for (a, r) in rewards.iter().enumerate() {
        b = b.transition(0, &[a], 1, 1.0).reward(0, &[a], *r);
    }
    let game = b.build().unwrap();
    let theta = 0.7;
    let policy = BoltzmannPolicy::from_weights(1, 3, theta, vec![0.3, -0.2, 0.1]);
    let probs = policy.probabilities(0);
    let mean: f64 = probs.iter().zip(&rewards).map(|(p, r)| p * r).sum();
    let got = enumerate_estimator_expectation(&game, &[policy.into()], 0.9, 1).unwrap();
    for k in 0..3 {
        let expected = probs[k] * (rewards[k] - mean) / theta;
        assert!((got[0][k] - expected).abs() < 1e-14, "{k}: {} vs {expected}", got[0][k]);
    }
}

#[test]
fn zero_reward_game_has_zero_expectation() {
    let mut rng = SeedStreams::new(2).stream(0);
    let game = random_game(&RandomGameParams::default(), &mut rng).scaled_rewards(0.0);
    let profile = random_profile(&game, true, &mut rng);
    let got = enumerate_estimator_expectation(&game, &profile, 0.9, 2).unwrap();
    assert!(got.iter().flatten().all(|&x| x == 0.0));
}

fn check_enumeration(game: &GameModel, profile: &[AgentPolicy], gamma: f64, horizon: usize) {
    let expectation = enumerate_estimator_expectation(game, profile, gamma, horizon).unwrap();
    for at in all_weights(profile) {
        let fd = truncated_gradient(game, profile, gamma, horizon, at).unwrap();
        let e = expectation[at.agent][at.index];
        assert!(
            (e - fd).abs() < 1e-8,
            "{at:?}: enumerated {e} vs finite difference {fd}"
        );
    }
}

#[test]
fn coordination_horizon_two_matches_truncated_gradient() {
    let game = build_coordination_game();
    check_enumeration(&game, &coordination_profile(0.6, 0.3, 0.8), 0.99, 2);
}

#[test]
fn random_games_horizon_three() {
    let mut rng = SeedStreams::new(33).stream(0);
    for g in 0..10 {
        let kind = if g % 2 == 0 {
            ObservationKind::Full
        } else {
            ObservationKind::Noisy { count: 2 }
        };
        let params = RandomGameParams {
            max_states: 4,
            observations: kind,
            ..Default::default()
        };
        let game = random_game(&params, &mut rng);
        let profile = random_profile(&game, g % 3 == 2, &mut rng);
        let mut horizon = 3;
        while history_count_bound(&game, &profile, horizon) > HISTORY_LIMIT {
            horizon -= 1;
        }
        assert!(horizon >= 2);
        check_enumeration(&game, &profile, 0.95, horizon);
    }
}

#[test]
fn enumeration_guard() {
    let game = build_coordination_game();
    let profile = coordination_profile(0.5, 0.5, 0.5);
    assert!(matches!(
        enumerate_estimator_expectation(&game, &profile, 0.9, 12),
        Err(Error::EnumerationLimit { .. })
    ));
}
