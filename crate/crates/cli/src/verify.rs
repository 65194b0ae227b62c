//! Verification suites: each runs a property check over generated or
//! fixed instances and reports one line per check.

use std::fmt::Write as _;

use anyhow::Result;
use dgd_core::analysis::{
    enumerate_estimator_expectation, exact_gradient_all, factored_gap, history_count_bound, truncated_gradient,
    verify_nash, NashClass, ParamRef, HISTORY_LIMIT,
};
use dgd_core::domains::soccer::{OpponentKind, Outcome, Soccer, SoccerConfig, SoccerState, COLUMNS, ROWS};
use dgd_core::domains::{
    build_coordination_game, build_local_optimum_game, coordination_profile, local_optimum_profile,
    meal_target_distribution,
};
use dgd_core::game::random::{random_game, ObservationKind, RandomGameParams};
use dgd_core::game::{Environment, GameModel};
use dgd_core::learner::{check_equivalence, TrainConfig};
use dgd_core::policy::{AgentPolicy, BoltzmannPolicy, FiniteStateController};
use dgd_core::rng::{SeedStreams, SimRng};
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Theorem1,
    Estimator,
    Gradients,
    Nash,
    Exhibit,
    Gap,
    SoccerInvariants,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Theorem1,
        Suite::Estimator,
        Suite::Gradients,
        Suite::Nash,
        Suite::Exhibit,
        Suite::Gap,
        Suite::SoccerInvariants,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Theorem1 => "theorem1",
            Suite::Estimator => "estimator",
            Suite::Gradients => "gradients",
            Suite::Nash => "nash",
            Suite::Exhibit => "exhibit",
            Suite::Gap => "gap",
            Suite::SoccerInvariants => "soccer-invariants",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    fn new(suite: Suite, checks: Vec<Check>) -> Self {
        Self {
            suite,
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "suite {}: {}", self.suite.name(), verdict(self.passed));
        for c in &self.checks {
            let _ = writeln!(out, "  {:<4} {:<44} {}", verdict(c.passed), c.name, c.detail);
        }
        out
    }
}

fn verdict(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

fn check(name: impl Into<String>, passed: bool, detail: serde_json::Value) -> Check {
    Check {
        name: name.into(),
        passed,
        detail,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub seed: u64,
    pub theorem1_games: usize,
    pub theorem1_episodes: usize,
    pub estimator_games: usize,
    pub gradient_policies: usize,
    pub gap_products: usize,
    pub soccer_steps: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            theorem1_games: 20,
            theorem1_episodes: 1000,
            estimator_games: 10,
            gradient_policies: 100,
            gap_products: 50,
            soccer_steps: 1_000_000,
        }
    }
}

pub fn run_suite(suite: Suite, options: &VerifyOptions) -> Result<SuiteReport> {
    let checks = match suite {
        Suite::Theorem1 => theorem1(options)?,
        Suite::Estimator => estimator(options)?,
        Suite::Gradients => gradients(options),
        Suite::Nash => nash()?,
        Suite::Exhibit => exhibit()?,
        Suite::Gap => gap(options)?,
        Suite::SoccerInvariants => soccer_invariants(options),
    };
    Ok(SuiteReport::new(suite, checks))
}

fn random_profile(game: &GameModel, fsc_states: usize, range: f64, rng: &mut SimRng) -> Vec<AgentPolicy> {
    game.agents()
        .iter()
        .map(|a| {
            let (o, n) = (a.shape.observation_count, a.shape.action_count);
            if fsc_states > 1 {
                FiniteStateController::random(fsc_states, o, n, 1.0, range, rng).into()
            } else {
                BoltzmannPolicy::random(o, n, 1.0, range, rng).into()
            }
        })
        .collect()
}

const OBSERVATION_KINDS: [ObservationKind; 3] = [
    ObservationKind::Full,
    ObservationKind::Aliased { count: 2 },
    ObservationKind::Noisy { count: 3 },
];

/// Distributed and joint updates on shared histories: random games with
/// reactive and two-state controllers, plus the coordination game.
fn theorem1(options: &VerifyOptions) -> Result<Vec<Check>> {
    let mut rng = SeedStreams::new(options.seed).stream(0);
    let mut checks = Vec::new();
    let mut worst: f64 = 0.0;
    let mut drift: f64 = 0.0;
    for g in 0..options.theorem1_games {
        let params = RandomGameParams {
            observations: OBSERVATION_KINDS[g % 3],
            ..Default::default()
        };
        let game = random_game(&params, &mut rng);
        let profile = random_profile(&game, if g % 4 == 3 { 2 } else { 1 }, 0.5, &mut rng);
        let config = TrainConfig {
            learning_rate: 0.05,
            discount: 0.95,
            episodes: options.theorem1_episodes,
            horizon: 25,
            eval_every: options.theorem1_episodes.max(1),
            eval_episodes: 0,
            seed: options.seed.wrapping_add(g as u64),
        };
        let report = check_equivalence(&game, profile, &config)?;
        worst = worst.max(report.max_update_gap);
        drift = drift.max(report.max_weight_gap);
    }
    checks.push(check(
        format!(
            "{} random games, {} episodes",
            options.theorem1_games, options.theorem1_episodes
        ),
        worst <= 1e-12,
        json!({ "max_update_gap": worst, "max_weight_gap": drift }),
    ));

    let config = TrainConfig {
        learning_rate: 0.003,
        discount: 0.99,
        episodes: options.theorem1_episodes,
        horizon: 10,
        eval_every: options.theorem1_episodes.max(1),
        eval_episodes: 0,
        seed: options.seed,
    };
    let mut init = SeedStreams::new(options.seed).stream(2);
    let game = build_coordination_game();
    let profile = random_profile(&game, 1, 0.1, &mut init);
    let report = check_equivalence(&game, profile, &config)?;
    checks.push(check(
        "coordination game",
        report.max_update_gap <= 1e-12,
        json!({ "max_update_gap": report.max_update_gap, "max_weight_gap": report.max_weight_gap }),
    ));
    Ok(checks)
}

/// Exhaustive expectation of the per-trial estimator against central
/// differences of the truncated value.
fn estimator(options: &VerifyOptions) -> Result<Vec<Check>> {
    let mut rng = SeedStreams::new(options.seed).stream(1);
    let mut checks = Vec::new();
    for g in 0..options.estimator_games {
        let params = RandomGameParams {
            max_states: 4,
            observations: OBSERVATION_KINDS[g % 3],
            ..Default::default()
        };
        let game = random_game(&params, &mut rng);
        let profile = random_profile(&game, if g % 3 == 2 { 2 } else { 1 }, 1.0, &mut rng);
        let mut horizon = 3;
        while horizon > 1 && history_count_bound(&game, &profile, horizon) > HISTORY_LIMIT {
            horizon -= 1;
        }
        let gamma = 0.95;
        let expectation = enumerate_estimator_expectation(&game, &profile, gamma, horizon)?;
        let mut worst: f64 = 0.0;
        for (agent, policy) in profile.iter().enumerate() {
            for index in 0..policy.param_count() {
                let fd = truncated_gradient(&game, &profile, gamma, horizon, ParamRef { agent, index })?;
                worst = worst.max((expectation[agent][index] - fd).abs());
            }
        }
        checks.push(check(
            format!("game {g} ({} states, horizon {horizon})", game.state_count()),
            worst < 1e-8,
            json!({ "max_abs_diff": worst }),
        ));
    }
    Ok(checks)
}

/// Log-probability gradients against central differences (step 1e-5).
fn gradients(options: &VerifyOptions) -> Vec<Check> {
    let mut rng = SeedStreams::new(options.seed).stream(2);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for k in 0..options.gradient_policies {
        let observations = rng.gen_range(1..=4);
        let actions = rng.gen_range(2..=4);
        let theta = rng.gen_range(0.5..2.0);
        let policy: AgentPolicy = if k % 2 == 0 {
            BoltzmannPolicy::random(observations, actions, theta, 3.0, &mut rng).into()
        } else {
            FiniteStateController::random(rng.gen_range(1..=3), observations, actions, theta, 3.0, &mut rng).into()
        };
        for o in 0..policy.observation_count() {
            for n in 0..policy.internal_state_count() {
                for (next, a, _) in policy.step_distribution(o, n) {
                    let grad = policy.log_prob_gradient(o, n, a, next).into_vec();
                    for w in 0..policy.param_count() {
                        let mut up = policy.clone();
                        up.params_mut()[w] += h;
                        let mut down = policy.clone();
                        down.params_mut()[w] -= h;
                        let fd = (up.log_prob(o, n, a, next) - down.log_prob(o, n, a, next)) / (2.0 * h);
                        let rel = (fd - grad[w]).abs() / grad[w].abs().max(1.0);
                        worst = worst.max(rel);
                        if rel > 1e-6 {
                            failures += 1;
                        }
                    }
                }
            }
        }
    }
    vec![check(
        format!("{} random reactive and FSC policies", options.gradient_policies),
        failures == 0,
        json!({ "max_relative_error": worst, "failures": failures }),
    )]
}

fn nash() -> Result<Vec<Check>> {
    let game = build_coordination_game();
    let gamma = 0.99;
    let table: [(&str, [f64; 3], &[NashClass]); 9] = [
        ("{1,1;1}", [1.0, 1.0, 1.0], &[NashClass::StrictNash]),
        ("{1,0;0}", [1.0, 0.0, 0.0], &[NashClass::StrictNash]),
        ("{0,0.5;0.25}", [0.0, 0.5, 0.25], &[NashClass::WeakNash]),
        (
            "{0,0.5;0.3}",
            [0.0, 0.5, 0.3],
            &[NashClass::StrictNash, NashClass::WeakNash],
        ),
        (
            "{0,0.5;0.5}",
            [0.0, 0.5, 0.5],
            &[NashClass::StrictNash, NashClass::WeakNash],
        ),
        (
            "{0,0.5;0.7}",
            [0.0, 0.5, 0.7],
            &[NashClass::StrictNash, NashClass::WeakNash],
        ),
        ("{0,0.5;0.75}", [0.0, 0.5, 0.75], &[NashClass::WeakNash]),
        ("{0,0.5;0.1}", [0.0, 0.5, 0.1], &[NashClass::NotNash]),
        ("{0,0.5;0.9}", [0.0, 0.5, 0.9], &[NashClass::NotNash]),
    ];
    let mut checks = Vec::new();
    for (label, [p1, p2, q], expected) in table {
        let profile = coordination_profile(p1, p2, q);
        let report = verify_nash(&game, &profile, gamma)?;
        let mut passed = expected.contains(&report.classification);
        let mut detail = json!({
            "classification": report.classification,
            "value": report.value,
            "witness": report.witness,
            "scope": report.scope,
            "saturated": report.saturated,
        });
        if report.classification == NashClass::StrictNash {
            let grad = exact_gradient_all(&game, &profile, gamma)?;
            let norm = grad.iter().flatten().fold(0.0f64, |m, g| m.max(g.abs()));
            passed &= norm < 1e-4;
            detail["max_gradient"] = json!(norm);
        }
        checks.push(check(format!("coordination {label}"), passed, detail));
    }
    Ok(checks)
}

fn exhibit() -> Result<Vec<Check>> {
    let game = build_local_optimum_game();
    let profile = local_optimum_profile();
    let gamma = 0.99;
    let grad = exact_gradient_all(&game, &profile, gamma)?;
    let norm = grad.iter().flatten().fold(0.0f64, |m, g| m.max(g.abs()));
    let report = verify_nash(&game, &profile, gamma)?;
    Ok(vec![
        check(
            "stationary point",
            norm < 1e-6,
            json!({ "max_gradient": norm, "value": report.value }),
        ),
        check(
            "rejected with an improving deviation",
            report.classification == NashClass::NotNash
                && report.witness.as_ref().is_some_and(|w| w.improvement() > 0.0),
            json!({ "classification": report.classification, "witness": report.witness }),
        ),
    ])
}

fn gap(options: &VerifyOptions) -> Result<Vec<Check>> {
    let meal = factored_gap(&meal_target_distribution())?;
    let uniform = factored_gap(&[[0.25; 2]; 2])?;
    let mut rng = SeedStreams::new(options.seed).stream(3);
    let mut worst: f64 = 0.0;
    for _ in 0..options.gap_products {
        let p: f64 = rng.gen_range(0.0..=1.0);
        let q: f64 = rng.gen_range(0.0..=1.0);
        let target = [[p * q, p * (1.0 - q)], [(1.0 - p) * q, (1.0 - p) * (1.0 - q)]];
        worst = worst.max(factored_gap(&target)?.distance);
    }
    Ok(vec![
        check(
            "meal distribution gap > 0.05",
            meal.distance > 0.05,
            serde_json::to_value(&meal)?,
        ),
        check(
            "uniform target gap = 0",
            uniform.distance < 1e-6,
            json!({ "distance": uniform.distance }),
        ),
        check(
            format!("{} product targets gap < 1e-6", options.gap_products),
            worst < 1e-6,
            json!({ "max_distance": worst }),
        ),
    ])
}

/// Random joint actions against every opponent mix; after each step the
/// occupancy, possession and termination rules must hold.
fn soccer_invariants(options: &VerifyOptions) -> Vec<Check> {
    let mixes: Vec<(Vec<OpponentKind>, bool)> = OpponentKind::ALL
        .iter()
        .flat_map(|&k| [(vec![k], true), (vec![k], false)])
        .chain([(vec![OpponentKind::Greedy, OpponentKind::Defensive], true)])
        .collect();
    let mut steps = 0usize;
    let mut games = 0usize;
    let mut violations: Vec<String> = Vec::new();
    let mut outcomes = [0usize; 3];
    while steps < options.soccer_steps && violations.len() < 10 {
        let (opponents, pass_enabled) = &mixes[games % mixes.len()];
        let game = Soccer::new(SoccerConfig {
            opponents: opponents.clone(),
            pass_enabled: *pass_enabled,
            ..SoccerConfig::default()
        })
        .expect("valid soccer config");
        let mut rng = SeedStreams::new(options.seed).derive(games as u64).stream(0);
        let actions = game.agent_shapes()[0].action_count;
        let mut state = game.reset(&mut rng);
        if let Some(v) = soccer_violation(&game, &state, None) {
            violations.push(v);
        }
        while steps < options.soccer_steps {
            let joint = [rng.gen_range(0..actions), rng.gen_range(0..actions)];
            let t = game.step(&state, &joint, &mut rng);
            steps += 1;
            if let Some(v) = soccer_violation(&game, &t.state, Some((t.reward, t.done))) {
                violations.push(format!("game {games} step {}: {v}", t.state.steps));
            }
            state = t.state;
            if t.done {
                let idx = match state.outcome {
                    Some(Outcome::LearnersScore) => 0,
                    Some(Outcome::OpponentScores) => 1,
                    _ => 2,
                };
                outcomes[idx] += 1;
                break;
            }
        }
        games += 1;
    }
    vec![check(
        format!("{} fuzzed steps", options.soccer_steps),
        violations.is_empty() && steps >= options.soccer_steps,
        json!({
            "steps": steps,
            "games": games,
            "learner_goals": outcomes[0],
            "opponent_goals": outcomes[1],
            "draws": outcomes[2],
            "violations": violations,
        }),
    )]
}

fn soccer_violation(game: &Soccer, state: &SoccerState, step: Option<(f64, bool)>) -> Option<String> {
    let n = game.player_count();
    if state.positions.len() != n {
        return Some("player count changed".into());
    }
    for (i, a) in state.positions.iter().enumerate() {
        if a.col >= COLUMNS || a.row >= ROWS {
            return Some(format!("player {i} off the field"));
        }
        if state.positions[i + 1..].contains(a) {
            return Some(format!("cell {a:?} shared"));
        }
    }
    if state.possessor >= n {
        return Some("no valid possessor".into());
    }
    if let Some((reward, done)) = step {
        if done != state.outcome.is_some() {
            return Some("done flag disagrees with outcome".into());
        }
        let expected = state.outcome.map_or(0.0, Outcome::reward);
        if reward != expected {
            return Some(format!("reward {reward} for outcome {:?}", state.outcome));
        }
        if state.outcome == Some(Outcome::Draw) && state.steps != game.config().max_steps {
            return Some("draw before the step cap".into());
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> VerifyOptions {
        VerifyOptions {
            theorem1_games: 3,
            theorem1_episodes: 50,
            estimator_games: 3,
            gradient_policies: 10,
            gap_products: 5,
            soccer_steps: 20_000,
            ..VerifyOptions::default()
        }
    }

    #[test]
    fn quick_suites_pass() {
        for suite in Suite::ALL {
            let report = run_suite(suite, &quick()).unwrap();
            assert!(report.passed, "{}", report.to_text());
        }
    }

    #[test]
    fn report_json_round_trips() {
        let report = run_suite(Suite::Gap, &quick()).unwrap();
        let text = serde_json::to_string(&report).unwrap();
        let back: SuiteReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report);
    }
}
