use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use dgd_core::analysis::{exact_gradient_all, exact_value};
use dgd_core::domains::soccer::{OpponentKind, Soccer};
use dgd_core::domains::{build_coordination_game, coordination_profile};
use dgd_core::game::random::{random_game, RandomGameParams};
use dgd_core::policy::{AgentPolicy, BoltzmannPolicy};
use dgd_core::{episode_gradient, run_episode, Environment, SeedStreams};

fn uniform(env: &impl Environment) -> Vec<AgentPolicy> {
    env.agent_shapes()
        .iter()
        .map(|s| BoltzmannPolicy::new(s.observation_count, s.action_count, 1.0).into())
        .collect()
}

fn oracles(c: &mut Criterion) {
    let game = build_coordination_game();
    let profile = coordination_profile(0.3, 0.6, 0.5);
    c.bench_function("exact_value/coordination", |b| {
        b.iter(|| exact_value(black_box(&game), black_box(&profile), 0.99).unwrap())
    });
    c.bench_function("exact_gradient_all/coordination", |b| {
        b.iter(|| exact_gradient_all(black_box(&game), black_box(&profile), 0.99).unwrap())
    });

    let mut rng = SeedStreams::new(7).stream(0);
    let game = random_game(&RandomGameParams::default(), &mut rng);
    let profile = uniform(&game);
    c.bench_function("exact_value/random_game", |b| {
        b.iter(|| exact_value(black_box(&game), black_box(&profile), 0.95).unwrap())
    });
}

fn soccer(c: &mut Criterion) {
    for kind in OpponentKind::ALL {
        let game = Soccer::against(kind);
        let policies = uniform(&game);
        let mut rng = SeedStreams::new(3).episode_rng(policies.len());
        c.bench_function(&format!("soccer_episode/{kind:?}"), |b| {
            b.iter(|| run_episode(&game, black_box(&policies), 500, &mut rng).unwrap())
        });
    }
}

fn estimator(c: &mut Criterion) {
    let game = Soccer::against(OpponentKind::Greedy);
    let policies = uniform(&game);
    let mut rng = SeedStreams::new(5).episode_rng(policies.len());
    let history = run_episode(&game, &policies, 500, &mut rng).unwrap();
    let local = history.agent(0);
    c.bench_function("episode_gradient/soccer", |b| {
        b.iter(|| episode_gradient(black_box(&policies[0]), black_box(&local), 0.999).unwrap())
    });
}

criterion_group!(benches, oracles, soccer, estimator);
criterion_main!(benches);
