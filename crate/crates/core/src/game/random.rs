//! Random small tabular games for property checks and verification suites.

use rand::Rng;

use super::{AgentSpec, GameBuilder, GameModel};
use crate::rng::SimRng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObservationKind {
    /// Every agent sees the state.
    Full,
    /// Deterministic, possibly aliasing observation maps onto `count` symbols.
    Aliased { count: usize },
    /// Each state emits one of `count` symbols at random.
    Noisy { count: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomGameParams {
    pub max_states: usize,
    pub agents: usize,
    pub min_actions: usize,
    pub max_actions: usize,
    pub observations: ObservationKind,
    /// Maximum number of successor states per (state, joint action).
    pub max_support: usize,
}

impl Default for RandomGameParams {
    fn default() -> Self {
        Self {
            max_states: 5,
            agents: 2,
            min_actions: 2,
            max_actions: 3,
            observations: ObservationKind::Full,
            max_support: 2,
        }
    }
}

/// Draws a game with 2..=max_states states whose last state is terminal.
/// Rewards are uniform in [-1, 1]; every non-terminal (state, joint action)
/// reaches the terminal state with positive probability, so episodes end.
pub fn random_game(params: &RandomGameParams, rng: &mut SimRng) -> GameModel {
    let states = rng.gen_range(2..=params.max_states.max(2));
    let terminal = states - 1;
    let agents: Vec<AgentSpec> = (0..params.agents)
        .map(|_| {
            let actions = rng.gen_range(params.min_actions..=params.max_actions);
            match params.observations {
                ObservationKind::Full => AgentSpec::fully_observing(actions, states),
                ObservationKind::Aliased { count } => {
                    let map: Vec<usize> = (0..states).map(|_| rng.gen_range(0..count)).collect();
                    AgentSpec::with_observation_map(actions, count, &map)
                }
                ObservationKind::Noisy { count } => {
                    let mut spec = AgentSpec::with_observation_map(actions, count, &vec![0; states]);
                    spec.observe = (0..states).map(|_| random_simplex(count, rng)).collect();
                    spec
                }
            }
        })
        .collect();
    let joint: usize = agents.iter().map(|a| a.shape.action_count).product();
    let mut builder = GameBuilder::new(states, agents).terminal(terminal);
    for s in 0..terminal {
        for ja in 0..joint {
            let extra = rng.gen_range(0..params.max_support.max(1));
            let mut succ = vec![terminal];
            for _ in 0..extra {
                let next = rng.gen_range(0..states);
                if !succ.contains(&next) {
                    succ.push(next);
                }
            }
            let probs = random_simplex(succ.len(), rng);
            for (&next, p) in succ.iter().zip(probs) {
                builder = builder.transition_joint(s, ja, next, p);
            }
            builder = builder.reward_joint(s, ja, rng.gen_range(-1.0..=1.0));
        }
    }
    builder.build().expect("random game is well formed")
}

/// Positive weights normalized to sum to one, with the last entry absorbing
/// rounding so the sum is exact to machine precision.
fn random_simplex(n: usize, rng: &mut SimRng) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut probs: Vec<f64> = raw.iter().map(|x| x / total).collect();
    let head: f64 = probs[..n - 1].iter().sum();
    probs[n - 1] = 1.0 - head;
    probs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStreams;

    #[test]
    fn random_games_validate() {
        let mut rng = SeedStreams::new(3).stream(0);
        for kind in [
            ObservationKind::Full,
            ObservationKind::Aliased { count: 2 },
            ObservationKind::Noisy { count: 2 },
        ] {
            for _ in 0..50 {
                let params = RandomGameParams {
                    observations: kind,
                    ..Default::default()
                };
                let g = random_game(&params, &mut rng);
                assert!(g.state_count() >= 2 && g.state_count() <= 5);
                assert!(g.terminal(g.state_count() - 1));
            }
        }
    }
}
