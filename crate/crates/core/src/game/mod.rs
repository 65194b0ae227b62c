//! Identical-payoff stochastic games.
//!
//! Two flavours share the [`Environment`] trait: the tabular [`GameModel`]
//! with explicit transition and reward tables, and generative simulators
//! (grid soccer) that only expose reset/step/observe.

mod history;
pub mod random;
mod tabular;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SimRng;

pub use history::{
    discounted_return, run_episode, run_episode_traced, AgentHistory, AgentStep, History, JointStep, LocalStep,
};
pub use tabular::{GameBuilder, GameDocument, GameModel};

/// Action and observation space sizes of one agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentShape {
    pub action_count: usize,
    pub observation_count: usize,
}

impl AgentShape {
    pub fn new(action_count: usize, observation_count: usize) -> Self {
        Self {
            action_count,
            observation_count,
        }
    }
}

/// An agent of a tabular game: its spaces plus the observation function,
/// stored densely as `observe[state][observation]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentSpec {
    pub shape: AgentShape,
    pub observe: Vec<Vec<f64>>,
}

impl AgentSpec {
    /// Identity observation function over `states` states.
    pub fn fully_observing(action_count: usize, states: usize) -> Self {
        let observe = (0..states)
            .map(|s| {
                let mut row = vec![0.0; states];
                row[s] = 1.0;
                row
            })
            .collect();
        Self {
            shape: AgentShape::new(action_count, states),
            observe,
        }
    }

    /// Deterministic observation function `state -> map[state]`.
    pub fn with_observation_map(action_count: usize, observation_count: usize, map: &[usize]) -> Self {
        let observe = map
            .iter()
            .map(|&o| {
                let mut row = vec![0.0; observation_count];
                row[o] = 1.0;
                row
            })
            .collect();
        Self {
            shape: AgentShape::new(action_count, observation_count),
            observe,
        }
    }

    /// True when each state yields one certain observation and distinct
    /// states yield distinct observations, i.e. the agent sees the state.
    pub fn observes_state(&self) -> bool {
        let mut seen = vec![false; self.shape.observation_count];
        for row in &self.observe {
            let Some(o) = row.iter().position(|&p| p == 1.0) else {
                return false;
            };
            if seen[o] {
                return false;
            }
            seen[o] = true;
        }
        true
    }
}

/// Outcome of one environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition<S> {
    pub state: S,
    pub reward: f64,
    pub done: bool,
}

/// A simulator that agents interact with. Implementations are immutable;
/// all randomness comes through the supplied generator so that equal seeds
/// give equal trajectories.
pub trait Environment: Sync {
    type State: Clone;

    fn agent_shapes(&self) -> &[AgentShape];

    fn reset(&self, rng: &mut SimRng) -> Self::State;

    fn step(&self, state: &Self::State, joint: &[usize], rng: &mut SimRng) -> Transition<Self::State>;

    fn observe(&self, state: &Self::State, agent: usize, rng: &mut SimRng) -> usize;

    fn is_terminal(&self, state: &Self::State) -> bool;

    /// A key identifying the full environment state, used by the fully
    /// observable Q-learning baseline.
    fn state_key(&self, state: &Self::State) -> u64;

    fn joint_action_count(&self) -> usize {
        self.agent_shapes().iter().map(|a| a.action_count).product()
    }
}

/// Mixed-radix encoding of a joint action with agent 0 least significant.
pub fn joint_action_index(actions: &[usize], agents: &[AgentShape]) -> Result<usize> {
    if actions.len() != agents.len() {
        return Err(Error::Arity {
            what: "agent actions",
            expected: agents.len(),
            got: actions.len(),
        });
    }
    let mut index = 0;
    let mut radix = 1;
    for (&a, shape) in actions.iter().zip(agents) {
        if a >= shape.action_count {
            return Err(Error::IndexOutOfRange {
                what: "action",
                index: a,
                limit: shape.action_count,
            });
        }
        index += a * radix;
        radix *= shape.action_count;
    }
    Ok(index)
}

/// Inverse of [`joint_action_index`].
pub fn decode_joint_action(index: usize, agents: &[AgentShape]) -> Result<Vec<usize>> {
    let total: usize = agents.iter().map(|a| a.action_count).product();
    if index >= total {
        return Err(Error::IndexOutOfRange {
            what: "joint action",
            index,
            limit: total,
        });
    }
    let mut rest = index;
    Ok(agents
        .iter()
        .map(|shape| {
            let a = rest % shape.action_count;
            rest /= shape.action_count;
            a
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shapes(sizes: &[usize]) -> Vec<AgentShape> {
        sizes.iter().map(|&n| AgentShape::new(n, 1)).collect()
    }

    #[test]
    fn joint_index_radix_order() {
        let s = shapes(&[2, 2]);
        assert_eq!(joint_action_index(&[0, 0], &s).unwrap(), 0);
        assert_eq!(joint_action_index(&[1, 0], &s).unwrap(), 1);
        assert_eq!(joint_action_index(&[0, 1], &s).unwrap(), 2);
    }

    #[test]
    fn joint_index_round_trips_exhaustively() {
        let s = shapes(&[2, 3, 2]);
        let mut seen = std::collections::BTreeSet::new();
        for a in 0..2 {
            for b in 0..3 {
                for c in 0..2 {
                    let idx = joint_action_index(&[a, b, c], &s).unwrap();
                    assert_eq!(decode_joint_action(idx, &s).unwrap(), vec![a, b, c]);
                    seen.insert(idx);
                }
            }
        }
        assert_eq!(seen.len(), 12);
        assert_eq!(*seen.iter().max().unwrap(), 11);
    }

    #[test]
    fn joint_index_rejects_bad_input() {
        let s = shapes(&[2, 2]);
        assert!(matches!(
            joint_action_index(&[2, 0], &s),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(joint_action_index(&[0], &s), Err(Error::Arity { .. })));
        assert!(decode_joint_action(4, &s).is_err());
    }

    #[test]
    fn observes_state_detects_aliasing() {
        assert!(AgentSpec::fully_observing(2, 3).observes_state());
        assert!(!AgentSpec::with_observation_map(2, 2, &[0, 1, 1]).observes_state());
    }
}
