use serde::{Deserialize, Serialize};

use super::Environment;
use crate::error::{Error, Result};
use crate::policy::AgentPolicy;
use crate::rng::EpisodeRng;

/// What one agent experienced at one time step. `internal` is the
/// controller state entered at this step (the one that chose `action`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentStep {
    pub observation: usize,
    pub internal: usize,
    pub action: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointStep {
    pub agents: Vec<AgentStep>,
    pub reward: f64,
}

/// One episode as seen by all agents together. Step `t` carries the reward
/// emitted by the transition taken at `t`, discounted by `gamma^t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub initial_internal: Vec<usize>,
    pub steps: Vec<JointStep>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalStep {
    pub observation: usize,
    pub internal: usize,
    pub action: usize,
    pub reward: f64,
}

/// One agent's private view of an episode: its own observations, internal
/// states and actions, plus the shared reward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentHistory {
    pub initial_internal: usize,
    pub steps: Vec<LocalStep>,
}

impl History {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn agent_count(&self) -> usize {
        self.initial_internal.len()
    }

    pub fn rewards(&self) -> impl Iterator<Item = f64> + '_ {
        self.steps.iter().map(|s| s.reward)
    }

    pub fn undiscounted_return(&self) -> f64 {
        self.rewards().sum()
    }

    pub fn agent(&self, agent: usize) -> AgentHistory {
        AgentHistory {
            initial_internal: self.initial_internal[agent],
            steps: self
                .steps
                .iter()
                .map(|s| {
                    let a = s.agents[agent];
                    LocalStep {
                        observation: a.observation,
                        internal: a.internal,
                        action: a.action,
                        reward: s.reward,
                    }
                })
                .collect(),
        }
    }

    pub fn split(&self) -> Vec<AgentHistory> {
        (0..self.agent_count()).map(|i| self.agent(i)).collect()
    }

    /// Rebuilds the joint history from the individual ones. Fails when the
    /// individual histories disagree on length or on the shared rewards.
    pub fn from_agents(parts: &[AgentHistory]) -> Result<Self> {
        let Some(first) = parts.first() else {
            return Ok(History {
                initial_internal: Vec::new(),
                steps: Vec::new(),
            });
        };
        let len = first.steps.len();
        for p in parts {
            if p.steps.len() != len {
                return Err(Error::Arity {
                    what: "history steps",
                    expected: len,
                    got: p.steps.len(),
                });
            }
        }
        let mut steps = Vec::with_capacity(len);
        for t in 0..len {
            let reward = first.steps[t].reward;
            if parts.iter().any(|p| p.steps[t].reward.to_bits() != reward.to_bits()) {
                return Err(Error::config(format!("agents disagree on the reward at step {t}")));
            }
            steps.push(JointStep {
                agents: parts
                    .iter()
                    .map(|p| AgentStep {
                        observation: p.steps[t].observation,
                        internal: p.steps[t].internal,
                        action: p.steps[t].action,
                    })
                    .collect(),
                reward,
            });
        }
        Ok(History {
            initial_internal: parts.iter().map(|p| p.initial_internal).collect(),
            steps,
        })
    }
}

/// `sum_t gamma^t r(t)` with the first reward undiscounted.
pub fn discounted_return(history: &History, gamma: f64) -> f64 {
    let mut discount = 1.0;
    let mut total = 0.0;
    for r in history.rewards() {
        total += discount * r;
        discount *= gamma;
    }
    total
}

/// Simulates one episode of at most `horizon` steps. Stops early when the
/// environment reports a terminal state.
pub fn run_episode<E: Environment>(
    env: &E,
    policies: &[AgentPolicy],
    horizon: usize,
    rng: &mut EpisodeRng,
) -> Result<History> {
    run_episode_traced(env, policies, horizon, rng).map(|(h, _)| h)
}

/// Like [`run_episode`] but also returns the visited environment states,
/// `s(0)` through the final state.
pub fn run_episode_traced<E: Environment>(
    env: &E,
    policies: &[AgentPolicy],
    horizon: usize,
    rng: &mut EpisodeRng,
) -> Result<(History, Vec<E::State>)> {
    let shapes = env.agent_shapes();
    if policies.len() != shapes.len() {
        return Err(Error::Arity {
            what: "policies",
            expected: shapes.len(),
            got: policies.len(),
        });
    }
    if rng.agents.len() < shapes.len() {
        return Err(Error::Arity {
            what: "agent random streams",
            expected: shapes.len(),
            got: rng.agents.len(),
        });
    }
    for (policy, shape) in policies.iter().zip(shapes) {
        if policy.action_count() != shape.action_count || policy.observation_count() != shape.observation_count {
            return Err(Error::config(format!(
                "policy shape {}x{} does not match agent shape {}x{}",
                policy.observation_count(),
                policy.action_count(),
                shape.observation_count,
                shape.action_count
            )));
        }
    }
    if horizon == 0 {
        return Err(Error::config("horizon must be at least 1"));
    }

    let mut state = env.reset(&mut rng.env);
    let initial_internal: Vec<usize> = policies.iter().map(|p| p.initial_internal()).collect();
    let mut internal = initial_internal.clone();
    let mut states = vec![state.clone()];
    let mut steps = Vec::new();
    let mut joint = vec![0; policies.len()];

    for _ in 0..horizon {
        if env.is_terminal(&state) {
            break;
        }
        let mut agents = Vec::with_capacity(policies.len());
        for (i, policy) in policies.iter().enumerate() {
            let observation = env.observe(&state, i, &mut rng.env);
            let (action, next_internal) = policy.act(observation, internal[i], &mut rng.agents[i]);
            internal[i] = next_internal;
            joint[i] = action;
            agents.push(AgentStep {
                observation,
                internal: next_internal,
                action,
            });
        }
        let outcome = env.step(&state, &joint, &mut rng.env);
        steps.push(JointStep {
            agents,
            reward: outcome.reward,
        });
        state = outcome.state;
        states.push(state.clone());
        if outcome.done {
            break;
        }
    }
    Ok((
        History {
            initial_internal,
            steps,
        },
        states,
    ))
}
