use std::collections::{BTreeSet, HashMap};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::game::{joint_action_index, AgentShape, GameModel};
use crate::policy::AgentPolicy;

/// The Markov chain a fixed profile induces on
/// `(environment state, internal state of every agent)`, restricted to the
/// part reachable from the initial state.
#[derive(Debug, Clone)]
pub struct AugmentedChain {
    pub states: Vec<(usize, Vec<usize>)>,
    /// Sparse rows `P(x' | x)`.
    pub transitions: Vec<Vec<(usize, f64)>>,
    /// Expected immediate reward `R(x)`.
    pub rewards: Vec<f64>,
}

fn check_profile(game: &GameModel, policies: &[AgentPolicy]) -> Result<()> {
    if policies.len() != game.agents().len() {
        return Err(Error::Arity {
            what: "policies",
            expected: game.agents().len(),
            got: policies.len(),
        });
    }
    for (p, a) in policies.iter().zip(game.agents()) {
        if p.action_count() != a.shape.action_count || p.observation_count() != a.shape.observation_count {
            return Err(Error::config("policy shape does not match its agent"));
        }
    }
    Ok(())
}

/// Per-agent distribution over `(next internal, action)` in environment
/// state `state` from internal state `internal`, marginalized over the
/// agent's observation.
fn agent_step_marginal(
    game: &GameModel,
    agent: usize,
    policy: &AgentPolicy,
    state: usize,
    internal: usize,
) -> Vec<(usize, usize, f64)> {
    let mut acc: HashMap<(usize, usize), f64> = HashMap::new();
    for (o, &po) in game.observation_row(agent, state).iter().enumerate() {
        if po == 0.0 {
            continue;
        }
        for (next, a, p) in policy.step_distribution(o, internal) {
            if p > 0.0 {
                *acc.entry((next, a)).or_insert(0.0) += po * p;
            }
        }
    }
    let mut out: Vec<(usize, usize, f64)> = acc.into_iter().map(|((n, a), p)| (n, a, p)).collect();
    out.sort_by_key(|&(n, a, _)| (n, a));
    out
}

impl AugmentedChain {
    pub fn build(game: &GameModel, policies: &[AgentPolicy]) -> Result<Self> {
        check_profile(game, policies)?;
        let shapes: Vec<AgentShape> = game.agents().iter().map(|a| a.shape).collect();
        let start = (
            game.initial_state(),
            policies.iter().map(|p| p.initial_internal()).collect::<Vec<_>>(),
        );
        let mut index: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
        let mut states = vec![start.clone()];
        index.insert(start, 0);
        let mut transitions = Vec::new();
        let mut rewards = Vec::new();
        let mut cursor = 0;
        while cursor < states.len() {
            let (s, internal) = states[cursor].clone();
            cursor += 1;
            if game.terminal(s) {
                transitions.push(Vec::new());
                rewards.push(0.0);
                continue;
            }
            let marginals: Vec<Vec<(usize, usize, f64)>> = policies
                .iter()
                .enumerate()
                .map(|(i, p)| agent_step_marginal(game, i, p, s, internal[i]))
                .collect();
            let mut row: HashMap<usize, f64> = HashMap::new();
            let mut reward = 0.0;
            let mut choice = vec![0usize; policies.len()];
            let mut actions = vec![0usize; policies.len()];
            let mut next_internal = vec![0usize; policies.len()];
            'odometer: loop {
                let mut prob = 1.0;
                for (i, &c) in choice.iter().enumerate() {
                    let (n, a, p) = marginals[i][c];
                    next_internal[i] = n;
                    actions[i] = a;
                    prob *= p;
                }
                let ja = joint_action_index(&actions, &shapes)?;
                reward += prob * game.reward(s, ja);
                for &(next, pt) in game.transition(s, ja) {
                    if pt == 0.0 {
                        continue;
                    }
                    let key = (next, next_internal.clone());
                    let id = match index.get(&key) {
                        Some(&id) => id,
                        None => {
                            let id = states.len();
                            states.push(key.clone());
                            index.insert(key, id);
                            id
                        }
                    };
                    *row.entry(id).or_insert(0.0) += prob * pt;
                }
                for i in 0..choice.len() {
                    choice[i] += 1;
                    if choice[i] < marginals[i].len() {
                        continue 'odometer;
                    }
                    choice[i] = 0;
                }
                break;
            }
            let mut row: Vec<(usize, f64)> = row.into_iter().collect();
            row.sort_by_key(|&(id, _)| id);
            transitions.push(row);
            rewards.push(reward);
        }
        Ok(Self {
            states,
            transitions,
            rewards,
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Solves `(I - γP) V = R`.
    pub fn values(&self, gamma: f64) -> Result<Vec<f64>> {
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::SingularSystem);
        }
        let n = self.len();
        let mut a = DMatrix::<f64>::identity(n, n);
        for (x, row) in self.transitions.iter().enumerate() {
            for &(y, p) in row {
                a[(x, y)] -= gamma * p;
            }
        }
        let b = DVector::from_column_slice(&self.rewards);
        let v = a.lu().solve(&b).ok_or(Error::SingularSystem)?;
        Ok(v.iter().copied().collect())
    }

    /// `sum_{t < horizon} γ^t E[r(t)]` by propagating the state distribution.
    pub fn truncated_value(&self, gamma: f64, horizon: usize) -> f64 {
        let mut dist = vec![0.0; self.len()];
        dist[0] = 1.0;
        let mut total = 0.0;
        let mut discount = 1.0;
        for _ in 0..horizon {
            let expected: f64 = dist.iter().zip(&self.rewards).map(|(d, r)| d * r).sum();
            total += discount * expected;
            let mut next = vec![0.0; self.len()];
            for (x, row) in self.transitions.iter().enumerate() {
                if dist[x] == 0.0 {
                    continue;
                }
                for &(y, p) in row {
                    next[y] += dist[x] * p;
                }
            }
            dist = next;
            discount *= gamma;
        }
        total
    }
}

/// Discounted value of the profile from the initial state, solved exactly.
pub fn exact_value(game: &GameModel, policies: &[AgentPolicy], gamma: f64) -> Result<f64> {
    Ok(AugmentedChain::build(game, policies)?.values(gamma)?[0])
}

/// Value of the first `horizon` steps only.
pub fn truncated_value(game: &GameModel, policies: &[AgentPolicy], gamma: f64, horizon: usize) -> Result<f64> {
    Ok(AugmentedChain::build(game, policies)?.truncated_value(gamma, horizon))
}

/// Environment states visited with positive probability under the profile.
pub fn reachable_states(game: &GameModel, policies: &[AgentPolicy]) -> Result<BTreeSet<usize>> {
    let chain = AugmentedChain::build(game, policies)?;
    Ok(chain.states.iter().map(|(s, _)| *s).collect())
}
