use serde::{Deserialize, Serialize};

use super::{joint_action_index, AgentShape, AgentSpec, Environment, Transition};
use crate::error::{Error, Result};
use crate::rng::{sample_index, SimRng};

const SUM_TOLERANCE: f64 = 1e-12;

/// A tabular identical-payoff game `<S, s0, G, T, r>` with absorbing
/// terminal states.
#[derive(Debug, Clone, PartialEq)]
pub struct GameModel {
    state_count: usize,
    initial_state: usize,
    agents: Vec<AgentSpec>,
    shapes: Vec<AgentShape>,
    /// `transitions[s][joint]` is a sparse distribution over next states.
    transitions: Vec<Vec<Vec<(usize, f64)>>>,
    rewards: Vec<Vec<f64>>,
    terminal: Vec<bool>,
}

impl GameModel {
    pub fn new(
        state_count: usize,
        initial_state: usize,
        agents: Vec<AgentSpec>,
        transitions: Vec<Vec<Vec<(usize, f64)>>>,
        rewards: Vec<Vec<f64>>,
        terminal: Vec<bool>,
    ) -> Result<Self> {
        let shapes = agents.iter().map(|a| a.shape).collect();
        let game = Self {
            state_count,
            initial_state,
            agents,
            shapes,
            transitions,
            rewards,
            terminal,
        };
        game.validate()?;
        Ok(game)
    }

    pub fn builder(state_count: usize, agents: Vec<AgentSpec>) -> GameBuilder {
        GameBuilder::new(state_count, agents)
    }

    fn validate(&self) -> Result<()> {
        let n = self.state_count;
        if n == 0 {
            return Err(Error::config("a game needs at least one state"));
        }
        if self.agents.is_empty() {
            return Err(Error::config("a game needs at least one agent"));
        }
        if self.initial_state >= n {
            return Err(Error::IndexOutOfRange {
                what: "initial state",
                index: self.initial_state,
                limit: n,
            });
        }
        let joint = self.joint_action_count();
        for (i, agent) in self.agents.iter().enumerate() {
            if agent.shape.action_count == 0 || agent.shape.observation_count == 0 {
                return Err(Error::config(format!("agent {i} has an empty space")));
            }
            if agent.observe.len() != n {
                return Err(Error::Arity {
                    what: "observation rows",
                    expected: n,
                    got: agent.observe.len(),
                });
            }
            for (s, row) in agent.observe.iter().enumerate() {
                check_distribution(row, &format!("agent {i} observation in state {s}"))?;
                if row.len() != agent.shape.observation_count {
                    return Err(Error::Arity {
                        what: "observation probabilities",
                        expected: agent.shape.observation_count,
                        got: row.len(),
                    });
                }
            }
        }
        if self.transitions.len() != n || self.rewards.len() != n || self.terminal.len() != n {
            return Err(Error::config(
                "transition, reward and terminal tables need one row per state",
            ));
        }
        for s in 0..n {
            if self.transitions[s].len() != joint || self.rewards[s].len() != joint {
                return Err(Error::Arity {
                    what: "joint actions",
                    expected: joint,
                    got: self.transitions[s].len(),
                });
            }
            for (ja, dist) in self.transitions[s].iter().enumerate() {
                let context = format!("transition from state {s} under joint action {ja}");
                let mut sum = 0.0;
                for &(next, p) in dist {
                    if next >= n {
                        return Err(Error::IndexOutOfRange {
                            what: "next state",
                            index: next,
                            limit: n,
                        });
                    }
                    if !(p >= 0.0) {
                        return Err(Error::InvalidDistribution {
                            context,
                            reason: format!("negative or NaN mass {p}"),
                        });
                    }
                    sum += p;
                }
                if (sum - 1.0).abs() > SUM_TOLERANCE {
                    return Err(Error::InvalidDistribution {
                        context,
                        reason: format!("sums to {sum}"),
                    });
                }
                if self.terminal[s] {
                    let absorbing = dist.iter().all(|&(next, p)| next == s || p == 0.0);
                    if !absorbing || self.rewards[s][ja] != 0.0 {
                        return Err(Error::config(format!(
                            "terminal state {s} must self-loop with reward 0"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn state_count(&self) -> usize {
        self.state_count
    }

    pub fn initial_state(&self) -> usize {
        self.initial_state
    }

    pub fn agents(&self) -> &[AgentSpec] {
        &self.agents
    }

    pub fn transition(&self, state: usize, joint: usize) -> &[(usize, f64)] {
        &self.transitions[state][joint]
    }

    pub fn reward(&self, state: usize, joint: usize) -> f64 {
        self.rewards[state][joint]
    }

    pub fn terminal(&self, state: usize) -> bool {
        self.terminal[state]
    }

    /// Copy of the game with every reward multiplied by `factor`.
    pub fn scaled_rewards(&self, factor: f64) -> Self {
        let mut game = self.clone();
        for row in &mut game.rewards {
            for r in row {
                *r *= factor;
            }
        }
        game
    }

    pub fn to_document(&self) -> GameDocument {
        let agents = self
            .agents
            .iter()
            .map(|a| AgentDocument {
                actions: a.shape.action_count,
                observations: a.shape.observation_count,
                observe: a
                    .observe
                    .iter()
                    .enumerate()
                    .flat_map(|(s, row)| {
                        row.iter()
                            .enumerate()
                            .filter(|(_, &p)| p != 0.0)
                            .map(move |(o, &p)| (s, o, p))
                    })
                    .collect(),
            })
            .collect();
        let mut transitions = Vec::new();
        let mut rewards = Vec::new();
        for s in 0..self.state_count {
            for (ja, dist) in self.transitions[s].iter().enumerate() {
                transitions.extend(dist.iter().map(|&(next, p)| (s, ja, next, p)));
                if self.rewards[s][ja] != 0.0 {
                    rewards.push((s, ja, self.rewards[s][ja]));
                }
            }
        }
        GameDocument {
            states: self.state_count,
            initial_state: self.initial_state,
            agents,
            transitions,
            rewards,
            terminal: (0..self.state_count).filter(|&s| self.terminal[s]).collect(),
        }
    }

    pub fn from_document(doc: &GameDocument) -> Result<Self> {
        let n = doc.states;
        let agents = doc
            .agents
            .iter()
            .map(|a| {
                let mut observe = vec![vec![0.0; a.observations]; n];
                for &(s, o, p) in &a.observe {
                    if s >= n || o >= a.observations {
                        return Err(Error::config(format!("observation entry ({s}, {o}) out of range")));
                    }
                    observe[s][o] += p;
                }
                Ok(AgentSpec {
                    shape: AgentShape::new(a.actions, a.observations),
                    observe,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let joint: usize = agents.iter().map(|a| a.shape.action_count).product();
        let mut transitions = vec![vec![Vec::new(); joint]; n];
        let mut rewards = vec![vec![0.0; joint]; n];
        for &(s, ja, next, p) in &doc.transitions {
            if s >= n || ja >= joint {
                return Err(Error::config(format!("transition entry ({s}, {ja}) out of range")));
            }
            transitions[s][ja].push((next, p));
        }
        for &(s, ja, r) in &doc.rewards {
            if s >= n || ja >= joint {
                return Err(Error::config(format!("reward entry ({s}, {ja}) out of range")));
            }
            rewards[s][ja] = r;
        }
        let mut terminal = vec![false; n];
        for &s in &doc.terminal {
            if s >= n {
                return Err(Error::config(format!("terminal state {s} out of range")));
            }
            terminal[s] = true;
        }
        Self::new(n, doc.initial_state, agents, transitions, rewards, terminal)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_document(&serde_json::from_str(text)?)
    }

    /// Observation distribution of `agent` in `state`.
    pub fn observation_row(&self, agent: usize, state: usize) -> &[f64] {
        &self.agents[agent].observe[state]
    }
}

fn check_distribution(row: &[f64], context: &str) -> Result<()> {
    if row.iter().any(|p| !(*p >= 0.0)) {
        return Err(Error::InvalidDistribution {
            context: context.to_string(),
            reason: "negative or NaN mass".into(),
        });
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::InvalidDistribution {
            context: context.to_string(),
            reason: format!("sums to {sum}"),
        });
    }
    Ok(())
}

impl Environment for GameModel {
    type State = usize;

    fn agent_shapes(&self) -> &[AgentShape] {
        &self.shapes
    }

    fn reset(&self, _rng: &mut SimRng) -> usize {
        self.initial_state
    }

    fn step(&self, &state: &usize, joint: &[usize], rng: &mut SimRng) -> Transition<usize> {
        let ja = joint_action_index(joint, &self.shapes).expect("joint action within game bounds");
        let dist = &self.transitions[state][ja];
        let next = if dist.len() == 1 {
            dist[0].0
        } else {
            let probs: Vec<f64> = dist.iter().map(|&(_, p)| p).collect();
            dist[sample_index(&probs, rng)].0
        };
        Transition {
            state: next,
            reward: self.rewards[state][ja],
            done: self.terminal[next],
        }
    }

    fn observe(&self, &state: &usize, agent: usize, rng: &mut SimRng) -> usize {
        let row = &self.agents[agent].observe[state];
        match row.iter().position(|&p| p == 1.0) {
            Some(o) => o,
            None => sample_index(row, rng),
        }
    }

    fn is_terminal(&self, &state: &usize) -> bool {
        self.terminal[state]
    }

    fn state_key(&self, &state: &usize) -> u64 {
        state as u64
    }
}

/// Serialized form of a [`GameModel`]. Transitions are `(s, joint, s', p)`,
/// rewards `(s, joint, r)` (omitted entries are zero) and observations
/// `(s, o, p)` per agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameDocument {
    pub states: usize,
    pub initial_state: usize,
    pub agents: Vec<AgentDocument>,
    pub transitions: Vec<(usize, usize, usize, f64)>,
    pub rewards: Vec<(usize, usize, f64)>,
    pub terminal: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentDocument {
    pub actions: usize,
    pub observations: usize,
    pub observe: Vec<(usize, usize, f64)>,
}

/// Incremental construction of a [`GameModel`]. Terminal states get their
/// self-loops filled in automatically.
#[derive(Debug, Clone)]
pub struct GameBuilder {
    state_count: usize,
    initial_state: usize,
    agents: Vec<AgentSpec>,
    transitions: Vec<Vec<Vec<(usize, f64)>>>,
    rewards: Vec<Vec<f64>>,
    terminal: Vec<bool>,
}

impl GameBuilder {
    pub fn new(state_count: usize, agents: Vec<AgentSpec>) -> Self {
        let joint: usize = agents.iter().map(|a| a.shape.action_count).product();
        Self {
            state_count,
            initial_state: 0,
            agents,
            transitions: vec![vec![Vec::new(); joint]; state_count],
            rewards: vec![vec![0.0; joint]; state_count],
            terminal: vec![false; state_count],
        }
    }

    fn shapes(&self) -> Vec<AgentShape> {
        self.agents.iter().map(|a| a.shape).collect()
    }

    pub fn initial_state(mut self, state: usize) -> Self {
        self.initial_state = state;
        self
    }

    pub fn terminal(mut self, state: usize) -> Self {
        self.terminal[state] = true;
        self
    }

    /// Adds probability mass `p` for `state --actions--> next`.
    pub fn transition(mut self, state: usize, actions: &[usize], next: usize, p: f64) -> Self {
        let ja = joint_action_index(actions, &self.shapes()).expect("valid joint action");
        self.transitions[state][ja].push((next, p));
        self
    }

    pub fn transition_joint(mut self, state: usize, joint: usize, next: usize, p: f64) -> Self {
        self.transitions[state][joint].push((next, p));
        self
    }

    pub fn reward(mut self, state: usize, actions: &[usize], r: f64) -> Self {
        let ja = joint_action_index(actions, &self.shapes()).expect("valid joint action");
        self.rewards[state][ja] = r;
        self
    }

    pub fn reward_joint(mut self, state: usize, joint: usize, r: f64) -> Self {
        self.rewards[state][joint] = r;
        self
    }

    pub fn build(mut self) -> Result<GameModel> {
        for s in 0..self.state_count {
            if self.terminal[s] {
                for dist in &mut self.transitions[s] {
                    if dist.is_empty() {
                        dist.push((s, 1.0));
                    }
                }
            }
        }
        GameModel::new(
            self.state_count,
            self.initial_state,
            self.agents,
            self.transitions,
            self.rewards,
            self.terminal,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStreams;

    fn two_state() -> GameModel {
        GameModel::builder(2, vec![AgentSpec::fully_observing(2, 2)])
            .transition(0, &[0], 0, 0.3)
            .transition(0, &[0], 1, 0.7)
            .transition(0, &[1], 1, 1.0)
            .reward(0, &[1], 2.5)
            .terminal(1)
            .build()
            .unwrap()
    }

    #[test]
    fn builder_fills_terminal_self_loops() {
        let g = two_state();
        assert_eq!(g.transition(1, 0), &[(1, 1.0)]);
        assert!(g.terminal(1));
    }

    #[test]
    fn rejects_unnormalized_transitions() {
        let err = GameModel::builder(2, vec![AgentSpec::fully_observing(1, 2)])
            .transition(0, &[0], 1, 0.5)
            .terminal(1)
            .build()
            .unwrap_err();
        assert!(matches!(err, Error::InvalidDistribution { .. }));
    }

    #[test]
    fn rejects_rewarding_terminal_state() {
        let err = GameModel::builder(1, vec![AgentSpec::fully_observing(1, 1)])
            .reward(0, &[0], 1.0)
            .terminal(0)
            .build()
            .unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let g = two_state();
        let back = GameModel::from_json(&g.to_json().unwrap()).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn empirical_transition_frequencies_match() {
        let g = two_state();
        let mut rng = SeedStreams::new(11).stream(0);
        let n = 100_000;
        let hits = (0..n).filter(|_| g.step(&0, &[0], &mut rng).state == 1).count() as f64;
        let p = 0.7;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((hits / n as f64 - p).abs() < 3.0 * se);
    }
}
