//! Central-controller tabular Q-learning over the joint action space.
//!
//! In [`StateMode::Full`] the table is keyed on the environment state; in
//! [`StateMode::Partial`] it is keyed only on the concatenation of the
//! agents' current observations.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{decode_joint_action, AgentShape, Environment};
use crate::learner::LearningCurve;
use crate::rng::{SeedStreams, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateMode {
    Full,
    Partial,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    action_count: usize,
    initial_value: f64,
    rows: HashMap<u64, Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct QTableDocument {
    action_count: usize,
    initial_value: f64,
    rows: Vec<(u64, Vec<f64>)>,
}

impl QTable {
    pub fn new(action_count: usize, initial_value: f64) -> Self {
        assert!(action_count > 0, "empty action space");
        Self {
            action_count,
            initial_value,
            rows: HashMap::new(),
        }
    }

    pub fn action_count(&self) -> usize {
        self.action_count
    }

    pub fn initial_value(&self) -> f64 {
        self.initial_value
    }

    /// Number of states with at least one stored entry.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, state: u64, action: usize) -> f64 {
        self.rows.get(&state).map_or(self.initial_value, |r| r[action])
    }

    pub fn set(&mut self, state: u64, action: usize, value: f64) {
        let (n, init) = (self.action_count, self.initial_value);
        self.rows.entry(state).or_insert_with(|| vec![init; n])[action] = value;
    }

    pub fn max_value(&self, state: u64) -> f64 {
        match self.rows.get(&state) {
            Some(r) => r.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            None => self.initial_value,
        }
    }

    /// Argmax with uniform tie-breaking.
    pub fn greedy_action(&self, state: u64, rng: &mut SimRng) -> usize {
        let Some(row) = self.rows.get(&state) else {
            return rng.gen_range(0..self.action_count);
        };
        let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let ties: Vec<usize> = (0..row.len()).filter(|&a| row[a] == best).collect();
        if ties.len() == 1 {
            ties[0]
        } else {
            ties[rng.gen_range(0..ties.len())]
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut rows: Vec<(u64, Vec<f64>)> = self.rows.iter().map(|(k, v)| (*k, v.clone())).collect();
        rows.sort_by_key(|(k, _)| *k);
        Ok(serde_json::to_string(&QTableDocument {
            action_count: self.action_count,
            initial_value: self.initial_value,
            rows,
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: QTableDocument = serde_json::from_str(text)?;
        let mut table = QTable::new(doc.action_count, doc.initial_value);
        for (k, v) in doc.rows {
            if v.len() != doc.action_count {
                return Err(Error::Arity {
                    what: "q-values",
                    expected: doc.action_count,
                    got: v.len(),
                });
            }
            table.rows.insert(k, v);
        }
        Ok(table)
    }
}

/// `Q(s,a) += α (r + γ max_a' Q(s',a') - Q(s,a))`; a terminal successor
/// (`next = None`) contributes 0.
pub fn q_update(table: &mut QTable, state: u64, action: usize, reward: f64, next: Option<u64>, alpha: f64, gamma: f64) {
    let bootstrap = next.map_or(0.0, |s| table.max_value(s));
    let current = table.get(state, action);
    let target = reward + gamma * bootstrap;
    table.set(state, action, current + alpha * (target - current));
}

/// Uniform joint action with probability `epsilon`, greedy otherwise.
pub fn epsilon_greedy(table: &QTable, state: u64, epsilon: f64, rng: &mut SimRng) -> usize {
    if epsilon > 0.0 && rng.gen::<f64>() < epsilon {
        rng.gen_range(0..table.action_count)
    } else {
        table.greedy_action(state, rng)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QConfig {
    pub learning_rate: f64,
    pub discount: f64,
    pub epsilon: f64,
    pub episodes: usize,
    pub horizon: usize,
    pub eval_every: usize,
    pub eval_episodes: usize,
    pub seed: u64,
    #[serde(default)]
    pub initial_value: f64,
    pub mode: StateMode,
}

impl Default for QConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            discount: 0.999,
            epsilon: 0.4,
            episodes: 1000,
            horizon: 500,
            eval_every: 100,
            eval_episodes: 1000,
            seed: 0,
            initial_value: 0.0,
            mode: StateMode::Full,
        }
    }
}

impl QConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.learning_rate) {
            return Err(Error::config("Q-learning rate must lie in [0, 1]"));
        }
        if !(0.0..1.0).contains(&self.discount) {
            return Err(Error::config("discount must lie in [0, 1)"));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::config("epsilon must lie in [0, 1]"));
        }
        if self.horizon == 0 || self.eval_every == 0 {
            return Err(Error::config("horizon and eval_every must be at least 1"));
        }
        Ok(())
    }
}

/// Table key of the current situation under `mode`.
pub fn state_key<E: Environment>(env: &E, state: &E::State, mode: StateMode, rng: &mut SimRng) -> u64 {
    match mode {
        StateMode::Full => env.state_key(state),
        StateMode::Partial => joint_observation_key(env, state, rng),
    }
}

/// Mixed-radix code of all agents' current observations, agent 0 least
/// significant.
pub fn joint_observation_key<E: Environment>(env: &E, state: &E::State, rng: &mut SimRng) -> u64 {
    let mut key = 0u64;
    let mut radix = 1u64;
    for (i, shape) in env.agent_shapes().iter().enumerate() {
        key += env.observe(state, i, rng) as u64 * radix;
        radix *= shape.observation_count as u64;
    }
    key
}

/// Mean undiscounted return of the greedy policy over `episodes` episodes.
pub fn greedy_evaluation<E: Environment>(
    env: &E,
    table: &QTable,
    mode: StateMode,
    episodes: usize,
    horizon: usize,
    streams: SeedStreams,
) -> f64 {
    let mut env_rng = streams.stream(crate::rng::ENV_STREAM);
    let mut act_rng = streams.stream(crate::rng::AGENT_BASE);
    let shapes: Vec<AgentShape> = env.agent_shapes().to_vec();
    let mut total = 0.0;
    for _ in 0..episodes {
        let mut state = env.reset(&mut env_rng);
        for _ in 0..horizon {
            if env.is_terminal(&state) {
                break;
            }
            let key = state_key(env, &state, mode, &mut env_rng);
            let joint = table.greedy_action(key, &mut act_rng);
            let actions = decode_joint_action(joint, &shapes).expect("joint action in range");
            let tr = env.step(&state, &actions, &mut env_rng);
            total += tr.reward;
            state = tr.state;
            if tr.done {
                break;
            }
        }
    }
    total / episodes.max(1) as f64
}

/// Trains a central ε-greedy Q-learner. Every `eval_every` episodes (and at
/// the last one) the greedy policy is evaluated on a fixed evaluation
/// stream and recorded as `eval_return`; with zero episodes the initial
/// table is evaluated at episode 0.
pub fn q_train<E: Environment>(env: &E, config: &QConfig) -> Result<(QTable, LearningCurve)> {
    config.validate()?;
    let shapes: Vec<AgentShape> = env.agent_shapes().to_vec();
    let mut table = QTable::new(env.joint_action_count(), config.initial_value);
    assert_eq!(
        table.action_count(),
        shapes.iter().map(|s| s.action_count).product::<usize>()
    );
    let streams = SeedStreams::new(config.seed);
    let eval_streams = streams.derive(1);
    let mut env_rng = streams.stream(crate::rng::ENV_STREAM);
    let mut act_rng = streams.stream(crate::rng::AGENT_BASE);
    let mut curve = LearningCurve::default();
    let evaluate = |table: &QTable| {
        greedy_evaluation(
            env,
            table,
            config.mode,
            config.eval_episodes,
            config.horizon,
            eval_streams,
        )
    };

    if config.episodes == 0 {
        curve.push(0, "eval_return", evaluate(&table))?;
        return Ok((table, curve));
    }

    let mut window_sum = 0.0;
    let mut window_len = 0usize;
    for episode in 1..=config.episodes {
        let mut state = env.reset(&mut env_rng);
        let mut key = state_key(env, &state, config.mode, &mut env_rng);
        let mut ret = 0.0;
        for _ in 0..config.horizon {
            if env.is_terminal(&state) {
                break;
            }
            let joint = epsilon_greedy(&table, key, config.epsilon, &mut act_rng);
            let actions = decode_joint_action(joint, &shapes)?;
            let tr = env.step(&state, &actions, &mut env_rng);
            ret += tr.reward;
            let next_key = if tr.done {
                None
            } else {
                Some(state_key(env, &tr.state, config.mode, &mut env_rng))
            };
            q_update(
                &mut table,
                key,
                joint,
                tr.reward,
                next_key,
                config.learning_rate,
                config.discount,
            );
            state = tr.state;
            match next_key {
                Some(k) => key = k,
                None => break,
            }
        }
        window_sum += ret;
        window_len += 1;
        if episode % config.eval_every == 0 || episode == config.episodes {
            curve.push(episode, "return", window_sum / window_len as f64)?;
            if config.eval_episodes > 0 {
                curve.push(episode, "eval_return", evaluate(&table))?;
            }
            window_sum = 0.0;
            window_len = 0;
        }
    }
    Ok((table, curve))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng() -> SimRng {
        SeedStreams::new(5).stream(0)
    }

    #[test]
    fn full_step_to_target() {
        let mut t = QTable::new(2, 0.0);
        q_update(&mut t, 0, 1, 1.0, Some(3), 1.0, 0.0);
        assert_eq!(t.get(0, 1), 1.0);
        assert_eq!(t.get(0, 0), 0.0);
    }

    #[test]
    fn zero_rate_leaves_table_unchanged() {
        let mut t = QTable::new(2, 0.5);
        q_update(&mut t, 0, 0, 10.0, None, 0.0, 0.9);
        assert_eq!(t.get(0, 0), 0.5);
    }

    #[test]
    fn terminal_successor_does_not_bootstrap() {
        let mut t = QTable::new(1, 0.0);
        t.set(9, 0, 100.0);
        q_update(&mut t, 0, 0, 1.0, None, 1.0, 0.9);
        assert_eq!(t.get(0, 0), 1.0);
    }

    #[test]
    fn two_state_chain_converges_to_bellman_solution() {
        // States 0 -> 1 -> terminal with rewards 1 then 2, a single action.
        // Bellman: Q(1) = 2, Q(0) = 1 + γ·2.
        let gamma = 0.9;
        let mut t = QTable::new(1, 0.0);
        for _ in 0..500 {
            q_update(&mut t, 0, 0, 1.0, Some(1), 0.5, gamma);
            q_update(&mut t, 1, 0, 2.0, None, 0.5, gamma);
        }
        assert!((t.get(1, 0) - 2.0).abs() < 1e-6);
        assert!((t.get(0, 0) - (1.0 + gamma * 2.0)).abs() < 1e-6);
    }

    #[test]
    fn epsilon_one_is_uniform() {
        let mut t = QTable::new(4, 0.0);
        t.set(0, 2, 5.0);
        let mut r = rng();
        let n = 100_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            counts[epsilon_greedy(&t, 0, 1.0, &mut r)] += 1;
        }
        let p = 0.25;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        for c in counts {
            assert!((c as f64 / n as f64 - p).abs() < 3.0 * se, "{counts:?}");
        }
    }

    #[test]
    fn epsilon_zero_unique_max_is_greedy() {
        let mut t = QTable::new(3, 0.0);
        t.set(7, 1, 0.5);
        let mut r = rng();
        assert!((0..1000).all(|_| epsilon_greedy(&t, 7, 0.0, &mut r) == 1));
    }

    #[test]
    fn epsilon_zero_ties_split_evenly() {
        let mut t = QTable::new(3, 0.0);
        t.set(7, 0, 1.0);
        t.set(7, 2, 1.0);
        let mut r = rng();
        let n = 10_000;
        let zeros = (0..n).filter(|_| epsilon_greedy(&t, 7, 0.0, &mut r) == 0).count();
        let se = (0.25 / n as f64).sqrt();
        assert!((zeros as f64 / n as f64 - 0.5).abs() < 3.0 * se);
    }

    #[test]
    fn json_round_trip() {
        let mut t = QTable::new(2, 0.25);
        t.set(3, 1, -0.1);
        t.set(1, 0, 7.0);
        assert_eq!(QTable::from_json(&t.to_json().unwrap()).unwrap(), t);
    }
}
