use crate::error::{Error, Result};
use crate::game::{joint_action_index, AgentShape, GameModel};
use crate::policy::AgentPolicy;

/// Refuse enumerations that could visit more histories than this.
pub const HISTORY_LIMIT: f64 = 1e6;

/// Upper bound on the number of distinct histories of length `horizon`:
/// the per-step branching (observations × internal states × actions per
/// agent, times successor states) raised to the horizon.
pub fn history_count_bound(game: &GameModel, policies: &[AgentPolicy], horizon: usize) -> f64 {
    let mut per_step = 1.0;
    for (i, (agent, policy)) in game.agents().iter().zip(policies).enumerate() {
        let obs_support = (0..game.state_count())
            .map(|s| game.observation_row(i, s).iter().filter(|&&p| p > 0.0).count())
            .max()
            .unwrap_or(1);
        per_step *= (obs_support * policy.internal_state_count() * agent.shape.action_count) as f64;
    }
    let joint = game.agents().iter().map(|a| a.shape.action_count).product::<usize>();
    let successors = (0..game.state_count())
        .flat_map(|s| (0..joint).map(move |ja| (s, ja)))
        .map(|(s, ja)| game.transition(s, ja).iter().filter(|(_, p)| *p > 0.0).count())
        .max()
        .unwrap_or(1);
    (per_step * successors as f64).powi(horizon as i32)
}

struct Walker<'a> {
    game: &'a GameModel,
    policies: &'a [AgentPolicy],
    shapes: Vec<AgentShape>,
    gamma: f64,
    horizon: usize,
    result: Vec<Vec<f64>>,
}

/// One agent's contribution to a joint step: its observation, internal
/// transition and action, with probability `B(o|s) Pr(n', a | n, o)`.
#[derive(Clone, Copy)]
struct Branch {
    observation: usize,
    next: usize,
    action: usize,
    prob: f64,
}

impl Walker<'_> {
    fn branches(&self, agent: usize, state: usize, internal: usize) -> Vec<Branch> {
        let mut out = Vec::new();
        for (o, &po) in self.game.observation_row(agent, state).iter().enumerate() {
            if po == 0.0 {
                continue;
            }
            for (next, action, p) in self.policies[agent].step_distribution(o, internal) {
                out.push(Branch {
                    observation: o,
                    next,
                    action,
                    prob: po * p,
                });
            }
        }
        out
    }

    /// Depth-first over complete histories. `estimate` is the running
    /// per-trial estimator `sum_t γ^t r(t) z_t` of the current prefix.
    fn walk(
        &mut self,
        t: usize,
        state: usize,
        internal: &[usize],
        prob: f64,
        eligibility: &[Vec<f64>],
        estimate: &[Vec<f64>],
    ) {
        if t == self.horizon || self.game.terminal(state) {
            for (acc, est) in self.result.iter_mut().zip(estimate) {
                for (a, e) in acc.iter_mut().zip(est) {
                    *a += prob * e;
                }
            }
            return;
        }
        let per_agent: Vec<Vec<Branch>> = (0..self.policies.len())
            .map(|i| self.branches(i, state, internal[i]))
            .collect();
        let mut choice = vec![0usize; per_agent.len()];
        let discount = self.gamma.powi(t as i32);
        'odometer: loop {
            let picked: Vec<Branch> = choice.iter().enumerate().map(|(i, &c)| per_agent[i][c]).collect();
            let step_prob: f64 = picked.iter().map(|b| b.prob).product();
            let actions: Vec<usize> = picked.iter().map(|b| b.action).collect();
            let ja = joint_action_index(&actions, &self.shapes).expect("actions in range");
            let reward = self.game.reward(state, ja);

            let mut z = eligibility.to_vec();
            for (i, b) in picked.iter().enumerate() {
                self.policies[i].add_log_prob_gradient(b.observation, internal[i], b.action, b.next, &mut z[i]);
            }
            let mut est = estimate.to_vec();
            if reward != 0.0 {
                for (e_i, z_i) in est.iter_mut().zip(&z) {
                    for (e, zk) in e_i.iter_mut().zip(z_i) {
                        *e += discount * reward * zk;
                    }
                }
            }
            let next_internal: Vec<usize> = picked.iter().map(|b| b.next).collect();
            for &(next_state, pt) in self.game.transition(state, ja) {
                if pt > 0.0 {
                    self.walk(t + 1, next_state, &next_internal, prob * step_prob * pt, &z, &est);
                }
            }

            for i in 0..choice.len() {
                choice[i] += 1;
                if choice[i] < per_agent[i].len() {
                    continue 'odometer;
                }
                choice[i] = 0;
            }
            break;
        }
    }
}

/// `sum_h Pr(h | profile) · estimate(h)` over every history of at most
/// `horizon` steps, per agent and weight. Histories that end in a terminal
/// state earlier are complete at that point.
pub fn enumerate_estimator_expectation(
    game: &GameModel,
    policies: &[AgentPolicy],
    gamma: f64,
    horizon: usize,
) -> Result<Vec<Vec<f64>>> {
    if policies.len() != game.agents().len() {
        return Err(Error::Arity {
            what: "policies",
            expected: game.agents().len(),
            got: policies.len(),
        });
    }
    let bound = history_count_bound(game, policies, horizon);
    if bound > HISTORY_LIMIT {
        return Err(Error::EnumerationLimit {
            bound,
            limit: HISTORY_LIMIT,
        });
    }
    let zeros: Vec<Vec<f64>> = policies.iter().map(|p| vec![0.0; p.param_count()]).collect();
    let mut walker = Walker {
        game,
        policies,
        shapes: game.agents().iter().map(|a| a.shape).collect(),
        gamma,
        horizon,
        result: zeros.clone(),
    };
    let internal: Vec<usize> = policies.iter().map(|p| p.initial_internal()).collect();
    walker.walk(0, game.initial_state(), &internal, 1.0, &zeros, &zeros);
    Ok(walker.result)
}
