//! Per-trial policy-gradient estimation and the two training drivers.
//!
//! Both drivers perform gradient *ascent* on the discounted value:
//! `Δw = α · estimate`. The distributed driver keeps the historical name
//! "distributed gradient descent" (DGD).

mod curve;
mod equivalence;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{discounted_return, run_episode, AgentHistory, Environment, History};
use crate::policy::{AgentPolicy, GradientEstimate};
use crate::rng::{EpisodeRng, SeedStreams};

pub use curve::{CurvePoint, LearningCurve};
pub use equivalence::{check_equivalence, EquivalenceReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub discount: f64,
    pub episodes: usize,
    pub horizon: usize,
    pub eval_every: usize,
    /// Fresh evaluation episodes per curve point; 0 records training
    /// returns only.
    #[serde(default)]
    pub eval_episodes: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.003,
            discount: 0.99,
            episodes: 1000,
            horizon: 100,
            eval_every: 100,
            eval_episodes: 0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::config(format!(
                "learning rate {} must be finite and non-negative",
                self.learning_rate
            )));
        }
        if !(0.0..1.0).contains(&self.discount) {
            return Err(Error::config(format!("discount {} must lie in [0, 1)", self.discount)));
        }
        if self.horizon == 0 {
            return Err(Error::config("horizon must be at least 1"));
        }
        if self.eval_every == 0 {
            return Err(Error::config("eval_every must be at least 1"));
        }
        Ok(())
    }
}

/// The per-trial estimate `sum_t gamma^t r(t) z_t` with the eligibility
/// `z_t = sum_{tau <= t} grad ln Pr(n(tau), a(tau) | n(tau-1), o(tau))`.
pub fn episode_gradient(policy: &AgentPolicy, history: &AgentHistory, gamma: f64) -> Result<GradientEstimate> {
    let mut eligibility = vec![0.0; policy.param_count()];
    let mut estimate = GradientEstimate::zeros(policy.param_count());
    let mut previous = history.initial_internal;
    let mut discount = 1.0;
    for step in &history.steps {
        check_step(policy, step.observation, previous, step.action, step.internal)?;
        policy.add_log_prob_gradient(step.observation, previous, step.action, step.internal, &mut eligibility);
        if step.reward != 0.0 {
            estimate.add_scaled(discount * step.reward, &eligibility);
        }
        discount *= gamma;
        previous = step.internal;
    }
    Ok(estimate)
}

fn check_step(policy: &AgentPolicy, observation: usize, internal: usize, action: usize, next: usize) -> Result<()> {
    let checks = [
        ("observation", observation, policy.observation_count()),
        ("internal state", internal, policy.internal_state_count()),
        ("action", action, policy.action_count()),
        ("internal state", next, policy.internal_state_count()),
    ];
    for (what, index, limit) in checks {
        if index >= limit {
            return Err(Error::IndexOutOfRange { what, index, limit });
        }
    }
    Ok(())
}

/// One agent's learning step: reads only its own local history and writes
/// only its own weights. Returns the applied update `α · estimate`.
pub fn agent_update(
    policy: &mut AgentPolicy,
    local: &AgentHistory,
    learning_rate: f64,
    gamma: f64,
) -> Result<Vec<f64>> {
    let estimate = episode_gradient(policy, local, gamma)?;
    let delta: Vec<f64> = estimate.as_slice().iter().map(|g| learning_rate * g).collect();
    for (w, d) in policy.params_mut().iter_mut().zip(&delta) {
        *w += d;
    }
    Ok(delta)
}

/// A product of per-agent policies controlled by one central learner whose
/// parameter vector is the concatenation of the agents' weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactoredController {
    policies: Vec<AgentPolicy>,
}

impl FactoredController {
    pub fn new(policies: Vec<AgentPolicy>) -> Self {
        Self { policies }
    }

    pub fn policies(&self) -> &[AgentPolicy] {
        &self.policies
    }

    pub fn into_policies(self) -> Vec<AgentPolicy> {
        self.policies
    }

    pub fn param_count(&self) -> usize {
        self.policies.iter().map(|p| p.param_count()).sum()
    }

    /// Offsets of each agent's block inside the joint parameter vector.
    pub fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.policies
            .iter()
            .map(|p| {
                let o = acc;
                acc += p.param_count();
                o
            })
            .collect()
    }

    pub fn params(&self) -> Vec<f64> {
        self.policies.iter().flat_map(|p| p.params().iter().copied()).collect()
    }

    pub fn add_to_params(&mut self, delta: &[f64]) {
        let mut rest = delta;
        for p in &mut self.policies {
            let (head, tail) = rest.split_at(p.param_count());
            for (w, d) in p.params_mut().iter_mut().zip(head) {
                *w += d;
            }
            rest = tail;
        }
    }

    /// `ln Pr(joint step)` = sum of the agents' step log-probabilities.
    pub fn log_prob(&self, previous: &[usize], step: &crate::game::JointStep) -> f64 {
        self.policies
            .iter()
            .zip(previous)
            .zip(&step.agents)
            .map(|((p, &n), s)| p.log_prob(s.observation, n, s.action, s.internal))
            .sum()
    }

    /// Adds the gradient of the joint step log-probability with respect to
    /// the full parameter vector: each factor contributes a full-length term
    /// that is zero outside its own block.
    pub fn add_log_prob_gradient(&self, previous: &[usize], step: &crate::game::JointStep, out: &mut [f64]) {
        let offsets = self.offsets();
        let mut factor = vec![0.0; out.len()];
        for (i, p) in self.policies.iter().enumerate() {
            factor.iter_mut().for_each(|x| *x = 0.0);
            let s = step.agents[i];
            let block = &mut factor[offsets[i]..offsets[i] + p.param_count()];
            p.add_log_prob_gradient(s.observation, previous[i], s.action, s.internal, block);
            for (o, f) in out.iter_mut().zip(&factor) {
                *o += f;
            }
        }
    }
}

/// The per-trial estimate for the whole factored controller computed from
/// the joint history.
pub fn joint_episode_gradient(
    controller: &FactoredController,
    history: &History,
    gamma: f64,
) -> Result<GradientEstimate> {
    if history.agent_count() != controller.policies.len() {
        return Err(Error::Arity {
            what: "agent histories",
            expected: controller.policies.len(),
            got: history.agent_count(),
        });
    }
    let n = controller.param_count();
    let mut eligibility = vec![0.0; n];
    let mut estimate = GradientEstimate::zeros(n);
    let mut previous = history.initial_internal.clone();
    let mut discount = 1.0;
    for step in &history.steps {
        for (i, (p, s)) in controller.policies.iter().zip(&step.agents).enumerate() {
            check_step(p, s.observation, previous[i], s.action, s.internal)?;
        }
        controller.add_log_prob_gradient(&previous, step, &mut eligibility);
        if step.reward != 0.0 {
            estimate.add_scaled(discount * step.reward, &eligibility);
        }
        discount *= gamma;
        for (prev, s) in previous.iter_mut().zip(&step.agents) {
            *prev = s.internal;
        }
    }
    Ok(estimate)
}

/// Mean undiscounted and discounted return of `policies` over `episodes`
/// fresh episodes drawn from `streams`.
pub fn evaluate_policies<E: Environment>(
    env: &E,
    policies: &[AgentPolicy],
    episodes: usize,
    horizon: usize,
    gamma: f64,
    streams: SeedStreams,
) -> Result<(f64, f64)> {
    let mut rng = streams.episode_rng(policies.len());
    let mut total = 0.0;
    let mut discounted = 0.0;
    for _ in 0..episodes {
        let h = run_episode(env, policies, horizon, &mut rng)?;
        total += h.undiscounted_return();
        discounted += discounted_return(&h, gamma);
    }
    let n = episodes.max(1) as f64;
    Ok((total / n, discounted / n))
}

/// Accumulates per-episode returns between curve points.
struct Recorder {
    curve: LearningCurve,
    sum: f64,
    discounted: f64,
    count: usize,
}

impl Recorder {
    fn new() -> Self {
        Self {
            curve: LearningCurve::default(),
            sum: 0.0,
            discounted: 0.0,
            count: 0,
        }
    }

    fn observe(&mut self, history: &History, gamma: f64) {
        self.sum += history.undiscounted_return();
        self.discounted += discounted_return(history, gamma);
        self.count += 1;
    }

    fn due(config: &TrainConfig, episode: usize) -> bool {
        episode % config.eval_every == 0 || episode == config.episodes
    }

    fn flush<E: Environment>(
        &mut self,
        episode: usize,
        env: &E,
        policies: &[AgentPolicy],
        config: &TrainConfig,
    ) -> Result<()> {
        let n = self.count.max(1) as f64;
        self.curve.push(episode, "return", self.sum / n)?;
        self.curve.push(episode, "discounted_return", self.discounted / n)?;
        if config.eval_episodes > 0 {
            let (mean, _) = evaluate_policies(
                env,
                policies,
                config.eval_episodes,
                config.horizon,
                config.discount,
                SeedStreams::new(config.seed).derive(1),
            )?;
            self.curve.push(episode, "eval_return", mean)?;
        }
        self.sum = 0.0;
        self.discounted = 0.0;
        self.count = 0;
        Ok(())
    }
}

/// Distributed training: every episode is sampled once from the current
/// profile; then each agent updates its own weights from its own local
/// history. The updates are applied together at episode end.
pub fn dgd_train<E: Environment>(
    env: &E,
    mut policies: Vec<AgentPolicy>,
    config: &TrainConfig,
) -> Result<(Vec<AgentPolicy>, LearningCurve)> {
    config.validate()?;
    let mut rng: EpisodeRng = SeedStreams::new(config.seed).episode_rng(policies.len());
    let mut recorder = Recorder::new();
    for episode in 1..=config.episodes {
        let history = run_episode(env, &policies, config.horizon, &mut rng)?;
        let locals = history.split();
        for (policy, local) in policies.iter_mut().zip(&locals) {
            agent_update(policy, local, config.learning_rate, config.discount)?;
        }
        recorder.observe(&history, config.discount);
        if Recorder::due(config, episode) {
            recorder.flush(episode, env, &policies, config)?;
        }
    }
    Ok((policies, recorder.curve))
}

/// Central training of a factored controller from joint histories.
pub fn joint_gradient_train<E: Environment>(
    env: &E,
    mut controller: FactoredController,
    config: &TrainConfig,
) -> Result<(FactoredController, LearningCurve)> {
    config.validate()?;
    let mut rng = SeedStreams::new(config.seed).episode_rng(controller.policies.len());
    let mut recorder = Recorder::new();
    for episode in 1..=config.episodes {
        let history = run_episode(env, &controller.policies, config.horizon, &mut rng)?;
        let estimate = joint_episode_gradient(&controller, &history, config.discount)?;
        let delta: Vec<f64> = estimate.as_slice().iter().map(|g| config.learning_rate * g).collect();
        controller.add_to_params(&delta);
        recorder.observe(&history, config.discount);
        if Recorder::due(config, episode) {
            recorder.flush(episode, env, &controller.policies, config)?;
        }
    }
    Ok((controller, recorder.curve))
}
