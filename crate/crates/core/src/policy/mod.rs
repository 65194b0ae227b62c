//! Parametric stochastic policies.
//!
//! Both policy kinds are Boltzmann (softmax) parameterizations over real
//! weights, so `ln Pr(step)` is smooth in every weight and its gradient is
//! available in closed form.

mod boltzmann;
mod fsc;
mod gradient;

use serde::{Deserialize, Serialize};

use crate::rng::SimRng;

pub use boltzmann::BoltzmannPolicy;
pub use fsc::FiniteStateController;
pub use gradient::GradientEstimate;

/// Numerically stable softmax of `row / temperature`.
pub fn softmax(row: &[f64], temperature: f64) -> Vec<f64> {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = row.iter().map(|w| ((w - max) / temperature).exp()).collect();
    let total: f64 = out.iter().sum();
    for p in &mut out {
        *p /= total;
    }
    out
}

/// `ln softmax(row / temperature)[index]`, computed without forming the
/// probabilities.
pub fn log_softmax(row: &[f64], temperature: f64, index: usize) -> f64 {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse: f64 = row.iter().map(|w| ((w - max) / temperature).exp()).sum::<f64>().ln();
    (row[index] - max) / temperature - lse
}

/// Adds `d ln softmax(row/θ)[chosen] / d row` into `out`:
/// `(1{k = chosen} - p_k) / θ`.
pub(crate) fn add_log_softmax_gradient(row: &[f64], temperature: f64, chosen: usize, out: &mut [f64]) {
    let probs = softmax(row, temperature);
    for (k, (o, p)) in out.iter_mut().zip(&probs).enumerate() {
        let indicator = if k == chosen { 1.0 } else { 0.0 };
        *o += (indicator - p) / temperature;
    }
}

/// A policy for one agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AgentPolicy {
    Reactive(BoltzmannPolicy),
    Fsc(FiniteStateController),
}

impl From<BoltzmannPolicy> for AgentPolicy {
    fn from(p: BoltzmannPolicy) -> Self {
        AgentPolicy::Reactive(p)
    }
}

impl From<FiniteStateController> for AgentPolicy {
    fn from(p: FiniteStateController) -> Self {
        AgentPolicy::Fsc(p)
    }
}

impl AgentPolicy {
    pub fn action_count(&self) -> usize {
        match self {
            AgentPolicy::Reactive(p) => p.action_count(),
            AgentPolicy::Fsc(p) => p.action_count(),
        }
    }

    pub fn observation_count(&self) -> usize {
        match self {
            AgentPolicy::Reactive(p) => p.observation_count(),
            AgentPolicy::Fsc(p) => p.observation_count(),
        }
    }

    pub fn internal_state_count(&self) -> usize {
        match self {
            AgentPolicy::Reactive(_) => 1,
            AgentPolicy::Fsc(p) => p.internal_state_count(),
        }
    }

    pub fn initial_internal(&self) -> usize {
        0
    }

    pub fn is_reactive(&self) -> bool {
        matches!(self, AgentPolicy::Reactive(_))
    }

    pub fn temperature(&self) -> f64 {
        match self {
            AgentPolicy::Reactive(p) => p.temperature,
            AgentPolicy::Fsc(p) => p.temperature,
        }
    }

    pub fn params(&self) -> &[f64] {
        match self {
            AgentPolicy::Reactive(p) => &p.weights,
            AgentPolicy::Fsc(p) => &p.weights,
        }
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        match self {
            AgentPolicy::Reactive(p) => &mut p.weights,
            AgentPolicy::Fsc(p) => &mut p.weights,
        }
    }

    pub fn param_count(&self) -> usize {
        self.params().len()
    }

    /// Action distribution. Reactive policies read the observation's row;
    /// controllers read the internal state's row and ignore `observation`.
    pub fn action_probabilities(&self, observation: usize, internal: usize) -> Vec<f64> {
        match self {
            AgentPolicy::Reactive(p) => p.probabilities(observation),
            AgentPolicy::Fsc(p) => p.action_probabilities(internal),
        }
    }

    /// Distribution of the next internal state given the previous one and
    /// the current observation. Reactive policies have a single state.
    pub fn transition_probabilities(&self, internal: usize, observation: usize) -> Vec<f64> {
        match self {
            AgentPolicy::Reactive(_) => vec![1.0],
            AgentPolicy::Fsc(p) => p.transition_probabilities(internal, observation),
        }
    }

    /// Samples `(action, next_internal)`. The controller first moves to
    /// `n' ~ η(internal, observation)` and then draws `a ~ ψ(n')`.
    pub fn act(&self, observation: usize, internal: usize, rng: &mut SimRng) -> (usize, usize) {
        match self {
            AgentPolicy::Reactive(p) => (p.sample(observation, rng), 0),
            AgentPolicy::Fsc(p) => p.act(observation, internal, rng),
        }
    }

    /// Joint distribution over `(next_internal, action)` as a sparse list.
    pub fn step_distribution(&self, observation: usize, internal: usize) -> Vec<(usize, usize, f64)> {
        match self {
            AgentPolicy::Reactive(p) => p
                .probabilities(observation)
                .into_iter()
                .enumerate()
                .map(|(a, prob)| (0, a, prob))
                .collect(),
            AgentPolicy::Fsc(p) => p.step_distribution(observation, internal),
        }
    }

    /// `ln Pr(next_internal, action | internal, observation)`.
    pub fn log_prob(&self, observation: usize, internal: usize, action: usize, next_internal: usize) -> f64 {
        match self {
            AgentPolicy::Reactive(p) => p.log_prob(observation, action),
            AgentPolicy::Fsc(p) => p.log_prob(observation, internal, action, next_internal),
        }
    }

    /// Adds the gradient of [`AgentPolicy::log_prob`] with respect to every
    /// weight into `out` (length [`AgentPolicy::param_count`]).
    pub fn add_log_prob_gradient(
        &self,
        observation: usize,
        internal: usize,
        action: usize,
        next_internal: usize,
        out: &mut [f64],
    ) {
        match self {
            AgentPolicy::Reactive(p) => p.add_log_prob_gradient(observation, action, out),
            AgentPolicy::Fsc(p) => p.add_log_prob_gradient(observation, internal, action, next_internal, out),
        }
    }

    pub fn log_prob_gradient(
        &self,
        observation: usize,
        internal: usize,
        action: usize,
        next_internal: usize,
    ) -> GradientEstimate {
        let mut g = GradientEstimate::zeros(self.param_count());
        self.add_log_prob_gradient(observation, internal, action, next_internal, g.as_mut_slice());
        g
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string(self)
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}
