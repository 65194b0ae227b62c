use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{add_log_softmax_gradient, log_softmax, softmax};
use crate::rng::{sample_index, SimRng};

/// Finite state controller `<N, n0 = 0, η, ψ>`.
///
/// Weights are stored in one flat vector: first the internal-transition
/// block indexed `(n, o, n')`, then the action block indexed `(n, a)`.
/// Each step moves to `n' ~ η(n, o)` and then acts with `a ~ ψ(n')`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteStateController {
    internal_states: usize,
    observations: usize,
    actions: usize,
    pub temperature: f64,
    pub weights: Vec<f64>,
}

impl FiniteStateController {
    pub fn new(internal_states: usize, observations: usize, actions: usize, temperature: f64) -> Self {
        let len = Self::len_for(internal_states, observations, actions);
        Self::from_weights(internal_states, observations, actions, temperature, vec![0.0; len])
    }

    fn len_for(n: usize, o: usize, a: usize) -> usize {
        n * o * n + n * a
    }

    pub fn from_weights(
        internal_states: usize,
        observations: usize,
        actions: usize,
        temperature: f64,
        weights: Vec<f64>,
    ) -> Self {
        assert!(
            internal_states > 0 && observations > 0 && actions > 0,
            "empty controller"
        );
        assert!(temperature > 0.0, "temperature must be positive");
        assert_eq!(
            weights.len(),
            Self::len_for(internal_states, observations, actions),
            "weight count"
        );
        Self {
            internal_states,
            observations,
            actions,
            temperature,
            weights,
        }
    }

    pub fn random(
        internal_states: usize,
        observations: usize,
        actions: usize,
        temperature: f64,
        range: f64,
        rng: &mut SimRng,
    ) -> Self {
        let len = Self::len_for(internal_states, observations, actions);
        let weights = (0..len)
            .map(|_| {
                if range > 0.0 {
                    rng.gen_range(-range..=range)
                } else {
                    0.0
                }
            })
            .collect();
        Self::from_weights(internal_states, observations, actions, temperature, weights)
    }

    pub fn internal_state_count(&self) -> usize {
        self.internal_states
    }

    pub fn observation_count(&self) -> usize {
        self.observations
    }

    pub fn action_count(&self) -> usize {
        self.actions
    }

    fn action_offset(&self) -> usize {
        self.internal_states * self.observations * self.internal_states
    }

    fn transition_range(&self, internal: usize, observation: usize) -> std::ops::Range<usize> {
        let start = (internal * self.observations + observation) * self.internal_states;
        start..start + self.internal_states
    }

    fn action_range(&self, internal: usize) -> std::ops::Range<usize> {
        let start = self.action_offset() + internal * self.actions;
        start..start + self.actions
    }

    pub fn transition_weights(&self, internal: usize, observation: usize) -> &[f64] {
        &self.weights[self.transition_range(internal, observation)]
    }

    pub fn action_weights(&self, internal: usize) -> &[f64] {
        &self.weights[self.action_range(internal)]
    }

    pub fn action_weights_mut(&mut self, internal: usize) -> &mut [f64] {
        let r = self.action_range(internal);
        &mut self.weights[r]
    }

    pub fn transition_probabilities(&self, internal: usize, observation: usize) -> Vec<f64> {
        softmax(self.transition_weights(internal, observation), self.temperature)
    }

    pub fn action_probabilities(&self, internal: usize) -> Vec<f64> {
        softmax(self.action_weights(internal), self.temperature)
    }

    pub fn act(&self, observation: usize, internal: usize, rng: &mut SimRng) -> (usize, usize) {
        let next = if self.internal_states == 1 {
            0
        } else {
            sample_index(&self.transition_probabilities(internal, observation), rng)
        };
        let action = sample_index(&self.action_probabilities(next), rng);
        (action, next)
    }

    pub fn step_distribution(&self, observation: usize, internal: usize) -> Vec<(usize, usize, f64)> {
        let eta = self.transition_probabilities(internal, observation);
        let mut out = Vec::with_capacity(self.internal_states * self.actions);
        for (next, pn) in eta.into_iter().enumerate() {
            for (a, pa) in self.action_probabilities(next).into_iter().enumerate() {
                out.push((next, a, pn * pa));
            }
        }
        out
    }

    pub fn log_prob(&self, observation: usize, internal: usize, action: usize, next_internal: usize) -> f64 {
        log_softmax(
            self.transition_weights(internal, observation),
            self.temperature,
            next_internal,
        ) + log_softmax(self.action_weights(next_internal), self.temperature, action)
    }

    pub fn add_log_prob_gradient(
        &self,
        observation: usize,
        internal: usize,
        action: usize,
        next_internal: usize,
        out: &mut [f64],
    ) {
        let tr = self.transition_range(internal, observation);
        add_log_softmax_gradient(&self.weights[tr.clone()], self.temperature, next_internal, &mut out[tr]);
        let ar = self.action_range(next_internal);
        add_log_softmax_gradient(&self.weights[ar.clone()], self.temperature, action, &mut out[ar]);
    }
}
