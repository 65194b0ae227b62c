use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{add_log_softmax_gradient, log_softmax, softmax};
use crate::rng::{sample_index, SimRng};

/// Memoryless policy: one softmax row of weights per observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoltzmannPolicy {
    observations: usize,
    actions: usize,
    pub temperature: f64,
    /// Row-major `(observation, action)`.
    pub weights: Vec<f64>,
}

impl BoltzmannPolicy {
    pub fn new(observations: usize, actions: usize, temperature: f64) -> Self {
        Self::from_weights(observations, actions, temperature, vec![0.0; observations * actions])
    }

    pub fn from_weights(observations: usize, actions: usize, temperature: f64, weights: Vec<f64>) -> Self {
        assert!(observations > 0 && actions > 0, "empty policy");
        assert!(temperature > 0.0, "temperature must be positive");
        assert_eq!(weights.len(), observations * actions, "weight count");
        Self {
            observations,
            actions,
            temperature,
            weights,
        }
    }

    /// Weights drawn uniformly from `[-range, range]`.
    pub fn random(observations: usize, actions: usize, temperature: f64, range: f64, rng: &mut SimRng) -> Self {
        let weights = (0..observations * actions)
            .map(|_| {
                if range > 0.0 {
                    rng.gen_range(-range..=range)
                } else {
                    0.0
                }
            })
            .collect();
        Self::from_weights(observations, actions, temperature, weights)
    }

    /// A policy that plays `choice[o]` in observation `o` with probability
    /// `softmax(+margin, -margin)`. A margin of 20 puts the remaining mass
    /// below 1e-17.
    pub fn deterministic(choice: &[usize], actions: usize, margin: f64) -> Self {
        let mut weights = vec![-margin; choice.len() * actions];
        for (o, &a) in choice.iter().enumerate() {
            weights[o * actions + a] = margin;
        }
        Self::from_weights(choice.len(), actions, 1.0, weights)
    }

    pub fn observation_count(&self) -> usize {
        self.observations
    }

    pub fn action_count(&self) -> usize {
        self.actions
    }

    pub fn row(&self, observation: usize) -> &[f64] {
        let start = observation * self.actions;
        &self.weights[start..start + self.actions]
    }

    pub fn row_mut(&mut self, observation: usize) -> &mut [f64] {
        let start = observation * self.actions;
        &mut self.weights[start..start + self.actions]
    }

    pub fn probabilities(&self, observation: usize) -> Vec<f64> {
        softmax(self.row(observation), self.temperature)
    }

    pub fn sample(&self, observation: usize, rng: &mut SimRng) -> usize {
        sample_index(&self.probabilities(observation), rng)
    }

    pub fn log_prob(&self, observation: usize, action: usize) -> f64 {
        log_softmax(self.row(observation), self.temperature, action)
    }

    pub fn add_log_prob_gradient(&self, observation: usize, action: usize, out: &mut [f64]) {
        let start = observation * self.actions;
        add_log_softmax_gradient(
            self.row(observation),
            self.temperature,
            action,
            &mut out[start..start + self.actions],
        );
    }
}
