//! Experiment configuration. Every constant a run depends on lives here so
//! a dumped config fully describes the run.

use dgd_core::domains::soccer::{OpponentKind, DEFAULT_MAX_STEPS};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    Coordination,
    Soccer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LearnerKind {
    DgdReactive,
    DgdFsc,
    QlearnFull,
    QlearnPartial,
}

impl LearnerKind {
    pub fn is_dgd(self) -> bool {
        matches!(self, LearnerKind::DgdReactive | LearnerKind::DgdFsc)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub domain: Domain,
    /// Soccer only.
    #[serde(default)]
    pub opponents: Vec<OpponentKind>,
    pub learner: LearnerKind,
    /// Internal states for `dgd-fsc`.
    #[serde(default = "default_fsc_states")]
    pub fsc_states: usize,
    pub learning_rate: f64,
    pub discount: f64,
    /// Exploration rate (Q-learning only).
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    /// Initial weights are uniform in `[-init_range, init_range]`.
    #[serde(default)]
    pub init_range: f64,
    pub episodes: usize,
    pub horizon: usize,
    pub eval_every: usize,
    #[serde(default)]
    pub eval_episodes: usize,
    pub runs: usize,
    pub seed: u64,
    #[serde(default = "default_pass")]
    pub pass_enabled: bool,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
}

fn default_fsc_states() -> usize {
    1
}

fn default_temperature() -> f64 {
    1.0
}

fn default_pass() -> bool {
    true
}

fn default_max_steps() -> usize {
    DEFAULT_MAX_STEPS
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "coordination".into(),
            domain: Domain::Coordination,
            opponents: Vec::new(),
            learner: LearnerKind::DgdReactive,
            fsc_states: 1,
            learning_rate: 0.003,
            discount: 0.99,
            epsilon: 0.0,
            temperature: 1.0,
            init_range: 0.1,
            episodes: 500_000,
            horizon: 10,
            eval_every: 1000,
            eval_episodes: 0,
            runs: 10,
            seed: 0,
            pass_enabled: true,
            max_steps: DEFAULT_MAX_STEPS,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), String> {
        let mut problems = Vec::new();
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            problems.push("learning_rate must be finite and non-negative");
        }
        if !(0.0..1.0).contains(&self.discount) {
            problems.push("discount must lie in [0, 1)");
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            problems.push("epsilon must lie in [0, 1]");
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            problems.push("temperature must be positive");
        }
        if !(self.init_range >= 0.0 && self.init_range.is_finite()) {
            problems.push("init_range must be non-negative");
        }
        if self.horizon == 0 || self.eval_every == 0 || self.runs == 0 {
            problems.push("horizon, eval_every and runs must be at least 1");
        }
        if self.learner == LearnerKind::DgdFsc && self.fsc_states == 0 {
            problems.push("dgd-fsc needs at least one internal state");
        }
        if !self.learner.is_dgd() && self.learning_rate > 1.0 {
            problems.push("Q-learning rate must lie in [0, 1]");
        }
        match self.domain {
            Domain::Soccer if self.opponents.is_empty() => problems.push("soccer needs at least one opponent"),
            Domain::Soccer if self.max_steps == 0 => problems.push("max_steps must be at least 1"),
            Domain::Coordination if !self.opponents.is_empty() => {
                problems.push("the coordination game has no opponents")
            }
            _ => {}
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(problems.join("; "))
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let config: Self = serde_json::from_str(text).map_err(|e| e.to_string())?;
        config.validate()?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let c = ExperimentConfig {
            domain: Domain::Soccer,
            opponents: vec![OpponentKind::Greedy, OpponentKind::Defensive],
            learner: LearnerKind::QlearnPartial,
            learning_rate: 0.1,
            discount: 0.999,
            epsilon: 0.4,
            ..ExperimentConfig::default()
        };
        assert_eq!(ExperimentConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn rejects_bad_values() {
        let c = ExperimentConfig {
            discount: 1.0,
            runs: 0,
            ..ExperimentConfig::default()
        };
        let err = c.validate().unwrap_err();
        assert!(err.contains("discount") && err.contains("runs"));
        assert!(ExperimentConfig::from_json(r#"{"name": "x", "bogus": 1}"#).is_err());
    }
}
