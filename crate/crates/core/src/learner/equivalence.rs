//! Lock-step comparison of distributed and joint training on one shared
//! stream of sampled histories.

use serde::{Deserialize, Serialize};

use super::{agent_update, joint_episode_gradient, FactoredController, TrainConfig};
use crate::error::Result;
use crate::game::{run_episode, Environment};
use crate::policy::AgentPolicy;
use crate::rng::SeedStreams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub episodes: usize,
    pub weights: usize,
    /// Largest per-weight difference between the distributed and joint
    /// updates of any single episode.
    pub max_update_gap: f64,
    /// Largest per-weight difference between the two learners' weights at
    /// any point of the run.
    pub max_weight_gap: f64,
}

/// Runs both learners side by side. Each episode is sampled once from the
/// distributed learner's profile; both learners update from that history,
/// the distributed one through each agent's local slice and the joint one
/// through the joint log-probability.
pub fn check_equivalence<E: Environment>(
    env: &E,
    policies: Vec<AgentPolicy>,
    config: &TrainConfig,
) -> Result<EquivalenceReport> {
    config.validate()?;
    let mut distributed = policies.clone();
    let mut joint = FactoredController::new(policies);
    let offsets = joint.offsets();
    let mut rng = SeedStreams::new(config.seed).episode_rng(distributed.len());
    let mut report = EquivalenceReport {
        episodes: config.episodes,
        weights: joint.param_count(),
        max_update_gap: 0.0,
        max_weight_gap: 0.0,
    };
    for _ in 0..config.episodes {
        let history = run_episode(env, &distributed, config.horizon, &mut rng)?;

        let joint_delta: Vec<f64> = joint_episode_gradient(&joint, &history, config.discount)?
            .as_slice()
            .iter()
            .map(|g| config.learning_rate * g)
            .collect();
        joint.add_to_params(&joint_delta);

        for (i, policy) in distributed.iter_mut().enumerate() {
            let local = history.agent(i);
            let delta = agent_update(policy, &local, config.learning_rate, config.discount)?;
            for (k, d) in delta.iter().enumerate() {
                let gap = (d - joint_delta[offsets[i] + k]).abs();
                report.max_update_gap = report.max_update_gap.max(gap);
            }
        }

        let joint_params = joint.params();
        let dist_params = distributed.iter().flat_map(|p| p.params().iter().copied());
        for (a, b) in dist_params.zip(&joint_params) {
            report.max_weight_gap = report.max_weight_gap.max((a - b).abs());
        }
    }
    Ok(report)
}
