use serde::{Deserialize, Serialize};

use super::chain::AugmentedChain;
use crate::error::{Error, Result};
use crate::game::GameModel;
use crate::policy::AgentPolicy;

/// A single weight of a profile: `policies[agent].params()[index]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamRef {
    pub agent: usize,
    pub index: usize,
}

const FINE_STEP: f64 = 1e-6;
const COARSE_STEP: f64 = 1e-5;
const AGREEMENT: f64 = 1e-6;

fn central_difference<F>(policies: &[AgentPolicy], at: ParamRef, step: f64, value: &F) -> Result<f64>
where
    F: Fn(&[AgentPolicy]) -> Result<f64>,
{
    let mut shifted = policies.to_vec();
    let base = policies[at.agent].params()[at.index];
    shifted[at.agent].params_mut()[at.index] = base + step;
    let up = value(&shifted)?;
    shifted[at.agent].params_mut()[at.index] = base - step;
    let down = value(&shifted)?;
    Ok((up - down) / (2.0 * step))
}

/// Central difference at step 1e-6, cross-checked against step 1e-5. The
/// two must agree to 1e-6 relative (absolute below magnitude 1).
fn checked_difference<F>(policies: &[AgentPolicy], at: ParamRef, value: F) -> Result<f64>
where
    F: Fn(&[AgentPolicy]) -> Result<f64>,
{
    let limit = policies
        .get(at.agent)
        .map(|p| p.param_count())
        .ok_or(Error::IndexOutOfRange {
            what: "agent",
            index: at.agent,
            limit: policies.len(),
        })?;
    if at.index >= limit {
        return Err(Error::IndexOutOfRange {
            what: "weight",
            index: at.index,
            limit,
        });
    }
    let fine = central_difference(policies, at, FINE_STEP, &value)?;
    let coarse = central_difference(policies, at, COARSE_STEP, &value)?;
    if (fine - coarse).abs() > AGREEMENT * fine.abs().max(1.0) {
        return Err(Error::GradientUnstable { coarse, fine });
    }
    Ok(fine)
}

/// `∂V/∂w` of the exact infinite-horizon value.
pub fn exact_gradient(game: &GameModel, policies: &[AgentPolicy], gamma: f64, at: ParamRef) -> Result<f64> {
    checked_difference(policies, at, |p| Ok(AugmentedChain::build(game, p)?.values(gamma)?[0]))
}

/// `∂V_H/∂w` of the value truncated after `horizon` steps.
pub fn truncated_gradient(
    game: &GameModel,
    policies: &[AgentPolicy],
    gamma: f64,
    horizon: usize,
    at: ParamRef,
) -> Result<f64> {
    checked_difference(policies, at, |p| {
        Ok(AugmentedChain::build(game, p)?.truncated_value(gamma, horizon))
    })
}

/// Exact gradient for every weight, grouped per agent.
pub fn exact_gradient_all(game: &GameModel, policies: &[AgentPolicy], gamma: f64) -> Result<Vec<Vec<f64>>> {
    policies
        .iter()
        .enumerate()
        .map(|(agent, p)| {
            (0..p.param_count())
                .map(|index| exact_gradient(game, policies, gamma, ParamRef { agent, index }))
                .collect()
        })
        .collect()
}
