//! Nash-equilibrium verification for a given profile.
//!
//! Deviations are the deterministic reactive policies of one agent with the
//! others held fixed, plus a first-order check: every weight of the profile
//! must have `|∂V/∂w| <= 1e-6`. Deviations that leave the induced chain
//! unchanged on every reachable state (e.g. re-labelling actions in
//! unreachable or payoff-irrelevant situations) are not counted.

use serde::{Deserialize, Serialize};

use super::chain::{exact_value, reachable_states};
use super::gradient::exact_gradient_all;
use crate::error::{Error, Result};
use crate::game::{joint_action_index, AgentShape, GameModel};
use crate::policy::{AgentPolicy, BoltzmannPolicy};

const IMPROVEMENT_MARGIN: f64 = 1e-9;
const STATIONARY: f64 = 1e-6;
const KERNEL_TOLERANCE: f64 = 1e-12;
const DEVIATION_LIMIT: f64 = 1e6;
/// Softmax margin of enumerated deviations; the off-actions get e^-80.
const DEVIATION_MARGIN: f64 = 40.0;
/// Probabilities this close to 0 or 1 mark a saturated (boundary) profile.
const SATURATION: f64 = 2e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NashClass {
    StrictNash,
    WeakNash,
    NotNash,
}

impl NashClass {
    pub fn is_nash(self) -> bool {
        !matches!(self, NashClass::NotNash)
    }
}

/// Whether deterministic deviations exhaust the best responses. They do
/// when each deviating agent sees the state and every co-player is
/// reactive; otherwise the verdict only covers the deterministic class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeviationScope {
    Complete,
    DeterministicClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Deviation {
    /// Agent plays `actions[o]` on observation `o`.
    Deterministic {
        agent: usize,
        actions: Vec<usize>,
        value: f64,
        improvement: f64,
    },
    /// Agent moves its weights a small step along the value gradient.
    GradientStep {
        agent: usize,
        weights: Vec<f64>,
        value: f64,
        improvement: f64,
    },
}

impl Deviation {
    pub fn agent(&self) -> usize {
        match self {
            Deviation::Deterministic { agent, .. } | Deviation::GradientStep { agent, .. } => *agent,
        }
    }

    pub fn improvement(&self) -> f64 {
        match self {
            Deviation::Deterministic { improvement, .. } | Deviation::GradientStep { improvement, .. } => *improvement,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NashReport {
    pub profile: Vec<AgentPolicy>,
    pub value: f64,
    pub classification: NashClass,
    pub witness: Option<Deviation>,
    pub scope: DeviationScope,
    /// Largest `|∂V/∂w|` over the profile's weights.
    pub max_gradient: f64,
    /// Deviations evaluated / deviations that tie the profile's value.
    pub deviations: usize,
    pub ties: usize,
    /// Set when some action probability lies within 2e-9 of 0 or 1: the
    /// profile then approximates a boundary point it cannot reach.
    pub saturated: bool,
}

/// Per-state action distribution of a reactive agent, marginalized over its
/// observation.
fn state_action_probs(game: &GameModel, agent: usize, policy: &AgentPolicy, state: usize) -> Vec<f64> {
    let mut out = vec![0.0; policy.action_count()];
    for (o, &po) in game.observation_row(agent, state).iter().enumerate() {
        if po > 0.0 {
            for (a, p) in policy.action_probabilities(o, 0).into_iter().enumerate() {
                out[a] += po * p;
            }
        }
    }
    out
}

/// Next-state kernel and expected reward in `state` for a reactive profile.
fn kernel(game: &GameModel, shapes: &[AgentShape], policies: &[AgentPolicy], state: usize) -> (Vec<f64>, f64) {
    let per_agent: Vec<Vec<f64>> = policies
        .iter()
        .enumerate()
        .map(|(i, p)| state_action_probs(game, i, p, state))
        .collect();
    let mut next = vec![0.0; game.state_count()];
    let mut reward = 0.0;
    let joint: usize = shapes.iter().map(|s| s.action_count).product();
    for ja in 0..joint {
        let actions = crate::game::decode_joint_action(ja, shapes).expect("in range");
        let prob: f64 = actions.iter().enumerate().map(|(i, &a)| per_agent[i][a]).product();
        if prob == 0.0 {
            continue;
        }
        debug_assert_eq!(joint_action_index(&actions, shapes).unwrap(), ja);
        reward += prob * game.reward(state, ja);
        for &(s, p) in game.transition(state, ja) {
            next[s] += prob * p;
        }
    }
    (next, reward)
}

fn is_saturated(profile: &[AgentPolicy]) -> bool {
    let near_boundary = |row: Vec<f64>| row.len() > 1 && row.iter().any(|&x| x < SATURATION || x > 1.0 - SATURATION);
    profile.iter().any(|p| {
        (0..p.internal_state_count()).any(|n| {
            (0..p.observation_count())
                .any(|o| near_boundary(p.action_probabilities(o, n)) || near_boundary(p.transition_probabilities(n, o)))
        })
    })
}

/// Classifies `profile` as strict, weak or not a Nash equilibrium of the
/// discounted game.
pub fn verify_nash(game: &GameModel, profile: &[AgentPolicy], gamma: f64) -> Result<NashReport> {
    let value = exact_value(game, profile, gamma)?;
    let gradients = exact_gradient_all(game, profile, gamma)?;
    let max_gradient = gradients.iter().flatten().fold(0.0f64, |m, g| m.max(g.abs()));

    let shapes: Vec<AgentShape> = game.agents().iter().map(|a| a.shape).collect();
    let all_reactive = profile.iter().all(|p| p.is_reactive());
    let scope = if all_reactive && game.agents().iter().all(|a| a.observes_state()) {
        DeviationScope::Complete
    } else {
        DeviationScope::DeterministicClass
    };

    let total: f64 = shapes
        .iter()
        .map(|s| (s.action_count as f64).powi(s.observation_count as i32))
        .sum();
    if total > DEVIATION_LIMIT {
        return Err(Error::EnumerationLimit {
            bound: total,
            limit: DEVIATION_LIMIT,
        });
    }

    let reachable: Vec<usize> = reachable_states(game, profile)?.into_iter().collect();
    let base_kernels: Option<Vec<(Vec<f64>, f64)>> =
        all_reactive.then(|| reachable.iter().map(|&s| kernel(game, &shapes, profile, s)).collect());

    let mut best: Option<Deviation> = None;
    let mut deviations = 0;
    let mut ties = 0;
    for (agent, shape) in shapes.iter().enumerate() {
        let mut actions = vec![0usize; shape.observation_count];
        loop {
            let mut deviated = profile.to_vec();
            deviated[agent] = BoltzmannPolicy::deterministic(&actions, shape.action_count, DEVIATION_MARGIN).into();

            let ineffective = base_kernels.as_ref().is_some_and(|base| {
                reachable.iter().zip(base).all(|(&s, (next, reward))| {
                    let (dn, dr) = kernel(game, &shapes, &deviated, s);
                    (dr - reward).abs() <= KERNEL_TOLERANCE
                        && dn.iter().zip(next).all(|(a, b)| (a - b).abs() <= KERNEL_TOLERANCE)
                })
            });
            if !ineffective {
                deviations += 1;
                let dev_value = exact_value(game, &deviated, gamma)?;
                let improvement = dev_value - value;
                if improvement.abs() <= IMPROVEMENT_MARGIN {
                    ties += 1;
                }
                if improvement > IMPROVEMENT_MARGIN && best.as_ref().map_or(true, |b| improvement > b.improvement()) {
                    best = Some(Deviation::Deterministic {
                        agent,
                        actions: actions.clone(),
                        value: dev_value,
                        improvement,
                    });
                }
            }

            if !advance(&mut actions, shape.action_count) {
                break;
            }
        }
    }

    if best.is_none() && max_gradient > STATIONARY {
        best = gradient_witness(game, profile, gamma, value, &gradients)?;
    }

    let classification = if best.is_some() {
        NashClass::NotNash
    } else if ties > 0 || max_gradient > STATIONARY {
        NashClass::WeakNash
    } else {
        NashClass::StrictNash
    };

    Ok(NashReport {
        profile: profile.to_vec(),
        value,
        classification,
        witness: best,
        scope,
        max_gradient,
        deviations,
        ties,
        saturated: is_saturated(profile),
    })
}

fn advance(actions: &mut [usize], radix: usize) -> bool {
    for a in actions.iter_mut() {
        *a += 1;
        if *a < radix {
            return true;
        }
        *a = 0;
    }
    false
}

/// A unilateral improvement found by stepping the agent with the steepest
/// own-weight gradient along that gradient.
fn gradient_witness(
    game: &GameModel,
    profile: &[AgentPolicy],
    gamma: f64,
    value: f64,
    gradients: &[Vec<f64>],
) -> Result<Option<Deviation>> {
    let (agent, grad) = gradients
        .iter()
        .enumerate()
        .max_by(|a, b| {
            let na = a.1.iter().map(|g| g * g).sum::<f64>();
            let nb = b.1.iter().map(|g| g * g).sum::<f64>();
            na.total_cmp(&nb)
        })
        .expect("at least one agent");
    let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    let mut step = 1.0;
    for _ in 0..30 {
        let mut deviated = profile.to_vec();
        for (w, g) in deviated[agent].params_mut().iter_mut().zip(grad) {
            *w += step * g / norm;
        }
        let dev_value = exact_value(game, &deviated, gamma)?;
        if dev_value - value > 0.0 {
            return Ok(Some(Deviation::GradientStep {
                agent,
                weights: deviated[agent].params().to_vec(),
                value: dev_value,
                improvement: dev_value - value,
            }));
        }
        step *= 0.5;
    }
    Ok(None)
}
