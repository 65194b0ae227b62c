use crate::game::{AgentSpec, GameModel};
use crate::policy::AgentPolicy;

use super::binary_policy;

/// Probability of action 0 at the interior stationary point.
pub const LOCAL_OPTIMUM_P: f64 = 0.4;

const PAYOFF: [f64; 4] = [0.0, 4.0, 0.0, 3.0];
const END: usize = 6;
const FAIL: usize = 7;

fn counter_state(step: usize, count: usize) -> usize {
    step * (step + 1) / 2 + count
}

/// Two blind agents, one weight row each. On the first step agent 1 either
/// lets play continue (action 0) or ends it with nothing (action 1). Agent 0
/// acts on three consecutive steps; the game counts how often it chose
/// action 0 and pays `[0, 4, 0, 3][count]` on the last step.
///
/// With `p` = Pr(agent 0 plays 0) and agent 1 continuing, the value is
/// proportional to `12 p (1-p)^2 + 3 p^3`, which has an interior local
/// maximum at `p = 0.4` (value 1.92) while `p = 1` gives 3. The profile
/// "agent 0 at 0.4, agent 1 continues" is therefore a local optimum that a
/// unilateral switch to "always action 0" improves on.
pub fn build_local_optimum_game() -> GameModel {
    let agents = vec![
        AgentSpec::with_observation_map(2, 1, &[0; 8]),
        AgentSpec::with_observation_map(2, 1, &[0; 8]),
    ];
    let mut b = GameModel::builder(8, agents).initial_state(counter_state(0, 0));
    for step in 0..3 {
        for count in 0..=step {
            let s = counter_state(step, count);
            for a0 in 0..2 {
                let next_count = count + usize::from(a0 == 0);
                for a1 in 0..2 {
                    let actions = [a0, a1];
                    if step == 0 && a1 == 1 {
                        b = b.transition(s, &actions, FAIL, 1.0);
                    } else if step == 2 {
                        b = b
                            .transition(s, &actions, END, 1.0)
                            .reward(s, &actions, PAYOFF[next_count]);
                    } else {
                        b = b.transition(s, &actions, counter_state(step + 1, next_count), 1.0);
                    }
                }
            }
        }
    }
    b.terminal(END)
        .terminal(FAIL)
        .build()
        .expect("exhibit game is well formed")
}

/// Agent 0 at [`LOCAL_OPTIMUM_P`], agent 1 saturated on continuing.
pub fn local_optimum_profile() -> Vec<AgentPolicy> {
    vec![binary_policy(&[LOCAL_OPTIMUM_P]).into(), binary_policy(&[1.0]).into()]
}
