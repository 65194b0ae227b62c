use crate::game::{AgentSpec, GameModel};
use crate::policy::AgentPolicy;

use super::binary_policy;

pub const S1: usize = 0;
pub const S2: usize = 1;
pub const S3: usize = 2;
pub const S4: usize = 3;
pub const S5: usize = 4;
pub const S6: usize = 5;

/// Action 0 ("top") at s1 leads into the coordination step.
pub const BRANCH: usize = 0;
/// Action 1 at s1 takes the safe +5.
pub const SAFE: usize = 1;

/// Six-state, two-agent coordination game with full observability. Agent 0
/// alone chooses at s1: action 0 goes to s2, action 1 to s3. At s2 matching
/// actions pay +10 (to s4) and mismatched ones pay -10 (to s5). s3 pays +5
/// for any joint action (to s6). s4, s5 and s6 are terminal.
pub fn build_coordination_game() -> GameModel {
    let agents = vec![AgentSpec::fully_observing(2, 6), AgentSpec::fully_observing(2, 6)];
    let mut b = GameModel::builder(6, agents).initial_state(S1);
    for other in 0..2 {
        b = b
            .transition(S1, &[BRANCH, other], S2, 1.0)
            .transition(S1, &[SAFE, other], S3, 1.0);
        for a in 0..2 {
            let (next, r) = if a == other { (S4, 10.0) } else { (S5, -10.0) };
            b = b.transition(S2, &[a, other], next, 1.0).reward(S2, &[a, other], r);
            b = b.transition(S3, &[a, other], S6, 1.0).reward(S3, &[a, other], 5.0);
        }
    }
    b.terminal(S4)
        .terminal(S5)
        .terminal(S6)
        .build()
        .expect("coordination game is well formed")
}

/// The profile `{p1, p2; q}`: agent 0 picks action 0 with probability `p1`
/// at s1 and `p2` at s2; agent 1 picks action 0 with probability `q` at s2.
/// All other rows are uniform.
pub fn coordination_profile(p1: f64, p2: f64, q: f64) -> Vec<AgentPolicy> {
    let mut first = vec![0.5; 6];
    first[S1] = p1;
    first[S2] = p2;
    let mut second = vec![0.5; 6];
    second[S2] = q;
    vec![binary_policy(&first).into(), binary_policy(&second).into()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::run_episode;
    use crate::rng::EpisodeRng;

    fn rewards(p1: f64, p2: f64, q: f64) -> Vec<f64> {
        let game = build_coordination_game();
        let mut rng = EpisodeRng::new(7, 2);
        let h = run_episode(&game, &coordination_profile(p1, p2, q), 10, &mut rng).unwrap();
        h.rewards().collect()
    }

    #[test]
    fn episodes_follow_the_branches() {
        assert_eq!(rewards(1.0, 1.0, 1.0), vec![0.0, 10.0]);
        assert_eq!(rewards(1.0, 1.0, 0.0), vec![0.0, -10.0]);
        assert_eq!(rewards(0.0, 0.3, 0.8), vec![0.0, 5.0]);
    }

    #[test]
    fn first_agent_alone_decides_s1() {
        let game = build_coordination_game();
        for other in 0..2 {
            assert_eq!(game.transition(S1, other * 2), &[(S2, 1.0)]);
            assert_eq!(game.transition(S1, 1 + other * 2), &[(S3, 1.0)]);
        }
    }
}
