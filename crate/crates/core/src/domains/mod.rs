//! Concrete games: the two-agent coordination game, the meal distribution,
//! a game with a non-Nash local optimum, and grid soccer.

mod coordination;
mod exhibit;
mod meal;
pub mod soccer;

pub use coordination::{build_coordination_game, coordination_profile, BRANCH, S1, S2, S3, S4, S5, S6, SAFE};
pub use exhibit::{build_local_optimum_game, local_optimum_profile, LOCAL_OPTIMUM_P};
pub use meal::{meal_target_distribution, MealItem};

use crate::policy::BoltzmannPolicy;

/// Weight magnitude used for probability 0 or 1 rows: softmax(20, -20)
/// leaves about 4e-18 on the other action.
pub const SATURATED: f64 = 20.0;

/// Two-action Boltzmann row (θ = 1) that picks action 0 with probability `p`.
pub fn binary_row(p: f64) -> [f64; 2] {
    let half = if p <= 0.0 {
        -SATURATED
    } else if p >= 1.0 {
        SATURATED
    } else {
        0.5 * (p / (1.0 - p)).ln()
    };
    [half, -half]
}

/// Reactive two-action policy over `observations` symbols with the given
/// probability of action 0 per symbol.
pub(crate) fn binary_policy(probs: &[f64]) -> BoltzmannPolicy {
    let weights = probs.iter().flat_map(|&p| binary_row(p)).collect();
    BoltzmannPolicy::from_weights(probs.len(), 2, 1.0, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_row_hits_probability() {
        for p in [0.1, 0.25, 0.5, 0.9] {
            let probs = binary_policy(&[p]).probabilities(0);
            assert!((probs[0] - p).abs() < 1e-15);
        }
        assert!(binary_policy(&[1.0]).probabilities(0)[1] < 1e-17);
        assert!(binary_policy(&[0.0]).probabilities(0)[0] < 1e-17);
    }
}
