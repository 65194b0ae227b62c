//! Exact oracles computed from the game model rather than by sampling.

mod chain;
mod enumerate;
mod gap;
mod gradient;
mod nash;

pub use chain::{exact_value, reachable_states, truncated_value, AugmentedChain};
pub use enumerate::{enumerate_estimator_expectation, history_count_bound, HISTORY_LIMIT};
pub use gap::{factored_gap, GapResult};
pub use gradient::{exact_gradient, exact_gradient_all, truncated_gradient, ParamRef};
pub use nash::{verify_nash, Deviation, DeviationScope, NashClass, NashReport};
