//! Distributed policy-gradient search for identical-payoff stochastic games.
//!
//! The crate is organized around a small set of pieces:
//!
//! * [`game`]: tabular and generative games, episode simulation and histories.
//! * [`policy`]: Boltzmann reactive policies and finite state controllers with
//!   exact log-probability gradients.
//! * [`learner`]: the per-trial gradient estimator, distributed and joint
//!   training drivers, and the lock-step equivalence harness.
//! * [`qlearn`]: a central-controller tabular Q-learning baseline.
//! * [`analysis`]: exact value and gradient oracles, exhaustive estimator
//!   expectation, Nash verification and the factored-representability gap.
//! * [`domains`]: the coordination game, the meal distribution and grid soccer.

pub mod analysis;
pub mod domains;
pub mod error;
pub mod game;
pub mod learner;
pub mod policy;
pub mod qlearn;
pub mod rng;

pub use error::{Error, Result};
pub use game::{
    decode_joint_action, discounted_return, joint_action_index, run_episode, AgentHistory, AgentShape, AgentSpec,
    Environment, GameModel, History, Transition,
};
pub use learner::{dgd_train, episode_gradient, joint_gradient_train, LearningCurve, TrainConfig};
pub use policy::{AgentPolicy, BoltzmannPolicy, FiniteStateController, GradientEstimate};
pub use rng::{EpisodeRng, SeedStreams, SimRng};
