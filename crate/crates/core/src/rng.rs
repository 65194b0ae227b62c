//! Seeded randomness. A run has one root seed; independent streams are
//! carved out of it by ChaCha stream id so that the environment, each agent
//! and the evaluator never share a generator.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Reserved stream ids. Agent `i` uses `AGENT_BASE + i`.
pub const ENV_STREAM: u64 = 0;
pub const EVAL_STREAM: u64 = 1;
pub const INIT_STREAM: u64 = 2;
pub const AGENT_BASE: u64 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStreams {
    root: u64,
}

impl SeedStreams {
    pub fn new(root: u64) -> Self {
        Self { root }
    }

    pub fn root(&self) -> u64 {
        self.root
    }

    pub fn stream(&self, id: u64) -> SimRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.root);
        rng.set_stream(id);
        rng
    }

    /// Streams for a secondary purpose (evaluation, initialization) that
    /// must not perturb the training streams. The `salt` selects a
    /// derived root so the agent streams of the derived set differ too.
    pub fn derive(&self, salt: u64) -> SeedStreams {
        let mut rng = self.stream(EVAL_STREAM.wrapping_add(salt << 8));
        SeedStreams::new(rand::RngCore::next_u64(&mut rng))
    }

    pub fn episode_rng(&self, agents: usize) -> EpisodeRng {
        EpisodeRng {
            env: self.stream(ENV_STREAM),
            agents: (0..agents as u64).map(|i| self.stream(AGENT_BASE + i)).collect(),
        }
    }
}

/// The generators consumed by one simulated episode stream: one for the
/// environment (transitions, observations, opponents) and one per agent.
#[derive(Debug, Clone)]
pub struct EpisodeRng {
    pub env: SimRng,
    pub agents: Vec<SimRng>,
}

impl EpisodeRng {
    pub fn new(seed: u64, agents: usize) -> Self {
        SeedStreams::new(seed).episode_rng(agents)
    }
}

/// Sample an index from a discrete distribution by inverse CDF. The last
/// index absorbs any rounding slack.
pub fn sample_index<R: rand::Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}
