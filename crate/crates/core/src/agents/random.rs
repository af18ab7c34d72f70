use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Uniform random stimulus, the constrained-random baseline.
#[derive(Debug, Clone)]
pub struct RandomAgent {
    actions: usize,
    rng: ChaCha8Rng,
}

impl RandomAgent {
    pub fn new(actions: usize, seed: u64) -> Self {
        Self {
            actions,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn select_action(&mut self) -> usize {
        self.rng.gen_range(0..self.actions)
    }
}
